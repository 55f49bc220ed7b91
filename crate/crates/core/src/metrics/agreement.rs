use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ratio, tally_pairs, ConfusionCounts, MetricsError};
use crate::annotation::AnnotationMatrix;

/// One value per code in column order, plus the value over all flattened cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerCode<T> {
    pub per_code: Vec<T>,
    pub global: T,
}

/// Fraction of sentences on which `a` and `b` agree.
pub fn percent_agreement(a: &AnnotationMatrix, b: &AnnotationMatrix) -> Result<PerCode<f64>, MetricsError> {
    let t = tally_pairs([(a, b)])?;
    Ok(PerCode {
        per_code: t.per_code.iter().map(p_o).collect(),
        global: p_o(&t.global),
    })
}

/// Cohen's kappa per code and over flattened cells; `None` when expected
/// agreement is 1.
pub fn cohen_kappa(a: &AnnotationMatrix, b: &AnnotationMatrix) -> Result<PerCode<Option<f64>>, MetricsError> {
    let t = tally_pairs([(a, b)])?;
    Ok(PerCode {
        per_code: t.per_code.iter().map(kappa).collect(),
        global: kappa(&t.global),
    })
}

/// Prevalence- and bias-adjusted kappa, `2 p_o - 1`.
pub fn pabak(a: &AnnotationMatrix, b: &AnnotationMatrix) -> Result<PerCode<f64>, MetricsError> {
    let po = percent_agreement(a, b)?;
    Ok(PerCode {
        per_code: po.per_code.into_iter().map(pabak_from_po).collect(),
        global: pabak_from_po(po.global),
    })
}

pub(crate) fn p_o(c: &ConfusionCounts) -> f64 {
    ratio(c.agreements(), c.total()).unwrap_or(f64::NAN)
}

/// Prevalence- and bias-adjusted kappa, `2 p_o - 1`.
pub fn pabak_from_po(p_o: f64) -> f64 {
    2.0 * p_o - 1.0
}

/// `(n*agree - S) / (n^2 - S)` where `S/n^2` is the chance agreement from
/// both raters' marginals.
pub(crate) fn kappa(c: &ConfusionCounts) -> Option<f64> {
    let n = c.total() as i128;
    let a_pos = (c.tp + c.fp) as i128;
    let b_pos = (c.tp + c.fn_) as i128;
    let chance = a_pos * b_pos + (n - a_pos) * (n - b_pos);
    let den = n * n - chance;
    if den == 0 {
        return None;
    }
    let num = n * c.agreements() as i128 - chance;
    Some(num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeAgreement {
    pub code: String,
    pub p_o: f64,
    pub pabak: f64,
    pub kappa: Option<f64>,
    pub counts: ConfusionCounts,
}

/// Agreement between two raters pooled over any number of narratives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub rater_a: String,
    pub rater_b: String,
    pub per_code: Vec<CodeAgreement>,
    pub global: CodeAgreement,
    /// Mean of the per-code PABAK values.
    pub macro_pabak: f64,
    /// Mean of the defined per-code kappas.
    pub macro_kappa: Option<f64>,
}

impl AgreementSummary {
    pub fn compute(pairs: &[(&AnnotationMatrix, &AnnotationMatrix)]) -> Result<Self, MetricsError> {
        let t = tally_pairs(pairs.iter().copied())?;
        let (a, _) = pairs[0];
        let entry = |code: &str, c: &ConfusionCounts| {
            let po = p_o(c);
            CodeAgreement { code: code.into(), p_o: po, pabak: pabak_from_po(po), kappa: kappa(c), counts: *c }
        };
        let per_code: Vec<CodeAgreement> = a.codes().iter().zip(&t.per_code).map(|(code, c)| entry(code, c)).collect();
        let macro_pabak = per_code.iter().map(|c| c.pabak).sum::<f64>() / per_code.len() as f64;
        let kappas: Vec<f64> = per_code.iter().filter_map(|c| c.kappa).collect();
        let macro_kappa = (!kappas.is_empty()).then(|| kappas.iter().sum::<f64>() / kappas.len() as f64);
        Ok(AgreementSummary {
            rater_a: a.annotator().label.clone(),
            rater_b: pairs[0].1.annotator().label.clone(),
            global: entry("global", &t.global),
            per_code,
            macro_pabak,
            macro_kappa,
        })
    }
}
