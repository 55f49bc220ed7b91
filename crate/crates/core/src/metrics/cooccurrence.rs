use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::annotation::{check_pair, AnnotationMatrix, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CooccurrenceKind {
    /// Pearson correlation of 0/1 columns (the phi coefficient), in [-1, 1].
    Pearson,
    /// Intersection over union of the sentences carrying each code, in [0, 1].
    Jaccard,
}

/// Square code-by-code matrix averaged over narratives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    pub kind: CooccurrenceKind,
    pub codes: Vec<String>,
    /// Row-major; `None` where no narrative gave a defined value.
    pub values: Vec<Option<f64>>,
    /// Number of narratives contributing to each cell.
    pub contributors: Vec<usize>,
    pub narratives: usize,
}

impl CooccurrenceMatrix {
    pub fn size(&self) -> usize {
        self.codes.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.codes.len() + col]
    }

    pub fn contributors_at(&self, row: usize, col: usize) -> usize {
        self.contributors[row * self.codes.len() + col]
    }

    pub fn position(&self, code: &str) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }
}

/// Phi coefficient of two 0/1 columns; `None` if either is constant.
pub fn pearson_pair(x: &[u8], y: &[u8]) -> Option<f64> {
    let n = x.len() as i128;
    let sx = x.iter().filter(|&&v| v == 1).count() as i128;
    let sy = y.iter().filter(|&&v| v == 1).count() as i128;
    let sxy = x.iter().zip(y).filter(|(&a, &b)| a == 1 && b == 1).count() as i128;
    let vx = n * sx - sx * sx;
    let vy = n * sy - sy * sy;
    if vx == 0 || vy == 0 {
        return None;
    }
    let r = (n * sxy - sx * sy) as f64 / libm::sqrt((vx * vy) as f64);
    Some(r.clamp(-1.0, 1.0))
}

/// `|A ∩ B| / |A ∪ B|` over the sentences where each column is 1; `None`
/// when neither code appears.
pub fn jaccard_pair(x: &[u8], y: &[u8]) -> Option<f64> {
    let inter = x.iter().zip(y).filter(|(&a, &b)| a == 1 && b == 1).count();
    let union = x.iter().zip(y).filter(|(&a, &b)| a == 1 || b == 1).count();
    (union > 0).then(|| inter as f64 / union as f64)
}

/// Mean over narratives of the per-narrative Pearson r between code columns.
/// The diagonal is 1.
pub fn pearson_matrix(matrices: &[AnnotationMatrix]) -> Result<CooccurrenceMatrix, MetricsError> {
    build(matrices, CooccurrenceKind::Pearson)
}

/// Mean over narratives of the per-narrative Jaccard index between code
/// columns. The diagonal is 1 wherever the code appears at all.
pub fn jaccard_matrix(matrices: &[AnnotationMatrix]) -> Result<CooccurrenceMatrix, MetricsError> {
    build(matrices, CooccurrenceKind::Jaccard)
}

fn build(matrices: &[AnnotationMatrix], kind: CooccurrenceKind) -> Result<CooccurrenceMatrix, MetricsError> {
    let first = matrices.first().ok_or(MetricsError::EmptyInput)?;
    let k = first.num_codes();
    for m in matrices {
        let mut violations: Vec<Violation> = m.non_binary_cells().collect();
        if m.codes() != first.codes() {
            violations.extend(check_pair(first, m).err().unwrap_or_default());
        }
        if !violations.is_empty() {
            return Err(MetricsError::Alignment(violations));
        }
    }

    let mut sums = vec![0.0f64; k * k];
    let mut contributors = vec![0usize; k * k];
    for m in matrices {
        let columns: Vec<Vec<u8>> = (0..k).map(|c| m.column(c)).collect();
        for i in 0..k {
            for j in i..k {
                let value = match (kind, i == j) {
                    (CooccurrenceKind::Pearson, true) => Some(1.0),
                    (CooccurrenceKind::Pearson, false) => pearson_pair(&columns[i], &columns[j]),
                    (CooccurrenceKind::Jaccard, _) => jaccard_pair(&columns[i], &columns[j]),
                };
                if let Some(v) = value {
                    sums[i * k + j] += v;
                    contributors[i * k + j] += 1;
                    if i != j {
                        sums[j * k + i] += v;
                        contributors[j * k + i] += 1;
                    }
                }
            }
        }
    }
    let values = sums
        .iter()
        .zip(&contributors)
        .map(|(&s, &n)| (n > 0).then(|| s / n as f64))
        .collect();
    Ok(CooccurrenceMatrix {
        kind,
        codes: first.codes().to_vec(),
        values,
        contributors,
        narratives: matrices.len(),
    })
}
