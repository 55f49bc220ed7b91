//! Report bundles and their on-disk form: CSV tables, one JSON document and
//! SVG figures. Output bytes depend only on the bundle (and on whether the
//! generation timestamp is kept).

use std::path::{Path, PathBuf};

use pncode_core::annotation::{code_frequencies, AnnotationMatrix, MatrixError};
use pncode_core::format::{fixed4, fixed4_opt, UNDEFINED};
use pncode_core::metrics::{AgreementSummary, ConfusionCounts, CooccurrenceMatrix, EvaluationReport};
use pncode_core::svg::{render_heatmap_svg, render_segment_strip_svg, SvgError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed bundle: {message}")]
    Bundle { path: String, message: String },
    #[error("bundles disagree on codebook version ({0} vs {1})")]
    VersionConflict(String, String),
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("malformed metrics table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub codebook_version: String,
    pub model_name: Option<String>,
    pub run_count: Option<usize>,
    /// The only time-dependent field; dropped when timestamps are disabled.
    pub generated_at: Option<String>,
    pub tool_version: String,
}

impl Provenance {
    pub fn new(codebook_version: &str) -> Self {
        Provenance {
            codebook_version: codebook_version.to_string(),
            model_name: None,
            run_count: None,
            generated_at: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn stamp(mut self, timestamps: bool) -> Self {
        self.generated_at =
            timestamps.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        self
    }
}

/// Per-narrative code frequencies (percent of sentences) and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub codes: Vec<String>,
    pub narratives: Vec<String>,
    pub per_narrative: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

impl FrequencyTable {
    pub fn compute(matrices: &[AnnotationMatrix]) -> Result<Self, MatrixError> {
        let first = matrices.first().ok_or(MatrixError::EmptyMatrix)?;
        let per_narrative = matrices.iter().map(code_frequencies).collect::<Result<Vec<_>, _>>()?;
        let k = first.num_codes();
        let mean = (0..k)
            .map(|c| per_narrative.iter().map(|f| f[c]).sum::<f64>() / per_narrative.len() as f64)
            .collect();
        Ok(FrequencyTable {
            codes: first.codes().to_vec(),
            narratives: matrices.iter().map(|m| m.narrative_id().to_string()).collect(),
            per_narrative,
            mean,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub provenance: Provenance,
    #[serde(default)]
    pub evaluations: Vec<EvaluationReport>,
    /// Pairwise agreement between human annotators.
    #[serde(default)]
    pub agreement: Vec<AgreementSummary>,
    #[serde(default)]
    pub frequencies: Option<FrequencyTable>,
    #[serde(default)]
    pub pearson: Option<CooccurrenceMatrix>,
    #[serde(default)]
    pub jaccard: Option<CooccurrenceMatrix>,
}

impl ReportBundle {
    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io { path: shown.clone(), source })?;
        serde_json::from_str(&text).map_err(|e| ReportError::Bundle { path: shown, message: e.to_string() })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    /// Folds `other` into `self`: evaluations and agreements are appended,
    /// analytics and provenance fields present in `other` replace ours.
    pub fn merge(&mut self, other: ReportBundle) -> Result<(), ReportError> {
        let (a, b) = (&self.provenance.codebook_version, &other.provenance.codebook_version);
        if !a.is_empty() && !b.is_empty() && a != b {
            return Err(ReportError::VersionConflict(a.clone(), b.clone()));
        }
        if a.is_empty() {
            self.provenance.codebook_version = b.clone();
        }
        let p = other.provenance;
        self.provenance.model_name = p.model_name.or(self.provenance.model_name.take());
        self.provenance.run_count = p.run_count.or(self.provenance.run_count);
        self.provenance.generated_at = p.generated_at.or(self.provenance.generated_at.take());
        self.evaluations.extend(other.evaluations);
        self.agreement.extend(other.agreement);
        self.frequencies = other.frequencies.or(self.frequencies.take());
        self.pearson = other.pearson.or(self.pearson.take());
        self.jaccard = other.jaccard.or(self.jaccard.take());
        Ok(())
    }
}

pub const METRICS_HEADER: [&str; 12] = [
    "comparison",
    "code",
    "avg_freq",
    "p_o",
    "pabak",
    "kappa",
    "precision",
    "recall",
    "f1_positive",
    "f1_weighted",
    "support",
    "n",
];

/// One line of `metrics.csv`; `None` is written as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub comparison: String,
    pub code: String,
    pub avg_freq: Option<f64>,
    pub p_o: Option<f64>,
    pub pabak: Option<f64>,
    pub kappa: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1_positive: Option<f64>,
    pub f1_weighted: Option<f64>,
    pub support: Option<u64>,
    pub n: Option<u64>,
}

impl MetricsRow {
    fn blank(comparison: &str, code: &str) -> Self {
        MetricsRow {
            comparison: comparison.into(),
            code: code.into(),
            avg_freq: None,
            p_o: None,
            pabak: None,
            kappa: None,
            precision: None,
            recall: None,
            f1_positive: None,
            f1_weighted: None,
            support: None,
            n: None,
        }
    }

    fn fields(&self) -> [String; 12] {
        let int = |v: Option<u64>| v.map_or(UNDEFINED.to_string(), |v| v.to_string());
        [
            self.comparison.clone(),
            self.code.clone(),
            fixed4_opt(self.avg_freq),
            fixed4_opt(self.p_o),
            fixed4_opt(self.pabak),
            fixed4_opt(self.kappa),
            fixed4_opt(self.precision),
            fixed4_opt(self.recall),
            fixed4_opt(self.f1_positive),
            fixed4_opt(self.f1_weighted),
            int(self.support),
            int(self.n),
        ]
    }
}

/// Rows for each evaluation (per code, then `all` with pooled p_o, PABAK,
/// kappa and micro precision/recall/F1, then `macro`), followed by the same
/// layout for each human agreement pair. `avg_freq` is the number of positive
/// sentences averaged over the two sides compared.
pub fn metrics_rows(bundle: &ReportBundle) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    for e in &bundle.evaluations {
        let name = e.gold_policy.as_str();
        for c in &e.per_code {
            rows.push(MetricsRow {
                avg_freq: Some(avg_positives(&c.counts)),
                p_o: Some(c.p_o),
                pabak: Some(c.pabak),
                kappa: c.kappa,
                precision: c.precision,
                recall: c.recall,
                f1_positive: c.f1_positive,
                f1_weighted: c.f1_weighted,
                support: Some(c.support),
                n: Some(c.counts.total()),
                ..MetricsRow::blank(name, &c.code_id)
            });
        }
        let n: u64 = e.per_code.iter().map(|c| c.counts.total()).sum();
        rows.push(MetricsRow {
            p_o: Some(e.global_p_o),
            pabak: Some(e.global_pabak),
            kappa: e.global_kappa,
            precision: e.micro_precision,
            recall: e.micro_recall,
            f1_positive: e.micro_f1,
            f1_weighted: e.mean_weighted_f1,
            support: Some(e.per_code.iter().map(|c| c.support).sum()),
            n: Some(n),
            ..MetricsRow::blank(name, "all")
        });
        rows.push(MetricsRow { f1_positive: e.macro_f1, ..MetricsRow::blank(name, "macro") });
    }
    for a in &bundle.agreement {
        let name = format!("agreement:{}~{}", a.rater_a, a.rater_b);
        for c in &a.per_code {
            rows.push(MetricsRow {
                avg_freq: Some(avg_positives(&c.counts)),
                p_o: Some(c.p_o),
                pabak: Some(c.pabak),
                kappa: c.kappa,
                n: Some(c.counts.total()),
                ..MetricsRow::blank(&name, &c.code)
            });
        }
        rows.push(MetricsRow {
            p_o: Some(a.global.p_o),
            pabak: Some(a.global.pabak),
            kappa: a.global.kappa,
            n: Some(a.global.counts.total()),
            ..MetricsRow::blank(&name, "all")
        });
        rows.push(MetricsRow { pabak: Some(a.macro_pabak), kappa: a.macro_kappa, ..MetricsRow::blank(&name, "macro") });
    }
    rows
}

fn avg_positives(c: &ConfusionCounts) -> f64 {
    (2 * c.tp + c.fp + c.fn_) as f64 / 2.0
}

fn csv_string(records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in records {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn metrics_csv(bundle: &ReportBundle) -> String {
    let header = METRICS_HEADER.iter().map(|s| s.to_string()).collect();
    csv_string(std::iter::once(header).chain(metrics_rows(bundle).iter().map(|r| r.fields().to_vec())))
}

/// Parses `metrics.csv` back into rows.
pub fn read_metrics_csv(text: &str) -> Result<Vec<MetricsRow>, ReportError> {
    let bad = |m: String| ReportError::Table(m);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(METRICS_HEADER.iter().copied()) {
        return Err(bad("unexpected header".into()));
    }
    let float = |s: &str| -> Result<Option<f64>, ReportError> {
        if s == UNDEFINED {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("not a number: {s:?}")))
        }
    };
    let int = |s: &str| -> Result<Option<u64>, ReportError> {
        if s == UNDEFINED {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("not an integer: {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for rec in reader.records() {
        let r = rec.map_err(|e| bad(e.to_string()))?;
        rows.push(MetricsRow {
            comparison: r[0].to_string(),
            code: r[1].to_string(),
            avg_freq: float(&r[2])?,
            p_o: float(&r[3])?,
            pabak: float(&r[4])?,
            kappa: float(&r[5])?,
            precision: float(&r[6])?,
            recall: float(&r[7])?,
            f1_positive: float(&r[8])?,
            f1_weighted: float(&r[9])?,
            support: int(&r[10])?,
            n: int(&r[11])?,
        });
    }
    Ok(rows)
}

pub fn frequencies_csv(t: &FrequencyTable) -> String {
    let mut header = vec!["code".to_string()];
    header.extend(t.narratives.iter().cloned());
    header.push("mean".into());
    let rows = t.codes.iter().enumerate().map(|(c, code)| {
        let mut r = vec![code.clone()];
        r.extend(t.per_narrative.iter().map(|f| fixed4(f[c])));
        r.push(fixed4(t.mean[c]));
        r
    });
    csv_string(std::iter::once(header).chain(rows))
}

pub fn cooccurrence_csv(m: &CooccurrenceMatrix) -> String {
    let mut header = vec!["code".to_string()];
    header.extend(m.codes.iter().cloned());
    let rows = m.codes.iter().enumerate().map(|(i, code)| {
        let mut r = vec![code.clone()];
        r.extend((0..m.size()).map(|j| fixed4_opt(m.get(i, j))));
        r
    });
    csv_string(std::iter::once(header).chain(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { csv: true, json: true, svg: false }
    }
}

/// Matrices to draw as segment strips (one, or two side by side).
#[derive(Debug, Clone, Default)]
pub struct StripSpec {
    pub matrices: Vec<AnnotationMatrix>,
    /// Codes to draw; all codes when empty.
    pub codes: Vec<String>,
}

fn write(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<(), ReportError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|source| ReportError::Io { path: path.display().to_string(), source })?;
    written.push(path);
    Ok(())
}

/// Writes the selected outputs into `dir` (created if missing) and returns
/// the paths written, in order. With `timestamps` off the provenance
/// timestamp is omitted so identical bundles give identical bytes.
pub fn write_report(
    bundle: &ReportBundle,
    dir: &Path,
    formats: Formats,
    strip: Option<&StripSpec>,
    timestamps: bool,
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io { path: dir.display().to_string(), source })?;
    let mut bundle = bundle.clone();
    if !timestamps {
        bundle.provenance.generated_at = None;
    }
    let mut written = Vec::new();
    if formats.csv {
        if !bundle.evaluations.is_empty() || !bundle.agreement.is_empty() {
            write(dir, "metrics.csv", &metrics_csv(&bundle), &mut written)?;
        }
        if let Some(f) = &bundle.frequencies {
            write(dir, "frequencies.csv", &frequencies_csv(f), &mut written)?;
        }
        if let Some(m) = &bundle.pearson {
            write(dir, "pearson.csv", &cooccurrence_csv(m), &mut written)?;
        }
        if let Some(m) = &bundle.jaccard {
            write(dir, "jaccard.csv", &cooccurrence_csv(m), &mut written)?;
        }
    }
    if formats.json {
        write(dir, "report.json", &bundle.to_json(), &mut written)?;
    }
    if formats.svg {
        if let Some(m) = &bundle.pearson {
            write(dir, "pearson.svg", &render_heatmap_svg(m, "Pearson correlation of code co-occurrence", None)?, &mut written)?;
        }
        if let Some(m) = &bundle.jaccard {
            write(dir, "jaccard.svg", &render_heatmap_svg(m, "Jaccard similarity of code co-occurrence", None)?, &mut written)?;
        }
    }
    if let Some(spec) = strip {
        let refs: Vec<&AnnotationMatrix> = spec.matrices.iter().collect();
        let codes: Vec<&str> = if spec.codes.is_empty() {
            refs.first().map(|m| m.codes().iter().map(String::as_str).collect()).unwrap_or_default()
        } else {
            spec.codes.iter().map(String::as_str).collect()
        };
        let title = refs.iter().map(|m| m.annotator().label.as_str()).collect::<Vec<_>>().join(" vs ");
        write(dir, "strip.svg", &render_segment_strip_svg(&refs, &codes, &title)?, &mut written)?;
    }
    Ok(written)
}
