//! The `pncode` command line. Every invocation writes a run manifest.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pncode_core::annotation::{majority_vote, AnnotationMatrix, TieBreak, VoteError};
use pncode_core::codebook::default_codebook;
use pncode_core::metrics::{
    evaluate, jaccard_matrix, pearson_matrix, AgreementSummary, EvaluationItem, GoldPolicy,
};
use pncode_core::{Codebook, NarrativeDocument};
use serde::Serialize;
use serde_json::Value;

use crate::audit::{audit_path, write_audit_log};
use crate::chain::{annotate_corpus, RunStatus};
use crate::config::{resolve, ConfigFile, Overrides};
use crate::files::{
    import_human_csv, load_codebook_file, load_narrative, read_matrix, read_run_set, save_narrative, write_matrix,
    write_run_set, NarrativeFormat,
};
use crate::provider::{HttpProvider, MockProvider, Provider};
use crate::report::{write_report, Formats, FrequencyTable, Provenance, ReportBundle, StripSpec};

#[derive(Debug, Parser)]
#[command(name = "pncode", version, about = "Sentence-level Public Narrative coding with chained model prompts")]
pub struct Cli {
    /// Config file (default: ./pncode.toml when present).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Leave wall-clock times out of every output.
    #[arg(long, global = true)]
    pub no_timestamps: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a plain-text transcript into sentences.
    Segment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Narrative id (default: input file stem).
        #[arg(long)]
        id: Option<String>,
    },
    /// Annotate narratives with repeated three-stage prompt chains.
    Annotate(AnnotateArgs),
    /// Cell-wise majority over the runs of a run set.
    Vote {
        runset: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = TieArg::Zero)]
        tie_break: TieArg,
    },
    /// Score a prediction against human annotators.
    Evaluate(EvaluateArgs),
    /// Code frequencies and co-occurrence over annotation matrices.
    Analyze(AnalyzeArgs),
    /// Write tables and figures from one or more bundles.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Narratives: `.txt` transcripts or segmented `.jsonl` documents.
    #[arg(required = true)]
    pub docs: Vec<PathBuf>,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub max_retries_per_stage: Option<u32>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    /// Use the offline keyword-rule model.
    #[arg(long)]
    pub mock: bool,
    /// Run-set file, or a directory when several narratives are given.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predicted matrix (JSON or CSV).
    pub pred: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub annotators: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Both)]
    pub gold_policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = TieArg::Zero)]
    pub tie_break: TieArg,
    /// Narrative the annotations refer to; enables alignment checks.
    #[arg(long)]
    pub doc: Option<PathBuf>,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Bundle JSON to write.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(required = true)]
    pub matrices: Vec<PathBuf>,
    #[arg(long)]
    pub pearson: bool,
    #[arg(long)]
    pub jaccard: bool,
    #[arg(long)]
    pub frequencies: bool,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub bundles: Vec<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also draw heatmaps.
    #[arg(long)]
    pub svg: bool,
    /// One or two matrices to draw as segment strips.
    #[arg(long, num_args = 1..=2)]
    pub strip: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub strip_codes: Vec<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FormatArg::Csv, FormatArg::Json])]
    pub formats: Vec<FormatArg>,
    #[arg(long)]
    pub codebook: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieArg {
    Zero,
    One,
}

impl From<TieArg> for TieBreak {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Zero => TieBreak::Zero,
            TieArg::One => TieBreak::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    MinMatch,
    Majority,
    Both,
}

impl PolicyArg {
    fn policies(self) -> &'static [GoldPolicy] {
        match self {
            PolicyArg::MinMatch => &[GoldPolicy::MinimumMatch],
            PolicyArg::Majority => &[GoldPolicy::Majority],
            PolicyArg::Both => &[GoldPolicy::MinimumMatch, GoldPolicy::Majority],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success = 0,
    ValidationError = 1,
    ProviderFailure = 2,
    PartialRuns = 3,
}

#[derive(Debug)]
struct Failure {
    status: ExitStatus,
    message: String,
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure { status: ExitStatus::ValidationError, message: e.to_string() }
}

fn provider_failure(e: impl std::fmt::Display) -> Failure {
    Failure { status: ExitStatus::ProviderFailure, message: e.to_string() }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub exit_status: ExitStatus,
    pub exit_code: i32,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<String>,
}

/// Manifest file used when the command line cannot be parsed.
pub const FALLBACK_MANIFEST: &str = "pncode-manifest.json";

struct Ctx {
    timestamps: bool,
    config_path: Option<PathBuf>,
    config: Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    warnings: Vec<String>,
}

impl Ctx {
    fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    fn output(&mut self, p: &Path) {
        self.outputs.push(p.display().to_string());
    }

    fn codebook(&mut self, path: Option<&Path>) -> Result<Codebook, Failure> {
        match path {
            Some(p) => {
                self.input(p);
                load_codebook_file(p).map_err(|e| invalid(format!("{}: {e}", p.display())))
            }
            None => Ok(default_codebook()),
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn manifest_path(cli: &Cli) -> PathBuf {
    if let Some(p) = &cli.manifest {
        return p.clone();
    }
    let name = command_name(&cli.command);
    let out = match &cli.command {
        Command::Segment { output, .. } | Command::Vote { output, .. } => output,
        Command::Annotate(a) => &a.output,
        Command::Evaluate(a) => &a.output,
        Command::Analyze(a) => &a.output,
        Command::Report(a) => &a.output,
    };
    if out.is_dir() || matches!(&cli.command, Command::Analyze(_) | Command::Report(_)) {
        return out.join(format!("{name}.manifest.json"));
    }
    if let Command::Annotate(a) = &cli.command {
        if a.docs.len() > 1 {
            return out.join("annotate.manifest.json");
        }
    }
    let mut file = out.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| OsString::from("pncode"));
    file.push(".manifest.json");
    out.with_file_name(file)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Segment { .. } => "segment",
        Command::Annotate(_) => "annotate",
        Command::Vote { .. } => "vote",
        Command::Evaluate(_) => "evaluate",
        Command::Analyze(_) => "analyze",
        Command::Report(_) => "report",
    }
}

fn write_manifest(path: &Path, manifest: &RunManifest) {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        let _ = std::fs::create_dir_all(parent);
    }
    if let Err(e) = std::fs::write(path, text) {
        eprintln!("pncode: cannot write manifest {}: {e}", path.display());
    }
}

/// Parses `argv`, runs the subcommand, writes the manifest and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let shown: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return 0;
            }
            let manifest = RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").into(),
                command: String::new(),
                argv: shown,
                config: Value::Null,
                inputs: vec![],
                outputs: vec![],
                exit_status: ExitStatus::ValidationError,
                exit_code: 1,
                error: Some(e.to_string()),
                warnings: vec![],
                started_at: None,
                finished_at: None,
            };
            write_manifest(Path::new(FALLBACK_MANIFEST), &manifest);
            return 1;
        }
    };

    let timestamps = !cli.no_timestamps;
    let started_at = timestamps.then(now);
    let mut ctx = Ctx {
        timestamps,
        config_path: cli.config.clone(),
        config: Value::Null,
        inputs: vec![],
        outputs: vec![],
        warnings: vec![],
    };
    let result = dispatch(&cli.command, &mut ctx);
    let (status, error) = match result {
        Ok(status) => (status, None),
        Err(f) => {
            eprintln!("pncode: {}", f.message);
            (f.status, Some(f.message))
        }
    };
    for w in &ctx.warnings {
        eprintln!("pncode: warning: {w}");
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: command_name(&cli.command).into(),
        argv: shown,
        config: ctx.config,
        inputs: ctx.inputs,
        outputs: ctx.outputs,
        exit_status: status,
        exit_code: status as i32,
        error,
        warnings: ctx.warnings,
        started_at,
        finished_at: timestamps.then(now),
    };
    write_manifest(&manifest_path(&cli), &manifest);
    status as i32
}

fn dispatch(command: &Command, ctx: &mut Ctx) -> Result<ExitStatus, Failure> {
    match command {
        Command::Segment { input, output, id } => segment(ctx, input, output, id.as_deref()),
        Command::Annotate(a) => annotate(ctx, a),
        Command::Vote { runset, output, tie_break } => vote(ctx, runset, output, (*tie_break).into()),
        Command::Evaluate(a) => evaluate_cmd(ctx, a),
        Command::Analyze(a) => analyze(ctx, a),
        Command::Report(a) => report(ctx, a),
    }
}

fn segment(ctx: &mut Ctx, input: &Path, output: &Path, id: Option<&str>) -> Result<ExitStatus, Failure> {
    ctx.input(input);
    let mut doc = load_narrative(input, NarrativeFormat::RawText).map_err(invalid)?;
    if let Some(id) = id {
        doc = NarrativeDocument::from_sentences(id, doc.sentences().to_vec()).map_err(invalid)?;
    }
    save_narrative(&doc, output).map_err(invalid)?;
    ctx.output(output);
    Ok(ExitStatus::Success)
}

fn annotate(ctx: &mut Ctx, a: &AnnotateArgs) -> Result<ExitStatus, Failure> {
    let file = ConfigFile::discover(ctx.config_path.as_deref()).map_err(invalid)?;
    if let Some((_, path)) = &file {
        ctx.inputs.push(path.clone());
    }
    let flags = Overrides {
        model: a.model.clone(),
        endpoint: a.endpoint.clone(),
        runs: a.runs,
        max_retries_per_stage: a.max_retries_per_stage,
        concurrency_limit: a.concurrency,
        mock: a.mock,
        timestamps: ctx.timestamps,
    };
    let resolved = resolve(&flags, file.as_ref().map(|(f, _)| f), |k| std::env::var(k).ok()).map_err(invalid)?;
    ctx.config = resolved.snapshot();

    let provider: Box<dyn Provider> = if resolved.mock {
        Box::new(MockProvider)
    } else {
        let settings = resolved.http_settings().map_err(provider_failure)?;
        Box::new(HttpProvider::new(settings).map_err(provider_failure)?)
    };

    let cb = ctx.codebook(a.codebook.as_deref())?;
    let mut docs = Vec::with_capacity(a.docs.len());
    for p in &a.docs {
        ctx.input(p);
        docs.push(load_narrative(p, NarrativeFormat::Auto).map_err(invalid)?);
    }
    let mut ids: Vec<&str> = docs.iter().map(|d| d.id()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(invalid(format!("two narratives share the id {:?}", w[0])));
    }

    let results = annotate_corpus(provider.as_ref(), &docs, &cb, &resolved.chain).map_err(invalid)?;
    let single = docs.len() == 1;
    if !single {
        std::fs::create_dir_all(&a.output).map_err(|e| invalid(format!("{}: {e}", a.output.display())))?;
    }
    let mut status = ExitStatus::Success;
    for r in &results {
        let path = if single { a.output.clone() } else { a.output.join(format!("{}.runset.json", r.run_set.narrative_id)) };
        write_run_set(&r.run_set, &path).map_err(invalid)?;
        ctx.output(&path);
        let log = audit_path(&path);
        write_audit_log([&r.run_set], &log).map_err(|e| invalid(format!("{}: {e}", log.display())))?;
        ctx.output(&log);
        for f in &r.run_set.failures {
            ctx.warnings.push(format!("{} run {}: {}", r.run_set.narrative_id, f.run_index, f.error));
        }
        match r.status() {
            RunStatus::Complete => {}
            RunStatus::PartialRuns => {
                ctx.warnings.push(format!(
                    "{}: partial runs ({} of {} succeeded)",
                    r.run_set.narrative_id,
                    r.run_set.runs.len(),
                    resolved.chain.runs
                ));
                if status == ExitStatus::Success {
                    status = ExitStatus::PartialRuns;
                }
            }
            RunStatus::AllRunsFailed => status = ExitStatus::ProviderFailure,
        }
    }
    if status == ExitStatus::ProviderFailure {
        let failed: Vec<&str> = results
            .iter()
            .filter(|r| r.status() == RunStatus::AllRunsFailed)
            .map(|r| r.run_set.narrative_id.as_str())
            .collect();
        return Err(provider_failure(format!("all runs failed for {}", failed.join(", "))));
    }
    Ok(status)
}

fn vote(ctx: &mut Ctx, runset: &Path, output: &Path, tie: TieBreak) -> Result<ExitStatus, Failure> {
    ctx.input(runset);
    let rs = read_run_set(runset).map_err(invalid)?;
    let m = majority_vote(&rs, tie).map_err(|e| match e {
        VoteError::EmptyRunSet => invalid(format!("EmptyRunSet: {} has no successful runs", runset.display())),
        e => invalid(e),
    })?;
    write_matrix(&m, output).map_err(invalid)?;
    ctx.output(output);
    Ok(ExitStatus::Success)
}

fn evaluate_cmd(ctx: &mut Ctx, a: &EvaluateArgs) -> Result<ExitStatus, Failure> {
    let cb = ctx.codebook(a.codebook.as_deref())?;
    let doc = match &a.doc {
        Some(p) => {
            ctx.input(p);
            Some(load_narrative(p, NarrativeFormat::Auto).map_err(invalid)?)
        }
        None => None,
    };
    ctx.input(&a.pred);
    let pred = read_matrix(&a.pred, &cb, doc.as_ref().map(|d| d.id())).map_err(invalid)?;
    if let Some(d) = &doc {
        pncode_core::annotation::validate_alignment(&pred, d, &cb)
            .map_err(|v| invalid(format!("{}: prediction does not align: {v:?}", a.pred.display())))?;
    }
    let mut annotators = Vec::with_capacity(a.annotators.len());
    for p in &a.annotators {
        ctx.input(p);
        let m = match &doc {
            Some(d) => import_human_csv(p, d, &cb),
            None => read_matrix(p, &cb, Some(pred.narrative_id())),
        }
        .map_err(invalid)?;
        annotators.push(m);
    }

    let item = EvaluationItem { pred: pred.clone(), annotators: annotators.clone() };
    let mut bundle = ReportBundle {
        provenance: Provenance { model_name: pred.annotator().model_name.clone(), ..Provenance::new(cb.version()) }
            .stamp(ctx.timestamps),
        ..ReportBundle::default()
    };
    for &policy in a.gold_policy.policies() {
        let report = evaluate(std::slice::from_ref(&item), policy, a.tie_break.into()).map_err(invalid)?;
        for w in &report.warnings {
            ctx.warnings.push(format!("{}: {w}", policy.as_str()));
        }
        bundle.evaluations.push(report);
    }
    for i in 0..annotators.len() {
        for j in i + 1..annotators.len() {
            bundle.agreement.push(AgreementSummary::compute(&[(&annotators[i], &annotators[j])]).map_err(invalid)?);
        }
    }
    write_json(&bundle.to_json(), &a.output)?;
    ctx.output(&a.output);
    Ok(ExitStatus::Success)
}

fn write_json(text: &str, path: &Path) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_matrices(ctx: &mut Ctx, paths: &[PathBuf], cb: &Codebook) -> Result<Vec<AnnotationMatrix>, Failure> {
    paths
        .iter()
        .map(|p| {
            ctx.input(p);
            read_matrix(p, cb, None).map_err(invalid)
        })
        .collect()
}

fn analyze(ctx: &mut Ctx, a: &AnalyzeArgs) -> Result<ExitStatus, Failure> {
    let cb = ctx.codebook(a.codebook.as_deref())?;
    let matrices = load_matrices(ctx, &a.matrices, &cb)?;
    let all = !(a.pearson || a.jaccard || a.frequencies);
    let version = matrices[0].codebook_version().to_string();
    let mut bundle = ReportBundle { provenance: Provenance::new(&version).stamp(ctx.timestamps), ..Default::default() };
    let models: Vec<&str> = matrices.iter().filter_map(|m| m.annotator().model_name.as_deref()).collect();
    if !models.is_empty() && models.iter().all(|m| *m == models[0]) {
        bundle.provenance.model_name = Some(models[0].to_string());
    }
    if all || a.frequencies {
        bundle.frequencies = Some(FrequencyTable::compute(&matrices).map_err(invalid)?);
    }
    if all || a.pearson {
        bundle.pearson = Some(pearson_matrix(&matrices).map_err(invalid)?);
    }
    if all || a.jaccard {
        bundle.jaccard = Some(jaccard_matrix(&matrices).map_err(invalid)?);
    }
    let written = write_report(&bundle, &a.output, Formats { csv: true, json: false, svg: false }, None, ctx.timestamps)
        .map_err(invalid)?;
    for p in &written {
        ctx.output(p);
    }
    let bundle_path = a.output.join("bundle.json");
    write_json(&bundle.to_json(), &bundle_path)?;
    ctx.output(&bundle_path);
    Ok(ExitStatus::Success)
}

fn report(ctx: &mut Ctx, a: &ReportArgs) -> Result<ExitStatus, Failure> {
    let mut bundle = ReportBundle::default();
    for p in &a.bundles {
        ctx.input(p);
        bundle.merge(ReportBundle::load(p).map_err(invalid)?).map_err(invalid)?;
    }
    let strip = if a.strip.is_empty() {
        None
    } else {
        let cb = ctx.codebook(a.codebook.as_deref())?;
        let matrices = load_matrices(ctx, &a.strip, &cb)?;
        Some(StripSpec { matrices, codes: a.strip_codes.clone() })
    };
    let formats = Formats {
        csv: a.formats.contains(&FormatArg::Csv),
        json: a.formats.contains(&FormatArg::Json),
        svg: a.svg,
    };
    let written = write_report(&bundle, &a.output, formats, strip.as_ref(), ctx.timestamps).map_err(invalid)?;
    for p in &written {
        ctx.output(p);
    }
    Ok(ExitStatus::Success)
}
