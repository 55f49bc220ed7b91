//! Chained annotation runs: stage 1 → 2 → 3 per run, several independent runs
//! per narrative, narratives and runs spread over a bounded worker pool.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use pncode_core::annotation::{AnnotationMatrix, AnnotatorId, RunFailure, RunSet, RunTranscript};
use pncode_core::prompting::{
    parse_stage_response, render_system_prompt, render_user_prompt, Exchange, PromptError, ProviderRequest,
    StageOutput, PROMPT_VARIANT,
};
use pncode_core::{Codebook, NarrativeDocument, Stage};
use serde_json::Value;
use thiserror::Error;

use crate::provider::{Provider, ProviderError};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub model_name: String,
    pub runs: usize,
    pub max_retries_per_stage: u32,
    pub request_timeout: Duration,
    pub concurrency_limit: usize,
    pub params: BTreeMap<String, Value>,
    /// Record wall-clock times on exchanges.
    pub timestamps: bool,
}

impl ChainConfig {
    pub fn new(model_name: impl Into<String>) -> Self {
        ChainConfig {
            model_name: model_name.into(),
            runs: 3,
            max_retries_per_stage: 2,
            request_timeout: Duration::from_secs(120),
            concurrency_limit: 4,
            params: BTreeMap::new(),
            timestamps: true,
        }
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.model_name.trim().is_empty() {
            return Err(ChainError::InvalidConfig("model name is empty".into()));
        }
        if self.runs == 0 {
            return Err(ChainError::InvalidConfig("runs must be at least 1".into()));
        }
        if self.concurrency_limit == 0 {
            return Err(ChainError::InvalidConfig("concurrency limit must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("stage {stage} failed: {last_error}")]
    StageFailed { stage: Stage, last_error: String },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// One chain's matrix (or error) and every exchange it made.
#[derive(Debug, Clone)]
pub struct ChainRun {
    pub run_index: usize,
    pub result: Result<AnnotationMatrix, ChainError>,
    pub exchanges: Vec<Exchange>,
}

fn now(enabled: bool) -> Option<String> {
    enabled.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true))
}

/// Runs the three stages once. A reply that fails to parse is retried with
/// the identical prompt up to `max_retries_per_stage` times; provider errors
/// end the chain at once (transport retries happen inside the provider).
pub fn run_chain(
    provider: &dyn Provider,
    doc: &NarrativeDocument,
    cb: &Codebook,
    config: &ChainConfig,
    run_index: usize,
) -> ChainRun {
    let mut exchanges = Vec::new();
    let result = chain_inner(provider, doc, cb, config, run_index, &mut exchanges);
    ChainRun { run_index, result, exchanges }
}

fn chain_inner(
    provider: &dyn Provider,
    doc: &NarrativeDocument,
    cb: &Codebook,
    config: &ChainConfig,
    run_index: usize,
    exchanges: &mut Vec<Exchange>,
) -> Result<AnnotationMatrix, ChainError> {
    let mut outputs: Vec<StageOutput> = Vec::with_capacity(3);
    for stage in [Stage::ONE, Stage::TWO, Stage::THREE] {
        let request = ProviderRequest {
            model_name: config.model_name.clone(),
            system_prompt: render_system_prompt(stage.get())?.to_string(),
            user_prompt: render_user_prompt(stage, doc, cb, &outputs)?,
            params: config.params.clone(),
        };
        let mut attempt = 0;
        let output = loop {
            let started_at = now(config.timestamps);
            let reply = provider.complete(&request);
            let mut exchange = Exchange {
                run_index,
                stage,
                attempt,
                request: request.clone(),
                response: None,
                error: None,
                started_at,
                finished_at: now(config.timestamps),
            };
            let response = match reply {
                Ok(r) => r,
                Err(e) => {
                    exchange.error = Some(e.to_string());
                    exchanges.push(exchange);
                    return Err(e.into());
                }
            };
            let parsed = parse_stage_response(&response.content, stage, doc, cb);
            exchange.response = Some(response);
            match parsed {
                Ok(out) => {
                    exchanges.push(exchange);
                    break out;
                }
                Err(e) => {
                    exchange.error = Some(e.to_string());
                    exchanges.push(exchange);
                    if attempt >= config.max_retries_per_stage {
                        return Err(ChainError::StageFailed { stage, last_error: e.to_string() });
                    }
                    attempt += 1;
                }
            }
        };
        outputs.push(output);
    }

    let mut m = AnnotationMatrix::zeros(doc, cb, AnnotatorId::model_run(&config.model_name, run_index, PROMPT_VARIANT));
    for out in &outputs {
        for (k, code) in out.codes.iter().enumerate() {
            let col = cb.position(code).expect("parsed codes come from the codebook");
            for (row, rec) in out.records.iter().enumerate() {
                m.set(row, col, rec.values[k]);
            }
        }
    }
    Ok(m)
}

/// All runs for one narrative. `run_set.runs` holds the successful matrices
/// in run order, `errors` the failed runs.
#[derive(Debug, Clone)]
pub struct NarrativeRuns {
    pub run_set: RunSet,
    pub errors: Vec<(usize, ChainError)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    /// Some runs failed; the rest are usable.
    PartialRuns,
    AllRunsFailed,
}

impl NarrativeRuns {
    pub fn status(&self) -> RunStatus {
        match (self.run_set.runs.is_empty(), self.errors.is_empty()) {
            (true, _) => RunStatus::AllRunsFailed,
            (false, true) => RunStatus::Complete,
            (false, false) => RunStatus::PartialRuns,
        }
    }

    /// True if every failure came from the provider rather than from replies
    /// that never parsed.
    pub fn provider_failures_only(&self) -> bool {
        self.errors.iter().all(|(_, e)| matches!(e, ChainError::Provider(_)))
    }
}

/// Runs `config.runs` independent chains for every document, with at most
/// `config.concurrency_limit` chains in flight. Results are sorted by
/// narrative id, runs by run index, whatever order they finished in.
pub fn annotate_corpus(
    provider: &dyn Provider,
    docs: &[NarrativeDocument],
    cb: &Codebook,
    config: &ChainConfig,
) -> Result<Vec<NarrativeRuns>, ChainError> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> =
        (0..docs.len()).flat_map(|d| (1..=config.runs).map(move |r| (d, r))).collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    let workers = config.concurrency_limit.min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(d, r)) = jobs.get(i) else { break };
                let run = run_chain(provider, &docs[d], cb, config, r);
                done.lock().expect("no worker panics while holding the lock").push((d, run));
            });
        }
    });
    let mut done = done.into_inner().expect("workers finished");
    done.sort_by_key(|(d, run)| (*d, run.run_index));

    let mut out: Vec<NarrativeRuns> = docs
        .iter()
        .map(|doc| NarrativeRuns {
            run_set: RunSet {
                narrative_id: doc.id().to_string(),
                model_name: config.model_name.clone(),
                prompt_variant: Some(PROMPT_VARIANT.to_string()),
                runs: Vec::new(),
                failures: Vec::new(),
                transcripts: Vec::new(),
            },
            errors: Vec::new(),
        })
        .collect();
    for (d, run) in done {
        let entry = &mut out[d];
        entry.run_set.transcripts.push(RunTranscript { run_index: run.run_index, exchanges: run.exchanges });
        match run.result {
            Ok(m) => entry.run_set.runs.push(m),
            Err(e) => {
                entry.run_set.failures.push(RunFailure { run_index: run.run_index, error: e.to_string() });
                entry.errors.push((run.run_index, e));
            }
        }
    }
    out.sort_by(|a, b| a.run_set.narrative_id.cmp(&b.run_set.narrative_id));
    Ok(out)
}

/// Runs `config.runs` independent chains over one narrative.
pub fn run_many(
    provider: &dyn Provider,
    doc: &NarrativeDocument,
    cb: &Codebook,
    config: &ChainConfig,
) -> Result<NarrativeRuns, ChainError> {
    let mut all = annotate_corpus(provider, std::slice::from_ref(doc), cb, config)?;
    Ok(all.pop().expect("one document in, one result out"))
}
