//! Core of a sentence-level coding pipeline for Public Narrative transcripts.
//!
//! Everything in this crate is pure and allocation-only (`no_std` + `alloc`):
//!
//! * [`codebook`] holds the 14-code scheme and its stage grouping,
//! * [`corpus`] segments transcripts into the sentence units annotations refer to,
//! * [`annotation`] stores binary sentence-by-code matrices and multi-run voting,
//! * [`metrics`] computes agreement (p_o, Cohen's kappa, PABAK), gold policies,
//!   the F1 family, and Pearson/Jaccard co-occurrence,
//! * [`prompting`] renders the three chained prompts, parses model replies, and
//!   provides a deterministic keyword-rule stand-in for a model,
//! * [`svg`] draws heatmaps and segment strips as deterministic SVG text.
//!
//! File formats, the HTTP provider client, chain orchestration and the CLI live
//! in the `pncode` companion crate.

#![no_std]

extern crate alloc;

pub mod annotation;
pub mod codebook;
pub mod corpus;
pub mod format;
pub mod metrics;
pub mod prompting;
pub mod svg;
pub mod text;

pub use annotation::{AnnotationMatrix, AnnotatorId, AnnotatorKind, RunSet, TieBreak};
pub use codebook::{Code, CodeGroup, Codebook, Stage};
pub use corpus::{segment_sentences, NarrativeDocument, Sentence};
