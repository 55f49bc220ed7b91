//! IO, provider client, chained runs, reports and CLI around [`pncode_core`].

pub mod audit;
pub mod chain;
pub mod cli;
pub mod config;
pub mod files;
pub mod provider;
pub mod report;
