//! Line-delimited audit log: one JSON record per request/response pair.

use std::io::Write;
use std::path::{Path, PathBuf};

use pncode_core::annotation::RunSet;
use pncode_core::prompting::Exchange;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub narrative_id: String,
    #[serde(flatten)]
    pub exchange: Exchange,
}

pub fn audit_records(rs: &RunSet) -> impl Iterator<Item = AuditRecord> + '_ {
    rs.transcripts.iter().flat_map(move |t| {
        t.exchanges.iter().map(move |e| AuditRecord { narrative_id: rs.narrative_id.clone(), exchange: e.clone() })
    })
}

/// `<runset>.audit.jsonl` next to the run-set file.
pub fn audit_path(runset_path: &Path) -> PathBuf {
    let mut name = runset_path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".audit.jsonl");
    runset_path.with_file_name(name)
}

pub fn write_audit_log<'a>(run_sets: impl IntoIterator<Item = &'a RunSet>, path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for rs in run_sets {
        for rec in audit_records(rs) {
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
    }
    out.flush()
}

pub fn read_audit_log(path: &Path) -> std::io::Result<Vec<AuditRecord>> {
    std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(std::io::Error::other))
        .collect()
}
