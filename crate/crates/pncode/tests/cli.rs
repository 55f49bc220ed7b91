mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::{serve, Reply};
use pncode_core::annotation::RunSet;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/e2e").join(name)
}

fn pncode(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pncode"));
    cmd.args(args).current_dir(dir);
    for k in ["PNCODE_API_KEY", "PNCODE_ENDPOINT", "PNCODE_MODEL"] {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["narrative.txt", "h1.csv", "h2.csv"] {
        std::fs::copy(fixture(f), dir.path().join(f)).unwrap();
    }
    dir
}

#[test]
fn segment_writes_document_and_manifest() {
    let dir = setup();
    let (code, _) = pncode(dir.path(), &["segment", "narrative.txt", "-o", "doc.jsonl", "--id", "rosa"], &[]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("doc.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.starts_with("{\"id\":\"rosa\"}\n"));
    let m = json(&dir.path().join("doc.jsonl.manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["outputs"][0], "doc.jsonl");
    assert!(m["started_at"].is_string());
}

#[test]
fn vote_on_empty_run_set_fails() {
    let dir = setup();
    let empty = RunSet {
        narrative_id: "n".into(),
        model_name: "m".into(),
        prompt_variant: None,
        runs: vec![],
        failures: vec![],
        transcripts: vec![],
    };
    std::fs::write(dir.path().join("empty.runset"), serde_json::to_string(&empty).unwrap()).unwrap();
    let (code, err) = pncode(dir.path(), &["vote", "empty.runset", "-o", "m.json"], &[]);
    assert_eq!(code, 1, "{err}");
    let m = json(&dir.path().join("m.json.manifest.json"));
    assert_eq!(m["exit_status"], "validation_error");
    assert!(m["error"].as_str().unwrap().contains("EmptyRunSet"));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn usage_error_exits_one_with_manifest() {
    let dir = setup();
    let (code, _) = pncode(dir.path(), &["annotate", "--bogus"], &[]);
    assert_eq!(code, 1);
    let m = json(&dir.path().join("pncode-manifest.json"));
    assert_eq!(m["exit_code"], 1);
    assert!(m["error"].is_string());
}

#[test]
fn annotate_without_credentials_fails_before_writing() {
    let dir = setup();
    let (code, err) = pncode(dir.path(), &["annotate", "narrative.txt", "--model", "x", "-o", "rs.json"], &[]);
    assert_eq!(code, 2, "{err}");
    assert!(!dir.path().join("rs.json").exists());
    assert!(!dir.path().join("rs.json.audit.jsonl").exists());
    let m = json(&dir.path().join("rs.json.manifest.json"));
    assert_eq!(m["exit_status"], "provider_failure");
    assert!(m["error"].as_str().unwrap().contains("PNCODE_API_KEY"));
}

#[test]
fn annotate_over_http_with_partial_runs() {
    let stub = serve(|n, req| if n == 0 { Reply::status(400, "rejected") } else { Reply::mock_for(&req.body) });
    let dir = setup();
    let key = "sk-do-not-log-me";
    let (code, err) = pncode(
        dir.path(),
        &["annotate", "narrative.txt", "--model", "remote", "--concurrency", "1", "-o", "rs.json"],
        &[("PNCODE_API_KEY", key), ("PNCODE_ENDPOINT", &stub.url)],
    );
    assert_eq!(code, 3, "{err}");
    let rs: RunSet = serde_json::from_value(json(&dir.path().join("rs.json"))).unwrap();
    assert_eq!(rs.runs.len(), 2);
    assert_eq!(rs.failures.len(), 1);
    assert_eq!(rs.failures[0].run_index, 1);
    assert_eq!(stub.count(), 7);
    let manifest = std::fs::read_to_string(dir.path().join("rs.json.manifest.json")).unwrap();
    assert!(manifest.contains("partial runs"));
    for f in ["rs.json", "rs.json.audit.jsonl", "rs.json.manifest.json"] {
        assert!(!std::fs::read_to_string(dir.path().join(f)).unwrap().contains(key), "{f} leaks the key");
    }
    assert!(!err.contains(key));
}

#[test]
fn all_runs_failing_is_a_provider_failure() {
    let stub = serve(|_, _| Reply::status(401, "denied"));
    let dir = setup();
    let (code, _) = pncode(
        dir.path(),
        &["annotate", "narrative.txt", "--model", "remote", "-o", "rs.json"],
        &[("PNCODE_API_KEY", "k"), ("PNCODE_ENDPOINT", &stub.url)],
    );
    assert_eq!(code, 2);
    let rs: RunSet = serde_json::from_value(json(&dir.path().join("rs.json"))).unwrap();
    assert!(rs.runs.is_empty());
    assert_eq!(rs.failures.len(), 3);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = setup();
    std::fs::write(dir.path().join("pncode.toml"), "[chain]\nruns = 2\n\n[params]\ntemperature = 0.0\n").unwrap();
    let (code, _) = pncode(dir.path(), &["annotate", "narrative.txt", "--mock", "-o", "a.json"], &[]);
    assert_eq!(code, 0);
    let rs: RunSet = serde_json::from_value(json(&dir.path().join("a.json"))).unwrap();
    assert_eq!(rs.runs.len(), 2);
    assert_eq!(rs.transcripts[0].exchanges[0].request.params["temperature"], 0.0);

    let (code, _) = pncode(dir.path(), &["annotate", "narrative.txt", "--mock", "--runs", "4", "-o", "b.json"], &[]);
    assert_eq!(code, 0);
    let rs: RunSet = serde_json::from_value(json(&dir.path().join("b.json"))).unwrap();
    assert_eq!(rs.runs.len(), 4);

    std::fs::write(dir.path().join("other.toml"), "[chain]\nruns = 1\n").unwrap();
    let (code, _) =
        pncode(dir.path(), &["--config", "other.toml", "annotate", "narrative.txt", "--mock", "-o", "c.json"], &[]);
    assert_eq!(code, 0);
    let m = json(&dir.path().join("c.json.manifest.json"));
    assert_eq!(m["config"]["runs"], 1);
    assert_eq!(m["inputs"][0], "other.toml");
}

#[test]
fn annotate_several_documents_into_a_directory() {
    let dir = setup();
    std::fs::write(dir.path().join("second.txt"), "We hope. I must act now.").unwrap();
    let (code, err) =
        pncode(dir.path(), &["annotate", "second.txt", "narrative.txt", "--mock", "--runs", "2", "-o", "runs"], &[]);
    assert_eq!(code, 0, "{err}");
    for id in ["narrative", "second"] {
        let rs: RunSet = serde_json::from_value(json(&dir.path().join(format!("runs/{id}.runset.json")))).unwrap();
        assert_eq!(rs.narrative_id, id);
        assert_eq!(rs.runs.len(), 2);
        assert!(dir.path().join(format!("runs/{id}.runset.json.audit.jsonl")).is_file());
    }
    assert!(dir.path().join("runs/annotate.manifest.json").is_file());
}

#[test]
fn evaluate_single_policy_and_json_only_report() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(pncode(p, &["annotate", "narrative.txt", "--mock", "-o", "rs.json"], &[]).0, 0);
    assert_eq!(pncode(p, &["vote", "rs.json", "-o", "pred.csv"], &[]).0, 0);
    let (code, err) = pncode(
        p,
        &["evaluate", "pred.csv", "--gold-policy", "min-match", "--annotators", "h1.csv", "h2.csv", "-o", "ev.json"],
        &[],
    );
    assert_eq!(code, 0, "{err}");
    let ev = json(&p.join("ev.json"));
    assert_eq!(ev["evaluations"].as_array().unwrap().len(), 1);
    assert_eq!(ev["evaluations"][0]["gold_policy"], "minimum_match");
    assert_eq!(ev["agreement"][0]["rater_a"], "expert_a");

    let (code, _) = pncode(p, &["report", "ev.json", "-o", "out", "--formats", "json"], &[]);
    assert_eq!(code, 0);
    let mut names: Vec<String> =
        std::fs::read_dir(p.join("out")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["report.json", "report.manifest.json"]);
}

#[test]
fn evaluate_rejects_misaligned_annotations() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(pncode(p, &["segment", "narrative.txt", "-o", "doc.jsonl"], &[]).0, 0);
    assert_eq!(pncode(p, &["annotate", "doc.jsonl", "--mock", "-o", "rs.json"], &[]).0, 0);
    assert_eq!(pncode(p, &["vote", "rs.json", "-o", "pred.json"], &[]).0, 0);
    let short: String = std::fs::read_to_string(p.join("h1.csv")).unwrap().lines().take(12).collect::<Vec<_>>().join("\n");
    std::fs::write(p.join("short.csv"), short + "\n").unwrap();
    let (code, _) =
        pncode(p, &["evaluate", "pred.json", "--doc", "doc.jsonl", "--annotators", "short.csv", "-o", "ev.json"], &[]);
    assert_eq!(code, 1);
    assert!(!p.join("ev.json").exists());
}

#[test]
fn analyze_selects_outputs() {
    let dir = setup();
    let p = dir.path();
    let (code, err) = pncode(p, &["analyze", "h1.csv", "h2.csv", "--jaccard", "-o", "an"], &[]);
    assert_eq!(code, 0, "{err}");
    assert!(p.join("an/jaccard.csv").is_file());
    assert!(!p.join("an/pearson.csv").exists());
    let bundle = json(&p.join("an/bundle.json"));
    assert!(bundle["pearson"].is_null());
    assert_eq!(bundle["jaccard"]["narratives"], 2);
}
