//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use pncode::files::load_narrative;
use pncode::files::NarrativeFormat;
use pncode_core::annotation::{majority_vote, AnnotationMatrix, AnnotatorId, RunSet, TieBreak};
use pncode_core::codebook::default_codebook;
use pncode_core::metrics::{
    cohen_kappa, evaluate, f1_scores, jaccard_pair, minimum_match_gold, pabak, pabak_from_po, pearson_matrix,
    pearson_pair, percent_agreement, EvaluationItem, GoldPolicy,
};
use pncode_core::prompting::{
    mock_complete, parse_stage_response, render_narrative, render_system_prompt, render_user_prompt,
    ProviderRequest, StageOutput,
};
use pncode_core::{NarrativeDocument, Stage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 6] = [
        (1, "PABAK identity on the published agreement table", Duration::from_secs(1), criterion_1),
        (2, "metric oracle suite on 200 random annotator pairs", Duration::from_secs(10), criterion_2),
        (3, "gold-policy semantics", Duration::from_secs(10), criterion_3),
        (4, "prompt fidelity against transcribed templates", Duration::from_secs(1), criterion_4),
        (5, "end-to-end offline pipeline", Duration::from_secs(5), criterion_5),
        (6, "parser robustness on malformed replies", Duration::from_secs(5), criterion_6),
    ];
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; took {took:?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS  {name} ({detail}; {took:.2?})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "criterion 7: DOC   headline results on the private corpus (micro/macro F1, corpus r and J, \
         frequency table) are not reproducible offline; kept as documentation only"
    );
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- criterion 1

/// (code, p_o, PABAK) as published.
const AGREEMENT_TABLE: [(&str, f64, f64); 14] = [
    ("Story of Self", 0.86, 0.73),
    ("Story of Us", 0.88, 0.75),
    ("Story of Now", 0.86, 0.72),
    ("Challenge", 0.80, 0.60),
    ("Choice", 0.80, 0.60),
    ("Outcome", 0.77, 0.54),
    ("Story Details", 0.88, 0.77),
    ("Hope", 0.84, 0.67),
    ("Values", 0.68, 0.36),
    ("Vulnerability", 0.80, 0.59),
    ("Urgency", 0.77, 0.54),
    ("Call-to-Action", 0.89, 0.78),
    ("Dream", 0.95, 0.89),
    ("Nightmare", 0.98, 0.96),
];

fn single_column(who: &str, cells: Vec<u8>) -> AnnotationMatrix {
    AnnotationMatrix::new("table", "t", AnnotatorId::human(who), vec!["x".into()], cells).unwrap()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for (code, p_o, published) in AGREEMENT_TABLE {
        let direct = pabak_from_po(p_o);
        // A 100-sentence pair with exactly round(100 p_o) agreements goes
        // through the matrix path as well.
        let agree = (p_o * 100.0).round() as usize;
        let a = single_column("a", (0..100).map(|i| u8::from(i % 2 == 0)).collect());
        let b = single_column("b", (0..100).map(|i| u8::from((i % 2 == 0) == (i < agree))).collect());
        let via_matrix = pabak(&a, &b).map_err(|e| e.to_string())?.global;
        ensure((via_matrix - direct).abs() < 1e-12, || format!("{code}: matrix path {via_matrix} vs {direct}"))?;
        let diff = (direct - published).abs();
        ensure(diff <= 0.015, || format!("{code}: 2*{p_o}-1 = {direct:.4}, published {published}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("14 rows, max |2p_o-1 - PABAK| = {worst:.4}"))
}

// ---------------------------------------------------------------- criterion 2

fn random_matrix(rng: &mut impl Rng, who: &str, n: usize, k: usize) -> AnnotationMatrix {
    let codes: Vec<String> = (0..k).map(|c| format!("c{c}")).collect();
    // Per-code prevalence, with some constant columns to hit undefined cases.
    let prevalence: Vec<f64> = (0..k)
        .map(|_| match rng.random_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.05..0.95),
        })
        .collect();
    let cells = (0..n * k).map(|i| u8::from(rng.random_bool(prevalence[i % k]))).collect();
    AnnotationMatrix::new("n", "v", AnnotatorId::human(who), codes, cells).unwrap()
}

struct Counts {
    tp: f64,
    fp: f64,
    fn_: f64,
    tn: f64,
}

fn recount(pred: &[u8], gold: &[u8]) -> Counts {
    let mut c = Counts { tp: 0.0, fp: 0.0, fn_: 0.0, tn: 0.0 };
    for (&p, &g) in pred.iter().zip(gold) {
        match (p, g) {
            (1, 1) => c.tp += 1.0,
            (1, 0) => c.fp += 1.0,
            (0, 1) => c.fn_ += 1.0,
            _ => c.tn += 1.0,
        }
    }
    c
}

fn oracle_kappa(a: &[u8], b: &[u8]) -> Option<f64> {
    let n = a.len() as f64;
    let po = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let pa = a.iter().filter(|&&v| v == 1).count() as f64 / n;
    let pb = b.iter().filter(|&&v| v == 1).count() as f64 / n;
    let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    (pe != 1.0).then(|| (po - pe) / (1.0 - pe))
}

/// Precision, recall and F1 for the positive class; F1 is 0 when there is no
/// true positive but something to find or claim.
fn oracle_prf(c: &Counts) -> (Option<f64>, Option<f64>, Option<f64>) {
    let p = (c.tp + c.fp > 0.0).then(|| c.tp / (c.tp + c.fp));
    let r = (c.tp + c.fn_ > 0.0).then(|| c.tp / (c.tp + c.fn_));
    let f = if c.tp + c.fp + c.fn_ == 0.0 {
        None
    } else if c.tp == 0.0 {
        Some(0.0)
    } else {
        let (p, r) = (p.unwrap(), r.unwrap());
        Some(2.0 * p * r / (p + r))
    };
    (p, r, f)
}

fn oracle_weighted_f1(c: &Counts) -> Option<f64> {
    let n = c.tp + c.fp + c.fn_ + c.tn;
    let (_, _, pos) = oracle_prf(c);
    let flipped = Counts { tp: c.tn, fp: c.fn_, fn_: c.fp, tn: c.tp };
    let (_, _, neg) = oracle_prf(&flipped);
    let (ps, ns) = (c.tp + c.fn_, c.tn + c.fp);
    (n > 0.0).then(|| (ps * pos.unwrap_or(0.0) + ns * neg.unwrap_or(0.0)) / n)
}

fn oracle_pearson(x: &[u8], y: &[u8]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().map(|&v| v as f64).sum::<f64>() / n;
    let my = y.iter().map(|&v| v as f64).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a as f64 - mx, b as f64 - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn oracle_jaccard(x: &[u8], y: &[u8]) -> Option<f64> {
    let a: std::collections::BTreeSet<usize> = (0..x.len()).filter(|&i| x[i] == 1).collect();
    let b: std::collections::BTreeSet<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
    let union = a.union(&b).count();
    (union > 0).then(|| a.intersection(&b).count() as f64 / union as f64)
}

fn close(what: &str, got: Option<f64>, want: Option<f64>) -> Result<(), String> {
    match (got, want) {
        (None, None) => Ok(()),
        (Some(g), Some(w)) if (g - w).abs() <= 1e-12 => Ok(()),
        _ => Err(format!("{what}: library {got:?}, oracle {want:?}")),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let k = 14;
    let mut undefined = 0usize;
    let mut checked = 0usize;
    for pair in 0..200 {
        let n = rng.random_range(10..=50);
        let a = random_matrix(&mut rng, "a", n, k);
        let b = random_matrix(&mut rng, "b", n, k);
        let ctx = |what: &str| format!("pair {pair} {what}");

        let po = percent_agreement(&a, &b).map_err(|e| e.to_string())?;
        let kappa = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
        let pb = pabak(&a, &b).map_err(|e| e.to_string())?;
        let f1 = f1_scores(&a, &b).map_err(|e| e.to_string())?;

        let mut pooled = Counts { tp: 0.0, fp: 0.0, fn_: 0.0, tn: 0.0 };
        let mut macro_vals = Vec::new();
        for c in 0..k {
            let (x, y) = (a.column(c), b.column(c));
            let counts = recount(&x, &y);
            let want_po = (counts.tp + counts.tn) / n as f64;
            close(&ctx("p_o"), Some(po.per_code[c]), Some(want_po))?;
            close(&ctx("pabak"), Some(pb.per_code[c]), Some(2.0 * want_po - 1.0))?;
            let want_kappa = oracle_kappa(&x, &y);
            close(&ctx("kappa"), kappa.per_code[c], want_kappa)?;
            let (p, r, f) = oracle_prf(&counts);
            let got = &f1.per_code[c];
            close(&ctx("precision"), got.precision, p)?;
            close(&ctx("recall"), got.recall, r)?;
            close(&ctx("f1"), got.f1_positive, f)?;
            close(&ctx("weighted f1"), got.f1_weighted, oracle_weighted_f1(&counts))?;
            undefined += [want_kappa, p, r, f].iter().filter(|v| v.is_none()).count();
            macro_vals.extend(f);
            pooled.tp += counts.tp;
            pooled.fp += counts.fp;
            pooled.fn_ += counts.fn_;
            pooled.tn += counts.tn;
            checked += 8;
        }
        let (mp, mr, mf) = oracle_prf(&pooled);
        close(&ctx("micro precision"), f1.micro_precision, mp)?;
        close(&ctx("micro recall"), f1.micro_recall, mr)?;
        close(&ctx("micro f1"), f1.micro_f1, mf)?;
        let want_macro = (!macro_vals.is_empty()).then(|| macro_vals.iter().sum::<f64>() / macro_vals.len() as f64);
        close(&ctx("macro f1"), f1.macro_f1, want_macro)?;
        ensure(f1.macro_excluded == k - macro_vals.len(), || ctx("macro exclusions"))?;
        let all_a: Vec<u8> = a.cells().to_vec();
        let all_b: Vec<u8> = b.cells().to_vec();
        close(&ctx("global kappa"), kappa.global, oracle_kappa(&all_a, &all_b))?;

        let corr = pearson_matrix(std::slice::from_ref(&a)).map_err(|e| e.to_string())?;
        for i in 0..k {
            for j in 0..k {
                let (x, y) = (a.column(i), a.column(j));
                if i != j {
                    let want = oracle_pearson(&x, &y);
                    close(&ctx("pearson"), pearson_pair(&x, &y), want)?;
                    close(&ctx("pearson matrix"), corr.get(i, j), want)?;
                    undefined += usize::from(want.is_none());
                }
                let want = oracle_jaccard(&x, &y);
                close(&ctx("jaccard"), jaccard_pair(&x, &y), want)?;
                checked += 2;
            }
        }
    }
    Ok(format!("{checked} values within 1e-12, {undefined} undefined cases agreed"))
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let (k, tie) = (14, TieBreak::Zero);
    let mut disagreeing_cells = 0usize;
    for t in 0..100 {
        let n = rng.random_range(10..=50);
        let pred = random_matrix(&mut rng, "pred", n, k);
        let h1 = random_matrix(&mut rng, "h1", n, k);
        let h2 = random_matrix(&mut rng, "h2", n, k);

        // (a) minimum-match accuracy is at least the accuracy against either annotator.
        let item = EvaluationItem { pred: pred.clone(), annotators: vec![h1.clone(), h2.clone()] };
        let mm = evaluate(&[item], GoldPolicy::MinimumMatch, tie).map_err(|e| e.to_string())?;
        for h in [&h1, &h2] {
            let single = percent_agreement(&pred, h).map_err(|e| e.to_string())?.global;
            ensure(mm.global_p_o >= single, || format!("triple {t}: min-match {} < single {single}", mm.global_p_o))?;
        }

        // (b) where the two annotators disagree, any prediction is correct.
        for flip in [false, true] {
            let mut p = pred.clone();
            if flip {
                for i in 0..n {
                    for c in 0..k {
                        p.set(i, c, 1 - p.get(i, c));
                    }
                }
            }
            let gold = minimum_match_gold(&p, &[h1.clone(), h2.clone()]).map_err(|e| e.to_string())?;
            for i in 0..h1.cells().len() {
                if h1.cells()[i] != h2.cells()[i] {
                    ensure(gold.cells()[i] == p.cells()[i], || format!("triple {t}: cell {i} scored wrong"))?;
                    disagreeing_cells += 1;
                }
            }
        }

        // (c) three-run majority equals the cell-wise at-least-two threshold.
        let runs: Vec<AnnotationMatrix> = (1..=3)
            .map(|r| random_matrix(&mut rng, "run", n, k).with_annotator(AnnotatorId::model_run("m", r, "v")))
            .collect();
        let rs = RunSet {
            narrative_id: "n".into(),
            model_name: "m".into(),
            prompt_variant: None,
            runs: runs.clone(),
            failures: vec![],
            transcripts: vec![],
        };
        for tie in [TieBreak::Zero, TieBreak::One] {
            let voted = majority_vote(&rs, tie).map_err(|e| e.to_string())?;
            for i in 0..voted.cells().len() {
                let ones = runs.iter().filter(|m| m.cells()[i] == 1).count();
                ensure(voted.cells()[i] == u8::from(ones >= 2), || format!("run set {t}: cell {i}"))?;
            }
        }
    }
    Ok(format!("100 triples, {disagreeing_cells} disagreeing cells, 100 run sets"))
}

// ---------------------------------------------------------------- criterion 4

const SYSTEM_FIXTURE: &str = include_str!("../../core/fixtures/prompts/system.txt");
const STAGE_FIXTURES: [&str; 3] = [
    include_str!("../../core/fixtures/prompts/stage1.txt"),
    include_str!("../../core/fixtures/prompts/stage2.txt"),
    include_str!("../../core/fixtures/prompts/stage3.txt"),
];

fn criterion_4() -> Outcome {
    let cb = default_codebook();
    let doc = NarrativeDocument::from_text(
        "fidelity",
        "I grew up on a farm. We stood together when the flood came. Now we must act before the vote.",
    )
    .map_err(|e| e.to_string())?;
    let mut prior: Vec<StageOutput> = Vec::new();
    for (i, stage) in [Stage::ONE, Stage::TWO, Stage::THREE].into_iter().enumerate() {
        let system = render_system_prompt(stage.get()).map_err(|e| e.to_string())?;
        ensure(system.as_bytes() == SYSTEM_FIXTURE.as_bytes(), || format!("stage {}: system prompt drift", i + 1))?;

        let user = render_user_prompt(stage, &doc, &cb, &prior).map_err(|e| e.to_string())?;
        let refs: Vec<&StageOutput> = prior.iter().collect();
        let expected = STAGE_FIXTURES[i].replace("{narrative}", &render_narrative(&doc, &refs));
        if user != expected {
            let at = user.bytes().zip(expected.bytes()).position(|(a, b)| a != b).unwrap_or(user.len().min(expected.len()));
            return Err(format!("stage {}: user prompt differs from template at byte {at}", i + 1));
        }
        ensure(STAGE_FIXTURES[i].contains("Respond in JSON list for each sentence"), || {
            format!("stage {}: template lacks the JSON instruction", i + 1)
        })?;

        let reply = mock_complete(&ProviderRequest {
            model_name: "mock".into(),
            system_prompt: system.into(),
            user_prompt: user,
            params: Default::default(),
        })
        .map_err(|e| e.to_string())?;
        prior.push(parse_stage_response(&reply.content, stage, &doc, &cb).map_err(|e| e.to_string())?);
    }
    let s1 = render_system_prompt(1).unwrap();
    ensure(s1 == render_system_prompt(2).unwrap() && s1 == render_system_prompt(3).unwrap(), || {
        "system prompts differ across stages".into()
    })?;
    Ok(format!("system prompt {} bytes, 3 user prompts byte-identical", SYSTEM_FIXTURE.len()))
}

// ---------------------------------------------------------------- criterion 5

fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn pncode(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pncode"))
        .args(args)
        .current_dir(dir)
        .env_remove("PNCODE_API_KEY")
        .env_remove("PNCODE_ENDPOINT")
        .env_remove("PNCODE_MODEL")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!("`pncode {}` exited {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr))
    })
}

const PIPELINE: [&[&str]; 6] = [
    &["--no-timestamps", "segment", "narrative.txt", "-o", "narrative.jsonl"],
    &["--no-timestamps", "annotate", "narrative.jsonl", "--mock", "--runs", "3", "-o", "runset.json"],
    &["--no-timestamps", "vote", "runset.json", "-o", "pred.json"],
    &[
        "--no-timestamps", "evaluate", "pred.json", "--doc", "narrative.jsonl", "--gold-policy", "both",
        "--annotators", "h1.csv", "h2.csv", "-o", "evaluation.json",
    ],
    &["--no-timestamps", "analyze", "pred.json", "h1.csv", "h2.csv", "-o", "analytics"],
    &[
        "--no-timestamps", "report", "evaluation.json", "analytics/bundle.json", "-o", "report", "--svg", "--strip",
        "h1.csv", "pred.json",
    ],
];

fn run_pipeline(dir: &Path) -> Result<(), String> {
    for f in ["narrative.txt", "h1.csv", "h2.csv"] {
        std::fs::copy(fixture_dir("e2e").join(f), dir.join(f)).map_err(|e| e.to_string())?;
    }
    for args in PIPELINE {
        pncode(dir, args)?;
    }
    Ok(())
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_5() -> Outcome {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_pipeline(first.path())?;
    run_pipeline(second.path())?;

    let files = files_under(first.path());
    ensure(files == files_under(second.path()), || "the two invocations wrote different file sets".into())?;
    for f in &files {
        let a = std::fs::read(first.path().join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(second.path().join(f)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{} differs between invocations", f.display()))?;
    }

    let pred: AnnotationMatrix = serde_json::from_str(
        &std::fs::read_to_string(first.path().join("pred.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure((pred.num_sentences(), pred.num_codes()) == (20, 14), || {
        format!("matrix is {}x{}", pred.num_sentences(), pred.num_codes())
    })?;
    ensure(pred.non_binary_cells().next().is_none(), || "matrix has non-binary cells".into())?;
    let doc = load_narrative(&first.path().join("narrative.jsonl"), NarrativeFormat::Segmented)
        .map_err(|e| e.to_string())?;
    pncode_core::annotation::validate_alignment(&pred, &doc, &default_codebook())
        .map_err(|v| format!("matrix does not align: {v:?}"))?;
    for f in ["report/metrics.csv", "report/pearson.svg", "report/jaccard.svg", "report/strip.svg", "report/report.json"] {
        ensure(first.path().join(f).is_file(), || format!("{f} missing"))?;
    }
    let metrics = std::fs::read_to_string(first.path().join("report/metrics.csv")).map_err(|e| e.to_string())?;
    pncode::report::read_metrics_csv(&metrics).map_err(|e| e.to_string())?;
    Ok(format!("{} files byte-identical across two invocations", files.len()))
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let dir = fixture_dir("malformed");
    let cb = default_codebook();
    let doc = load_narrative(&dir.join("narrative.jsonl"), NarrativeFormat::Segmented).map_err(|e| e.to_string())?;
    let expected_values: [[u8; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 1, 0]];
    let table = std::fs::read_to_string(dir.join("expected.tsv")).map_err(|e| e.to_string())?;
    let (mut repaired, mut rejected) = (0, 0);
    for line in table.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (file, want) = line.split_once('\t').ok_or_else(|| format!("bad line {line:?}"))?;
        let content = std::fs::read_to_string(dir.join(file)).map_err(|e| e.to_string())?;
        match (parse_stage_response(&content, Stage::ONE, &doc, &cb), want) {
            (Ok(out), "Ok") => {
                ensure(out.records.len() == doc.len(), || format!("{file}: wrong record count"))?;
                for (i, r) in out.records.iter().enumerate() {
                    ensure(r.index == i && r.text == doc.sentences()[i].text, || format!("{file}: record {i} misaligned"))?;
                    ensure(r.values == expected_values[i], || format!("{file}: record {i} values {:?}", r.values))?;
                }
                repaired += 1;
            }
            (Ok(_), want) => return Err(format!("{file}: parsed, expected {want}")),
            (Err(e), want) => {
                let got = format!("{e:?}");
                let variant = got.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("");
                ensure(variant == want, || format!("{file}: got {got}, expected {want}"))?;
                rejected += 1;
            }
        }
    }
    ensure(repaired + rejected >= 12, || format!("only {} fixtures", repaired + rejected))?;
    Ok(format!("{} fixtures: {repaired} parsed, {rejected} rejected with the expected error", repaired + rejected))
}
