//! Acceptance checks, one PASS/FAIL/SKIP line per criterion.
//!
//! Dataset checks (7, 8) run on real files when `ASPECTEVAL_DATA_DIR` points
//! at a directory laid out as
//!
//! ```text
//! semeval/Laptop_Train_v2.xml  semeval/Laptops_Test_Gold.xml
//! semeval/Restaurants_Train_v2.xml  semeval/Restaurants_Test_Gold.xml
//! mams/train.xml  mams/test.xml
//! twitter/train.raw  twitter/test.raw
//! sport/train.json  sport/test.json
//! ```
//!
//! and otherwise on the bundled miniatures of each format.

mod common;

use std::panic;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use aspect_eval::assignment::{solve_assignment, CostMatrix};
use aspect_eval::io::{convert, load_corpus, parse_llm_annotation, parse_numbered_responses, CorpusFormat, CorpusSummary};
use aspect_eval::matching::{intersect_matrix, SimilarityMatrix, Theta};
use aspect_eval::metrics::{macro_evaluate, EvalOptions};
use aspect_eval::model::{AnnotatedDocument, AspectPolarityPair, AspectSet, Corpus, Polarity, PredictionRecord};
use aspect_eval::similarity::{OracleTable, SimilarityBackend};
use aspect_eval::stats::{fleiss_kappa, paired_bootstrap, theta_sweep, Grid, RatingsTable, SystemPredictions};
use common::*;
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

type Criterion = fn() -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("figure fixture exactness", figure_fixture),
        ("theta=1 reduces to exact match", theta_one_reduction),
        ("assignment optimality", assignment_optimality),
        ("match validity", match_validity),
        ("bootstrap behaviour", bootstrap_behaviour),
        ("fleiss kappa", kappa),
        ("dataset conversion counts", dataset_counts),
        ("implicit-aspect measurement", implicit_rate),
        ("sweep audit shape", sweep_shape),
        ("model-response parsing under mutation", response_fuzz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|e| {
            Fail(format!("panicked: {}", e.downcast_ref::<String>().cloned().unwrap_or_default()))
        });
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("{tag} [{:>2}] {name}: {detail} ({secs:.2}s)", i + 1);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

/// 1. The intersection figure scored through the command line.
fn figure_fixture() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_aspecteval"))
        .args(["evaluate", "--backend"])
        .arg(format!("oracle:{}", fixture("figure_oracle.csv").display()))
        .arg(fixture("figure_gold.jsonl"))
        .arg(fixture("figure_predictions.jsonl"))
        .args(["--theta", "0.95", "--out"])
        .arg(dir.path())
        .env_remove("ASPECTEVAL_THETA")
        .env_remove("ASPECTEVAL_BACKEND")
        .output()
        .unwrap();
    if !status.status.success() {
        return Fail(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let g = &report["report"]["generalized"];
    let (p, r, f1) = (g["precision"].as_f64().unwrap(), g["recall"].as_f64().unwrap(), g["f1"].as_f64().unwrap());
    let ok = (p - 0.6).abs() <= 1e-9 && (r - 0.75).abs() <= 1e-9 && (f1 - 2.0 / 3.0).abs() <= 1e-9;
    check(ok, format!("P={p:.9} R={r:.9} F1={f1:.9}"))
}

const VOCAB: &[&str] = &[
    "food", "Food", "FOOD", "service", " Service", "wi-fi", "Wi-Fi", "price", "prices", "decor",
    "staff", "battery life", "Battery  Life", "screen", "view", "wine list", "Wine List", "keyboard",
];

fn random_set(rng: &mut StdRng) -> Vec<&'static str> {
    (0..rng.random_range(0..7)).map(|_| *VOCAB.choose(rng).unwrap()).collect()
}

fn build(docs: &[(Vec<&str>, Vec<&str>)]) -> (Corpus, Vec<PredictionRecord>) {
    let set = |words: &[&str]| {
        AspectSet::from_pairs("d", words.iter().map(|w| AspectPolarityPair::new(*w, Polarity::Neutral).unwrap()))
            .unwrap()
    };
    let corpus = Corpus::new(
        docs.iter()
            .enumerate()
            .map(|(i, (g, _))| AnnotatedDocument { id: i.to_string(), text: String::new(), gold: set(g) })
            .collect(),
    )
    .unwrap();
    let preds = docs
        .iter()
        .enumerate()
        .map(|(i, (_, d))| PredictionRecord { doc_id: i.to_string(), detected: set(d) })
        .collect();
    (corpus, preds)
}

/// 2. Exact similarity at θ = 1 equals a plain set intersection, bit for bit.
fn theta_one_reduction() -> Outcome {
    let started = Instant::now();
    let mut mismatches = 0;
    for seed in 0..1000u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let docs: Vec<_> = (0..rng.random_range(1..25)).map(|_| (random_set(&mut rng), random_set(&mut rng))).collect();
        let (corpus, preds) = build(&docs);
        let report = macro_evaluate(&corpus, &preds, Theta::new(1.0).unwrap(), &SimilarityBackend::Exact, &EvalOptions::default())
            .unwrap();
        let oracle: Vec<(f64, f64)> = docs.iter().map(|(g, d)| exact_match_pr(g, d)).collect();
        let n = oracle.len() as f64;
        let mp = oracle.iter().map(|x| x.0).sum::<f64>() / n;
        let mr = oracle.iter().map(|x| x.1).sum::<f64>() / n;
        let mf = oracle.iter().map(|x| harmonic(x.0, x.1)).sum::<f64>() / n;
        let g = &report.generalized;
        if g.precision.to_bits() != mp.to_bits() || g.recall.to_bits() != mr.to_bits() || g.f1.to_bits() != mf.to_bits() {
            mismatches += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(mismatches == 0 && secs < 10.0, format!("1000 corpora, {mismatches} mismatches, {secs:.2}s (limit 10s)"))
}

/// 3. Solver cost and pairing equal exhaustive enumeration.
fn assignment_optimality() -> Outcome {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(3);
    let mut bad = 0;
    let total = 2000;
    for i in 0..total {
        let (r, c) = if i % 3 == 0 {
            let n = rng.random_range(1..=6);
            (n, n)
        } else {
            (rng.random_range(1..=6), rng.random_range(1..=6))
        };
        // half of the matrices draw from five levels to force ties
        let cost: Vec<Vec<f64>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| if i % 2 == 0 { rng.random::<f64>() } else { rng.random_range(0..5) as f64 / 4.0 })
                    .collect()
            })
            .collect();
        let p = solve_assignment(&CostMatrix::from_rows(&cost).unwrap()).unwrap();
        let (oracle_cost, oracle_pairs) = brute_force_lsap(&cost, if i % 2 == 0 { 1e-9 } else { 0.0 });
        if p.total_cost != oracle_cost || p.pairs != oracle_pairs {
            bad += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(bad == 0 && secs < 30.0, format!("{total} matrices up to 6x6, {bad} disagreements, {secs:.2}s (limit 30s)"))
}

/// 4. Every kept pair clears θ, pairs are one-to-one and bounded.
fn match_validity() -> Outcome {
    let violations: usize = (0..10_000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = StdRng::seed_from_u64(seed);
            let (r, c) = (rng.random_range(0..8), rng.random_range(0..8));
            let values: Vec<f64> = (0..r * c)
                .map(|_| match rng.random_range(0..4) {
                    0 => 1.0,
                    1 => 0.95,
                    _ => rng.random::<f64>(),
                })
                .collect();
            let theta = Theta::new(*[0.0, 0.5, 0.9, 0.95, 1.0].choose(&mut rng).unwrap()).unwrap();
            let m = SimilarityMatrix::from_values(r, c, values).unwrap();
            let ms = intersect_matrix("d", &m, theta).unwrap();
            let mut g: Vec<_> = ms.pairs.iter().map(|p| p.gold).collect();
            let mut d: Vec<_> = ms.pairs.iter().map(|p| p.detected).collect();
            g.sort();
            g.dedup();
            d.sort();
            d.dedup();
            let ok = ms.len() <= r.min(c)
                && g.len() == ms.len()
                && d.len() == ms.len()
                && ms.pairs.iter().all(|p| p.similarity >= theta.value() && p.similarity == m.get(p.gold, p.detected));
            usize::from(!ok)
        })
        .sum();
    check(violations == 0, format!("10000 instances, {violations} violations"))
}

/// 5. Paired bootstrap: null, separation, oracle agreement and speed.
fn bootstrap_behaviour() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let same: Vec<f64> = (0..80).map(|_| rng.random()).collect();
    let p_same = paired_bootstrap(&same, &same, 100_000, 42).unwrap().p_value;

    let p_apart = paired_bootstrap(&[1.0; 50], &[0.0; 50], 100_000, 42).unwrap().p_value;

    let (a, b) = noisy_pair(3);
    let p_noise = paired_bootstrap(&a, &b, 100_000, 42).unwrap().p_value;
    let p_oracle = bootstrap_other_rng(&a, &b, 100_000, 2024);

    let big_a: Vec<f64> = (0..2220).map(|_| rng.random()).collect();
    let big_b: Vec<f64> = (0..2220).map(|_| rng.random()).collect();
    let started = Instant::now();
    paired_bootstrap(&big_a, &big_b, 100_000, 42).unwrap();
    let secs = started.elapsed().as_secs_f64();

    let ok = p_same >= 0.95 && p_apart < 0.01 && (p_noise - p_oracle).abs() <= 0.01 && secs < 30.0;
    check(
        ok,
        format!(
            "identical p={p_same}, separated p={p_apart}, noise p={p_noise:.4} vs oracle {p_oracle:.4}, 1e5 x 2220 in {secs:.2}s"
        ),
    )
}

/// 6. Fleiss' kappa on fixed tables.
fn kappa() -> Outcome {
    let unanimous = fleiss_kappa(&RatingsTable::new(vec![vec![3, 0, 0], vec![0, 3, 0], vec![0, 0, 3], vec![3, 0, 0]]).unwrap()).kappa;
    let table: Vec<Vec<usize>> = vec![
        vec![3, 0, 0], vec![0, 3, 0], vec![2, 1, 0], vec![1, 1, 1], vec![0, 2, 1],
        vec![0, 0, 3], vec![3, 0, 0], vec![1, 2, 0], vec![0, 1, 2], vec![2, 0, 1],
    ];
    let exact: Vec<Vec<i128>> = table.iter().map(|r| r.iter().map(|&c| c as i128).collect()).collect();
    let (num, den) = fleiss_kappa_exact(&exact);
    let ten = fleiss_kappa(&RatingsTable::new(table).unwrap()).kappa;
    let split = fleiss_kappa(&RatingsTable::new(vec![vec![1, 1]; 8]).unwrap()).kappa;
    let ok = (unanimous - 1.0).abs() <= 1e-12
        && (num, den) == (101, 296)
        && (ten - num as f64 / den as f64).abs() <= 1e-9
        && split < 0.0;
    check(ok, format!("unanimous={unanimous}, 10-item={ten:.12} (exact {num}/{den}), uniform split={split:.4}"))
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os("ASPECTEVAL_DATA_DIR").map(PathBuf::from).filter(|p| p.is_dir())
}

/// Documents carrying at least one aspect, and aspect total.
fn annotated_counts(path: &Path, format: CorpusFormat) -> Result<(usize, usize), String> {
    let corpus = load_corpus(path, format).map_err(|e| e.to_string())?;
    let s = CorpusSummary::of(&corpus);
    Ok((s.documents - s.empty_documents, s.aspects))
}

/// 7. Document counts per split and aspect totals per dataset.
fn dataset_counts() -> Outcome {
    let Some(root) = data_dir() else {
        // bundled miniatures: conversion must preserve documents and polarity counts
        let dir = tempfile::tempdir().unwrap();
        let mut checked = Vec::new();
        for (name, format, docs) in [
            ("semeval_mini.xml", CorpusFormat::SemevalXml, 4),
            ("mams_mini.xml", CorpusFormat::SemevalXml, 2),
            ("twitter_mini.raw", CorpusFormat::TwitterTriple, 3),
            ("sport_mini.json", CorpusFormat::SportJson, 4),
        ] {
            let before = CorpusSummary::of(&load_corpus(fixture(name), format).unwrap());
            let dest = dir.path().join("c.jsonl");
            convert(fixture(name), format, &dest).unwrap();
            let after = CorpusSummary::of(&load_corpus(&dest, CorpusFormat::Canonical).unwrap());
            if before.documents != docs || after != before {
                return Fail(format!("{name}: counts changed through conversion"));
            }
            checked.push(name);
        }
        return Skip(format!(
            "ASPECTEVAL_DATA_DIR not set, published counts unchecked; conversion preserves counts on miniatures {checked:?}"
        ));
    };
    // (dataset, format, [(file, published annotated documents)], published aspect total)
    let datasets = [
        ("SemEval-14-Laptop", CorpusFormat::SemevalXml, [("semeval/Laptop_Train_v2.xml", 1482), ("semeval/Laptops_Test_Gold.xml", 422)], 2950),
        ("SemEval-14-Restaurant", CorpusFormat::SemevalXml, [("semeval/Restaurants_Train_v2.xml", 2019), ("semeval/Restaurants_Test_Gold.xml", 606)], 4785),
        ("MAMS", CorpusFormat::SemevalXml, [("mams/train.xml", 4297), ("mams/test.xml", 500)], 12522),
        ("Twitter", CorpusFormat::TwitterTriple, [("twitter/train.raw", 6248), ("twitter/test.raw", 692)], 6940),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    let mut seen = 0;
    for (name, format, splits, aspects_expected) in datasets {
        let mut aspects = 0;
        let mut complete = true;
        for (file, docs_expected) in splits {
            let path = root.join(file);
            if !path.exists() {
                complete = false;
                continue;
            }
            seen += 1;
            match annotated_counts(&path, format) {
                Ok((docs, a)) => {
                    aspects += a;
                    ok &= docs == docs_expected;
                    lines.push(format!("{file}: {docs}/{docs_expected} docs"));
                }
                Err(e) => {
                    ok = false;
                    lines.push(format!("{file}: {e}"));
                }
            }
        }
        if complete {
            ok &= aspects == aspects_expected;
            lines.push(format!("{name}: {aspects}/{aspects_expected} aspects"));
        }
    }
    if seen == 0 {
        return Skip(format!("no dataset files under {}", root.display()));
    }
    check(ok, lines.join("; "))
}

/// 8. Share of gold aspects that are not substrings of their document.
fn implicit_rate() -> Outcome {
    let files: Vec<PathBuf> = data_dir()
        .map(|root| ["sport/train.json", "sport/test.json"].iter().map(|f| root.join(f)).filter(|p| p.exists()).collect())
        .unwrap_or_default();
    if files.is_empty() {
        let mini = CorpusSummary::of(&load_corpus(fixture("sport_mini.json"), CorpusFormat::SportJson).unwrap());
        return Skip(format!(
            "novel dataset files not supplied; measurement on the bundled miniature gives {:.3}",
            mini.implicit_rate
        ));
    }
    let (mut implicit, mut total, mut docs) = (0, 0, 0);
    for f in &files {
        match load_corpus(f, CorpusFormat::SportJson) {
            Ok(c) => {
                let s = CorpusSummary::of(&c);
                implicit += s.implicit_aspects;
                total += s.aspects;
                docs += s.documents;
            }
            Err(e) => return Fail(format!("{}: {e}", f.display())),
        }
    }
    let rate = implicit as f64 / total.max(1) as f64;
    check(rate >= 0.35 - 0.02, format!("{docs} documents, {implicit}/{total} implicit = {rate:.4} (need >= 0.33)"))
}

/// 9. Audited-set sizes on the constructed sweep fixture.
fn sweep_shape() -> Outcome {
    let corpus = load_corpus(fixture("sweep_gold.jsonl"), CorpusFormat::Canonical).unwrap();
    let systems: Vec<SystemPredictions> = ["sweep_system_a.jsonl", "sweep_system_b.jsonl"]
        .iter()
        .map(|f| SystemPredictions {
            system: f.to_string(),
            predictions: aspect_eval::io::load_predictions(fixture(f)).unwrap().records,
        })
        .collect();
    let oracle = SimilarityBackend::Oracle(OracleTable::from_csv_path(&fixture("sweep_oracle.csv")).unwrap());
    let grid = Grid::new(vec![0.925, 0.95]).unwrap();
    let rows = theta_sweep(&corpus, &systems, &grid, &oracle, None).unwrap().rows;
    let sizes: Vec<usize> = rows.iter().map(|r| r.non_exact_pairs).collect();
    let exact = theta_sweep(&corpus, &systems, &Grid::standard(), &SimilarityBackend::Exact, None).unwrap();
    let exact_max = exact.rows.iter().map(|r| r.non_exact_pairs).max().unwrap();
    check(
        sizes == [2, 1] && exact_max == 0,
        format!("|I| at 0.925, 0.95 = {sizes:?}; exact backend max |I| = {exact_max} over 40 thresholds"),
    )
}

const NOISE: &[char] = &[
    '{', '}', '[', ']', '"', '\'', ':', ',', '.', ' ', '\n', '\\', 'u', '0', '9', 'a', 'Z', '`', '#',
    'é', '\u{0}', '\u{feff}', '😀', '\u{301}',
];

fn mutate(rng: &mut rand_chacha::ChaCha8Rng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for _ in 0..rng.random_range(1..=8) {
        let len = chars.len();
        match rng.random_range(0..6) {
            0 => chars.insert(rng.random_range(0..=len), *NOISE.choose(rng).unwrap()),
            1 if len > 0 => {
                chars.remove(rng.random_range(0..len));
            }
            2 if len > 0 => chars[rng.random_range(0..len)] = *NOISE.choose(rng).unwrap(),
            3 if len > 1 => {
                let a = rng.random_range(0..len);
                let b = rng.random_range(a..len);
                let piece: Vec<char> = chars[a..=b].to_vec();
                let at = rng.random_range(0..=len);
                chars.splice(at..at, piece);
            }
            4 if len > 0 => chars.truncate(rng.random_range(0..len)),
            _ => {
                let bytes: Vec<u8> = (0..rng.random_range(1..6)).map(|_| rng.random()).collect();
                let at = rng.random_range(0..=len);
                chars.splice(at..at, String::from_utf8_lossy(&bytes).chars().collect::<Vec<_>>());
            }
        }
    }
    chars.into_iter().collect()
}

/// 10. Tolerant parsing never panics on mutated model responses.
fn response_fuzz() -> Outcome {
    use rand::SeedableRng as _;
    const TOTAL: u64 = 1_000_000;
    const CHUNK: u64 = 10_000;
    let clean: usize = MODEL_RESPONSES.iter().map(|r| parse_llm_annotation(r).pairs.len()).sum();
    let previous = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let crashes: u64 = (0..TOTAL / CHUNK)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(chunk);
            let mut crashes = 0;
            for _ in 0..CHUNK {
                let base = MODEL_RESPONSES.choose(&mut rng).unwrap();
                let text = if rng.random_bool(0.1) {
                    format!("{}\n{}", mutate(&mut rng, base), mutate(&mut rng, base))
                } else {
                    mutate(&mut rng, base)
                };
                let outcome = panic::catch_unwind(|| {
                    let _ = parse_llm_annotation(&text);
                    let _ = parse_numbered_responses(&text);
                });
                crashes += u64::from(outcome.is_err());
            }
            crashes
        })
        .sum();
    panic::set_hook(previous);
    check(
        crashes == 0 && clean == 26,
        format!("{TOTAL} mutations of {} responses, {crashes} crashes; unmutated responses give {clean} pairs", MODEL_RESPONSES.len()),
    )
}
