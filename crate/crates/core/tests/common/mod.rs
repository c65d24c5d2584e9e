//! Reference implementations used as test oracles. Each one is written
//! independently of the library code it checks.
#![allow(dead_code)]

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Every maximum-cardinality one-to-one pairing of a `rows x cols` matrix,
/// each as row-sorted `(row, col)` pairs.
pub fn all_pairings(rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(
        r: usize,
        rows: usize,
        k: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        if r == rows || rows - r < k - cur.len() {
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                cur.push((r, c));
                go(r + 1, rows, k, used, cur, out);
                cur.pop();
                used[c] = false;
            }
        }
        // leave row r unassigned
        go(r + 1, rows, k, used, cur, out);
    }
    let mut out = Vec::new();
    go(0, rows, rows.min(cols), &mut vec![false; cols], &mut Vec::new(), &mut out);
    out
}

/// Minimum total cost by enumeration; among optimal pairings (within `tol`)
/// the lexicographically smallest pair list. Costs are summed in pair order.
pub fn brute_force_lsap(cost: &[Vec<f64>], tol: f64) -> (f64, Vec<(usize, usize)>) {
    let rows = cost.len();
    let cols = cost[0].len();
    let scored: Vec<(f64, Vec<(usize, usize)>)> = all_pairings(rows, cols)
        .into_iter()
        .map(|p| (p.iter().map(|&(r, c)| cost[r][c]).sum::<f64>(), p))
        .collect();
    let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    scored
        .into_iter()
        .filter(|s| s.0 <= best + tol)
        .min_by(|a, b| a.1.cmp(&b.1))
        .unwrap()
}

/// Largest achievable sum of similarities at or above `theta` over one-to-one
/// pairings, by enumeration.
pub fn brute_force_max_similarity(sim: &[Vec<f64>], theta: f64) -> f64 {
    if sim.is_empty() || sim[0].is_empty() {
        return 0.0;
    }
    all_pairings(sim.len(), sim[0].len())
        .into_iter()
        .map(|p| {
            p.iter()
                .map(|&(r, c)| if sim[r][c] >= theta { sim[r][c] } else { 0.0 })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Case-insensitive exact-match precision and recall of one document.
pub fn exact_match_pr(gold: &[&str], detected: &[&str]) -> (f64, f64) {
    let key = |s: &&str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    let g: HashSet<String> = gold.iter().map(key).collect();
    let d: HashSet<String> = detected.iter().map(key).collect();
    let hits = g.intersection(&d).count();
    match (g.len(), d.len()) {
        (0, 0) => (1.0, 1.0),
        (gl, dl) => (
            if dl == 0 { 0.0 } else { hits as f64 / dl as f64 },
            if gl == 0 { 0.0 } else { hits as f64 / gl as f64 },
        ),
    }
}

pub fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Sequential replay of the documented resampling stream: block `k` of 1024
/// iterations uses ChaCha8 seeded with `seed` on stream `k`.
pub fn bootstrap_same_stream(a: &[f64], b: &[f64], iterations: usize, seed: u64) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let delta = d.iter().sum::<f64>() / n as f64;
    let mut hits = 0usize;
    let mut done = 0usize;
    let mut block = 0u64;
    while done < iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        for _ in 0..1024.min(iterations - done) {
            let mut s = 0.0;
            for _ in 0..n {
                s += d[rng.random_range(0..n)];
            }
            if s / n as f64 >= 2.0 * delta {
                hits += 1;
            }
            done += 1;
        }
        block += 1;
    }
    hits as f64 / iterations as f64
}

/// The same test statistic driven by an unrelated generator: resample means
/// of system A and system B separately and compare their difference.
pub fn bootstrap_other_rng(a: &[f64], b: &[f64], iterations: usize, seed: u64) -> f64 {
    let n = a.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let delta = mean(a) - mean(b);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..iterations {
        let (mut sa, mut sb) = (0.0, 0.0);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            sa += a[i];
            sb += b[i];
        }
        if (sa - sb) / n as f64 >= 2.0 * delta {
            hits += 1;
        }
    }
    hits as f64 / iterations as f64
}

/// Fleiss' kappa as an exact fraction `(numerator, denominator)`.
pub fn fleiss_kappa_exact(counts: &[Vec<i128>]) -> (i128, i128) {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let big_n = counts.len() as i128;
    let n: i128 = counts[0].iter().sum();
    let k = counts[0].len();
    // P_bar = sum_i (sum_j n_ij^2 - n) / (N n (n - 1))
    let pbar_num: i128 = counts.iter().map(|r| r.iter().map(|c| c * c).sum::<i128>() - n).sum();
    let pbar_den = big_n * n * (n - 1);
    // P_e = sum_j (col_j)^2 / (N n)^2
    let pe_num: i128 = (0..k)
        .map(|j| counts.iter().map(|r| r[j]).sum::<i128>().pow(2))
        .sum();
    let pe_den = (big_n * n).pow(2);
    // (pbar - pe) / (1 - pe)
    let num = (pbar_num * pe_den - pe_num * pbar_den) * pe_den;
    let den = pbar_den * pe_den * (pe_den - pe_num);
    let g = gcd(num, den);
    (num / g, den / g)
}

/// Noise fixture for bootstrap checks: 120 documents where A is slightly
/// better than B on average.
pub fn noisy_pair(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let b: Vec<f64> = (0..120).map(|_| rng.random_range(0.2..0.9)).collect();
    let a: Vec<f64> = b
        .iter()
        .map(|&x| (x + rng.random_range(-0.25..0.27)).clamp(0.0, 1.0))
        .collect();
    (a, b)
}

/// The GPT-4 and Gemini responses shown for the survey-feedback prompt.
pub const MODEL_RESPONSES: &[&str] = &[
    r#"1. {"Organization":"Negative"}"#,
    r#"2. {"Weather preparedness":"Negative"}"#,
    r#"3. {"Sign-up process":"Negative", "Website functionality":"Negative"}"#,
    r#"4. {"Food quality":"Negative", "Food pricing":"Negative"}"#,
    r#"8. {"Weather preparedness":"Negative", "Sun protection":"Negative"}"#,
    r#"18. {"Food policy":"Negative", "Food quality":"Negative"}"#,
    r#"20. {"Inclusivity":"Negative", "Accessibility":"Negative", "Food diversity":"Negative"}"#,
    r#"1. {"organization": "Negative", "direction": "Negative", "help": "Negative"}"#,
    r#"4. {"food": "Negative", "options": "Negative", "overpriced": "Negative"}"#,
    r#"13. {"communication": "Negative", "announcements": "Negative"} "#,
    r#"15. {"disorganization": "Negative", "stressful": "Negative"}"#,
    r#"19. {"appreciation for volunteers": "Negative"}"#,
    r#"1 {"school":"Positive","organization of art classes":"Negative"}"#,
    "{}",
];

#[derive(Clone, Copy)]
pub enum Mode {
    Ok,
    ServerError,
    Misaligned,
    WrongDim,
}

/// Deterministic 3-d vector for a text.
pub fn vector_for(text: &str) -> Vec<f64> {
    let bytes = text.as_bytes();
    vec![
        bytes.len() as f64,
        bytes.iter().map(|&b| b as f64).sum::<f64>() / 100.0,
        1.0 + bytes.first().copied().unwrap_or(0) as f64 / 10.0,
    ]
}

/// A single-threaded HTTP/1.1 server answering `POST /embed`.
pub fn serve(mode: Mode) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0usize;
            let mut path = String::new();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                if path.is_empty() {
                    path = line.split_whitespace().nth(1).unwrap_or_default().to_string();
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            counter.fetch_add(1, Ordering::SeqCst);
            let request: serde_json::Value = serde_json::from_slice(&body).unwrap();
            let texts: Vec<String> = request["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| t.as_str().unwrap().to_string())
                .collect();
            let mut vectors: Vec<Vec<f64>> = texts.iter().map(|t| vector_for(t)).collect();
            let (status, payload) = match mode {
                Mode::ServerError => (500, "{\"error\":\"overloaded\"}".to_string()),
                _ if path != "/embed" => (404, "{}".to_string()),
                Mode::Misaligned => {
                    vectors.pop();
                    (200, serde_json::json!({"model": request["model"], "dim": 3, "vectors": vectors}).to_string())
                }
                Mode::WrongDim => (200, serde_json::json!({"model": request["model"], "dim": 4, "vectors": vectors}).to_string()),
                Mode::Ok => (200, serde_json::json!({"model": request["model"], "dim": 3, "vectors": vectors}).to_string()),
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    (url, hits)
}

