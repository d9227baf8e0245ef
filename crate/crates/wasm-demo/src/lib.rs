//! Browser bindings for three small demos: a noise sweep over synthetic
//! rotated embeddings, a 2-D retrieval playground comparing the four
//! scoring modes, and the corpus tokenizer.
//!
//! Every export takes plain numbers or strings and returns a JSON string.
//! The `*_json` functions are ordinary Rust and are what the native tests
//! call.

use std::collections::HashMap;

use lexalign::retrieval::{retrieve, RetrievalConfig, RetrievalMode};
use lexalign::synthetic::noise_sweep;
use lexalign::{tokenize, EmbeddingTable, TokenRules};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Mean nn and CSLS precision@1 per noise level. `sigmas` is a
/// comma-separated list.
pub fn sweep_json(n: usize, dim: usize, sigmas: &str, seeds: u64, k: usize) -> Result<String, String> {
    let sigmas: Vec<f64> = sigmas
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad noise level '{}'", s.trim())))
        .collect::<Result<_, _>>()?;
    if sigmas.is_empty() {
        return Err("no noise levels given".into());
    }
    if !(10..=2000).contains(&n) || !(1..=128).contains(&dim) || !(1..=20).contains(&seeds) {
        return Err("keep 10 ≤ n ≤ 2000, 1 ≤ dim ≤ 128 and 1 ≤ seeds ≤ 20".into());
    }
    let points = noise_sweep(n, dim, &sigmas, seeds, k).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&points).unwrap())
}

#[wasm_bindgen]
pub fn sweep(n: usize, dim: usize, sigmas: &str, seeds: u32, k: usize) -> Result<String, JsError> {
    to_js(sweep_json(n, dim, sigmas, seeds.into(), k))
}

#[derive(Serialize)]
struct Point {
    word: String,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct ModeView {
    mode: RetrievalMode,
    /// Top target index for every source point.
    assigned: Vec<usize>,
    /// Largest number of sources sharing one top target.
    max_in_degree: usize,
    distinct_targets: usize,
}

#[derive(Serialize)]
struct Playground {
    sources: Vec<Point>,
    targets: Vec<Point>,
    modes: Vec<ModeView>,
}

/// Random 2-D points: targets spread evenly in angle, sources bunched
/// around one direction with angular spread `spread` (radians). Crowded
/// sources make a few targets into hubs under plain nn.
pub fn playground_json(
    n_src: usize,
    n_tgt: usize,
    spread: f64,
    k: usize,
    beta: f64,
    seed: u64,
) -> Result<String, String> {
    if !(1..=300).contains(&n_src) || !(1..=300).contains(&n_tgt) {
        return Err("point counts must be between 1 and 300".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = |prefix: char, i: usize, angle: f64| {
        let radius = rng.random_range(0.6..1.0);
        Point {
            word: format!("{prefix}{i}"),
            x: radius * angle.cos(),
            y: radius * angle.sin(),
        }
    };
    let step = std::f64::consts::TAU / n_tgt as f64;
    let targets: Vec<Point> = (0..n_tgt).map(|i| point('t', i, i as f64 * step)).collect();
    let mut angles = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let sources: Vec<Point> = (0..n_src)
        .map(|i| point('s', i, 0.8 + angles.random_range(-0.5..0.5) * spread))
        .collect();

    let table = |pts: &[Point]| EmbeddingTable::from_rows(pts.iter().map(|p| (p.word.clone(), vec![p.x, p.y])));
    let src = table(&sources).map_err(|e| e.to_string())?;
    let tgt = table(&targets).map_err(|e| e.to_string())?;
    let index: HashMap<&str, usize> = targets.iter().enumerate().map(|(i, p)| (p.word.as_str(), i)).collect();

    let mut modes = Vec::new();
    for mode in RetrievalMode::ALL {
        let config = RetrievalConfig {
            mode,
            k: k.clamp(1, n_src.min(n_tgt)),
            beta,
            top_n: Some(1),
            ..RetrievalConfig::default()
        };
        let results = retrieve(src.words(), &src, &tgt, &config).map_err(|e| e.to_string())?;
        let assigned: Vec<usize> = results
            .iter()
            .map(|r| index[r.ranked().and_then(|c| c.top()).expect("every source is in the table")])
            .collect();
        let mut degree = vec![0; n_tgt];
        for &t in &assigned {
            degree[t] += 1;
        }
        modes.push(ModeView {
            mode,
            max_in_degree: degree.iter().copied().max().unwrap_or(0),
            distinct_targets: degree.iter().filter(|&&d| d > 0).count(),
            assigned,
        });
    }
    Ok(serde_json::to_string(&Playground { sources, targets, modes }).unwrap())
}

#[wasm_bindgen]
pub fn playground(n_src: usize, n_tgt: usize, spread: f64, k: usize, beta: f64, seed: u32) -> Result<String, JsError> {
    to_js(playground_json(n_src, n_tgt, spread, k, beta, seed.into()))
}

/// Tokens of every line of `text`, as a JSON array of arrays.
pub fn tokenize_json(text: &str, lowercase: bool, min_token_length: usize) -> String {
    let rules = TokenRules {
        lowercase,
        min_token_length,
        ..TokenRules::default()
    };
    let lines: Vec<Vec<String>> = text.lines().map(|l| tokenize(l, &rules)).collect();
    serde_json::to_string(&lines).unwrap()
}

#[wasm_bindgen]
pub fn tokenize_text(text: &str, lowercase: bool, min_token_length: usize) -> String {
    tokenize_json(text, lowercase, min_token_length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn sweep_reports_each_level() {
        let v: Value = serde_json::from_str(&sweep_json(60, 8, "0, 0.5", 2, 5).unwrap()).unwrap();
        let points = v.as_array().unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0]["sigma"], 0.0);
        assert_eq!(points[0]["nn_pct"], 100.0);
        assert!(points[1]["nn_pct"].as_f64().unwrap() < 100.0);
    }

    #[test]
    fn sweep_rejects_bad_input() {
        assert!(sweep_json(60, 8, "0.1,abc", 2, 5).unwrap_err().contains("abc"));
        assert!(sweep_json(60, 8, " ", 2, 5).is_err());
        assert!(sweep_json(5, 8, "0.1", 2, 5).is_err());
    }

    #[test]
    fn playground_has_every_mode() {
        let v: Value = serde_json::from_str(&playground_json(40, 12, 1.0, 5, 30.0, 3).unwrap()).unwrap();
        assert_eq!(v["sources"].as_array().unwrap().len(), 40);
        assert_eq!(v["targets"].as_array().unwrap().len(), 12);
        let modes = v["modes"].as_array().unwrap();
        let names: Vec<&str> = modes.iter().map(|m| m["mode"].as_str().unwrap()).collect();
        assert_eq!(names, ["nn", "inn", "isf", "csls"]);
        for m in modes {
            assert_eq!(m["assigned"].as_array().unwrap().len(), 40);
            assert!(m["assigned"].as_array().unwrap().iter().all(|t| t.as_u64().unwrap() < 12));
        }
    }

    #[test]
    fn crowded_sources_spread_out_under_csls() {
        let v: Value = serde_json::from_str(&playground_json(60, 24, 0.3, 10, 30.0, 1).unwrap()).unwrap();
        let stat = |mode: &str, key: &str| {
            v["modes"]
                .as_array()
                .unwrap()
                .iter()
                .find(|m| m["mode"] == mode)
                .unwrap()[key]
                .as_u64()
                .unwrap()
        };
        for mode in ["csls", "isf", "inn"] {
            assert!(stat(mode, "max_in_degree") < stat("nn", "max_in_degree"), "{mode}");
            assert!(stat(mode, "distinct_targets") > stat("nn", "distinct_targets"), "{mode}");
        }
    }

    #[test]
    fn tokenizer_lines() {
        let out = tokenize_json("Hello, World!\n  a 42 b-", true, 1);
        assert_eq!(out, r#"[["hello","world"],["a","b"]]"#);
        assert_eq!(tokenize_json("A bc", false, 2), r#"[["bc"]]"#);
    }

    #[test]
    fn playground_validates_sizes() {
        assert!(playground_json(0, 5, 1.0, 3, 30.0, 1).is_err());
    }
}
