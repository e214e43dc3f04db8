//! Property checks shared by the invariant tests and the acceptance suite.
//! Each runs `cases` randomized inputs and reports the first failure.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use rankfreq::fit::{fit_power_law, RankWindow};
use rankfreq::freq::{merge, read_tsv};
use rankfreq::tokenizer::{count_tokens, tokenize};
use rankfreq::{FrequencyTable, RankedDistribution};

pub const CASES: u32 = 1000;

/// The `rankfreq` binary. Inside its own package cargo provides the path;
/// elsewhere in the workspace it sits next to the test executable's
/// directory and is built on first use if missing.
pub fn bin() -> &'static Path {
    static BIN: OnceLock<PathBuf> = OnceLock::new();
    BIN.get_or_init(|| {
        if let Some(p) = option_env!("CARGO_BIN_EXE_rankfreq") {
            return PathBuf::from(p);
        }
        let exe = std::env::current_exe().unwrap();
        let dir = exe.parent().and_then(Path::parent).unwrap().to_path_buf();
        let path = dir.join(format!("rankfreq{}", std::env::consts::EXE_SUFFIX));
        if !path.exists() {
            let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
            let mut cmd = Command::new(cargo);
            cmd.args(["build", "-p", "rankfreq", "--bin", "rankfreq"]);
            if dir.file_name().is_some_and(|n| n == "release") {
                cmd.arg("--release");
            }
            assert!(cmd.status().unwrap().success(), "could not build rankfreq");
        }
        path
    })
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Positive frequencies in rank order, 12 to 400 ranks, with ties.
fn frequencies() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1e-3f64..1e6, (1u32..20).prop_map(f64::from)], 12..400).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    })
}

/// A window over `v` ranks holding at least ten of them and spanning at
/// least a factor of two in rank.
fn window_for(v: usize) -> impl Strategy<Value = RankWindow> {
    (1..=(v / 2).min(v.saturating_sub(9)).max(1)).prop_flat_map(move |lo| {
        let min_hi = (lo + 9).max(2 * lo);
        (Just(lo), min_hi..=(min_hi.max(v) + 50)).prop_map(|(lo, hi)| RankWindow::new(lo, hi).unwrap())
    })
}

fn table() -> impl Strategy<Value = FrequencyTable> {
    prop::collection::btree_map("[a-zß-ž]{1,8}", prop_oneof![1u64..5, 1u64..100_000], 12..300)
        .prop_map(|m| FrequencyTable::from_map("t", m))
}

fn alpha(d: &RankedDistribution<f64>, w: RankWindow) -> f64 {
    fit_power_law(d, w).unwrap().alpha
}

/// Scaling all frequencies by `c > 0` leaves alpha unchanged to 1e-12.
pub fn amplitude_invariance(cases: u32) -> Result<(), String> {
    let s = frequencies().prop_flat_map(|f| {
        let v = f.len();
        (Just(f), window_for(v), -6.0f64..6.0)
    });
    run(cases, s, |(f, w, log_c)| {
        let d = RankedDistribution::from_frequencies("d", &f, false).unwrap();
        let c = 10f64.powf(log_c);
        let scaled = d.scale(c).unwrap();
        let (a, b) = (alpha(&d, w), alpha(&scaled, w));
        prop_assert!((a - b).abs() <= 1e-12, "alpha {a} vs {b} at c={c}");
        let (fa, fb) = (fit_power_law(&d, w).unwrap(), fit_power_law(&scaled, w).unwrap());
        prop_assert!((fb.intercept - fa.intercept - c.log10()).abs() < 1e-9, "intercept shift");
        Ok(())
    })
}

/// rank(merge(T, T)) keeps token order, doubles every count and fits the
/// same alpha.
pub fn duplication_invariance(cases: u32) -> Result<(), String> {
    let s = table().prop_flat_map(|t| {
        let v = t.vocabulary_size();
        (Just(t), window_for(v))
    });
    run(cases, s, |(t, w)| {
        let doubled = merge(&[t.clone(), t.clone()], "tt").unwrap();
        let (d1, d2) = (t.rank::<f64>().unwrap(), doubled.rank::<f64>().unwrap());
        prop_assert_eq!(d1.len(), d2.len());
        for (p, q) in d1.points().iter().zip(d2.points()) {
            prop_assert_eq!(&p.token, &q.token);
            prop_assert_eq!(2.0 * p.frequency, q.frequency);
        }
        if d1.window_points(w.r_min, w.r_max).len() >= 10 {
            let (a, b) = (alpha(&d1, w), alpha(&d2, w));
            prop_assert!((a - b).abs() <= 1e-12, "alpha {a} vs {b}");
        }
        Ok(())
    })
}

/// Renaming tokens so that tied ones change order leaves the (rank,
/// frequency) pairs and therefore alpha exactly unchanged.
pub fn tie_order_invariance(cases: u32) -> Result<(), String> {
    let s = prop::collection::vec(1u64..6, 12..300).prop_flat_map(|counts| {
        let n = counts.len();
        (Just(counts), Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), window_for(n))
    });
    run(cases, s, |(counts, perm, w)| {
        let a = FrequencyTable::from_counts("a", counts.iter().enumerate().map(|(i, &c)| (format!("w{i:04}"), c)));
        let b = FrequencyTable::from_counts("a", counts.iter().enumerate().map(|(i, &c)| (format!("w{:04}", perm[i]), c)));
        let (da, db) = (a.rank::<f64>().unwrap(), b.rank::<f64>().unwrap());
        let fa: Vec<f64> = da.frequencies().collect();
        let fb: Vec<f64> = db.frequencies().collect();
        prop_assert_eq!(fa, fb);
        if da.window_points(w.r_min, w.r_max).len() >= 10 {
            prop_assert_eq!(alpha(&da, w).to_bits(), alpha(&db, w).to_bits());
        }
        Ok(())
    })
}

/// N(merge) is the sum of the inputs' N, and merge ignores argument order.
pub fn merge_conservation(cases: u32) -> Result<(), String> {
    let s = prop::collection::vec(table(), 1..6).prop_flat_map(|ts| {
        let n = ts.len();
        (Just(ts), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
    });
    run(cases, s, |(ts, perm)| {
        let m = merge(&ts, "m").unwrap();
        prop_assert_eq!(m.total_tokens(), ts.iter().map(|t| t.total_tokens()).sum::<u64>());
        prop_assert_eq!(m.entries().values().sum::<u64>(), m.total_tokens());
        let shuffled: Vec<FrequencyTable> = perm.iter().map(|&i| ts[i].clone()).collect();
        prop_assert_eq!(merge(&shuffled, "m").unwrap(), m);
        Ok(())
    })
}

/// Writing a table and reading it back gives an equal table.
pub fn tsv_round_trip(cases: u32) -> Result<(), String> {
    let s = (
        "[a-zA-Z0-9_. -]{0,12}",
        prop::collection::btree_map("[^\t\n\r]{1,10}", 1u64..1_000_000, 1..200),
    );
    run(cases, s, |(label, entries): (String, BTreeMap<String, u64>)| {
        let t = FrequencyTable::from_map(label, entries);
        let text = t.to_tsv_string().unwrap();
        let back = read_tsv(text.as_bytes(), "mem").unwrap();
        prop_assert_eq!(back, t);
        Ok(())
    })
}

fn fit_json(path: &Path) -> std::process::Output {
    Command::new(bin())
        .args(["fit", "--rmin", "1", "--rmax", "1000"])
        .arg(path)
        .output()
        .unwrap()
}

/// `freq` then `fit` through the binary agrees bit for bit with the
/// in-process tokenize, count, rank and fit.
pub fn cli_equivalence(cases: u32) -> Result<(), String> {
    let s = prop::collection::vec("[a-zA-ZÀ-ž]{1,7}", 8..60).prop_flat_map(|vocab| {
        let n = vocab.len();
        (Just(vocab), prop::collection::vec((0..n, 0..n), 20..800), prop::sample::select(vec![" ", "\n", ", ", " -- "]))
    });
    run(cases, s, |(vocab, picks, sep)| {
        // Products of two uniform picks skew towards low indices.
        let words: Vec<&str> = picks.iter().map(|&(i, j)| vocab[i.min(j)].as_str()).collect();
        let text = words.join(sep);
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("doc.txt");
        let tsv = dir.path().join("doc.tsv");
        std::fs::write(&src, &text).unwrap();

        let st = Command::new(bin()).arg("freq").arg(&src).arg("-o").arg(&tsv).status().unwrap();
        prop_assert!(st.success());
        let in_process = count_tokens(&tokenize(&text, "doc"));
        let from_cli = read_tsv(std::fs::read(&tsv).unwrap().as_slice(), "doc.tsv").unwrap();
        prop_assert_eq!(&from_cli, &in_process);

        let out = fit_json(&tsv);
        let window = RankWindow::new(1, 1000).unwrap();
        match in_process.rank::<f64>().and_then(|d| fit_power_law(&d, window)) {
            Err(_) => prop_assert_eq!(out.status.code(), Some(2)),
            Ok(fit) => {
                prop_assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
                let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
                let got = &v["distributions"][0]["fit"];
                for (key, want) in [
                    ("alpha", fit.alpha),
                    ("intercept", fit.intercept),
                    ("r_squared", fit.r_squared),
                    ("stderr_alpha", fit.stderr_alpha),
                ] {
                    let g = got[key].as_f64().unwrap();
                    prop_assert_eq!(g.to_bits(), want.to_bits(), "{}: {} vs {}", key, g, want);
                }
                prop_assert_eq!(got["n_points"].as_u64(), Some(fit.n_points as u64));
            }
        }
        Ok(())
    })
}
