//! The `rankfreq` binary end to end.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rankfreq::freq::{read_tsv, read_tsv_tables};
use rankfreq::tokenizer::{count_tokens, tokenize};
use rankfreq::FrequencyTable;
use serde_json::Value;

fn rankfreq(args: &[&str], cwd: &Path) -> Output {
    Command::new(common::bin()).args(args).current_dir(cwd).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, content: impl AsRef<[u8]>) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn freq_example() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.txt", "the cat the");
    let o = rankfreq(&["freq", "a.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "#label=a\t#total=3\n1\tthe\t2\n2\tcat\t1\n");
    assert!(o.stderr.is_empty());
}

#[test]
fn freq_merge_equals_concatenation() {
    let dir = tempfile::tempdir().unwrap();
    let a = "It was the best of times, it was the worst of times.\n";
    let b = "It was the age of wisdom; it was the age of foolishness.\n";
    write(dir.path(), "a.txt", a);
    write(dir.path(), "b.txt", b);
    write(dir.path(), "ab.txt", format!("{a}{b}"));
    let merged = rankfreq(&["freq", "a.txt", "b.txt", "--merge", "--label", "ab"], dir.path());
    let concat = rankfreq(&["freq", "ab.txt"], dir.path());
    assert_eq!(stdout(&merged), stdout(&concat));
    assert_eq!(stdout(&merged).lines().next(), Some("#label=ab\t#total=24"));
}

#[test]
fn freq_several_tables_in_argument_order() {
    let dir = tempfile::tempdir().unwrap();
    let names: Vec<String> = (0..6).map(|i| format!("d{i}.txt")).collect();
    for (i, n) in names.iter().enumerate() {
        write(dir.path(), n, "word ".repeat(i + 1));
    }
    let mut args = vec!["freq"];
    args.extend(names.iter().map(String::as_str));
    let o = rankfreq(&args, dir.path());
    let tables = read_tsv_tables(o.stdout.as_slice(), "out").unwrap();
    let labels: Vec<&str> = tables.iter().map(FrequencyTable::label).collect();
    assert_eq!(labels, ["d0", "d1", "d2", "d3", "d4", "d5"]);
    assert_eq!(tables[4].count("word"), 5);
}

#[test]
fn freq_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = "Żółw i żółw; ŻÓŁW—don't re-enter, 4th time: Straße. çà va?";
    write(dir.path(), "pl.txt", text);
    let o = rankfreq(&["freq", "pl.txt", "-o", "pl.tsv"], dir.path());
    assert!(o.status.success() && o.stdout.is_empty());
    let back = read_tsv(std::fs::read(dir.path().join("pl.tsv")).unwrap().as_slice(), "pl.tsv").unwrap();
    assert_eq!(back, count_tokens(&tokenize(text, "pl")));
    assert_eq!(back.count("żółw"), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = rankfreq(&["freq", "missing.txt"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("missing.txt"));
    assert!(missing.stdout.is_empty());

    write(dir.path(), "bad.txt", b"abc \xff def");
    let bad = rankfreq(&["freq", "bad.txt"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("bad.txt") && stderr(&bad).contains("offset 4"), "{}", stderr(&bad));

    assert_eq!(rankfreq(&["freq"], dir.path()).status.code(), Some(1));
    assert_eq!(rankfreq(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(rankfreq(&["fit", "x", "--rmin", "abc"], dir.path()).status.code(), Some(1));
    assert_eq!(rankfreq(&["fit", "x", "--rmin", "50", "--rmax", "10"], dir.path()).status.code(), Some(1));
    assert_eq!(rankfreq(&["monkey", "--alphabet", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(rankfreq(&["monkey", "--space-prob", "1.5"], dir.path()).status.code(), Some(1));
    assert_eq!(rankfreq(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(rankfreq(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn diagnostics_go_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "long.txt", format!("short {} words", "x".repeat(100)));
    let o = rankfreq(&["freq", "long.txt"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning") && stderr(&o).contains("long.txt"));
    let t = read_tsv(o.stdout.as_slice(), "stdout").unwrap();
    assert_eq!(t.total_tokens(), 2);
}

/// 720720 is divisible by every rank 1..=16, so counts follow 1/r exactly.
fn exact_table() -> FrequencyTable {
    FrequencyTable::from_counts("exact", (1..=16u64).map(|r| (format!("w{r:02}"), 720_720 / r)))
}

#[test]
fn fit_exact_table() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "exact.tsv", exact_table().to_tsv_string().unwrap());
    let v = json(&rankfreq(&["fit", "exact.tsv", "--rmin", "1", "--rmax", "16"], dir.path()));
    assert_eq!(v["schema"], "rankfreq-report/1");
    let fit = &v["distributions"][0]["fit"];
    assert!((fit["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((fit["r_squared"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(fit["window"]["r_max"], 16);
    assert_eq!(v["distributions"][0]["tokens"], exact_table().total_tokens());
    assert_eq!(v["inputs"][0]["path"], "exact.tsv");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn fit_defaults_and_insufficient_points() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "exact.tsv", exact_table().to_tsv_string().unwrap());
    // The default window starts at rank 10, leaving seven points.
    let o = rankfreq(&["fit", "exact.tsv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("exact.tsv") && stderr(&o).contains("insufficient"), "{}", stderr(&o));
}

fn two_regime_table() -> FrequencyTable {
    FrequencyTable::from_counts(
        "two",
        (1..=50_000u64).map(|r| {
            let f = if r < 5000 { 1e12 / r as f64 } else { 1e12 / 5000.0 * (r as f64 / 5000.0).powf(-1.6) };
            (format!("w{r:06}"), f.round() as u64)
        }),
    )
}

#[test]
fn fit_piecewise_recovers_break() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "two.tsv", two_regime_table().to_tsv_string().unwrap());
    let v = json(&rankfreq(&["fit", "two.tsv", "--piecewise", "--goodness", "--rmax", "50000"], dir.path()));
    let pw = &v["distributions"][0]["piecewise"];
    let r = pw["breakpoint_rank"].as_f64().unwrap();
    assert!(r / 5000.0 < 1.3 && 5000.0 / r < 1.3, "{r}");
    assert!((pw["alpha_low"].as_f64().unwrap() - 1.0).abs() < 0.02);
    assert!((pw["alpha_high"].as_f64().unwrap() - 1.6).abs() < 0.02);
    assert!(pw["improvement_ratio"].as_f64().unwrap() < 0.5);
    let runs = v["distributions"][0]["goodness"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
}

#[test]
fn fit_detects_raw_text_and_multi_table_files() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (1..=40).flat_map(|i| std::iter::repeat_n(format!("w{} ", "a".repeat(i)), 400 / i)).collect();
    write(dir.path(), "raw.txt", &text);
    let raw = json(&rankfreq(&["fit", "raw.txt", "--rmin", "1", "--rmax", "40"], dir.path()));
    let tsv_out = rankfreq(&["freq", "raw.txt"], dir.path());
    write(dir.path(), "raw.tsv", &tsv_out.stdout);
    let tab = json(&rankfreq(&["fit", "raw.tsv", "--rmin", "1", "--rmax", "40"], dir.path()));
    assert_eq!(raw["distributions"][0]["fit"], tab["distributions"][0]["fit"]);

    let mut two = exact_table().to_tsv_string().unwrap();
    let mut other = exact_table();
    other.set_label("again");
    two.push_str(&other.to_tsv_string().unwrap());
    write(dir.path(), "two.tsv", two);
    let v = json(&rankfreq(&["fit", "two.tsv", "--rmin", "1", "--rmax", "16"], dir.path()));
    let labels: Vec<&str> =
        v["distributions"].as_array().unwrap().iter().map(|d| d["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["exact", "again"]);

    // --raw tokenizes the table text itself.
    let forced = json(&rankfreq(&["fit", "raw.tsv", "--raw", "--rmin", "1", "--rmax", "40"], dir.path()));
    assert_ne!(forced["distributions"][0]["vocabulary"], tab["distributions"][0]["vocabulary"]);
}

#[test]
fn monkey_table_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["monkey", "--alphabet", "2", "--space-prob", "0.5", "--tokens", "10", "--seed", "42"];
    let a = rankfreq(&args, dir.path());
    let b = rankfreq(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("# monkey ") && header.ends_with("analytic_alpha=2"), "{header}");
    assert!(header.contains("rng=ChaCha8"));
    let t = read_tsv(a.stdout.as_slice(), "m").unwrap();
    assert_eq!(t.total_tokens(), 10);
    assert!(t.entries().keys().all(|w| w.chars().all(|c| c == 'a' || c == 'b')));

    let table = dir.path().join("m.tsv");
    let gen = ["monkey", "--tokens", "20000", "-o", table.to_str().unwrap()];
    assert!(rankfreq(&gen, dir.path()).status.success());
    let fit = rankfreq(&["fit", "--rmin", "1", "--rmax", "100", "m.tsv"], dir.path());
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    assert_eq!(v["monkey"]["params"]["alphabet_size"], 26);
    assert_eq!(v["monkey"]["params"]["token_count"], 20000);
    let analytic = v["monkey"]["analytic_alpha"].as_f64().unwrap();
    assert!((analytic - 1.0609).abs() < 1e-4);
}

#[test]
fn compare_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // Same vocabulary; B's tail falls away faster after rank 20.
    let mk = |tail: f64| -> String {
        (1..=200usize)
            .flat_map(|r| {
                let f = if r <= 20 { 4000.0 / r as f64 } else { 200.0 * (r as f64 / 20.0).powf(-tail) };
                std::iter::repeat_n(format!("{} ", word(r)), f.round().max(1.0) as usize)
            })
            .collect()
    };
    write(p, "a1.txt", mk(1.0));
    write(p, "b1.txt", mk(1.6));
    write(p, "a.manifest", "#label=A\na1.txt\n");
    write(p, "b.manifest", "#label=B\n# comment\nb1.txt\n");
    let v = json(&rankfreq(&["compare", "a.manifest", "b.manifest", "--sustain", "20", "--rmin", "1", "--rmax", "200"], p));
    let d = &v["divergences"][0];
    assert_eq!(d["label_a"], "A");
    let r = d["divergence_rank"].as_u64().unwrap();
    assert!(r > 20, "{r}");
    assert_eq!(d["direction"], "second_decays_faster");
    assert_eq!(v["distributions"].as_array().unwrap().len(), 2);
    assert_eq!(v["inputs"].as_array().unwrap().len(), 4);

    let back = json(&rankfreq(&["compare", "b.manifest", "a.manifest", "--sustain", "20"], p));
    assert_eq!(back["divergences"][0]["divergence_rank"].as_u64(), Some(r));
    assert_eq!(back["divergences"][0]["direction"], "first_decays_faster");

    write(p, "c.manifest", "#target=100000\n#trim=truncate_last_document\na1.txt\n");
    let o = rankfreq(&["compare", "a.manifest", "c.manifest"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c.manifest"), "{}", stderr(&o));
}

/// Letters-only token for rank `r`; digits would split it.
fn word(r: usize) -> String {
    format!("t{r:03}").chars().map(|c| if c.is_ascii_digit() { (b'a' + c as u8 - b'0') as char } else { c }).collect()
}

fn lemma_list() -> String {
    let mut s = String::from("#unit=per_million\n#label=toy\n");
    for r in 1..=60 {
        s.push_str(&format!("n{r:03}\tNoC\t{}\n", 5000.0 / r as f64));
        s.push_str(&format!("v{r:03}\tVerb\t{}\n", 3000.0 / r as f64));
    }
    s.push_str("the\tDet\t60000\n");
    s
}

#[test]
fn strata_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "toy.tsv", lemma_list());
    let o = rankfreq(&["strata", "toy.tsv"], p);
    assert!(stderr(&o).contains("unmapped"));
    let v = json(&o);
    let strata = v["strata"]["strata"].as_array().unwrap();
    let names: Vec<&str> = strata.iter().map(|s| s["stratum"].as_str().unwrap()).collect();
    assert_eq!(&names[2..], ["adjective", "adverb"]);
    assert_eq!(strata[0]["status"], "fitted");
    assert!((strata[0]["fit"]["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(strata[0]["fit"]["window"]["r_max"], 60);
    assert_eq!(strata[3]["status"], "insufficient");
    assert_eq!(v["strata"]["combined"]["lemmas"], 121);

    let only = json(&rankfreq(&["strata", "toy.tsv", "--pos", "verb"], p));
    assert_eq!(only["strata"]["strata"].as_array().unwrap().len(), 1);
    assert_eq!(only["distributions"][0]["vocabulary"], 60);

    write(p, "map.tsv", "NoC\tverb\nVerb\tnoun\n");
    let swapped = json(&rankfreq(&["strata", "toy.tsv", "--mapping", "map.tsv", "--pos", "noun"], p));
    assert_eq!(swapped["distributions"][0]["label"], "toy:noun");
    assert_eq!(swapped["inputs"].as_array().unwrap().len(), 2);

    write(p, "dup.tsv", "run\tverb\t10\nx\tnoun\t3\nrun\tVerb\t4\n");
    let o = rankfreq(&["strata", "dup.tsv"], p);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("dup.tsv") && e.contains("lines 1 and 3"), "{e}");
}

#[test]
fn plot_svg_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let t = FrequencyTable::from_counts("exact", (1..=5000u64).map(|r| (format!("w{r:05}"), 10_000_000 / r)));
    write(p, "exact.tsv", t.to_tsv_string().unwrap());
    let a = rankfreq(&["plot", "exact.tsv"], p);
    let b = rankfreq(&["plot", "--svg", "exact.tsv"], p);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let svg = stdout(&a);
    assert_eq!(svg.matches(r#"<g class="series""#).count(), 1);
    assert_eq!(svg.matches(r#"class="overlay""#).count(), 1);
    assert!(svg.contains(r#"version="1.1""#));

    let lin = rankfreq(&["plot", "--linear", "exact.tsv", "-o", "lin.svg"], p);
    assert!(lin.status.success() && lin.stdout.is_empty());
    assert_ne!(std::fs::read(p.join("lin.svg")).unwrap(), a.stdout);
}

#[test]
fn plot_from_reports_marks_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mk = |tail: f64| -> String {
        (1..=300usize)
            .flat_map(|r| {
                let f = if r <= 30 { 3000.0 / r as f64 } else { 100.0 * (r as f64 / 30.0).powf(-tail) };
                std::iter::repeat_n(format!("{} ", word(r)), f.round().max(1.0) as usize)
            })
            .collect()
    };
    write(p, "a.txt", mk(1.0));
    write(p, "b.txt", mk(1.5));
    write(p, "a.manifest", "a.txt\n");
    write(p, "b.manifest", "b.txt\n");
    let rep = rankfreq(&["compare", "a.manifest", "b.manifest", "--series", "--sustain", "10", "-o", "cmp.json"], p);
    assert!(rep.status.success(), "{}", stderr(&rep));
    let svg = stdout(&rankfreq(&["plot", "cmp.json"], p));
    assert_eq!(svg.matches(r#"class="divergence""#).count(), 1);
    assert_eq!(svg.matches(r#"<g class="series""#).count(), 2);

    write(p, "empty.json", r#"{"schema":"rankfreq-report/1","tool_version":"0","generated_at_unix":0,"inputs":[],"distributions":[]}"#);
    let o = rankfreq(&["plot", "empty.json"], p);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(rankfreq(&["plot"], p).status.code(), Some(1));
}

fn gnuplot_available() -> bool {
    Command::new("gnuplot").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn gnuplot_script_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "exact.tsv", exact_table().to_tsv_string().unwrap());
    let o = rankfreq(&["plot", "--gnuplot", "--rmin", "1", "--rmax", "16", "exact.tsv", "-o", "plot.gp"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let script = std::fs::read_to_string(p.join("plot.gp")).unwrap();
    assert!(script.contains("$series0 << EOD") && script.contains("$overlay0 << EOD"));
    if !gnuplot_available() {
        eprintln!("gnuplot not installed; skipping the gnuplot run");
        return;
    }
    let run = Command::new("gnuplot").arg("plot.gp").current_dir(p).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("<svg"));
}
