use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use rankfreq::corpus::{assemble, compare, CorpusSpec, DEFAULT_DELTA, DEFAULT_SUSTAIN};
use rankfreq::fit::RankWindow;
use rankfreq::freq::{merge, read_tsv_tables};
use rankfreq::monkey::{monkey_generate, MonkeyParams};
use rankfreq::plot::{render_gnuplot, render_svg, PlotOptions};
use rankfreq::report::{AnalysisReport, DistributionReport, InputDigest, MonkeyReport, ReportOptions};
use rankfreq::strata::{parse_tagged_list, stratify, strata_report, PosMapping, PosTag};
use rankfreq::tokenizer::{count_tokens, tokenize_bytes};
use rankfreq::{Error, FrequencyTable};

#[derive(Parser)]
#[command(name = "rankfreq", version, about = "Word rank-frequency distributions and power-law fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize text files and write frequency tables (TSV).
    Freq {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Sum all inputs into a single table.
        #[arg(long)]
        merge: bool,
        /// Table label (single input or --merge); defaults to the file stem, or "merged".
        #[arg(long)]
        label: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit power-law exponents to frequency tables or raw text; JSON report.
    Fit {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
        /// Also fit a two-regime model with a rank breakpoint.
        #[arg(long)]
        piecewise: bool,
        /// Include the residual summary.
        #[arg(long)]
        goodness: bool,
        /// Treat inputs as raw text even if they look like tables.
        #[arg(long)]
        raw: bool,
        /// Embed (rank, frequency) series for plotting.
        #[arg(long)]
        series: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Assemble two corpora from manifests and find where their distributions diverge.
    Compare {
        manifest_a: PathBuf,
        manifest_b: PathBuf,
        /// Gap threshold in decades of relative frequency.
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        /// Consecutive ranks the gap must hold with one sign.
        #[arg(long, default_value_t = DEFAULT_SUSTAIN)]
        sustain: usize,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        series: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit each part of speech of a tagged lemma list separately.
    Strata {
        list: PathBuf,
        /// Parts of speech to report (default: noun, verb, adjective, adverb).
        #[arg(long = "pos", value_name = "POS")]
        pos: Vec<String>,
        /// Tag mapping file, `<source_tag>\t<canonical_pos>` per line.
        #[arg(long)]
        mapping: Option<PathBuf>,
        /// Fit window; each stratum defaults to [10, min(1000, V)].
        #[arg(long)]
        rmin: Option<usize>,
        #[arg(long)]
        rmax: Option<usize>,
        #[arg(long)]
        series: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate random-typing text and write its frequency table.
    Monkey {
        #[arg(long, default_value_t = 26)]
        alphabet: usize,
        #[arg(long, default_value_t = 0.18)]
        space_prob: f64,
        #[arg(long, default_value_t = 1_000_000)]
        tokens: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Plot tables and reports as SVG or as a gnuplot script.
    Plot {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, conflicts_with = "gnuplot")]
        svg: bool,
        #[arg(long)]
        gnuplot: bool,
        /// Linear axes instead of log10.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        title: Option<String>,
        /// Window for fits drawn over tables.
        #[command(flatten)]
        window: WindowArgs,
        /// Do not fit tables; draw points only.
        #[arg(long)]
        no_fit: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct WindowArgs {
    #[arg(long, default_value_t = RankWindow::DEFAULT.r_min)]
    rmin: usize,
    #[arg(long, default_value_t = RankWindow::DEFAULT.r_max)]
    rmax: usize,
}

impl WindowArgs {
    fn window(self) -> Result<RankWindow, Failure> {
        RankWindow::new(self.rmin, self.rmax).map_err(Failure::usage)
    }
}

/// A failed command: what went wrong and whether it was the caller's usage.
struct Failure {
    usage: bool,
    message: String,
}

impl Failure {
    fn usage(e: impl fmt::Display) -> Self {
        Failure { usage: true, message: e.to_string() }
    }

    fn data(e: impl fmt::Display) -> Self {
        Failure { usage: false, message: e.to_string() }
    }

    /// Data error prefixed with the offending path unless it already names it.
    fn at(path: &Path, e: Error) -> Self {
        let shown = path.display().to_string();
        let msg = e.to_string();
        if msg.contains(&shown) {
            Failure::data(msg)
        } else {
            Failure::data(format!("{shown}: {msg}"))
        }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CmdResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> CmdResult {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::data(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::data(format!("<stdout>: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn warn_tokens(path: &Path, warnings: usize) {
    if warnings > 0 {
        eprintln!("rankfreq: warning: {}: {warnings} over-long token(s) dropped", path.display());
    }
}

/// Tokenizes files in parallel; results keep argument order.
fn count_files(inputs: &[PathBuf]) -> CmdResult<Vec<(FrequencyTable, InputDigest)>> {
    inputs
        .par_iter()
        .map(|p| {
            let bytes = read(p)?;
            let stream = tokenize_bytes(&bytes, &stem(p)).map_err(|e| Failure::at(p, e))?;
            warn_tokens(p, stream.warnings.len());
            Ok((count_tokens(&stream), InputDigest::of_bytes(p.display().to_string(), &bytes)))
        })
        .collect()
}

fn looks_like_table(bytes: &[u8]) -> bool {
    let text = String::from_utf8_lossy(&bytes[..bytes.len().min(4096)]);
    text.lines()
        .map(str::trim_end)
        .find(|l| !l.is_empty() && !(l.starts_with('#') && !l.starts_with("#label=")))
        .is_some_and(|l| l.starts_with("#label="))
}

/// Tables in a file: TSV tables when it looks like one, otherwise raw text.
struct Loaded {
    tables: Vec<FrequencyTable>,
    digest: InputDigest,
    /// Generator settings when the file is a `monkey` table.
    monkey: Option<MonkeyParams>,
}

fn load_tables(path: &Path, force_raw: bool) -> CmdResult<Loaded> {
    let bytes = read(path)?;
    let digest = InputDigest::of_bytes(path.display().to_string(), &bytes);
    if !force_raw && looks_like_table(&bytes) {
        let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
        let monkey = std::str::from_utf8(first).ok().and_then(MonkeyParams::from_header);
        let tables =
            read_tsv_tables(bytes.as_slice(), &path.display().to_string()).map_err(|e| Failure::at(path, e))?;
        return Ok(Loaded { tables, digest, monkey });
    }
    let stream = tokenize_bytes(&bytes, &stem(path)).map_err(|e| Failure::at(path, e))?;
    warn_tokens(path, stream.warnings.len());
    Ok(Loaded { tables: vec![count_tokens(&stream)], digest, monkey: None })
}

fn cmd_freq(inputs: &[PathBuf], merged: bool, label: Option<String>, output: Option<&Path>) -> CmdResult {
    if label.is_some() && !merged && inputs.len() > 1 {
        return Err(Failure::usage("--label with several inputs requires --merge"));
    }
    let mut tables: Vec<FrequencyTable> = count_files(inputs)?.into_iter().map(|(t, _)| t).collect();
    if merged {
        let t = merge(&tables, label.unwrap_or_else(|| "merged".to_owned())).map_err(Failure::data)?;
        tables = vec![t];
    } else if let Some(l) = label {
        tables[0].set_label(l);
    }
    let mut text = String::new();
    for t in &tables {
        text.push_str(&t.to_tsv_string().map_err(Failure::data)?);
    }
    emit(output, &text)
}

fn cmd_fit(inputs: &[PathBuf], window: RankWindow, opts: ReportOptions, raw: bool, output: Option<&Path>) -> CmdResult {
    let loaded: Vec<_> = inputs.par_iter().map(|p| load_tables(p, raw)).collect::<CmdResult<_>>()?;
    let mut report = AnalysisReport::new(Vec::new());
    let mut entries = Vec::new();
    for (path, l) in inputs.iter().zip(loaded) {
        report.inputs.push(l.digest);
        if report.monkey.is_none() {
            report.monkey = l.monkey.map(MonkeyReport::new).transpose().map_err(Failure::data)?;
        }
        for t in l.tables {
            entries.push((path, t));
        }
    }
    let dists: Vec<DistributionReport> = entries
        .par_iter()
        .map(|(path, t)| {
            let d = t.rank::<f64>().map_err(|e| Failure::at(path, e))?;
            DistributionReport::analyze(&d, window, opts).map_err(|e| Failure::at(path, e))
        })
        .collect::<CmdResult<_>>()?;
    report.distributions = dists;
    emit(output, &report.to_json().map_err(Failure::data)?)
}

fn corpus_digests(manifest: &Path, spec: &CorpusSpec) -> CmdResult<Vec<InputDigest>> {
    std::iter::once(manifest)
        .chain(spec.documents.iter().map(PathBuf::as_path))
        .map(|p| InputDigest::of_file(p).map_err(|e| Failure::at(p, e)))
        .collect()
}

fn cmd_compare(
    a: &Path,
    b: &Path,
    delta: f64,
    sustain: usize,
    window: RankWindow,
    series: bool,
    output: Option<&Path>,
) -> CmdResult {
    let load = |m: &Path| -> CmdResult<_> {
        let spec = CorpusSpec::read_manifest(m).map_err(|e| Failure::at(m, e))?;
        let digests = corpus_digests(m, &spec)?;
        let table = assemble(&spec).map_err(|e| Failure::at(m, e))?;
        let dist = table.rank::<f64>().and_then(|d| d.to_relative()).map_err(|e| Failure::at(m, e))?;
        Ok((digests, dist))
    };
    let (ra, rb) = rayon::join(|| load(a), || load(b));
    let (da, a_dist) = ra?;
    let (db, b_dist) = rb?;
    let divergence = compare(&a_dist, &b_dist, delta, sustain).map_err(Failure::usage)?;

    let mut report = AnalysisReport::new(da.into_iter().chain(db).collect());
    for (m, d) in [(a, &a_dist), (b, &b_dist)] {
        let opts = ReportOptions { series, ..Default::default() };
        let entry = match DistributionReport::analyze(d, window, opts) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("rankfreq: warning: {}: no fit: {e}", m.display());
                DistributionReport::describe(d, series)
            }
        };
        report.distributions.push(entry);
    }
    report.divergences.push(divergence);
    emit(output, &report.to_json().map_err(Failure::data)?)
}

fn cmd_strata(
    list: &Path,
    pos: &[String],
    mapping: Option<&Path>,
    window: Option<RankWindow>,
    series: bool,
    output: Option<&Path>,
) -> CmdResult {
    let mut inputs = Vec::new();
    let mapping = match mapping {
        Some(m) => {
            let bytes = read(m)?;
            inputs.push(InputDigest::of_bytes(m.display().to_string(), &bytes));
            let text = String::from_utf8(bytes).map_err(|e| Failure::data(format!("{}: {e}", m.display())))?;
            PosMapping::parse(&text, &m.display().to_string()).map_err(|e| Failure::at(m, e))?
        }
        None => PosMapping::default(),
    };
    let bytes = read(list)?;
    inputs.insert(0, InputDigest::of_bytes(list.display().to_string(), &bytes));
    let text = String::from_utf8(bytes).map_err(|e| Failure::data(format!("{}: {e}", list.display())))?;
    let parsed = parse_tagged_list::<f64>(&text, &list.display().to_string(), &mapping).map_err(|e| Failure::at(list, e))?;
    if parsed.unmapped_tags > 0 {
        eprintln!("rankfreq: warning: {}: {} record(s) with unmapped tags", list.display(), parsed.unmapped_tags);
    }

    let mut report = AnalysisReport::new(inputs);
    let mut strata = strata_report(&parsed, window);
    if !pos.is_empty() {
        let wanted: Vec<PosTag> = pos.iter().map(|p| PosTag::parse_canonical(p)).collect();
        let names: Vec<String> = wanted.iter().map(ToString::to_string).collect();
        strata.strata.retain(|s| names.contains(&s.stratum));
        for tag in &wanted {
            let d = stratify(&parsed, tag).map_err(|e| Failure::at(list, e))?;
            let w = window.or_else(|| rankfreq::strata::default_stratum_window(d.len()));
            let opts = ReportOptions { series, ..Default::default() };
            let entry = match w.map(|w| DistributionReport::analyze(&d, w, opts)) {
                Some(Ok(r)) => r,
                _ => DistributionReport::describe(&d, series),
            };
            report.distributions.push(entry);
        }
    }
    report.strata = Some(strata);
    emit(output, &report.to_json().map_err(Failure::data)?)
}

fn cmd_monkey(params: MonkeyParams, output: Option<&Path>) -> CmdResult {
    let info = MonkeyReport::new(params).map_err(Failure::usage)?;
    let stream = monkey_generate(&params).map_err(Failure::usage)?;
    let table = count_tokens(&stream);
    let mut text = params.header(info.analytic_alpha);
    text.push('\n');
    text.push_str(&table.to_tsv_string().map_err(Failure::data)?);
    emit(output, &text)
}

struct PlotArgs<'a> {
    inputs: &'a [PathBuf],
    gnuplot: bool,
    options: PlotOptions,
    window: RankWindow,
    fit: bool,
    output: Option<&'a Path>,
}

fn cmd_plot(a: PlotArgs<'_>) -> CmdResult {
    let mut report = AnalysisReport::new(Vec::new());
    for path in a.inputs {
        let bytes = read(path)?;
        let is_report = bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{');
        if is_report {
            let text = String::from_utf8(bytes).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
            let other = AnalysisReport::from_json(&text).map_err(|e| Failure::at(path, e))?;
            report.absorb(other);
            continue;
        }
        let l = load_tables(path, false)?;
        report.inputs.push(l.digest);
        if report.monkey.is_none() {
            report.monkey = l.monkey.map(MonkeyReport::new).transpose().map_err(Failure::data)?;
        }
        for t in l.tables {
            let d = t.rank::<f64>().map_err(|e| Failure::at(path, e))?;
            let opts = ReportOptions { series: true, ..Default::default() };
            let entry = if a.fit {
                DistributionReport::analyze(&d, a.window, opts).unwrap_or_else(|e| {
                    eprintln!("rankfreq: warning: {}: {}: no fit: {e}", path.display(), d.label());
                    DistributionReport::describe(&d, true)
                })
            } else {
                DistributionReport::describe(&d, true)
            };
            report.distributions.push(entry);
        }
    }
    let text = if a.gnuplot {
        render_gnuplot(&report, &a.options, None)
    } else {
        render_svg(&report, &a.options)
    }
    .map_err(Failure::data)?;
    emit(a.output, &text)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Freq { inputs, merge, label, output } => cmd_freq(&inputs, merge, label, output.as_deref()),
        Command::Fit { inputs, window, piecewise, goodness, raw, series, output } => {
            let opts = ReportOptions { piecewise, goodness, series };
            cmd_fit(&inputs, window.window()?, opts, raw, output.as_deref())
        }
        Command::Compare { manifest_a, manifest_b, delta, sustain, window, series, output } => {
            if !(delta >= 0.0) || sustain == 0 {
                return Err(Failure::usage("--delta must be >= 0 and --sustain >= 1"));
            }
            cmd_compare(&manifest_a, &manifest_b, delta, sustain, window.window()?, series, output.as_deref())
        }
        Command::Strata { list, pos, mapping, rmin, rmax, series, output } => {
            let window = match (rmin, rmax) {
                (None, None) => None,
                (lo, hi) => Some(
                    RankWindow::new(lo.unwrap_or(RankWindow::DEFAULT.r_min), hi.unwrap_or(1000)).map_err(Failure::usage)?,
                ),
            };
            cmd_strata(&list, &pos, mapping.as_deref(), window, series, output.as_deref())
        }
        Command::Monkey { alphabet, space_prob, tokens, seed, output } => {
            let params = MonkeyParams::new(alphabet, space_prob, tokens, seed).map_err(Failure::usage)?;
            cmd_monkey(params, output.as_deref())
        }
        Command::Plot { inputs, svg: _, gnuplot, linear, title, window, no_fit, output } => cmd_plot(PlotArgs {
            inputs: &inputs,
            gnuplot,
            options: PlotOptions { linear, title, ..Default::default() },
            window: window.window()?,
            fit: !no_fit,
            output: output.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rankfreq: error: {}", f.message);
            ExitCode::from(if f.usage { 1 } else { 2 })
        }
    }
}
