use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use vvcode::analysis::{self, CodeMetrics, ScalingOptions};
use vvcode::codebook::{Assignment, CodeBook};
use vvcode::codec::{self, Decoded, Decoder, Encoder};
use vvcode::diophantine::best_approx_denominators;
use vvcode::file::{load_json, save_json};
use vvcode::source::{Alphabet, SourceModel, Word};
use vvcode::vf::{construct_block, construct_vf, find_block_parameters};
use vvcode::vv::{construct_vv, Choice, VvParams};
use vvcode::word_sets::Grade;
use vvcode::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_IO: u8 = 4;

/// Construct, analyse and run variable-length codes for memoryless sources.
#[derive(Parser)]
#[command(name = "vvcode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a variable-to-variable code.
    ConstructVv(ConstructVv),
    /// Build a code with fixed-length output words.
    ConstructVf(ConstructVf),
    /// Build an equiprobable block code.
    ConstructBlock(ConstructBlock),
    /// Report delay, redundancy and bounds of a code file.
    Analyze(Analyze),
    /// Encode a symbol file into digit text.
    Encode(Encode),
    /// Decode digit text back into symbols.
    Decode(Decode),
    /// Run an experiment.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Args)]
struct SourceArgs {
    /// Comma-separated probabilities, as decimals or ratios like 1/3.
    #[arg(long, value_delimiter = ',', required = true)]
    probs: Vec<String>,
    /// Output alphabet size.
    #[arg(long, default_value_t = 2)]
    arity: u32,
    /// Input glyphs, one character per symbol (default a, b, c, ...).
    #[arg(long)]
    alphabet: Option<String>,
}

impl SourceArgs {
    fn model(&self) -> Result<(SourceModel, Alphabet)> {
        let model = SourceModel::parse(&self.probs, self.arity)?;
        let alphabet = match &self.alphabet {
            Some(g) => Alphabet::from_glyphs(g.chars().collect())?,
            None => Alphabet::letters(model.alphabet_size()),
        };
        if alphabet.len() != model.alphabet_size() {
            return Err(Error::Input(format!(
                "{} glyphs for {} probabilities",
                alphabet.len(),
                model.alphabet_size()
            ))
            .into());
        }
        Ok((model, alphabet))
    }
}

#[derive(Args)]
struct ConstructVv {
    #[command(flatten)]
    source: SourceArgs,
    /// Denominator T, or "auto".
    #[arg(long = "T", default_value = "auto")]
    t: String,
    /// Cap T2 on word length, or "auto".
    #[arg(long, default_value = "auto")]
    cap: String,
    /// Codeword assignment: huffman or canonical.
    #[arg(long, default_value = "huffman")]
    assign: String,
    /// Explicit first word set (comma-separated words).
    #[arg(long, value_delimiter = ',', requires = "m2")]
    m1: Option<Vec<String>>,
    /// Explicit second word set.
    #[arg(long, value_delimiter = ',', requires = "m1")]
    m2: Option<Vec<String>>,
    /// Output file (default: standard output).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructVf {
    #[command(flatten)]
    source: SourceArgs,
    /// Output word length.
    #[arg(long = "L")]
    l: u32,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructBlock {
    /// Input alphabet size.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    arity: u32,
    /// Input block length.
    #[arg(long = "X", conflicts_with = "index")]
    x: Option<u32>,
    /// Output block length (default: the smallest that fits).
    #[arg(long = "L", requires = "x")]
    l: Option<u32>,
    /// Use the k-th valid (X, L) pair, counting from 1.
    #[arg(long)]
    index: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Analyze {
    /// Code file.
    path: PathBuf,
    /// Print a JSON report.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Encode {
    /// Code file.
    #[arg(long)]
    code: PathBuf,
    /// Input file (default: standard input).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Fail instead of padding an unfinished last word.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct Decode {
    #[arg(long)]
    code: PathBuf,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Fail on undecodable digits instead of writing `?`.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Experiment {
    /// Redundancy against average delay over successive denominators.
    Scaling(Scaling),
    /// Damage caused by a single corrupted output digit.
    Sync(Sync),
}

#[derive(Args)]
struct Scaling {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of denominators to try.
    #[arg(long, default_value_t = 4)]
    count: usize,
    /// Skip denominators above this value.
    #[arg(long, default_value_t = 1000)]
    max_t: u64,
    /// Cap T2, or "auto".
    #[arg(long, default_value = "auto")]
    cap: String,
    /// CSV output file (default: standard output).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct Sync {
    #[arg(long)]
    code: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Message length in input symbols.
    #[arg(long, default_value_t = 10_000)]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON output file (default: standard output).
    #[arg(long = "out")]
    output: Option<PathBuf>,
    /// Include per-trial records.
    #[arg(long)]
    details: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Input(_) => EXIT_USAGE,
                Error::Format(_) => EXIT_IO,
                _ => EXIT_INFEASIBLE,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return EXIT_IO;
        }
        if cause.downcast_ref::<Infeasible>().is_some() {
            return EXIT_INFEASIBLE;
        }
    }
    EXIT_USAGE
}

/// A construction that succeeded but cannot be written as a code file.
#[derive(Debug)]
struct Infeasible(String);

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Infeasible {}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ConstructVv(a) => construct_vv_cmd(a),
        Command::ConstructVf(a) => {
            let (model, alphabet) = a.source.model()?;
            let book = with_alphabet(construct_vf(&model, a.l)?, alphabet)?;
            write_book(&book, a.output.as_deref())
        }
        Command::ConstructBlock(a) => construct_block_cmd(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Encode(a) => encode_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Experiment(Experiment::Scaling(a)) => scaling_cmd(a),
        Command::Experiment(Experiment::Sync(a)) => sync_cmd(a),
    }
}

fn with_alphabet(book: CodeBook, alphabet: Alphabet) -> Result<CodeBook> {
    if book.alphabet() == &alphabet {
        return Ok(book);
    }
    let pairs = book
        .entries()
        .ok_or_else(|| anyhow!("code has no explicit words"))?
        .iter()
        .map(|e| (e.word.clone(), e.codeword.clone()))
        .collect();
    Ok(CodeBook::from_words(
        book.model().clone(),
        alphabet,
        book.kind(),
        pairs,
        book.provenance().clone(),
    )?)
}

fn construct_vv_cmd(a: ConstructVv) -> Result<()> {
    let (model, alphabet) = a.source.model()?;
    let parse_words = |list: &[String]| -> Result<Vec<Word>> {
        list.iter()
            .map(|w| Ok(alphabet.parse_word(w.trim())?))
            .collect()
    };
    let explicit = match (&a.m1, &a.m2) {
        (Some(m1), Some(m2)) => Some((parse_words(m1)?, parse_words(m2)?)),
        _ => None,
    };
    let params = VvParams {
        t: Choice::parse(&a.t)?,
        t2: Choice::parse(&a.cap)?,
        assignment: Assignment::parse(&a.assign)?,
        explicit,
        ..VvParams::default()
    };
    let code = construct_vv(&model, &params)?;
    if code.book.grade() == Grade::Metrics {
        let m = analysis::metrics(&code.book)?;
        let p = code.book.provenance();
        return Err(Infeasible(format!(
            "T={} T2={} gives too many words to list (metrics only: N̄={:.6} R={:.6e}); \
             choose a smaller T or cap",
            p.t.unwrap_or(0),
            p.t2.unwrap_or(0),
            m.avg_delay,
            m.redundancy
        ))
        .into());
    }
    let book = with_alphabet(code.book, alphabet)?;
    write_book(&book, a.output.as_deref())
}

fn construct_block_cmd(a: ConstructBlock) -> Result<()> {
    let (x, l) = match (a.x, a.index) {
        (Some(x), None) => {
            let l = match a.l {
                Some(l) => l,
                None => {
                    // smallest L with n^L ≥ m^X
                    let need = (a.m as f64).ln() * x as f64 / (a.arity as f64).ln();
                    let mut l = need.floor().max(1.0) as u32;
                    while (a.arity as f64).powi(l as i32) < (a.m as f64).powi(x as i32) {
                        l += 1;
                    }
                    l
                }
            };
            (x, l)
        }
        (None, Some(k)) => {
            if k == 0 {
                bail!(Error::Input("--index counts from 1".into()));
            }
            let pairs = find_block_parameters(a.m, a.arity, k)?;
            let p = pairs
                .get(k - 1)
                .ok_or_else(|| Error::Infeasible(format!("fewer than {k} valid pairs found")))?;
            (p.x as u32, p.l as u32)
        }
        _ => bail!(Error::Input("give either --X or --index".into())),
    };
    let book = construct_block(a.m, a.arity, x, l)?;
    write_book(&book, a.output.as_deref())
}

fn write_book(book: &CodeBook, path: Option<&Path>) -> Result<()> {
    let text = save_json(book)?;
    write_text(path, &text)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_text(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn load_book(path: &Path) -> Result<CodeBook> {
    let text = read_text(Some(path))?;
    load_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn metrics_json(book: &CodeBook, m: &CodeMetrics) -> serde_json::Value {
    json!({
        "arity": book.arity(),
        "avg_code_length": m.avg_code_length,
        "avg_delay": m.avg_delay,
        "corollary_lower": m.corollary_lower,
        "corollary_reading": "squared distance of log_n p to the nearest integer",
        "delta": m.delta,
        "entropy": m.entropy,
        "entropy_residual": m.entropy_residual,
        "grade": book.grade().as_str(),
        "identity_residual": m.identity_residual,
        "kind": book.kind().as_str(),
        "kraft_sum": book.kraft_exact().map(|k| k.to_string()),
        "max_abs_eps": m.max_abs_eps,
        "max_delay": m.max_delay,
        "redundancy": m.redundancy,
        "theorem1_lower": m.theorem1_lower,
        "theorem1_upper": m.theorem1_upper,
        "words": book.entries().map(|e| e.len()),
    })
}

fn analyze_cmd(a: Analyze) -> Result<()> {
    let book = load_book(&a.path)?;
    let m = analysis::metrics(&book)?;
    let text = if a.json {
        let mut s = serde_json::to_string_pretty(&metrics_json(&book, &m))?;
        s.push('\n');
        s
    } else {
        let upper = m
            .theorem1_upper
            .map_or("n/a".to_string(), |u| format!("{u:.6}"));
        let kraft = book
            .kraft_exact()
            .map_or_else(|| format!("{:.6}", book.kraft_sum()), |k| k.to_string());
        format!(
            "kind={} grade={} words={}\n\
             N̄={:.6}\nN={}\nR={:.6}\nH={:.6}\nkraft={}\ndelta={:.6}\n\
             theorem1_lower={:.6}\ntheorem1_upper={}\ncorollary_lower={:.6}\n\
             identity_residual={:.3e}\n",
            book.kind().as_str(),
            book.grade().as_str(),
            book.entries().map_or(0, |e| e.len()),
            m.avg_delay,
            m.max_delay,
            m.redundancy,
            m.entropy,
            kraft,
            m.delta,
            m.theorem1_lower,
            upper,
            m.corollary_lower,
            m.identity_residual,
        )
    };
    write_text(None, &text)
}

fn encode_cmd(a: Encode) -> Result<()> {
    let book = load_book(&a.code)?;
    let input = read_text(a.input.as_deref())?;
    let alphabet = book.alphabet();
    let mut enc = Encoder::new(&book)?;
    let mut digits = Vec::new();
    for c in input.chars().filter(|c| !c.is_whitespace()) {
        let s = alphabet
            .index_of(c)
            .ok_or_else(|| Error::Input(format!("glyph {c:?} not in the code's alphabet")))?;
        enc.push(s, &mut digits)?;
    }
    let pad = enc.finish(a.strict, &mut digits)?;
    let text = codec::render_stream(&codec::Encoded { digits, pad });
    write_text(a.output.as_deref(), &text)
}

fn decode_cmd(a: Decode) -> Result<()> {
    let book = load_book(&a.code)?;
    let input = read_text(a.input.as_deref())?;
    let stream = codec::parse_stream(&input, book.arity())?;
    let entries = book.entries().ok_or_else(|| anyhow!("code has no explicit words"))?;
    let alphabet = book.alphabet();
    let mut dec = Decoder::new(&book, a.strict)?;
    let mut out: Vec<char> = Vec::new();
    for &d in &stream.digits {
        match dec.push(d)? {
            Some(Decoded::Word(i)) => out.extend(alphabet.render(&entries[i].word).chars()),
            Some(Decoded::Erasure) => out.push('?'),
            None => {}
        }
    }
    if a.strict {
        dec.finish()?;
    } else if !dec.pending().is_empty() {
        out.push('?');
    }
    if stream.pad > out.len() {
        bail!(Error::Decode(format!("pad {} exceeds decoded length", stream.pad)));
    }
    out.truncate(out.len() - stream.pad);
    let text: String = out.into_iter().collect();
    write_text(a.output.as_deref(), &text)
}

fn scaling_cmd(a: Scaling) -> Result<()> {
    let (model, _) = a.source.model()?;
    let (candidates, rational) = vvcode::vv::candidate_denominators(&model, a.max_t.max(2))?;
    let list: Vec<u64> = if rational {
        candidates
    } else {
        let d = model.weights().iter().rev().copied().find(|d| {
            best_approx_denominators(*d, 2).is_ok()
        });
        let d = d.ok_or_else(|| Error::Input("no irrational log-weight".into()))?;
        best_approx_denominators(d, u32::MAX as u64)?.usable()
    };
    let mut t_list: Vec<u64> = list.iter().copied().take(a.count).collect();
    let skipped: Vec<u64> = t_list.iter().copied().filter(|&t| t > a.max_t).collect();
    t_list.retain(|&t| t <= a.max_t);
    let opts = ScalingOptions {
        t2: Choice::parse(&a.cap)?,
        ..ScalingOptions::default()
    };
    let report = analysis::scaling_experiment(&model, &t_list, &opts);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(analysis::ScalingReport::CSV_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.t.to_string(),
            r.t2.to_string(),
            format!("{:.12e}", r.avg_delay),
            r.max_delay.to_string(),
            format!("{:.12e}", r.redundancy),
            format!("{:.12e}", r.r_times_nbar_5_3),
            format!("{:.12e}", r.r_times_nbar),
        ])?;
    }
    let csv_text = String::from_utf8(w.into_inner()?)?;
    match &a.csv {
        Some(p) => {
            write_text(Some(p), &csv_text)?;
            let slope = report
                .slope
                .map_or("n/a".to_string(), |s| format!("{s:.6}"));
            println!("rows={} slope={slope}", report.rows.len());
        }
        None => write_text(None, &csv_text)?,
    }
    for (t, msg) in &report.failures {
        eprintln!("T={t}: {msg}");
    }
    for t in skipped {
        eprintln!("T={t}: skipped (above --max-t {})", a.max_t);
    }
    Ok(())
}

fn sync_cmd(a: Sync) -> Result<()> {
    let book = load_book(&a.code)?;
    let report = codec::sync_error_experiment(&book, a.len, a.trials, a.seed)?;
    let mut value = json!({
        "kind": report.kind.as_str(),
        "max_affected_words": report.max_affected_words,
        "mean_affected_words": report.mean_affected_words,
        "message_len": report.message_len,
        "multi_word_fraction": report.multi_word_fraction,
        "seed": a.seed,
        "trials": report.trials.len(),
    });
    if a.details {
        value["records"] = report
            .trials
            .iter()
            .map(|t| {
                json!({
                    "affected_words": t.affected_words,
                    "decode_failed": t.decode_failed,
                    "position": t.position,
                    "resync_offset": t.resync_offset,
                })
            })
            .collect();
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_text(a.output.as_deref(), &text)
}
