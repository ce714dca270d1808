//! The `cds` command: build indexes, search them, benchmark strategies and
//! print character-distance statistics.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use cds_core::{
    build_cds_index, build_ots_index, distance_stats, load_index_file, matcher_by_name,
    naive_search, save_index_file, AnyIndex, Corpus, Matcher, PivotChoice, PivotSet, Registry,
    SearchOutcome,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod bench;

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cds_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(cds_core::Error::Parameter(_)) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cds",
    version,
    about = "Exact string matching over a characters-distance sampled text"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and save an index for a text
    Index(IndexArgs),
    /// Search a pattern with a saved index
    Search(SearchArgs),
    /// Time strategies on patterns cut from the text
    Bench(BenchArgs),
    /// Print per-rank character distance statistics as CSV
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexKind {
    Cds,
    Ots,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub text: PathBuf,
    #[arg(long, value_enum, default_value = "cds")]
    pub algo: IndexKind,
    /// Pivot byte by 1-based frequency rank
    #[arg(long, default_value_t = 1, conflicts_with = "pivots")]
    pub rank: usize,
    /// Explicit pivot bytes, e.g. "ae"
    #[arg(long)]
    pub pivots: Option<String>,
    /// Block size, 1..=256
    #[arg(long, default_value_t = 256)]
    pub k: u32,
    /// OTS: number of most frequent bytes left out of the sample
    #[arg(long, default_value_t = 13)]
    pub removed: usize,
    /// OTS: sampling interval of the position map
    #[arg(long, default_value_t = 32)]
    pub q: u32,
    /// Defaults to the text path plus `.cdsi` or `.otsi`
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub text: PathBuf,
    #[arg(long)]
    pub pattern: String,
    /// horspool, kmp or naive
    #[arg(long, default_value = "horspool")]
    pub matcher: String,
    /// Cross-check the result with a brute-force scan
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub text: PathBuf,
    /// Strategy specs such as `cds:rank=1..20,k=256` or `ots:removed=2..20:2,q=8|16|32`
    #[arg(long, num_args = 1.., default_values_t = bench::BenchConfig::default().algos)]
    pub algos: Vec<String>,
    /// Pattern lengths
    #[arg(long, value_delimiter = ',', default_values_t = bench::DEFAULT_LENGTHS)]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every single search time to this CSV file
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[arg(long)]
    pub no_warmup: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub text: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub max_rank: usize,
    /// Gap bound reported on the trailing line
    #[arg(long, default_value_t = 256)]
    pub k: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render();
            let _ = if e.use_stderr() {
                write!(err, "{}", text.ansi())
            } else {
                write!(out, "{}", text.ansi())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Index(a) => cmd_index(&a, out, err),
        Command::Search(a) => cmd_search(&a, out, err),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Stats(a) => cmd_stats(&a, out),
    }
}

fn default_output(text: &Path, ext: &str) -> PathBuf {
    let mut name = text.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

pub fn cmd_index(
    args: &IndexArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let corpus = Corpus::load(&args.text)?;
    let text = corpus.bytes();
    let start = Instant::now();
    let (index, ext) = match args.algo {
        IndexKind::Cds => {
            let choice = match &args.pivots {
                Some(p) => PivotChoice::Explicit(PivotSet::new(p.bytes())?),
                None => PivotChoice::Rank(args.rank),
            };
            (
                AnyIndex::Cds(build_cds_index(text, choice, args.k)?),
                "cdsi",
            )
        }
        IndexKind::Ots => (
            AnyIndex::Ots(build_ots_index(text, args.removed, args.q)?),
            "otsi",
        ),
    };
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| default_output(&args.text, ext));
    let bytes = save_index_file(&index, &path)?;

    writeln!(out, "index={}", path.display())?;
    writeln!(out, "n={}", text.len())?;
    match &index {
        AnyIndex::Cds(i) => {
            let pivots: Vec<String> = i.pivots().iter().map(|b| b.to_string()).collect();
            writeln!(out, "pivots={}", pivots.join(","))?;
            writeln!(out, "n_c={}", i.n_c())?;
            writeln!(out, "k={}", i.k())?;
            writeln!(out, "fast_path_ok={}", i.fast_path_ok())?;
            if !i.fast_path_ok() {
                writeln!(
                    err,
                    "warning: some pivot gaps reach k={}; searches rebuild distances through the block map",
                    i.k()
                )?;
            }
        }
        AnyIndex::Ots(i) => {
            writeln!(out, "n_hat={}", i.n_hat())?;
            writeln!(out, "q={}", i.q())?;
            writeln!(out, "sampled_alphabet={}", i.sampled_alphabet().len())?;
        }
    }
    writeln!(out, "bytes={bytes}")?;
    writeln!(out, "build_ms={build_ms:.3}")?;
    Ok(())
}

fn lookup_matcher(name: &str) -> Result<&'static dyn Matcher, CliError> {
    matcher_by_name(name).ok_or_else(|| CliError::Usage(format!("unknown matcher {name:?}")))
}

pub fn cmd_search(
    args: &SearchArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let matcher = lookup_matcher(&args.matcher)?;
    let pattern = args.pattern.as_bytes();
    if pattern.is_empty() {
        return Err(CliError::Usage("pattern must not be empty".into()));
    }
    let index = load_index_file(&args.index)?;
    let corpus = Corpus::load(&args.text)?;
    let text = corpus.bytes();
    let mut outcome: SearchOutcome = match &index {
        AnyIndex::Cds(i) => i.attach(text)?.search(pattern, matcher)?,
        AnyIndex::Ots(i) => i.search_with(pattern, text, matcher)?,
    };
    if args.inject_fault {
        outcome.matches.pop();
    }

    let mut w = BufWriter::new(out);
    for p in &outcome.matches {
        writeln!(w, "{p}")?;
    }
    writeln!(
        w,
        "matches={} verifications={} inspected={}",
        outcome.matches.len(),
        outcome.counters.verifications,
        outcome.counters.text_inspected
    )?;
    w.flush()?;

    if args.oracle {
        let expected = naive_search(pattern, text);
        if expected != outcome.matches {
            return Err(CliError::Mismatch(format!(
                "oracle disagrees: {} expected occurrences, {} reported",
                expected.len(),
                outcome.matches.len()
            )));
        }
        writeln!(err, "oracle: ok")?;
    }
    Ok(())
}

fn open_output<'a>(
    path: Option<&Path>,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            cds_core::Error::Io {
                path: p.to_path_buf(),
                source,
            }
        })?)),
        None => Box::new(stdout),
    })
}

pub fn cmd_bench(
    args: &BenchArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let corpus = Corpus::load(&args.text)?;
    let config = bench::BenchConfig {
        algos: args.algos.clone(),
        lengths: args.m.clone(),
        runs: args.runs,
        seed: args.seed,
        warmup: !args.no_warmup,
    };
    let report = bench::run_bench(corpus.bytes(), &config, &Registry::with_builtins())?;
    bench::write_records(&report.records, open_output(args.out.as_deref(), out)?)?;
    if let Some(raw) = &args.raw {
        let sink = File::create(raw).map_err(|source| cds_core::Error::Io {
            path: raw.clone(),
            source,
        })?;
        bench::write_raw(&report.raw, BufWriter::new(sink))?;
    }
    writeln!(err, "{} rows, seed {}", report.records.len(), args.seed)?;
    Ok(())
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let corpus = Corpus::load(&args.text)?;
    let stats = distance_stats(corpus.bytes(), args.max_rank);
    let mut w = open_output(args.out.as_deref(), out)?;
    stats.write_csv(&mut w)?;
    writeln!(w, "# bound={}", args.k)?;
    w.flush()?;
    Ok(())
}
