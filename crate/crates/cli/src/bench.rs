//! Seeded benchmark over randomly extracted patterns.

use std::io::Write;
use std::time::{Duration, Instant};

use cds_core::{Registry, SearchAlgorithm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

pub const DEFAULT_LENGTHS: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub algos: Vec<String>,
    pub lengths: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    /// Search each pattern once, untimed, before the measured pass.
    pub warmup: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algos: vec![
                "cds:rank=1,k=256".into(),
                "ots:removed=13,q=32".into(),
                "horspool".into(),
            ],
            lengths: DEFAULT_LENGTHS.to_vec(),
            runs: 1000,
            seed: 42,
            warmup: true,
        }
    }
}

/// One CSV row: an algorithm configuration at one pattern length.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algo: String,
    pub params: String,
    pub m: usize,
    pub runs: usize,
    pub pre_ms: f64,
    pub search_ms: f64,
    pub index_bytes: usize,
    pub occ: u64,
    pub verifications: u64,
    pub inspected: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "algo",
    "params",
    "m",
    "runs",
    "pre_ms",
    "search_ms",
    "index_bytes",
    "occ",
    "verifications",
    "inspected",
];

/// Per-search wall time, kept when `--raw` is given.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTiming {
    pub algo: String,
    pub params: String,
    pub m: usize,
    pub run: usize,
    pub search_ms: f64,
}

#[derive(Debug, Default)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub raw: Vec<RawTiming>,
}

/// `runs` patterns of length `m` cut from uniform offsets in `[1, n−m+1]`.
/// The stream depends only on `(seed, m)`.
pub fn extract_patterns(text: &[u8], m: usize, runs: usize, seed: u64) -> Vec<&[u8]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (m as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..runs)
        .map(|_| {
            let start = rng.gen_range(0..=text.len() - m);
            &text[start..start + m]
        })
        .collect()
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn run_bench(
    text: &[u8],
    config: &BenchConfig,
    registry: &Registry,
) -> Result<BenchReport, CliError> {
    if config.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    if let Some(&m) = config.lengths.iter().find(|&&m| m == 0 || m > text.len()) {
        return Err(CliError::Usage(format!(
            "pattern length {m} does not fit a text of {} bytes",
            text.len()
        )));
    }
    let mut algos: Vec<Box<dyn SearchAlgorithm>> = Vec::new();
    for spec in &config.algos {
        algos.extend(
            registry
                .expand(spec)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        );
    }
    if algos.is_empty() {
        return Err(CliError::Usage("no algorithms selected".into()));
    }

    let mut prepared = Vec::with_capacity(algos.len());
    for algo in &algos {
        let start = Instant::now();
        let p = algo.prepare(text)?;
        prepared.push((p, ms(start.elapsed())));
    }

    let mut report = BenchReport::default();
    for &m in &config.lengths {
        let patterns = extract_patterns(text, m, config.runs, config.seed);
        let mut group_occ: Option<(u64, String)> = None;
        for (algo, (searcher, pre_ms)) in algos.iter().zip(&prepared) {
            if config.warmup {
                for x in &patterns {
                    std::hint::black_box(searcher.search(x)?);
                }
            }
            let mut record = BenchRecord {
                algo: algo.name().to_string(),
                params: algo.params(),
                m,
                runs: config.runs,
                pre_ms: *pre_ms,
                search_ms: 0.0,
                index_bytes: searcher.index_bytes(),
                occ: 0,
                verifications: 0,
                inspected: 0,
            };
            let mut total = Duration::ZERO;
            for (run, x) in patterns.iter().enumerate() {
                let start = Instant::now();
                let out = searcher.search(x)?;
                let took = start.elapsed();
                total += took;
                record.occ += out.matches.len() as u64;
                record.verifications += out.counters.verifications;
                record.inspected += out.counters.text_inspected;
                report.raw.push(RawTiming {
                    algo: record.algo.clone(),
                    params: record.params.clone(),
                    m,
                    run: run + 1,
                    search_ms: ms(took),
                });
            }
            record.search_ms = ms(total) / config.runs as f64;

            let label = format!("{}[{}]", record.algo, record.params);
            match &group_occ {
                None => group_occ = Some((record.occ, label)),
                Some((occ, first)) if *occ != record.occ => {
                    return Err(CliError::Mismatch(format!(
                        "m={m}: {first} found {occ} occurrences, {label} found {}",
                        record.occ
                    )));
                }
                Some(_) => {}
            }
            report.records.push(record);
        }
    }
    Ok(report)
}

pub fn write_records<W: Write>(records: &[BenchRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.algo.clone(),
            r.params.clone(),
            r.m.to_string(),
            r.runs.to_string(),
            format!("{:.4}", r.pre_ms),
            format!("{:.6}", r.search_ms),
            r.index_bytes.to_string(),
            r.occ.to_string(),
            r.verifications.to_string(),
            r.inspected.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw<W: Write>(raw: &[RawTiming], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algo", "params", "m", "run", "search_ms"])?;
    for r in raw {
        w.write_record([
            r.algo.clone(),
            r.params.clone(),
            r.m.to_string(),
            r.run.to_string(),
            format!("{:.6}", r.search_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}
