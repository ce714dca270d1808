//! Text ingestion and the character statistics used to pick a pivot.
//!
//! The alphabet is the set of byte values present in the text. Ranks are
//! 1-based: rank 1 is the most frequent byte, ties go to the smaller byte.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An immutable text held in memory as raw bytes.
#[derive(Clone, PartialEq, Eq)]
pub struct Corpus {
    bytes: Vec<u8>,
    source: String,
}

impl Corpus {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Corpus {
            bytes: bytes.into(),
            source: "inline".to_string(),
        }
    }

    /// Reads a file verbatim. No transcoding or newline normalization.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Corpus {
            bytes,
            source: path.display().to_string(),
        })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// File path, or `"inline"` for in-memory texts.
    pub fn source(&self) -> &str {
        &self.source
    }
}

impl AsRef<[u8]> for Corpus {
    fn as_ref(&self) -> &[u8] {
        &self.bytes
    }
}

impl fmt::Debug for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Corpus")
            .field("n", &self.bytes.len())
            .field("source", &self.source)
            .finish()
    }
}

/// Byte frequencies and the rank order derived from them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyRanking {
    counts: [u64; 256],
    order: Vec<u8>,
}

impl FrequencyRanking {
    pub fn count(&self, byte: u8) -> u64 {
        self.counts[byte as usize]
    }

    /// Present bytes, most frequent first.
    pub fn order(&self) -> &[u8] {
        &self.order
    }

    /// Number of distinct bytes in the text (σ).
    pub fn alphabet_size(&self) -> usize {
        self.order.len()
    }

    /// Byte at the given 1-based rank, if the alphabet is that large.
    pub fn byte_at_rank(&self, rank: usize) -> Option<u8> {
        rank.checked_sub(1).and_then(|r| self.order.get(r).copied())
    }

    pub fn rank_of(&self, byte: u8) -> Option<usize> {
        self.order.iter().position(|&b| b == byte).map(|r| r + 1)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn rank_characters(text: &[u8]) -> FrequencyRanking {
    let mut counts = [0u64; 256];
    for &b in text {
        counts[b as usize] += 1;
    }
    let mut order: Vec<u8> = (0..=255u8).filter(|&b| counts[b as usize] > 0).collect();
    // stable sort keeps ascending byte order among equal counts
    order.sort_by(|a, b| counts[*b as usize].cmp(&counts[*a as usize]));
    FrequencyRanking { counts, order }
}

/// Gap statistics for one pivot byte.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRecord {
    pub rank: usize,
    pub pivot: u8,
    pub count: u64,
    pub max_gap: u64,
    pub avg_gap: f64,
    /// Sum of all gaps; equals last minus first occurrence.
    pub gap_sum: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistanceStats {
    pub records: Vec<DistanceRecord>,
}

impl DistanceStats {
    pub fn get(&self, rank: usize) -> Option<&DistanceRecord> {
        rank.checked_sub(1).and_then(|r| self.records.get(r))
    }

    /// Writes `rank,byte,count,max_gap,avg_gap`, one row per rank.
    /// The byte column holds the decimal byte value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "rank,byte,count,max_gap,avg_gap")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{:.2}",
                r.rank, r.pivot, r.count, r.max_gap, r.avg_gap
            )?;
        }
        Ok(())
    }
}

/// Max and mean distance between consecutive occurrences for ranks
/// `1..=min(max_rank, σ)`. Gaps are measured between real occurrences only.
pub fn distance_stats(text: &[u8], max_rank: usize) -> DistanceStats {
    let ranking = rank_characters(text);
    let take = max_rank.min(ranking.alphabet_size());
    let pivots = &ranking.order()[..take];

    // slot per tracked byte; 0 = not tracked
    let mut slot = [0usize; 256];
    for (i, &b) in pivots.iter().enumerate() {
        slot[b as usize] = i + 1;
    }
    let mut last: Vec<Option<usize>> = vec![None; take];
    let mut max_gap = vec![0u64; take];
    let mut gap_sum = vec![0u64; take];

    for (pos, &b) in text.iter().enumerate() {
        let s = slot[b as usize];
        if s == 0 {
            continue;
        }
        let s = s - 1;
        if let Some(prev) = last[s] {
            let gap = (pos - prev) as u64;
            gap_sum[s] += gap;
            max_gap[s] = max_gap[s].max(gap);
        }
        last[s] = Some(pos);
    }

    let records = pivots
        .iter()
        .enumerate()
        .map(|(i, &pivot)| {
            let count = ranking.count(pivot);
            let avg_gap = if count > 1 {
                gap_sum[i] as f64 / (count - 1) as f64
            } else {
                0.0
            };
            DistanceRecord {
                rank: i + 1,
                pivot,
                count,
                max_gap: max_gap[i],
                avg_gap,
                gap_sum: gap_sum[i],
            }
        })
        .collect();
    DistanceStats { records }
}
