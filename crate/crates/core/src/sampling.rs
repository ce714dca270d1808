//! The characters-distance partial index.
//!
//! For the pivot set `C`, let `δ(1) < … < δ(n_c)` be the 1-based text
//! positions of bytes in `C`. The index keeps, per occurrence, the residue
//! `δ(i) mod k` (one byte when `k ≤ 256`) plus a block map `τ` where `τ[b]`
//! counts the occurrences at positions `≤ b·k`. Together they recover every
//! `δ(i)` and the gap sequence `Δ(i) = δ(i+1) − δ(i)`.
//!
//! A residue of 0 means `δ(i)` sits on the last position of its block, so it
//! decodes to `b·k` rather than `(b−1)·k`.

use std::fmt;

use crate::corpus::rank_characters;
use crate::error::{Error, Result};
use crate::Fingerprint;

/// Largest supported block size; residues are stored one byte each.
pub const MAX_BLOCK_SIZE: u32 = 256;
pub const DEFAULT_BLOCK_SIZE: u32 = 256;

/// Non-empty set of pivot bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PivotSet {
    members: [bool; 256],
    len: usize,
}

impl PivotSet {
    pub fn new(bytes: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut members = [false; 256];
        let mut len = 0;
        for b in bytes {
            if !members[b as usize] {
                members[b as usize] = true;
                len += 1;
            }
        }
        if len == 0 {
            return Err(Error::param("pivot set is empty"));
        }
        Ok(PivotSet { members, len })
    }

    pub fn single(byte: u8) -> Self {
        let mut members = [false; 256];
        members[byte as usize] = true;
        PivotSet { members, len: 1 }
    }

    #[inline]
    pub fn contains(&self, byte: u8) -> bool {
        self.members[byte as usize]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Smallest member; used when a single byte must stand for the set.
    pub fn canonical(&self) -> u8 {
        self.iter().next().expect("pivot set is never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |&b| self.members[b as usize])
    }

    pub fn to_vec(&self) -> Vec<u8> {
        self.iter().collect()
    }

    /// Number of pivot bytes in `s`.
    pub fn count_in(&self, s: &[u8]) -> usize {
        s.iter().filter(|&&b| self.contains(b)).count()
    }
}

impl fmt::Debug for PivotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|b| b as char))
            .finish()
    }
}

/// Gaps between consecutive pivot occurrences (ȳ for a text, x̄ for a pattern).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DistanceSample(pub Vec<u32>);

impl DistanceSample {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Distances between consecutive pivot bytes of `s`, and the pivot count.
pub fn compute_distance_sampling(s: &[u8], pivots: &PivotSet) -> (DistanceSample, usize) {
    let mut distances = Vec::new();
    let mut count = 0;
    let mut prev = None;
    for (i, &b) in s.iter().enumerate() {
        if pivots.contains(b) {
            if let Some(p) = prev {
                distances.push((i - p) as u32);
            }
            prev = Some(i);
            count += 1;
        }
    }
    (DistanceSample(distances), count)
}

/// The k-bounded position sample `ẏ` with its block map `τ`.
#[derive(Clone, PartialEq, Eq)]
pub struct PositionSample {
    residues: Vec<u8>,
    tau: Vec<u32>,
    k: u32,
    n: usize,
}

impl fmt::Debug for PositionSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PositionSample")
            .field("k", &self.k)
            .field("n", &self.n)
            .field("n_c", &self.residues.len())
            .field("blocks", &self.tau.len())
            .finish()
    }
}

pub(crate) fn check_block_size(k: u32) -> Result<()> {
    if k == 0 || k > MAX_BLOCK_SIZE {
        return Err(Error::param(format!(
            "block size k must be in 1..={MAX_BLOCK_SIZE}, got {k}"
        )));
    }
    Ok(())
}

pub fn build_position_sampling(text: &[u8], pivots: &PivotSet, k: u32) -> Result<PositionSample> {
    check_block_size(k)?;
    if text.len() > u32::MAX as usize {
        return Err(Error::param("texts longer than 4 GiB are not supported"));
    }
    let kk = k as usize;
    let mut residues = Vec::new();
    let mut tau = Vec::with_capacity(text.len().div_ceil(kk));
    for block in text.chunks(kk) {
        for (j, &b) in block.iter().enumerate() {
            if pivots.contains(b) {
                // position within the text is (block start) + j + 1
                residues.push(((j + 1) % kk) as u8);
            }
        }
        tau.push(residues.len() as u32);
    }
    Ok(PositionSample {
        residues,
        tau,
        k,
        n: text.len(),
    })
}

impl PositionSample {
    /// Assembles a sample from stored parts, checking every invariant.
    pub fn from_parts(residues: Vec<u8>, tau: Vec<u32>, k: u32, n: usize) -> Result<Self> {
        check_block_size(k)?;
        let kk = k as usize;
        if tau.len() != n.div_ceil(kk) {
            return Err(Error::param(format!(
                "block map has {} entries, expected {}",
                tau.len(),
                n.div_ceil(kk)
            )));
        }
        let n_c = residues.len();
        if tau.last().map_or(0, |&t| t as usize) != n_c {
            return Err(Error::param(
                "last block map entry differs from occurrence count",
            ));
        }
        if let Some(r) = residues.iter().find(|&&r| r as u32 >= k) {
            return Err(Error::param(format!("residue {r} is not below k={k}")));
        }
        let mut prev_tau = 0u32;
        let mut prev_pos = 0usize;
        let mut i = 0usize;
        for (b, &t) in tau.iter().enumerate() {
            if t < prev_tau || t as usize > n_c {
                return Err(Error::param(format!(
                    "block map not monotone at block {}",
                    b + 1
                )));
            }
            let block_end = ((b + 1) * kk).min(n);
            while i < t as usize {
                let r = residues[i] as usize;
                let pos = if r == 0 { (b + 1) * kk } else { b * kk + r };
                if pos <= prev_pos || pos > block_end {
                    return Err(Error::param(format!(
                        "occurrence {} decodes to position {pos} outside block {}",
                        i + 1,
                        b + 1
                    )));
                }
                prev_pos = pos;
                i += 1;
            }
            prev_tau = t;
        }
        Ok(PositionSample {
            residues,
            tau,
            k,
            n,
        })
    }

    /// `ẏ`, one residue per pivot occurrence.
    pub fn residues(&self) -> &[u8] {
        &self.residues
    }

    /// `τ`, one cumulative count per k-block.
    pub fn tau(&self) -> &[u32] {
        &self.tau
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_c(&self) -> usize {
        self.residues.len()
    }

    /// Text position `δ(i)` of the `i`-th occurrence, scanning `τ` forward
    /// from the block hint `b`. Both `i` and `b` are 1-based. Returns
    /// `(δ(i), block of δ(i))`, the latter usable as the next hint.
    ///
    /// The hint must not be past the block holding occurrence `i`.
    pub fn get_position(&self, b: usize, i: usize) -> Result<(usize, usize)> {
        if i == 0 || i > self.n_c() {
            return Err(Error::OutOfRange(format!(
                "occurrence {i} not in 1..={}",
                self.n_c()
            )));
        }
        if b == 0 || b > self.tau.len() {
            return Err(Error::OutOfRange(format!(
                "block hint {b} not in 1..={}",
                self.tau.len()
            )));
        }
        if b > 1 && self.tau[b - 2] as usize >= i {
            return Err(Error::OutOfRange(format!(
                "block hint {b} is past occurrence {i}"
            )));
        }
        let mut b = b;
        while (self.tau[b - 1] as usize) < i {
            b += 1;
        }
        Ok((self.decode(b, self.residues[i - 1]), b))
    }

    #[inline]
    fn decode(&self, block: usize, residue: u8) -> usize {
        let k = self.k as usize;
        if residue == 0 {
            block * k
        } else {
            (block - 1) * k + residue as usize
        }
    }

    /// Iterates `δ(1), …, δ(n_c)` with a private block hint.
    pub fn positions(&self) -> Positions<'_> {
        Positions {
            sample: self,
            next: 0,
            block: 1,
            blocks_scanned: 0,
        }
    }

    /// `ȳ` recovered through `τ`; valid for any gap sizes.
    pub fn distances(&self) -> DistanceSample {
        distances_from_sample(self)
    }

    /// Largest gap between consecutive occurrences.
    pub fn max_gap(&self) -> usize {
        let mut max = 0;
        let mut it = self.positions();
        if let Some(mut prev) = it.next() {
            for p in it {
                max = max.max(p - prev);
                prev = p;
            }
        }
        max
    }
}

/// Forward decoder over all pivot positions.
pub struct Positions<'a> {
    sample: &'a PositionSample,
    next: usize,
    block: usize,
    blocks_scanned: usize,
}

impl Positions<'_> {
    /// Block map entries visited so far.
    pub fn blocks_scanned(&self) -> usize {
        self.blocks_scanned
    }
}

impl Iterator for Positions<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        let s = self.sample;
        if self.next >= s.residues.len() {
            return None;
        }
        let i = self.next + 1;
        while (s.tau[self.block - 1] as usize) < i {
            self.block += 1;
            self.blocks_scanned += 1;
        }
        self.next = i;
        Some(s.decode(self.block, s.residues[i - 1]))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.sample.residues.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Positions<'_> {}

/// `ȳ[i−1] = δ(i) − δ(i−1)`, decoding positions through `τ`.
pub fn distances_from_sample(sample: &PositionSample) -> DistanceSample {
    let mut out = Vec::with_capacity(sample.n_c().saturating_sub(1));
    let mut it = sample.positions();
    if let Some(mut prev) = it.next() {
        for p in it {
            out.push((p - prev) as u32);
            prev = p;
        }
    }
    DistanceSample(out)
}

/// `ȳ` from residues alone. Only correct when every gap is below `k`;
/// callers must check [`CdsIndex::fast_path_ok`].
pub fn distances_fast_path(residues: &[u8], k: u32) -> DistanceSample {
    DistanceSample(
        residues
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0] as u32, w[1] as u32);
                if b > a {
                    b - a
                } else {
                    b + k - a
                }
            })
            .collect(),
    )
}

/// `ȳ` read straight from the residues, one gap per access. Only valid
/// when every gap is below `k`.
#[derive(Debug, Clone, Copy)]
pub struct ResidueGaps<'a> {
    residues: &'a [u8],
    k: u32,
}

impl<'a> ResidueGaps<'a> {
    pub fn new(residues: &'a [u8], k: u32) -> Self {
        ResidueGaps { residues, k }
    }
}

impl crate::matchers::Haystack<u32> for ResidueGaps<'_> {
    #[inline]
    fn len(&self) -> usize {
        self.residues.len().saturating_sub(1)
    }

    #[inline]
    fn at(&self, i: usize) -> u32 {
        let a = self.residues[i] as u32;
        let b = self.residues[i + 1] as u32;
        if b > a {
            b - a
        } else {
            b + self.k - a
        }
    }
}

/// Pivot selection for [`build_cds_index`].
#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum PivotChoice {
    /// The byte at this 1-based frequency rank.
    Rank(usize),
    Explicit(PivotSet),
}

/// A position sample bound to the text it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdsIndex {
    sample: PositionSample,
    pivots: PivotSet,
    fast_path_ok: bool,
    fingerprint: Fingerprint,
}

pub fn build_cds_index(text: &[u8], pivot: PivotChoice, k: u32) -> Result<CdsIndex> {
    let pivots = match pivot {
        PivotChoice::Explicit(set) => set,
        PivotChoice::Rank(rank) => {
            let ranking = rank_characters(text);
            let byte = ranking.byte_at_rank(rank).ok_or_else(|| {
                Error::param(format!(
                    "pivot rank {rank} outside 1..={}",
                    ranking.alphabet_size()
                ))
            })?;
            PivotSet::single(byte)
        }
    };
    let sample = build_position_sampling(text, &pivots, k)?;
    let fast_path_ok = sample.max_gap() < k as usize;
    Ok(CdsIndex {
        sample,
        pivots,
        fast_path_ok,
        fingerprint: Fingerprint::of(text),
    })
}

impl CdsIndex {
    /// Reassembles an index from persisted parts.
    pub fn from_parts(
        sample: PositionSample,
        pivots: PivotSet,
        fingerprint: Fingerprint,
    ) -> Result<Self> {
        if fingerprint.len != sample.n() as u64 {
            return Err(Error::param("fingerprint length differs from text length"));
        }
        let fast_path_ok = sample.max_gap() < sample.k() as usize;
        Ok(CdsIndex {
            sample,
            pivots,
            fast_path_ok,
            fingerprint,
        })
    }

    pub fn sample(&self) -> &PositionSample {
        &self.sample
    }

    pub fn pivots(&self) -> &PivotSet {
        &self.pivots
    }

    /// Every gap is below `k`, so `ȳ` can be rebuilt from residues alone.
    pub fn fast_path_ok(&self) -> bool {
        self.fast_path_ok
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn k(&self) -> u32 {
        self.sample.k()
    }

    pub fn n(&self) -> usize {
        self.sample.n()
    }

    pub fn n_c(&self) -> usize {
        self.sample.n_c()
    }

    /// `ȳ`, via the fast path when allowed.
    pub fn text_distances(&self) -> DistanceSample {
        if self.fast_path_ok {
            distances_fast_path(self.sample.residues(), self.sample.k())
        } else {
            distances_from_sample(&self.sample)
        }
    }

    /// Size in bytes of the persisted form.
    pub fn stored_size(&self) -> usize {
        crate::index_io::cds_file_size(self)
    }
}

/// Pivot statistics of a pattern: `x̄`, `m_c` and `α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledPattern {
    pub distances: DistanceSample,
    pub m_c: usize,
    /// 1-based offset of the first pivot in the pattern; `None` if absent.
    pub alpha: Option<usize>,
    pub m: usize,
}

impl SampledPattern {
    pub fn new(pattern: &[u8], pivots: &PivotSet) -> Self {
        let (distances, m_c) = compute_distance_sampling(pattern, pivots);
        let alpha = pattern
            .iter()
            .position(|&b| pivots.contains(b))
            .map(|i| i + 1);
        SampledPattern {
            distances,
            m_c,
            alpha,
            m: pattern.len(),
        }
    }
}
