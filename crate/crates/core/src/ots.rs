//! Occurrence text sampling baseline.
//!
//! The most frequent bytes are dropped from the alphabet; the text restricted
//! to the remaining bytes (the sampled text) is searched for the pattern
//! restricted the same way. Every `q`-th sampled symbol keeps its original
//! text position in `ρ`, and each hit is verified in the stretch of text
//! bracketed by the two surrounding `ρ` anchors.

use std::fmt;

use crate::cds_search::{check_fingerprint, verify, Counters, SearchOutcome};
use crate::corpus::rank_characters;
use crate::error::{Error, Result};
use crate::matchers::{Matcher, ReadLog, HORSPOOL};
use crate::Fingerprint;

#[derive(Clone, PartialEq, Eq)]
pub struct OtsIndex {
    sampled: [bool; 256],
    sampled_text: Vec<u8>,
    // rho[i - 1] = text position of sampled_text[q·i], for i ≥ 1; ρ[0] = 0
    rho: Vec<u64>,
    q: u32,
    n: usize,
    fingerprint: Fingerprint,
}

impl fmt::Debug for OtsIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OtsIndex")
            .field("q", &self.q)
            .field("n", &self.n)
            .field("n_hat", &self.sampled_text.len())
            .field("alphabet", &self.sampled_alphabet().len())
            .finish()
    }
}

/// Builds the index with the `removed_count` most frequent bytes left out.
pub fn build_ots_index(text: &[u8], removed_count: usize, q: u32) -> Result<OtsIndex> {
    let ranking = rank_characters(text);
    if removed_count >= ranking.alphabet_size() && ranking.alphabet_size() > 0 {
        return Err(Error::param(format!(
            "cannot remove {removed_count} of {} symbols",
            ranking.alphabet_size()
        )));
    }
    let mut sampled = [false; 256];
    for &b in ranking.order().iter().skip(removed_count) {
        sampled[b as usize] = true;
    }
    build_ots_index_with(text, sampled, q)
}

/// Builds the index for an explicit sampled alphabet.
pub fn build_ots_index_with(text: &[u8], sampled: [bool; 256], q: u32) -> Result<OtsIndex> {
    if q == 0 {
        return Err(Error::param("interval factor q must be at least 1"));
    }
    let q_usize = q as usize;
    let mut sampled_text = Vec::new();
    let mut rho = Vec::new();
    for (pos, &b) in text.iter().enumerate() {
        if sampled[b as usize] {
            sampled_text.push(b);
            if sampled_text.len() % q_usize == 0 {
                rho.push(pos as u64 + 1);
            }
        }
    }
    Ok(OtsIndex {
        sampled,
        sampled_text,
        rho,
        q,
        n: text.len(),
        fingerprint: Fingerprint::of(text),
    })
}

impl OtsIndex {
    pub(crate) fn from_parts(
        sampled: [bool; 256],
        sampled_text: Vec<u8>,
        rho: Vec<u64>,
        q: u32,
        fingerprint: Fingerprint,
    ) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("interval factor q must be at least 1"));
        }
        let n = fingerprint.len as usize;
        if sampled_text.len() > n {
            return Err(Error::param("sampled text longer than the text"));
        }
        if let Some(b) = sampled_text.iter().find(|&&b| !sampled[b as usize]) {
            return Err(Error::param(format!(
                "sampled text holds unsampled byte {b}"
            )));
        }
        if rho.len() != sampled_text.len() / q as usize {
            return Err(Error::param("position map has the wrong length"));
        }
        let mut prev = 0u64;
        for (i, &p) in rho.iter().enumerate() {
            let rank = (i as u64 + 1) * q as u64;
            // the rank-th sampled byte sits at least `rank` positions in
            if p <= prev || p > n as u64 || p < rank {
                return Err(Error::param(format!(
                    "position map entry {} is inconsistent",
                    i + 1
                )));
            }
            prev = p;
        }
        Ok(OtsIndex {
            sampled,
            sampled_text,
            rho,
            q,
            n,
            fingerprint,
        })
    }

    pub fn sampled_alphabet(&self) -> Vec<u8> {
        (0..=255u8).filter(|&b| self.sampled[b as usize]).collect()
    }

    pub(crate) fn sampled_bitmap(&self) -> &[bool; 256] {
        &self.sampled
    }

    #[inline]
    pub fn is_sampled(&self, b: u8) -> bool {
        self.sampled[b as usize]
    }

    /// `ŷ`.
    pub fn sampled_text(&self) -> &[u8] {
        &self.sampled_text
    }

    /// `ρ[1..]`; `ρ[0] = 0` is implicit.
    pub fn rho(&self) -> &[u64] {
        &self.rho
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_hat(&self) -> usize {
        self.sampled_text.len()
    }

    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }

    pub fn stored_size(&self) -> usize {
        crate::index_io::ots_file_size(self)
    }

    /// Checks the text, then searches with Horspool.
    pub fn search(&self, x: &[u8], y: &[u8]) -> Result<SearchOutcome> {
        self.search_with(x, y, &HORSPOOL)
    }

    pub fn search_with(&self, x: &[u8], y: &[u8], matcher: &dyn Matcher) -> Result<SearchOutcome> {
        check_fingerprint(self.fingerprint, y)?;
        if x.is_empty() {
            return Err(Error::param("empty pattern"));
        }
        self.search_unchecked(x, y, matcher)
    }

    /// Searches without hashing `y`; the caller vouches for the text.
    pub fn search_unchecked(
        &self,
        x: &[u8],
        y: &[u8],
        matcher: &dyn Matcher,
    ) -> Result<SearchOutcome> {
        Ok(self.run(x, y, matcher, None))
    }

    /// Hit positions of `x̂` in `ŷ`, for inspection.
    pub fn sampled_hits(&self, x: &[u8]) -> Vec<usize> {
        let x_hat: Vec<u8> = x.iter().copied().filter(|&b| self.is_sampled(b)).collect();
        let mut hits = Vec::new();
        HORSPOOL
            .prepare(&x_hat)
            .find_into(&self.sampled_text, 0, &mut hits, &mut ReadLog::new());
        hits
    }

    /// Candidate text starts for a hit of `x̂` at 1-based sampled position
    /// `r`, when `x[α]` is the pattern's first sampled byte.
    pub fn window(&self, r: usize, alpha: usize, m: usize) -> Option<(usize, usize)> {
        let q = self.q as usize;
        let n_hat = self.sampled_text.len();
        let a = r / q;
        let low_anchor = if a == 0 { 0 } else { self.rho[a - 1] as usize };
        // ŷ[r] lies at least (r − a·q) bytes after ρ[a]
        let first = low_anchor + (r - a * q);
        let last = if a > 0 && r == a * q {
            // ŷ[r] is itself mapped
            first
        } else {
            match self.rho.get(a) {
                Some(&hi) => hi as usize - ((a + 1) * q - r),
                None => self.n - (n_hat - r),
            }
        };
        let lo = (first + 1).saturating_sub(alpha).max(1);
        let hi = (last + 1)
            .checked_sub(alpha)?
            .min((self.n + 1).checked_sub(m)?);
        (lo <= hi).then_some((lo, hi))
    }

    fn run(&self, x: &[u8], y: &[u8], matcher: &dyn Matcher, _trace: Option<()>) -> SearchOutcome {
        let mut counters = Counters::default();
        let mut log = ReadLog::new();
        let mut matches = Vec::new();
        let m = x.len();
        if m == 0 || m > y.len() {
            return SearchOutcome::default();
        }
        let alpha = x.iter().position(|&b| self.is_sampled(b)).map(|i| i + 1);
        let Some(alpha) = alpha else {
            // nothing to filter with: plain online search
            counters.candidates = 1;
            matcher.prepare(x).find_into(y, 0, &mut matches, &mut log);
            counters.text_inspected = log.symbols;
            return SearchOutcome {
                matches,
                counters,
                trace: None,
            };
        };
        let x_hat: Vec<u8> = x.iter().copied().filter(|&b| self.is_sampled(b)).collect();
        let mut sampled_log = ReadLog::new();
        let mut hits = Vec::new();
        matcher
            .prepare(&x_hat)
            .find_into(&self.sampled_text, 0, &mut hits, &mut sampled_log);
        counters.sampled_inspected = sampled_log.symbols;

        for &r in &hits {
            let Some((lo, hi)) = self.window(r, alpha, m) else {
                continue;
            };
            counters.candidates += 1;
            counters.sampled_inspected += 2;
            for p in lo..=hi {
                counters.verifications += 1;
                if verify(x, y, p as isize - 1, &mut log) {
                    matches.push(p);
                }
            }
        }
        matches.sort_unstable();
        matches.dedup();
        counters.text_inspected = log.symbols;
        SearchOutcome {
            matches,
            counters,
            trace: None,
        }
    }
}

/// Checks the fingerprint, then searches with Horspool.
pub fn ots_search(x: &[u8], index: &OtsIndex, y: &[u8]) -> Result<SearchOutcome> {
    if x.is_empty() {
        return Err(Error::param("empty pattern"));
    }
    index.search(x, y)
}
