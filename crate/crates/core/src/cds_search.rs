//! Search over a [`CdsIndex`]: filter with the pivot positions, then verify
//! candidates against the text.
//!
//! The pattern's pivot count `m_c` picks the routine:
//!
//! * `m_c = 0`: run the underlying matcher only inside pivot-free stretches
//!   longer than the pattern.
//! * `m_c = 1`: anchor the pattern's pivot on each text pivot whose
//!   neighbouring gaps leave room for the pattern, and verify.
//! * `m_c ≥ 2`: search the pattern's gap sequence `x̄` in the text's gap
//!   sequence `ȳ`; each hit fixes one alignment to verify.
//!
//! With a worst-case-linear matcher (KMP) the `m_c ≥ 2` verifications share
//! one KMP scan of the text and never re-read a position.

use crate::error::{Error, Result};
use crate::matchers::{KmpPattern, Matcher, ReadLog};
use crate::sampling::{distances_from_sample, CdsIndex, ResidueGaps, SampledPattern};
use crate::Fingerprint;

/// Work done by one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub verifications: u64,
    /// Text bytes read by matchers and verification.
    pub text_inspected: u64,
    /// Residues, block-map entries and gap values read.
    pub sampled_inspected: u64,
    /// Candidate windows handed to verification or to a matcher.
    pub candidates: u64,
}

impl Counters {
    pub fn add(&mut self, other: &Counters) {
        self.verifications += other.verifications;
        self.text_inspected += other.text_inspected;
        self.sampled_inspected += other.sampled_inspected;
        self.candidates += other.candidates;
    }
}

/// Optional detail kept when a search runs with tracing on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchTrace {
    /// Every candidate window as a 1-based inclusive text range.
    pub windows: Vec<(usize, usize)>,
    /// Every contiguous run of text reads, as 0-based `(start, len)`.
    pub reads: Vec<(usize, usize)>,
}

impl SearchTrace {
    /// Highest number of times any single text position was read.
    pub fn max_reads_per_position(&self, n: usize) -> u32 {
        let mut diff = vec![0i64; n + 1];
        for &(start, len) in &self.reads {
            diff[start] += 1;
            diff[(start + len).min(n)] -= 1;
        }
        let mut cur = 0i64;
        let mut max = 0i64;
        for d in &diff[..n] {
            cur += d;
            max = max.max(cur);
        }
        max as u32
    }

    /// True when `[p, p+m−1]` lies inside some candidate window.
    pub fn covers(&self, p: usize, m: usize) -> bool {
        self.windows.iter().any(|&(a, b)| a <= p && p + m - 1 <= b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Ascending 1-based start positions.
    pub matches: Vec<usize>,
    pub counters: Counters,
    pub trace: Option<SearchTrace>,
}

/// Which routine handled a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    NoPivot,
    OnePivot,
    Filtered,
}

impl Route {
    pub fn for_pivot_count(m_c: usize) -> Self {
        match m_c {
            0 => Route::NoPivot,
            1 => Route::OnePivot,
            _ => Route::Filtered,
        }
    }
}

/// `true` iff `x` occurs in `y` at offset `s`, i.e. `x[i] = y[s+i]` for
/// `1 ≤ i ≤ m`. Windows not inside `y` are rejected without reading.
pub fn verify(x: &[u8], y: &[u8], s: isize, log: &mut ReadLog) -> bool {
    if s < 0 {
        return false;
    }
    let s = s as usize;
    let m = x.len();
    if s + m > y.len() {
        return false;
    }
    let window = &y[s..s + m];
    let mut i = 0;
    while i < m && x[i] == window[i] {
        i += 1;
    }
    log.record(s, if i < m { i + 1 } else { m });
    i == m
}

/// Per-search scratch state.
struct Run {
    counters: Counters,
    text_log: ReadLog,
    windows: Option<Vec<(usize, usize)>>,
    matches: Vec<usize>,
}

impl Run {
    fn new(trace: bool) -> Self {
        Run {
            counters: Counters::default(),
            text_log: if trace {
                ReadLog::tracing()
            } else {
                ReadLog::new()
            },
            windows: trace.then(Vec::new),
            matches: Vec::new(),
        }
    }

    #[inline]
    fn candidate(&mut self, first: usize, last: usize) {
        self.counters.candidates += 1;
        if let Some(w) = &mut self.windows {
            w.push((first, last));
        }
    }

    fn finish(self) -> SearchOutcome {
        let mut counters = self.counters;
        counters.text_inspected = self.text_log.symbols;
        let trace = self.windows.map(|windows| SearchTrace {
            windows,
            reads: self.text_log.into_ranges().unwrap_or_default(),
        });
        SearchOutcome {
            matches: self.matches,
            counters,
            trace,
        }
    }
}

/// An index paired with the text it was verified against.
#[derive(Debug, Clone, Copy)]
pub struct CdsSearcher<'a> {
    index: &'a CdsIndex,
    text: &'a [u8],
    trace: bool,
}

impl CdsIndex {
    /// Binds the index to `text` after checking length and fingerprint.
    pub fn attach<'a>(&'a self, text: &'a [u8]) -> Result<CdsSearcher<'a>> {
        check_fingerprint(self.fingerprint(), text)?;
        Ok(CdsSearcher {
            index: self,
            text,
            trace: false,
        })
    }

    /// Binds without hashing the text. The caller vouches that `text` is
    /// the one the index was built from.
    pub fn attach_unchecked<'a>(&'a self, text: &'a [u8]) -> CdsSearcher<'a> {
        debug_assert_eq!(self.n(), text.len());
        CdsSearcher {
            index: self,
            text,
            trace: false,
        }
    }
}

pub(crate) fn check_fingerprint(expected: Fingerprint, text: &[u8]) -> Result<()> {
    if expected.len != text.len() as u64 {
        return Err(Error::TextMismatch(format!(
            "index was built for {} bytes, text has {}",
            expected.len,
            text.len()
        )));
    }
    let actual = Fingerprint::of(text);
    if actual != expected {
        return Err(Error::TextMismatch(format!(
            "fingerprint {:016x} != {:016x}",
            actual.hash, expected.hash
        )));
    }
    Ok(())
}

/// Checks the fingerprint, then dispatches on the pattern's pivot count.
pub fn search(
    x: &[u8],
    index: &CdsIndex,
    y: &[u8],
    matcher: &dyn Matcher,
) -> Result<SearchOutcome> {
    index.attach(y)?.search(x, matcher)
}

impl<'a> CdsSearcher<'a> {
    /// Keep candidate windows and read ranges in the outcome.
    pub fn with_trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }

    pub fn index(&self) -> &'a CdsIndex {
        self.index
    }

    pub fn text(&self) -> &'a [u8] {
        self.text
    }

    pub fn route(&self, x: &[u8]) -> Route {
        Route::for_pivot_count(self.index.pivots().count_in(x))
    }

    pub fn search(&self, x: &[u8], matcher: &dyn Matcher) -> Result<SearchOutcome> {
        if x.is_empty() {
            return Err(Error::param("empty pattern"));
        }
        match self.route(x) {
            Route::NoPivot => self.search_zero(x, matcher),
            Route::OnePivot => self.search_one(x),
            Route::Filtered => self.search_two_plus(x, matcher),
        }
    }

    /// Pattern without pivots: match inside the pivot-free stretches.
    pub fn search_zero(&self, x: &[u8], matcher: &dyn Matcher) -> Result<SearchOutcome> {
        let pattern = SampledPattern::new(x, self.index.pivots());
        if pattern.m_c != 0 || x.is_empty() {
            return Err(Error::param(
                "search_zero needs a non-empty pattern without pivots",
            ));
        }
        let mut run = Run::new(self.trace);
        let (m, n) = (x.len(), self.text.len());
        if m > n {
            return Ok(run.finish());
        }
        let prepared = matcher.prepare(x);
        let sample = self.index.sample();
        let mut positions = sample.positions();
        let mut prev = 0usize;
        // δ(1..n_c) followed by the sentinel n+1
        for d in positions.by_ref().chain(std::iter::once(n + 1)) {
            if d - prev > m {
                run.candidate(prev + 1, d - 1);
                prepared.find_into(
                    &self.text[prev..d - 1],
                    prev,
                    &mut run.matches,
                    &mut run.text_log,
                );
            }
            prev = d;
        }
        run.counters.sampled_inspected = (sample.n_c() + positions.blocks_scanned()) as u64;
        Ok(run.finish())
    }

    /// Pattern with exactly one pivot: anchor it on every text pivot.
    pub fn search_one(&self, x: &[u8]) -> Result<SearchOutcome> {
        let pattern = SampledPattern::new(x, self.index.pivots());
        let alpha = match (pattern.m_c, pattern.alpha) {
            (1, Some(alpha)) => alpha,
            _ => {
                return Err(Error::param(
                    "search_one needs exactly one pivot in the pattern",
                ))
            }
        };
        let mut run = Run::new(self.trace);
        let (m, n) = (x.len(), self.text.len());
        if m > n {
            return Ok(run.finish());
        }
        let sample = self.index.sample();
        let mut positions = sample.positions();
        let mut prev = 0usize;
        let mut cur = match positions.next() {
            Some(d) => d,
            None => return Ok(run.finish()),
        };
        loop {
            let next = positions.next();
            let following = next.unwrap_or(n + 1);
            // room for x[1..α−1] before the anchor and x[α+1..m] after it
            if cur - prev > alpha - 1 && following - cur > m - alpha {
                let start = cur + 1 - alpha;
                run.candidate(start, start + m - 1);
                run.counters.verifications += 1;
                if verify(x, self.text, start as isize - 1, &mut run.text_log) {
                    run.matches.push(start);
                }
            }
            match next {
                Some(d) => {
                    prev = cur;
                    cur = d;
                }
                None => break,
            }
        }
        run.counters.sampled_inspected = (sample.n_c() + positions.blocks_scanned()) as u64;
        Ok(run.finish())
    }

    /// Pattern with two or more pivots: filter with `x̄` in `ȳ`, then verify.
    pub fn search_two_plus(&self, x: &[u8], matcher: &dyn Matcher) -> Result<SearchOutcome> {
        let pattern = SampledPattern::new(x, self.index.pivots());
        let alpha = match (pattern.m_c, pattern.alpha) {
            (m_c, Some(alpha)) if m_c >= 2 => alpha,
            _ => {
                return Err(Error::param(
                    "search_two_plus needs at least two pivots in the pattern",
                ))
            }
        };
        let mut run = Run::new(self.trace);
        let (m, n) = (x.len(), self.text.len());
        let sample = self.index.sample();
        if m > n || sample.n_c() < pattern.m_c {
            return Ok(run.finish());
        }

        let filter = matcher.prepare_wide(pattern.distances.as_slice());
        let mut sampled_log = ReadLog::new();
        let mut hits = Vec::new();
        let mut sampled = if self.index.fast_path_ok() {
            let gaps = ResidueGaps::new(sample.residues(), sample.k());
            filter.find_in_gaps(&gaps, &mut hits, &mut sampled_log);
            // each gap costs two residues
            2 * sampled_log.symbols
        } else {
            let gaps = distances_from_sample(sample);
            filter.find_into(gaps.as_slice(), 0, &mut hits, &mut sampled_log);
            sampled_log.symbols + (sample.n_c() + sample.tau().len()) as u64
        };

        let mut guard = matcher
            .worst_case_linear()
            .then(|| GuardedVerifier::new(x, self.text));
        let mut block = 1usize;
        for &i in &hits {
            let (anchor, b) = sample.get_position(block, i)?;
            sampled += (b - block + 1) as u64;
            block = b;
            if anchor < alpha || anchor - alpha + m > n {
                continue;
            }
            let start = anchor + 1 - alpha;
            run.candidate(start, start + m - 1);
            run.counters.verifications += 1;
            let found = match &mut guard {
                Some(g) => g.check(start, &mut run.text_log),
                None => verify(x, self.text, start as isize - 1, &mut run.text_log),
            };
            if found {
                run.matches.push(start);
            }
        }
        run.counters.sampled_inspected = sampled;
        Ok(run.finish())
    }
}

/// Verification through a single forward KMP scan. Candidates must arrive
/// in increasing order; text already scanned is never read again.
struct GuardedVerifier<'a> {
    kmp: KmpPattern<'a, u8>,
    text: &'a [u8],
    /// 0-based index of the next unread text byte.
    scanned: usize,
    state: usize,
}

impl<'a> GuardedVerifier<'a> {
    fn new(x: &'a [u8], text: &'a [u8]) -> Self {
        GuardedVerifier {
            kmp: KmpPattern::new(x),
            text,
            scanned: 0,
            state: 0,
        }
    }

    /// Whether the pattern occurs at 1-based `start`.
    fn check(&mut self, start: usize, log: &mut ReadLog) -> bool {
        let m = self.kmp.len();
        let from = start - 1;
        let end = from + m; // exclusive
        if end <= self.scanned {
            // only reachable for out-of-order candidates
            return &self.text[from..end] == self.kmp_pattern();
        }
        if from > self.scanned {
            // gap since the last candidate: restart the automaton here
            self.scanned = from;
            self.state = 0;
        }
        log.record(self.scanned, end - self.scanned);
        for &b in &self.text[self.scanned..end] {
            self.state = self.kmp.step(self.state, b);
        }
        self.scanned = end;
        self.state == m
    }

    fn kmp_pattern(&self) -> &[u8] {
        self.kmp.pattern()
    }
}
