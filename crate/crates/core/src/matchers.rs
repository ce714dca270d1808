//! Online exact matchers over byte texts and over sequences of distances.
//!
//! Every matcher reports all occurrences, overlapping ones included, as
//! ascending 1-based start positions. Matchers are strategies behind the
//! [`Matcher`] trait and can be looked up by name with [`matcher_by_name`].

use std::fmt;

use crate::sampling::ResidueGaps;

/// A symbol a matcher can compare: text bytes or sampled distances.
pub trait Symbol: Copy + Eq + fmt::Debug + Send + Sync + 'static {
    /// Key into a 256-entry shift table. Wide symbols fold modulo 256,
    /// which can only shorten shifts.
    fn shift_key(self) -> usize;
}

impl Symbol for u8 {
    #[inline]
    fn shift_key(self) -> usize {
        self as usize
    }
}

impl Symbol for u32 {
    #[inline]
    fn shift_key(self) -> usize {
        (self & 0xff) as usize
    }
}

/// Tally of symbol reads, optionally keeping every contiguous read range.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadLog {
    pub symbols: u64,
    ranges: Option<Vec<(usize, usize)>>,
}

impl ReadLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// A log that also records `(start, len)` of each read range, in
    /// 0-based coordinates of the searched sequence.
    pub fn tracing() -> Self {
        ReadLog {
            symbols: 0,
            ranges: Some(Vec::new()),
        }
    }

    #[inline]
    pub fn record(&mut self, start: usize, len: usize) {
        self.symbols += len as u64;
        if let Some(ranges) = &mut self.ranges {
            if len > 0 {
                ranges.push((start, len));
            }
        }
    }

    pub fn ranges(&self) -> Option<&[(usize, usize)]> {
        self.ranges.as_deref()
    }

    pub fn into_ranges(self) -> Option<Vec<(usize, usize)>> {
        self.ranges
    }
}

/// Random access to a symbol sequence that need not exist in memory.
pub trait Haystack<S> {
    fn len(&self) -> usize;
    fn at(&self, i: usize) -> S;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<S: Symbol> Haystack<S> for [S] {
    #[inline]
    fn len(&self) -> usize {
        <[S]>::len(self)
    }

    #[inline]
    fn at(&self, i: usize) -> S {
        self[i]
    }
}

/// A pattern preprocessed by some [`Matcher`].
pub trait PreparedMatcher<S: Symbol> {
    /// Appends every occurrence in `text` to `out` as `base + j + 1`, where
    /// `j` is the 0-based start inside `text`.
    fn find_into(&self, text: &[S], base: usize, out: &mut Vec<usize>, log: &mut ReadLog);
}

/// A distance pattern that can also be searched in gaps decoded on demand.
pub trait PreparedWide: PreparedMatcher<u32> {
    fn find_in_gaps(&self, gaps: &ResidueGaps<'_>, out: &mut Vec<usize>, log: &mut ReadLog);
}

/// An online exact matching algorithm.
pub trait Matcher: Send + Sync {
    fn name(&self) -> &'static str;

    /// True when the search reads each text symbol O(1) times.
    fn worst_case_linear(&self) -> bool {
        false
    }

    fn prepare<'p>(&self, pattern: &'p [u8]) -> Box<dyn PreparedMatcher<u8> + 'p>;

    fn prepare_wide<'p>(&self, pattern: &'p [u32]) -> Box<dyn PreparedWide + 'p>;
}

impl fmt::Debug for dyn Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matcher({})", self.name())
    }
}

//-----------------------------------------------------------------------------

/// Horspool's simplification of Boyer-Moore: bad-character shift on the
/// symbol under the last pattern position.
#[derive(Debug, Clone, Copy, Default)]
pub struct Horspool;

pub struct HorspoolPattern<'p, S> {
    pattern: &'p [S],
    shift: [usize; 256],
}

impl<'p, S: Symbol> HorspoolPattern<'p, S> {
    pub fn new(pattern: &'p [S]) -> Self {
        let m = pattern.len();
        let mut shift = [m.max(1); 256];
        if m > 0 {
            for (i, s) in pattern[..m - 1].iter().enumerate() {
                shift[s.shift_key()] = m - 1 - i;
            }
        }
        HorspoolPattern { pattern, shift }
    }
}

impl<S: Symbol> HorspoolPattern<'_, S> {
    #[inline]
    fn scan<H: Haystack<S> + ?Sized>(
        &self,
        text: &H,
        base: usize,
        out: &mut Vec<usize>,
        log: &mut ReadLog,
    ) {
        let pat = self.pattern;
        let m = pat.len();
        let n = text.len();
        if m == 0 || m > n {
            return;
        }
        let last = m - 1;
        let mut j = 0;
        while j + m <= n {
            let tail = text.at(j + last);
            let mut i = m;
            if pat[last] == tail {
                i = last;
                while i > 0 && pat[i - 1] == text.at(j + i - 1) {
                    i -= 1;
                }
            }
            if i == 0 {
                log.record(base + j, m);
                out.push(base + j + 1);
            } else {
                log.record(base + j + i - 1, m - i + 1);
            }
            j += self.shift[tail.shift_key()];
        }
    }
}

impl<S: Symbol> PreparedMatcher<S> for HorspoolPattern<'_, S> {
    fn find_into(&self, text: &[S], base: usize, out: &mut Vec<usize>, log: &mut ReadLog) {
        self.scan(text, base, out, log);
    }
}

impl PreparedWide for HorspoolPattern<'_, u32> {
    fn find_in_gaps(&self, gaps: &ResidueGaps<'_>, out: &mut Vec<usize>, log: &mut ReadLog) {
        self.scan(gaps, 0, out, log);
    }
}

impl Matcher for Horspool {
    fn name(&self) -> &'static str {
        "horspool"
    }

    fn prepare<'p>(&self, pattern: &'p [u8]) -> Box<dyn PreparedMatcher<u8> + 'p> {
        Box::new(HorspoolPattern::new(pattern))
    }

    fn prepare_wide<'p>(&self, pattern: &'p [u32]) -> Box<dyn PreparedWide + 'p> {
        Box::new(HorspoolPattern::new(pattern))
    }
}

//-----------------------------------------------------------------------------

/// Knuth-Morris-Pratt. Reads every text symbol exactly once.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kmp;

pub struct KmpPattern<'p, S> {
    pattern: &'p [S],
    // failure[q - 1]: length of the longest proper border of pattern[..q]
    failure: Vec<usize>,
}

impl<'p, S: Symbol> KmpPattern<'p, S> {
    pub fn new(pattern: &'p [S]) -> Self {
        let m = pattern.len();
        let mut failure = vec![0; m];
        let mut q = 0;
        for i in 1..m {
            while q > 0 && pattern[q] != pattern[i] {
                q = failure[q - 1];
            }
            if pattern[q] == pattern[i] {
                q += 1;
            }
            failure[i] = q;
        }
        KmpPattern { pattern, failure }
    }

    pub fn pattern(&self) -> &'p [S] {
        self.pattern
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    /// Advances the automaton by one symbol; returns the new matched length.
    /// A return value equal to the pattern length signals an occurrence.
    #[inline]
    pub fn step(&self, mut state: usize, symbol: S) -> usize {
        let m = self.pattern.len();
        if state == m {
            state = self.failure[m - 1];
        }
        while state > 0 && self.pattern[state] != symbol {
            state = self.failure[state - 1];
        }
        if self.pattern[state] == symbol {
            state += 1;
        }
        state
    }
}

impl<S: Symbol> KmpPattern<'_, S> {
    #[inline]
    fn scan<H: Haystack<S> + ?Sized>(
        &self,
        text: &H,
        base: usize,
        out: &mut Vec<usize>,
        log: &mut ReadLog,
    ) {
        let m = self.pattern.len();
        let n = text.len();
        if m == 0 || m > n {
            return;
        }
        log.record(base, n);
        let mut state = 0;
        for j in 0..n {
            state = self.step(state, text.at(j));
            if state == m {
                out.push(base + j + 2 - m);
            }
        }
    }
}

impl<S: Symbol> PreparedMatcher<S> for KmpPattern<'_, S> {
    fn find_into(&self, text: &[S], base: usize, out: &mut Vec<usize>, log: &mut ReadLog) {
        self.scan(text, base, out, log);
    }
}

impl PreparedWide for KmpPattern<'_, u32> {
    fn find_in_gaps(&self, gaps: &ResidueGaps<'_>, out: &mut Vec<usize>, log: &mut ReadLog) {
        self.scan(gaps, 0, out, log);
    }
}

impl Matcher for Kmp {
    fn name(&self) -> &'static str {
        "kmp"
    }

    fn worst_case_linear(&self) -> bool {
        true
    }

    fn prepare<'p>(&self, pattern: &'p [u8]) -> Box<dyn PreparedMatcher<u8> + 'p> {
        Box::new(KmpPattern::new(pattern))
    }

    fn prepare_wide<'p>(&self, pattern: &'p [u32]) -> Box<dyn PreparedWide + 'p> {
        Box::new(KmpPattern::new(pattern))
    }
}

//-----------------------------------------------------------------------------

/// Exhaustive alignment check. Reference oracle for everything else.
#[derive(Debug, Clone, Copy, Default)]
pub struct Naive;

pub struct NaivePattern<'p, S> {
    pattern: &'p [S],
}

impl<S: Symbol> NaivePattern<'_, S> {
    fn scan<H: Haystack<S> + ?Sized>(
        &self,
        text: &H,
        base: usize,
        out: &mut Vec<usize>,
        log: &mut ReadLog,
    ) {
        let pat = self.pattern;
        let m = pat.len();
        if m > text.len() {
            return;
        }
        for j in 0..=text.len() - m {
            let mut i = 0;
            while i < m && pat[i] == text.at(j + i) {
                i += 1;
            }
            log.record(base + j, if i < m { i + 1 } else { m });
            if i == m {
                out.push(base + j + 1);
            }
        }
    }
}

impl<S: Symbol> PreparedMatcher<S> for NaivePattern<'_, S> {
    fn find_into(&self, text: &[S], base: usize, out: &mut Vec<usize>, log: &mut ReadLog) {
        self.scan(text, base, out, log);
    }
}

impl PreparedWide for NaivePattern<'_, u32> {
    fn find_in_gaps(&self, gaps: &ResidueGaps<'_>, out: &mut Vec<usize>, log: &mut ReadLog) {
        self.scan(gaps, 0, out, log);
    }
}

impl Matcher for Naive {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn prepare<'p>(&self, pattern: &'p [u8]) -> Box<dyn PreparedMatcher<u8> + 'p> {
        Box::new(NaivePattern { pattern })
    }

    fn prepare_wide<'p>(&self, pattern: &'p [u32]) -> Box<dyn PreparedWide + 'p> {
        Box::new(NaivePattern { pattern })
    }
}

//-----------------------------------------------------------------------------

pub static HORSPOOL: Horspool = Horspool;
pub static KMP: Kmp = Kmp;
pub static NAIVE: Naive = Naive;

/// Built-in matchers, in registration order.
pub fn builtin_matchers() -> [&'static dyn Matcher; 3] {
    [&HORSPOOL, &KMP, &NAIVE]
}

pub fn matcher_by_name(name: &str) -> Option<&'static dyn Matcher> {
    builtin_matchers()
        .into_iter()
        .find(|m| m.name().eq_ignore_ascii_case(name))
}

fn run<S: Symbol>(prepared: &dyn PreparedMatcher<S>, text: &[S]) -> Vec<usize> {
    let mut out = Vec::new();
    prepared.find_into(text, 0, &mut out, &mut ReadLog::new());
    out
}

/// All 1-based occurrences of `pattern` in `text` (Horspool).
pub fn horspool_search<S: Symbol>(pattern: &[S], text: &[S]) -> Vec<usize> {
    run(&HorspoolPattern::new(pattern), text)
}

/// All 1-based occurrences of `pattern` in `text` (KMP).
pub fn kmp_search<S: Symbol>(pattern: &[S], text: &[S]) -> Vec<usize> {
    run(&KmpPattern::new(pattern), text)
}

/// All 1-based occurrences by brute force. An empty pattern matches at
/// every position `1..=n+1`.
pub fn naive_search<S: Symbol>(pattern: &[S], text: &[S]) -> Vec<usize> {
    if pattern.is_empty() {
        return (1..=text.len() + 1).collect();
    }
    run(&NaivePattern { pattern }, text)
}
