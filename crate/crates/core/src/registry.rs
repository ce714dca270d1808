//! Named search strategies behind a common interface.
//!
//! A strategy is built from a name and string parameters, e.g.
//! `cds:rank=3,k=256,matcher=kmp`. [`Registry::expand`] also accepts value
//! lists (`q=8|16|32`) and inclusive ranges (`rank=1..20`, `removed=2..20:2`)
//! and yields one strategy per combination.

use std::collections::BTreeMap;
use std::fmt;

use crate::cds_search::SearchOutcome;
use crate::error::{Error, Result};
use crate::matchers::{matcher_by_name, Matcher, ReadLog};
use crate::ots::{build_ots_index, OtsIndex};
use crate::sampling::{build_cds_index, CdsIndex, PivotChoice, PivotSet, DEFAULT_BLOCK_SIZE};

/// Parameter values keyed by name, in a stable order.
pub type Params = BTreeMap<String, String>;

pub trait SearchAlgorithm: Send + Sync {
    fn name(&self) -> &str;

    /// `key=value` pairs joined by `;`.
    fn params(&self) -> String;

    /// Builds whatever index the strategy needs for `text`.
    fn prepare<'t>(&self, text: &'t [u8]) -> Result<Box<dyn PreparedSearch + 't>>;
}

/// A strategy bound to one text.
pub trait PreparedSearch {
    fn search(&self, pattern: &[u8]) -> Result<SearchOutcome>;

    /// Bytes the index occupies on disk; 0 for online matchers.
    fn index_bytes(&self) -> usize;
}

impl fmt::Debug for dyn SearchAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name(), self.params())
    }
}

pub type Factory = fn(&Params) -> Result<Box<dyn SearchAlgorithm>>;

pub struct Registry {
    factories: BTreeMap<String, Factory>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            factories: BTreeMap::new(),
        }
    }

    /// `cds`, `ots`, `horspool`, `kmp` and `naive`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("cds", CdsAlgorithm::from_params);
        r.register("ots", OtsAlgorithm::from_params);
        r.register("horspool", |p| OnlineAlgorithm::from_params("horspool", p));
        r.register("kmp", |p| OnlineAlgorithm::from_params("kmp", p));
        r.register("naive", |p| OnlineAlgorithm::from_params("naive", p));
        r
    }

    pub fn register(&mut self, name: &str, factory: Factory) {
        self.factories.insert(name.to_ascii_lowercase(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, params: &Params) -> Result<Box<dyn SearchAlgorithm>> {
        let factory = self
            .factories
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown algorithm {name:?} (known: {})",
                    self.names().collect::<Vec<_>>().join(", ")
                ))
            })?;
        factory(params)
    }

    /// Expands one spec into every parameter combination it describes.
    pub fn expand(&self, spec: &str) -> Result<Vec<Box<dyn SearchAlgorithm>>> {
        let (name, rest) = match spec.split_once(':') {
            Some((name, rest)) => (name.trim(), rest),
            None => (spec.trim(), ""),
        };
        let mut axes: Vec<(String, Vec<String>)> = Vec::new();
        for pair in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got {pair:?}")))?;
            axes.push((
                key.trim().to_ascii_lowercase(),
                expand_values(value.trim())?,
            ));
        }
        let mut combos = vec![Params::new()];
        for (key, values) in &axes {
            combos = combos
                .into_iter()
                .flat_map(|base| {
                    values.iter().map(move |v| {
                        let mut p = base.clone();
                        p.insert(key.clone(), v.clone());
                        p
                    })
                })
                .collect();
        }
        combos.iter().map(|p| self.create(name, p)).collect()
    }
}

fn expand_values(value: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for alt in value.split('|') {
        let Some((lo, hi)) = alt.split_once("..") else {
            out.push(alt.to_string());
            continue;
        };
        let (hi, step) = match hi.split_once(':') {
            Some((hi, step)) => (hi, step),
            None => (hi, "1"),
        };
        let lo: u64 = parse_num(lo, alt)?;
        let hi: u64 = parse_num(hi, alt)?;
        let step: u64 = parse_num(step, alt)?;
        if step == 0 || lo > hi {
            return Err(Error::param(format!("empty range {alt:?}")));
        }
        out.extend((lo..=hi).step_by(step as usize).map(|v| v.to_string()));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(s: &str, context: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::param(format!("bad number {s:?} in {context:?}")))
}

fn check_keys(algo: &str, params: &Params, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::param(format!(
            "{algo} does not take {k:?} (accepts {})",
            allowed.join(", ")
        ))),
        None => Ok(()),
    }
}

fn get_num<T: std::str::FromStr>(params: &Params, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        Some(v) => parse_num(v, key),
        None => Ok(default),
    }
}

fn get_matcher(params: &Params) -> Result<&'static dyn Matcher> {
    let name = params.get("matcher").map_or("horspool", String::as_str);
    matcher_by_name(name).ok_or_else(|| Error::param(format!("unknown matcher {name:?}")))
}

#[derive(Clone)]
pub struct CdsAlgorithm {
    pub pivot: PivotChoice,
    pub k: u32,
    pub matcher: &'static dyn Matcher,
}

impl CdsAlgorithm {
    /// Keys: `rank` (default 1) or `pivots` (literal bytes), `k`, `matcher`.
    pub fn from_params(params: &Params) -> Result<Box<dyn SearchAlgorithm>> {
        check_keys("cds", params, &["rank", "pivots", "k", "matcher"])?;
        let pivot = match (params.get("rank"), params.get("pivots")) {
            (Some(_), Some(_)) => return Err(Error::param("give either rank or pivots, not both")),
            (_, Some(p)) => PivotChoice::Explicit(PivotSet::new(p.bytes())?),
            _ => {
                let rank = get_num(params, "rank", 1usize)?;
                if rank == 0 {
                    return Err(Error::param("pivot ranks start at 1"));
                }
                PivotChoice::Rank(rank)
            }
        };
        let k = get_num(params, "k", DEFAULT_BLOCK_SIZE)?;
        crate::sampling::check_block_size(k)?;
        Ok(Box::new(CdsAlgorithm {
            pivot,
            k,
            matcher: get_matcher(params)?,
        }))
    }
}

impl SearchAlgorithm for CdsAlgorithm {
    fn name(&self) -> &str {
        "cds"
    }

    fn params(&self) -> String {
        let pivot = match &self.pivot {
            PivotChoice::Rank(r) => format!("rank={r}"),
            PivotChoice::Explicit(set) => {
                format!("pivots={}", String::from_utf8_lossy(&set.to_vec()))
            }
        };
        format!("{pivot};k={};matcher={}", self.k, self.matcher.name())
    }

    fn prepare<'t>(&self, text: &'t [u8]) -> Result<Box<dyn PreparedSearch + 't>> {
        let index = build_cds_index(text, self.pivot.clone(), self.k)?;
        Ok(Box::new(PreparedCds {
            index,
            text,
            matcher: self.matcher,
        }))
    }
}

struct PreparedCds<'t> {
    index: CdsIndex,
    text: &'t [u8],
    matcher: &'static dyn Matcher,
}

impl PreparedSearch for PreparedCds<'_> {
    fn search(&self, pattern: &[u8]) -> Result<SearchOutcome> {
        self.index
            .attach_unchecked(self.text)
            .search(pattern, self.matcher)
    }

    fn index_bytes(&self) -> usize {
        self.index.stored_size()
    }
}

#[derive(Clone)]
pub struct OtsAlgorithm {
    pub removed: usize,
    pub q: u32,
    pub matcher: &'static dyn Matcher,
}

impl OtsAlgorithm {
    /// Keys: `removed` (default 13), `q` (default 32), `matcher`.
    pub fn from_params(params: &Params) -> Result<Box<dyn SearchAlgorithm>> {
        check_keys("ots", params, &["removed", "q", "matcher"])?;
        let q = get_num(params, "q", 32u32)?;
        if q == 0 {
            return Err(Error::param("q must be at least 1"));
        }
        Ok(Box::new(OtsAlgorithm {
            removed: get_num(params, "removed", 13usize)?,
            q,
            matcher: get_matcher(params)?,
        }))
    }
}

impl SearchAlgorithm for OtsAlgorithm {
    fn name(&self) -> &str {
        "ots"
    }

    fn params(&self) -> String {
        format!(
            "removed={};q={};matcher={}",
            self.removed,
            self.q,
            self.matcher.name()
        )
    }

    fn prepare<'t>(&self, text: &'t [u8]) -> Result<Box<dyn PreparedSearch + 't>> {
        let index = build_ots_index(text, self.removed, self.q)?;
        Ok(Box::new(PreparedOts {
            index,
            text,
            matcher: self.matcher,
        }))
    }
}

struct PreparedOts<'t> {
    index: OtsIndex,
    text: &'t [u8],
    matcher: &'static dyn Matcher,
}

impl PreparedSearch for PreparedOts<'_> {
    fn search(&self, pattern: &[u8]) -> Result<SearchOutcome> {
        if pattern.is_empty() {
            return Err(Error::param("empty pattern"));
        }
        self.index
            .search_unchecked(pattern, self.text, self.matcher)
    }

    fn index_bytes(&self) -> usize {
        self.index.stored_size()
    }
}

/// Plain online search with one of the built-in matchers.
#[derive(Clone)]
pub struct OnlineAlgorithm {
    pub matcher: &'static dyn Matcher,
}

impl OnlineAlgorithm {
    fn from_params(name: &str, params: &Params) -> Result<Box<dyn SearchAlgorithm>> {
        check_keys(name, params, &[])?;
        let matcher = matcher_by_name(name)
            .ok_or_else(|| Error::param(format!("unknown matcher {name:?}")))?;
        Ok(Box::new(OnlineAlgorithm { matcher }))
    }
}

impl SearchAlgorithm for OnlineAlgorithm {
    fn name(&self) -> &str {
        self.matcher.name()
    }

    fn params(&self) -> String {
        String::new()
    }

    fn prepare<'t>(&self, text: &'t [u8]) -> Result<Box<dyn PreparedSearch + 't>> {
        Ok(Box::new(PreparedOnline {
            text,
            matcher: self.matcher,
        }))
    }
}

struct PreparedOnline<'t> {
    text: &'t [u8],
    matcher: &'static dyn Matcher,
}

impl PreparedSearch for PreparedOnline<'_> {
    fn search(&self, pattern: &[u8]) -> Result<SearchOutcome> {
        if pattern.is_empty() {
            return Err(Error::param("empty pattern"));
        }
        let mut out = SearchOutcome::default();
        let mut log = ReadLog::new();
        self.matcher
            .prepare(pattern)
            .find_into(self.text, 0, &mut out.matches, &mut log);
        out.counters.text_inspected = log.symbols;
        out.counters.candidates = 1;
        Ok(out)
    }

    fn index_bytes(&self) -> usize {
        0
    }
}
