//! Exact string matching over a characters-distance sampled text.
//!
//! [`sampling`] builds the partial index, [`cds_search`] answers queries with
//! it, [`ots`] is the alphabet-sampling baseline and [`matchers`] holds the
//! online algorithms both rely on. [`registry`] puts every strategy behind
//! one trait so callers can pick them by name.
//!
//! ```
//! use cds_core::{build_cds_index, search, PivotChoice, HORSPOOL};
//!
//! let text = b"abaacbcabdada";
//! let index = build_cds_index(text, PivotChoice::Rank(1), 5).unwrap();
//! let hits = search(b"cab", &index, text, &HORSPOOL).unwrap();
//! assert_eq!(hits.matches, vec![7]);
//! ```

use std::hash::Hasher;

use fnv::FnvHasher;

pub mod cds_search;
pub mod corpus;
pub mod error;
pub mod index_io;
pub mod matchers;
pub mod ots;
pub mod registry;
pub mod sampling;

pub use cds_search::{search, verify, CdsSearcher, Counters, Route, SearchOutcome, SearchTrace};
pub use corpus::{
    distance_stats, rank_characters, Corpus, DistanceRecord, DistanceStats, FrequencyRanking,
};
pub use error::{Error, Result};
pub use index_io::{load_index, load_index_file, save_index, save_index_file, AnyIndex};
pub use matchers::{
    builtin_matchers, horspool_search, kmp_search, matcher_by_name, naive_search, Matcher,
    HORSPOOL, KMP, NAIVE,
};
pub use ots::{build_ots_index, ots_search, OtsIndex};
pub use registry::{PreparedSearch, Registry, SearchAlgorithm};
pub use sampling::{
    build_cds_index, build_position_sampling, compute_distance_sampling, distances_fast_path,
    distances_from_sample, CdsIndex, DistanceSample, PivotChoice, PivotSet, PositionSample,
    ResidueGaps,
};

/// Identity of a text: FNV-1a 64 of its bytes plus its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub hash: u64,
    pub len: u64,
}

impl Fingerprint {
    pub fn of(text: &[u8]) -> Self {
        let mut h = FnvHasher::default();
        h.write(text);
        Fingerprint {
            hash: h.finish(),
            len: text.len() as u64,
        }
    }
}
