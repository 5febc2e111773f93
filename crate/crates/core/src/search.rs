//! Exhaustive cycle search over a range of seeds.
//!
//! The range is split into contiguous chunks, one per worker. Each worker runs
//! [`detect_cycle`] on its seeds and keeps a local set of canonical cycles; the
//! sets are merged and sorted afterwards, so the result does not depend on
//! the worker count.

use std::collections::BTreeSet;
use std::thread;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::certify::{
    verify_eq1, verify_inverse_identities, verify_rotation_identity, verify_sum_identity, CertificateReport,
};
use crate::mapdef::{Map, SpecialMap};
use crate::orbit::{detect_cycle, Cycle, Limits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("empty seed range {lo}..{hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("worker count must be at least 1")]
    NoWorkers,
}

/// Which certificates to run on each distinct cycle. Checks that do not
/// apply to the map are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckSet {
    pub rotation: bool,
    pub sum: bool,
    pub eq1: bool,
    pub inverse: bool,
}

impl CheckSet {
    pub const ALL: CheckSet = CheckSet { rotation: true, sum: true, eq1: true, inverse: true };
    pub const NONE: CheckSet = CheckSet { rotation: false, sum: false, eq1: false, inverse: false };
}

impl Default for CheckSet {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub lo: i64,
    pub hi: i64,
    pub limits: Limits,
    pub workers: usize,
    pub checks: CheckSet,
}

impl SearchConfig {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi, limits: Limits::default(), workers: 1, checks: CheckSet::ALL }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_checks(mut self, checks: CheckSet) -> Self {
        self.checks = checks;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoundCycle {
    pub length: usize,
    #[serde(flatten)]
    pub cycle: Cycle,
    pub certificates: Vec<CertificateReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub map: String,
    pub lo: i64,
    pub hi: i64,
    pub seeds_scanned: u64,
    pub unresolved: u64,
    pub cycles: Vec<FoundCycle>,
}

impl SearchResult {
    pub fn cycle_list(&self) -> Vec<&Cycle> {
        self.cycles.iter().map(|c| &c.cycle).collect()
    }

    pub fn all_certificates_pass(&self) -> bool {
        self.cycles.iter().flat_map(|c| &c.certificates).all(|r| !r.outcome.is_failure())
    }
}

/// Contiguous, disjoint, covering inclusive subranges of `[lo, hi]` whose sizes
/// differ by at most one. Never returns empty chunks.
pub fn partition_range(lo: i64, hi: i64, chunks: usize) -> Vec<(i64, i64)> {
    if lo > hi || chunks == 0 {
        return Vec::new();
    }
    let total = (hi as i128 - lo as i128 + 1) as u128;
    let chunks = (chunks as u128).min(total);
    let base = total / chunks;
    let extra = total % chunks;
    let mut out = Vec::with_capacity(chunks as usize);
    let mut start = lo as i128;
    for i in 0..chunks {
        let size = base + u128::from(i < extra);
        let end = start + size as i128 - 1;
        out.push((start as i64, end as i64));
        start = end + 1;
    }
    out
}

struct ChunkResult {
    cycles: BTreeSet<Cycle>,
    unresolved: u64,
    scanned: u64,
}

fn scan_chunk(map: &Map, lo: i64, hi: i64, limits: &Limits) -> ChunkResult {
    let mut out = ChunkResult { cycles: BTreeSet::new(), unresolved: 0, scanned: 0 };
    // Members of cycles already found; seeds landing here need no detection.
    let mut known: std::collections::HashSet<BigInt> = std::collections::HashSet::new();
    for seed in lo..=hi {
        out.scanned += 1;
        let n = BigInt::from(seed);
        if known.contains(&n) {
            continue;
        }
        match detect_cycle(map, &n, limits) {
            Ok(cycle) => {
                if !out.cycles.contains(&cycle) {
                    known.extend(cycle.members().iter().cloned());
                    out.cycles.insert(cycle);
                }
            }
            Err(_) => out.unresolved += 1,
        }
    }
    out
}

fn certificates(map: &Map, cycle: &Cycle, checks: CheckSet) -> Vec<CertificateReport> {
    let mut out = Vec::new();
    match map {
        Map::Piecewise(pw) => {
            if checks.rotation {
                out.extend(verify_rotation_identity(map, cycle).ok());
            }
            if checks.sum {
                out.extend(verify_sum_identity(map, cycle).ok());
            }
            if checks.eq1 && pw.is_collatz() {
                out.extend(verify_eq1(cycle).ok());
            }
        }
        Map::Special(SpecialMap::InverseCollatz) => {
            if checks.inverse {
                if let Ok(inv) = verify_inverse_identities(cycle) {
                    out.push(inv.identity);
                    out.push(inv.inequality);
                }
            }
        }
    }
    out
}

pub fn search_range(map: &Map, config: &SearchConfig) -> Result<SearchResult, SearchError> {
    if config.lo > config.hi {
        return Err(SearchError::EmptyRange { lo: config.lo, hi: config.hi });
    }
    if config.workers == 0 {
        return Err(SearchError::NoWorkers);
    }
    let chunks = partition_range(config.lo, config.hi, config.workers);
    let partials: Vec<ChunkResult> = if chunks.len() == 1 {
        vec![scan_chunk(map, config.lo, config.hi, &config.limits)]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> =
                chunks.iter().map(|&(lo, hi)| scope.spawn(move || scan_chunk(map, lo, hi, &config.limits))).collect();
            handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
        })
    };

    let mut merged = BTreeSet::new();
    let mut unresolved = 0;
    let mut scanned = 0;
    for part in partials {
        merged.extend(part.cycles);
        unresolved += part.unresolved;
        scanned += part.scanned;
    }
    let mut cycles: Vec<Cycle> = merged.into_iter().collect();
    cycles.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
    let cycles = cycles
        .into_iter()
        .map(|cycle| FoundCycle { length: cycle.len(), certificates: certificates(map, &cycle, config.checks), cycle })
        .collect();

    Ok(SearchResult {
        map: crate::mapdef::IntegerMap::label(map),
        lo: config.lo,
        hi: config.hi,
        seeds_scanned: scanned,
        unresolved,
        cycles,
    })
}
