//! Orbit iteration, cycle detection and cycle statistics.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::mapdef::{within_bits, BranchTag, IntegerMap};
use crate::serde_big;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
pub const DEFAULT_MAX_MAGNITUDE_BITS: u64 = 1024;

/// Bounds that make iteration total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of map applications.
    pub max_steps: u64,
    /// Terms whose absolute value needs more than this many bits stop iteration.
    pub max_magnitude_bits: u64,
    /// Stop as soon as this value is produced (it is kept as the last term).
    pub stop_target: Option<BigInt>,
    /// Stop as soon as a term repeats an earlier one (used by [`iterate`] only).
    pub stop_on_cycle: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            max_magnitude_bits: DEFAULT_MAX_MAGNITUDE_BITS,
            stop_target: None,
            stop_on_cycle: true,
        }
    }
}

impl Limits {
    /// Exactly `steps` applications unless the magnitude bound fires.
    pub fn steps(steps: u64) -> Self {
        Self { max_steps: steps, stop_on_cycle: false, ..Self::default() }
    }

    pub fn with_max_steps(mut self, steps: u64) -> Self {
        self.max_steps = steps;
        self
    }

    pub fn with_magnitude_bits(mut self, bits: u64) -> Self {
        self.max_magnitude_bits = bits;
        self
    }

    pub fn with_target(mut self, target: impl Into<BigInt>) -> Self {
        self.stop_target = Some(target.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    StepLimit,
    MagnitudeLimit,
    CycleClosed,
    TargetReached,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub map: String,
    #[serde(with = "serde_big")]
    pub seed: BigInt,
    #[serde(with = "serde_big::vec")]
    pub terms: Vec<BigInt>,
    /// `branch_tags[i]` is the branch applied to `terms[i]`. The last term has
    /// no tag because it was not mapped.
    pub branch_tags: Vec<BranchTag>,
    pub truncation: TruncationReason,
}

impl Orbit {
    pub fn steps(&self) -> usize {
        self.terms.len() - 1
    }
}

pub fn iterate<M: IntegerMap + ?Sized>(map: &M, n: &BigInt, limits: &Limits) -> Orbit {
    let mut terms = vec![n.clone()];
    let mut tags = Vec::new();
    let mut seen: HashSet<BigInt> = HashSet::new();
    if limits.stop_on_cycle {
        seen.insert(n.clone());
    }
    let finish =
        |terms, tags, truncation| Orbit { map: map.label(), seed: n.clone(), terms, branch_tags: tags, truncation };

    if limits.stop_target.as_ref() == Some(n) {
        return finish(terms, tags, TruncationReason::TargetReached);
    }
    if !within_bits(n, limits.max_magnitude_bits) {
        return finish(terms, tags, TruncationReason::MagnitudeLimit);
    }
    for _ in 0..limits.max_steps {
        let (next, tag) = map.eval(terms.last().expect("orbit is never empty"));
        tags.push(tag);
        let reason = if limits.stop_target.as_ref() == Some(&next) {
            Some(TruncationReason::TargetReached)
        } else if limits.stop_on_cycle && !seen.insert(next.clone()) {
            Some(TruncationReason::CycleClosed)
        } else if !within_bits(&next, limits.max_magnitude_bits) {
            Some(TruncationReason::MagnitudeLimit)
        } else {
            None
        };
        terms.push(next);
        if let Some(reason) = reason {
            return finish(terms, tags, reason);
        }
    }
    finish(terms, tags, TruncationReason::StepLimit)
}

/// A cycle in canonical rotation: the minimum member comes first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cycle {
    #[serde(with = "serde_big::vec")]
    members: Vec<BigInt>,
    #[serde(skip)]
    map: String,
}

impl Cycle {
    pub fn members(&self) -> &[BigInt] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn map_label(&self) -> &str {
        &self.map
    }

    pub fn min_member(&self) -> &BigInt {
        &self.members[0]
    }

    /// Members starting at index `j`, wrapping around.
    pub fn rotation(&self, j: usize) -> impl Iterator<Item = &BigInt> + '_ {
        let m = self.members.len();
        (0..m).map(move |i| &self.members[(i + j) % m])
    }

    /// Ordering used for reports: minimum member, then length, then members.
    pub fn sort_key(&self) -> (&BigInt, usize, &[BigInt]) {
        (&self.members[0], self.members.len(), &self.members)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycleError {
    #[error("empty member list")]
    Empty,
    #[error("member {value} appears more than once")]
    DuplicateMember { value: BigInt },
    #[error("not a cycle: f({from}) = {actual}, expected {expected}")]
    NotACycle { from: BigInt, expected: BigInt, actual: BigInt },
}

/// Checks that `members` is a cycle of `map` (in order) and rotates it so the
/// minimum comes first.
pub fn canonicalize<M: IntegerMap + ?Sized>(map: &M, members: &[BigInt]) -> Result<Cycle, CycleError> {
    if members.is_empty() {
        return Err(CycleError::Empty);
    }
    let mut seen = HashSet::with_capacity(members.len());
    for v in members {
        if !seen.insert(v) {
            return Err(CycleError::DuplicateMember { value: v.clone() });
        }
    }
    let m = members.len();
    for (i, from) in members.iter().enumerate() {
        let expected = &members[(i + 1) % m];
        let (actual, _) = map.eval(from);
        if &actual != expected {
            return Err(CycleError::NotACycle { from: from.clone(), expected: expected.clone(), actual });
        }
    }
    let start = members.iter().enumerate().min_by(|x, y| x.1.cmp(y.1)).map(|(i, _)| i).expect("non-empty");
    let mut rotated = members.to_vec();
    rotated.rotate_left(start);
    Ok(Cycle { members: rotated, map: map.label() })
}

/// Why [`detect_cycle`] gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no cycle found within limits ({reason:?})")]
pub struct NotFound {
    pub reason: TruncationReason,
}

/// Finds the cycle the orbit of `n` falls into.
///
/// Succeeds iff the orbit repeats within `limits.max_steps` applications
/// (`mu + lambda <= max_steps`) and every term before the first repeat fits
/// the magnitude bound. Brent's method finds the period in constant memory,
/// then the tail length is measured and the members are confirmed with an
/// exact pass through [`canonicalize`]. `stop_target` and `stop_on_cycle` are
/// ignored.
pub fn detect_cycle<M: IntegerMap + ?Sized>(map: &M, n: &BigInt, limits: &Limits) -> Result<Cycle, NotFound> {
    let bits = limits.max_magnitude_bits;
    let step = |x: &BigInt| -> Result<BigInt, NotFound> {
        let (y, _) = map.eval(x);
        if within_bits(&y, bits) {
            Ok(y)
        } else {
            Err(NotFound { reason: TruncationReason::MagnitudeLimit })
        }
    };
    if !within_bits(n, bits) {
        return Err(NotFound { reason: TruncationReason::MagnitudeLimit });
    }
    let max_steps = limits.max_steps;
    if max_steps == 0 {
        return Err(NotFound { reason: TruncationReason::StepLimit });
    }

    // With mu + lambda <= L, Brent's hare meets the tortoise at index < 3L.
    let budget = max_steps.saturating_mul(3).saturating_add(3);
    let mut power: u64 = 1;
    let mut lambda: u64 = 1;
    let mut tortoise = n.clone();
    let mut hare = step(n)?;
    let mut hare_index: u64 = 1;
    while tortoise != hare {
        if power == lambda {
            tortoise = hare.clone();
            power *= 2;
            lambda = 0;
        }
        if hare_index >= budget {
            return Err(NotFound { reason: TruncationReason::StepLimit });
        }
        hare = step(&hare)?;
        hare_index += 1;
        lambda += 1;
    }

    // Tail length: walk two pointers lambda apart from the seed.
    let mut front = n.clone();
    for _ in 0..lambda {
        front = step(&front)?;
    }
    let mut back = n.clone();
    let mut mu: u64 = 0;
    while back != front {
        back = step(&back)?;
        front = step(&front)?;
        mu += 1;
    }
    if mu + lambda > max_steps {
        return Err(NotFound { reason: TruncationReason::StepLimit });
    }

    let mut members = Vec::with_capacity(lambda as usize);
    let mut cur = back;
    for _ in 0..lambda {
        let next = map.eval(&cur).0;
        members.push(cur);
        cur = next;
    }
    let cycle = canonicalize(map, &members).expect("Brent period yields a genuine cycle");
    Ok(cycle)
}

/// Count, sum and power sums over the members that took one branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchStats {
    #[serde(with = "serde_big")]
    pub count: BigInt,
    #[serde(with = "serde_big")]
    pub sum: BigInt,
    /// `power_sums[k]` is the sum of `alpha^k`; index 0 is the count.
    #[serde(with = "serde_big::vec")]
    pub power_sums: Vec<BigInt>,
}

impl BranchStats {
    fn empty(max_k: usize) -> Self {
        Self { count: BigInt::zero(), sum: BigInt::zero(), power_sums: vec![BigInt::zero(); max_k + 1] }
    }

    fn add(&mut self, x: &BigInt) {
        self.count += 1;
        self.sum += x;
        let mut pow = BigInt::one();
        for slot in self.power_sums.iter_mut() {
            *slot += &pow;
            pow *= x;
        }
    }

    pub fn power_sum(&self, k: usize) -> &BigInt {
        &self.power_sums[k]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleStats {
    pub m: usize,
    #[serde(with = "serde_big")]
    pub sum: BigInt,
    pub divisible: BranchStats,
    pub non_divisible: BranchStats,
}

impl CycleStats {
    pub fn branch(&self, tag: BranchTag) -> &BranchStats {
        match tag {
            BranchTag::Divisible => &self.divisible,
            BranchTag::NonDivisible => &self.non_divisible,
        }
    }
}

/// Statistics of any finite sequence of terms, classified by `map`.
pub fn term_stats<'a, M, I>(map: &M, terms: I, max_k: usize) -> CycleStats
where
    M: IntegerMap + ?Sized,
    I: IntoIterator<Item = &'a BigInt>,
{
    let mut stats = CycleStats {
        m: 0,
        sum: BigInt::zero(),
        divisible: BranchStats::empty(max_k),
        non_divisible: BranchStats::empty(max_k),
    };
    for x in terms {
        stats.m += 1;
        stats.sum += x;
        match map.eval(x).1 {
            BranchTag::Divisible => stats.divisible.add(x),
            BranchTag::NonDivisible => stats.non_divisible.add(x),
        }
    }
    stats
}

/// Definition-style statistics of a cycle, with power sums up to `max_k`
/// (at least 1).
pub fn cycle_stats<M: IntegerMap + ?Sized>(map: &M, cycle: &Cycle, max_k: usize) -> CycleStats {
    term_stats(map, cycle.members(), max_k.max(1))
}
