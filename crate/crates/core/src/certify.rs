//! Exact certificates for the cycle and orbit identities.
//!
//! Every check is big-integer equality (or, for the inverse map, one
//! inequality); nothing here has a tolerance.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::mapdef::{horner, BranchTag, IntegerMap, Map, PiecewiseMap, SpecialMap};
use crate::orbit::{
    canonicalize, cycle_stats, iterate, term_stats, Cycle, CycleError, CycleStats, Limits, TruncationReason,
};
use crate::serde_big;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("map `{0}` has no coefficient form")]
    UnsupportedMap(String),
    #[error("cycle does not belong to map `{map}`: {source}")]
    NotACycle {
        map: String,
        #[source]
        source: CycleError,
    },
    #[error("not a Collatz cycle: {0}")]
    NotCollatz(CycleError),
    #[error("not an inverse Collatz cycle: {0}")]
    NotAnInverseCycle(CycleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Per-rotation identity `alpha_j (p^m - 1) = sum_i s(alpha_{i+j}) p^i`.
    RotationIdentity,
    /// `(p - 1) S = sum_i s(alpha_i)`, evaluated per term and from statistics.
    SumIdentity,
    /// `S = 5 S_odd + 2 N_odd` for Collatz cycles.
    Eq1,
    /// `3 S = 5 S_D + N_D` for inverse Collatz cycles.
    InverseIdentity,
    /// `2 S <= 5 S_D - N_dbl` for positive inverse Collatz cycles.
    InverseInequality,
    /// `S - (5 S_odd + 2 N_odd) = 2 (n - 1)` over the orbit `n, ..., 2`.
    OrbitIdentity,
}

impl Check {
    pub fn short_name(self) -> &'static str {
        match self {
            Check::RotationIdentity => "t3",
            Check::SumIdentity => "t4",
            Check::Eq1 => "eq1",
            Check::InverseIdentity => "inv",
            Check::InverseInequality => "inv_ineq",
            Check::OrbitIdentity => "orbit",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    NotApplicable,
    Unresolved,
}

impl Outcome {
    pub fn is_failure(self) -> bool {
        self == Outcome::Fail
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RotationCheck {
    pub j: usize,
    #[serde(with = "serde_big")]
    pub lhs: BigInt,
    #[serde(with = "serde_big")]
    pub rhs: BigInt,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub check: Check,
    pub outcome: Outcome,
    #[serde(with = "serde_big::option")]
    pub lhs: Option<BigInt>,
    #[serde(with = "serde_big::option")]
    pub rhs: Option<BigInt>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rotations: Vec<RotationCheck>,
    /// Named intermediate quantities (statistics, alternative evaluations).
    #[serde(serialize_with = "ser_quantities")]
    pub quantities: BTreeMap<String, BigInt>,
}

fn ser_quantities<S: serde::Serializer>(q: &BTreeMap<String, BigInt>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(q.len()))?;
    for (k, v) in q {
        map.serialize_entry(k, &v.to_string())?;
    }
    map.end()
}

impl CertificateReport {
    fn new(check: Check, outcome: Outcome, lhs: Option<BigInt>, rhs: Option<BigInt>) -> Self {
        Self { check, outcome, lhs, rhs, rotations: Vec::new(), quantities: BTreeMap::new() }
    }

    fn equality(check: Check, lhs: BigInt, rhs: BigInt) -> Self {
        let outcome = Outcome::from_bool(lhs == rhs);
        Self::new(check, outcome, Some(lhs), Some(rhs))
    }

    fn with(mut self, name: &str, value: impl Into<BigInt>) -> Self {
        self.quantities.insert(name.to_string(), value.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn quantity(&self, name: &str) -> Option<&BigInt> {
        self.quantities.get(name)
    }

    /// First rotation index whose identity fails.
    pub fn first_failing_rotation(&self) -> Option<usize> {
        self.rotations.iter().find(|r| !r.holds).map(|r| r.j)
    }
}

fn recheck(map: &PiecewiseMap, cycle: &Cycle) -> Result<(), CertifyError> {
    canonicalize(map, cycle.members())
        .map(|_| ())
        .map_err(|source| CertifyError::NotACycle { map: map.label(), source })
}

fn piecewise(map: &Map) -> Result<&PiecewiseMap, CertifyError> {
    map.as_piecewise().ok_or_else(|| CertifyError::UnsupportedMap(map.label()))
}

/// Branch summand evaluated from the coefficients.
fn summand(map: &PiecewiseMap, coeffs: &(Vec<BigInt>, Vec<BigInt>), x: &BigInt) -> BigInt {
    match map.branch_of(x) {
        BranchTag::Divisible => horner(&coeffs.0, x),
        BranchTag::NonDivisible => horner(&coeffs.1, x),
    }
}

/// Right side of the sum identity computed term by term.
fn per_term_rhs<'a>(map: &PiecewiseMap, terms: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    let coeffs = map.summand_coeffs();
    terms.into_iter().map(|x| summand(map, &coeffs, x)).sum()
}

/// Right side of the sum identity from counts, sums and power sums:
///
/// ```text
/// a_0 N_D + (a_1 - 1) S_D + sum_{k>=2} a_k S_D^(k)
///   + p b_0 N_N + (p b_1 - 1) S_N + sum_{k>=2} p b_k S_N^(k)
/// ```
pub fn stats_rhs(map: &PiecewiseMap, stats: &CycleStats) -> BigInt {
    let (div, non) = map.summand_coeffs();
    let branch_total = |coeffs: &[BigInt], tag: BranchTag| -> BigInt {
        let b = stats.branch(tag);
        coeffs.iter().enumerate().map(|(k, c)| c * b.power_sum(k)).sum()
    };
    branch_total(&div, BranchTag::Divisible) + branch_total(&non, BranchTag::NonDivisible)
}

/// Checks the rotation identity for every `j`, plus the consistency of the
/// per-rotation sums with the sum identity:
/// `sum_j rhs_j = ((p^m - 1) / (p - 1)) * sum_i s(alpha_i)`.
pub fn verify_rotation_identity(map: &Map, cycle: &Cycle) -> Result<CertificateReport, CertifyError> {
    let pw = piecewise(map)?;
    recheck(pw, cycle)?;
    let p = pw.p_big();
    let m = cycle.len();
    let coeffs = pw.summand_coeffs();
    let p_m_minus_1 = num_traits::pow(p.clone(), m) - 1;
    let summands: Vec<BigInt> = cycle.members().iter().map(|x| summand(pw, &coeffs, x)).collect();

    let mut rotations = Vec::with_capacity(m);
    for j in 0..m {
        let lhs = &cycle.members()[j] * &p_m_minus_1;
        let mut rhs = BigInt::zero();
        let mut weight = BigInt::one();
        for i in 0..m {
            rhs += &summands[(i + j) % m] * &weight;
            weight *= &p;
        }
        let holds = lhs == rhs;
        rotations.push(RotationCheck { j, lhs, rhs, holds });
    }

    let rotation_total: BigInt = rotations.iter().map(|r| &r.rhs).sum();
    let sum_rhs: BigInt = summands.iter().sum();
    let geometric = &p_m_minus_1 / (&p - 1);
    let scaled = &sum_rhs * &geometric;
    let all_hold = rotations.iter().all(|r| r.holds);
    let summation_ok = rotation_total == scaled;

    let first = &rotations[0];
    let mut report = CertificateReport::new(
        Check::RotationIdentity,
        Outcome::from_bool(all_hold && summation_ok),
        Some(first.lhs.clone()),
        Some(first.rhs.clone()),
    )
    .with("m", m)
    .with("p_pow_m_minus_1", p_m_minus_1)
    .with("rotation_rhs_total", rotation_total)
    .with("sum_identity_rhs_scaled", scaled)
    .with("summation_consistent", u8::from(summation_ok));
    report.rotations = rotations;
    Ok(report)
}

/// Checks `(p - 1) S` against both the per-term and the statistics form of
/// the right-hand side; all three must agree.
pub fn verify_sum_identity(map: &Map, cycle: &Cycle) -> Result<CertificateReport, CertifyError> {
    let pw = piecewise(map)?;
    recheck(pw, cycle)?;
    let stats = cycle_stats(pw, cycle, pw.max_degree());
    let lhs = (pw.p_big() - 1) * &stats.sum;
    let per_term = per_term_rhs(pw, cycle.members());
    let from_stats = stats_rhs(pw, &stats);
    let outcome = Outcome::from_bool(lhs == per_term && per_term == from_stats);
    Ok(CertificateReport::new(Check::SumIdentity, outcome, Some(lhs), Some(per_term.clone()))
        .with("rhs_per_term", per_term)
        .with("rhs_statistics", from_stats)
        .with("S", stats.sum.clone())
        .with("N_div", stats.divisible.count.clone())
        .with("S_div", stats.divisible.sum.clone())
        .with("N_nondiv", stats.non_divisible.count.clone())
        .with("S_nondiv", stats.non_divisible.sum.clone()))
}

/// `S = 5 S_odd + 2 N_odd` on a Collatz cycle.
pub fn verify_eq1(cycle: &Cycle) -> Result<CertificateReport, CertifyError> {
    let collatz = PiecewiseMap::collatz();
    canonicalize(&collatz, cycle.members()).map_err(CertifyError::NotCollatz)?;
    let mut s = BigInt::zero();
    let mut s_odd = BigInt::zero();
    let mut n_odd = BigInt::zero();
    for x in cycle.members() {
        s += x;
        if x.is_odd() {
            s_odd += x;
            n_odd += 1;
        }
    }
    let rhs = &s_odd * 5 + &n_odd * 2;
    Ok(CertificateReport::equality(Check::Eq1, s.clone(), rhs).with("S", s).with("S_odd", s_odd).with("N_odd", n_odd))
}

/// Branch statistics of an inverse Collatz cycle. `D` counts members sent
/// through `(n - 1) / 3`; `dbl` counts members that are doubled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InverseCycleStats {
    #[serde(with = "serde_big")]
    pub sum: BigInt,
    #[serde(with = "serde_big")]
    pub s_d: BigInt,
    #[serde(with = "serde_big")]
    pub n_d: BigInt,
    #[serde(with = "serde_big")]
    pub s_dbl: BigInt,
    #[serde(with = "serde_big")]
    pub n_dbl: BigInt,
}

pub fn inverse_cycle_stats(cycle: &Cycle) -> Result<InverseCycleStats, CertifyError> {
    let inv = SpecialMap::InverseCollatz;
    canonicalize(&inv, cycle.members()).map_err(CertifyError::NotAnInverseCycle)?;
    let mut st = InverseCycleStats {
        sum: BigInt::zero(),
        s_d: BigInt::zero(),
        n_d: BigInt::zero(),
        s_dbl: BigInt::zero(),
        n_dbl: BigInt::zero(),
    };
    for x in cycle.members() {
        st.sum += x;
        match inv.eval(x).1 {
            BranchTag::Divisible => {
                st.s_d += x;
                st.n_d += 1;
            }
            BranchTag::NonDivisible => {
                st.s_dbl += x;
                st.n_dbl += 1;
            }
        }
    }
    Ok(st)
}

/// Both inverse-map certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InverseCertificates {
    pub identity: CertificateReport,
    pub inequality: CertificateReport,
}

impl InverseCertificates {
    pub fn reports(&self) -> [&CertificateReport; 2] {
        [&self.identity, &self.inequality]
    }
}

/// `3 S = 5 S_D + N_D` always, and `2 S <= 5 S_D - N_dbl` when every member
/// is positive.
///
/// The identity follows from the cycle sum being invariant under the map:
/// `S = sum_D (x - 1) / 3 + sum_dbl 2x`. On positive cycles `S >= m`, which
/// turns the identity into the inequality.
pub fn verify_inverse_identities(cycle: &Cycle) -> Result<InverseCertificates, CertifyError> {
    let st = inverse_cycle_stats(cycle)?;
    let lhs = &st.sum * 3;
    let rhs = &st.s_d * 5 + &st.n_d;
    let identity = CertificateReport::equality(Check::InverseIdentity, lhs, rhs)
        .with("S", st.sum.clone())
        .with("S_D", st.s_d.clone())
        .with("N_D", st.n_d.clone())
        .with("S_dbl", st.s_dbl.clone())
        .with("N_dbl", st.n_dbl.clone());

    let ineq_lhs = &st.sum * 2;
    let ineq_rhs = &st.s_d * 5 - &st.n_dbl;
    let outcome = if cycle.members().iter().all(Signed::is_positive) {
        Outcome::from_bool(ineq_lhs <= ineq_rhs)
    } else {
        Outcome::NotApplicable
    };
    let inequality = CertificateReport::new(Check::InverseInequality, outcome, Some(ineq_lhs), Some(ineq_rhs));
    Ok(InverseCertificates { identity, inequality })
}

/// `S - (5 S_odd + 2 N_odd) = 2 (n - 1)` over the Collatz orbit `n, ..., 2`.
///
/// `Unresolved` when the limits fire before 2 is reached; `NotApplicable`
/// for `n < 1`.
pub fn orbit_identity_check(n: &BigInt, limits: &Limits) -> CertificateReport {
    if !n.is_positive() {
        return CertificateReport::new(Check::OrbitIdentity, Outcome::NotApplicable, None, None).with("n", n.clone());
    }
    let limits = Limits { stop_target: Some(BigInt::from(2)), stop_on_cycle: true, ..limits.clone() };
    let orbit = iterate(&PiecewiseMap::collatz(), n, &limits);
    if orbit.truncation != TruncationReason::TargetReached {
        return CertificateReport::new(Check::OrbitIdentity, Outcome::Unresolved, None, None)
            .with("n", n.clone())
            .with("length", orbit.terms.len());
    }
    let mut s = BigInt::zero();
    let mut s_odd = BigInt::zero();
    let mut n_odd = BigInt::zero();
    for x in &orbit.terms {
        s += x;
        if x.is_odd() {
            s_odd += x;
            n_odd += 1;
        }
    }
    let lhs = &s - (&s_odd * 5 + &n_odd * 2);
    let rhs = (n - 1) * 2;
    CertificateReport::equality(Check::OrbitIdentity, lhs, rhs)
        .with("n", n.clone())
        .with("length", orbit.terms.len())
        .with("S", s)
        .with("S_odd", s_odd)
        .with("N_odd", n_odd)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapRow {
    #[serde(with = "serde_big")]
    pub n: BigInt,
    #[serde(with = "serde_big")]
    pub gap: BigInt,
    pub length: usize,
}

/// For each seed whose orbit reaches `absorbing` within `limits`, the gap
/// `(p - 1) S - sum_i s(alpha_i)` over the orbit `n, ..., absorbing`
/// (both endpoints included). Seeds that never reach it are omitted.
pub fn orbit_gap_scan(
    map: &PiecewiseMap,
    seeds: std::ops::RangeInclusive<i64>,
    absorbing: &BigInt,
    limits: &Limits,
) -> Vec<GapRow> {
    let limits = Limits { stop_target: Some(absorbing.clone()), stop_on_cycle: true, ..limits.clone() };
    let p_minus_1 = map.p_big() - 1;
    seeds
        .filter_map(|n| {
            let n = BigInt::from(n);
            let orbit = iterate(map, &n, &limits);
            if orbit.truncation != TruncationReason::TargetReached {
                return None;
            }
            let stats = term_stats(map, &orbit.terms, 1);
            let gap = &p_minus_1 * &stats.sum - per_term_rhs(map, &orbit.terms);
            Some(GapRow { n, gap, length: orbit.terms.len() })
        })
        .collect()
}
