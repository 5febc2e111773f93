//! Piecewise polynomial integer maps.
//!
//! A [`PiecewiseMap`] with modulus `p` sends
//!
//! ```text
//! x  ->  (a_0 + a_1 x + ... + a_N1 x^N1) / p    when p | x
//! x  ->   b_0 + b_1 x + ... + b_N2 x^N2         otherwise
//! ```
//!
//! The first branch is only integer-valued on multiples of `p` when `p | a_0`,
//! so construction enforces that. [`SpecialMap`] covers the one branching map
//! we need that does not have this shape (the inverse Collatz map).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("modulus must be at least 2 (got {0})")]
    ModulusTooSmall(String),
    #[error("modulus {0} does not fit in 64 bits")]
    ModulusTooLarge(String),
    #[error("divisible branch is not integral: p = {p} does not divide a_0 = {a0}")]
    NonIntegralBranch { p: u64, a0: BigInt },
    #[error("coefficient sequence for branch {0} is empty")]
    EmptyCoefficients(&'static str),
    #[error("unknown builtin map `{0}` (expected `collatz` or `inverse-collatz`)")]
    UnknownBuiltin(String),
}

/// Which branch of a map fired on a given input.
///
/// For [`SpecialMap::InverseCollatz`], `Divisible` marks the `(n - 1) / 3`
/// branch and `NonDivisible` the doubling branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTag {
    Divisible,
    NonDivisible,
}

impl BranchTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchTag::Divisible => "divisible",
            BranchTag::NonDivisible => "non_divisible",
        }
    }
}

/// Anything that can be iterated as a total map `Z -> Z`.
pub trait IntegerMap: Sync {
    fn eval(&self, x: &BigInt) -> (BigInt, BranchTag);

    /// Short human-readable identity, carried by orbits and cycles.
    fn label(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseMap {
    p: u64,
    a: Vec<BigInt>,
    b: Vec<BigInt>,
    name: Option<String>,
}

fn normalize(mut coeffs: Vec<BigInt>) -> Vec<BigInt> {
    while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
        coeffs.pop();
    }
    coeffs
}

/// Horner evaluation of `c_0 + c_1 x + ... + c_N x^N`.
pub(crate) fn horner(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

impl PiecewiseMap {
    /// Validates and normalizes a map. Trailing zero coefficients are dropped.
    pub fn new(p: u64, a: Vec<BigInt>, b: Vec<BigInt>) -> Result<Self, MapError> {
        if p < 2 {
            return Err(MapError::ModulusTooSmall(p.to_string()));
        }
        if a.is_empty() {
            return Err(MapError::EmptyCoefficients("divisible"));
        }
        if b.is_empty() {
            return Err(MapError::EmptyCoefficients("otherwise"));
        }
        let a = normalize(a);
        let b = normalize(b);
        if !a[0].is_multiple_of(&BigInt::from(p)) {
            return Err(MapError::NonIntegralBranch { p, a0: a[0].clone() });
        }
        Ok(Self { p, a, b, name: None })
    }

    /// Like [`PiecewiseMap::new`] but with small integer coefficients.
    pub fn from_i64(p: u64, a: &[i64], b: &[i64]) -> Result<Self, MapError> {
        Self::new(p, a.iter().copied().map(BigInt::from).collect(), b.iter().copied().map(BigInt::from).collect())
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn collatz() -> Self {
        Self::from_i64(2, &[0, 1], &[1, 3]).expect("collatz coefficients are valid").with_name("collatz")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn p_big(&self) -> BigInt {
        BigInt::from(self.p)
    }

    /// Numerator coefficients of the divisible branch.
    pub fn a(&self) -> &[BigInt] {
        &self.a
    }

    /// Coefficients of the non-divisible branch.
    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Largest degree over both branches.
    pub fn max_degree(&self) -> usize {
        self.a.len().max(self.b.len()) - 1
    }

    pub fn branch_of(&self, x: &BigInt) -> BranchTag {
        if x.is_multiple_of(&self.p_big()) {
            BranchTag::Divisible
        } else {
            BranchTag::NonDivisible
        }
    }

    /// Coefficients of the per-term summands that appear in the cycle and
    /// correspondence identities:
    ///
    /// ```text
    /// divisible:     a_0 + (a_1 - 1) x + a_2 x^2 + ...
    /// non-divisible: p b_0 + (p b_1 - 1) x + p b_2 x^2 + ...
    /// ```
    pub fn summand_coeffs(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let p = self.p_big();
        let mut div = self.a.clone();
        let mut non: Vec<BigInt> = self.b.iter().map(|c| c * &p).collect();
        for poly in [&mut div, &mut non] {
            if poly.len() < 2 {
                poly.resize(2, BigInt::zero());
            }
            poly[1] -= 1;
        }
        (div, non)
    }

    /// True when the coefficients are exactly those of the Collatz map.
    pub fn is_collatz(&self) -> bool {
        let c = Self::collatz();
        self.p == c.p && self.a == c.a && self.b == c.b
    }
}

impl IntegerMap for PiecewiseMap {
    fn eval(&self, x: &BigInt) -> (BigInt, BranchTag) {
        match self.branch_of(x) {
            BranchTag::Divisible => {
                let num = horner(&self.a, x);
                debug_assert!(num.is_multiple_of(&self.p_big()));
                (num / self.p_big(), BranchTag::Divisible)
            }
            BranchTag::NonDivisible => (horner(&self.b, x), BranchTag::NonDivisible),
        }
    }

    fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => format!("piecewise(p={}, a={:?}, b={:?})", self.p, fmt_coeffs(&self.a), fmt_coeffs(&self.b)),
        }
    }
}

fn fmt_coeffs(c: &[BigInt]) -> Vec<String> {
    c.iter().map(ToString::to_string).collect()
}

/// Branching maps outside the `p | x` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialMap {
    /// `n -> (n - 1) / 3` when `n` is even and `3 | n - 1`, else `n -> 2n`.
    InverseCollatz,
}

impl SpecialMap {
    pub fn name(self) -> &'static str {
        match self {
            SpecialMap::InverseCollatz => "inverse-collatz",
        }
    }
}

impl IntegerMap for SpecialMap {
    fn eval(&self, x: &BigInt) -> (BigInt, BranchTag) {
        match self {
            SpecialMap::InverseCollatz => {
                let three = BigInt::from(3);
                let dec = x - BigInt::one();
                if x.is_even() && dec.is_multiple_of(&three) {
                    (dec / three, BranchTag::Divisible)
                } else {
                    (x * 2, BranchTag::NonDivisible)
                }
            }
        }
    }

    fn label(&self) -> String {
        self.name().to_string()
    }
}

/// Either kind of map; what the CLI and search operate on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Map {
    Piecewise(PiecewiseMap),
    Special(SpecialMap),
}

impl Map {
    pub fn as_piecewise(&self) -> Option<&PiecewiseMap> {
        match self {
            Map::Piecewise(m) => Some(m),
            Map::Special(_) => None,
        }
    }
}

impl From<PiecewiseMap> for Map {
    fn from(m: PiecewiseMap) -> Self {
        Map::Piecewise(m)
    }
}

impl From<SpecialMap> for Map {
    fn from(m: SpecialMap) -> Self {
        Map::Special(m)
    }
}

impl IntegerMap for Map {
    fn eval(&self, x: &BigInt) -> (BigInt, BranchTag) {
        match self {
            Map::Piecewise(m) => m.eval(x),
            Map::Special(m) => m.eval(x),
        }
    }

    fn label(&self) -> String {
        match self {
            Map::Piecewise(m) => m.label(),
            Map::Special(m) => m.label(),
        }
    }
}

impl fmt::Display for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn builtin(name: &str) -> Result<Map, MapError> {
    match name {
        "collatz" => Ok(Map::Piecewise(PiecewiseMap::collatz())),
        "inverse-collatz" => Ok(Map::Special(SpecialMap::InverseCollatz)),
        other => Err(MapError::UnknownBuiltin(other.to_string())),
    }
}

/// `true` when `|x|` has at most `bits` significant bits.
pub(crate) fn within_bits(x: &BigInt, bits: u64) -> bool {
    x.abs().bits() <= bits
}
