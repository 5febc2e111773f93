//! Truncated p-adic integers.
//!
//! A [`PadicTrunc`] is the class of an integer modulo `p^K`, stored as its
//! least nonnegative residue. Digits are derived on demand.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::mapdef::{horner, IntegerMap, Map, PiecewiseMap};

pub const DEFAULT_PRECISION: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("p-adic modulus must be at least 2 (got {0})")]
    InvalidModulus(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(u32, u32),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("map `{0}` has no coefficient form; the correspondence series needs a piecewise polynomial map")]
    UnsupportedMap(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicTrunc {
    p: u64,
    precision: u32,
    residue: BigInt,
    modulus: BigInt,
}

fn check_params(p: u64, precision: u32) -> Result<(), PadicError> {
    if p < 2 {
        return Err(PadicError::InvalidModulus(p));
    }
    if precision == 0 {
        return Err(PadicError::ZeroPrecision);
    }
    Ok(())
}

impl PadicTrunc {
    pub fn from_integer(n: &BigInt, p: u64, precision: u32) -> Result<Self, PadicError> {
        check_params(p, precision)?;
        let modulus = num_traits::pow(BigInt::from(p), precision as usize);
        Ok(Self { p, precision, residue: n.mod_floor(&modulus), modulus })
    }

    pub fn zero(p: u64, precision: u32) -> Result<Self, PadicError> {
        Self::from_integer(&BigInt::zero(), p, precision)
    }

    pub fn one(p: u64, precision: u32) -> Result<Self, PadicError> {
        Self::from_integer(&BigInt::one(), p, precision)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Least nonnegative representative, in `[0, p^K)`.
    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    /// `p^K`.
    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    /// Little-endian base-`p` digits; always `K` of them.
    pub fn digits(&self) -> Vec<u64> {
        let p = BigInt::from(self.p);
        let mut rest = self.residue.clone();
        (0..self.precision)
            .map(|_| {
                let (q, r) = rest.div_mod_floor(&p);
                rest = q;
                u64::try_from(r).expect("digit below p")
            })
            .collect()
    }

    /// Reduces to a lower precision.
    pub fn truncate(&self, precision: u32) -> Result<Self, PadicError> {
        if precision > self.precision {
            return Err(PadicError::PrecisionMismatch(self.precision, precision));
        }
        Self::from_integer(&self.residue, self.p, precision)
    }

    fn compatible(&self, other: &Self) -> Result<(), PadicError> {
        if self.p != other.p {
            return Err(PadicError::ModulusMismatch(self.p, other.p));
        }
        if self.precision != other.precision {
            return Err(PadicError::PrecisionMismatch(self.precision, other.precision));
        }
        Ok(())
    }

    fn with_residue(&self, value: BigInt) -> Self {
        Self {
            p: self.p,
            precision: self.precision,
            residue: value.mod_floor(&self.modulus),
            modulus: self.modulus.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.compatible(other)?;
        Ok(self.with_residue(&self.residue + &other.residue))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.compatible(other)?;
        Ok(self.with_residue(&self.residue - &other.residue))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.compatible(other)?;
        Ok(self.with_residue(&self.residue * &other.residue))
    }

    pub fn neg(&self) -> Self {
        self.with_residue(-&self.residue)
    }
}

impl fmt::Debug for PadicTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.p, self.precision)
    }
}

impl fmt::Display for PadicTrunc {
    /// Digits most significant first, e.g. `...1011` for 11 in Z_2.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.digits();
        f.write_str("...")?;
        let sep = if self.p > 10 { "," } else { "" };
        let rendered: Vec<String> = digits.iter().rev().map(u64::to_string).collect();
        f.write_str(&rendered.join(sep))
    }
}

/// `(1 - p^m)^{-1}` modulo `p^K`, as the finite geometric sum of `p^{l m}`
/// over `l m < K`.
pub fn geom_inverse(p: u64, m: u32, precision: u32) -> Result<PadicTrunc, PadicError> {
    check_params(p, precision)?;
    let m = m.max(1) as usize;
    let pb = BigInt::from(p);
    let sum: BigInt = (0..precision as usize).step_by(m).map(|e| num_traits::pow(pb.clone(), e)).sum();
    PadicTrunc::from_integer(&sum, p, precision)
}

/// The correspondence series `sum_i s(alpha_i) p^i` mod `p^K` over the orbit
/// `alpha_0 = n, alpha_{i+1} = f(alpha_i)`, where `s` is the branch summand
/// from [`PiecewiseMap::summand_coeffs`].
///
/// Only `alpha_i mod p^{K-i}` influences term `i` modulo `p^K`, and that
/// residue is determined by `alpha_{i-1} mod p^{K-i+1}`, so the orbit is
/// carried at shrinking precision. This keeps high-degree maps tractable
/// where the exact orbit would grow doubly exponentially.
pub fn correspondence_series(map: &PiecewiseMap, n: &BigInt, precision: u32) -> Result<PadicTrunc, PadicError> {
    let p = map.p();
    let out = PadicTrunc::zero(p, precision)?;
    let pb = BigInt::from(p);
    let (div, non) = map.summand_coeffs();

    let mut window = out.modulus.clone();
    let mut alpha = n.mod_floor(&window);
    let mut weight = BigInt::one();
    let mut total = BigInt::zero();
    for _ in 0..precision {
        let coeffs = if alpha.is_multiple_of(&pb) { &div } else { &non };
        let term = horner(coeffs, &alpha).mod_floor(&window);
        total += term * &weight;
        let (next, _) = map.eval(&alpha);
        weight *= &pb;
        window /= &pb;
        alpha = next.mod_floor(&window);
    }
    Ok(out.with_residue(total))
}

/// `series + n` mod `p^K`; zero whenever the correspondence holds.
pub fn correspondence_residual(map: &Map, n: &BigInt, precision: u32) -> Result<PadicTrunc, PadicError> {
    let pw = map.as_piecewise().ok_or_else(|| PadicError::UnsupportedMap(map.label()))?;
    let series = correspondence_series(pw, n, precision)?;
    let seed = PadicTrunc::from_integer(n, pw.p(), precision)?;
    series.add(&seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapdef::builtin;
    use proptest::prelude::*;

    fn pt(n: i64, p: u64, k: u32) -> PadicTrunc {
        PadicTrunc::from_integer(&BigInt::from(n), p, k).unwrap()
    }

    #[test]
    fn from_integer_examples() {
        let x = pt(-1, 2, 4);
        assert_eq!(x.digits(), vec![1, 1, 1, 1]);
        assert_eq!(x.residue(), &BigInt::from(15));
        assert_eq!(pt(10, 2, 4).digits(), vec![0, 1, 0, 1]);
        let y = pt(-7, 3, 3);
        assert_eq!(y.residue(), &BigInt::from(20));
        assert_eq!(y.digits(), vec![2, 0, 2]);
        assert_eq!(y.to_string(), "...202");
    }

    #[test]
    fn invalid_parameters() {
        assert_eq!(PadicTrunc::from_integer(&BigInt::one(), 1, 4), Err(PadicError::InvalidModulus(1)));
        assert_eq!(PadicTrunc::from_integer(&BigInt::one(), 2, 0), Err(PadicError::ZeroPrecision));
    }

    #[test]
    fn ring_op_examples() {
        assert!(pt(1, 2, 8).add(&pt(-1, 2, 8)).unwrap().is_zero());
        let prod = pt(3, 2, 6).mul(&pt(-21, 2, 6)).unwrap();
        assert_eq!(prod, pt(-63, 2, 6));
        assert_eq!(prod.residue(), &BigInt::one());
        assert!(pt(0, 5, 3).neg().is_zero());
        assert_eq!(pt(1, 2, 4).add(&pt(1, 2, 5)), Err(PadicError::PrecisionMismatch(4, 5)));
        assert_eq!(pt(1, 2, 4).mul(&pt(1, 3, 4)), Err(PadicError::ModulusMismatch(2, 3)));
    }

    #[test]
    fn geom_inverse_examples() {
        let g = geom_inverse(2, 3, 6).unwrap();
        assert_eq!(g.residue(), &BigInt::from(9));
        assert!(g.mul(&pt(-7, 2, 6)).unwrap().residue().is_one());
        let g = geom_inverse(3, 1, 2).unwrap();
        assert_eq!(g.residue(), &BigInt::from(4));
        assert_eq!(geom_inverse(2, 10, 6).unwrap().residue(), &BigInt::one());
        assert_eq!(geom_inverse(2, 6, 6).unwrap().residue(), &BigInt::one());
    }

    // Exact big-integer evaluation of the Collatz series, independent of the
    // shrinking-window trick.
    fn collatz_series_oracle(n: i64, k: u32) -> BigInt {
        let modulus = BigInt::one() << k;
        let mut x = BigInt::from(n);
        let mut total = BigInt::zero();
        for i in 0..k {
            if x.is_odd() {
                total += (&x * 5 + 2) << i;
                x = x * 3 + 1;
            } else {
                x /= 2;
            }
        }
        total.mod_floor(&modulus)
    }

    #[test]
    fn correspondence_examples() {
        let c = builtin("collatz").unwrap();
        assert_eq!(collatz_series_oracle(1, 6), BigInt::from(63));
        let pw = c.as_piecewise().unwrap();
        assert_eq!(correspondence_series(pw, &BigInt::one(), 6).unwrap().residue(), &BigInt::from(63));
        assert!(correspondence_residual(&c, &BigInt::one(), 6).unwrap().is_zero());

        let s3 = correspondence_series(pw, &BigInt::from(3), 32).unwrap();
        assert_eq!(s3.residue(), &collatz_series_oracle(3, 32));
        assert_eq!((collatz_series_oracle(3, 32) + 3) % (BigInt::one() << 32u32), BigInt::zero());
        assert!(correspondence_residual(&c, &BigInt::from(3), 32).unwrap().is_zero());

        let sq: Map = PiecewiseMap::from_i64(2, &[0, 1], &[1, 0, 1]).unwrap().into();
        let s = correspondence_series(sq.as_piecewise().unwrap(), &BigInt::one(), 4).unwrap();
        assert_eq!(s.residue(), &BigInt::from(15));
        assert!(correspondence_residual(&sq, &BigInt::one(), 4).unwrap().is_zero());
    }

    #[test]
    fn correspondence_matches_oracle_on_many_seeds() {
        let c = PiecewiseMap::collatz();
        for n in -300..=300 {
            let s = correspondence_series(&c, &BigInt::from(n), 40).unwrap();
            assert_eq!(s.residue(), &collatz_series_oracle(n, 40), "n = {n}");
        }
    }

    #[test]
    fn special_map_rejected() {
        let inv = builtin("inverse-collatz").unwrap();
        assert!(matches!(correspondence_residual(&inv, &BigInt::one(), 8), Err(PadicError::UnsupportedMap(_))));
    }

    fn arb_p() -> impl Strategy<Value = u64> {
        prop::sample::select(vec![2u64, 3, 5])
    }

    proptest! {
        #[test]
        fn ring_laws(p in arb_p(), k in 1u32..=40, x in any::<i64>(), y in any::<i64>(), z in any::<i64>()) {
            let (a, b, c) = (pt(x, p, k), pt(y, p, k), pt(z, p, k));
            prop_assert_eq!(a.add(&b)?.add(&c)?, a.add(&b.add(&c)?)?);
            prop_assert_eq!(a.mul(&b)?.mul(&c)?, a.mul(&b.mul(&c)?)?);
            prop_assert_eq!(a.mul(&b)?, b.mul(&a)?);
            prop_assert_eq!(a.mul(&b.add(&c)?)?, a.mul(&b)?.add(&a.mul(&c)?)?);
            prop_assert!(a.add(&a.neg())?.is_zero());
            prop_assert_eq!(pt(x, p, k).add(&pt(y, p, k))?, PadicTrunc::from_integer(&(BigInt::from(x) + y), p, k)?);
            prop_assert_eq!(pt(x, p, k).mul(&pt(y, p, k))?, PadicTrunc::from_integer(&(BigInt::from(x) * y), p, k)?);
        }

        #[test]
        fn digits_reconstruct_residue(p in arb_p(), k in 1u32..=64, x in any::<i64>()) {
            let a = pt(x, p, k);
            let back = a.digits().iter().rev().fold(BigInt::zero(), |acc, d| acc * p + d);
            prop_assert_eq!(&back, a.residue());
        }

        #[test]
        fn correspondence_precision_coherent(n in -200i64..=200, k in 2u32..=48, cut in 1u32..48) {
            let c = PiecewiseMap::collatz();
            let cut = cut.min(k - 1).max(1);
            let hi = correspondence_series(&c, &BigInt::from(n), k)?;
            let lo = correspondence_series(&c, &BigInt::from(n), cut)?;
            prop_assert_eq!(hi.truncate(cut)?, lo);
        }
    }
}
