//! Test-only oracles shared by the integration suites. Nothing here calls
//! into the cycle detector it is compared against.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::Signed;
use polycycle::{IntegerMap, PiecewiseMap};
use rand::rngs::StdRng;
use rand::Rng;

/// Random valid map with `p` from {2, 3, 5}, coefficients in [-3, 3] and
/// both branch degrees at most `max_degree`.
pub fn random_map(rng: &mut StdRng, max_degree: usize) -> PiecewiseMap {
    let p = [2u64, 3, 5][rng.gen_range(0..3)];
    let a_len = rng.gen_range(1..=max_degree + 1);
    let b_len = rng.gen_range(1..=max_degree + 1);
    let mut a: Vec<i64> = (0..a_len).map(|_| rng.gen_range(-3..=3)).collect();
    let b: Vec<i64> = (0..b_len).map(|_| rng.gen_range(-3..=3)).collect();
    let a0_choices: Vec<i64> = (-3..=3).filter(|v: &i64| v % p as i64 == 0).collect();
    a[0] = a0_choices[rng.gen_range(0..a0_choices.len())];
    PiecewiseMap::from_i64(p, &a, &b).expect("constructed valid")
}

/// Outcome of the naive reference detector: the canonical members, or None.
pub type RefCycle = Option<Vec<BigInt>>;

/// Stores every term; a cycle is found iff some term repeats at an index
/// `t <= max_steps`, with every earlier term of at most `bits` bits.
pub fn reference_detect(map: &PiecewiseMap, seed: i64, max_steps: u64, bits: u64) -> RefCycle {
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut terms: Vec<BigInt> = Vec::new();
    let mut x = BigInt::from(seed);
    for t in 0..=max_steps as usize {
        if let Some(&start) = seen.get(&x) {
            let mut members = terms[start..].to_vec();
            let min_at = (0..members.len()).min_by(|&i, &j| members[i].cmp(&members[j])).unwrap();
            members.rotate_left(min_at);
            return Some(members);
        }
        if x.abs().bits() > bits {
            return None;
        }
        seen.insert(x.clone(), t);
        terms.push(x.clone());
        x = map.eval(&x).0;
    }
    None
}

/// Single-threaded reference search: distinct canonical cycles (ordered by
/// minimum member, then length) and the unresolved seed count.
pub fn reference_search(map: &PiecewiseMap, lo: i64, hi: i64, max_steps: u64, bits: u64) -> (Vec<Vec<BigInt>>, u64) {
    let mut found = BTreeSet::new();
    let mut unresolved = 0;
    for seed in lo..=hi {
        match reference_detect(map, seed, max_steps, bits) {
            Some(c) => {
                found.insert((c[0].clone(), c.len(), c));
            }
            None => unresolved += 1,
        }
    }
    (found.into_iter().map(|(_, _, c)| c).collect(), unresolved)
}

pub fn bigs(v: &[i64]) -> Vec<BigInt> {
    v.iter().copied().map(BigInt::from).collect()
}
