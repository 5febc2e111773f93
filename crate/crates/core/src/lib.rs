//! Piecewise polynomial integer maps: orbits, cycle detection, truncated
//! p-adic arithmetic and exact certificates for the identities every cycle
//! of such a map satisfies.
//!
//! ```
//! use num_bigint::BigInt;
//! use polycycle::{builtin, certify, orbit};
//!
//! let collatz = builtin("collatz").unwrap();
//! let cycle = orbit::detect_cycle(&collatz, &BigInt::from(-5), &orbit::Limits::default()).unwrap();
//! assert_eq!(cycle.len(), 5);
//! assert!(certify::verify_eq1(&cycle).unwrap().passed());
//! ```

pub mod certify;
pub mod cli;
pub mod mapdef;
pub mod mapdsl;
pub mod orbit;
pub mod padic;
pub mod search;
mod serde_big;

pub use mapdef::{builtin, BranchTag, IntegerMap, Map, MapError, PiecewiseMap, SpecialMap};
pub use orbit::{Cycle, CycleStats, Limits, Orbit};
pub use padic::PadicTrunc;
