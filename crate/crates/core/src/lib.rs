//! Numerical laboratory for the Rössler system
//! `x' = -y - z`, `y' = x + a y`, `z' = b x + z (x - c)`:
//! equilibria and their spectra, the cross-section `H_p` and its first-return
//! map, invariant manifolds and heteroclinic search, periodic orbits with
//! fixed-point indices, and knot typing of closed orbits.

pub mod error;
pub mod flow;
pub mod integrator;
pub mod knot;
pub mod manifolds;
pub mod periodic;
pub mod return_map;
pub mod section;
pub mod spectral;

pub use error::{Error, Result};
pub use flow::{Params, State3};

/// Formats a float with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
