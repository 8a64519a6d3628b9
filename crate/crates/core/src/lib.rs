//! Discrete-spectrum accumulation for two-dimensional Schrödinger and Dirac
//! operators with dipole-type potentials.
//!
//! The exterior operator `H_{a,b} = -Δ - (a + b x₁/|x|)/|x|²` on `|x| > 1`
//! separates into Mathieu channels ([`mathieu`]) times radial Bessel
//! problems of imaginary order ([`bessel_im`]). Counting the zeros of
//! `K_{iν}` gives `N_{(-∞,E)}` per channel ([`channels`]); a finite
//! difference Sturm count in `ln r` checks the same numbers independently
//! and handles the Neumann case ([`oracle_radial`]). [`bounds`] covers the
//! eigenvalue-count inequalities for general planar potentials.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference values in tests are kept exactly as printed by the oracle.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod bessel_im;
pub mod bounds;
pub mod channels;
pub mod error;
pub mod mathieu;
pub mod numerics;
pub mod oracle_radial;

pub use error::{Error, Result};
pub use numerics::{Tolerances, Tridiagonal};
