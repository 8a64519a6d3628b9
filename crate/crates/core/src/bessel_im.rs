//! Modified Bessel function of imaginary order `K_{iν}(x)` and its zeros.
//!
//! For small argument `K_{iν}(x)` oscillates like
//! `sin(ν ln(x/2) - φ_ν)` with `φ_ν = arg Γ(1+iν)`, so its zeros, counted
//! from the right, accumulate geometrically at the origin:
//!
//! ```text
//! k_{ν,n} = 2 exp(-(nπ - φ_ν)/ν) · (1 + exp(-2(nπ - φ_ν)/ν)/(1+ν²) + …)
//! ```
//!
//! The asymptotic value seeds a bracketed root search on the integral
//! representation `K_{iν}(x) = ∫₀^∞ e^{-x cosh t} cos(νt) dt`.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bracket_root, quad_semiinf, Tolerances};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest argument for which `e^{-x}` is still a normal float.
const MAX_ARGUMENT: f64 = 700.0;

/// `arg Γ(1+iν)`, continuous in `ν` with value `0` at `ν = 0`.
///
/// Uses `-γν + Σ_{k≥1} (ν/k - arctan(ν/k))`; the tail beyond `K` terms is
/// summed by Euler–Maclaurin with the closed-form integral
/// `∫_K^∞ (ν/x - arctan(ν/x)) dx = K·arctan(ν/K) + (ν/2)·ln(1 + ν²/K²) - ν`.
pub fn phase(nu: f64) -> f64 {
    if nu == 0.0 {
        return 0.0;
    }
    let term = |k: f64| nu / k - (nu / k).atan();
    let cutoff = 1000.0 + (20.0 * nu.abs()).ceil();
    let head: f64 = (1..=cutoff as usize).map(|k| term(k as f64)).sum();

    let k = cutoff;
    let integral = k * (nu / k).atan() + 0.5 * nu * (nu * nu / (k * k)).ln_1p() - nu;
    let derivative = -nu.powi(3) / (k * k * (k * k + nu * nu));
    let tail = integral - 0.5 * term(k) - derivative / 12.0;

    -EULER_GAMMA * nu + head + tail
}

/// `K_{iν}(x)` for real `ν` and `x > 0`.
pub fn eval_k(nu: f64, x: f64, tol: &Tolerances) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("K_iν needs x > 0, got {x}")));
    }
    if x > MAX_ARGUMENT {
        return Err(Error::underflow(format!("K_iν({x})")));
    }
    quad_semiinf(|t| (-x * t.cosh()).exp() * (nu * t).cos(), tol)
}

/// Scaled distance `(nπ - φ_ν)/ν` of the `n`-th zero from `x = 2` in `ln x`.
fn log_depth(nu: f64, n: usize) -> f64 {
    (n as f64 * PI - phase(nu)) / nu
}

/// Relative size of the first correction term in the zero asymptotics.
pub fn correction_size(nu: f64, n: usize) -> f64 {
    (-2.0 * log_depth(nu, n)).exp() / (1.0 + nu * nu)
}

/// Asymptotic `n`-th zero (counted from the right, `n ≥ 1`) including the
/// first correction term.
pub fn zero_asymptotic(nu: f64, n: usize) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::invalid(format!("order must be positive, got {nu}")));
    }
    if n == 0 {
        return Err(Error::invalid("zeros are indexed from 1"));
    }
    let depth = log_depth(nu, n);
    let leading = 2.0 * (-depth).exp();
    if leading < f64::MIN_POSITIVE {
        return Err(Error::underflow(format!("zero {n} of K_i{nu}")));
    }
    Ok(leading * (1.0 + (-2.0 * depth).exp() / (1.0 + nu * nu)))
}

const BRACKET_SAMPLES: usize = 17;

/// The `n`-th zero refined by root finding on [`eval_k`].
///
/// Returns [`Error::Underflow`] when the first asymptotic correction is
/// already below `root_tol`: the asymptotic value is then exact at working
/// precision and the caller should use it directly.
pub fn zero_refined(nu: f64, n: usize, tol: &Tolerances) -> Result<f64> {
    let guess = zero_asymptotic(nu, n)?;
    if correction_size(nu, n) < tol.root_tol {
        return Err(Error::underflow(format!(
            "refinement of zero {n} of K_i{nu} (correction below root tolerance)"
        )));
    }
    let f = |x: f64| eval_k(nu, x, tol);

    // sample the bracket [guess/2, 2·guess] log-uniformly and keep the sign
    // change nearest to the guess
    let (lo, hi) = (0.5 * guess, 2.0 * guess);
    let ratio = (hi / lo).ln() / (BRACKET_SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..BRACKET_SAMPLES)
        .map(|i| lo * (ratio * i as f64).exp())
        .collect();
    let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let best = xs
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0].signum() != v[1].signum() || v[0] == 0.0)
        .map(|(x, _)| (x[0], x[1]))
        .min_by(|a, b| {
            let da = ((a.0 * a.1).sqrt() / guess).ln().abs();
            let db = ((b.0 * b.1).sqrt() / guess).ln().abs();
            da.total_cmp(&db)
        })
        .ok_or(Error::NoSignChange { lo, hi })?;

    let mut failure = None;
    let root = bracket_root(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        best.0,
        best.1,
        tol,
    );
    match failure {
        Some(e) => Err(e),
        None => root,
    }
}

/// One row of a [`ZeroTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroEntry {
    pub n: usize,
    pub asymptotic: f64,
    pub refined: Option<f64>,
}

impl ZeroEntry {
    /// `|refined - asymptotic| / asymptotic`, when a refined value exists.
    pub fn relative_gap(&self) -> Option<f64> {
        self.refined
            .map(|r| (r - self.asymptotic).abs() / self.asymptotic)
    }
}

/// Zeros `k_{ν,n}` for a range of indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTable {
    pub nu: f64,
    pub entries: Vec<ZeroEntry>,
}

impl ZeroTable {
    /// Builds entries for `indices`, stopping at the first zero whose
    /// asymptotic value underflows. Refinement failures leave `refined`
    /// empty.
    pub fn build(nu: f64, indices: RangeInclusive<usize>, tol: &Tolerances) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::invalid(format!("order must be positive, got {nu}")));
        }
        let mut entries = Vec::new();
        for n in indices {
            let asymptotic = match zero_asymptotic(nu, n) {
                Ok(v) => v,
                Err(Error::Underflow { .. }) => break,
                Err(e) => return Err(e),
            };
            let refined = match zero_refined(nu, n, tol) {
                Ok(v) => Some(v),
                Err(Error::Underflow { .. } | Error::NoSignChange { .. }) => None,
                Err(e) => return Err(e),
            };
            entries.push(ZeroEntry {
                n,
                asymptotic,
                refined,
            });
        }
        Ok(Self { nu, entries })
    }
}

/// `#{n ≥ 1 : k_{ν,n} ≥ s}` from the leading-order asymptotics,
/// `max(0, ⌊(ν ln(2/s) + φ_ν)/π⌋)`.
pub fn count_zeros_floor(nu: f64, s: f64) -> usize {
    if !(nu > 0.0) || !(s > 0.0) {
        return 0;
    }
    let v = ((nu * (2.0 / s).ln() + phase(nu)) / PI).floor();
    if v > 0.0 {
        v as usize
    } else {
        0
    }
}

/// [`count_zeros_floor`] corrected by at most one using the refined (or,
/// when refinement is below resolution, asymptotic) zeros at the boundary
/// indices.
pub fn count_zeros_above(nu: f64, s: f64, tol: &Tolerances) -> usize {
    let n0 = count_zeros_floor(nu, s);
    if !(nu > 0.0) || !(s > 0.0) {
        return n0;
    }
    // a zero we cannot represent lies below any positive s
    let zero = |n: usize| {
        zero_refined(nu, n, tol)
            .or_else(|_| zero_asymptotic(nu, n))
            .unwrap_or(0.0)
    };
    if n0 >= 1 && zero(n0) < s {
        n0 - 1
    } else if zero(n0 + 1) >= s {
        n0 + 1
    } else {
        n0
    }
}
