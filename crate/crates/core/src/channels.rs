//! Channel decomposition of `H_{a,b} = -Δ - (a + b x₁/|x|)/|x|²` on the
//! exterior of the unit disk, eigenvalue counting, and the accumulation
//! slopes.
//!
//! Separating `ψ = f(r) g(φ)` gives one radial problem per Mathieu
//! eigenvalue `m_k` of `M_b`. A channel is open when `ν_k² = a - m_k > 0`;
//! its Dirichlet eigenvalues are `-k_{ν,n}²`, so
//! `N_{(-∞,E)} = Σ_k #{n : k_{ν_k,n} ≥ √(-E)}` and
//! `N / |ln(-E)| → tr √((M_b - a)₋) / (2π)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel_im::{count_zeros_above, count_zeros_floor};
use crate::error::{Error, Result};
use crate::mathieu::{eigenvalues_below, spectrum, trace_sqrt_neg};
use crate::numerics::Tolerances;
use crate::oracle_radial::{self, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

/// Problem instance: strengths `a`, `b` and the condition at `|x| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipoleSpec {
    pub a: f64,
    pub b: f64,
    pub boundary: Boundary,
}

impl DipoleSpec {
    pub fn new(a: f64, b: f64, boundary: Boundary) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::invalid("a must be finite"));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!(
                "dipole strength b must be finite and nonnegative, got {b}"
            )));
        }
        Ok(Self { a, b, boundary })
    }

    pub fn with_boundary(self, boundary: Boundary) -> Self {
        Self { boundary, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ChannelStatus {
    Open { nu: f64 },
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    pub index: usize,
    pub mathieu_eigenvalue: f64,
    pub status: ChannelStatus,
}

impl Channel {
    pub fn order(&self) -> Option<f64> {
        match self.status {
            ChannelStatus::Open { nu } => Some(nu),
            ChannelStatus::Closed => None,
        }
    }
}

/// Angular channels through the first closed one plus a margin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSet {
    pub spec: DipoleSpec,
    pub channels: Vec<Channel>,
}

impl ChannelSet {
    pub fn open_orders(&self) -> Vec<f64> {
        self.channels.iter().filter_map(Channel::order).collect()
    }

    pub fn max_order(&self) -> f64 {
        self.open_orders().into_iter().fold(0.0, f64::max)
    }
}

/// Closed channels listed after the last open one.
pub const CLOSED_MARGIN: usize = 2;

pub fn decompose(spec: &DipoleSpec, tol: &Tolerances) -> Result<ChannelSet> {
    let open = eigenvalues_below(spec.b, spec.a, tol)?.len();
    let eigs = spectrum(spec.b, open + CLOSED_MARGIN, tol)?.eigenvalues;
    let channels = eigs
        .into_iter()
        .enumerate()
        .map(|(index, m)| Channel {
            index,
            mathieu_eigenvalue: m,
            status: if index < open {
                ChannelStatus::Open {
                    nu: (spec.a - m).max(0.0).sqrt(),
                }
            } else {
                ChannelStatus::Closed
            },
        })
        .collect();
    Ok(ChannelSet {
        spec: *spec,
        channels,
    })
}

/// Total eigenvalue count with its per-channel breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Count {
    pub total: usize,
    pub per_channel: Vec<usize>,
}

impl Count {
    pub fn from_channels(per_channel: Vec<usize>) -> Self {
        Self {
            total: per_channel.iter().sum(),
            per_channel,
        }
    }
}

/// `N_{(-∞,E)}(H_{a,b})` for the spec's boundary condition.
pub fn count_eigenvalues(spec: &DipoleSpec, e: f64, tol: &Tolerances) -> Result<Count> {
    let channels = decompose(spec, tol)?;
    count_in(&channels, e, tol)
}

/// Counts for an already decomposed spec. Dirichlet uses the Bessel-zero
/// route; Neumann has no closed form and is delegated to the radial oracle
/// on a grid adequate for `e`.
pub fn count_in(channels: &ChannelSet, e: f64, tol: &Tolerances) -> Result<Count> {
    if !(e < 0.0) {
        return Err(Error::invalid(format!("energy must be negative, got {e}")));
    }
    match channels.spec.boundary {
        Boundary::Dirichlet => Ok(per_open_channel(channels, |nu| {
            count_zeros_above(nu, (-e).sqrt(), tol)
        })),
        Boundary::Neumann => {
            let grid = RadialGrid::for_energy(e, channels.max_order());
            oracle_radial::count_below(channels, e, &grid)
        }
    }
}

/// Dirichlet counts from the leading-order floor formula alone.
pub fn count_dirichlet_floor(channels: &ChannelSet, e: f64) -> Count {
    per_open_channel(channels, |nu| count_zeros_floor(nu, (-e).sqrt()))
}

fn per_open_channel(channels: &ChannelSet, mut count: impl FnMut(f64) -> usize) -> Count {
    Count::from_channels(
        channels
            .channels
            .iter()
            .map(|ch| ch.order().map_or(0, &mut count))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub energy: f64,
    pub total: usize,
    pub per_channel: Vec<usize>,
}

/// Counting function on a log-spaced energy grid with its fitted slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingCurve {
    pub spec: DipoleSpec,
    /// Ordered by increasing energy.
    pub samples: Vec<CurveSample>,
    pub fitted_slope: f64,
    pub theoretical_slope: f64,
    pub residual: f64,
}

/// `points` energies from `e_lo` to `e_hi` (both negative), uniform in
/// `ln(-E)`.
pub fn log_energy_grid(e_lo: f64, e_hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(e_lo < e_hi && e_hi < 0.0) {
        return Err(Error::invalid(format!(
            "need E_lo < E_hi < 0, got [{e_lo}, {e_hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::invalid("need at least two energies"));
    }
    let (l0, l1) = ((-e_lo).ln(), (-e_hi).ln());
    Ok((0..points)
        .map(|i| -(l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `tr √((M_b - a)₋) / (2π)`.
pub fn theoretical_slope(spec: &DipoleSpec, tol: &Tolerances) -> Result<f64> {
    Ok(trace_sqrt_neg(spec.b, spec.a, tol)? / (2.0 * PI))
}

pub fn counting_curve(
    spec: &DipoleSpec,
    e_lo: f64,
    e_hi: f64,
    points: usize,
    tol: &Tolerances,
) -> Result<CountingCurve> {
    let energies = log_energy_grid(e_lo, e_hi, points)?;
    let channels = decompose(spec, tol)?;
    // one oracle grid for the whole curve keeps the Neumann counts monotone
    let grid = RadialGrid::for_energy(e_hi, channels.max_order());
    let samples = energies
        .iter()
        .map(|&e| {
            let count = match spec.boundary {
                Boundary::Dirichlet => count_in(&channels, e, tol)?,
                Boundary::Neumann => oracle_radial::count_below(&channels, e, &grid)?,
            };
            Ok(CurveSample {
                energy: e,
                total: count.total,
                per_channel: count.per_channel,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = energies.iter().map(|e| (-e).ln().abs()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.total as f64).collect();
    let fitted_slope = least_squares_slope(&xs, &ys);
    let theoretical_slope = theoretical_slope(spec, tol)?;
    Ok(CountingCurve {
        spec: *spec,
        samples,
        fitted_slope,
        theoretical_slope,
        residual: (fitted_slope - theoretical_slope).abs(),
    })
}

/// Accumulation rate of `N_{(-E,E)}(D_φ) / |ln(1-E)|` for the massive
/// Dirac operator with dipole moment `(b, 0)`: `tr √((M_{2b})₋) / π`.
///
/// Squaring the Dirac operator leaves, per spinor component, a Schrödinger
/// problem with potential `-2d`, i.e. `H_{0,2b}`; the two components double
/// the exterior slope.
pub fn dirac_slope(b: f64, tol: &Tolerances) -> Result<f64> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::invalid("b must be finite and nonnegative"));
    }
    Ok(trace_sqrt_neg(2.0 * b, 0.0, tol)? / PI)
}
