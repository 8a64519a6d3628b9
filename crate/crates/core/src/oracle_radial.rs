//! Finite-difference Sturm counting for the radial channels of `H_{a,b}`.
//!
//! A channel with order `ν` solves `-f'' - f'/r - ν²f/r² = -λ f` on
//! `r > 1`. With `f = r^{-1/2} u` this is `-u'' - (ν² + 1/4) u / r² = -λ u`,
//! and with `r = e^t`, `u = e^{t/2} v` it becomes
//!
//! ```text
//! -v'' - ν² v = -λ e^{2t} v,   t ∈ (0, T).
//! ```
//!
//! The two substitutions cancel (`v(t) = f(e^t)`), so a Neumann condition
//! `f'(1) = 0` is `v'(0) = 0`: since `u' = e^{t/2}(v' + v/2)` and
//! `u'(1) - u(1)/2 = f'(1)`, the Robin coefficient `1/2 - 1/2` vanishes.
//! The Neumann row uses the half-cell stencil (ghost-node reflection, row
//! scaled by one half) so the stiffness matrix stays symmetric. Dirichlet at
//! `t = 0` drops the boundary node; the outer end `t = T` is always
//! Dirichlet.
//!
//! Counting generalized eigenvalues below `E` reduces to counting negative
//! eigenvalues of `A - E·W` because the weight `W = diag(e^{2t_j})` is
//! positive definite.

use serde::Serialize;

use crate::channels::{Boundary, ChannelSet, ChannelStatus, Count};
use crate::error::{Error, Result};
use crate::numerics::{sturm_count, Tridiagonal};

/// Extra length in `ln r` beyond the turning point `ln(1/√(-E))`.
pub const DEFAULT_MARGIN: f64 = 6.0;
pub const MIN_NODES: usize = 16;
/// Grid spacing in `t` used by [`RadialGrid::for_energy`] for `ν ≤ 1`.
pub const DEFAULT_SPACING: f64 = 0.004;

/// Uniform grid on `t = ln r ∈ [0, T]` with `nodes` interior points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub length: f64,
    pub nodes: usize,
}

impl RadialGrid {
    pub fn new(length: f64, nodes: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!(
                "grid length must be positive, got {length}"
            )));
        }
        if nodes < MIN_NODES {
            return Err(Error::invalid(format!(
                "radial grid needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        Ok(Self { length, nodes })
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.nodes + 1) as f64
    }

    /// Smallest `T` considered adequate for energy `e < 0`.
    pub fn required_length(e: f64, margin: f64) -> f64 {
        (-0.5 * (-e).ln()).max(0.0) + margin
    }

    pub fn is_adequate(&self, e: f64) -> bool {
        self.length >= Self::required_length(e, DEFAULT_MARGIN)
    }

    /// Default grid for energies down to `e`, resolving oscillations up to
    /// order `nu_max`.
    pub fn for_energy(e: f64, nu_max: f64) -> Self {
        let length = Self::required_length(e, DEFAULT_MARGIN);
        let h = DEFAULT_SPACING / nu_max.max(1.0);
        let nodes = ((length / h).ceil() as usize).max(MIN_NODES);
        Self { length, nodes }
    }

    fn check(&self, e: f64) -> Result<()> {
        if !(e < 0.0) {
            return Err(Error::invalid(format!("energy must be negative, got {e}")));
        }
        if !self.is_adequate(e) {
            return Err(Error::GridInadequate {
                length: self.length,
                required: Self::required_length(e, DEFAULT_MARGIN),
            });
        }
        Ok(())
    }
}

/// Stiffness matrix and diagonal mass weights of one discretized channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrices {
    pub stiffness: Tridiagonal,
    pub weights: Vec<f64>,
}

impl ChannelMatrices {
    /// Generalized eigenvalues below `e`, i.e. negative eigenvalues of
    /// `A - e·W`.
    pub fn count_below(&self, e: f64) -> usize {
        let diag = self
            .stiffness
            .diag()
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| d - e * w)
            .collect();
        let shifted = Tridiagonal::new(diag, self.stiffness.offdiag().to_vec())
            .expect("shift preserves shape");
        sturm_count(&shifted, 0.0)
    }
}

/// Discretizes `-v'' - ν² v = E e^{2t} v` on the grid.
pub fn discretize_channel(nu_sq: f64, grid: &RadialGrid, boundary: Boundary) -> ChannelMatrices {
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let first = match boundary {
        Boundary::Dirichlet => 1,
        Boundary::Neumann => 0,
    };
    let mut diag = Vec::with_capacity(grid.nodes + 1);
    let mut weights = Vec::with_capacity(grid.nodes + 1);
    for j in first..=grid.nodes {
        let w = (2.0 * j as f64 * h).exp();
        if j == 0 {
            diag.push(inv_h2 - 0.5 * nu_sq);
            weights.push(0.5 * w);
        } else {
            diag.push(2.0 * inv_h2 - nu_sq);
            weights.push(w);
        }
    }
    let offdiag = vec![-inv_h2; diag.len() - 1];
    ChannelMatrices {
        stiffness: Tridiagonal::new(diag, offdiag).expect("channel matrix shape"),
        weights,
    }
}

/// Eigenvalues below `e` of one channel with `ν² = nu_sq`.
pub fn count_channel(nu_sq: f64, e: f64, grid: &RadialGrid, boundary: Boundary) -> Result<usize> {
    grid.check(e)?;
    if nu_sq <= 0.0 {
        return Ok(0);
    }
    Ok(discretize_channel(nu_sq, grid, boundary).count_below(e))
}

/// Oracle counts for every channel of `channels` at energy `e`, using the
/// boundary condition of the channel set's spec.
pub fn count_below(channels: &ChannelSet, e: f64, grid: &RadialGrid) -> Result<Count> {
    count_below_with(channels, e, grid, channels.spec.boundary)
}

/// Same as [`count_below`] with an explicit boundary condition.
pub fn count_below_with(
    channels: &ChannelSet,
    e: f64,
    grid: &RadialGrid,
    boundary: Boundary,
) -> Result<Count> {
    grid.check(e)?;
    let per_channel = channels
        .channels
        .iter()
        .map(|ch| match ch.status {
            ChannelStatus::Open { nu } => count_channel(nu * nu, e, grid, boundary),
            ChannelStatus::Closed => Ok(0),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Count::from_channels(per_channel))
}

/// One row of a grid-refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub length: f64,
    pub nodes: usize,
    pub count: usize,
}

/// Counts of one channel over a sequence of refining grids; fails unless
/// the last two agree.
pub fn convergence_study(
    nu_sq: f64,
    e: f64,
    grids: &[RadialGrid],
    boundary: Boundary,
) -> Result<Vec<ConvergenceRow>> {
    let rows = grids
        .iter()
        .map(|g| {
            Ok(ConvergenceRow {
                length: g.length,
                nodes: g.nodes,
                count: count_channel(nu_sq, e, g, boundary)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match rows.as_slice() {
        [.., x, y] if x.count != y.count => Err(Error::no_convergence(format!(
            "oracle count for ν²={nu_sq}, E={e}: {} → {}",
            x.count, y.count
        ))),
        _ => Ok(rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel_im::{count_zeros_above, zero_refined};
    use crate::channels::{decompose, DipoleSpec};
    use crate::numerics::Tolerances;
    use nalgebra::DMatrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn free_channel_is_positive_definite() {
        let grid = RadialGrid::new(5.0, 40).unwrap();
        let m = discretize_channel(0.0, &grid, Boundary::Dirichlet);
        assert_eq!(sturm_count(&m.stiffness, 0.0), 0);
        assert_eq!(m.stiffness.len(), 40);
    }

    #[test]
    fn weights_follow_exponential() {
        let grid = RadialGrid::new(2.0, 19).unwrap();
        let h = grid.spacing();
        let d = discretize_channel(1.0, &grid, Boundary::Dirichlet);
        for (j, w) in d.weights.iter().enumerate() {
            assert!((w - (2.0 * (j + 1) as f64 * h).exp()).abs() < 1e-12 * w);
        }
        let n = discretize_channel(1.0, &grid, Boundary::Neumann);
        assert_eq!(n.weights.len(), 20);
        assert_eq!(n.weights[0], 0.5);
    }

    #[test]
    fn lowest_eigenvalue_is_first_zero_squared() {
        let grid = RadialGrid::new(20.0, 2000).unwrap();
        let m = discretize_channel(1.0, &grid, Boundary::Dirichlet);
        let k1 = zero_refined(1.0, 1, &tol()).unwrap();
        let exact = -k1 * k1;
        // exactly one eigenvalue below 0.99·exact, none below 1.01·exact
        assert_eq!(m.count_below(1.01 * exact), 0);
        assert_eq!(m.count_below(0.99 * exact), 1);
    }

    #[test]
    fn matches_bessel_route_for_unit_order() {
        let spec = DipoleSpec::new(1.0, 0.0, Boundary::Dirichlet).unwrap();
        let channels = decompose(&spec, &tol()).unwrap();
        let grid = RadialGrid::new(24.0, 6000).unwrap();
        let count = count_below(&channels, -1e-6, &grid).unwrap();
        assert_eq!(count.total, 2);
        assert_eq!(count.total, count_zeros_above(1.0, 1e-3, &tol()));
    }

    #[test]
    fn no_open_channels_no_states() {
        let spec = DipoleSpec::new(0.0, 0.0, Boundary::Dirichlet).unwrap();
        let channels = decompose(&spec, &tol()).unwrap();
        for e in [-1e-2, -1e-6] {
            let grid = RadialGrid::for_energy(e, 1.0);
            assert_eq!(count_below(&channels, e, &grid).unwrap().total, 0);
        }
    }

    #[test]
    fn neumann_exceeds_dirichlet_by_at_most_one() {
        let spec = DipoleSpec::new(0.0, 1.0, Boundary::Dirichlet).unwrap();
        let channels = decompose(&spec, &tol()).unwrap();
        for e in [-1e-2, -1e-3, -1e-4, -1e-6] {
            let grid = RadialGrid::for_energy(e, 1.0);
            let d = count_below_with(&channels, e, &grid, Boundary::Dirichlet).unwrap();
            let n = count_below_with(&channels, e, &grid, Boundary::Neumann).unwrap();
            for (x, y) in d.per_channel.iter().zip(&n.per_channel) {
                assert!(y >= x && y - x <= 1);
            }
        }
        for nu in [0.3, 1.0, 2.0, 3.0] {
            for e in [-1e-2, -1e-4, -1e-6] {
                let grid = RadialGrid::for_energy(e, nu);
                let d = count_channel(nu * nu, e, &grid, Boundary::Dirichlet).unwrap();
                let n = count_channel(nu * nu, e, &grid, Boundary::Neumann).unwrap();
                assert!(n >= d && n - d <= 1);
            }
        }
    }

    #[test]
    fn counts_monotone_in_length() {
        let h = 0.005;
        for nu in [0.6152, 1.0, 2.0] {
            let mut prev = 0;
            for length in [11.0, 12.0, 16.0, 24.0, 32.0] {
                let grid = RadialGrid::new(length, (length / h) as usize).unwrap();
                let c = count_channel(nu * nu, -1e-4, &grid, Boundary::Dirichlet).unwrap();
                assert!(c >= prev);
                prev = c;
            }
        }
    }

    #[test]
    fn refinement_study_stabilizes() {
        let grids: Vec<RadialGrid> = [500, 1000, 2000, 4000]
            .iter()
            .map(|&n| RadialGrid::new(11.0, n).unwrap())
            .collect();
        let rows = convergence_study(1.0, -1e-4, &grids, Boundary::Dirichlet).unwrap();
        assert!(rows[1..].iter().all(|r| r.count == rows[1].count));
        assert_eq!(rows[3].count, count_zeros_above(1.0, 1e-2, &tol()));

        let closed = convergence_study(0.0, -1e-4, &grids, Boundary::Dirichlet).unwrap();
        assert!(closed.iter().all(|r| r.count == 0));
    }

    #[test]
    fn inadequate_grid_is_rejected() {
        let grid = RadialGrid::new(5.0, 500).unwrap();
        assert!(matches!(
            count_channel(1.0, -1e-6, &grid, Boundary::Dirichlet),
            Err(Error::GridInadequate { .. })
        ));
        assert!(RadialGrid::new(5.0, 4).is_err());
    }

    #[test]
    fn shifted_count_matches_dense_generalized_problem() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let n_nodes = rng.random_range(16..40);
            let grid = RadialGrid::new(rng.random_range(1.0..4.0), n_nodes).unwrap();
            let nu_sq = rng.random_range(0.0..9.0);
            let boundary = if rng.random_bool(0.5) {
                Boundary::Dirichlet
            } else {
                Boundary::Neumann
            };
            let m = discretize_channel(nu_sq, &grid, boundary);
            let n = m.weights.len();
            let (d, off) = (m.stiffness.diag(), m.stiffness.offdiag());
            let a = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
                0 => d[i],
                1 => off[i.min(j)],
                _ => 0.0,
            });
            // W^{-1/2} A W^{-1/2} has the generalized eigenvalues
            let s = DMatrix::from_fn(n, n, |i, j| {
                a[(i, j)] / (m.weights[i] * m.weights[j]).sqrt()
            });
            let eigs = s.symmetric_eigenvalues();
            for _ in 0..5 {
                let e = rng.random_range(-50.0..5.0);
                let dense = eigs.iter().filter(|&&l| l < e).count();
                assert_eq!(m.count_below(e), dense);
            }
        }
    }
}
