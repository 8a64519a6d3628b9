//! Spectrum of the periodic angular operator `M_b g = -g'' - b cos(φ) g`
//! on `[0, 2π)`.
//!
//! In the basis `e^{imφ}`, `m = -M..=M`, the operator is tridiagonal with
//! diagonal `m²` and off-diagonal `-b/2`, since `cos φ` couples adjacent
//! modes with weight one half. Truncation is doubled until the requested
//! eigenvalues stop moving.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{bracket_root, Tolerances, Tridiagonal};

/// Starting number of positive Fourier modes.
pub const INITIAL_MODES: usize = 16;
/// Largest truncation tried before giving up.
pub const DEFAULT_MODE_CAP: usize = 4096;

/// Tridiagonal matrix of `M_b` on modes `-modes..=modes`.
pub fn build_matrix(b: f64, modes: usize) -> Result<Tridiagonal> {
    if modes < 1 {
        return Err(Error::invalid("Mathieu truncation needs at least one mode"));
    }
    if !b.is_finite() {
        return Err(Error::invalid("dipole strength must be finite"));
    }
    let m = modes as i64;
    let diag = (-m..=m).map(|k| (k * k) as f64).collect();
    let offdiag = vec![-0.5 * b; 2 * modes];
    Tridiagonal::new(diag, offdiag)
}

/// Lowest eigenvalues of `M_b` at a converged truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MathieuSpectrum {
    pub b: f64,
    /// Number of positive modes `M` (matrix size `2M+1`).
    pub truncation: usize,
    /// Ascending, with multiplicity.
    pub eigenvalues: Vec<f64>,
    pub converged: bool,
}

impl MathieuSpectrum {
    /// Spectrum at a fixed truncation; `converged` reports whether doubling
    /// it would move any eigenvalue by more than `eig_tol`.
    pub fn at_truncation(b: f64, n_eigs: usize, modes: usize, tol: &Tolerances) -> Result<Self> {
        let coarse = lowest(b, n_eigs, modes, tol)?;
        let fine = lowest(b, n_eigs, 2 * modes, tol)?;
        Ok(Self {
            b,
            truncation: modes,
            converged: max_shift(&coarse, &fine) < tol.eig_tol,
            eigenvalues: coarse,
        })
    }

    pub fn ground(&self) -> f64 {
        self.eigenvalues[0]
    }
}

fn lowest(b: f64, n_eigs: usize, modes: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    let t = build_matrix(b, modes)?;
    Ok(t.lowest_eigenvalues(n_eigs, 1e-3 * tol.eig_tol))
}

fn max_shift(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Lowest `n_eigs` eigenvalues with the default truncation cap.
pub fn spectrum(b: f64, n_eigs: usize, tol: &Tolerances) -> Result<MathieuSpectrum> {
    spectrum_with_cap(b, n_eigs, tol, DEFAULT_MODE_CAP)
}

pub fn spectrum_with_cap(
    b: f64,
    n_eigs: usize,
    tol: &Tolerances,
    mode_cap: usize,
) -> Result<MathieuSpectrum> {
    if n_eigs == 0 {
        return Err(Error::invalid("n_eigs must be at least 1"));
    }
    tol.validate()?;
    let mut modes = INITIAL_MODES;
    while 2 * modes + 1 < 2 * n_eigs {
        modes *= 2;
    }
    let mut current = lowest(b, n_eigs, modes, tol)?;
    while 2 * modes <= mode_cap {
        let next = lowest(b, n_eigs, 2 * modes, tol)?;
        if max_shift(&current, &next) < tol.eig_tol {
            return Ok(MathieuSpectrum {
                b,
                truncation: 2 * modes,
                eigenvalues: next,
                converged: true,
            });
        }
        current = next;
        modes *= 2;
    }
    Err(Error::no_convergence(format!(
        "Mathieu spectrum for b={b} within {mode_cap} modes"
    )))
}

/// All eigenvalues of `M_b` strictly below `a`, ascending.
pub fn eigenvalues_below(b: f64, a: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    let mut n = 1;
    loop {
        let spec = spectrum(b, n, tol)?;
        if *spec.eigenvalues.last().unwrap() >= a {
            // membership from the Sturm count, not the bisection midpoints,
            // so an eigenvalue exactly at `a` stays closed
            let below = build_matrix(b, spec.truncation)?.count_below(a);
            let mut eigs = spec.eigenvalues;
            eigs.truncate(below);
            return Ok(eigs);
        }
        n *= 2;
    }
}

/// `tr √((M_b - a)₋) = Σ_k √(max(a - m_k, 0))`.
pub fn trace_sqrt_neg(b: f64, a: f64, tol: &Tolerances) -> Result<f64> {
    Ok(eigenvalues_below(b, a, tol)?
        .iter()
        .map(|m| (a - m).max(0.0).sqrt())
        .fold(0.0, |acc, x| acc + x))
}

/// Ground-state values from the two continued-fraction style fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundState {
    /// Fixed point of the three-term relation as printed in the source
    /// remark, in the rescaled normalization.
    pub paper_value: f64,
    /// Lowest characteristic value `a₀(q)` of the standard form
    /// `y'' + (a - 2q cos 2x) y = 0` at `q = 2b`, divided by four.
    pub standard_value: f64,
}

/// Both McLachlan-type fixed points for the lowest eigenvalue of `M_b`.
///
/// The standard one is independent of the matrix route: it solves
/// `a = -2q² / (4 - a - q² / (16 - a - q² / (36 - a - …)))` for the
/// smallest root.
pub fn ground_state_mclachlan(b: f64, tol: &Tolerances) -> Result<GroundState> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::invalid("b must be finite and nonnegative"));
    }
    if b == 0.0 {
        return Ok(GroundState {
            paper_value: 0.0,
            standard_value: 0.0,
        });
    }
    Ok(GroundState {
        paper_value: printed_fixed_point(b, tol)?,
        standard_value: standard_a0(2.0 * b, tol)? / 4.0,
    })
}

fn printed_fixed_point(b: f64, tol: &Tolerances) -> Result<f64> {
    let c = (b / 4.0).powi(2);
    let step = |a: f64| {
        0.25 * (-0.5 * c / (1.0 - a / 16.0)
            - c / 64.0 / (1.0 - a / 64.0)
            - c / 576.0 / (1.0 - a / 144.0))
    };
    let mut a = 0.0;
    for _ in 0..10_000 {
        let next = step(a);
        if !next.is_finite() {
            break;
        }
        if (next - a).abs() < tol.eig_tol {
            return Ok(next);
        }
        a = next;
    }
    Err(Error::no_convergence("printed McLachlan iteration"))
}

/// Depth of the continued fraction: deep enough that the neglected tail
/// `q² / (4R²)` is far below any tolerance in use.
fn fraction_depth(q: f64) -> usize {
    (q.abs().sqrt() as usize + 12).max(2 * q.abs() as usize + 12)
}

/// `-2q² / (4 - a - q²/(16 - a - …))`, evaluated bottom-up.
fn even_fraction(a: f64, q: f64, depth: usize) -> f64 {
    let q2 = q * q;
    let mut tail = 0.0;
    for r in (1..=depth).rev() {
        let rr = (2 * r) as f64;
        tail = q2 / (rr * rr - a - tail);
    }
    // tail now holds q²/(4 - a - …); the leading numerator is 2q²
    -2.0 * tail
}

fn standard_a0(q: f64, tol: &Tolerances) -> Result<f64> {
    let depth = fraction_depth(q);
    let h = |a: f64| a - even_fraction(a, q, depth);
    // a₀(q) lies in (-2|q|, 0)
    let lo = -2.0 * q.abs() - 1.0;
    let hi = 0.0;
    let steps = 256;
    let mut x0 = lo;
    let mut h0 = h(x0);
    for i in 1..=steps {
        let x1 = lo + (hi - lo) * i as f64 / steps as f64;
        let h1 = h(x1);
        if h0 < 0.0 && h1 >= 0.0 {
            let tight = Tolerances {
                root_tol: tol.root_tol.min(1e-14),
                ..*tol
            };
            let root = bracket_root(h, x0, x1, &tight)?;
            // a sign change across a pole leaves a large residual
            if h(root).abs() <= 1e-8 * (1.0 + root.abs()) {
                return Ok(root);
            }
        }
        x0 = x1;
        h0 = h1;
    }
    Err(Error::no_convergence("standard McLachlan fixed point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Dense diagonalization of the same truncated operator, independent of
    /// the Sturm bisection path.
    fn dense_ground(b: f64, modes: usize) -> f64 {
        let n = 2 * modes + 1;
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let k = i as f64 - modes as f64;
                k * k
            } else if i.abs_diff(j) == 1 {
                -0.5 * b
            } else {
                0.0
            }
        });
        m.symmetric_eigenvalues().min()
    }

    #[test]
    fn free_rotor_matrix() {
        let t = build_matrix(0.0, 2).unwrap();
        assert_eq!(t.diag(), &[4.0, 1.0, 0.0, 1.0, 4.0]);
        assert!(t.offdiag().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn matrix_structure() {
        let t = build_matrix(1.7, 5).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t.offdiag().len(), 10);
        assert!(t.offdiag().iter().all(|&e| e == -0.85));
    }

    #[test]
    fn three_mode_truncation_closed_form() {
        let t = build_matrix(1.0, 1).unwrap();
        assert_eq!(t.diag(), &[1.0, 0.0, 1.0]);
        assert_eq!(t.offdiag(), &[-0.5, -0.5]);
        // symmetric sector: λ² - λ - 1/2 = 0
        let closed = (1.0 - 3.0_f64.sqrt()) / 2.0;
        assert_relative_eq!(t.eigenvalue(0, 1e-15), closed, epsilon = 1e-13);
        let converged = spectrum(1.0, 1, &tol()).unwrap().ground();
        assert!(converged < closed - 0.01);
    }

    #[test]
    fn free_rotor_spectrum_is_exact() {
        let s = spectrum(0.0, 7, &tol()).unwrap();
        assert!(s.converged);
        for (got, want) in s
            .eigenvalues
            .iter()
            .zip([0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0])
        {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_state_matches_dense_diagonalization() {
        for b in [0.3, 1.0, 2.0, 5.0] {
            let s = spectrum(b, 1, &tol()).unwrap();
            assert_relative_eq!(s.ground(), dense_ground(b, 64), epsilon = 1e-10);
        }
        // a₀(q=2)/4 from standard tables
        assert_relative_eq!(
            spectrum(1.0, 1, &tol()).unwrap().ground(),
            -0.378_489,
            epsilon = 1e-6
        );
    }

    #[test]
    fn weak_dipole_second_order_law() {
        let b = 0.05;
        let m0 = spectrum(b, 1, &tol()).unwrap().ground();
        assert!((m0 / (b * b) + 0.5).abs() < 0.005);
    }

    #[test]
    fn ground_state_negative_and_nonincreasing() {
        let mut previous = 0.0;
        for i in 1..=40 {
            let b = 0.25 * i as f64;
            let m0 = spectrum(b, 1, &tol()).unwrap().ground();
            assert!(m0 < 0.0, "m0({b}) = {m0}");
            assert!(m0 <= previous + 1e-12);
            previous = m0;
        }
    }

    #[test]
    fn spectrum_even_in_b() {
        for b in [0.5, 1.0, 3.0] {
            let p = spectrum(b, 6, &tol()).unwrap();
            let n = spectrum(-b, 6, &tol()).unwrap();
            for (x, y) in p.eigenvalues.iter().zip(&n.eigenvalues) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn truncation_differences_shrink() {
        // |m0(M) - m0(2M)| decreases until it hits the rounding floor
        for b in [1.0, 4.0, 8.0] {
            let ground = |modes| build_matrix(b, modes).unwrap().eigenvalue(0, 1e-15);
            let mut prev = f64::INFINITY;
            let mut modes = 1;
            while modes <= 64 {
                let d = (ground(modes) - ground(2 * modes)).abs();
                assert!(d <= prev || d < 1e-13, "b={b} M={modes}: {d} > {prev}");
                prev = d;
                modes *= 2;
            }
            assert!(prev < 1e-12);
        }
    }

    #[test]
    fn trace_values() {
        assert_eq!(trace_sqrt_neg(0.0, 0.0, &tol()).unwrap(), 0.0);
        assert_eq!(eigenvalues_below(1.0, 0.0, &tol()).unwrap().len(), 1);
        assert_relative_eq!(
            trace_sqrt_neg(1.0, 0.0, &tol()).unwrap(),
            0.615_215,
            epsilon = 1e-6
        );
        assert_eq!(eigenvalues_below(2.0, 0.0, &tol()).unwrap().len(), 1);
        // a₀(q=4)/4 = -1.0701297…
        assert_relative_eq!(
            trace_sqrt_neg(2.0, 0.0, &tol()).unwrap(),
            1.070_129_704_575_630_6_f64.sqrt(),
            epsilon = 1e-9
        );
        // b = 0, a = 1.5: channels m=0 and m=±1 are open
        let want = 1.5_f64.sqrt() + 2.0 * 0.5_f64.sqrt();
        assert_relative_eq!(
            trace_sqrt_neg(0.0, 1.5, &tol()).unwrap(),
            want,
            epsilon = 1e-10
        );
    }

    #[test]
    fn trace_monotone_in_a_and_b() {
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        for &b in &grid {
            let mut prev = -1.0;
            for &a in &grid {
                let v = trace_sqrt_neg(b, a, &tol()).unwrap();
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
        for &a in &grid {
            let mut prev = -1.0;
            for &b in &grid {
                let v = trace_sqrt_neg(b, a, &tol()).unwrap();
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn mclachlan_values() {
        let g0 = ground_state_mclachlan(0.0, &tol()).unwrap();
        assert_eq!((g0.paper_value, g0.standard_value), (0.0, 0.0));
        for b in [0.1, 1.0, 2.0, 5.0] {
            let g = ground_state_mclachlan(b, &tol()).unwrap();
            let m0 = spectrum(b, 1, &tol()).unwrap().ground();
            assert_relative_eq!(g.standard_value, m0, epsilon = 1e-9);
        }
        // the printed relation scales like -b²/128 and disagrees with m0
        let g = ground_state_mclachlan(1.0, &tol()).unwrap();
        assert_relative_eq!(g.paper_value, -1.0 / 128.0, max_relative = 0.05);
        assert!((g.paper_value - g.standard_value).abs() > 0.3);
    }

    #[test]
    fn cap_exhaustion_is_reported() {
        assert!(matches!(
            spectrum_with_cap(3.0, 1, &tol(), INITIAL_MODES),
            Err(Error::NoConvergence { .. })
        ));
    }
}
