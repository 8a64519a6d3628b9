//! Shared numerical kernels: Sturm counting for symmetric tridiagonal
//! matrices, bracketed root finding, and quadrature on `[0, ∞)`.
//!
//! Every eigenvalue count in the crate ends up in [`sturm_count`]; every
//! evaluation of the radial Bessel solution goes through [`quad_semiinf`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix stored as its diagonal and
/// first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("tridiagonal matrix needs at least one row"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::DimensionMismatch {
                left: diag.len(),
                right: offdiag.len() + 1,
            });
        }
        if diag.iter().chain(offdiag.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("tridiagonal entries must be finite"));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Number of eigenvalues strictly below `threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        sturm_count(self, threshold)
    }

    /// Interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 {
                self.offdiag[i - 1].abs()
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.offdiag[i].abs()
            } else {
                0.0
            };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by Sturm bisection, to
    /// absolute accuracy `abs_tol` or the floating-point limit.
    pub fn eigenvalue(&self, k: usize, abs_tol: f64) -> f64 {
        assert!(k < self.len(), "eigenvalue index {k} out of range");
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE;
        lo -= pad;
        hi += pad;
        for _ in 0..2200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= abs_tol {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The lowest `count` eigenvalues, ascending.
    pub fn lowest_eigenvalues(&self, count: usize, abs_tol: f64) -> Vec<f64> {
        (0..count.min(self.len()))
            .map(|k| self.eigenvalue(k, abs_tol))
            .collect()
    }
}

/// Number of eigenvalues of `t` strictly below `threshold`.
///
/// Counts negative pivots of the LDLᵀ factorization of `t - threshold·I`.
/// Pivots smaller than `pivmin` are replaced by `±pivmin`; an exactly zero
/// pivot is treated as positive so that an eigenvalue equal to the
/// threshold is not counted.
pub fn sturm_count(t: &Tridiagonal, threshold: f64) -> usize {
    let e2max = t.offdiag.iter().fold(0.0_f64, |m, e| m.max(e * e));
    let pivmin = f64::MIN_POSITIVE * e2max.max(1.0);

    let guard = |q: f64| {
        if q.abs() >= pivmin {
            q
        } else if q < 0.0 {
            -pivmin
        } else {
            pivmin
        }
    };

    let mut q = guard(t.diag[0] - threshold);
    let mut count = usize::from(q < 0.0);
    for i in 1..t.diag.len() {
        let e = t.offdiag[i - 1];
        q = guard(t.diag[i] - threshold - e * e / q);
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Tolerances used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute eigenvalue tolerance.
    pub eig_tol: f64,
    /// Relative root tolerance.
    pub root_tol: f64,
    /// Relative quadrature tolerance.
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            root_tol: 1e-12,
            quad_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(eig_tol: f64, root_tol: f64, quad_tol: f64) -> Result<Self> {
        let tol = Self {
            eig_tol,
            root_tol,
            quad_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eig_tol", self.eig_tol),
            ("root_tol", self.root_tol),
            ("quad_tol", self.quad_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

const MAX_ROOT_ITER: usize = 500;

/// Root of `f` inside the sign-change bracket `[lo, hi]` (either order).
///
/// Brent's method: inverse quadratic / secant steps with a bisection
/// fallback, stopping when the bracket is narrower than `root_tol`
/// relative to the current iterate.
pub fn bracket_root<F>(mut f: F, lo: f64, hi: f64, tol: &Tolerances) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo: a, hi: b });
    }

    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ROOT_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.root_tol * b.abs() + f64::MIN_POSITIVE;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0)),
                    (qa - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::no_convergence("bracket_root (NaN iterate)"));
        }
    }
    Err(Error::no_convergence("bracket_root"))
}

const MIN_ROMBERG_LEVEL: usize = 4;
const MAX_ROMBERG_LEVEL: usize = 22;
const MAX_SEGMENTS: usize = 14;

/// `∫₀^∞ g(t) dt` for an integrand decaying at least exponentially.
///
/// The half-line is covered by the segments `[0,1], [1,2], [2,4], …`; each
/// segment is integrated by Romberg extrapolation of the uniform-step
/// trapezoid rule. The outer interval is doubled until a new segment adds
/// less than `quad_tol` relative to the accumulated `∫|g|`, which keeps the
/// stopping rule meaningful when the integral itself is close to zero.
pub fn quad_semiinf<F>(mut g: F, tol: &Tolerances) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut total = 0.0;
    let mut total_abs = 0.0;
    let mut a = 0.0;
    let mut b = 1.0;
    for seg in 0..MAX_SEGMENTS {
        let (value, abs) = romberg(&mut g, a, b, total_abs, tol.quad_tol)?;
        total += value;
        total_abs += abs;
        if seg >= 1 && abs <= tol.quad_tol * total_abs {
            return Ok(total);
        }
        a = b;
        b *= 2.0;
    }
    Err(Error::no_convergence("quad_semiinf tail"))
}

/// Romberg integration on `[a, b]`; returns the integral and a trapezoid
/// estimate of `∫|g|` on the same interval.
fn romberg<F>(g: &mut F, a: f64, b: f64, scale: f64, rel: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let width = b - a;
    let (ga, gb) = (g(a), g(b));
    let mut trap = 0.5 * width * (ga + gb);
    let mut trap_abs = 0.5 * width * (ga.abs() + gb.abs());
    let mut prev_row = vec![trap];
    let mut prev_best = trap;

    for level in 1..=MAX_ROMBERG_LEVEL {
        let n_new = 1usize << (level - 1);
        let h = width / (2 * n_new) as f64;
        let (mut sum, mut sum_abs) = (0.0, 0.0);
        for i in 0..n_new {
            let v = g(a + (2 * i + 1) as f64 * h);
            sum += v;
            sum_abs += v.abs();
        }
        trap = 0.5 * trap + h * sum;
        trap_abs = 0.5 * trap_abs + h * sum_abs;

        let mut row = Vec::with_capacity(level + 1);
        row.push(trap);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        let best = row[level];
        if !best.is_finite() {
            return Err(Error::no_convergence("romberg (non-finite integrand)"));
        }
        let reference = scale.max(trap_abs).max(best.abs());
        if level >= MIN_ROMBERG_LEVEL && (best - prev_best).abs() <= rel * reference {
            return Ok((best, trap_abs));
        }
        if reference == 0.0 && level >= MIN_ROMBERG_LEVEL {
            return Ok((0.0, 0.0));
        }
        prev_best = best;
        prev_row = row;
    }
    Err(Error::no_convergence("romberg"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn tri(diag: &[f64], off: &[f64]) -> Tridiagonal {
        Tridiagonal::new(diag.to_vec(), off.to_vec()).unwrap()
    }

    fn dense_count(diag: &[f64], off: &[f64], threshold: f64) -> usize {
        let n = diag.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        m.symmetric_eigenvalues()
            .iter()
            .filter(|&&l| l < threshold)
            .count()
    }

    #[test]
    fn single_entry_above_threshold() {
        assert_eq!(sturm_count(&tri(&[0.0], &[]), -1.0), 0);
    }

    #[test]
    fn two_by_two_symmetric_pair() {
        assert_eq!(sturm_count(&tri(&[0.0, 0.0], &[1.0]), 0.0), 1);
        // eigenvalue exactly at the threshold is not counted
        assert_eq!(sturm_count(&tri(&[0.0, 0.0], &[1.0]), 1.0), 1);
        assert_eq!(sturm_count(&tri(&[0.0], &[]), 0.0), 0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Tridiagonal::new(vec![], vec![]).is_err());
        assert!(matches!(
            Tridiagonal::new(vec![1.0, 2.0], vec![]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_eight_by_eight_matches_dense() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();
            let e: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t = tri(&d, &e);
            for k in 0..9 {
                let thr = -4.0 + k as f64;
                assert_eq!(sturm_count(&t, thr), dense_count(&d, &e, thr));
            }
        }
    }

    #[test]
    fn bisection_eigenvalues_match_dense() {
        let d = [2.0, -1.0, 0.5, 3.0, 0.0];
        let e = [0.7, -0.3, 1.1, 0.2];
        let t = tri(&d, &e);
        let n = d.len();
        let m = DMatrix::from_fn(n, n, |i, j| match (i as isize - j as isize).abs() {
            0 => d[i],
            1 => e[i.min(j)],
            _ => 0.0,
        });
        let mut dense: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        dense.sort_by(f64::total_cmp);
        for (k, want) in dense.iter().enumerate() {
            assert_relative_eq!(t.eigenvalue(k, 1e-14), *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn roots_of_known_functions() {
        let tol = Tolerances::default();
        assert_relative_eq!(
            bracket_root(|x| x - 1.0, 0.0, 2.0, &tol).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            bracket_root(f64::cos, 1.0, 2.0, &tol).unwrap(),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn root_requires_sign_change() {
        let tol = Tolerances::default();
        assert!(matches!(
            bracket_root(|x| x * x + 1.0, -1.0, 1.0, &tol),
            Err(Error::NoSignChange { .. })
        ));
    }

    #[test]
    fn quadrature_of_elementary_integrands() {
        let tol = Tolerances::default();
        assert_relative_eq!(
            quad_semiinf(|t| (-t).exp(), &tol).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            quad_semiinf(|t| t * (-t * t).exp(), &tol).unwrap(),
            0.5,
            max_relative = 1e-12
        );
        assert_eq!(quad_semiinf(|_| 0.0, &tol).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_of_zero_order_bessel_k() {
        // K_0(1) from its power series: -(ln(x/2)+γ) I_0(x) + Σ H_k (x²/4)^k/(k!)²
        let x: f64 = 1.0;
        let y = x * x / 4.0;
        let gamma = 0.577_215_664_901_532_9;
        let (mut i0, mut tail, mut term, mut harmonic) = (1.0, 0.0, 1.0, 0.0);
        for k in 1..40 {
            term *= y / (k * k) as f64;
            harmonic += 1.0 / k as f64;
            i0 += term;
            tail += harmonic * term;
        }
        let series = -((x / 2.0).ln() + gamma) * i0 + tail;
        let tol = Tolerances::default();
        let quad = quad_semiinf(|t| (-x * t.cosh()).exp(), &tol).unwrap();
        assert_relative_eq!(quad, series, max_relative = 1e-12);
        assert_relative_eq!(quad, 0.421_024_438_240_708, max_relative = 1e-12);
    }

    #[test]
    fn quadrature_reports_non_decaying_tail() {
        let tol = Tolerances::default();
        assert!(matches!(
            quad_semiinf(|_| 1.0, &tol),
            Err(Error::NoConvergence { .. })
        ));
    }

    proptest! {
        #[test]
        fn sturm_count_monotone_and_matches_dense(
            entries in prop::collection::vec((-5.0f64..5.0, -3.0f64..3.0), 1..20),
            t1 in -8.0f64..8.0,
            t2 in -8.0f64..8.0,
        ) {
            let d: Vec<f64> = entries.iter().map(|p| p.0).collect();
            let e: Vec<f64> = entries.iter().skip(1).map(|p| p.1).collect();
            let t = tri(&d, &e);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(sturm_count(&t, lo) <= sturm_count(&t, hi));
            prop_assert_eq!(sturm_count(&t, t1), dense_count(&d, &e, t1));
        }

        #[test]
        fn bracket_root_symmetric_in_endpoints(shift in -0.9f64..0.9, scale in 0.1f64..10.0) {
            let tol = Tolerances::default();
            let f = |x: f64| scale * (x - shift).sinh();
            let r1 = bracket_root(f, -1.0, 1.0, &tol).unwrap();
            let r2 = bracket_root(f, 1.0, -1.0, &tol).unwrap();
            prop_assert_eq!(r1, r2);
            prop_assert!((r1 - shift).abs() <= 1e-10);
        }
    }
}
