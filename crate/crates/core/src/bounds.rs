//! Eigenvalue-count bounds for `-Δ + V` on the whole plane: the
//! Shargorodsky functional, the admissibility integrals for the short-range
//! part, radial bound-state counting and the Kirsch–Simon sum rules.
//!
//! Channel `m` of a radial potential, with `t = ln r` and `v(t) = f(e^t)`:
//!
//! ```text
//! -v'' + m² v + e^{2t} V(e^t) v = E e^{2t} v.
//! ```
//!
//! The regular solution at the origin has `v' → 0` for `m = 0` and `v → 0`
//! otherwise, which fixes the boundary condition at `t_min`.

use nalgebra::linalg::SymmetricTridiagonal;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::Tridiagonal;
use crate::oracle_radial::DEFAULT_MARGIN;

/// A potential sampled on cells of the plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampledPotential {
    /// `values[i]` on the annulus `edges[i] ≤ r < edges[i+1]`, zero elsewhere.
    Radial { edges: Vec<f64>, values: Vec<f64> },
    /// Point samples with the area of the cell each one represents.
    Polar { cells: Vec<PolarCell>, support: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarCell {
    pub radius: f64,
    pub value: f64,
    pub area: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    value: f64,
    area: f64,
    /// `∫_cell log(2+|x|) dx`.
    log_weight: f64,
}

/// `∫ r log(2+r) dr`.
fn log_moment(r: f64) -> f64 {
    0.5 * (r * r - 4.0) * (2.0 + r).ln() - 0.25 * r * r + r
}

impl SampledPotential {
    pub fn radial(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() != values.len() + 1 {
            return Err(Error::DimensionMismatch {
                left: edges.len(),
                right: values.len() + 1,
            });
        }
        if !(edges[0] >= 0.0) || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "radial edges must be nonnegative and increasing",
            ));
        }
        if edges.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::invalid("radial samples must be finite"));
        }
        Ok(SampledPotential::Radial { edges, values })
    }

    /// Samples `f` at the midpoint of each annulus.
    pub fn radial_from_fn(edges: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = edges.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        Self::radial(edges, values)
    }

    pub fn polar(cells: Vec<PolarCell>, support: f64) -> Result<Self> {
        for c in &cells {
            if !(c.area > 0.0) || !c.value.is_finite() || !(c.radius >= 0.0 && c.radius <= support)
            {
                return Err(Error::invalid(format!("invalid polar cell {c:?}")));
            }
        }
        Ok(SampledPotential::Polar { cells, support })
    }

    /// `f(r, φ)` at the centres of an `n_r × n_phi` polar grid on the disk
    /// of radius `support`, with exact cell areas.
    pub fn polar_grid(
        support: f64,
        n_r: usize,
        n_phi: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if !(support > 0.0) || n_r == 0 || n_phi == 0 {
            return Err(Error::invalid("polar grid needs positive size"));
        }
        let dr = support / n_r as f64;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut cells = Vec::with_capacity(n_r * n_phi);
        for i in 0..n_r {
            let (r0, r1) = (i as f64 * dr, (i + 1) as f64 * dr);
            let area = 0.5 * (r1 * r1 - r0 * r0) * dphi;
            let radius = 0.5 * (r0 + r1);
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                cells.push(PolarCell {
                    radius,
                    value: f(radius, phi),
                    area,
                });
            }
        }
        Self::polar(cells, support)
    }

    /// `-α` on the unit disk.
    pub fn well(alpha: f64) -> Result<Self> {
        Self::radial(vec![0.0, 1.0], vec![-alpha])
    }

    pub fn support_radius(&self) -> f64 {
        match self {
            SampledPotential::Radial { edges, .. } => *edges.last().unwrap(),
            SampledPotential::Polar { support, .. } => *support,
        }
    }

    /// Value at radius `r`; `None` for non-radial samples.
    pub fn radial_value(&self, r: f64) -> Option<f64> {
        match self {
            SampledPotential::Radial { edges, values } => {
                if r < edges[0] || r >= *edges.last().unwrap() {
                    return Some(0.0);
                }
                let i = edges.partition_point(|&x| x <= r) - 1;
                Some(values[i])
            }
            SampledPotential::Polar { .. } => None,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            SampledPotential::Radial { edges, values } => SampledPotential::Radial {
                edges: edges.clone(),
                values: values.iter().map(|v| c * v).collect(),
            },
            SampledPotential::Polar { cells, support } => SampledPotential::Polar {
                cells: cells
                    .iter()
                    .map(|cell| PolarCell {
                        value: c * cell.value,
                        ..*cell
                    })
                    .collect(),
                support: *support,
            },
        }
    }

    fn cells(&self) -> Vec<Cell> {
        match self {
            SampledPotential::Radial { edges, values } => edges
                .windows(2)
                .zip(values)
                .map(|(w, &value)| Cell {
                    value,
                    area: PI * (w[1] * w[1] - w[0] * w[0]),
                    log_weight: 2.0 * PI * (log_moment(w[1]) - log_moment(w[0])),
                })
                .collect(),
            SampledPotential::Polar { cells, .. } => cells
                .iter()
                .map(|c| Cell {
                    value: c.value,
                    area: c.area,
                    log_weight: (2.0 + c.radius).ln() * c.area,
                })
                .collect(),
        }
    }
}

fn negative_part(v: f64) -> f64 {
    (-v).max(0.0)
}

/// Symmetric decreasing rearrangement as a step function of the area `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangedProfile {
    pub steps: Vec<ProfileStep>,
}

/// `value` on `[previous area_end, area_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileStep {
    pub area_end: f64,
    pub value: f64,
}

impl RearrangedProfile {
    fn from_density(cells: &[Cell], f: impl Fn(f64) -> f64) -> Self {
        let mut parts: Vec<(f64, f64)> = cells
            .iter()
            .map(|c| (f(c.value), c.area))
            .filter(|&(g, _)| g > 0.0)
            .collect();
        parts.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut steps: Vec<ProfileStep> = Vec::new();
        let mut area = 0.0;
        for (value, a) in parts {
            area += a;
            match steps.last_mut() {
                Some(last) if last.value == value => last.area_end = area,
                _ => steps.push(ProfileStep {
                    area_end: area,
                    value,
                }),
            }
        }
        Self { steps }
    }

    pub fn value_at(&self, area: f64) -> f64 {
        let i = self.steps.partition_point(|s| s.area_end <= area);
        self.steps.get(i).map_or(0.0, |s| s.value)
    }

    pub fn total_area(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.area_end)
    }

    /// `|{A : profile(A) > level}|`.
    pub fn level_area(&self, level: f64) -> f64 {
        self.steps
            .iter()
            .take_while(|s| s.value > level)
            .last()
            .map_or(0.0, |s| s.area_end)
    }

    /// `∫₀¹ V*(πt) |ln t| dt`, integrating the logarithmic weight exactly on
    /// each step (`t = e^{-u}` turns it into `∫ u e^{-u} du`).
    pub fn log_weighted_integral(&self, argument: RearrangementArgument) -> f64 {
        // ∫₀^t |ln s| ds
        let weight = |t: f64| if t <= 0.0 { 0.0 } else { t - t * t.ln() };
        let mut prev = 0.0_f64;
        let mut total = 0.0;
        for s in &self.steps {
            let t = argument.t_of_area(s.area_end).min(1.0);
            total += s.value * (weight(t) - weight(prev));
            prev = t;
            if t >= 1.0 {
                break;
            }
        }
        total
    }
}

/// How `πt` in `V*(πt)` is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RearrangementArgument {
    /// `πt` is an area: the profile at radius `√t`.
    #[default]
    Area,
    /// `πt` is a radius: the profile at area `π(πt)²`.
    Radius,
}

impl RearrangementArgument {
    fn t_of_area(self, area: f64) -> f64 {
        match self {
            RearrangementArgument::Area => area / PI,
            RearrangementArgument::Radius => (area / PI).sqrt() / PI,
        }
    }
}

pub fn decreasing_rearrangement(v: &SampledPotential) -> RearrangedProfile {
    RearrangedProfile::from_density(&v.cells(), negative_part)
}

/// The two terms of the Shargorodsky bound
/// `N₋(V) ≤ C (I1 + I2) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functional {
    /// `∫ V₋(x) log(2+|x|) dx`
    pub i1: f64,
    /// `∫₀¹ V₋*(πt) |log t| dt`
    pub i2: f64,
}

impl Functional {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2
    }

    fn of(cells: &[Cell], f: impl Fn(f64) -> f64 + Copy, argument: RearrangementArgument) -> Self {
        Self {
            i1: cells
                .iter()
                .map(|c| f(c.value) * c.log_weight)
                .fold(0.0, |acc, x| acc + x),
            i2: RearrangedProfile::from_density(cells, f).log_weighted_integral(argument),
        }
    }
}

pub fn shargorodsky_functional(v: &SampledPotential) -> Functional {
    shargorodsky_functional_with(v, RearrangementArgument::Area)
}

pub fn shargorodsky_functional_with(
    v: &SampledPotential,
    argument: RearrangementArgument,
) -> Functional {
    Functional::of(&v.cells(), negative_part, argument)
}

/// Both admissibility pairs for a short-range part `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// The functional of `s₋`.
    pub minus: Functional,
    /// The functional of `s²`.
    pub square: Functional,
    pub j_minus: f64,
    pub j_square: f64,
    pub admissible: bool,
}

pub fn hypothesis_check(s: &SampledPotential) -> HypothesisReport {
    let cells = s.cells();
    let arg = RearrangementArgument::Area;
    let minus = Functional::of(&cells, negative_part, arg);
    let square = Functional::of(&cells, |v| v * v, arg);
    let (j_minus, j_square) = (minus.total(), square.total());
    HypothesisReport {
        minus,
        square,
        j_minus,
        j_square,
        admissible: j_minus.is_finite() && j_square.is_finite(),
    }
}

/// Uniform grid in `t = ln r` on `[t_min, t_max]` with `intervals` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub intervals: usize,
}

/// Distance in `ln r` kept between the support and the outer Dirichlet end
/// for zero-energy counts; a well of strength `α` has its zero-energy node
/// near `t ≈ 2/α`.
pub const ZERO_ENERGY_MARGIN: f64 = 64.0;
pub const PLANE_T_MIN: f64 = -10.0;

impl PlaneGrid {
    pub fn new(t_min: f64, t_max: f64, intervals: usize) -> Result<Self> {
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() || intervals < 4 {
            return Err(Error::invalid(format!(
                "bad plane grid [{t_min}, {t_max}] with {intervals} intervals"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            intervals,
        })
    }

    fn with_spacing(t_min: f64, t_max: f64, h: f64) -> Self {
        Self {
            t_min,
            t_max,
            intervals: ((t_max - t_min) / h).ceil() as usize,
        }
    }

    /// Grid for zero-energy counts of a potential supported in `r ≤ support`.
    pub fn for_support(support: f64) -> Self {
        let t_max = support.max(1.0).ln() + ZERO_ENERGY_MARGIN;
        Self::with_spacing(PLANE_T_MIN, t_max, 0.01)
    }

    /// Grid for counts below `e < 0`.
    pub fn for_energy(e: f64, support: f64) -> Self {
        let t_max = (support.max(1.0).ln() + 8.0).max((-e).sqrt().recip().ln() + DEFAULT_MARGIN);
        Self::with_spacing(PLANE_T_MIN, t_max, 0.004)
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / self.intervals as f64
    }

    fn node(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.spacing()
    }
}

/// `A - E·W` for channel `m`; its negative eigenvalues are the channel's
/// eigenvalues below `e`.
pub fn plane_channel_matrix(
    potential: &impl Fn(f64) -> f64,
    m: u32,
    e: f64,
    grid: &PlaneGrid,
) -> Tridiagonal {
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let m2 = f64::from(m) * f64::from(m);
    let first = if m == 0 { 0 } else { 1 };
    let mut diag = Vec::with_capacity(grid.intervals);
    for j in first..grid.intervals {
        let t = grid.node(j);
        let w = (2.0 * t).exp();
        let local = m2 + w * (potential(t.exp()) - e);
        diag.push(if j == 0 {
            inv_h2 + 0.5 * local
        } else {
            2.0 * inv_h2 + local
        });
    }
    let off = vec![-inv_h2; diag.len() - 1];
    Tridiagonal::new(diag, off).expect("shapes are consistent by construction")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaneCount {
    pub total: usize,
    /// Count for `m = 0, 1, 2, …`; entries with `m ≥ 1` are counted twice
    /// in `total`.
    pub per_channel: Vec<usize>,
}

const MAX_CHANNEL: u32 = 100_000;

/// Eigenvalues below `e ≤ 0` of `-Δ + V` for a radial `V`, summed over the
/// angular momenta until the first empty channel with `m ≥ 1`.
pub fn count_plane_below(
    potential: impl Fn(f64) -> f64,
    e: f64,
    grid: &PlaneGrid,
) -> Result<PlaneCount> {
    if e > 0.0 {
        return Err(Error::invalid("energy must be nonpositive"));
    }
    if e < 0.0 {
        let required = (-e).sqrt().recip().ln() + DEFAULT_MARGIN;
        if grid.t_max < required {
            return Err(Error::GridInadequate {
                length: grid.t_max,
                required,
            });
        }
    }
    let mut per_channel = Vec::new();
    for m in 0..MAX_CHANNEL {
        let c = plane_channel_matrix(&potential, m, e, grid).count_below(0.0);
        if m >= 1 && c == 0 {
            let total = per_channel[0] + 2 * per_channel[1..].iter().sum::<usize>();
            return Ok(PlaneCount { total, per_channel });
        }
        per_channel.push(c);
    }
    Err(Error::no_convergence("angular momentum sum"))
}

/// `N₋(V)`, the number of negative eigenvalues of `-Δ + V` on the plane.
pub fn count_negative_radial(v: &SampledPotential, grid: &PlaneGrid) -> Result<PlaneCount> {
    if v.radial_value(0.0).is_none() {
        return Err(Error::invalid(
            "count_negative_radial needs a radial potential",
        ));
    }
    let required = v.support_radius().max(1.0).ln() + 8.0;
    if grid.t_max < required {
        return Err(Error::GridInadequate {
            length: grid.t_max,
            required,
        });
    }
    count_plane_below(|r| v.radial_value(r).unwrap_or(0.0), 0.0, grid)
}

/// Functional values and bound-state count for one well depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WellReport {
    pub alpha: f64,
    pub i1: f64,
    pub i2: f64,
    pub count: usize,
    /// `(N₋ - 1) / (I1 + I2)`; undefined for the zero potential.
    pub ratio: Option<f64>,
}

pub fn well_report(alpha: f64) -> Result<WellReport> {
    let v = SampledPotential::well(alpha)?;
    let f = shargorodsky_functional(&v);
    let count = count_negative_radial(&v, &PlaneGrid::for_support(1.0))?.total;
    Ok(WellReport {
        alpha,
        i1: f.i1,
        i2: f.i2,
        count,
        ratio: (f.total() > 0.0).then(|| (count as f64 - 1.0) / f.total()),
    })
}

/// Number of eigenvalues of the symmetric matrix `m` strictly below `e`.
///
/// Householder reduction to tridiagonal form, then a Sturm count.
pub fn count_below_dense(m: &DMatrix<f64>, e: f64) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            left: m.nrows(),
            right: m.ncols(),
        });
    }
    if m.is_empty() {
        return Ok(0);
    }
    let tri = SymmetricTridiagonal::new(m.clone());
    let t = Tridiagonal::new(
        tri.diagonal().iter().copied().collect(),
        tri.off_diagonal().iter().copied().collect(),
    )?;
    Ok(t.count_below(e))
}

/// Counts entering the matrix sum rule at energy `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SumRuleReport {
    pub dimension: usize,
    /// `N_{(-∞,E)}(A+B)`
    pub sum: usize,
    /// `N_{(-∞,E)}(A)`
    pub left: usize,
    /// `N_{(-∞,E)}(B)`
    pub right: usize,
    /// `N_{(-∞,0)}(B)`
    pub right_at_zero: usize,
    /// `N_E(A+B) ≤ N_E(A) + N_E(B)`
    pub literal: bool,
    /// `N_E(A+B) ≤ N_E(A) + N_0(B)`, the form that holds for every
    /// symmetric pair and every `E ≤ 0`.
    pub weyl: bool,
}

pub fn sum_rule_check(a: &DMatrix<f64>, b: &DMatrix<f64>, e: f64) -> Result<SumRuleReport> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    let sum = count_below_dense(&(a + b), e)?;
    let left = count_below_dense(a, e)?;
    let right = count_below_dense(b, e)?;
    let right_at_zero = count_below_dense(b, 0.0)?;
    Ok(SumRuleReport {
        dimension: a.nrows(),
        sum,
        left,
        right,
        right_at_zero,
        literal: sum <= left + right,
        weyl: sum <= left + right_at_zero,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleTrial {
    pub energy: f64,
    pub report: SumRuleReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub trials: usize,
    pub literal_passes: usize,
    pub weyl_passes: usize,
    pub first_literal_violation: Option<SumRuleTrial>,
}

pub const MAX_TRIAL_DIMENSION: usize = 30;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let x = rng.random_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn gershgorin_floor(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .enumerate()
        .map(|(i, row)| 2.0 * row[i] - row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::min)
}

/// Random symmetric pairs of dimension `1..=30` with `E` uniform in
/// `[λ_floor, 0)`, where `λ_floor` bounds the spectra of `A`, `B` and `A+B`
/// from below.
pub fn sum_rule_trials(trials: usize, seed: u64) -> Result<TrialSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = TrialSummary {
        seed,
        trials,
        literal_passes: 0,
        weyl_passes: 0,
        first_literal_violation: None,
    };
    for _ in 0..trials {
        let n = rng.random_range(1..=MAX_TRIAL_DIMENSION);
        let a = random_symmetric(&mut rng, n);
        let b = random_symmetric(&mut rng, n);
        let floor = gershgorin_floor(&a)
            .min(gershgorin_floor(&b))
            .min(gershgorin_floor(&(&a + &b)))
            .min(-1.0);
        let energy = floor * (1.0 - rng.random_range(0.0..1.0));
        let report = sum_rule_check(&a, &b, energy)?;
        summary.literal_passes += usize::from(report.literal);
        summary.weyl_passes += usize::from(report.weyl);
        if !report.literal && summary.first_literal_violation.is_none() {
            summary.first_literal_violation = Some(SumRuleTrial { energy, report });
        }
    }
    Ok(summary)
}

/// The five counts of the split rule for `H = -Δ + V + W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitRuleReport {
    pub epsilon: f64,
    pub energy: f64,
    /// `N_E(-Δ + V + W)`
    pub full: usize,
    /// `N_E(-Δ + V/(1-ε))`
    pub v_enhanced: usize,
    /// `N_E(-Δ + W/ε)`
    pub w_enhanced: usize,
    /// `N_E(-Δ + (1-ε)V)`
    pub v_reduced: usize,
    /// `N_E(-Δ - (1-ε)W/ε)`
    pub w_reflected: usize,
    /// `full ≤ v_enhanced + w_enhanced`
    pub upper: bool,
    /// `full ≥ v_reduced - w_reflected`
    pub lower: bool,
}

pub fn split_rule_check(
    v: impl Fn(f64) -> f64 + Copy,
    w: impl Fn(f64) -> f64 + Copy,
    epsilon: f64,
    e: f64,
    grid: &PlaneGrid,
) -> Result<SplitRuleReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon must lie in (0, 1)"));
    }
    let count = |f: &dyn Fn(f64) -> f64| count_plane_below(f, e, grid).map(|c| c.total);
    let full = count(&|r| v(r) + w(r))?;
    let v_enhanced = count(&|r| v(r) / (1.0 - epsilon))?;
    let w_enhanced = count(&|r| w(r) / epsilon)?;
    let v_reduced = count(&|r| (1.0 - epsilon) * v(r))?;
    let w_reflected = count(&|r| -(1.0 - epsilon) / epsilon * w(r))?;
    Ok(SplitRuleReport {
        epsilon,
        energy: e,
        full,
        v_enhanced,
        w_enhanced,
        v_reduced,
        w_reflected,
        upper: full <= v_enhanced + w_enhanced,
        lower: full + w_reflected >= v_reduced,
    })
}

/// `V = -2/r²` for `r > 1`, `W = -5` on `r < 1/2`, `ε = 1/2`, `E = -10⁻⁴`.
pub fn documented_split_instance() -> Result<SplitRuleReport> {
    let e = -1e-4;
    let v = |r: f64| if r > 1.0 { -2.0 / (r * r) } else { 0.0 };
    let w = |r: f64| if r < 0.5 { -5.0 } else { 0.0 };
    split_rule_check(v, w, 0.5, e, &PlaneGrid::for_energy(e, 1.0))
}
