//! Cross-module checks: the Bessel route against the finite-difference
//! oracle, and counting-function invariants.

use dipole_spectrum::bessel_im::{count_zeros_above, count_zeros_floor, phase};
use dipole_spectrum::channels::{
    count_eigenvalues, count_in, decompose, Boundary, ChannelStatus, DipoleSpec,
};
use dipole_spectrum::mathieu::spectrum;
use dipole_spectrum::oracle_radial::{self, count_channel, RadialGrid};
use dipole_spectrum::Tolerances;
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn oracle_and_bessel_routes_on_validation_matrix() {
    for nu in [0.3, 0.6152, 1.0, 2.0, 3.0] {
        for e in [-1e-2, -1e-4, -1e-6] {
            let s = f64::sqrt(-e);
            let grid = RadialGrid::for_energy(e, nu);
            let oracle = count_channel(nu * nu, e, &grid, Boundary::Dirichlet).unwrap();
            assert_eq!(count_zeros_above(nu, s, &tol()), oracle, "nu={nu} E={e}");
            assert!(
                count_zeros_floor(nu, s).abs_diff(oracle) <= 1,
                "nu={nu} E={e}"
            );
        }
    }
}

#[test]
fn whole_operator_counts_agree_across_routes() {
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (2.5, 1.5), (4.0, 3.0)] {
        let spec = DipoleSpec::new(a, b, Boundary::Dirichlet).unwrap();
        let channels = decompose(&spec, &tol()).unwrap();
        for e in [-1e-2, -1e-4] {
            let bessel = count_in(&channels, e, &tol()).unwrap();
            let grid = RadialGrid::for_energy(e, channels.max_order());
            let oracle = oracle_radial::count_below(&channels, e, &grid).unwrap();
            assert_eq!(bessel, oracle, "(a,b)=({a},{b}) E={e}");
        }
    }
}

#[test]
fn neumann_adds_at_most_one_per_channel() {
    for (a, b) in [(1.0, 0.0), (2.5, 1.5), (6.0, 2.0)] {
        let d = DipoleSpec::new(a, b, Boundary::Dirichlet).unwrap();
        for e in [-1e-2, -1e-3, -1e-5] {
            let cd = count_eigenvalues(&d, e, &tol()).unwrap();
            let cn = count_eigenvalues(&d.with_boundary(Boundary::Neumann), e, &tol()).unwrap();
            for (x, y) in cd.per_channel.iter().zip(&cn.per_channel) {
                assert!(y >= x && y - x <= 1, "(a,b)=({a},{b}) E={e}");
            }
        }
    }
}

#[test]
fn count_rate_error_bound_per_channel() {
    // |N/|ln(-E)| - ν/(2π)| ≤ (ν ln 2 + |φ_ν| + π) / (π |ln(-E)|)
    for nu in [0.3, 1.0, 2.5] {
        for k in [4, 10, 40, 200] {
            let e = 10f64.powi(-k);
            let l = e.ln().abs();
            let n = count_zeros_above(nu, e.sqrt(), &tol()) as f64;
            let bound = (nu * 2f64.ln() + phase(nu).abs() + std::f64::consts::PI)
                / (std::f64::consts::PI * l);
            assert!((n / l - nu / (2.0 * std::f64::consts::PI)).abs() <= bound);
        }
    }
}

#[test]
fn open_channels_match_negative_mathieu_values() {
    let spec = DipoleSpec::new(0.5, 3.0, Boundary::Dirichlet).unwrap();
    let set = decompose(&spec, &tol()).unwrap();
    let eigs = spectrum(3.0, set.channels.len(), &tol())
        .unwrap()
        .eigenvalues;
    for (ch, m) in set.channels.iter().zip(eigs) {
        let open = matches!(ch.status, ChannelStatus::Open { .. });
        assert_eq!(open, m < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_function_monotone_in_energy(
        a in 0.0f64..4.0,
        b in 0.0f64..4.0,
        k1 in 1.0f64..40.0,
        k2 in 1.0f64..40.0,
    ) {
        let spec = DipoleSpec::new(a, b, Boundary::Dirichlet).unwrap();
        let (lo, hi) = (-(10f64.powf(-k1.min(k2))), -(10f64.powf(-k1.max(k2))));
        let n_lo = count_eigenvalues(&spec, lo, &tol()).unwrap().total;
        let n_hi = count_eigenvalues(&spec, hi, &tol()).unwrap().total;
        prop_assert!(n_lo <= n_hi);
    }

    #[test]
    fn counting_function_monotone_in_coupling(
        a in 0.0f64..3.0,
        da in 0.0f64..2.0,
        b in 0.0f64..3.0,
        k in 2.0f64..30.0,
    ) {
        let e = -(10f64.powf(-k));
        let weak = DipoleSpec::new(a, b, Boundary::Dirichlet).unwrap();
        let strong = DipoleSpec::new(a + da, b, Boundary::Dirichlet).unwrap();
        prop_assert!(
            count_eigenvalues(&weak, e, &tol()).unwrap().total
                <= count_eigenvalues(&strong, e, &tol()).unwrap().total
        );
    }
}
