use bdk_core::invariants::{sigma0, sigma1, sigma_gap, Truncation};
use bdk_core::submodule::DEFAULT_RANK_TOL;
use bdk_core::zw::sigma1_zw;
use bdk_core::{build_submodule, BiPoint, Complex64, RadiusGuard, Series2D};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn poly(terms: &[(f64, usize, usize)]) -> Series2D {
    let t: Vec<_> = terms.iter().map(|&(v, i, j)| (c(v, 0.0), i, j)).collect();
    Series2D::from_terms(&t)
}

#[test]
fn dimension_counts() {
    // Multiples z^i w^j g with i, j ≤ N of a single generator are independent.
    let m = build_submodule(&[poly(&[(1.0, 1, 0), (-1.0, 0, 1)])], 3, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(m.dim(), 16);
    let m = build_submodule(
        &[poly(&[(1.0, 1, 0)]), poly(&[(1.0, 0, 1)])],
        1,
        DEFAULT_RANK_TOL,
    )
    .unwrap();
    assert_eq!(m.dim(), 7);
}

#[test]
fn h2_has_unit_sigma0_and_zero_sigma1() {
    let m = build_submodule(&[poly(&[(1.0, 0, 0)])], 16, DEFAULT_RANK_TOL).unwrap();
    let p = BiPoint::new(c(0.2, 0.1), c(-0.3, 0.0));
    assert!((sigma0(&m, p, Truncation::default()).unwrap().value - 1.0).abs() < 1e-9);
    assert!(sigma1(&m, p, Truncation::default()).unwrap().value.abs() < 1e-9);
}

#[test]
fn generic_engine_tracks_series_oracle() {
    let m = build_submodule(&[poly(&[(1.0, 1, 0), (-1.0, 0, 1)])], 40, DEFAULT_RANK_TOL).unwrap();
    for p in [
        BiPoint::real(0.3, 0.2),
        BiPoint::new(c(0.0, 0.4), c(0.25, 0.0)),
    ] {
        let engine = sigma1(&m, p, Truncation::default()).unwrap().value;
        let oracle = sigma1_zw(p.z, p.w, 20_000).unwrap().value;
        assert!(
            (engine - oracle).abs() < 1e-2,
            "{p:?}: {engine} vs {oracle}"
        );
    }
}

#[test]
fn guard_rejects_far_points() {
    let m = build_submodule(&[poly(&[(1.0, 1, 0)])], 8, DEFAULT_RANK_TOL).unwrap();
    let t = Truncation {
        delta: Some(0),
        guard: RadiusGuard::new(0.5).unwrap(),
    };
    assert!(sigma0(&m, BiPoint::real(0.6, 0.0), t).is_err());
}

#[test]
fn kernel_gram_is_hermitian_and_psd() {
    let m = build_submodule(&[poly(&[(1.0, 2, 0), (-1.0, 0, 1)])], 12, DEFAULT_RANK_TOL).unwrap();
    let pts = bdk_core::report::seeded_points(3, 8, 0.6);
    let g = m.kernel_gram(&pts, RadiusGuard::default()).unwrap();
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn gap_identity_for_coordinate_submodule(ra in 0.0..0.5f64, ta in 0.0..std::f64::consts::TAU, br in -0.5..0.5f64) {
        // Truncation tails scale like max(|a|, |b|)^N, about 3e-8 here.
        let m = build_submodule(&[poly(&[(1.0, 1, 0)]), poly(&[(1.0, 0, 1)])], 24, DEFAULT_RANK_TOL).unwrap();
        let p = BiPoint::new(Complex64::from_polar(ra, ta), c(br, 0.0));
        let g = sigma_gap(&m, p, Truncation::default()).unwrap().value;
        prop_assert!((g - 1.0).abs() < 1e-6);
    }
}
