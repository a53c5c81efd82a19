use std::f64::consts::PI;

use ks_blowup::ansatz::{big_z, small_z, u0};
use ks_blowup::sphere::harmonics::{degree_order, index};
use ks_blowup::sphere::*;
use ks_blowup::{Error, RadialGrid};
use proptest::prelude::*;

fn light_solver() -> PlanarSolver {
    PlanarSolver::new(RadialGrid::geometric_with_core(1601, 1e4, 0.1).unwrap(), 32, 12).unwrap()
}

#[test]
fn integral_identity_by_two_routes() {
    let solver = PlanarSolver::default();
    let grid = SphereGrid::new(60, 122).unwrap();
    let bubble = PlanarTestFunction::new(4.0, u0).unwrap();
    let (sphere, plane) = integral_identity_check(&bubble, &grid, &solver);
    assert!((sphere - plane).abs() <= 1e-8 * plane.abs(), "{sphere} {plane}");
    let mass = PlanarTestFunction::new(4.0, |y| big_z(3, y)).unwrap();
    let (s3, p3) = integral_identity_check(&mass, &grid, &solver);
    assert!((s3 + sphere).abs() <= 1e-12 * sphere && (p3 + plane).abs() <= 1e-12 * plane);
    assert_eq!(integral_identity_check(&PlanarTestFunction::zero(), &grid, &solver), (0.0, 0.0));
}

#[test]
fn harmonic_decomposition() {
    let grid = SphereGrid::for_degree(DEFAULT_L_MAX);
    let mut e20 = SphereCoeffs::zeros(DEFAULT_L_MAX);
    e20.set(2, 0, 1.0);
    let c = grid.decompose(&grid.reconstruct(&e20).unwrap(), DEFAULT_L_MAX).unwrap();
    for (l, k, v) in c.iter() {
        let expected = if (l, k) == (2, 0) { 1.0 } else { 0.0 };
        assert!((v - expected).abs() < 1e-12, "({l},{k}) = {v}");
    }
    assert_eq!(SphereCoeffs::eigenvalue(2), 6.0);
    // The coordinate π₃ lives entirely in degree 1.
    let c = grid.decompose(&grid.sample(|p| p[2]), DEFAULT_L_MAX).unwrap();
    let off: f64 = c.iter().filter(|&(l, _, _)| l != 1).map(|(_, _, v)| v.abs()).fold(0.0, f64::max);
    assert!(off < 1e-13 && (c.get(1, 0).abs() - (4.0 * PI / 3.0).sqrt()).abs() < 1e-12);
    assert!(matches!(SphereGrid::new(5, 12).unwrap().decompose(&vec![0.0; 60], 8), Err(Error::Aliasing { .. })));
}

#[test]
fn index_map_is_degree_major() {
    for j in 0..49 {
        let (l, k) = degree_order(j);
        assert_eq!(index(l, k), j);
    }
    assert_eq!(degree_order(4), (2, -2));
}

#[test]
fn g_is_orthogonal_to_the_liouville_kernels() {
    let solver = PlanarSolver::default();
    let (_, t) = &constructed_tests()[2];
    let g = solver.g_from_phi(&t.phi()).unwrap();
    // ∫gU₀ = 0 and ∫gU₀z_j = 0, j = 0, 1, 2.
    let avg = solver.integrate(|y| g.g(y) * u0(y));
    assert!(avg.abs() < 1e-6, "{avg}");
    for j in 0..3 {
        let v = solver.integrate(|y| g.g(y) * u0(y) * small_z(j, y));
        assert!(v.abs() < 1e-6, "z_{j}: {v}");
    }
    // g reproduces the prescribed sphere function.
    for y in [[0.3, 0.2], [2.0, -1.0], [10.0, 5.0]] {
        assert!((g.g(y) - t.g_exact(y)).abs() < 1e-8);
    }
}

#[test]
fn dilation_kernel_gives_a_tame_g() {
    let solver = PlanarSolver::default();
    let z0 = PlanarTestFunction::new(4.0, |y| big_z(0, y)).unwrap().with_zero_mass();
    let g = solver.g_from_phi(&z0).unwrap();
    // Z₀ = U₀z₀ and (−Δ − U₀)z₀ = 0, so g stays within (1+r)^{2−σ}.
    for r in [1.0, 10.0, 100.0, 1000.0] {
        assert!(g.g([r, 0.0]).abs() <= 10.0 * (1.0 + r).powf(1.5), "r = {r}");
    }
}

#[test]
fn nonzero_mass_is_rejected() {
    let phi = PlanarTestFunction::new(4.0, u0).unwrap().with_zero_mass();
    assert!(matches!(light_solver().g_from_phi(&phi), Err(Error::NonzeroMass(_))));
}

#[test]
fn quadratic_form_against_the_spectral_side() {
    let solver = PlanarSolver::default();
    let t = BandLimitedTest::single(2, 0).unwrap();
    assert_eq!(t.spectral_value(), 0.75);
    let q = quadratic_form(&t.phi(), &solver).unwrap();
    assert!((q - PLANAR_FACTOR * 0.75).abs() < 1e-6, "{q}");
    // Sandwich: ∫φg/∫U₀g² lies in [1, 3/2] for degree ≥ 2; 3/2 at degree 2.
    let g = solver.g_from_phi(&t.phi()).unwrap();
    assert!((sandwich_ratio(&g, &solver) - 1.5).abs() < 1e-6);
    let g = solver.g_from_phi(&constructed_tests()[3].1.phi()).unwrap();
    let r = sandwich_ratio(&g, &solver);
    assert!(r > 1.0 && r < 1.5, "{r}");
}

#[test]
fn derivative_identity_for_a_scaled_family() {
    let solver = light_solver();
    let fixed = BandLimitedTest::single(3, -1).unwrap();
    let q = quadratic_form(&fixed.phi(), &solver).unwrap();
    let s = |tau: f64| 1.0 + 0.5 * tau * tau;
    let family = move |tau: f64| PlanarTestFunction::zero().combine(0.0, &fixed.phi(), s(tau));
    let tau = 0.7;
    let (lhs, rhs) = derivative_identity_check(&family, tau, 1e-3, &solver).unwrap();
    let oracle = s(tau) * tau * q;
    assert!((lhs - oracle).abs() < 1e-8 * oracle && (rhs - oracle).abs() < 1e-8 * oracle, "{lhs} {rhs} {oracle}");
    let still = |_: f64| BandLimitedTest::single(2, 2).unwrap().phi();
    let (a, b) = derivative_identity_check(&still, 0.0, 1e-3, &solver).unwrap();
    assert!(a.abs() < 1e-12 && b.abs() < 1e-9, "{a} {b}");
}

#[test]
fn hardy_quotient_scales_like_r_minus_two() {
    let scaled: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&r| hardy_quotient(r, 400).unwrap() * r * r).collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(lo > 0.0 && hi / lo <= 1.2, "{scaled:?}");
    assert!(hardy_quotient(5.0, 100).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn random_band_limited_tests_have_no_low_modes(coeffs in prop::collection::vec(-1.0f64..1.0, 12)) {
        // Degrees 2 and 3 only: indices 4..16.
        let mut g = SphereCoeffs::zeros(3);
        for (j, c) in coeffs.iter().enumerate() {
            let (l, k) = degree_order(j + 4);
            g.set(l, k, *c);
        }
        let t = BandLimitedTest::new(g).unwrap();
        let solver = light_solver();
        let field = solver.g_from_phi(&t.phi()).unwrap();
        let c = sphere_coefficients(&field, &SphereGrid::new(24, 50).unwrap(), 6).unwrap();
        prop_assert!(c.low_mode_max(1) <= 1e-8);
        prop_assert!(t.spectral_value() >= 0.0);
        let q = field.quadratic_form();
        prop_assert!((q - PLANAR_FACTOR * t.spectral_value()).abs() <= 1e-5 * q.abs().max(1.0), "{} {}", q, t.spectral_value());
    }
}
