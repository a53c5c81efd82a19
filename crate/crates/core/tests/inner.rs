use std::f64::consts::PI;

use ks_blowup::ansatz::{big_z, Cutoff};
use ks_blowup::inner::*;
use ks_blowup::Error;
use proptest::prelude::*;

const C: Cutoff = Cutoff::QuinticSmoothstep;

fn relative_moments(h: &InnerRHS) -> [f64; 4] {
    let m = moments(h).unwrap();
    let s = moment_scales(h).unwrap();
    [0, 1, 2, 3].map(|j| m[j].abs() / s[j])
}

fn orthogonal_profile(m: f64) -> InnerRHS {
    orthogonalize(&InnerRHS::power_profile(m).unwrap(), 4.0, 1.0, C).unwrap()
}

#[test]
fn orthogonalized_radial_rhs_has_no_moments() {
    let h = InnerRHS::power_profile(5.5).unwrap();
    // Odd moments vanish by parity before and after.
    let raw = moments(&h).unwrap();
    assert_eq!((raw[1], raw[2]), (0.0, 0.0));
    let o = orthogonalize(&h, 1e3, 0.1, C).unwrap();
    for (j, v) in relative_moments(&o).iter().enumerate() {
        assert!(*v <= 1e-10, "moment {j}: {v}");
    }
}

#[test]
fn orthogonalized_planar_rhs_has_no_moments() {
    let h = InnerRHS::planar(5.0, |y| (1.0 + (y[0] - 0.7).powi(2) + (y[1] + 0.4).powi(2)).powf(-2.5)).unwrap();
    let raw = relative_moments(&h);
    assert!(raw[1] > 0.1 && raw[2] > 0.1);
    let o = orthogonalize(&h, 1e2, 0.5, C).unwrap();
    for (j, v) in relative_moments(&o).iter().enumerate() {
        assert!(*v <= 1e-10, "moment {j}: {v}");
    }
}

#[test]
fn pure_mass_kernel_is_removed() {
    let p = Projector::new(1e3, 0.1, C).unwrap();
    let h = InnerRHS::radial(5.5, move |r| p.kernel(3, [r, 0.0])).unwrap();
    let o = orthogonalize(&h, 1e3, 0.1, C).unwrap();
    let worst = (0..2000).map(|i| o.eval_radial(0.25 * i as f64).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn denominators_match_their_limits() {
    // ∫Z₃χ̃ = −8π + O(λ²/t): the gap shrinks by 100 when √t/λ grows by 10.
    let a3 = |t: f64| Projector::new(t, 0.1, C).unwrap().gram().unwrap()[3][3];
    let (g1, g2) = (a3(1e2) + 8.0 * PI, a3(1e4) + 8.0 * PI);
    assert!((g1 / g2 - 100.0).abs() < 0.5, "{g1} {g2}");
    // ∫Z₀χ̃|y|² decreases by 32π per e-fold of √t/λ.
    let a0 = |t: f64| Projector::new(t, 0.1, C).unwrap().gram().unwrap()[0][0];
    let slope = (a0(1e6) - a0(1e4)) / (10f64).ln();
    assert!((slope + 32.0 * PI).abs() < 1e-3, "{slope}");
}

#[test]
fn literal_ratios_vanish_on_orthogonal_rhs() {
    let h = orthogonal_profile(5.5);
    let d = dj_coefficients(&h, 4.0, 1.0, C).unwrap();
    for v in d {
        assert!(v.abs() <= 1e-10, "{d:?}");
    }
    let nonzero = dj_coefficients(&InnerRHS::power_profile(5.5).unwrap(), 4.0, 1.0, C).unwrap();
    assert!(nonzero[3] > 0.0 && nonzero[0] != 0.0);
}

#[test]
fn degenerate_support_is_an_error() {
    let h = InnerRHS::power_profile(5.0).unwrap();
    assert!(matches!(dj_coefficients(&h, 1.0, 1e9, C), Err(Error::DegenerateProjector(_))));
}

#[test]
fn decay_law_of_the_elliptic_solution() {
    for m in [4.5, 5.0, 5.5] {
        let s = solve_elliptic_radial(&orthogonal_profile(m), &EllipticConfig::default()).unwrap();
        let fit = s.fitted_decay(1e4, 1e7).unwrap();
        assert!((fit - (m - 2.0)).abs() < 0.1, "m = {m}: {fit}");
        assert!(s.mass().abs() <= 1e-8, "m = {m}: mass {}", s.mass());
        assert!(s.relative_residual <= 1e-4, "m = {m}: residual {}", s.relative_residual);
    }
}

#[test]
fn elliptic_solution_satisfies_the_gauge_and_csv() {
    let s = solve_elliptic_radial(&orthogonal_profile(5.0), &EllipticConfig::default()).unwrap();
    // ψ decays and φ = U₀(g + ψ) at every node.
    assert!(s.psi.last().unwrap().abs() < 1e-6 * s.psi[0].abs());
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("y,phi,g,psi,residual\n"));
    assert_eq!(text.lines().count(), s.phi.len() + 1);
}

#[test]
fn march_relaxes_toward_the_elliptic_solution() {
    let m = 5.5;
    let h = orthogonal_profile(m);
    let e = solve_elliptic_radial(&h, &EllipticConfig::default()).unwrap();
    let cfg = MarchConfig { horizon: 1e6, outputs: vec![1e2, 1e4], decay: m, ..MarchConfig::default() };
    let out = inner_march(|_, r| h.eval_radial(r), |_| 1.0, &cfg).unwrap();
    let gaps: Vec<f64> = out
        .snapshots
        .iter()
        .map(|s| out.gap_modulo_dilation(s, |r| e.at(r), m, (s.tau.sqrt() / 10.0).min(1e4)).0)
        .collect();
    assert!(gaps[2] <= 0.05, "{gaps:?}");
    assert!(gaps[2] < gaps[0]);
    // Second moment conserved to 1e-6 per unit τ.
    let (tau, m2) = *out.second_moment.last().unwrap();
    assert!(m2.abs() / tau <= 1e-6, "{}", m2 / tau);
}

#[test]
fn march_norm_constant_is_stable_under_doubling() {
    let m = 5.5;
    let h0 = orthogonal_profile(m);
    let p = WeightedNormParams::new(0.5, 1.0, m - 5.0).unwrap();
    let h_norm = h0.envelope_constant(1e8);
    let horizon = 1e4;
    let outputs: Vec<f64> = (1..80).map(|k| 2.0 * horizon * k as f64 / 80.0).collect();
    let cfg = MarchConfig { horizon: 2.0 * horizon, outputs, decay: m, ..MarchConfig::default() };
    let out = inner_march(|t, r| p.time_weight(t) * h0.eval_radial(r), |_| 1.0, &cfg).unwrap();
    let r = out.grid.nodes();
    let constant = |upto: f64| {
        out.snapshots
            .iter()
            .filter(|s| s.tau <= upto * (1.0 + 1e-9))
            .map(|s| weighted_norm_phi_radial(s.t, r, &s.phi, &s.dphi, &p, 1.0, C))
            .fold(0.0, f64::max)
            / h_norm
    };
    let ratio = constant(2.0 * horizon) / constant(horizon);
    assert!(ratio < 1.5, "{ratio}");
}

#[test]
fn ansatz_error_norm_is_finite() {
    let p = WeightedNormParams::ansatz(0.5).unwrap();
    let v = ansatz_error_norm(1.0, &p, C, &[1e3, 1e4]).unwrap();
    assert!(v.is_finite() && v > 0.0, "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn orthogonalize_kills_moments_for_any_decay(m in 4.5f64..5.8, w in 0.3f64..3.0, shift in -1.0f64..1.0) {
        let h = InnerRHS::planar(m, move |y| {
            let q = ((y[0] - shift).powi(2) + y[1] * y[1]) / (w * w);
            (1.0 + q).powf(-0.5 * m) * (1.0 + 0.5 * big_z(0, y))
        }).unwrap();
        let o = orthogonalize(&h, 1e3, 0.2, C).unwrap();
        for v in relative_moments(&o) {
            prop_assert!(v <= 1e-10, "{v}");
        }
    }

    #[test]
    fn weighted_norm_is_homogeneous(a in -5.0f64..5.0) {
        let p = WeightedNormParams::new(1.0, 0.5, 0.5).unwrap();
        let s = NormSamples::log_spaced(1e2, 1e4, 3, 1e3, 40, 2);
        let h = |_: f64, y: [f64; 2]| (1.0 + y[0] * y[0] + y[1] * y[1]).powf(-3.0);
        let base = weighted_norm_h(h, &p, &s);
        let scaled = weighted_norm_h(|t, y| a * h(t, y), &p, &s);
        prop_assert!((scaled - a.abs() * base).abs() <= 1e-12 * base.max(1.0));
    }
}
