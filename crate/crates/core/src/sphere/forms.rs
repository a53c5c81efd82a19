//! The quadratic form `∫φg`, its spectral representation, and band-limited
//! test functions built backwards from prescribed sphere coefficients.

use crate::ansatz::u0_radial;
use crate::error::{Error, Result};

use super::harmonics::{SphereCoeffs, SphereGrid};
use super::planar::{plane_to_sphere, sphere_to_plane, GField, PlanarSolver, PlanarTestFunction};

/// `½ Σ_{l≥2} l(l+1)/(l(l+1)−2) g̃²`.
///
/// With harmonics orthonormal on the unit sphere, `U₀ dy = 2 dA`, so the
/// planar pairing `∫φg` equals [`PLANAR_FACTOR`] times this value.
pub fn spectral_form(coeffs: &SphereCoeffs) -> f64 {
    0.5 * coeffs
        .iter()
        .filter(|&(l, _, _)| l >= 2)
        .map(|(l, _, c)| {
            let lam = SphereCoeffs::eigenvalue(l);
            lam / (lam - 2.0) * c * c
        })
        .sum::<f64>()
}

/// Ratio of `∫φg` to [`spectral_form`] implied by `U₀ dy = 2 dA`.
pub const PLANAR_FACTOR: f64 = 4.0;

/// `∫φg` by planar quadrature.
pub fn quadratic_form(phi: &PlanarTestFunction, solver: &PlanarSolver) -> Result<f64> {
    Ok(solver.g_from_phi(phi)?.quadratic_form())
}

/// Samples of `φ∘Π` on the sphere grid.
pub fn to_sphere(phi: &PlanarTestFunction, grid: &SphereGrid) -> Vec<f64> {
    grid.sample(|p| if p[2] >= 1.0 { 0.0 } else { phi.eval(sphere_to_plane(p)) })
}

/// `(∫_{S²} φ∘Π dA, ½∫ φ U₀ dy)`.
pub fn integral_identity_check(phi: &PlanarTestFunction, grid: &SphereGrid, solver: &PlanarSolver) -> (f64, f64) {
    let sphere = grid.integrate(&to_sphere(phi, grid));
    let plane = 0.5 * solver.integrate(|y| phi.eval(y) * u0_radial(y[0].hypot(y[1])));
    (sphere, plane)
}

/// Coefficients of `g∘Π` up to degree `l_max`.
pub fn sphere_coefficients(g: &GField, grid: &SphereGrid, l_max: usize) -> Result<SphereCoeffs> {
    let samples = grid.sample(|p| g.g(sphere_to_plane(p)));
    grid.decompose(&samples, l_max)
}

/// `∫φg / ∫U₀g²`, the empirical constant of the two-sided bound.
pub fn sandwich_ratio(g: &GField, solver: &PlanarSolver) -> f64 {
    let denom = solver.integrate(|y| u0_radial(y[0].hypot(y[1])) * g.g(y).powi(2));
    g.quadratic_form() / denom
}

/// A zero-mass `φ = U₀(g + ψ)` whose `g∘Π` has prescribed coefficients of
/// degree at least 2, with `ψ̃_j = 2g̃_j/(λ_j − 2)`.
#[derive(Debug, Clone)]
pub struct BandLimitedTest {
    g: SphereCoeffs,
    psi: SphereCoeffs,
}

impl BandLimitedTest {
    pub fn new(g: SphereCoeffs) -> Result<Self> {
        if g.low_mode_max(1) != 0.0 {
            return Err(Error::InvalidParameter("band-limited tests carry no degree 0 or 1 content".into()));
        }
        let mut psi = SphereCoeffs::zeros(g.l_max());
        for (l, k, c) in g.iter() {
            if l >= 2 {
                psi.set(l, k, 2.0 * c / (SphereCoeffs::eigenvalue(l) - 2.0));
            }
        }
        Ok(Self { g, psi })
    }

    /// Single harmonic `e_{l,k}`.
    pub fn single(l: usize, k: i64) -> Result<Self> {
        let mut g = SphereCoeffs::zeros(l.max(2));
        g.set(l, k, 1.0);
        Self::new(g)
    }

    pub fn g_coeffs(&self) -> &SphereCoeffs {
        &self.g
    }

    pub fn psi_coeffs(&self) -> &SphereCoeffs {
        &self.psi
    }

    pub fn g_exact(&self, y: [f64; 2]) -> f64 {
        self.g.eval(plane_to_sphere(y))
    }

    pub fn psi_exact(&self, y: [f64; 2]) -> f64 {
        self.psi.eval(plane_to_sphere(y))
    }

    pub fn spectral_value(&self) -> f64 {
        spectral_form(&self.g)
    }

    pub fn phi(&self) -> PlanarTestFunction {
        let mut sum = self.g.clone();
        for (l, k, c) in self.psi.iter() {
            sum.set(l, k, sum.get(l, k) + c);
        }
        PlanarTestFunction::new(4.0, move |y| u0_radial(y[0].hypot(y[1])) * sum.eval(plane_to_sphere(y)))
            .expect("decay 4")
            .with_zero_mass()
    }
}

/// The five constructed tests: name and test function.
pub fn constructed_tests() -> Vec<(&'static str, BandLimitedTest)> {
    let mut mixed = SphereCoeffs::zeros(4);
    mixed.set(2, 0, 1.0);
    mixed.set(2, -2, 0.5);
    mixed.set(4, 3, -0.3);
    let mut dipole_free = SphereCoeffs::zeros(5);
    dipole_free.set(5, -4, 2.0);
    dipole_free.set(2, 1, 1.0);
    let mut dense = SphereCoeffs::zeros(6);
    for j in 4..49 {
        let (l, k) = super::harmonics::degree_order(j);
        dense.set(l, k, (1.7 * j as f64).sin() / (1.0 + l as f64));
    }
    vec![
        ("single_e20", BandLimitedTest::single(2, 0).expect("degree 2")),
        ("single_e31", BandLimitedTest::single(3, 1).expect("degree 3")),
        ("mixed_l4", BandLimitedTest::new(mixed).expect("no low modes")),
        ("sparse_l5", BandLimitedTest::new(dipole_free).expect("no low modes")),
        ("dense_l6", BandLimitedTest::new(dense).expect("no low modes")),
    ]
}

/// `g̃ = a(τ) e_{2,0} + b(τ) e_{l,k}` with `(a, b) = (cos ωτ, sin ωτ)`.
pub fn rotating_family(omega: f64, l: usize, k: i64) -> impl Fn(f64) -> PlanarTestFunction {
    move |tau| {
        let mut g = SphereCoeffs::zeros(l.max(2));
        g.set(2, 0, (omega * tau).cos());
        g.set(l, k, g.get(l, k) + (omega * tau).sin());
        BandLimitedTest::new(g).expect("degree at least 2").phi()
    }
}

/// `(∫φ_τ g, ½ d/dτ ∫φg)` at `τ`, both derivatives by fourth-order central
/// differences with step `delta`.
pub fn derivative_identity_check(
    family: &dyn Fn(f64) -> PlanarTestFunction,
    tau: f64,
    delta: f64,
    solver: &PlanarSolver,
) -> Result<(f64, f64)> {
    let shifts = [-2.0, -1.0, 1.0, 2.0];
    let weights = [1.0, -8.0, 8.0, -1.0];
    let members: Vec<PlanarTestFunction> = shifts.iter().map(|s| family(tau + s * delta)).collect();
    let mut phi_t = PlanarTestFunction::zero();
    for (m, w) in members.iter().zip(weights) {
        phi_t = phi_t.combine(1.0, m, w / (12.0 * delta));
    }
    let lhs = solver.g_from_phi(&family(tau))?.pair_with(&phi_t);
    let mut rhs = 0.0;
    for (m, w) in members.iter().zip(weights) {
        rhs += w * solver.g_from_phi(m)?.quadratic_form();
    }
    Ok((lhs, 0.5 * rhs / (12.0 * delta)))
}
