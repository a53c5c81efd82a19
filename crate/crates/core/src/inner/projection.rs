//! Projection onto the four kernel directions `Z_j χ̃`.
//!
//! The moments are ordered as the kernels: `[∫h|y|², ∫h y₁, ∫h y₂, ∫h]`,
//! matching `Z₀` (dilation), `Z₁, Z₂` (translations) and `Z₃` (mass).

use std::f64::consts::PI;
use std::sync::Arc;

use super::InnerRHS;
use crate::ansatz::{big_z, Cutoff};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_power_tail, Tolerance};

const TOL: Tolerance = Tolerance { abs: 1e-15, rel: 1e-13, max_depth: 48 };
const AZIMUTH: usize = 32;

/// Weight paired with kernel `j`.
fn weight(j: usize, y: [f64; 2]) -> f64 {
    match j {
        0 => y[0] * y[0] + y[1] * y[1],
        1 | 2 => y[j - 1],
        _ => 1.0,
    }
}

/// Power of `r` carried by weight `j`.
fn weight_degree(j: usize) -> f64 {
    match j {
        0 => 2.0,
        1 | 2 => 1.0,
        _ => 0.0,
    }
}

/// `∫ F dy` for `|F| ≲ r^{-q}` with `q > 2`, split at `breaks`.
fn planar_integral(f: &dyn Fn([f64; 2]) -> f64, radial: bool, q: f64, breaks: &[f64]) -> Result<f64> {
    let ring = |r: f64| -> f64 {
        if radial {
            return 2.0 * PI * f([r, 0.0]) * r;
        }
        let mut acc = 0.0;
        for j in 0..AZIMUTH {
            let th = 2.0 * PI * j as f64 / AZIMUTH as f64;
            acc += f([r * th.cos(), r * th.sin()]);
        }
        2.0 * PI * acc / AZIMUTH as f64 * r
    };
    let mut pts = vec![0.0, 1.0];
    pts.extend(breaks.iter().copied().filter(|&b| b > 1.0));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut acc = 0.0;
    for w in pts.windows(2) {
        acc += integrate(ring, w[0], w[1], TOL)?;
    }
    let last = *pts.last().expect("nonempty");
    Ok(acc + integrate_power_tail(ring, last, q - 1.0, TOL)?)
}

/// Radial integrals `2π ∫ F(r) r dr` needing only the given breaks.
fn radial_integral(f: impl Fn(f64) -> f64, breaks: &[f64], q: f64) -> Result<f64> {
    let g = |y: [f64; 2]| f(y[0].hypot(y[1]));
    planar_integral(&g, true, q, breaks)
}

/// The four moments of `h`.
pub fn moments(h: &InnerRHS) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (j, slot) in out.iter_mut().enumerate() {
        if h.is_radial() && (j == 1 || j == 2) {
            continue;
        }
        let f = |y: [f64; 2]| h.eval(y) * weight(j, y);
        *slot = planar_integral(&f, h.is_radial(), h.decay() - weight_degree(j), h.breaks())?;
    }
    Ok(out)
}

/// `∫ |h| |w_j|`, the scale against which moment `j` is judged.
pub fn moment_scales(h: &InnerRHS) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (j, slot) in out.iter_mut().enumerate() {
        let f = |y: [f64; 2]| (h.eval(y) * weight(j, y)).abs();
        *slot = planar_integral(&f, h.is_radial() && j != 1 && j != 2, h.decay() - weight_degree(j), h.breaks())?;
    }
    Ok(out)
}

/// Kernels cut off at `|y| ~ √t/λ`.
#[derive(Debug, Clone, Copy)]
pub struct Projector {
    t: f64,
    lambda: f64,
    cutoff: Cutoff,
}

impl Projector {
    pub fn new(t: f64, lambda: f64, cutoff: Cutoff) -> Result<Self> {
        if !(t > 0.0 && lambda > 0.0 && t.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("projector needs t, λ > 0, got {t}, {lambda}")));
        }
        Ok(Self { t, lambda, cutoff })
    }

    /// `χ̃(y) = χ₀(λ|y| / (2√t))`.
    pub fn chi_tilde(&self, r: f64) -> f64 {
        self.cutoff.chi(0.5 * self.lambda * r / self.t.sqrt())
    }

    /// Radii between which `χ̃` falls from 1 to 0.
    pub fn cutoff_radii(&self) -> [f64; 2] {
        let s = 2.0 * self.t.sqrt() / self.lambda;
        let [a, b] = self.cutoff.breakpoints();
        [a * s, b * s]
    }

    /// `Z_j χ̃` at `y`.
    pub fn kernel(&self, j: usize, y: [f64; 2]) -> f64 {
        big_z(j, y) * self.chi_tilde(y[0].hypot(y[1]))
    }

    /// `A[i][j] = ∫ Z_j χ̃ w_i`. Radial and dipole blocks decouple by parity.
    pub fn gram(&self) -> Result<[[f64; 4]; 4]> {
        let br = self.cutoff_radii();
        let z0 = |r: f64| big_z(0, [r, 0.0]) * self.chi_tilde(r);
        let z3 = |r: f64| big_z(3, [r, 0.0]) * self.chi_tilde(r);
        let mut a = [[0.0; 4]; 4];
        // Compact support: any tail exponent is exact.
        a[0][0] = radial_integral(|r| z0(r) * r * r, &br, 8.0)?;
        a[3][0] = radial_integral(z0, &br, 8.0)?;
        a[0][3] = radial_integral(|r| z3(r) * r * r, &br, 8.0)?;
        a[3][3] = radial_integral(z3, &br, 8.0)?;
        // ∫ Z₁ χ̃ y₁ = π ∫ Z₁(r,0)/cosθ · r² dr with the azimuthal average ½.
        let dip = radial_integral(|r| 0.5 * big_z(1, [r, 0.0]) * self.chi_tilde(r) * r, &br, 8.0)?;
        a[1][1] = dip;
        a[2][2] = dip;
        Ok(a)
    }
}

fn check_denominator(v: f64) -> Result<f64> {
    if v.abs() < 1e-12 {
        return Err(Error::DegenerateProjector(v));
    }
    Ok(v)
}

/// The ratios `d_j = −∫h w_j / ∫Z_j χ̃ w_j`, each direction on its own.
pub fn dj_coefficients(h: &InnerRHS, t: f64, lambda: f64, cutoff: Cutoff) -> Result<[f64; 4]> {
    let a = Projector::new(t, lambda, cutoff)?.gram()?;
    let mom = moments(h)?;
    let mut d = [0.0; 4];
    for j in 0..4 {
        d[j] = -mom[j] / check_denominator(a[j][j])?;
    }
    Ok(d)
}

/// Coefficients that annihilate all four moments at once. `Z₀χ̃` carries a
/// small mass and `Z₃χ̃` a second moment, so the radial pair is solved as a
/// 2×2 system; the decoupled ratios are its diagonal approximation.
pub fn coupled_coefficients(h: &InnerRHS, p: &Projector) -> Result<[f64; 4]> {
    let a = p.gram()?;
    let mom = moments(h)?;
    let det = a[0][0] * a[3][3] - a[0][3] * a[3][0];
    check_denominator(a[0][0])?;
    check_denominator(a[3][3])?;
    let det = check_denominator(det)?;
    let d0 = (-mom[0] * a[3][3] + mom[3] * a[0][3]) / det;
    let d3 = (-mom[3] * a[0][0] + mom[0] * a[3][0]) / det;
    let d1 = -mom[1] / check_denominator(a[1][1])?;
    let d2 = -mom[2] / check_denominator(a[2][2])?;
    Ok([d0, d1, d2, d3])
}

/// `h + Σ d_j Z_j χ̃` with all four moments removed.
pub fn orthogonalize(h: &InnerRHS, t: f64, lambda: f64, cutoff: Cutoff) -> Result<InnerRHS> {
    let p = Projector::new(t, lambda, cutoff)?;
    let d = coupled_coefficients(h, &p)?;
    let radial = d[1] == 0.0 && d[2] == 0.0;
    let extra = Arc::new(move |y: [f64; 2]| (0..4).map(|j| d[j] * p.kernel(j, y)).sum::<f64>());
    Ok(h.plus(extra, radial, &p.cutoff_radii()))
}
