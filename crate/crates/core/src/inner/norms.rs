//! Weighted sup-norms for the inner problem, evaluated on sample sets.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::ansatz::{u2_radial, BubbleParams, Cutoff};
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::grid::RadialGrid;
use crate::radial::residual_S;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormParams {
    pub nu: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl WeightedNormParams {
    pub fn new(nu: f64, mu: f64, sigma: f64) -> Result<Self> {
        if !(nu > 0.0 && nu < 3.0) {
            return Err(Error::InvalidParameter(format!("nu = {nu} outside (0, 3)")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu = {mu} must be finite")));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} outside (0, 1)")));
        }
        Ok(Self { nu, mu, sigma })
    }

    /// The exponents matching the size of the ansatz error.
    pub fn ansatz(sigma: f64) -> Result<Self> {
        Self::new(0.5 * (1.0 - sigma), 0.5 * (3.0 - sigma), sigma)
    }

    /// `t^{-ν} |log t|^{-μ}`.
    pub fn time_weight(&self, t: f64) -> f64 {
        t.powf(-self.nu) * t.ln().abs().powf(-self.mu)
    }
}

/// Points `(t, y)` over which the suprema are taken.
#[derive(Debug, Clone)]
pub struct NormSamples {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub rays: usize,
}

impl NormSamples {
    /// `nt` log-spaced times in `[t0, t1]` and radii `0` plus log-spaced
    /// values up to `r_max`.
    pub fn log_spaced(t0: f64, t1: f64, nt: usize, r_max: f64, nr: usize, rays: usize) -> Self {
        let times =
            (0..nt).map(|i| if nt == 1 { t0 } else { t0 * (t1 / t0).powf(i as f64 / (nt - 1) as f64) }).collect();
        let mut radii = vec![0.0];
        radii.extend((0..nr).map(|i| 1e-2 * (r_max / 1e-2).powf(i as f64 / (nr - 1).max(1) as f64)));
        Self { times, radii, rays: rays.max(1) }
    }

    fn points(&self) -> impl Iterator<Item = (f64, [f64; 2])> + '_ {
        self.times.iter().flat_map(move |&t| {
            self.radii.iter().flat_map(move |&r| {
                (0..self.rays).map(move |k| {
                    let th = 2.0 * PI * (k as f64 + 0.5) / self.rays as f64;
                    (t, [r * th.cos(), r * th.sin()])
                })
            })
        })
    }
}

/// `‖h‖_{i,**}`: `sup |h| t^ν |log t|^μ (1+|y|)^{5+σ}`.
pub fn weighted_norm_h(h: impl Fn(f64, [f64; 2]) -> f64, p: &WeightedNormParams, s: &NormSamples) -> f64 {
    s.points()
        .map(|(t, y)| h(t, y).abs() * (1.0 + y[0].hypot(y[1])).powf(5.0 + p.sigma) / p.time_weight(t))
        .fold(0.0, f64::max)
}

/// Denominator of `‖φ‖_{i,*}` at `(t, |y|)`.
fn phi_weight(p: &WeightedNormParams, t: f64, r: f64, chi: f64) -> f64 {
    let q = 1.0 + r;
    p.time_weight(t) * (chi * q.powf(-3.0 - p.sigma) + t * t.ln().abs() * (1.0 - chi) * q.powf(-5.0 - p.sigma))
}

/// `χ̃ = χ₀(λ|y|/(2√t))`.
pub fn chi_tilde(cutoff: Cutoff, t: f64, lambda: f64, r: f64) -> f64 {
    cutoff.chi(0.5 * lambda * r / t.sqrt())
}

/// `‖φ‖_{i,*}`: `sup (|φ| + (1+|y|)|∇φ|)` over the two-zone weight split by
/// `χ̃`. Gradients are central differences of `phi`.
pub fn weighted_norm_phi(
    phi: impl Fn(f64, [f64; 2]) -> f64,
    p: &WeightedNormParams,
    lambda: impl Fn(f64) -> f64,
    cutoff: Cutoff,
    s: &NormSamples,
) -> f64 {
    s.points()
        .map(|(t, y)| {
            let r = y[0].hypot(y[1]);
            let d = 1e-5 * (1.0 + r);
            let gx = (phi(t, [y[0] + d, y[1]]) - phi(t, [y[0] - d, y[1]])) / (2.0 * d);
            let gy = (phi(t, [y[0], y[1] + d]) - phi(t, [y[0], y[1] - d])) / (2.0 * d);
            let num = phi(t, y).abs() + (1.0 + r) * gx.hypot(gy);
            num / phi_weight(p, t, r, chi_tilde(cutoff, t, lambda(t), r))
        })
        .fold(0.0, f64::max)
}

/// The same ratio for a radial profile known at nodes with its derivative.
pub fn weighted_norm_phi_radial(
    t: f64,
    r: &[f64],
    phi: &[f64],
    dphi: &[f64],
    p: &WeightedNormParams,
    lambda: f64,
    cutoff: Cutoff,
) -> f64 {
    (0..r.len())
        .map(|i| {
            let num = phi[i].abs() + (1.0 + r[i]) * dphi[i].abs();
            num / phi_weight(p, t, r[i], chi_tilde(cutoff, t, lambda, r[i]))
        })
        .fold(0.0, f64::max)
}

/// `‖λ⁴ S(u₂)(λy) χ̃‖_{i,**}` along `λ(t) = κ/√log t`, where `∂_t u₂` is a
/// central difference in `t` with step `δt = 1e-4 t`.
pub fn ansatz_error_norm(kappa: f64, p: &WeightedNormParams, cutoff: Cutoff, times: &[f64]) -> Result<f64> {
    let lam = |t: f64| kappa / t.ln().sqrt();
    let mut worst: f64 = 0.0;
    for &t in times {
        let l = lam(t);
        let grid = Arc::new(RadialGrid::geometric_with_core(6001, 40.0 * t.sqrt(), 0.05 * l)?);
        let at = |tt: f64| -> Result<RadialField> {
            let bp = BubbleParams::calibrated(lam(tt), tt, cutoff)?;
            RadialField::from_fn(grid.clone(), |r| u2_radial(r, &bp, cutoff))
        };
        let dt = 1e-4 * t;
        let u = at(t)?;
        let u_t = at(t + dt)?.combine(0.5 / dt, &at(t - dt)?, -0.5 / dt)?;
        let s = residual_S(&u, &u_t)?;
        for (i, &x) in grid.nodes().iter().enumerate() {
            let y = x / l;
            let h = l.powi(4) * s.values()[i] * chi_tilde(cutoff, t, l, y);
            worst = worst.max(h.abs() * (1.0 + y).powf(5.0 + p.sigma) / p.time_weight(t));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_function_has_unit_norm_and_scales() {
        let p = WeightedNormParams::new(1.2, 0.7, 0.4).unwrap();
        let s = NormSamples::log_spaced(1e2, 1e6, 7, 1e4, 50, 3);
        let h = move |t: f64, y: [f64; 2]| p.time_weight(t) * (1.0 + y[0].hypot(y[1])).powf(-5.4);
        assert!((weighted_norm_h(h, &p, &s) - 1.0).abs() < 1e-12);
        let h2 = move |t: f64, y: [f64; 2]| 2.0 * h(t, y);
        assert!((weighted_norm_h(h2, &p, &s) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parameter_ranges() {
        assert!(WeightedNormParams::new(3.0, 0.0, 0.5).is_err());
        assert!(WeightedNormParams::new(1.0, 0.0, 1.0).is_err());
        assert!(WeightedNormParams::ansatz(0.5).is_ok());
    }

    #[test]
    fn phi_norm_matches_radial_version() {
        let p = WeightedNormParams::new(1.0, 1.0, 0.5).unwrap();
        let c = Cutoff::default();
        let t = 1e3;
        let f = |r: f64| (1.0 + r * r).powf(-1.75);
        let df = |r: f64| -3.5 * r * (1.0 + r * r).powf(-2.75);
        let s = NormSamples { times: vec![t], radii: (0..200).map(|i| 0.1 * i as f64).collect(), rays: 1 };
        let a = weighted_norm_phi(|_, y| f(y[0].hypot(y[1])), &p, |_| 0.1, c, &s);
        let r: Vec<f64> = s.radii.clone();
        let phi: Vec<f64> = r.iter().map(|&x| f(x)).collect();
        let dphi: Vec<f64> = r.iter().map(|&x| df(x)).collect();
        let b = weighted_norm_phi_radial(t, &r, &phi, &dphi, &p, 0.1, c);
        assert!((a - b).abs() < 1e-6 * b, "{a} {b}");
    }
}
