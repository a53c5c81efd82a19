//! The bubble family and the corrected approximation `u₂ = u₁ + φ₁`.

pub mod cutoff;
pub mod profile;
pub mod selfsim;

use std::f64::consts::{E, PI};

pub use cutoff::Cutoff;
pub use profile::{big_z, grad_u0, grad_v0, small_z, u0, u0_radial, v0, v0_radial};
pub use selfsim::{g0_of_zeta, g_of_zeta, residual_g_ode, zbar_of_zeta, I_const, SelfSimilar};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};

/// Modulation parameters of the ansatz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleParams {
    pub lambda: f64,
    pub alpha: f64,
    pub xi: [f64; 2],
    pub t: f64,
}

impl BubbleParams {
    pub fn new(lambda: f64, alpha: f64, xi: [f64; 2], t: f64) -> Result<Self> {
        let p = Self { lambda, alpha, xi, t };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `α` chosen so that `u₂` has mass exactly `8π`.
    pub fn calibrated(lambda: f64, t: f64, cutoff: Cutoff) -> Result<Self> {
        Self::new(lambda, 1.0, [0.0, 0.0], t)?;
        Self::new(lambda, alpha_calibrated(t, lambda, cutoff)?, [0.0, 0.0], t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda = {} must be positive", self.lambda)));
        }
        if !((self.alpha - 1.0).abs() < 0.5) {
            return Err(Error::InvalidParameter(format!("alpha = {} outside (0.5, 1.5)", self.alpha)));
        }
        if !(self.t >= E && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t = {} must be at least e", self.t)));
        }
        if !(self.xi[0].is_finite() && self.xi[1].is_finite()) {
            return Err(Error::InvalidParameter("xi must be finite".into()));
        }
        Ok(())
    }

    fn dist(&self, x: [f64; 2]) -> f64 {
        (x[0] - self.xi[0]).hypot(x[1] - self.xi[1])
    }

    /// The bubble `λ⁻² U₀((x−ξ)/λ)` at distance `r` from `ξ`.
    pub fn bubble_radial(&self, r: f64) -> f64 {
        u0_radial(r / self.lambda) / (self.lambda * self.lambda)
    }
}

/// Leading-order mass calibration `α₀ = 1 + aλ²/t`.
pub fn alpha0(t: f64, lambda: f64, cutoff: Cutoff) -> f64 {
    1.0 + SelfSimilar::get(cutoff).a() * lambda * lambda / t
}

/// Mass of the cut-off bubble `λ⁻²U₀(r/λ) χ₀(r/√t)`.
pub fn cut_bubble_mass(t: f64, lambda: f64, cutoff: Cutoff) -> Result<f64> {
    let l2 = lambda * lambda;
    let st = t.sqrt();
    let lost = integrate(
        |r| (1.0 - cutoff.chi(r / st)) * 8.0 * l2 * r / (l2 + r * r).powi(2),
        st,
        2.0 * st,
        Tolerance::new(1e-16, 1e-12),
    )?;
    let tail = 4.0 * l2 / (l2 + 4.0 * t);
    Ok(2.0 * PI * (4.0 - lost - tail))
}

/// Mass of `φ₁`, `2πλ²/t ∫ g ζ dζ`.
pub fn phi1_mass(t: f64, lambda: f64, cutoff: Cutoff) -> f64 {
    2.0 * PI * lambda * lambda / t * SelfSimilar::get(cutoff).mass_moment()
}

/// `α` for which `u₂` carries mass exactly `8π`.
pub fn alpha_calibrated(t: f64, lambda: f64, cutoff: Cutoff) -> Result<f64> {
    Ok((8.0 * PI - phi1_mass(t, lambda, cutoff)) / cut_bubble_mass(t, lambda, cutoff)?)
}

/// `φ₁(x, t) = λ² t⁻² g(|x−ξ|/√t)`.
pub fn phi1(x: [f64; 2], p: &BubbleParams, cutoff: Cutoff) -> f64 {
    phi1_radial(p.dist(x), p, cutoff)
}

pub fn phi1_radial(r: f64, p: &BubbleParams, cutoff: Cutoff) -> f64 {
    p.lambda * p.lambda / (p.t * p.t) * g_of_zeta(r / p.t.sqrt(), cutoff)
}

/// `u₁ = α λ⁻² U₀((x−ξ)/λ) χ₀(|x−ξ|/√t)`.
pub fn u1(x: [f64; 2], p: &BubbleParams, cutoff: Cutoff) -> f64 {
    u1_radial(p.dist(x), p, cutoff)
}

pub fn u1_radial(r: f64, p: &BubbleParams, cutoff: Cutoff) -> f64 {
    p.alpha * p.bubble_radial(r) * cutoff.chi(r / p.t.sqrt())
}

pub fn u2(x: [f64; 2], p: &BubbleParams, cutoff: Cutoff) -> f64 {
    u2_radial(p.dist(x), p, cutoff)
}

pub fn u2_radial(r: f64, p: &BubbleParams, cutoff: Cutoff) -> f64 {
    u1_radial(r, p, cutoff) + phi1_radial(r, p, cutoff)
}

/// `∫ (U₀² − ∇U₀·∇V₀) |y|^{2k} dy` for `k ∈ {0, 1}`.
fn bubble_flux_moment(k: i32) -> Result<f64> {
    let f = |r: f64| {
        let q = 1.0 + r * r;
        (64.0 - 128.0 * r * r) / q.powi(4) * r.powi(2 * k + 1)
    };
    let tol = Tolerance::new(1e-14, 1e-13);
    Ok(2.0 * PI * (integrate(f, 0.0, 1.0, tol)? + integrate_to_infinity(f, 1.0, tol)?))
}

/// `∫ (U₀² − ∇U₀·∇V₀) |y|² dy`, which equals `−32π`.
pub fn minus32pi_check() -> Result<f64> {
    bubble_flux_moment(1)
}

/// The same integrand without weight; vanishes by the divergence structure.
pub fn flux_mass_check() -> Result<f64> {
    bubble_flux_moment(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_are_validated() {
        assert!(BubbleParams::new(0.1, 1.0, [0.0, 0.0], 1e3).is_ok());
        assert!(BubbleParams::new(-0.1, 1.0, [0.0, 0.0], 1e3).is_err());
        assert!(BubbleParams::new(0.1, 1.6, [0.0, 0.0], 1e3).is_err());
        assert!(BubbleParams::new(0.1, 1.0, [0.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn a_is_bounded_below() {
        for c in Cutoff::ALL {
            assert!(SelfSimilar::get(c).a() > 0.25);
        }
    }

    #[test]
    fn calibrated_alpha_is_close_to_leading_order() {
        for c in Cutoff::ALL {
            let (t, l) = (1e3, 0.1);
            let a0 = alpha0(t, l, c);
            let ac = alpha_calibrated(t, l, c).unwrap();
            assert!((a0 - ac).abs() < 10.0 * l * l / t);
        }
    }

    #[test]
    fn divergence_structure() {
        assert!(flux_mass_check().unwrap().abs() < 1e-11);
    }
}
