//! The inner linearized problem around the bubble: projections onto the
//! kernel directions, the radial elliptic solve, weighted norms, and a
//! parabolic march.

pub mod elliptic;
pub mod march;
pub mod norms;
pub mod projection;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use elliptic::{solve_elliptic_radial, EllipticConfig, EllipticSolution};
pub use march::{inner_march, MarchConfig, MarchOutput, Snapshot};
pub use norms::{
    ansatz_error_norm, chi_tilde, weighted_norm_h, weighted_norm_phi, weighted_norm_phi_radial, NormSamples,
    WeightedNormParams,
};
pub use projection::{coupled_coefficients, dj_coefficients, moment_scales, moments, orthogonalize, Projector};

type Evaluator = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// A right-hand side `h(y)` of the inner problem, `|h| ≲ (1+|y|)^{-m}`.
#[derive(Clone)]
pub struct InnerRHS {
    f: Evaluator,
    decay: f64,
    radial: bool,
    breaks: Vec<f64>,
}

impl fmt::Debug for InnerRHS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InnerRHS")
            .field("decay", &self.decay)
            .field("radial", &self.radial)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl InnerRHS {
    fn check(decay: f64) -> Result<()> {
        if !(decay > 4.0 && decay < 6.0) {
            return Err(Error::InvalidParameter(format!("decay exponent {decay} outside (4, 6)")));
        }
        Ok(())
    }

    /// A radial profile `h(|y|)`.
    pub fn radial(decay: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::check(decay)?;
        Ok(Self { f: Arc::new(move |y: [f64; 2]| f(y[0].hypot(y[1]))), decay, radial: true, breaks: Vec::new() })
    }

    pub fn planar(decay: f64, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::check(decay)?;
        Ok(Self { f: Arc::new(f), decay, radial: false, breaks: Vec::new() })
    }

    /// `r^{-m}`-type envelope profile `(1+r²)^{-m/2}`, smooth at the origin.
    pub fn power_profile(decay: f64) -> Result<Self> {
        Self::radial(decay, move |r| (1.0 + r * r).powf(-0.5 * decay))
    }

    pub fn zero() -> Self {
        Self { f: Arc::new(|_| 0.0), decay: 5.5, radial: true, breaks: Vec::new() }
    }

    pub fn eval(&self, y: [f64; 2]) -> f64 {
        (self.f)(y)
    }

    pub fn eval_radial(&self, r: f64) -> f64 {
        (self.f)([r, 0.0])
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    /// Radii where the profile may lose smoothness.
    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn scaled(&self, a: f64) -> Self {
        let f = self.f.clone();
        Self { f: Arc::new(move |y| a * f(y)), ..self.clone() }
    }

    /// `self + Σ c_k f_k`, where the added terms have compact support or
    /// faster decay and may carry kinks at `breaks`.
    pub(crate) fn plus(&self, extra: Evaluator, radial: bool, breaks: &[f64]) -> Self {
        let f = self.f.clone();
        let mut all = self.breaks.clone();
        all.extend_from_slice(breaks);
        all.sort_by(f64::total_cmp);
        all.dedup();
        Self { f: Arc::new(move |y| f(y) + extra(y)), decay: self.decay, radial: self.radial && radial, breaks: all }
    }

    /// `sup |h(y)| (1+|y|)^m` over rays out to `r_max`.
    pub fn envelope_constant(&self, r_max: f64) -> f64 {
        let rays = if self.radial { 1 } else { 16 };
        let mut worst: f64 = 0.0;
        for i in 0..=600 {
            let r = r_max.powf(i as f64 / 600.0) - 1.0;
            for j in 0..rays {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / rays as f64;
                worst = worst.max(self.eval([r * th.cos(), r * th.sin()]).abs() * (1.0 + r).powf(self.decay));
            }
        }
        worst
    }
}
