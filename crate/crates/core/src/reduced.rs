//! Reduced modulation dynamics for `(α, η = λ², ξ)`:
//!
//! `λλ̇ = −2(α−1)/log t + f₀`, `α̇ = −λ²/(4t²) + f₃`, `ξ̇ = f`.
//!
//! The integrator works in `s = log t` with `β = α − 1` as unknown, so the
//! tiny mass excess keeps its relative precision over many decades.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::Dopri5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub t: f64,
    pub alpha: f64,
    pub eta: f64,
    pub xi: [f64; 2],
}

impl ReducedState {
    pub fn new(t: f64, alpha: f64, eta: f64, xi: [f64; 2]) -> Result<Self> {
        let s = Self { t, alpha, eta, xi };
        s.validate()?;
        Ok(s)
    }

    /// `η(t₀) = 1/log t₀` with the slaved `α`.
    pub fn default_at(t0: f64) -> Result<Self> {
        Self::slaved(t0, 1.0 / t0.ln(), [0.0, 0.0])
    }

    /// State with `α = 1 + η/(4t)`.
    pub fn slaved(t: f64, eta: f64, xi: [f64; 2]) -> Result<Self> {
        Self::new(t, slaved_alpha(t, eta), eta, xi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > std::f64::consts::E && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("t = {} must exceed e", self.t)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta = {} must be positive", self.eta)));
        }
        if !self.alpha.is_finite() || !self.xi.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("alpha and xi must be finite".into()));
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.eta.sqrt()
    }
}

pub fn slaved_alpha(t: f64, eta: f64) -> f64 {
    1.0 + eta / (4.0 * t)
}

type Hook = Arc<dyn Fn(&ReducedState) -> f64 + Send + Sync>;

/// Synthetic forcing `f₀`, `f₃`, `(f₁, f₂)`.
#[derive(Clone)]
pub struct Forcing {
    pub f0: Hook,
    pub f3: Hook,
    pub fxi: [Hook; 2],
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Forcing { .. }")
    }
}

impl Default for Forcing {
    fn default() -> Self {
        Self::none()
    }
}

impl Forcing {
    pub fn none() -> Self {
        let z: Hook = Arc::new(|_| 0.0);
        Self { f0: z.clone(), f3: z.clone(), fxi: [z.clone(), z] }
    }

    /// Every hook at the top of its envelope:
    /// `C/(t log³t)`, `C/(t² log³t)` and `C/t^{3/2−σ}`.
    pub fn envelope_ceiling(c: f64, sigma: f64) -> Self {
        Self {
            f0: Arc::new(move |s| c / (s.t * s.t.ln().powi(3))),
            f3: Arc::new(move |s| c / (s.t * s.t * s.t.ln().powi(3))),
            fxi: [Arc::new(move |s| c * s.t.powf(sigma - 1.5)), Arc::new(move |s| -c * s.t.powf(sigma - 1.5))],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub alpha: f64,
    pub eta: f64,
    pub xi: [f64; 2],
}

/// Time derivatives at `state`.
pub fn rhs(state: &ReducedState, forcing: &Forcing) -> Derivatives {
    let lt = state.t.ln();
    let lambda_lambda_dot = -2.0 * (state.alpha - 1.0) / lt + (forcing.f0)(state);
    Derivatives {
        alpha: -state.eta / (4.0 * state.t * state.t) + (forcing.f3)(state),
        eta: 2.0 * lambda_lambda_dot,
        xi: [(forcing.fxi[0])(state), (forcing.fxi[1])(state)],
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReducedTrajectory {
    pub t: Vec<f64>,
    pub alpha: Vec<f64>,
    pub eta: Vec<f64>,
    pub xi: Vec<[f64; 2]>,
}

impl ReducedTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn state(&self, i: usize) -> ReducedState {
        ReducedState { t: self.t[i], alpha: self.alpha[i], eta: self.eta[i], xi: self.xi[i] }
    }

    /// `η log t` at every sample.
    pub fn eta_logt(&self) -> Vec<f64> {
        self.t.iter().zip(&self.eta).map(|(t, e)| e * t.ln()).collect()
    }

    /// `max |η log t / (η₀ log t₀) − 1|`.
    pub fn eta_logt_drift(&self) -> f64 {
        let v = self.eta_logt();
        v.iter().map(|x| (x / v[0] - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `(max |η̇| t log²t, max |α̇| t² log t)` along the run.
    pub fn constraint_box(&self, forcing: &Forcing) -> (f64, f64) {
        (0..self.len()).fold((0.0f64, 0.0f64), |(a, b), i| {
            let s = self.state(i);
            let d = rhs(&s, forcing);
            let lt = s.t.ln();
            (a.max(d.eta.abs() * s.t * lt * lt), b.max(d.alpha.abs() * s.t * s.t * lt))
        })
    }

    /// CSV with header `t,alpha,eta,lambda,xi1,xi2,eta_logt`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,alpha,eta,lambda,xi1,xi2,eta_logt")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.t[i],
                self.alpha[i],
                self.eta[i],
                self.eta[i].sqrt(),
                self.xi[i][0],
                self.xi[i][1],
                self.eta[i] * self.t[i].ln()
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub slaving: bool,
    pub samples_per_decade: usize,
    pub rtol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { slaving: true, samples_per_decade: 20, rtol: 1e-10 }
    }
}

/// Integrate from `state0` to `t_end`. With slaving, `α` is set from `η`
/// at every evaluation; otherwise `α` follows its own equation.
pub fn integrate(
    state0: &ReducedState,
    t_end: f64,
    forcing: &Forcing,
    opts: &IntegrateOptions,
) -> Result<ReducedTrajectory> {
    state0.validate()?;
    if !(t_end > state0.t) {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} must exceed t0 = {}", state0.t)));
    }
    let (s0, s1) = (state0.t.ln(), t_end.ln());
    let decades = (s1 - s0) / std::f64::consts::LN_10;
    let k = ((decades * opts.samples_per_decade.max(1) as f64).ceil() as usize).max(1);
    let outputs: Vec<f64> = (1..=k).map(|i| s0 + (s1 - s0) * i as f64 / k as f64).collect();
    let slaving = opts.slaving;
    let unpack = |s: f64, y: &[f64]| {
        let t = s.exp();
        let alpha = if slaving { slaved_alpha(t, y[1]) } else { 1.0 + y[0] };
        ReducedState { t, alpha, eta: y[1], xi: [y[2], y[3]] }
    };
    let f = |s: f64, y: &[f64], dy: &mut [f64]| {
        let st = unpack(s, y);
        let d = rhs(&st, forcing);
        dy[0] = if slaving { 0.0 } else { st.t * d.alpha };
        dy[1] = st.t * d.eta;
        dy[2] = st.t * d.xi[0];
        dy[3] = st.t * d.xi[1];
    };
    let y0 = [state0.alpha - 1.0, state0.eta, state0.xi[0], state0.xi[1]];
    let mut traj = ReducedTrajectory::default();
    let mut push = |s: f64, y: &[f64]| {
        let st = unpack(s, y);
        traj.t.push(st.t);
        traj.alpha.push(st.alpha);
        traj.eta.push(st.eta);
        traj.xi.push(st.xi);
    };
    push(s0, &y0);
    // β spans many orders of magnitude; the absolute floor sits far below it.
    let solver = Dopri5 { rtol: opts.rtol, atol: 1e-30, ..Dopri5::default() };
    solver.integrate(f, s0, &y0, &outputs, &mut push)?;
    // Without slaving the mass excess α − 1 locks in a positive offset and
    // η is driven through zero; report where.
    if let Some(i) = traj.eta.iter().position(|&e| !(e > 0.0)) {
        return Err(Error::Ode { t: traj.t[i], reason: "eta left the positive axis".into() });
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CLimit {
    pub c: f64,
    pub b: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Standard error of `c` from the fit.
    pub uncertainty: f64,
}

/// Fit `√(η log t) ≈ c + b/log t` and return the limit `c`.
pub fn c_limit(traj: &ReducedTrajectory) -> Result<CLimit> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::TooFewSamples { have: n, needed: 3 });
    }
    let span = (traj.t[n - 1] / traj.t[0]).log10();
    if !(span >= 3.0 - 1e-9) {
        return Err(Error::InsufficientSpan(format!("{span:.2} decades, need at least 3")));
    }
    let xs: Vec<f64> = traj.t.iter().map(|t| 1.0 / t.ln()).collect();
    let ys: Vec<f64> = traj.eta_logt().iter().map(|v| v.sqrt()).collect();
    let k = n as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let c = my - b * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c - b * x).powi(2)).sum();
    let dof = (k - 2.0).max(1.0);
    let var = ss / dof;
    let uncertainty = (var * (1.0 / k + mx * mx / sxx)).sqrt();
    Ok(CLimit { c, b, residual: (ss / k).sqrt(), uncertainty })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_excess_no_motion() {
        let s = ReducedState::new(1e3, 1.0, 0.2, [0.0, 0.0]).unwrap();
        let d = rhs(&s, &Forcing::none());
        assert_eq!(d.eta, 0.0);
        assert_eq!(d.xi, [0.0, 0.0]);
    }

    #[test]
    fn slaved_rhs_is_the_separable_law() {
        for (t, eta) in [(1e3, 0.1), (1e6, 0.02), (50.0, 1.3)] {
            let d = rhs(&ReducedState::slaved(t, eta, [0.0; 2]).unwrap(), &Forcing::none());
            let oracle = -eta / (t * f64::ln(t));
            // α stores η/(4t) on top of 1, so only ε·4t/η of it survives.
            let tol = 4.0 * f64::EPSILON * t / eta;
            assert!((d.eta - oracle).abs() <= tol * oracle.abs(), "{} {}", d.eta, oracle);
        }
    }

    #[test]
    fn invalid_states() {
        assert!(ReducedState::new(2.0, 1.0, 0.1, [0.0; 2]).is_err());
        assert!(ReducedState::new(1e3, 1.0, 0.0, [0.0; 2]).is_err());
        let s = ReducedState::default_at(1e3).unwrap();
        assert!(integrate(&s, 1e2, &Forcing::none(), &IntegrateOptions::default()).is_err());
    }

    #[test]
    fn short_span_is_rejected() {
        let s = ReducedState::default_at(1e3).unwrap();
        let tr = integrate(&s, 1e5, &Forcing::none(), &IntegrateOptions::default()).unwrap();
        assert!(matches!(c_limit(&tr), Err(Error::InsufficientSpan(_))));
    }
}
