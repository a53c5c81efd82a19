//! Parabolic march of the radial inner problem in the slow time `τ`.
//!
//! In terms of `μ(r) = ∫₀^r φ s ds` the flux form becomes
//! `μ_τ = μ'' − μ'/r − V₀'μ' + U₀μ + H`, `H = ∫₀^r s h ds`, with
//! `μ(0) = μ(R) = 0`. Steps are implicit Euler with a banded solve.

use std::f64::consts::PI;
use std::sync::Arc;

use super::elliptic::flux_potential;
use crate::ansatz::profile::z0_radial;
use crate::ansatz::u0_radial;
use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::{cumulative_moment, r_derivatives, Parity};

/// Stencil offset and weight.
type Tap = (isize, f64);

#[derive(Debug, Clone)]
pub struct MarchConfig {
    pub n: usize,
    pub r_max: f64,
    pub core: f64,
    pub t0: f64,
    /// Decay exponent of `h`, used for the tail of `H` beyond `r_max`.
    pub decay: f64,
    /// Final slow time `τ`.
    pub horizon: f64,
    pub dtau0: f64,
    /// Step growth factor per step.
    pub growth: f64,
    /// Cap on `dτ` relative to the current `τ`.
    pub max_ratio: f64,
    /// Slow times at which `φ` is stored.
    pub outputs: Vec<f64>,
}

impl Default for MarchConfig {
    fn default() -> Self {
        Self {
            n: 1601,
            r_max: 1e5,
            core: 0.1,
            t0: 1e3,
            decay: 5.5,
            horizon: 1e4,
            dtau0: 1e-3,
            growth: 1.05,
            max_ratio: 0.05,
            outputs: Vec::new(),
        }
    }
}

impl MarchConfig {
    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.dtau0 > 0.0 && self.growth >= 1.0 && self.max_ratio > 0.0) {
            return Err(Error::InvalidParameter("march needs positive horizon, dτ₀, ratio and growth ≥ 1".into()));
        }
        if !(self.decay > 4.0 && self.decay < 6.0) {
            return Err(Error::InvalidParameter(format!("decay exponent {} outside (4, 6)", self.decay)));
        }
        if !(self.t0 > 1.0) {
            return Err(Error::InvalidParameter(format!("t0 = {} must exceed 1", self.t0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub tau: f64,
    pub t: f64,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MarchOutput {
    pub grid: Arc<RadialGrid>,
    pub snapshots: Vec<Snapshot>,
    /// `(τ, ∫φ|y|²)` after every step.
    pub second_moment: Vec<(f64, f64)>,
    pub steps: usize,
}

impl MarchOutput {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("the final state is always stored")
    }

    /// Gap between a snapshot and a reference profile on `r ≤ r_cmp`, in the
    /// weight `(1+r)^{m−2}`, after removing the best multiple `c` of `Z₀`.
    /// Returns `(gap relative to the reference, c)`.
    ///
    /// The dilation direction cannot be compared directly: for `m < 6` the
    /// reference has infinite second moment, so conservation of `∫φ|y|²`
    /// drives a slowly growing `Z₀` component in the march.
    pub fn gap_modulo_dilation(
        &self,
        snap: &Snapshot,
        reference: impl Fn(f64) -> f64,
        m: f64,
        r_cmp: f64,
    ) -> (f64, f64) {
        let r = self.grid.nodes();
        let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] <= r_cmp).collect();
        let w = |i: usize| (1.0 + r[i]).powf(m - 2.0);
        let (mut a, mut b) = (0.0, 0.0);
        for &i in &idx {
            let z = z0_radial(r[i]) * w(i);
            a += z * (snap.phi[i] - reference(r[i])) * w(i);
            b += z * z;
        }
        let c = a / b;
        let mut gap: f64 = 0.0;
        let mut size: f64 = 0.0;
        for &i in &idx {
            let e = reference(r[i]);
            gap = gap.max((snap.phi[i] - e - c * z0_radial(r[i])).abs() * w(i));
            size = size.max(e.abs() * w(i));
        }
        (gap / size, c)
    }
}

/// Rows of `μ'' − μ'/r − V₀'μ' + U₀μ` at interior nodes. Fourth-order
/// five-point stencils in `s`, with even ghosts across the origin and a
/// three-point row next to `R`.
fn operator(grid: &RadialGrid) -> Vec<Vec<(usize, f64)>> {
    let r = grid.nodes();
    let n = r.len();
    let h = grid.ds();
    let (j1, j2) = (grid.jacobian(), grid.jacobian2());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 1..n - 1 {
        let x = r[i];
        let a = j1[i];
        // μ_r = μ_s/a, μ_rr = μ_ss/a² − μ_s j₂/a³.
        let c2 = 1.0 / (a * a);
        let c1 = -j2[i] / (a * a * a) + (-1.0 / x + 4.0 * x / (1.0 + x * x)) / a;
        let (w1, w2): (Vec<Tap>, Vec<Tap>) = if i + 2 < n {
            (
                vec![(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
                vec![(-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0)],
            )
        } else {
            (vec![(-1, -0.5), (1, 0.5)], vec![(-1, 1.0), (0, -2.0), (1, 1.0)])
        };
        let row = &mut rows[i];
        let mut push = |k: isize, v: f64| {
            let j = (i as isize + k).unsigned_abs();
            if let Some(e) = row.iter_mut().find(|e| e.0 == j) {
                e.1 += v;
            } else {
                row.push((j, v));
            }
        };
        for (k, w) in w1 {
            push(k, c1 * w / h);
        }
        for (k, w) in w2 {
            push(k, c2 * w / (h * h));
        }
        push(0, u0_radial(x));
    }
    rows
}

/// March `φ_τ = L^i[φ] + h` from `φ = 0` at `t0`, with `dτ = dt/λ²`.
/// `h(t, r)` is a radial right-hand side with zero mass and decay
/// `cfg.decay`.
pub fn inner_march(h: impl Fn(f64, f64) -> f64, lambda: impl Fn(f64) -> f64, cfg: &MarchConfig) -> Result<MarchOutput> {
    cfg.validate()?;
    let grid = Arc::new(RadialGrid::geometric_with_core(cfg.n, cfg.r_max, cfg.core)?);
    let r = grid.nodes().to_vec();
    let n = r.len();
    let rows = operator(&grid);
    let big_h = |t: f64| {
        let hv: Vec<f64> = r.iter().map(|&x| h(t, x)).collect();
        flux_potential(&grid, &hv, cfg.decay)
    };
    let second_moment = |mu: &[f64]| -4.0 * PI * cumulative_moment(&grid, mu, 1)[n - 1];
    let snapshot = |tau: f64, t: f64, mu: &[f64]| {
        let (d1, d2) = r_derivatives(&grid, mu, Parity::Even);
        // φ = μ'/r, and μ''(0) at the origin.
        let phi: Vec<f64> = (0..n).map(|i| if i == 0 { d2[0] } else { d1[i] / r[i] }).collect();
        let (dphi, _) = r_derivatives(&grid, &phi, Parity::Even);
        Snapshot { tau, t, phi, dphi }
    };

    let mut outputs: Vec<f64> = cfg.outputs.iter().copied().filter(|&o| o > 0.0 && o < cfg.horizon).collect();
    outputs.sort_by(f64::total_cmp);
    outputs.push(cfg.horizon);

    let mut mu = vec![0.0; n];
    let (mut tau, mut t) = (0.0, cfg.t0);
    let mut dtau = cfg.dtau0;
    let mut out = MarchOutput { grid: grid.clone(), snapshots: Vec::new(), second_moment: vec![(0.0, 0.0)], steps: 0 };
    let mut cached: Option<(f64, crate::banded::BandLu)> = None;
    for &target in &outputs {
        while tau < target * (1.0 - 1e-14) {
            let step = dtau.min(target - tau).min(cfg.max_ratio * tau.max(cfg.dtau0 / cfg.max_ratio));
            let lam = lambda(t);
            let t_next = t + lam * lam * step;
            // Refactor only when the step changes.
            if cached.as_ref().is_none_or(|c| c.0 != step) {
                let mut a = BandMatrix::zeros(n, 2, 2);
                a.set_identity_row(0, 1.0);
                a.set_identity_row(n - 1, 1.0);
                for (i, row) in rows.iter().enumerate().take(n - 1).skip(1) {
                    a.add(i, i, 1.0);
                    for &(j, v) in row {
                        a.add(i, j, -step * v);
                    }
                }
                cached = Some((step, a.factor()?));
            }
            let hh = big_h(t_next);
            let mut rhs: Vec<f64> = (0..n).map(|i| mu[i] + step * hh[i]).collect();
            rhs[0] = 0.0;
            rhs[n - 1] = 0.0;
            cached.as_ref().expect("factored above").1.solve(&mut rhs);
            if rhs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Ode { t: tau, reason: "non-finite state".into() });
            }
            mu = rhs;
            tau += step;
            t = t_next;
            out.steps += 1;
            out.second_moment.push((tau, second_moment(&mu)));
            dtau *= cfg.growth;
        }
        out.snapshots.push(snapshot(tau, t, &mu));
    }
    Ok(out)
}
