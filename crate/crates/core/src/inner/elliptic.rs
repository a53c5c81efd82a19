//! Radial solve of `L^i[φ] + h = 0` in divergence form.
//!
//! With `φ = U₀(g + ψ)` and `−Δψ = φ`, the equation reads
//! `(1/r)(r U₀ g')' = −h`, so `g' = −H/(rU₀)` with `H = ∫₀^r s h ds`.
//! The potential then solves `ψ_tt + 2 sech²t ψ = −r²U₀ g` in `t = log r`,
//! whose homogeneous solutions `tanh t` and `t tanh t − 1` have unit
//! Wronskian, so `ψ` is written in closed form by variation of parameters.

use std::io::Write;
use std::sync::Arc;

use super::projection::{moment_scales, moments};
use super::InnerRHS;
use crate::ansatz::u0_radial;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::{cumulative_moment, r_derivatives, running_integral, running_integral_from_end, Parity};

#[derive(Debug, Clone, Copy)]
pub struct EllipticConfig {
    pub n: usize,
    pub r_max: f64,
    pub core: f64,
    /// Relative size of the moments of `h` accepted as zero.
    pub moment_tol: f64,
    /// Weighted residual accepted relative to the weighted size of `h`.
    pub residual_tol: f64,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        Self { n: 10_001, r_max: 1e8, core: 0.5, moment_tol: 1e-8, residual_tol: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub grid: Arc<RadialGrid>,
    pub phi: Vec<f64>,
    pub g: Vec<f64>,
    pub psi: Vec<f64>,
    /// `ψ'` from the closed form, used by the residual.
    pub dpsi: Vec<f64>,
    pub residual: Vec<f64>,
    pub decay: f64,
    /// `sup |L^i[φ] + h|(1+r)^m / sup |h|(1+r)^m`.
    pub relative_residual: f64,
    /// `∫_{t}^{∞} tanh·f` at the origin; vanishes for a regular solution.
    pub regularity_defect: f64,
}

fn u0_prime(r: f64) -> f64 {
    -32.0 * r / (1.0 + r * r).powi(3)
}

fn v0_prime(r: f64) -> f64 {
    -4.0 * r / (1.0 + r * r)
}

/// Solve for radial `h` with vanishing mass and second moment.
pub fn solve_elliptic_radial(h: &InnerRHS, cfg: &EllipticConfig) -> Result<EllipticSolution> {
    if !h.is_radial() {
        return Err(Error::InvalidParameter("the elliptic solve needs a radial right-hand side".into()));
    }
    let mom = moments(h)?;
    let scale = moment_scales(h)?;
    for j in [0, 3] {
        if mom[j].abs() > cfg.moment_tol * scale[j].max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMass(mom[j] / scale[j]));
        }
    }
    let m = h.decay();
    let grid = Arc::new(RadialGrid::geometric_with_core(cfg.n, cfg.r_max, cfg.core)?);
    let r = grid.nodes();
    let n = r.len();
    let ds = grid.ds();
    let jac = grid.jacobian();
    let big_r = cfg.r_max;
    let hv: Vec<f64> = r.iter().map(|&x| h.eval_radial(x)).collect();

    let big_h = flux_potential(&grid, &hv, m);

    // g' = −H/(rU₀), odd across the origin.
    let dg: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { -big_h[i] / (r[i] * u0_radial(r[i])) }).collect();
    let dg_s: Vec<f64> = (0..n).map(|i| dg[i] * jac[i]).collect();
    let mut g = running_integral(ds, &dg_s);

    // Gauge ∫gU₀ = 0. g grows like r^{6−m}, so gU₀r ~ r^{3−m}.
    let gu = cumulative_moment(&grid, &g.iter().zip(r).map(|(&a, &x)| a * u0_radial(x)).collect::<Vec<_>>(), 1);
    let tail_g = g[n - 1] * u0_radial(big_r) * big_r * big_r / (m - 4.0);
    // ∫₀^∞ U₀ r dr = 4.
    let shift = (gu[n - 1] + tail_g) / 4.0;
    for v in g.iter_mut() {
        *v -= shift;
    }

    // ψ = w₁B₂ − w₂B₁ with B_k = ∫_t^∞ w_k f and f = −r²U₀g. Since
    // w₂ = t w₁ − 1 this is ψ = w₁C + B₁ with C = B₂ − tB₁ = ∫_t^∞ (B₁ − f),
    // which avoids the log-singular integrand w₂f at the origin.
    // In s, dt = (jac/r) ds.
    let w1 = |x: f64| (x * x - 1.0) / (x * x + 1.0);
    let f: Vec<f64> = r.iter().zip(&g).map(|(&x, &gv)| -x * x * u0_radial(x) * gv).collect();
    let dt_ds = |i: usize| if i == 0 { 0.0 } else { jac[i] / r[i] };
    let a = m - 4.0;
    let i1: Vec<f64> = (0..n).map(|i| w1(r[i]) * f[i] * dt_ds(i)).collect();
    let tail1 = f[n - 1] * w1(big_r) / a;
    let b1: Vec<f64> = running_integral_from_end(ds, &i1).into_iter().map(|v| v + tail1).collect();
    let ic: Vec<f64> = (0..n).map(|i| (b1[i] - f[i]) * dt_ds(i)).collect();
    let tail_c = (b1[n - 1] - f[n - 1]) / a;
    let c: Vec<f64> = running_integral_from_end(ds, &ic).into_iter().map(|v| v + tail_c).collect();
    let mut psi = vec![0.0; n];
    let mut dpsi = vec![0.0; n];
    for i in 0..n {
        let x = r[i];
        psi[i] = w1(x) * c[i] + b1[i];
        if i > 0 {
            // ψ_t = w₁'C − w₁B₁ with w₁' = 4r²/(1+r²)².
            let dw1 = 4.0 * x * x / (1.0 + x * x).powi(2);
            dpsi[i] = (dw1 * c[i] - w1(x) * b1[i]) / x;
        }
    }

    let phi: Vec<f64> = (0..n).map(|i| u0_radial(r[i]) * (g[i] + psi[i])).collect();
    let residual = residual_on_grid(&grid, &phi, &dpsi, &hv);
    let weight = |i: usize| (1.0 + r[i]).powf(m);
    let h_size = (0..n).map(|i| hv[i].abs() * weight(i)).fold(0.0, f64::max);
    let res_size = (0..n).map(|i| residual[i].abs() * weight(i)).fold(0.0, f64::max);
    let relative_residual = if h_size > 0.0 { res_size / h_size } else { res_size };
    if relative_residual > cfg.residual_tol {
        return Err(Error::Residual { residual: relative_residual, tol: cfg.residual_tol });
    }
    Ok(EllipticSolution { grid, phi, g, psi, dpsi, residual, decay: m, relative_residual, regularity_defect: b1[0] })
}

/// `H = ∫₀^r s h ds` for `h` of zero mass and decay `m`. Outside `r = 1`
/// it is the small remainder `−∫_r^∞ s h`, summed from the far end with a
/// power tail so that `H` decays instead of carrying the quadrature error
/// of the total mass.
pub(crate) fn flux_potential(grid: &RadialGrid, hv: &[f64], m: f64) -> Vec<f64> {
    let r = grid.nodes();
    let n = r.len();
    let big_r = r[n - 1];
    let fwd = cumulative_moment(grid, hv, 1);
    let sh: Vec<f64> = (0..n).map(|i| r[i] * hv[i] * grid.jacobian()[i]).collect();
    let back = running_integral_from_end(grid.ds(), &sh);
    let tail = hv[n - 1] * big_r * big_r / (m - 2.0);
    (0..n).map(|i| if r[i] < 1.0 { fwd[i] } else { -(back[i] + tail) }).collect()
}

/// `Δφ − V₀'φ' − U₀'ψ' + 2U₀φ + h` at the nodes.
fn residual_on_grid(grid: &RadialGrid, phi: &[f64], dpsi: &[f64], h: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let (d1, d2) = r_derivatives(grid, phi, Parity::Even);
    (0..r.len())
        .map(|i| {
            let x = r[i];
            let lap = if i == 0 { 2.0 * d2[0] } else { d2[i] + d1[i] / x };
            lap - v0_prime(x) * d1[i] - u0_prime(x) * dpsi[i] + 2.0 * u0_radial(x) * phi[i] + h[i]
        })
        .collect()
}

impl EllipticSolution {
    /// `∫φ dy` including the power tail beyond `r_max`.
    pub fn mass(&self) -> f64 {
        let r = self.grid.nodes();
        let n = r.len();
        let inner = cumulative_moment(&self.grid, &self.phi, 1)[n - 1];
        let tail = self.phi[n - 1] * r[n - 1] * r[n - 1] / (self.decay - 4.0);
        2.0 * std::f64::consts::PI * (inner + tail)
    }

    /// Least-squares slope of `log|φ|` against `log r` over `[lo, hi]`,
    /// returned as a positive decay exponent.
    pub fn fitted_decay(&self, lo: f64, hi: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .grid
            .nodes()
            .iter()
            .zip(&self.phi)
            .filter(|(&x, &p)| x >= lo && x <= hi && p != 0.0)
            .map(|(&x, &p)| (x.ln(), p.abs().ln()))
            .collect();
        if pts.len() < 3 {
            return Err(Error::TooFewSamples { have: pts.len(), needed: 3 });
        }
        let k = pts.len() as f64;
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / k, b + y / k));
        let (sxy, sxx) =
            pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        Ok(-sxy / sxx)
    }

    pub fn at(&self, r: f64) -> f64 {
        self.grid.interpolate(&self.phi, r)
    }

    /// CSV with header `y,phi,g,psi,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "y,phi,g,psi,residual")?;
        for i in 0..self.phi.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid.nodes()[i],
                self.phi[i],
                self.g[i],
                self.psi[i],
                self.residual[i]
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::Cutoff;
    use crate::inner::orthogonalize;

    fn solve(m: f64) -> EllipticSolution {
        let h = orthogonalize(&InnerRHS::power_profile(m).unwrap(), 4.0, 1.0, Cutoff::default()).unwrap();
        solve_elliptic_radial(&h, &EllipticConfig::default()).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let s = solve_elliptic_radial(&InnerRHS::zero(), &EllipticConfig::default()).unwrap();
        assert!(s.phi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_mass_and_regularity() {
        let s = solve(5.5);
        assert!(s.relative_residual < 1e-4, "{}", s.relative_residual);
        assert!(s.mass().abs() < 1e-8, "{}", s.mass());
        assert!(s.regularity_defect.abs() < 1e-8, "{}", s.regularity_defect);
    }

    #[test]
    fn rejects_nonzero_mass() {
        let h = InnerRHS::power_profile(5.0).unwrap();
        assert!(matches!(solve_elliptic_radial(&h, &EllipticConfig::default()), Err(Error::NonzeroMass(_))));
    }
}
