//! Planar side of the transport: test functions, stereographic maps, and
//! the Newtonian inverse by azimuthal modes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::ansatz::u0_radial;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::stencil::{running_integral, running_integral_from_end};

/// Inverse stereographic projection `Π⁻¹ : ℝ² → S²`.
pub fn plane_to_sphere(y: [f64; 2]) -> [f64; 3] {
    let r2 = y[0] * y[0] + y[1] * y[1];
    let d = 1.0 + r2;
    [2.0 * y[0] / d, 2.0 * y[1] / d, (r2 - 1.0) / d]
}

/// Stereographic projection from the north pole.
pub fn sphere_to_plane(p: [f64; 3]) -> [f64; 2] {
    let d = 1.0 - p[2];
    [p[0] / d, p[1] / d]
}

/// Area factor `dA = 4/(1+|y|²)² dy = U₀/2 dy`.
pub fn conformal_factor(y: [f64; 2]) -> f64 {
    let d = 1.0 + y[0] * y[0] + y[1] * y[1];
    4.0 / (d * d)
}

type Evaluator = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// A planar function `φ` with a declared algebraic decay rate.
#[derive(Clone)]
pub struct PlanarTestFunction {
    f: Evaluator,
    decay: f64,
    zero_mass: bool,
}

impl fmt::Debug for PlanarTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarTestFunction").field("decay", &self.decay).field("zero_mass", &self.zero_mass).finish()
    }
}

impl PlanarTestFunction {
    /// `decay` is the exponent `p` in `|φ| ≲ (1+|y|)^{-p}`; it must exceed 2.
    pub fn new(decay: f64, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(decay > 2.0) {
            return Err(Error::InvalidParameter(format!("decay exponent {decay} must exceed 2")));
        }
        Ok(Self { f: Arc::new(f), decay, zero_mass: false })
    }

    /// Declares `∫φ = 0`; [`PlanarSolver::g_from_phi`] verifies it.
    pub fn with_zero_mass(mut self) -> Self {
        self.zero_mass = true;
        self
    }

    pub fn zero() -> Self {
        Self { f: Arc::new(|_| 0.0), decay: 6.0, zero_mass: true }
    }

    pub fn eval(&self, y: [f64; 2]) -> f64 {
        (self.f)(y)
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn zero_mass(&self) -> bool {
        self.zero_mass
    }

    /// `a φ + b ψ`, keeping the slower decay.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let (f, g) = (self.f.clone(), other.f.clone());
        Self {
            f: Arc::new(move |y| a * f(y) + b * g(y)),
            decay: self.decay.min(other.decay),
            zero_mass: self.zero_mass && other.zero_mass,
        }
    }

    /// `sup |φ(y)| (1+|y|)^p` over rays out to `r_max`.
    pub fn envelope_constant(&self, r_max: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..=400 {
            let r = r_max.powf(i as f64 / 400.0) - 1.0;
            for j in 0..16 {
                let th = 2.0 * PI * (j as f64 + 0.5) / 16.0;
                let v = self.eval([r * th.cos(), r * th.sin()]).abs();
                worst = worst.max(v * (1.0 + r).powf(self.decay));
            }
        }
        worst
    }
}

/// Ring-by-ring planar quadrature and mode-wise Newtonian inverse.
#[derive(Debug, Clone)]
pub struct PlanarSolver {
    grid: Arc<RadialGrid>,
    n_az: usize,
    k_max: usize,
    mass_tol: f64,
}

impl Default for PlanarSolver {
    fn default() -> Self {
        Self::new(RadialGrid::geometric_with_core(4001, 1e5, 0.1).expect("valid grid"), 64, 24).expect("valid solver")
    }
}

impl PlanarSolver {
    pub fn new(grid: RadialGrid, n_az: usize, k_max: usize) -> Result<Self> {
        if 2 * k_max >= n_az {
            return Err(Error::Aliasing { order: n_az / 2, l_max: k_max });
        }
        Ok(Self { grid: Arc::new(grid), n_az, k_max, mass_tol: 1e-8 })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    fn ring(&self, f: &dyn Fn([f64; 2]) -> f64, r: f64) -> Vec<f64> {
        (0..self.n_az)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / self.n_az as f64;
                f([r * th.cos(), r * th.sin()])
            })
            .collect()
    }

    /// Azimuthal Fourier coefficients `(a_k, b_k)` of one ring, `k ≤ k_max`.
    fn modes(&self, ring: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_az as f64;
        let mut a = vec![0.0; self.k_max + 1];
        let mut b = vec![0.0; self.k_max + 1];
        for (j, v) in ring.iter().enumerate() {
            let th = 2.0 * PI * j as f64 / n;
            for k in 0..=self.k_max {
                let (s, c) = (k as f64 * th).sin_cos();
                a[k] += v * c;
                b[k] += v * s;
            }
        }
        a[0] /= n;
        for k in 1..=self.k_max {
            a[k] *= 2.0 / n;
            b[k] *= 2.0 / n;
        }
        (a, b)
    }

    /// `∫_{ℝ²} f dy` truncated at the grid edge.
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let means: Vec<f64> =
            self.grid.nodes().iter().map(|&r| self.ring(&f, r).iter().sum::<f64>() / self.n_az as f64).collect();
        2.0 * PI * radial_integral(&self.grid, &means)
    }

    /// `g = φ/U₀ − (−Δ)⁻¹φ + c` with `∫ g U₀ = 0`.
    pub fn g_from_phi(&self, phi: &PlanarTestFunction) -> Result<GField> {
        let grid = &self.grid;
        let r = grid.nodes();
        let n = r.len();
        let kk = self.k_max;
        let mut ac = vec![vec![0.0; n]; kk + 1];
        let mut bs = vec![vec![0.0; n]; kk + 1];
        let mut abs_mean = vec![0.0; n];
        for (i, &ri) in r.iter().enumerate() {
            let ring = self.ring(&|y| phi.eval(y), ri);
            abs_mean[i] = ring.iter().map(|v| v.abs()).sum::<f64>() / self.n_az as f64;
            let (a, b) = self.modes(&ring);
            for k in 0..=kk {
                // Exact zeros at the origin keep r^{1-k} weights finite.
                ac[k][i] = if i == 0 && k > 0 { 0.0 } else { a[k] };
                bs[k][i] = if i == 0 && k > 0 { 0.0 } else { b[k] };
            }
        }
        let p = phi.decay();
        let r_edge = grid.r_max();
        let mass = 2.0 * PI * (radial_integral(grid, &ac[0]) + ac[0][n - 1] * r_edge * r_edge / (p - 2.0));
        let scale = 2.0 * PI * radial_integral(grid, &abs_mean);
        if mass.abs() > self.mass_tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonzeroMass(mass / scale));
        }
        let psi_cos: Vec<Vec<f64>> = (0..=kk).map(|k| mode_potential(grid, &ac[k], k, p)).collect();
        let mut psi_sin: Vec<Vec<f64>> = (0..=kk).map(|k| mode_potential(grid, &bs[k], k, p)).collect();
        psi_sin[0].iter_mut().for_each(|v| *v = 0.0);
        let weighted: Vec<f64> = r.iter().zip(&psi_cos[0]).map(|(&ri, v)| v * u0_radial(ri)).collect();
        let c = (2.0 * PI * radial_integral(grid, &weighted) - mass) / (8.0 * PI);
        Ok(GField { phi: phi.clone(), solver: self.clone(), psi_cos, psi_sin, c, mass })
    }
}

/// `∫₀^{r_max} f(r) r dr` with the fourth-order interval rule.
fn radial_integral(grid: &RadialGrid, f: &[f64]) -> f64 {
    let w: Vec<f64> = grid.nodes().iter().zip(grid.jacobian()).zip(f).map(|((r, j), v)| v * r * j).collect();
    *running_integral(grid.ds(), &w).last().expect("nonempty grid")
}

/// Decaying solution of `−Δ(ψ e^{ikθ}) = a e^{ikθ}` at the grid nodes.
fn mode_potential(grid: &RadialGrid, a: &[f64], k: usize, p: f64) -> Vec<f64> {
    let r = grid.nodes();
    let jac = grid.jacobian();
    let ds = grid.ds();
    let n = r.len();
    let edge = r[n - 1];
    if k == 0 {
        let inner: Vec<f64> = (0..n).map(|i| a[i] * r[i] * jac[i]).collect();
        let m = running_integral(ds, &inner);
        let mut q: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { m[i] / r[i] * jac[i] }).collect();
        // m(r)/r is odd in s through the origin; its ghost is handled in `piece`.
        q[0] = 0.0;
        let tail = m[n - 1] / (p - 2.0);
        running_integral_from_end(ds, &q).into_iter().map(|v| v + tail).collect()
    } else {
        let kf = k as f64;
        let inner: Vec<f64> = (0..n).map(|i| a[i] * r[i].powi(k as i32 + 1) * jac[i]).collect();
        let outer: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { a[i] * r[i].powf(1.0 - kf) * jac[i] }).collect();
        let lo = running_integral(ds, &inner);
        let mut hi = running_integral_from_end(ds, &outer);
        let tail = a[n - 1] * edge.powf(2.0 - kf) / (p + kf - 2.0);
        hi.iter_mut().for_each(|v| *v += tail);
        (0..n)
            .map(
                |i| if i == 0 { 0.0 } else { (lo[i] / r[i].powi(k as i32) + r[i].powi(k as i32) * hi[i]) / (2.0 * kf) },
            )
            .collect()
    }
}

/// The function `g` of a zero-mass `φ`, with `ψ₀ = (−Δ)⁻¹φ` stored by modes.
#[derive(Debug, Clone)]
pub struct GField {
    phi: PlanarTestFunction,
    solver: PlanarSolver,
    psi_cos: Vec<Vec<f64>>,
    psi_sin: Vec<Vec<f64>>,
    c: f64,
    mass: f64,
}

impl GField {
    /// The normalizing constant `c`.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Measured `∫φ`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn phi(&self) -> &PlanarTestFunction {
        &self.phi
    }

    fn mode_at(&self, table: &[f64], k: usize, r: f64) -> f64 {
        let grid = &self.solver.grid;
        let edge = grid.r_max();
        if r > edge {
            let last = table[table.len() - 1];
            let rate = if k == 0 { self.phi.decay() - 2.0 } else { k as f64 };
            return last * (edge / r).powf(rate);
        }
        interpolate_parity(grid, table, r, k % 2 == 1)
    }

    /// `ψ₀(y)`.
    pub fn psi0(&self, y: [f64; 2]) -> f64 {
        let r = y[0].hypot(y[1]);
        let th = y[1].atan2(y[0]);
        let mut v = self.mode_at(&self.psi_cos[0], 0, r);
        for k in 1..=self.solver.k_max {
            let (s, c) = (k as f64 * th).sin_cos();
            v += self.mode_at(&self.psi_cos[k], k, r) * c + self.mode_at(&self.psi_sin[k], k, r) * s;
        }
        v
    }

    /// `ψ = ψ₀ − c`, which solves `−Δψ − U₀ψ = U₀g`.
    pub fn psi(&self, y: [f64; 2]) -> f64 {
        self.psi0(y) - self.c
    }

    pub fn g(&self, y: [f64; 2]) -> f64 {
        let r = y[0].hypot(y[1]);
        self.phi.eval(y) / u0_radial(r) - self.psi0(y) + self.c
    }

    /// `∫ f g dy` by ring quadrature on the solver grid, using the stored
    /// mode tables directly at the nodes.
    pub fn pair_with(&self, f: &PlanarTestFunction) -> f64 {
        let s = &self.solver;
        let nodes = s.grid.nodes();
        let means: Vec<f64> = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let u0 = u0_radial(r);
                let mut acc = 0.0;
                for j in 0..s.n_az {
                    let th = 2.0 * PI * j as f64 / s.n_az as f64;
                    let y = [r * th.cos(), r * th.sin()];
                    let mut psi0 = self.psi_cos[0][i];
                    for k in 1..=s.k_max {
                        let (sn, cs) = (k as f64 * th).sin_cos();
                        psi0 += self.psi_cos[k][i] * cs + self.psi_sin[k][i] * sn;
                    }
                    let g = self.phi.eval(y) / u0 - psi0 + self.c;
                    acc += f.eval(y) * g;
                }
                acc / s.n_az as f64
            })
            .collect();
        2.0 * PI * radial_integral(&s.grid, &means)
    }

    /// `∫ φ g dy`.
    pub fn quadratic_form(&self) -> f64 {
        self.pair_with(&self.phi)
    }
}

/// Cubic Lagrange interpolation in the computational coordinate with ghost
/// values of the given parity across the origin.
fn interpolate_parity(grid: &RadialGrid, v: &[f64], r: f64, odd: bool) -> f64 {
    let n = v.len();
    let x = grid.index_coordinate(r).clamp(0.0, (n - 1) as f64);
    let i = (x.floor() as usize).min(n - 2);
    let base = i as isize - 1;
    let base = base.min(n as isize - 4);
    let sign = if odd { -1.0 } else { 1.0 };
    let mut acc = 0.0;
    for a in 0..4 {
        let node = base + a;
        let val = if node < 0 { sign * v[(-node) as usize] } else { v[node as usize] };
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (x - (base + b) as f64) / (a - b) as f64;
            }
        }
        acc += w * val;
    }
    acc
}
