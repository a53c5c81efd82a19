//! Graded radial meshes on `[0, r_max]`.
//!
//! Every grid is the image of a uniform computational coordinate `s` under a
//! smooth odd map `r = R(s)`. The uniform grading is `R(s) = s`; the geometric
//! grading is `R(s) = a sinh(s)`, which is uniform with spacing `a ds` inside
//! the core `r ≲ a` and geometric with ratio `exp(ds)` far away. Derivatives
//! and quadratures are taken in `s`, where the stencils are uniform and the
//! even extension `u(-r) = u(r)` is exact.

use crate::error::{Error, Result};

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 16;
/// Largest admissible far-field spacing ratio of a geometric grid.
pub const MAX_RATIO: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// Far-field ratio of consecutive spacings.
    Geometric(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    grading: Grading,
    r_max: f64,
    /// Map scale `a` (geometric) or spacing (uniform).
    scale: f64,
    ds: f64,
    nodes: Vec<f64>,
    jac: Vec<f64>,
    jac2: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(n: usize, r_max: f64) -> Result<Self> {
        check_common(n, r_max)?;
        let h = r_max / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        nodes[n - 1] = r_max;
        Ok(Self { grading: Grading::Uniform, r_max, scale: h, ds: 1.0, nodes, jac: vec![h; n], jac2: vec![0.0; n] })
    }

    /// Geometric grading with far-field spacing ratio `ratio`; the core
    /// spacing follows from `n`, `r_max` and `ratio`.
    pub fn geometric(n: usize, r_max: f64, ratio: f64) -> Result<Self> {
        check_common(n, r_max)?;
        if !(ratio > 1.0 && ratio <= MAX_RATIO) {
            return Err(Error::InvalidGrid(format!("geometric ratio {ratio} outside (1, {MAX_RATIO}]")));
        }
        let ds = ratio.ln();
        let s_max = ds * (n - 1) as f64;
        let scale = r_max / s_max.sinh();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidGrid(format!("ratio {ratio} with {n} nodes collapses the core spacing")));
        }
        Ok(Self::sinh_map(n, r_max, scale, ds, ratio))
    }

    /// Geometric grading whose core spacing is `core * ds`, i.e. the map
    /// scale is `core`. The far-field ratio follows from `n`.
    pub fn geometric_with_core(n: usize, r_max: f64, core: f64) -> Result<Self> {
        check_common(n, r_max)?;
        if !(core > 0.0 && core < r_max) {
            return Err(Error::InvalidGrid(format!("core scale {core} must lie in (0, r_max)")));
        }
        let s_max = (r_max / core).asinh();
        let ds = s_max / (n - 1) as f64;
        let ratio = ds.exp();
        if ratio > MAX_RATIO {
            return Err(Error::InvalidGrid(format!("{n} nodes give far-field ratio {ratio:.4} > {MAX_RATIO}")));
        }
        Ok(Self::sinh_map(n, r_max, core, ds, ratio))
    }

    /// Default mesh: ratio 1.02, `r_max = 1e3`, core scale 0.05.
    pub fn default_graded() -> Self {
        let ratio: f64 = 1.02;
        let s_max = (1e3_f64 / 0.05).asinh();
        let n = (s_max / ratio.ln()).ceil() as usize + 1;
        Self::geometric_with_core(n, 1e3, 0.05).expect("default grid is valid")
    }

    fn sinh_map(n: usize, r_max: f64, scale: f64, ds: f64, ratio: f64) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        let mut jac2 = Vec::with_capacity(n);
        for i in 0..n {
            let s = i as f64 * ds;
            nodes.push(scale * s.sinh());
            jac.push(scale * s.cosh());
            jac2.push(scale * s.sinh());
        }
        nodes[0] = 0.0;
        nodes[n - 1] = r_max;
        Self { grading: Grading::Geometric(ratio), r_max, scale, ds, nodes, jac, jac2 }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    /// Spacing of the computational coordinate.
    pub fn ds(&self) -> f64 {
        self.ds
    }

    /// `dr/ds` at every node.
    pub fn jacobian(&self) -> &[f64] {
        &self.jac
    }

    /// `d²r/ds²` at every node.
    pub fn jacobian2(&self) -> &[f64] {
        &self.jac2
    }

    /// Smallest physical spacing (at the origin).
    pub fn min_spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    /// Computational coordinate of a radius, in units of node index.
    pub fn index_coordinate(&self, r: f64) -> f64 {
        match self.grading {
            Grading::Uniform => r / self.scale,
            Grading::Geometric(_) => (r / self.scale).asinh() / self.ds,
        }
    }

    /// Inverse of [`RadialGrid::index_coordinate`].
    pub fn radius_at(&self, x: f64) -> f64 {
        match self.grading {
            Grading::Uniform => x * self.scale,
            Grading::Geometric(_) => self.scale * (x * self.ds).sinh(),
        }
    }

    /// Same map and spacing, `r_max` unchanged, node count `2n - 1`.
    pub fn refined(&self) -> Self {
        let n = 2 * self.len() - 1;
        match self.grading {
            Grading::Uniform => Self::uniform(n, self.r_max).expect("refinement of a valid grid"),
            Grading::Geometric(_) => Self::sinh_map(n, self.r_max, self.scale, self.ds / 2.0, (self.ds / 2.0).exp()),
        }
    }

    /// Cubic Lagrange interpolation of nodal values at radius `r`, in the
    /// computational coordinate. Values beyond `r_max` are clamped.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let n = self.len();
        let x = self.index_coordinate(r.abs()).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let base = if i == 0 { 0 } else { (i - 1).min(n - 4) };
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (x - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * values[base + a];
        }
        if i == 0 && base == 0 {
            // Even extension across the origin keeps the stencil centred.
            let xs = [-1.0, 0.0, 1.0, 2.0];
            let vs = [values[1], values[0], values[1], values[2]];
            acc = 0.0;
            for a in 0..4 {
                let mut w = 1.0;
                for b in 0..4 {
                    if a != b {
                        w *= (x - xs[b]) / (xs[a] - xs[b]);
                    }
                }
                acc += w * vs[a];
            }
        }
        acc
    }
}

fn check_common(n: usize, r_max: f64) -> Result<()> {
    if n < MIN_NODES {
        return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes, got {n}")));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidGrid(format!("r_max = {r_max} must be positive")));
    }
    Ok(())
}
