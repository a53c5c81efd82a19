//! Real orthonormal spherical harmonics on a Gauss–Legendre × uniform
//! azimuth product grid.
//!
//! `e_{l,k}` is `N P_l^k(x₃) cos(kφ)` for `k > 0`, `N P_l^{|k|}(x₃) sin(|k|φ)`
//! for `k < 0`, and `N P_l(x₃)` for `k = 0`, normalized in `L²(S²)` without
//! the Condon–Shortley phase. Coefficients are stored at `j = l² + (k + l)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Default band limit.
pub const DEFAULT_L_MAX: usize = 16;

pub fn index(l: usize, k: i64) -> usize {
    debug_assert!(k.unsigned_abs() as usize <= l);
    l * l + (k + l as i64) as usize
}

/// `(l, k)` for a flat index.
pub fn degree_order(j: usize) -> (usize, i64) {
    let l = (j as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= j { l + 1 } else { l };
    (l, j as i64 - (l * l) as i64 - l as i64)
}

/// Normalized associated Legendre values `q[l][k]`, `0 ≤ k ≤ l ≤ l_max`,
/// such that `∫ q_{l,k}(x)² dx · 2π = 1` for `k = 0` (and the √2 for `k > 0`
/// is applied by the caller).
pub fn legendre_table(l_max: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut q = vec![vec![0.0; l_max + 1]; l_max + 1];
    q[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=l_max {
        q[k][k] = q[k - 1][k - 1] * ((2 * k + 1) as f64 / (2 * k) as f64).sqrt() * s;
    }
    for k in 0..l_max {
        q[k + 1][k] = x * ((2 * k + 3) as f64).sqrt() * q[k][k];
    }
    for k in 0..=l_max {
        for l in k + 2..=l_max {
            let (lf, kf) = (l as f64, k as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - kf * kf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - kf * kf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            q[l][k] = a * (x * q[l - 1][k] - b * q[l - 2][k]);
        }
    }
    q
}

/// All `e_{l,k}` at the point with polar cosine `x3` and azimuth `phi`.
pub fn harmonics_at(l_max: usize, x3: f64, phi: f64) -> Vec<f64> {
    let q = legendre_table(l_max, x3);
    let mut out = vec![0.0; (l_max + 1) * (l_max + 1)];
    let r2 = std::f64::consts::SQRT_2;
    for l in 0..=l_max {
        out[index(l, 0)] = q[l][0];
        for k in 1..=l {
            let (sn, cs) = (k as f64 * phi).sin_cos();
            out[index(l, k as i64)] = r2 * q[l][k] * cs;
            out[index(l, -(k as i64))] = r2 * q[l][k] * sn;
        }
    }
    out
}

/// Point of the unit sphere from polar cosine and azimuth.
pub fn point(x3: f64, phi: f64) -> [f64; 3] {
    let s = (1.0 - x3 * x3).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), x3]
}

/// `(x₃, φ)` of a point of the unit sphere.
pub fn angles(p: [f64; 3]) -> (f64, f64) {
    (p[2].clamp(-1.0, 1.0), p[1].atan2(p[0]))
}

/// Spherical-harmonic coefficients up to degree `l_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCoeffs {
    l_max: usize,
    coeffs: Vec<f64>,
}

impl SphereCoeffs {
    pub fn zeros(l_max: usize) -> Self {
        Self { l_max, coeffs: vec![0.0; (l_max + 1) * (l_max + 1)] }
    }

    pub fn from_vec(l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != (l_max + 1) * (l_max + 1) {
            return Err(Error::InvalidParameter(format!("{} coefficients do not fill degree {l_max}", coeffs.len())));
        }
        Ok(Self { l_max, coeffs })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn get(&self, l: usize, k: i64) -> f64 {
        if l > self.l_max {
            0.0
        } else {
            self.coeffs[index(l, k)]
        }
    }

    pub fn set(&mut self, l: usize, k: i64, v: f64) {
        self.coeffs[index(l, k)] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Eigenvalue of `−Δ_{S²}` on degree `l`.
    pub fn eigenvalue(l: usize) -> f64 {
        (l * (l + 1)) as f64
    }

    /// Iterates `(l, k, coefficient)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(j, &c)| {
            let (l, k) = degree_order(j);
            (l, k, c)
        })
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let (x3, phi) = angles(p);
        harmonics_at(self.l_max, x3, phi).iter().zip(&self.coeffs).map(|(y, c)| y * c).sum()
    }

    /// Largest magnitude among degrees `l ≤ upto`.
    pub fn low_mode_max(&self, upto: usize) -> f64 {
        self.iter().filter(|&(l, _, _)| l <= upto).fold(0.0, |m, (_, _, c)| m.max(c.abs()))
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "l,k,coeff")?;
        for (l, k, c) in self.iter() {
            writeln!(w, "{l},{k},{c:.16e}")?;
        }
        Ok(())
    }
}

/// Product quadrature grid on `S²`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    x3: Vec<f64>,
    w3: Vec<f64>,
    n_phi: usize,
    /// `q[i][l][k]` at ring `i`.
    legendre: Vec<Vec<Vec<f64>>>,
    l_table: usize,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::InvalidParameter("sphere grid needs at least 2×2 nodes".into()));
        }
        let (x3, w3) = gauss_legendre(n_theta);
        let l_table = (n_theta - 1).min((n_phi - 2) / 2);
        let legendre = x3.iter().map(|&x| legendre_table(l_table, x)).collect();
        Ok(Self { x3, w3, n_phi, legendre, l_table })
    }

    /// Smallest grid that resolves degree `l_max` products exactly.
    pub fn for_degree(l_max: usize) -> Self {
        Self::new(l_max + 1, 2 * l_max + 2).expect("valid sizes")
    }

    pub fn n_theta(&self) -> usize {
        self.x3.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.x3.len() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    /// Nodes in ring-major order.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.x3 {
            for j in 0..self.n_phi {
                out.push(point(x, self.phi(j)));
            }
        }
        out
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.points().into_iter().map(f).collect()
    }

    /// `∫_{S²} f dA` from samples.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut acc = 0.0;
        for (i, w) in self.w3.iter().enumerate() {
            let ring: f64 = samples[i * self.n_phi..(i + 1) * self.n_phi].iter().sum();
            acc += w * ring * dphi;
        }
        acc
    }

    fn check(&self, l_max: usize) -> Result<()> {
        if self.n_theta() < l_max + 1 || self.n_phi < 2 * l_max + 2 {
            return Err(Error::Aliasing { order: self.n_theta().min(self.n_phi / 2), l_max });
        }
        Ok(())
    }

    /// Coefficients `⟨f, e_{l,k}⟩` for `l ≤ l_max`.
    pub fn decompose(&self, samples: &[f64], l_max: usize) -> Result<SphereCoeffs> {
        self.check(l_max)?;
        if samples.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        let dphi = 2.0 * PI / self.n_phi as f64;
        let r2 = std::f64::consts::SQRT_2;
        let mut out = SphereCoeffs::zeros(l_max);
        for (i, w) in self.w3.iter().enumerate() {
            let ring = &samples[i * self.n_phi..(i + 1) * self.n_phi];
            let q = &self.legendre[i];
            for k in 0..=l_max {
                let (mut a, mut b) = (0.0, 0.0);
                for (j, f) in ring.iter().enumerate() {
                    let (sn, cs) = (k as f64 * self.phi(j)).sin_cos();
                    a += f * cs;
                    b += f * sn;
                }
                a *= dphi * w;
                b *= dphi * w;
                for l in k..=l_max {
                    if k == 0 {
                        out.coeffs[index(l, 0)] += q[l][0] * a;
                    } else {
                        out.coeffs[index(l, k as i64)] += r2 * q[l][k] * a;
                        out.coeffs[index(l, -(k as i64))] += r2 * q[l][k] * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Samples of `Σ c_{l,k} e_{l,k}` at the grid nodes.
    pub fn reconstruct(&self, coeffs: &SphereCoeffs) -> Result<Vec<f64>> {
        self.check(coeffs.l_max())?;
        let l_max = coeffs.l_max();
        let r2 = std::f64::consts::SQRT_2;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_theta() {
            let q = &self.legendre[i];
            for j in 0..self.n_phi {
                let phi = self.phi(j);
                let mut v = 0.0;
                for l in 0..=l_max {
                    v += q[l][0] * coeffs.get(l, 0);
                    for k in 1..=l {
                        let (sn, cs) = (k as f64 * phi).sin_cos();
                        v += r2 * q[l][k] * (coeffs.get(l, k as i64) * cs + coeffs.get(l, -(k as i64)) * sn);
                    }
                }
                out.push(v);
            }
        }
        debug_assert!(l_max <= self.l_table);
        Ok(out)
    }
}
