//! Weighted Hardy-type quotient on a ball, for radial functions.
//!
//! Minimizes `∫_{B_R} |∇g|² U₀ / ∫_{B_R} g² U₀` over continuous piecewise
//! quadratics in `r` with `∫_{B_R} g U₀ = 0`, as the lowest eigenvalue of the
//! constrained pencil `(K, M)`.

use crate::ansatz::u0_radial;
use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate, Tolerance};

/// Assembled stiffness, mass and constraint vectors.
#[derive(Debug, Clone)]
pub struct HardyProblem {
    radius: f64,
    /// Node positions, vertices at even indices, midpoints at odd ones.
    nodes: Vec<f64>,
    stiff: BandMatrix,
    mass: BandMatrix,
    constraint: Vec<f64>,
}

const QUAD_POINTS: usize = 8;

impl HardyProblem {
    /// `n_el` quadratic elements on a mesh graded by `r = sinh(s)`.
    pub fn new(radius: f64, n_el: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || n_el < 4 {
            return Err(Error::InvalidParameter(format!("ball radius {radius} with {n_el} elements")));
        }
        let top = radius.asinh();
        let verts: Vec<f64> = (0..=n_el).map(|e| (top * e as f64 / n_el as f64).sinh()).collect();
        let n = 2 * n_el + 1;
        let mut nodes = vec![0.0; n];
        for e in 0..n_el {
            nodes[2 * e] = verts[e];
            nodes[2 * e + 1] = 0.5 * (verts[e] + verts[e + 1]);
        }
        nodes[n - 1] = radius;
        let mut stiff = BandMatrix::zeros(n, 2, 2);
        let mut mass = BandMatrix::zeros(n, 2, 2);
        let mut constraint = vec![0.0; n];
        let (xg, wg) = gauss_legendre(QUAD_POINTS);
        for e in 0..n_el {
            let (a, b) = (verts[e], verts[e + 1]);
            let h = b - a;
            for (x, w) in xg.iter().zip(&wg) {
                let xi = 0.5 * (x + 1.0);
                let r = a + h * xi;
                let wt = 0.5 * w * h * u0_radial(r) * r;
                let (phi, dphi) = shape(xi);
                for i in 0..3 {
                    constraint[2 * e + i] += wt * phi[i];
                    for j in 0..3 {
                        stiff.add(2 * e + i, 2 * e + j, wt * dphi[i] * dphi[j] / (h * h));
                        mass.add(2 * e + i, 2 * e + j, wt * phi[i] * phi[j]);
                    }
                }
            }
        }
        Ok(Self { radius, nodes, stiff, mass, constraint })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `xᵀKx / xᵀMx`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        dot(x, &self.stiff.mul_vec(x)) / dot(x, &self.mass.mul_vec(x))
    }

    /// Quotient of the nodal interpolant of `f`.
    pub fn rayleigh_nodal(&self, f: impl Fn(f64) -> f64) -> f64 {
        let x: Vec<f64> = self.nodes.iter().map(|&r| f(r)).collect();
        self.rayleigh(&x)
    }

    /// Lowest eigenpair of the pencil, with or without the mean-zero constraint.
    pub fn lowest(&self, constrained: bool) -> Result<(f64, Vec<f64>)> {
        let n = self.nodes.len();
        // A small shift makes K + σM definite; the constant mode then has
        // eigenvalue σ and inverse iteration still separates the spectrum.
        let diag_scale = (0..n).map(|i| self.mass.get(i, i)).fold(0.0, f64::max);
        let sigma = 1e-3 / (self.radius * self.radius);
        let mut a = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 3).min(n) {
                a.set(i, j, self.stiff.get(i, j) + sigma * self.mass.get(i, j));
            }
        }
        let lu = a.factor()?;
        let mut ac = self.constraint.clone();
        lu.solve(&mut ac);
        let c_ac = dot(&self.constraint, &ac);
        let project = |y: &mut Vec<f64>| {
            if constrained {
                let l = dot(&self.constraint, y) / c_ac;
                y.iter_mut().zip(&ac).for_each(|(v, w)| *v -= l * w);
            }
        };
        // Start from a profile with a sign change.
        let mut x: Vec<f64> = self.nodes.iter().map(|&r| (1.0 + r).ln() - 1.0).collect();
        let mut mu = f64::INFINITY;
        for _ in 0..5000 {
            let mut y = self.mass.mul_vec(&x);
            lu.solve(&mut y);
            project(&mut y);
            let norm = dot(&y, &self.mass.mul_vec(&y)).sqrt();
            if !(norm.is_finite() && norm > 0.0) || diag_scale == 0.0 {
                return Err(Error::Eigen("inverse iteration lost its iterate".into()));
            }
            y.iter_mut().for_each(|v| *v /= norm);
            let next = self.rayleigh(&y);
            x = y;
            if (next - mu).abs() <= 1e-13 * next.abs().max(1e-300) + 1e-300 {
                return Ok((next.max(0.0), x));
            }
            mu = next;
        }
        Err(Error::Eigen("inverse iteration did not settle".into()))
    }
}

fn shape(xi: f64) -> ([f64; 3], [f64; 3]) {
    (
        [2.0 * (xi - 0.5) * (xi - 1.0), 4.0 * xi * (1.0 - xi), 2.0 * xi * (xi - 0.5)],
        [4.0 * xi - 3.0, 4.0 - 8.0 * xi, 4.0 * xi - 1.0],
    )
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest constrained quotient on `B_R` with `n_el` elements.
pub fn hardy_quotient(radius: f64, n_el: usize) -> Result<f64> {
    if radius < 10.0 {
        return Err(Error::InvalidParameter(format!("ball radius {radius} below 10")));
    }
    Ok(HardyProblem::new(radius, n_el)?.lowest(true)?.0)
}

/// `∫ f'² U₀ r dr / ∫ f² U₀ r dr` over `[0, R]` by adaptive quadrature.
pub fn rayleigh_direct(radius: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Result<f64> {
    let tol = Tolerance::new(1e-15, 1e-13);
    let num = integrate(|r| df(r).powi(2) * u0_radial(r) * r, 0.0, radius, tol)?;
    let den = integrate(|r| f(r).powi(2) * u0_radial(r) * r, 0.0, radius, tol)?;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_the_unconstrained_minimizer() {
        let p = HardyProblem::new(100.0, 200).unwrap();
        let (mu, x) = p.lowest(false).unwrap();
        assert!(mu < 1e-12, "{mu}");
        let spread = x.iter().fold(0.0f64, |m, v| m.max((v - x[0]).abs()));
        assert!(spread < 1e-6 * x[0].abs());
    }

    #[test]
    fn quadratic_quotient_two_ways() {
        let p = HardyProblem::new(100.0, 300).unwrap();
        let a = p.rayleigh_nodal(|r| r * r);
        let b = rayleigh_direct(100.0, |r| r * r, |r| 2.0 * r).unwrap();
        assert!((a - b).abs() < 1e-8 * b, "{a} vs {b}");
    }

    #[test]
    fn constrained_minimizer_has_zero_mean() {
        let p = HardyProblem::new(50.0, 200).unwrap();
        let (mu, x) = p.lowest(true).unwrap();
        assert!(mu > 0.0);
        assert!(dot(&p.constraint, &x).abs() < 1e-10);
        // Any admissible competitor does no better.
        let c = dot(&p.constraint, &p.nodes) / dot(&p.constraint, &vec![1.0; x.len()]);
        let trial: Vec<f64> = p.nodes.iter().map(|&r| r - c).collect();
        assert!(p.rayleigh(&trial) >= mu * (1.0 - 1e-9));
    }
}
