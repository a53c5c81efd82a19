//! Radial integrals, Newtonian potentials and the Keller–Segel operator.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{CumulativeMass, RadialField};
use crate::stencil::{self, Parity};

/// `2π ∫ u r^{k+1} dr` over the plane, with the declared power tail added
/// analytically beyond `r_max`.
pub fn planar_moment(u: &RadialField, k: i32) -> Result<f64> {
    let grid = u.grid();
    let cum = stencil::cumulative_moment(grid, u.values(), k + 1);
    let mut total = *cum.last().expect("grid is non-empty");
    if let Some(p) = u.tail_exponent() {
        let q = p - (k + 2) as f64;
        if q <= 0.0 {
            return Err(Error::DivergentMass(p));
        }
        let r_max = grid.r_max();
        let last = *u.values().last().expect("grid is non-empty");
        total += last * r_max.powi(k + 2) / q;
    }
    Ok(2.0 * PI * total)
}

/// Total mass `2π ∫₀^∞ u r dr`.
pub fn quad_mass(u: &RadialField) -> Result<f64> {
    planar_moment(u, 0)
}

/// `2π ∫₀^R u r³ dr`.
pub fn second_moment(u: &RadialField, radius: f64) -> Result<f64> {
    let grid = u.grid();
    if radius > grid.r_max() * (1.0 + 1e-14) {
        return Err(Error::BeyondGrid { radius, r_max: grid.r_max() });
    }
    if radius < 0.0 {
        return Err(Error::InvalidParameter(format!("radius {radius} is negative")));
    }
    let cum = stencil::cumulative_moment(grid, u.values(), 3);
    Ok(2.0 * PI * grid.interpolate(&cum, radius.min(grid.r_max())))
}

/// `m(r_i) = 2π ∫₀^{r_i} u s ds`; the total mass includes the declared tail.
pub fn cumulative_mass(u: &RadialField) -> CumulativeMass {
    let grid = u.grid();
    let m: Vec<f64> = stencil::cumulative_moment(grid, u.values(), 1).into_iter().map(|v| 2.0 * PI * v).collect();
    let total = quad_mass(u).unwrap_or(*m.last().expect("grid is non-empty"));
    CumulativeMass::new(Arc::clone(grid), m, total).expect("cumulative integral starts at zero")
}

/// `v_r = -m / (2πr)`, the radial gradient of the Newtonian potential.
pub fn potential_gradient(m: &CumulativeMass) -> RadialField {
    let r = m.grid().nodes();
    let values =
        m.values().iter().zip(r).map(|(&mi, &ri)| if ri == 0.0 { 0.0 } else { -mi / (2.0 * PI * ri) }).collect();
    RadialField::new(Arc::clone(m.grid()), values).expect("finite by construction")
}

/// `E(u) = Δu − ∇·(u ∇(−Δ)⁻¹u)` for a radial density.
///
/// In radial form `E = u_rr + u_r/r + u_r m/(2πr) + u²`, and at the origin
/// `E(0) = 2u_rr(0) + u(0)²`. The result carries tail exponent `p + 2` when
/// `u` declares `p`.
#[allow(non_snake_case)]
pub fn apply_E(u: &RadialField) -> Result<RadialField> {
    let grid = u.grid();
    if grid.len() < 5 {
        return Err(Error::StencilUnderflow { needed: 5, have: grid.len() });
    }
    let r = grid.nodes();
    let v = u.values();
    let m = cumulative_mass(u);
    let (d1, d2) = stencil::r_derivatives(grid, v, Parity::Even);
    let e: Vec<f64> = (0..v.len())
        .map(|i| {
            if i == 0 {
                2.0 * d2[0] + v[0] * v[0]
            } else {
                let ri = r[i];
                d2[i] + d1[i] / ri + d1[i] * m.values()[i] / (2.0 * PI * ri) + v[i] * v[i]
            }
        })
        .collect();
    let out = RadialField::new(Arc::clone(grid), e)?;
    match u.tail_exponent() {
        Some(p) => out.with_tail(p + 2.0),
        None => Ok(out),
    }
}

/// `S(u) = −u_t + E(u)`.
#[allow(non_snake_case)]
pub fn residual_S(u: &RadialField, u_t: &RadialField) -> Result<RadialField> {
    if !u.same_grid(u_t) {
        return Err(Error::GridMismatch);
    }
    apply_E(u)?.combine(1.0, u_t, -1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    fn u0(r: f64) -> f64 {
        8.0 / (1.0 + r * r).powi(2)
    }

    fn grid(n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::geometric_with_core(n, 1e3, 0.05).unwrap())
    }

    #[test]
    fn bubble_mass_and_potential() {
        let g = grid(4096);
        let u = RadialField::from_fn(g.clone(), u0).unwrap().with_tail(4.0).unwrap();
        assert!((quad_mass(&u).unwrap() - 8.0 * PI).abs() < 1e-9);
        let v = potential_gradient(&cumulative_mass(&u));
        for (i, &r) in g.nodes().iter().enumerate().skip(1) {
            let exact = -4.0 * r / (1.0 + r * r);
            assert!((v.values()[i] - exact).abs() <= 1e-6 * exact.abs(), "r = {r}");
        }
    }

    #[test]
    fn divergent_tail_is_rejected() {
        let u = RadialField::from_fn(grid(64), |r| 1.0 / (1.0 + r * r)).unwrap().with_tail(2.0).unwrap();
        assert!(matches!(quad_mass(&u), Err(Error::DivergentMass(_))));
    }

    #[test]
    fn second_moment_beyond_grid() {
        let u = RadialField::zeros(grid(64));
        assert!(matches!(second_moment(&u, 2e3), Err(Error::BeyondGrid { .. })));
        assert_eq!(second_moment(&u, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn bubble_is_steady() {
        let u = RadialField::from_fn(grid(4096), u0).unwrap();
        let e = apply_E(&u).unwrap();
        assert!(e.max_abs() <= 1e-6 * 8.0, "{}", e.max_abs());
    }
}
