//! Fourth-order finite differences on a mapped radial grid.
//!
//! Differences are taken in the uniform computational coordinate and
//! converted with the chain rule. Across the origin the field is extended by
//! parity; the last two nodes use one-sided stencils.

use crate::grid::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

fn at(v: &[f64], i: isize, parity: Parity) -> f64 {
    if i < 0 {
        parity.sign() * v[(-i) as usize]
    } else {
        v[i as usize]
    }
}

/// First and second derivatives in the computational coordinate.
pub fn s_derivatives(v: &[f64], ds: f64, parity: Parity) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    assert!(n >= 6, "stencils need at least 6 nodes");
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let h = ds;
    for i in 0..n - 2 {
        let k = i as isize;
        let (m2, m1, c, p1, p2) = (at(v, k - 2, parity), at(v, k - 1, parity), v[i], v[i + 1], v[i + 2]);
        d1[i] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
        d2[i] = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
    }
    let i = n - 2;
    d1[i] = (3.0 * v[i + 1] + 10.0 * v[i] - 18.0 * v[i - 1] + 6.0 * v[i - 2] - v[i - 3]) / (12.0 * h);
    d2[i] =
        (10.0 * v[i + 1] - 15.0 * v[i] - 4.0 * v[i - 1] + 14.0 * v[i - 2] - 6.0 * v[i - 3] + v[i - 4]) / (12.0 * h * h);
    let i = n - 1;
    d1[i] = (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3] + 3.0 * v[i - 4]) / (12.0 * h);
    d2[i] = (45.0 * v[i] - 154.0 * v[i - 1] + 214.0 * v[i - 2] - 156.0 * v[i - 3] + 61.0 * v[i - 4] - 10.0 * v[i - 5])
        / (12.0 * h * h);
    (d1, d2)
}

/// `(u_r, u_rr)` at every node.
pub fn r_derivatives(grid: &RadialGrid, v: &[f64], parity: Parity) -> (Vec<f64>, Vec<f64>) {
    let (ds1, ds2) = s_derivatives(v, grid.ds(), parity);
    let j1 = grid.jacobian();
    let j2 = grid.jacobian2();
    let mut d1 = Vec::with_capacity(v.len());
    let mut d2 = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let a = j1[i];
        d1.push(ds1[i] / a);
        d2.push(ds2[i] / (a * a) - ds1[i] * j2[i] / (a * a * a));
    }
    (d1, d2)
}

/// Running integral `∫₀^{r_i} f(r) r^k dr` at every node.
///
/// The integrand is treated in `s`, where `f r^k dr/ds` has parity `(-1)^k`
/// and a four-point interval rule is fourth-order accurate.
pub fn cumulative_moment(grid: &RadialGrid, f: &[f64], k: i32) -> Vec<f64> {
    let n = f.len();
    let r = grid.nodes();
    let jac = grid.jacobian();
    let g: Vec<f64> = (0..n).map(|i| f[i] * r[i].powi(k) * jac[i]).collect();
    let ghost = if k % 2 == 0 { g[1] } else { -g[1] };
    let h = grid.ds() / 24.0;
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        let piece = if i + 2 < n {
            let gm = if i == 0 { ghost } else { g[i - 1] };
            h * (-gm + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2])
        } else {
            h * (g[i - 2] - 5.0 * g[i - 1] + 19.0 * g[i] + 9.0 * g[i + 1])
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Running integrals `∫₀^{s_i} g ds` of nodal values in the computational
/// coordinate, for integrands odd across the origin.
pub fn running_integral(ds: f64, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        out[i + 1] = out[i] + interval(ds, g, i);
    }
    out
}

/// Integrals from each node to the last one, summed from the outside in so
/// that small values near the origin do not inherit cancellation.
pub fn running_integral_from_end(ds: f64, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + interval(ds, g, i);
    }
    out
}

fn interval(ds: f64, g: &[f64], i: usize) -> f64 {
    let n = g.len();
    let h = ds / 24.0;
    if i + 2 < n {
        let gm = if i == 0 { -g[1] } else { g[i - 1] };
        h * (-gm + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2])
    } else {
        h * (g[i - 2] - 5.0 * g[i - 1] + 19.0 * g[i] + 9.0 * g[i + 1])
    }
}

/// Finite-difference weights for derivatives `0..=order` at `x0` from the
/// nodes `xs` (Fornberg's recursion). Row `k` holds the weights of the
/// `k`-th derivative.
pub fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_stencils_are_exact_on_quartics() {
        let v: Vec<f64> = (0..10)
            .map(|i| {
                let x = i as f64 * 0.1;
                1.0 + x - 2.0 * x * x + 0.5 * x.powi(3) + x.powi(4)
            })
            .collect();
        let (d1, d2) = s_derivatives(&v, 0.1, Parity::Even);
        for i in [7usize, 8, 9] {
            let x = i as f64 * 0.1;
            let e1 = 1.0 - 4.0 * x + 1.5 * x * x + 4.0 * x.powi(3);
            let e2 = -4.0 + 3.0 * x + 12.0 * x * x;
            assert!((d1[i] - e1).abs() < 1e-11, "d1[{i}]");
            assert!((d2[i] - e2).abs() < 1e-9, "d2[{i}]");
        }
    }

    #[test]
    fn fornberg_reproduces_centered_weights() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(0.0, &xs, 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for i in 0..5 {
            assert!((w[1][i] - d1[i]).abs() < 1e-14);
            assert!((w[2][i] - d2[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn mapped_derivatives_converge() {
        let f = |r: f64| (-r * r / 4.0).exp();
        let err = |n: usize| {
            let g = RadialGrid::geometric_with_core(n, 30.0, 1.0).unwrap();
            let v: Vec<f64> = g.nodes().iter().map(|&r| f(r)).collect();
            let (d1, d2) = r_derivatives(&g, &v, Parity::Even);
            g.nodes()
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    let e1 = -r / 2.0 * f(r);
                    let e2 = (r * r / 4.0 - 0.5) * f(r);
                    (d1[i] - e1).abs().max((d2[i] - e2).abs())
                })
                .fold(0.0, f64::max)
        };
        let rate = (err(100) / err(200)).log2();
        assert!(rate > 3.5, "rate {rate}");
    }

    #[test]
    fn cumulative_moment_matches_closed_form() {
        let g = RadialGrid::geometric_with_core(800, 1e3, 0.1).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|&r| 8.0 / (1.0 + r * r).powi(2)).collect();
        let c = cumulative_moment(&g, &u, 1);
        for (i, &r) in g.nodes().iter().enumerate() {
            let exact = 4.0 * r * r / (1.0 + r * r);
            assert!((c[i] - exact).abs() < 1e-8, "r={r}: {} vs {exact}", c[i]);
        }
    }
}
