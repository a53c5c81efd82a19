//! The steady bubble `U₀ = 8/(1+|y|²)²`, its potential and kernel functions.

fn rho2(y: [f64; 2]) -> f64 {
    y[0] * y[0] + y[1] * y[1]
}

/// `U₀` as a function of the radius.
pub fn u0_radial(r: f64) -> f64 {
    8.0 / (1.0 + r * r).powi(2)
}

/// `V₀ = log 8 − 2 log(1+r²)`, so that `−ΔV₀ = U₀`.
pub fn v0_radial(r: f64) -> f64 {
    8f64.ln() - 2.0 * (r * r).ln_1p()
}

pub fn u0(y: [f64; 2]) -> f64 {
    8.0 / (1.0 + rho2(y)).powi(2)
}

pub fn v0(y: [f64; 2]) -> f64 {
    8f64.ln() - 2.0 * rho2(y).ln_1p()
}

pub fn grad_u0(y: [f64; 2]) -> [f64; 2] {
    let d = -32.0 / (1.0 + rho2(y)).powi(3);
    [d * y[0], d * y[1]]
}

pub fn grad_v0(y: [f64; 2]) -> [f64; 2] {
    let d = -4.0 / (1.0 + rho2(y));
    [d * y[0], d * y[1]]
}

/// Kernel functions of the linearized operator: `Z₀ = 2U₀ + y·∇U₀`
/// (dilation), `Z₁, Z₂ = ∂ⱼU₀` (translations), `Z₃ = −U₀` (mass).
///
/// # Panics
/// If `j > 3`.
pub fn big_z(j: usize, y: [f64; 2]) -> f64 {
    let p = rho2(y);
    match j {
        0 => 16.0 * (1.0 - p) / (1.0 + p).powi(3),
        1 | 2 => -32.0 * y[j - 1] / (1.0 + p).powi(3),
        3 => -u0(y),
        _ => panic!("kernel index {j} outside 0..=3"),
    }
}

/// Liouville kernels `z₀ = ∇V₀·y + 2`, `z₁, z₂ = ∂ⱼV₀`.
///
/// # Panics
/// If `j > 2`.
pub fn small_z(j: usize, y: [f64; 2]) -> f64 {
    let p = rho2(y);
    match j {
        0 => 2.0 * (1.0 - p) / (1.0 + p),
        1 | 2 => -4.0 * y[j - 1] / (1.0 + p),
        _ => panic!("Liouville kernel index {j} outside 0..=2"),
    }
}

/// Radial profile of `Z₀`.
pub fn z0_radial(r: f64) -> f64 {
    big_z(0, [r, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(u0([0.0, 0.0]), 8.0);
        assert_eq!(v0([0.0, 0.0]), 8f64.ln());
        assert_eq!(big_z(0, [0.0, 0.0]), 16.0);
        assert_eq!(small_z(0, [0.0, 0.0]) * u0([0.0, 0.0]), 16.0);
    }

    proptest! {
        #[test]
        fn kernels_factor_through_u0(x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let p = [x, y];
            let g = grad_u0(p);
            let z0 = 2.0 * u0(p) + p[0] * g[0] + p[1] * g[1];
            prop_assert!((big_z(0, p) - z0).abs() <= 1e-12 * (1.0 + z0.abs()));
            prop_assert!((big_z(0, p) - u0(p) * small_z(0, p)).abs() <= 1e-12);
            for j in 1..=2 {
                prop_assert!((big_z(j, p) - u0(p) * small_z(j, p)).abs() <= 1e-12);
                prop_assert!((big_z(j, p) - g[j - 1]).abs() <= 1e-12);
            }
            let gv = grad_v0(p);
            let z = gv[0] * p[0] + gv[1] * p[1] + 2.0;
            prop_assert!((small_z(0, p) - z).abs() <= 1e-12);
        }

        #[test]
        fn v0_solves_poisson(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let h = 1e-3;
            let lap = (v0([x + h, y]) + v0([x - h, y]) + v0([x, y + h]) + v0([x, y - h]) - 4.0 * v0([x, y])) / (h * h);
            prop_assert!((-lap - u0([x, y])).abs() < 1e-4);
        }
    }
}
