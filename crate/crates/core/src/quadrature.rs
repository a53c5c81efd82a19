//! Adaptive Gauss–Kronrod integration and Gauss–Legendre rules.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One G7/K15 panel: (Kronrod estimate, error estimate).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-11, max_depth: 40 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel, ..Self::default() }
    }
}

/// Adaptive G7/K15 integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, _) = gk15(&mut f, a, b);
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    let target = tol.abs.max(tol.rel * whole.abs());
    let span = (b - a).abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(&mut f, lo, hi);
        let share = target * ((hi - lo).abs() / span).max(1e-3);
        if e <= share || depth >= tol.max_depth || (hi - lo).abs() < 1e-14 * span {
            total += v;
            err_total += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature { achieved: f64::NAN, requested: target });
    }
    if err_total > 100.0 * target.max(tol.rel * total.abs()) {
        return Err(Error::Quadrature { achieved: err_total, requested: target });
    }
    Ok(total)
}

/// Integral over `[a, ∞)` through `x = a + s / (1 - s)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<f64> {
    integrate(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - s;
            let v = f(a + s / d);
            if v == 0.0 {
                0.0
            } else {
                v / (d * d)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integral over `[a, ∞)` of an integrand decaying like `x^{-p}`, `p > 1`.
///
/// The map `x = a s^{-k}` with `k(p-1) = 2` turns the algebraic tail into
/// a smooth integrand on `(0, 1]`, which the plain `s/(1-s)` map does not
/// when `p` is close to 1.
pub fn integrate_power_tail<F: FnMut(f64) -> f64>(mut f: F, a: f64, p: f64, tol: Tolerance) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::DivergentMass(p));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("tail start {a} must be positive")));
    }
    let k = (2.0 / (p - 1.0)).max(1.0);
    integrate(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let x = a * s.powf(-k);
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * k * x / s
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integral over `[a, b]` split at the given interior points.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += integrate(&mut f, w[0], w[1], tol)?;
    }
    Ok(acc)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_smooth() {
        let v = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        let v = integrate(|x| x.sin(), 0.0, PI, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite() {
        let v = integrate_to_infinity(|x| (-x * x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-12);
        let v = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, Tolerance::default()).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-11);
        let v = integrate_to_infinity(|x| x.powi(-3), 2.0, Tolerance::default()).unwrap();
        assert!((v - 0.125).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(|x| x.sqrt().ln(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((v + 0.5).abs() < 1e-9);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for p in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-12, "n={n} p={p} err={}", q - exact);
            }
            assert!(x.windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn slow_power_tail() {
        // ∫₁^∞ x^{-1.5}(1 + 1/x) dx = 2 + 1/1.5.
        let v = integrate_power_tail(|x| x.powf(-1.5) * (1.0 + 1.0 / x), 1.0, 1.5, Tolerance::default()).unwrap();
        assert!((v - (2.0 + 1.0 / 1.5)).abs() < 1e-11, "{v}");
        assert!(integrate_power_tail(|x| 1.0 / x, 1.0, 1.0, Tolerance::default()).is_err());
    }
}
