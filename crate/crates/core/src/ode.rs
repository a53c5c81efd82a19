//! Dormand–Prince 5(4) with step-size control.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: None, max_steps: 1_000_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

impl Dopri5 {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Integrates `y' = f(t, y)` from `t0` through every time in `outputs`
    /// (ascending, all beyond `t0`), calling `observe(t, y)` at each.
    pub fn integrate<F, O>(&self, mut f: F, t0: f64, y0: &[f64], outputs: &[f64], mut observe: O) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(f64, &[f64]),
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        let mut y5 = vec![0.0; n];
        f(t, &y, &mut k[0]);
        let span = outputs.last().map_or(0.0, |&te| te - t0);
        let mut h = self.h_init.unwrap_or(span * 1e-6).max(1e-300);
        let mut steps = 0usize;
        let mut err_prev: f64 = 1e-4;
        for &target in outputs {
            if target < t {
                return Err(Error::Ode { t, reason: format!("output time {target} precedes {t}") });
            }
            while t < target {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::Ode { t, reason: "step budget exhausted".into() });
                }
                let last = t + h >= target;
                let hh = if last { target - t } else { h };
                for s in 1..7 {
                    for i in 0..n {
                        let mut acc = y[i];
                        for j in 0..s {
                            acc += hh * A[s][j] * k[j][i];
                        }
                        tmp[i] = acc;
                    }
                    f(t + C[s] * hh, &tmp, &mut k[s]);
                    if s == 6 {
                        y5.copy_from_slice(&tmp);
                    }
                }
                let mut err = 0.0;
                for i in 0..n {
                    let mut e = 0.0;
                    for j in 0..7 {
                        e += E[j] * k[j][i];
                    }
                    let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
                    err += (hh * e / sc).powi(2);
                }
                let err = (err / n.max(1) as f64).sqrt();
                if !err.is_finite() {
                    h *= 0.1;
                    if h < 1e-14 * t.abs().max(1e-300) {
                        return Err(Error::Ode { t, reason: "non-finite derivative".into() });
                    }
                    continue;
                }
                if err <= 1.0 {
                    t = if last { target } else { t + hh };
                    y.copy_from_slice(&y5);
                    let (first, rest) = k.split_at_mut(1);
                    first[0].copy_from_slice(&rest[5]);
                    let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                    err_prev = err.max(1e-4);
                    if !last {
                        h = hh * fac.clamp(0.2, 10.0);
                    }
                } else {
                    h = hh * (0.9 * err.powf(-0.2)).max(0.2);
                    if h < 1e-14 * t.abs().max(1e-300) {
                        return Err(Error::Ode { t, reason: "step size underflow".into() });
                    }
                }
            }
            observe(t, &y);
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_oscillator() {
        let y = Dopri5::default().integrate(|_, y, d| d[0] = -y[0], 0.0, &[1.0], &[1.0, 5.0], |_, _| {}).unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
        let mut seen = Vec::new();
        let y = Dopri5::default()
            .integrate(
                |_, y, d| {
                    d[0] = y[1];
                    d[1] = -y[0];
                },
                0.0,
                &[0.0, 1.0],
                &[1.0, 2.0, 10.0],
                |t, y| seen.push((t, y[0])),
            )
            .unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-8);
        assert_eq!(seen.len(), 3);
        assert!((seen[1].1 - 2f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn rejects_backward_outputs() {
        let r = Dopri5::default().integrate(|_, _, d| d[0] = 0.0, 1.0, &[0.0], &[0.5], |_, _| {});
        assert!(r.is_err());
    }
}
