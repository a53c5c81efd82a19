//! Self-similar correction `g(ζ)` of the far-field heat problem.
//!
//! `g` solves `g″ + (5/ζ)g′ + (ζ/2)g′ + 2g + h = 0` and is the unique
//! solution decaying faster than `ζ⁻⁴`. It is assembled from
//! `g₀ = −ζ⁻⁴ ∫₀^ζ x³e^{−x²/4} F(x) dx`, `F(x) = ∫₀^x h(y) e^{y²/4} y dy`,
//! and the homogeneous solution `z̄ = ζ⁻⁴ ∫₀^ζ x³e^{−x²/4} dx` as
//! `g = g₀ + z̄ I/8`. Since `h` lives on `[1, 2]`, the nested integrals are
//! only evaluated there; outside, every piece has a closed form.

use std::sync::OnceLock;

use super::cutoff::Cutoff;
use crate::error::Result;
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::stencil::fd_weights;

/// Nodes of the cached table on `[1, 2]`.
pub const TABLE_POINTS: usize = 10_000;

/// `∫_a^∞ x³ e^{−x²/4} dx`.
fn gauss_tail(a: f64) -> f64 {
    2.0 * (a * a + 4.0) * (-a * a / 4.0).exp()
}

/// `z̄(ζ) = ζ⁻⁴ ∫₀^ζ x³e^{−x²/4} dx`, with `z̄(0) = 1/4`.
pub fn zbar_of_zeta(zeta: f64) -> f64 {
    let z = zeta.abs();
    if z < 1.0 {
        // Σ (−1/4)^k ζ^{2k} / (k! (2k+4))
        let q = -z * z / 4.0;
        let mut term = 1.0;
        let mut acc = 0.0;
        for k in 0..40 {
            acc += term / (2 * k + 4) as f64;
            term *= q / (k + 1) as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        acc
    } else {
        (8.0 - gauss_tail(z)) / z.powi(4)
    }
}

fn tol() -> Tolerance {
    Tolerance { abs: 1e-12, rel: 1e-12, max_depth: 30 }
}

fn f_integrand(cutoff: Cutoff, y: f64) -> f64 {
    cutoff.h(y) * (y * y / 4.0).exp() * y
}

/// `F(x) = ∫₁^x h(y) e^{y²/4} y dy` by adaptive quadrature.
fn big_f(cutoff: Cutoff, x: f64) -> Result<f64> {
    if x <= 1.0 {
        return Ok(0.0);
    }
    integrate(|y| f_integrand(cutoff, y), 1.0, x.min(2.0), Tolerance { abs: 1e-10, ..tol() })
}

/// `I = ∫₀^∞ x³e^{−x²/4} F(x) dx` by nested adaptive Gauss–Kronrod.
#[allow(non_snake_case)]
pub fn I_const(cutoff: Cutoff) -> Result<f64> {
    let tol = Tolerance { abs: 1e-10, ..tol() };
    let mut failure = None;
    let inner = integrate(
        |x| match big_f(cutoff, x) {
            Ok(f) => x.powi(3) * (-x * x / 4.0).exp() * f,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        1.0,
        2.0,
        tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(inner + big_f(cutoff, 2.0)? * gauss_tail(2.0))
}

/// Constants and the cached table for one cut-off.
#[derive(Debug)]
pub struct SelfSimilar {
    cutoff: Cutoff,
    i_const: f64,
    f_inf: f64,
    g_inner: f64,
    a: f64,
    mass_moment: f64,
    /// `∫₁^ζ x³e^{−x²/4} F(x) dx` at `ζ_k = 1 + k/(N−1)`.
    cum: Vec<f64>,
}

static QUINTIC: OnceLock<SelfSimilar> = OnceLock::new();
static EXP_BUMP: OnceLock<SelfSimilar> = OnceLock::new();

impl SelfSimilar {
    /// Shared instance, built on first use.
    pub fn get(cutoff: Cutoff) -> &'static SelfSimilar {
        let cell = match cutoff {
            Cutoff::QuinticSmoothstep => &QUINTIC,
            Cutoff::ExpBump => &EXP_BUMP,
        };
        cell.get_or_init(|| Self::build(cutoff).expect("self-similar table converges"))
    }

    fn build(cutoff: Cutoff) -> Result<Self> {
        let n = TABLE_POINTS;
        let d = 1.0 / (n - 1) as f64;
        let mut cum = vec![0.0; n];
        let mut f_left = 0.0;
        let tol = Tolerance { abs: 1e-14, rel: 1e-13, max_depth: 20 };
        for k in 0..n - 1 {
            let a = 1.0 + k as f64 * d;
            let b = if k + 1 == n - 1 { 2.0 } else { a + d };
            let base = f_left;
            let piece = integrate(
                |x| {
                    let f = base + integrate(|y| f_integrand(cutoff, y), a, x, tol).unwrap_or(f64::NAN);
                    x.powi(3) * (-x * x / 4.0).exp() * f
                },
                a,
                b,
                tol,
            )?;
            cum[k + 1] = cum[k] + piece;
            f_left += integrate(|y| f_integrand(cutoff, y), a, b, tol)?;
        }
        let f_inf = f_left;
        let g_inner = cum[n - 1];
        let i_const = g_inner + f_inf * gauss_tail(2.0);
        let a = 2.0 * (integrate(|s| (1.0 - cutoff.chi(s)) / s.powi(3), 1.0, 2.0, tol)? + 0.125);
        let mut out = Self { cutoff, i_const, f_inf, g_inner, a, mass_moment: 0.0, cum };
        let head = integrate(|z| out.g(z) * z, 0.0, 1.0, tol)?;
        let mid = integrate(|z| out.g(z) * z, 1.0, 2.0, tol)?;
        let tail = integrate_to_infinity(|z| out.g(z) * z, 2.0, tol)?;
        out.mass_moment = head + mid + tail;
        Ok(out)
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    /// `I` as assembled from the table (see [`I_const`] for the direct route).
    pub fn i_const(&self) -> f64 {
        self.i_const
    }

    /// `a = 2 ∫₀^∞ (1 − χ₀(s)) s⁻³ ds`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `∫₀^∞ g(ζ) ζ dζ`; the planar mass of `φ₁` is `2πλ²/t` times this.
    pub fn mass_moment(&self) -> f64 {
        self.mass_moment
    }

    fn cum_at(&self, zeta: f64) -> f64 {
        let n = self.cum.len();
        let x = ((zeta - 1.0) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let base = i.saturating_sub(1).min(n - 4);
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (x - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * self.cum[base + a];
        }
        acc
    }

    pub fn g0(&self, zeta: f64) -> f64 {
        let z = zeta.abs();
        if z <= 1.0 {
            0.0
        } else if z < 2.0 {
            -self.cum_at(z) / z.powi(4)
        } else {
            -(self.g_inner + self.f_inf * (gauss_tail(2.0) - gauss_tail(z))) / z.powi(4)
        }
    }

    pub fn zbar(&self, zeta: f64) -> f64 {
        zbar_of_zeta(zeta)
    }

    /// The decaying solution `g = g₀ + z̄ I/8`.
    pub fn g(&self, zeta: f64) -> f64 {
        let z = zeta.abs();
        if z <= 1.0 {
            self.i_const / 8.0 * zbar_of_zeta(z)
        } else if z < 2.0 {
            self.g0(z) + self.i_const / 8.0 * zbar_of_zeta(z)
        } else {
            // ζ⁻⁴ ∫_ζ^∞ x³e^{−x²/4} (F∞ − I/8) dx, free of cancellation.
            (self.f_inf - self.i_const / 8.0) * gauss_tail(z) / z.powi(4)
        }
    }

    pub fn h(&self, zeta: f64) -> f64 {
        self.cutoff.h(zeta)
    }
}

/// `g₀(ζ)` for the given cut-off.
pub fn g0_of_zeta(zeta: f64, cutoff: Cutoff) -> f64 {
    SelfSimilar::get(cutoff).g0(zeta)
}

/// `g(ζ)` for the given cut-off.
pub fn g_of_zeta(zeta: f64, cutoff: Cutoff) -> f64 {
    SelfSimilar::get(cutoff).g(zeta)
}

/// `sup |g″ + (5/ζ)g′ + (ζ/2)g′ + 2g + h|` over a uniform grid `zeta`
/// (excluding `ζ = 0`). Stencils never straddle a breakpoint, so a source
/// with a kink there is handled exactly as on smooth pieces.
pub fn residual_g_ode(zeta: &[f64], g: &[f64], h: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    const WIDTH: usize = 7;
    let n = zeta.len();
    assert_eq!(n, g.len());
    assert!(n >= WIDTH, "need at least {WIDTH} samples");
    let piece = |z: f64| breaks.iter().filter(|&&b| z > b + 1e-12).count();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let z = zeta[i];
        if z <= 0.0 {
            continue;
        }
        let p = piece(z);
        // Contiguous window of nodes from the same piece (breakpoint nodes
        // belong to both neighbours).
        let same = |j: usize| {
            let q = piece(zeta[j]);
            q == p || breaks.iter().any(|&b| (zeta[j] - b).abs() <= 1e-12)
        };
        let mut lo = i;
        let mut hi = i;
        while hi - lo + 1 < WIDTH {
            let can_lo = lo > 0 && same(lo - 1) && (i - lo) <= (hi - i);
            let can_hi = hi + 1 < n && same(hi + 1);
            if can_lo {
                lo -= 1;
            } else if can_hi {
                hi += 1;
            } else if lo > 0 && same(lo - 1) {
                lo -= 1;
            } else {
                break;
            }
        }
        if hi - lo + 1 < 5 {
            continue;
        }
        let w = fd_weights(z, &zeta[lo..=hi], 2);
        let (mut d1, mut d2) = (0.0, 0.0);
        for (k, j) in (lo..=hi).enumerate() {
            d1 += w[1][k] * g[j];
            d2 += w[2][k] * g[j];
        }
        let r = d2 + (5.0 / z + z / 2.0) * d1 + 2.0 * g[i] + h(z);
        worst = worst.max(r.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zbar_series_and_closed_form_agree() {
        for z in [0.6, 0.9, 0.999] {
            let closed = (8.0 - gauss_tail(z)) / z.powi(4);
            assert!((zbar_of_zeta(z) - closed).abs() < 1e-12);
        }
        assert_eq!(zbar_of_zeta(0.0), 0.25);
    }

    #[test]
    fn g_is_continuous_across_breakpoints() {
        for c in Cutoff::ALL {
            let s = SelfSimilar::get(c);
            for b in [1.0, 2.0] {
                let (l, r) = (s.g(b - 1e-9), s.g(b + 1e-9));
                assert!((l - r).abs() < 1e-8, "{c} at {b}: {l} vs {r}");
                let (l, r) = (s.g0(b - 1e-9), s.g0(b + 1e-9));
                assert!((l - r).abs() < 1e-8, "{c} g0 at {b}");
            }
        }
    }

    #[test]
    fn mass_moment_matches_integration_by_parts() {
        // Multiplying the g-equation by ζ and integrating gives
        // ∫ g ζ dζ = 4 g(0) − ∫ h ζ dζ = −1 + 4a.
        for c in Cutoff::ALL {
            let s = SelfSimilar::get(c);
            let expected = 4.0 * s.g(0.0) + 4.0 * s.a();
            assert!((s.mass_moment() - expected).abs() < 1e-8, "{c}");
        }
    }
}
