//! Smooth cut-offs `χ₀` equal to 1 below `s = 1` and 0 above `s = 2`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Cutoff {
    /// `1 − w³(10 − 15w + 6w²)` with `w = s − 1`; C² at the ends.
    #[default]
    QuinticSmoothstep,
    /// `f(2−s) / (f(2−s) + f(s−1))` with `f(x) = e^{−1/x}`; C^∞.
    ExpBump,
}

fn bump(x: f64) -> [f64; 3] {
    if x <= 0.0 {
        return [0.0; 3];
    }
    let f = (-1.0 / x).exp();
    let x2 = x * x;
    [f, f / x2, f * (1.0 / (x2 * x2) - 2.0 / (x2 * x))]
}

impl Cutoff {
    pub const ALL: [Cutoff; 2] = [Cutoff::QuinticSmoothstep, Cutoff::ExpBump];

    /// `(χ₀, χ₀′, χ₀″)` at `s`.
    pub fn eval(self, s: f64) -> [f64; 3] {
        if s <= 1.0 {
            return [1.0, 0.0, 0.0];
        }
        if s >= 2.0 {
            return [0.0; 3];
        }
        match self {
            Cutoff::QuinticSmoothstep => {
                let w = s - 1.0;
                let v = 1.0 - w * w * w * (10.0 - 15.0 * w + 6.0 * w * w);
                let d1 = -30.0 * w * w * (1.0 - w) * (1.0 - w);
                let d2 = -60.0 * w * (1.0 - w) * (1.0 - 2.0 * w);
                [v, d1, d2]
            }
            Cutoff::ExpBump => {
                let [a, da, dda] = bump(2.0 - s);
                let [b, db, ddb] = bump(s - 1.0);
                let (a1, a2) = (-da, dda);
                let sum = a + b;
                let n = a1 * b - a * db;
                let dn = a2 * b - a * ddb;
                let ds = a1 + db;
                [a / sum, n / (sum * sum), dn / (sum * sum) - 2.0 * n * ds / (sum * sum * sum)]
            }
        }
    }

    pub fn chi(self, s: f64) -> f64 {
        self.eval(s)[0]
    }

    /// Source of the self-similar correction,
    /// `h(ζ) = (8/ζ⁴)[χ₀″ − 3χ₀′/ζ + ζχ₀′/2]`, supported in `[1, 2]`.
    pub fn h(self, zeta: f64) -> f64 {
        if zeta <= 1.0 || zeta >= 2.0 {
            return 0.0;
        }
        let [_, d1, d2] = self.eval(zeta);
        8.0 / zeta.powi(4) * (d2 - 3.0 * d1 / zeta + 0.5 * zeta * d1)
    }

    /// Points where `χ₀` or its derivatives may lose smoothness.
    pub fn breakpoints(self) -> [f64; 2] {
        [1.0, 2.0]
    }

    pub fn name(self) -> &'static str {
        match self {
            Cutoff::QuinticSmoothstep => "quintic_smoothstep",
            Cutoff::ExpBump => "exp_bump",
        }
    }
}

impl fmt::Display for Cutoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Cutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "quintic_smoothstep" | "quintic" => Ok(Cutoff::QuinticSmoothstep),
            "exp_bump" => Ok(Cutoff::ExpBump),
            other => Err(Error::Parse(format!("unknown cutoff `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        for c in Cutoff::ALL {
            for k in 1..40 {
                let s = 1.0 + k as f64 / 40.0;
                let e = 1e-4;
                let [_, d1, d2] = c.eval(s);
                let fd1 = (c.chi(s + e) - c.chi(s - e)) / (2.0 * e);
                let fd2 = (c.chi(s + e) - 2.0 * c.chi(s) + c.chi(s - e)) / (e * e);
                assert!((d1 - fd1).abs() < 1e-6, "{c} s={s}");
                assert!((d2 - fd2).abs() < 1e-4, "{c} s={s}");
            }
        }
    }

    #[test]
    fn monotone_and_supported() {
        for c in Cutoff::ALL {
            assert_eq!(c.chi(0.5), 1.0);
            assert_eq!(c.chi(2.5), 0.0);
            assert_eq!(c.h(0.5), 0.0);
            assert_eq!(c.h(3.0), 0.0);
            let mut prev = 1.0;
            for k in 0..=1000 {
                let v = c.chi(1.0 + k as f64 / 1000.0);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn quintic_h_at_midpoint() {
        // w = 1/2: χ₀′ = −15/8, χ₀″ = 0.
        let expected = 100.0 / 27.0;
        assert!((Cutoff::QuinticSmoothstep.h(1.5) - expected).abs() < 1e-13);
    }

    #[test]
    fn parse_round_trip() {
        for c in Cutoff::ALL {
            assert_eq!(c.name().parse::<Cutoff>().unwrap(), c);
        }
        assert!("box".parse::<Cutoff>().is_err());
    }
}
