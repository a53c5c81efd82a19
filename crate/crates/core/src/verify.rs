//! The acceptance suite: thirteen criteria, each a list of checks printed as
//! `name,value,target,tol,status`.
//!
//! Checks are independent, so a caller may evaluate criteria concurrently;
//! expensive shared inputs (the decade evolution, the sphere tests) are
//! computed once per [`Suite`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use crate::ansatz::{self, BubbleParams, Cutoff};
use crate::error::{Error, Result};
use crate::evolve::{self, EvolveConfig, MassOperator, Scheme};
use crate::field::{CumulativeMass, RadialField};
use crate::grid::RadialGrid;
use crate::inner::{self, EllipticConfig, InnerRHS};
use crate::radial;
use crate::reduced::{self, Forcing, IntegrateOptions, ReducedState};
use crate::sphere::{self, BandLimitedTest, PlanarSolver, SphereGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported but not judged.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        })
    }
}

/// One measured quantity against its target.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tol: f64,
    pub status: Status,
}

fn judged(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

impl Check {
    /// `|value − target| ≤ tol`.
    pub fn abs(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, target, tol, status: judged((value - target).abs() <= tol) }
    }

    /// `|value − target| ≤ tol·|target|`.
    pub fn rel(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, target, tol, status: judged((value - target).abs() <= tol * target.abs()) }
    }

    /// `value ≤ tol`, reported with target 0.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, target: 0.0, tol, status: judged(value <= tol) }
    }

    /// `value ≥ target`, reported with tolerance 0.
    pub fn at_least(name: impl Into<String>, value: f64, target: f64) -> Self {
        Self { name: name.into(), value, target, tol: 0.0, status: judged(value >= target) }
    }

    pub fn info(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self { name: name.into(), value, target, tol, status: Status::Info }
    }

    /// `name,value,target,tol,status` with 17 significant digits.
    pub fn line(&self) -> String {
        format!("{},{:.16e},{:.16e},{:.16e},{}", self.name, self.value, self.target, self.tol, self.status)
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    /// Set when the computation itself failed.
    pub error: Option<Error>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.status != Status::Fail)
    }

    /// `criterion N: PASS|FAIL title`.
    pub fn summary(&self) -> String {
        let status = if self.passed() { Status::Pass } else { Status::Fail };
        match &self.error {
            Some(e) => format!("criterion {:>2}: {status} {} (error: {e})", self.id, self.title),
            None => format!("criterion {:>2}: {status} {}", self.id, self.title),
        }
    }
}

pub const TITLES: [&str; 13] = [
    "I = -8",
    "phi1 at the center",
    "moment identity and its convergence order",
    "-32 pi integral",
    "steady-state preservation",
    "second-moment conservation over a decade",
    "lambda sqrt(log t) drift over a decade",
    "reduced ODE rate law",
    "quadratic-form equality",
    "orthogonality",
    "inner elliptic decay law",
    "Hardy uniformity",
    "derivative identity",
];

/// Criteria covered by `verify-all` unless the full suite is requested.
pub const IDENTITY_SUITE: [usize; 7] = [1, 2, 3, 4, 5, 9, 10];

#[derive(Debug, Clone)]
struct SphereRow {
    name: String,
    planar: f64,
    spectral: f64,
    low_modes: f64,
}

/// Shared inputs of the criteria.
#[derive(Default)]
pub struct Suite {
    extra_tests: Vec<(String, BandLimitedTest)>,
    evolution: OnceLock<std::result::Result<Arc<evolve::ParamTrajectory>, Error>>,
    sphere_rows: OnceLock<std::result::Result<Arc<Vec<SphereRow>>, Error>>,
}

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds band-limited tests to criteria 9 and 10 (e.g. randomly drawn).
    pub fn with_extra_tests(mut self, tests: Vec<(String, BandLimitedTest)>) -> Self {
        self.extra_tests = tests;
        self
    }

    /// Runs criterion `id` in `1..=13`.
    pub fn run(&self, id: usize) -> Outcome {
        let start = Instant::now();
        let result = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => self.criterion_6(),
            7 => self.criterion_7(),
            8 => criterion_8(),
            9 => self.criterion_9(),
            10 => self.criterion_10(),
            11 => criterion_11(),
            12 => criterion_12(),
            13 => criterion_13(),
            _ => Err(Error::InvalidParameter(format!("criterion {id} outside 1..=13"))),
        };
        let title = TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown");
        let (checks, error) = match result {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        Outcome { id, title, checks, elapsed: start.elapsed(), error }
    }

    fn trajectory(&self) -> Result<Arc<evolve::ParamTrajectory>> {
        self.evolution.get_or_init(|| evolve::evolve(&EvolveConfig::default()).map(|o| Arc::new(o.trajectory))).clone()
    }

    fn sphere(&self) -> Result<Arc<Vec<SphereRow>>> {
        self.sphere_rows
            .get_or_init(|| {
                let solver = PlanarSolver::default();
                let grid = SphereGrid::new(40, 82)?;
                let mut tests: Vec<(String, BandLimitedTest)> =
                    sphere::constructed_tests().into_iter().map(|(n, t)| (n.to_string(), t)).collect();
                tests.extend(self.extra_tests.iter().cloned());
                let mut rows = Vec::new();
                for (name, t) in tests {
                    let g = solver.g_from_phi(&t.phi())?;
                    let coeffs = sphere::sphere_coefficients(&g, &grid, 8)?;
                    rows.push(SphereRow {
                        name,
                        planar: g.quadratic_form(),
                        spectral: t.spectral_value(),
                        low_modes: coeffs.low_mode_max(1),
                    });
                }
                Ok(Arc::new(rows))
            })
            .clone()
    }

    fn criterion_6(&self) -> Result<Vec<Check>> {
        let tr = self.trajectory()?;
        let m2 = &tr.second_moment;
        let (first, last) = (m2[0], m2[m2.len() - 1]);
        let mut out = vec![Check::at_most("second_moment.relative_change", ((last - first) / first).abs(), 1e-3)];
        // Local form: |d/dt M2| ≤ 1e-3 M2/t between consecutive samples.
        let worst = (1..m2.len())
            .map(|i| {
                let dt = tr.times[i] - tr.times[i - 1];
                ((m2[i] - m2[i - 1]) / dt).abs() * tr.times[i] / m2[i]
            })
            .fold(0.0, f64::max);
        out.push(Check::at_most("second_moment.rate_times_t", worst, 1e-3));
        Ok(out)
    }

    fn criterion_7(&self) -> Result<Vec<Check>> {
        let tr = self.trajectory()?;
        let series: Vec<f64> = tr.times.iter().zip(&tr.lambda_est).map(|(t, l)| l * t.ln().sqrt()).collect();
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let (lo, hi) = series.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let mut out = vec![Check::at_most("lambda_sqrt_log_t.drift", (hi - lo) / mean, 0.1)];
        let (c, tail_drift) = evolve::fit_rate(&tr)?;
        out.push(Check::info("lambda_sqrt_log_t.fitted_c", c, f64::NAN, tail_drift));
        Ok(out)
    }

    fn criterion_9(&self) -> Result<Vec<Check>> {
        let rows = self.sphere()?;
        let mut out = Vec::new();
        for r in rows.iter() {
            out.push(Check::abs(format!("quadratic_form.{}", r.name), r.planar, r.spectral, 1e-6));
        }
        // The measure relation U₀dy = 2dA gives ∫φg = 4·(the literal form).
        for r in rows.iter() {
            out.push(Check::info(
                format!("quadratic_form_corrected.{}", r.name),
                r.planar,
                sphere::forms::PLANAR_FACTOR * r.spectral,
                1e-6,
            ));
        }
        Ok(out)
    }

    fn criterion_10(&self) -> Result<Vec<Check>> {
        let rows = self.sphere()?;
        let mut out: Vec<Check> =
            rows.iter().map(|r| Check::at_most(format!("g_low_modes.{}", r.name), r.low_modes, 1e-8)).collect();
        for (name, h, t, lambda) in inner_orthogonality_cases()? {
            let o = inner::orthogonalize(&h, t, lambda, Cutoff::default())?;
            let m = inner::moments(&o)?;
            let s = inner::moment_scales(&o)?;
            for (j, label) in ["second", "first_1", "first_2", "mass"].iter().enumerate() {
                out.push(Check::at_most(format!("orthogonalized.{name}.{label}"), m[j].abs() / s[j], 1e-10));
            }
        }
        Ok(out)
    }
}

fn inner_orthogonality_cases() -> Result<Vec<(&'static str, InnerRHS, f64, f64)>> {
    Ok(vec![
        ("radial_m5.5", InnerRHS::power_profile(5.5)?, 1e3, 0.1),
        (
            "shifted_m5",
            InnerRHS::planar(5.0, |y| (1.0 + (y[0] - 0.7).powi(2) + (y[1] + 0.4).powi(2)).powf(-2.5))?,
            1e2,
            0.5,
        ),
    ])
}

fn criterion_1() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for c in Cutoff::ALL {
        out.push(Check::abs(format!("I.{}", c.name()), ansatz::I_const(c)?, -8.0, 1e-6));
    }
    Ok(out)
}

fn criterion_2() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for lambda in [0.1, 0.03] {
        for t in [1e3, 1e6] {
            let p = BubbleParams::new(lambda, 1.0, [0.0, 0.0], t)?;
            let v = ansatz::phi1(p.xi, &p, Cutoff::default());
            out.push(Check::rel(format!("phi1_center.l{lambda}.t{t:e}"), v, -lambda * lambda / (4.0 * t * t), 1e-6));
        }
    }
    Ok(out)
}

/// Relative error of `∫E(ω)|x|² = 4M − M²/2π` for density `name` on `n` nodes.
fn moment_error(density: &dyn Fn(f64) -> f64, tail: Option<f64>, n: usize) -> Result<f64> {
    let g = Arc::new(RadialGrid::geometric_with_core(n, 1e3, 0.05)?);
    let mut u = RadialField::from_fn(g, density)?;
    if let Some(p) = tail {
        u = u.with_tail(p)?;
    }
    let m = radial::quad_mass(&u)?;
    let e = radial::apply_E(&u)?;
    let target = 4.0 * m - m * m / (2.0 * PI);
    Ok((radial::planar_moment(&e, 2)? - target).abs() / target.abs())
}

fn criterion_3() -> Result<Vec<Check>> {
    type Density = (&'static str, Box<dyn Fn(f64) -> f64>, Option<f64>);
    let densities: [Density; 3] = [
        ("half_bubble", Box::new(|r: f64| 4.0 / (1.0 + r * r).powi(2)), Some(4.0)),
        ("gaussian", Box::new(|r: f64| 2.0 * (-r * r).exp()), None),
        ("wide_bump", Box::new(|r: f64| (1.0 + r * r / 4.0).powi(-3)), Some(6.0)),
    ];
    let mut out = Vec::new();
    for (name, f, tail) in &densities {
        let coarse = moment_error(f.as_ref(), *tail, 256)?;
        let fine = moment_error(f.as_ref(), *tail, 512)?;
        out.push(Check::at_most(format!("moment_identity.{name}"), fine, 1e-3));
        // Once the error reaches rounding level the order is meaningless.
        if coarse > 1e-12 {
            out.push(Check::at_least(format!("moment_order.{name}"), (coarse / fine).log2(), 2.0));
        } else {
            out.push(Check::info(format!("moment_order.{name}"), f64::NAN, 2.0, 0.0));
        }
    }
    Ok(out)
}

fn criterion_4() -> Result<Vec<Check>> {
    Ok(vec![
        Check::rel("minus_32_pi", ansatz::minus32pi_check()?, -32.0 * PI, 1e-4),
        Check::info("unweighted_flux", ansatz::flux_mass_check()?, 0.0, 1e-10),
    ])
}

/// Steps from `m*` on the default 4096-node grid.
pub const STEADY_STEPS: usize = 1000;
pub const STEADY_DT: f64 = 1e-2;

fn criterion_5() -> Result<Vec<Check>> {
    let g = Arc::new(RadialGrid::geometric_with_core(4096, 1e3, 0.05)?);
    let mstar = |r: f64| 8.0 * PI * r * r / (1.0 + r * r);
    let m0 = CumulativeMass::from_fn(Arc::clone(&g), mstar, mstar(1e3))?;
    let op = MassOperator::new(g);
    let mut m = m0.clone();
    for _ in 0..STEADY_STEPS {
        m = evolve::step(&op, &m, STEADY_DT, Scheme::Sdirk2)?;
    }
    let drift = m.values().iter().zip(m0.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(vec![Check::at_most("steady_state.drift", drift, 1e-8 * 8.0 * PI)])
}

fn criterion_8() -> Result<Vec<Check>> {
    let state = ReducedState::default_at(1e3)?;
    let invariant = state.eta * state.t.ln();
    let tr = reduced::integrate(&state, 1e9, &Forcing::none(), &IntegrateOptions::default())?;
    let worst = tr.t.iter().zip(&tr.eta).map(|(t, e)| (e * t.ln() - invariant).abs()).fold(0.0, f64::max);
    let c = reduced::c_limit(&tr)?;
    Ok(vec![
        Check::at_most("reduced.eta_log_t_deviation", worst, 1e-6),
        Check::abs("reduced.c_limit", c.c, invariant.sqrt(), 1e-5),
    ])
}

fn criterion_11() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in [4.5, 5.0, 5.5] {
        let h = inner::orthogonalize(&InnerRHS::power_profile(m)?, 4.0, 1.0, Cutoff::default())?;
        let s = inner::solve_elliptic_radial(&h, &EllipticConfig::default())?;
        out.push(Check::abs(format!("decay_exponent.m{m}"), s.fitted_decay(1e4, 1e7)?, m - 2.0, 0.1));
    }
    Ok(out)
}

fn criterion_12() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut scaled = Vec::new();
    for radius in [10.0, 100.0, 1000.0] {
        let v = sphere::hardy_quotient(radius, 400)? * radius * radius;
        out.push(Check::info(format!("hardy_scaled.R{radius}"), v, f64::NAN, 0.0));
        scaled.push(v);
    }
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    out.push(Check::at_most("hardy_band_ratio", hi / lo, 1.2));
    Ok(out)
}

fn criterion_13() -> Result<Vec<Check>> {
    let solver = PlanarSolver::default();
    let mut out = Vec::new();
    for (l, k) in [(2usize, 1i64), (3, 1)] {
        let family = sphere::rotating_family(1.3, l, k);
        let (lhs, rhs) = sphere::derivative_identity_check(&family, 0.4, 1e-3, &solver)?;
        out.push(Check::abs(format!("derivative_identity.e20_e{l}{k}"), lhs, rhs, 1e-6));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let c = Check::abs("x", 1.0, 1.0, 1e-6);
        assert_eq!(c.line(), "x,1.0000000000000000e0,1.0000000000000000e0,9.9999999999999995e-7,PASS");
        assert_eq!(Check::at_most("y", 2.0, 1.0).status, Status::Fail);
    }

    #[test]
    fn unknown_criterion_is_an_error() {
        let o = Suite::new().run(14);
        assert!(!o.passed() && o.error.is_some());
    }
}
