//! One function per subcommand. Each writes its CSVs into the output
//! directory and returns the report checks.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ks_blowup::ansatz::{self, BubbleParams, Cutoff, SelfSimilar};
use ks_blowup::evolve::{self, EvolveConfig, GridSpec, InitialCondition, ParamTrajectory, Scheme};
use ks_blowup::inner::{self, EllipticConfig, InnerRHS};
use ks_blowup::radial;
use ks_blowup::reduced::{self, Forcing, IntegrateOptions, ReducedState};
use ks_blowup::sphere::{self, BandLimitedTest, PlanarSolver, SphereCoeffs, SphereGrid};
use ks_blowup::verify::{Check, Outcome, Status, Suite, IDENTITY_SUITE};
use ks_blowup::{Error, RadialField, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Command, ConfigError, RunConfig};

/// Why a run stopped; each maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("io error: {e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidGrid(_)
            | Error::TooFewSamples { .. }
            | Error::InsufficientSpan(_)
            | Error::Aliasing { .. }
            | Error::Io(_)
            | Error::Parse(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

pub type Outcomes = std::result::Result<Report, Failure>;

/// Report lines, optionally grouped under comment headings.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub failed: usize,
}

impl Report {
    fn push(&mut self, c: Check) {
        if c.status == Status::Fail {
            self.failed += 1;
        }
        self.lines.push(c.line());
    }

    fn comment(&mut self, text: &str) {
        self.lines.push(format!("# {text}"));
    }

    pub fn write(&self, path: &Path, header: &str) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(header.as_bytes())?;
        writeln!(w, "name,value,target,tol,status")?;
        for l in &self.lines {
            writeln!(w, "{l}")?;
        }
        w.flush()
    }
}

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub seed: Option<u64>,
}

impl Context<'_> {
    fn create(&self, name: &str) -> std::io::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn cutoff(&self) -> Cutoff {
        self.cfg.str("cutoff").parse().expect("schema restricts the choice")
    }
}

pub fn run(ctx: &Context) -> Outcomes {
    match ctx.cfg.command {
        Command::Ansatz => ansatz_dump(ctx),
        Command::Moments => moments(ctx),
        Command::Evolve => evolve_run(ctx),
        Command::FitRate => fit_rate(ctx),
        Command::Spectrum => spectrum(ctx),
        Command::InnerSolve => inner_solve(ctx),
        Command::ReducedOde => reduced_ode(ctx),
        Command::VerifyAll => verify_all(ctx),
    }
}

fn ansatz_dump(ctx: &Context) -> Outcomes {
    let cfg = ctx.cfg;
    let cutoff = ctx.cutoff();
    let (lambda, t) = (cfg.f64("lambda"), cfg.f64("t"));
    let s = SelfSimilar::get(cutoff);

    let mut w = ctx.create("selfsim.csv")?;
    writeln!(w, "zeta,g0,zbar,g,h")?;
    let (n, z_max) = (cfg.usize("n_zeta"), cfg.f64("zeta_max"));
    for i in 0..n {
        let z = z_max * i as f64 / (n - 1) as f64;
        writeln!(w, "{z:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", s.g0(z), s.zbar(z), s.g(z), s.h(z))?;
    }
    w.flush()?;

    // The outer cutoff vanishes beyond 2√t, so 4√t holds the whole profile.
    let grid = Arc::new(RadialGrid::geometric_with_core(cfg.usize("n_r"), 4.0 * t.sqrt(), 0.25 * lambda)?);
    let p = BubbleParams::calibrated(lambda, t, cutoff)?;
    let mut w = ctx.create("profile.csv")?;
    writeln!(w, "r,u1,u2,phi1")?;
    for &r in grid.nodes() {
        let (a, b, c) =
            (ansatz::u1_radial(r, &p, cutoff), ansatz::u2_radial(r, &p, cutoff), ansatz::phi1_radial(r, &p, cutoff));
        writeln!(w, "{r:.16e},{a:.16e},{b:.16e},{c:.16e}")?;
    }
    w.flush()?;

    let u2 = RadialField::from_fn(Arc::clone(&grid), |r| ansatz::u2_radial(r, &p, cutoff))?;
    let mut rep = Report::default();
    rep.push(Check::abs("i_const", s.i_const(), -8.0, 1e-6));
    rep.push(Check::info("a", s.a(), f64::NAN, 0.0));
    rep.push(Check::info("mass_moment", s.mass_moment(), f64::NAN, 0.0));
    rep.push(Check::info("alpha0", ansatz::alpha0(t, lambda, cutoff), f64::NAN, 0.0));
    rep.push(Check::info("alpha_calibrated", p.alpha, f64::NAN, 0.0));
    rep.push(Check::rel("u2_mass", radial::quad_mass(&u2)?, 8.0 * PI, 1e-6));
    Ok(rep)
}

fn moments(ctx: &Context) -> Outcomes {
    let cfg = ctx.cfg;
    let grid = Arc::new(RadialGrid::geometric_with_core(cfg.usize("n"), cfg.f64("r_max"), 0.05)?);
    let cutoff = Cutoff::default();
    let p = BubbleParams::calibrated(cfg.f64("lambda"), cfg.f64("t"), cutoff)?;
    if 2.0 * p.t.sqrt() >= grid.r_max() {
        return Err(Failure::Config(format!("r_max = {} must exceed the ansatz support 2√t", grid.r_max())));
    }
    type Density<'a> = (&'static str, Box<dyn Fn(f64) -> f64 + 'a>, Option<f64>);
    let densities: [Density; 4] = [
        ("half_bubble", Box::new(|r: f64| 4.0 / (1.0 + r * r).powi(2)), Some(4.0)),
        ("gaussian", Box::new(|r: f64| 2.0 * (-r * r).exp()), None),
        ("wide_bump", Box::new(|r: f64| (1.0 + r * r / 4.0).powi(-3)), Some(6.0)),
        ("ansatz_u2", Box::new(|r: f64| ansatz::u2_radial(r, &p, cutoff)), None),
    ];
    let mut rep = Report::default();
    for (name, f, tail) in &densities {
        let mut u = RadialField::from_fn(Arc::clone(&grid), f.as_ref())?;
        if let Some(q) = tail {
            u = u.with_tail(*q)?;
        }
        let m = radial::quad_mass(&u)?;
        let lhs = radial::planar_moment(&radial::apply_E(&u)?, 2)?;
        rep.push(Check::info(format!("mass.{name}"), m, f64::NAN, 0.0));
        // At mass 8π the target is 0, so the tolerance scales with the 4M term.
        rep.push(Check::abs(format!("moment_identity.{name}"), lhs, 4.0 * m - m * m / (2.0 * PI), 4e-3 * m));
    }
    let u2 = RadialField::from_fn(grid, |r| ansatz::u2_radial(r, &p, cutoff))?;
    let radius = p.t.sqrt();
    let m2 = radial::second_moment(&u2, radius)?;
    // Leading order 16πλ² log(√t/λ); the remainder is O(λ²).
    let lead = 16.0 * PI * p.lambda * p.lambda * (radius / p.lambda).ln();
    rep.push(Check::info("second_moment.ansatz_u2", m2, lead, 0.0));
    rep.push(Check::info("second_moment.kappa", (m2 - lead) / (p.lambda * p.lambda), f64::NAN, 0.0));
    Ok(rep)
}

fn evolve_config(cfg: &RunConfig) -> EvolveConfig {
    let initial = match cfg.str("initial") {
        "ansatz" => InitialCondition::Ansatz {
            lambda: cfg.f64("lambda"),
            cutoff: cfg.str("cutoff").parse().expect("schema restricts the choice"),
        },
        "gaussian" => InitialCondition::Gaussian { width: cfg.f64("width") },
        _ => InitialCondition::Steady { lambda: cfg.f64("lambda") },
    };
    EvolveConfig {
        total_mass: cfg.f64("mass"),
        initial,
        t0: cfg.f64("t0"),
        t_end: cfg.f64("t_end"),
        grid: GridSpec::Core { n: cfg.usize("n"), r_max: cfg.f64("r_max"), core: cfg.f64("core") },
        scheme: cfg.str("scheme").parse::<Scheme>().expect("schema restricts the choice"),
        dt0: cfg.f64("dt0"),
        safety: cfg.f64("safety"),
        growth: cfg.f64("growth"),
        samples_per_decade: cfg.usize("samples_per_decade"),
        snapshot_every: cfg.usize("snapshot_every"),
    }
}

fn write_snapshot(path: PathBuf, m: &ks_blowup::CumulativeMass) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "r,u,m")?;
    let u = m.density();
    for ((r, d), c) in m.grid().nodes().iter().zip(u.values()).zip(m.values()) {
        writeln!(w, "{r:.16e},{d:.16e},{c:.16e}")?;
    }
    w.flush()
}

fn evolve_run(ctx: &Context) -> Outcomes {
    let config = evolve_config(ctx.cfg);
    let out = evolve::evolve(&config)?;
    let w = ctx.create("trajectory.csv")?;
    out.trajectory.write_csv(w)?;
    for (i, (_, m)) in out.snapshots.iter().enumerate() {
        write_snapshot(ctx.out.join(format!("snapshot_{i:04}.csv")), m)?;
    }
    write_snapshot(ctx.out.join("snapshot_final.csv"), &out.final_state)?;

    let mut rep = Report::default();
    let tr = &out.trajectory;
    rep.push(Check::info("steps", out.steps as f64, f64::NAN, 0.0));
    for (i, (t, _)) in out.snapshots.iter().enumerate() {
        rep.push(Check::info(format!("snapshot_{i:04}.t"), *t, f64::NAN, 0.0));
    }
    let m2 = &tr.second_moment;
    rep.push(Check::info("second_moment.relative_change", (m2[m2.len() - 1] - m2[0]) / m2[0], 0.0, 0.0));
    rep.push(Check::info("lambda_est.final", tr.lambda_est[tr.len() - 1], f64::NAN, 0.0));
    if let Ok((c, drift)) = evolve::fit_rate(tr) {
        rep.push(Check::info("lambda_sqrt_log_t.fitted_c", c, f64::NAN, drift));
    }
    Ok(rep)
}

fn fit_rate(ctx: &Context) -> Outcomes {
    let path = Path::new(ctx.cfg.str("trajectory"));
    let file = File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let tr = ParamTrajectory::read_csv(BufReader::new(file))?;
    let (c, drift) = evolve::fit_rate(&tr)?;
    let mut rep = Report::default();
    rep.push(Check::info("samples", tr.len() as f64, f64::NAN, 0.0));
    rep.push(Check::info("lambda_sqrt_log_t.fitted_c", c, f64::NAN, drift));
    Ok(rep)
}

/// A band-limited test with coefficients uniform in `[−1, 1]` for every
/// degree `2..=degree`, drawn from a ChaCha8 stream.
pub fn random_test(seed: u64, degree: usize) -> ks_blowup::Result<BandLimitedTest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = SphereCoeffs::zeros(degree);
    for l in 2..=degree {
        let l_i = l as i64;
        for k in -l_i..=l_i {
            g.set(l, k, rng.random_range(-1.0..=1.0));
        }
    }
    BandLimitedTest::new(g)
}

fn spectrum(ctx: &Context) -> Outcomes {
    let cfg = ctx.cfg;
    let name = cfg.str("test");
    let test = if name == "random" {
        random_test(ctx.seed.unwrap_or(0), cfg.usize("random_degree"))?
    } else {
        sphere::constructed_tests().into_iter().find(|(n, _)| *n == name).expect("schema lists the tests").1
    };
    let solver = PlanarSolver::default();
    let grid = SphereGrid::new(cfg.usize("n_theta"), cfg.usize("n_phi"))?;
    let g = solver.g_from_phi(&test.phi())?;
    let coeffs = sphere::sphere_coefficients(&g, &grid, cfg.usize("l_max"))?;
    coeffs.write_csv(ctx.create("coefficients.csv")?)?;

    let planar = g.quadratic_form();
    let spectral = test.spectral_value();
    let mut rep = Report::default();
    rep.push(Check::info("quadratic_form.planar", planar, f64::NAN, 0.0));
    rep.push(Check::info("quadratic_form.spectral", spectral, f64::NAN, 0.0));
    rep.push(Check::info("quadratic_form.ratio", planar / spectral, sphere::forms::PLANAR_FACTOR, 1e-6));
    rep.push(Check::at_most("g_low_modes", coeffs.low_mode_max(1), 1e-8));
    rep.push(Check::info("sandwich_ratio", sphere::sandwich_ratio(&g, &solver), f64::NAN, 0.0));
    Ok(rep)
}

fn inner_solve(ctx: &Context) -> Outcomes {
    let cfg = ctx.cfg;
    let m = cfg.f64("decay");
    let (t, lambda, cutoff) = (cfg.f64("t"), cfg.f64("lambda"), ctx.cutoff());
    let raw = InnerRHS::power_profile(m)?;
    let d = inner::dj_coefficients(&raw, t, lambda, cutoff)?;
    let h = inner::orthogonalize(&raw, t, lambda, cutoff)?;
    let mom = inner::moments(&h)?;
    let scale = inner::moment_scales(&h)?;
    let ecfg = EllipticConfig { n: cfg.usize("n"), r_max: cfg.f64("r_max"), ..EllipticConfig::default() };
    let sol = inner::solve_elliptic_radial(&h, &ecfg)?;
    sol.write_csv(ctx.create("inner.csv")?)?;

    let (lo, hi) = (cfg.f64("fit_lo"), cfg.f64("fit_hi"));
    let fit = sol.fitted_decay(lo, hi)?;
    let r = sol.grid.nodes();
    let phi_env = r.iter().zip(&sol.phi).map(|(x, p)| p.abs() * (1.0 + x).powf(m - 2.0)).fold(0.0, f64::max);
    let h_env = h.envelope_constant(ecfg.r_max);

    let mut w = ctx.create("inner_report.txt")?;
    let list = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(", ");
    writeln!(w, "{{")?;
    writeln!(w, "  \"decay\": {m:.16e},")?;
    writeln!(w, "  \"d_j\": [{}],", list(&d))?;
    writeln!(w, "  \"relative_moments\": [{}],", list(&[0, 1, 2, 3].map(|j| mom[j].abs() / scale[j])))?;
    writeln!(w, "  \"h_envelope\": {h_env:.16e},")?;
    writeln!(w, "  \"phi_envelope\": {phi_env:.16e},")?;
    writeln!(w, "  \"fitted_decay\": {fit:.16e},")?;
    writeln!(w, "  \"mass\": {:.16e},", sol.mass())?;
    writeln!(w, "  \"relative_residual\": {:.16e}", sol.relative_residual)?;
    writeln!(w, "}}")?;
    w.flush()?;

    let mut rep = Report::default();
    for (j, v) in d.iter().enumerate() {
        rep.push(Check::info(format!("d_{j}"), *v, f64::NAN, 0.0));
    }
    for j in 0..4 {
        rep.push(Check::at_most(format!("relative_moment_{j}"), mom[j].abs() / scale[j], 1e-10));
    }
    rep.push(Check::abs("fitted_decay", fit, m - 2.0, 0.1));
    rep.push(Check::at_most("mass", sol.mass().abs(), 1e-8));
    rep.push(Check::at_most("relative_residual", sol.relative_residual, ecfg.residual_tol));
    rep.push(Check::info("phi_envelope", phi_env, f64::NAN, 0.0));
    rep.push(Check::info("h_envelope", h_env, f64::NAN, 0.0));
    Ok(rep)
}

fn reduced_ode(ctx: &Context) -> Outcomes {
    let cfg = ctx.cfg;
    let (t0, eta0) = (cfg.f64("t0"), cfg.f64("eta0"));
    let xi = [cfg.f64("xi1"), cfg.f64("xi2")];
    let slaving = cfg.bool("slaving");
    let state = ReducedState::slaved(t0, eta0, xi)?;
    let forcing = match cfg.str("forcing") {
        "none" => Forcing::none(),
        _ => Forcing::envelope_ceiling(cfg.f64("forcing_scale"), cfg.f64("sigma")),
    };
    let opts = IntegrateOptions {
        slaving,
        samples_per_decade: cfg.usize("samples_per_decade"),
        ..IntegrateOptions::default()
    };
    let tr = reduced::integrate(&state, cfg.f64("t_end"), &forcing, &opts)?;
    tr.write_csv(ctx.create("reduced.csv")?)?;

    let mut rep = Report::default();
    let invariant = eta0 * t0.ln();
    let drift = tr.eta_logt_drift();
    if slaving && cfg.str("forcing") == "none" {
        rep.push(Check::at_most("eta_log_t.drift", drift, 1e-6));
    } else {
        rep.push(Check::info("eta_log_t.drift", drift, 0.0, 0.0));
    }
    let c = reduced::c_limit(&tr)?;
    rep.push(Check::info("c_limit", c.c, invariant.sqrt(), c.uncertainty));
    let (a, b) = tr.constraint_box(&forcing);
    rep.push(Check::info("constraint_box.eta", a, f64::NAN, 0.0));
    rep.push(Check::info("constraint_box.alpha", b, f64::NAN, 0.0));
    Ok(rep)
}

fn verify_all(ctx: &Context) -> Outcomes {
    let ids: Vec<usize> = if ctx.cfg.bool("full") { (1..=13).collect() } else { IDENTITY_SUITE.to_vec() };
    let mut suite = Suite::new();
    if let Some(seed) = ctx.seed {
        suite = suite.with_extra_tests(vec![(format!("random_seed{seed}"), random_test(seed, 4)?)]);
    }
    // Collected in order whatever the schedule.
    let outcomes: Vec<Outcome> = ids.par_iter().map(|&id| suite.run(id)).collect();
    let mut rep = Report::default();
    for o in &outcomes {
        println!("{}", o.summary());
        rep.comment(&o.summary());
        if let Some(e) = &o.error {
            rep.comment(&format!("criterion {} error: {e}", o.id));
            rep.failed += 1;
        }
        for c in &o.checks {
            rep.push(c.clone());
        }
    }
    Ok(rep)
}
