//! Radial Keller–Segel evolution in cumulative-mass form.
//!
//! With `m(r,t)` the mass inside radius `r` the system becomes the scalar
//! equation `m_t = m_rr − m_r/r + m m_r/(2πr)` with `m(0) = 0` and
//! `m(r_max) = M`, so the total mass is held by the boundary condition.
//! Space is discretized with fourth-order differences in the computational
//! coordinate of the grid; time with a two-stage L-stable SDIRK method whose
//! stages are solved by Newton iteration on the banded Jacobian.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::ansatz::{self, BubbleParams, Cutoff};
use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::field::{CumulativeMass, RadialField};
use crate::grid::RadialGrid;
use crate::radial;
use crate::stencil;

const KL: usize = 4;
const KU: usize = 2;

/// Row stencil: `(column, weight for ∂_s, weight for ∂_s²)`.
type Row = Vec<(usize, f64, f64)>;

/// Discrete right-hand side `m_rr − m_r/r + m m_r/(2πr)`.
#[derive(Debug, Clone)]
pub struct MassOperator {
    grid: Arc<RadialGrid>,
    rows: Vec<Row>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl MassOperator {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        let h = grid.ds();
        let r = grid.nodes();
        let j1 = grid.jacobian();
        let j2 = grid.jacobian2();
        let mut rows = vec![Row::new(); n];
        let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let c1 = [1.0, -8.0, 0.0, 8.0, -1.0];
        let c2 = [-1.0, 16.0, -30.0, 16.0, -1.0];
        for i in 1..n - 1 {
            let mut row: Row = Vec::new();
            let mut push = |col: usize, w1: f64, w2: f64| {
                if let Some(e) = row.iter_mut().find(|e| e.0 == col) {
                    e.1 += w1;
                    e.2 += w2;
                } else {
                    row.push((col, w1, w2));
                }
            };
            if i + 2 < n {
                for k in 0..5 {
                    // Even reflection across the origin.
                    let col = (i as isize + k as isize - 2).unsigned_abs();
                    push(col, c1[k] / (12.0 * h), c2[k] / (12.0 * h * h));
                }
            } else {
                let w1 = [0.0, -1.0, 6.0, -18.0, 10.0, 3.0];
                let w2 = [1.0, -6.0, 14.0, -4.0, -15.0, 10.0];
                for k in 0..6 {
                    let col = i + k - 4;
                    push(col, w1[k] / (12.0 * h), w2[k] / (12.0 * h * h));
                }
            }
            rows[i] = row;
            a[i] = 1.0 / (j1[i] * j1[i]);
            b[i] = j2[i] / j1[i].powi(3) + 1.0 / (r[i] * j1[i]);
            c[i] = 1.0 / (2.0 * PI * r[i] * j1[i]);
        }
        Self { grid, rows, a, b, c }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Interior values of the right-hand side; boundary entries are zero.
    pub fn apply(&self, m: &[f64], out: &mut [f64]) {
        let n = m.len();
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let (d1, d2) = self.derivatives(m, i);
            out[i] = self.a[i] * d2 - self.b[i] * d1 + self.c[i] * m[i] * d1;
        }
    }

    /// `(∂_s m, ∂_s² m)` at row `i`. The stencil weights sum to zero, so
    /// differences `m_j − m_i` are summed instead of raw values; this keeps
    /// rounding relative to the local variation rather than to `m`.
    fn derivatives(&self, m: &[f64], i: usize) -> (f64, f64) {
        let (mut d1, mut d2) = (0.0, 0.0);
        for &(j, w1, w2) in &self.rows[i] {
            let dm = m[j] - m[i];
            d1 += w1 * dm;
            d2 += w2 * dm;
        }
        (d1, d2)
    }

    /// `I − scale·∂F/∂m` with identity boundary rows.
    fn newton_matrix(&self, m: &[f64], scale: f64) -> BandMatrix {
        let n = m.len();
        let mut mat = BandMatrix::zeros(n, KL, KU);
        mat.set(0, 0, 1.0);
        mat.set(n - 1, n - 1, 1.0);
        for i in 1..n - 1 {
            let (d1, _) = self.derivatives(m, i);
            for &(j, w1, w2) in &self.rows[i] {
                let dfdm = self.a[i] * w2 - self.b[i] * w1 + self.c[i] * m[i] * w1;
                mat.add(i, j, -scale * dfdm);
            }
            mat.add(i, i, 1.0 - scale * self.c[i] * d1);
        }
        mat
    }

    /// Solves `Y − scale·F(Y) = rhs` with the boundary values of `rhs`.
    fn implicit_solve(&self, rhs: &[f64], guess: &[f64], scale: f64, tol: f64) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut y = guess.to_vec();
        y[0] = rhs[0];
        y[n - 1] = rhs[n - 1];
        let mut f = vec![0.0; n];
        let mut last = f64::INFINITY;
        for _ in 0..30 {
            self.apply(&y, &mut f);
            let mut res: Vec<f64> = (0..n).map(|i| rhs[i] + scale * f[i] - y[i]).collect();
            res[0] = rhs[0] - y[0];
            res[n - 1] = rhs[n - 1] - y[n - 1];
            let lu = self.newton_matrix(&y, scale).factor()?;
            lu.solve(&mut res);
            let step = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                y[i] += res[i];
            }
            if !step.is_finite() {
                return Err(Error::Newton(step));
            }
            // Below `tol`, or stalled at the rounding floor of the solve.
            if step <= tol || (step < 1e2 * tol && step > 0.25 * last) {
                return Ok(y);
            }
            last = step;
        }
        Err(Error::Newton(last))
    }
}

/// Time discretization of a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Two-stage, second-order, L-stable SDIRK with Newton stages.
    #[default]
    Sdirk2,
    /// Crank–Nicolson diffusion with Heun transport (one fixed-point
    /// correction); second order but only for moderate steps.
    SemiImplicit,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdirk2" => Ok(Scheme::Sdirk2),
            "semi_implicit" => Ok(Scheme::SemiImplicit),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

/// One step of the cumulative-mass equation. `m(0) = 0` and
/// `m(r_max) = M` hold exactly afterwards.
pub fn step(op: &MassOperator, m: &CumulativeMass, dt: f64, scheme: Scheme) -> Result<CumulativeMass> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
    }
    let mass = m.total_mass();
    let y0 = m.values();
    let n = y0.len();
    let tol = 1e-13 * mass.abs().max(1.0);
    let mut next = match scheme {
        Scheme::Sdirk2 => {
            let g = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
            let mut rhs = y0.to_vec();
            rhs[0] = 0.0;
            rhs[n - 1] = mass;
            let y1 = op.implicit_solve(&rhs, y0, dt * g, tol)?;
            let mut k1 = vec![0.0; n];
            op.apply(&y1, &mut k1);
            for i in 1..n - 1 {
                rhs[i] = y0[i] + dt * (1.0 - g) * k1[i];
            }
            op.implicit_solve(&rhs, &y1, dt * g, tol)?
        }
        Scheme::SemiImplicit => semi_implicit(op, y0, mass, dt)?,
    };
    next[0] = 0.0;
    next[n - 1] = mass;
    let worst = next.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if worst < -1e-9 * mass.abs().max(1.0) {
        return Err(Error::NegativeDensity(worst));
    }
    CumulativeMass::new(Arc::clone(m.grid()), next, mass)
}

fn semi_implicit(op: &MassOperator, y0: &[f64], mass: f64, dt: f64) -> Result<Vec<f64>> {
    let n = y0.len();
    // Split F = D m + T(m) with D linear (diffusion) and T the transport.
    let diffusion = |m: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let (d1, d2) = op.derivatives(m, i);
            out[i] = op.a[i] * d2 - op.b[i] * d1;
        }
    };
    let transport = |m: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let (d1, _) = op.derivatives(m, i);
            out[i] = op.c[i] * m[i] * d1;
        }
    };
    let mut mat = BandMatrix::zeros(n, KL, KU);
    mat.set(0, 0, 1.0);
    mat.set(n - 1, n - 1, 1.0);
    for i in 1..n - 1 {
        for &(j, w1, w2) in &op.rows[i] {
            mat.add(i, j, -0.5 * dt * (op.a[i] * w2 - op.b[i] * w1));
        }
        mat.add(i, i, 1.0);
    }
    let lu = mat.factor()?;
    let mut dm = vec![0.0; n];
    let mut t0 = vec![0.0; n];
    diffusion(y0, &mut dm);
    transport(y0, &mut t0);
    let explicit: Vec<f64> = (0..n).map(|i| y0[i] + 0.5 * dt * dm[i]).collect();
    let mut pred: Vec<f64> = (0..n).map(|i| explicit[i] + dt * t0[i]).collect();
    pred[0] = 0.0;
    pred[n - 1] = mass;
    lu.solve(&mut pred);
    let mut t1 = vec![0.0; n];
    transport(&pred, &mut t1);
    let mut corr: Vec<f64> = (0..n).map(|i| explicit[i] + 0.5 * dt * (t0[i] + t1[i])).collect();
    corr[0] = 0.0;
    corr[n - 1] = mass;
    lu.solve(&mut corr);
    Ok(corr)
}

/// `m_rr − m_r/r + m m_r/(2πr)` at the nodes. Boundary entries hold the
/// boundary-condition residuals `−m(0)` and `M − m(r_max)`.
pub fn rhs_cumulative(m: &CumulativeMass) -> Vec<f64> {
    let op = MassOperator::new(Arc::clone(m.grid()));
    let v = m.values();
    let mut out = vec![0.0; v.len()];
    op.apply(v, &mut out);
    let n = v.len();
    out[0] = -v[0];
    out[n - 1] = m.total_mass() - v[n - 1];
    out
}

/// Radius where `m` first reaches `4π`, by monotone cubic interpolation.
pub fn extract_lambda(m: &CumulativeMass) -> Result<f64> {
    let level = 4.0 * PI;
    let v = m.values();
    let n = v.len();
    let Some(i) = (0..n - 1).find(|&i| v[i] < level && v[i + 1] >= level) else {
        return Err(Error::NoCore(v[n - 1]));
    };
    // Fritsch–Carlson slopes in the node index.
    let slope = |k: usize| -> f64 {
        let left = if k > 0 { v[k] - v[k - 1] } else { v[1] - v[0] };
        let right = if k + 1 < n { v[k + 1] - v[k] } else { left };
        if left * right <= 0.0 {
            0.0
        } else {
            2.0 * left * right / (left + right)
        }
    };
    let (y0, y1) = (v[i], v[i + 1]);
    let (d0, d1) = (slope(i), slope(i + 1));
    let p = |x: f64| {
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * y0 + (x3 - 2.0 * x2 + x) * d0 + (-2.0 * x3 + 3.0 * x2) * y1 + (x3 - x2) * d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(m.grid().radius_at(i as f64 + 0.5 * (lo + hi)))
}

/// `∫|x|² u dx = ∫₀^{r_max} 2r (M − m) dr`.
pub fn second_moment_of_mass(m: &CumulativeMass) -> f64 {
    let excess: Vec<f64> = m.values().iter().map(|&v| m.total_mass() - v).collect();
    2.0 * stencil::cumulative_moment(m.grid(), &excess, 1).last().copied().unwrap_or(0.0)
}

/// Density at the origin.
pub fn center_density(m: &CumulativeMass) -> f64 {
    m.density().values()[0]
}

/// Time series of the diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamTrajectory {
    pub times: Vec<f64>,
    pub lambda_est: Vec<f64>,
    pub alpha_est: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub u_center: Vec<f64>,
}

impl ParamTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push_sample(&mut self, t: f64, m: &CumulativeMass) {
        let u_c = center_density(m);
        let lambda = extract_lambda(m).unwrap_or(f64::NAN);
        self.times.push(t);
        self.lambda_est.push(lambda);
        self.alpha_est.push(u_c * lambda * lambda / 8.0);
        self.second_moment.push(second_moment_of_mass(m));
        self.u_center.push(u_c);
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,lambda_est,alpha_est,second_moment,u_center")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.lambda_est[i], self.alpha_est[i], self.second_moment[i], self.u_center[i]
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::BufRead>(reader: R) -> Result<Self> {
        let mut out = Self::default();
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('t') {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", k + 1)))?;
            if cols.len() < 2 {
                return Err(Error::Parse(format!("line {}: expected at least `t,lambda_est`", k + 1)));
            }
            let get = |j: usize| cols.get(j).copied().unwrap_or(f64::NAN);
            out.times.push(cols[0]);
            out.lambda_est.push(cols[1]);
            out.alpha_est.push(get(2));
            out.second_moment.push(get(3));
            out.u_center.push(get(4));
        }
        Ok(out)
    }
}

/// Least-squares constant `c` in `λ √log t ≈ c` over the trailing half of
/// the samples, and its relative drift `(max − min)/c` there.
pub fn fit_rate(traj: &ParamTrajectory) -> Result<(f64, f64)> {
    let n = traj.len();
    if n < 10 {
        return Err(Error::TooFewSamples { have: n, needed: 10 });
    }
    let (t0, t1) = (traj.times[0], traj.times[n - 1]);
    if !(t0 > 0.0 && t1 >= 10.0 * t0) {
        return Err(Error::InsufficientSpan(format!("samples span [{t0}, {t1}], less than a decade")));
    }
    let tail: Vec<f64> =
        (n / 2..n).map(|i| traj.lambda_est[i] * traj.times[i].ln().sqrt()).filter(|v| v.is_finite()).collect();
    if tail.is_empty() {
        return Err(Error::TooFewSamples { have: 0, needed: 10 });
    }
    let c = tail.iter().sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((c, (hi - lo) / c.abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `u₂(·, t₀)` with mass-calibrated `α`.
    Ansatz { lambda: f64, cutoff: Cutoff },
    /// `M/(πw²) e^{−r²/w²}`.
    Gaussian { width: f64 },
    /// Exact steady state `8πr²/(λ²+r²)`.
    Steady { lambda: f64 },
    /// Cumulative mass samples on the configured grid.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Uniform { n: usize, r_max: f64 },
    Geometric { n: usize, r_max: f64, ratio: f64 },
    Core { n: usize, r_max: f64, core: f64 },
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        match *self {
            GridSpec::Uniform { n, r_max } => RadialGrid::uniform(n, r_max),
            GridSpec::Geometric { n, r_max, ratio } => RadialGrid::geometric(n, r_max, ratio),
            GridSpec::Core { n, r_max, core } => RadialGrid::geometric_with_core(n, r_max, core),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub total_mass: f64,
    pub initial: InitialCondition,
    pub t0: f64,
    pub t_end: f64,
    pub grid: GridSpec,
    pub scheme: Scheme,
    pub dt0: f64,
    /// Upper bound `dt ≤ safety·t`.
    pub safety: f64,
    /// Largest ratio between consecutive steps.
    pub growth: f64,
    /// Diagnostic samples per decade of `t`.
    pub samples_per_decade: usize,
    /// Keep a snapshot every this many samples (0 for none).
    pub snapshot_every: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            total_mass: 8.0 * PI,
            initial: InitialCondition::Ansatz { lambda: 1.0 / 1e3f64.ln().sqrt(), cutoff: Cutoff::default() },
            t0: 1e3,
            t_end: 1e4,
            grid: GridSpec::Core { n: 4096, r_max: 2e3, core: 0.02 },
            scheme: Scheme::Sdirk2,
            dt0: 1e-3,
            safety: 2e-3,
            growth: 1.2,
            samples_per_decade: 40,
            snapshot_every: 0,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.total_mass > 0.0 && self.total_mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass {} must be positive", self.total_mass)));
        }
        if !(self.t0 >= std::f64::consts::E) {
            return Err(Error::InvalidParameter(format!("t0 = {} must be at least e", self.t0)));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidParameter(format!("t_end = {} must exceed t0 = {}", self.t_end, self.t0)));
        }
        if !(self.dt0 > 0.0) {
            return Err(Error::InvalidParameter(format!("dt0 = {} must be positive", self.dt0)));
        }
        if !(self.safety > 0.0 && self.growth >= 1.0) {
            return Err(Error::InvalidParameter("safety must be positive and growth at least 1".into()));
        }
        if self.samples_per_decade == 0 {
            return Err(Error::InvalidParameter("samples_per_decade must be positive".into()));
        }
        Ok(())
    }

    pub fn initial_mass(&self, grid: Arc<RadialGrid>) -> Result<CumulativeMass> {
        let mass = self.total_mass;
        let m = match &self.initial {
            InitialCondition::Ansatz { lambda, cutoff } => {
                let p = BubbleParams::calibrated(*lambda, self.t0, *cutoff)?;
                let u = RadialField::from_fn(Arc::clone(&grid), |r| ansatz::u2_radial(r, &p, *cutoff))?;
                let raw = radial::cumulative_mass(&u);
                let last = *raw.values().last().expect("non-empty grid");
                let scaled = raw.values().iter().map(|v| v * mass / last).collect();
                CumulativeMass::new(grid, scaled, mass)?
            }
            InitialCondition::Gaussian { width } => {
                let w2 = width * width;
                CumulativeMass::from_fn(grid, |r| mass * -(-r * r / w2).exp_m1(), mass)?
            }
            InitialCondition::Steady { lambda } => {
                let l2 = lambda * lambda;
                CumulativeMass::from_fn(grid, |r| mass * r * r / (l2 + r * r), mass)?
            }
            InitialCondition::Samples(v) => CumulativeMass::new(grid, v.clone(), mass)?,
        };
        let mut m = m;
        let n = m.values().len();
        m.values_mut()[n - 1] = mass;
        Ok(m)
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOutput {
    pub trajectory: ParamTrajectory,
    pub snapshots: Vec<(f64, CumulativeMass)>,
    pub final_state: CumulativeMass,
    pub steps: usize,
}

/// Integrates from `t0` to `t_end`. The step grows geometrically from `dt0`
/// and is capped at `safety·t`; diagnostics are recorded at log-spaced times
/// which the steps land on exactly.
pub fn evolve(config: &EvolveConfig) -> Result<EvolveOutput> {
    config.validate()?;
    let grid = Arc::new(config.grid.build()?);
    let op = MassOperator::new(Arc::clone(&grid));
    let mut m = config.initial_mass(grid)?;
    let mut traj = ParamTrajectory::default();
    let mut snapshots = Vec::new();
    let mut t = config.t0;
    traj.push_sample(t, &m);
    if config.snapshot_every > 0 {
        snapshots.push((t, m.clone()));
    }
    let ratio = 10f64.powf(1.0 / config.samples_per_decade as f64);
    let mut next_out = (t * ratio).min(config.t_end);
    let mut dt = config.dt0;
    let mut steps = 0usize;
    while t < config.t_end {
        let cap = config.safety * t;
        let mut h = dt.min(cap);
        let landing = t + h >= next_out * (1.0 - 1e-12);
        if landing {
            h = next_out - t;
        }
        m = step(&op, &m, h, config.scheme)?;
        steps += 1;
        t = if landing { next_out } else { t + h };
        dt = (dt * config.growth).min(cap);
        if landing {
            traj.push_sample(t, &m);
            if config.snapshot_every > 0 && traj.len() % config.snapshot_every == 0 {
                snapshots.push((t, m.clone()));
            }
            next_out = (t * ratio).min(config.t_end);
        }
    }
    Ok(EvolveOutput { trajectory: traj, snapshots, final_state: m, steps })
}
