//! Plain-text `key = value` configuration with per-subcommand schemas.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}` for `{command}`")]
    UnknownKey { line: usize, key: String, command: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Type { line: usize, key: String, expected: &'static str, value: String },
    #[error("line {line}: `{key}` = {value} outside {range}")]
    Range { line: usize, key: String, value: String, range: String },
    #[error("line {line}: `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Ansatz,
    Moments,
    Evolve,
    FitRate,
    Spectrum,
    InnerSolve,
    ReducedOde,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ansatz => "ansatz",
            Command::Moments => "moments",
            Command::Evolve => "evolve",
            Command::FitRate => "fit-rate",
            Command::Spectrum => "spectrum",
            Command::InnerSolve => "inner-solve",
            Command::ReducedOde => "reduced-ode",
            Command::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// Real in `(lo, hi)`, endpoints included when flagged.
    Float {
        lo: f64,
        hi: f64,
        closed: bool,
    },
    Int {
        lo: i64,
        hi: i64,
    },
    Bool,
    Choice(&'static [&'static str]),
    Text,
}

#[derive(Debug, Clone, Copy)]
struct Key {
    name: &'static str,
    kind: Kind,
    default: &'static str,
}

const fn open(name: &'static str, lo: f64, hi: f64, default: &'static str) -> Key {
    Key { name, kind: Kind::Float { lo, hi, closed: false }, default }
}

const fn closed(name: &'static str, lo: f64, hi: f64, default: &'static str) -> Key {
    Key { name, kind: Kind::Float { lo, hi, closed: true }, default }
}

const fn int(name: &'static str, lo: i64, hi: i64, default: &'static str) -> Key {
    Key { name, kind: Kind::Int { lo, hi }, default }
}

const INF: f64 = f64::INFINITY;
const E: f64 = std::f64::consts::E;
const CUTOFFS: &[&str] = &["quintic_smoothstep", "exp_bump"];
const CUTOFF: Key = Key { name: "cutoff", kind: Kind::Choice(CUTOFFS), default: "quintic_smoothstep" };

const ANSATZ: &[Key] = &[
    CUTOFF,
    open("lambda", 0.0, 1.0, "0.1"),
    closed("t", E, INF, "1000"),
    open("zeta_max", 0.0, 50.0, "10"),
    int("n_zeta", 16, 1_000_000, "1001"),
    int("n_r", 16, 1_000_000, "2001"),
];

const MOMENTS: &[Key] = &[
    int("n", 64, 1_000_000, "1024"),
    open("r_max", 10.0, INF, "1000"),
    open("lambda", 0.0, 1.0, "0.1"),
    closed("t", E, INF, "10000"),
];

const EVOLVE: &[Key] = &[
    open("mass", 0.0, INF, "25.132741228718345"),
    Key { name: "initial", kind: Kind::Choice(&["ansatz", "gaussian", "steady"]), default: "ansatz" },
    // Replaced by 1/√(log t0) unless set.
    open("lambda", 0.0, 10.0, "0.38"),
    open("width", 0.0, INF, "1"),
    CUTOFF,
    closed("t0", E, INF, "1000"),
    closed("t_end", E, INF, "10000"),
    int("n", 16, 10_000_000, "4096"),
    open("r_max", 0.0, INF, "2000"),
    open("core", 0.0, INF, "0.02"),
    Key { name: "scheme", kind: Kind::Choice(&["sdirk2", "semi_implicit"]), default: "sdirk2" },
    open("dt0", 0.0, INF, "0.001"),
    open("safety", 0.0, INF, "0.002"),
    closed("growth", 1.0, INF, "1.2"),
    int("samples_per_decade", 1, 100_000, "40"),
    int("snapshot_every", 0, 1_000_000, "0"),
];

const FIT_RATE: &[Key] = &[Key { name: "trajectory", kind: Kind::Text, default: "trajectory.csv" }];

const SPECTRUM: &[Key] = &[
    Key {
        name: "test",
        kind: Kind::Choice(&["single_e20", "single_e31", "mixed_l4", "sparse_l5", "dense_l6", "random"]),
        default: "single_e20",
    },
    int("random_degree", 2, 12, "4"),
    int("l_max", 4, 40, "8"),
    int("n_theta", 8, 400, "40"),
    int("n_phi", 16, 800, "82"),
];

const INNER_SOLVE: &[Key] = &[
    open("decay", 4.0, 6.0, "5"),
    open("t", 0.0, INF, "4"),
    open("lambda", 0.0, INF, "1"),
    CUTOFF,
    int("n", 64, 1_000_000, "10001"),
    open("r_max", 10.0, INF, "1e8"),
    open("fit_lo", 1.0, INF, "1e4"),
    open("fit_hi", 1.0, INF, "1e7"),
];

const REDUCED_ODE: &[Key] = &[
    open("t0", E, INF, "1000"),
    open("t_end", E, INF, "1e9"),
    // Replaced by 1/log t0 unless set.
    open("eta0", 0.0, INF, "0.14"),
    Key { name: "slaving", kind: Kind::Bool, default: "true" },
    Key { name: "forcing", kind: Kind::Choice(&["none", "ceiling"]), default: "none" },
    closed("forcing_scale", 0.0, INF, "1"),
    open("sigma", 0.0, 1.0, "0.5"),
    Key { name: "xi1", kind: Kind::Float { lo: -INF, hi: INF, closed: false }, default: "0" },
    Key { name: "xi2", kind: Kind::Float { lo: -INF, hi: INF, closed: false }, default: "0" },
    int("samples_per_decade", 1, 100_000, "20"),
];

const VERIFY_ALL: &[Key] = &[Key { name: "full", kind: Kind::Bool, default: "false" }];

fn schema(cmd: Command) -> &'static [Key] {
    match cmd {
        Command::Ansatz => ANSATZ,
        Command::Moments => MOMENTS,
        Command::Evolve => EVOLVE,
        Command::FitRate => FIT_RATE,
        Command::Spectrum => SPECTRUM,
        Command::InnerSolve => INNER_SOLVE,
        Command::ReducedOde => REDUCED_ODE,
        Command::VerifyAll => VERIFY_ALL,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v:.16e}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
        }
    }
}

fn parse_value(key: &Key, raw: &str, line: usize) -> Result<Value, ConfigError> {
    let type_err = |expected| ConfigError::Type { line, key: key.name.into(), expected, value: raw.into() };
    let range_err = |range: String| ConfigError::Range { line, key: key.name.into(), value: raw.into(), range };
    match key.kind {
        Kind::Float { lo, hi, closed } => {
            let v: f64 = raw.parse().map_err(|_| type_err("a real number"))?;
            let inside = if closed { v >= lo && v <= hi } else { v > lo && v < hi };
            if !v.is_finite() || !inside {
                let (a, b) = if closed { ('[', ']') } else { ('(', ')') };
                return Err(range_err(format!("{a}{lo}, {hi}{b}")));
            }
            Ok(Value::Float(v))
        }
        Kind::Int { lo, hi } => {
            let v: i64 = raw.parse().map_err(|_| type_err("an integer"))?;
            if v < lo || v > hi {
                return Err(range_err(format!("[{lo}, {hi}]")));
            }
            Ok(Value::Int(v))
        }
        Kind::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(type_err("`true` or `false`")),
        },
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.into()))
            } else {
                Err(range_err(format!("{{{}}}", options.join(", "))))
            }
        }
        Kind::Text => Ok(Value::Text(raw.into())),
    }
}

/// A typed configuration with every schema key present.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<&'static str, Value>,
    /// Keys the file set explicitly.
    explicit: Vec<&'static str>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let values = schema(command)
            .iter()
            .map(|k| (k.name, parse_value(k, k.default, 0).expect("defaults are valid")))
            .collect();
        Self { command, values, explicit: Vec::new() }
    }

    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or_else(|| panic!("`{key}` is not a `{}` key", self.command))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            other => panic!("`{key}` is not numeric: {other}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        match self.get(key) {
            Value::Int(v) => usize::try_from(*v).expect("schema keeps integers non-negative"),
            other => panic!("`{key}` is not an integer: {other}"),
        }
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(v) => *v,
            other => panic!("`{key}` is not a flag: {other}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(v) => v,
            other => panic!("`{key}` is not text: {other}"),
        }
    }

    /// Overrides a text key, e.g. from a positional argument.
    pub fn set_text(&mut self, key: &'static str, value: &str) {
        assert!(matches!(self.values.get(key), Some(Value::Text(_))), "`{key}` is not text");
        self.values.insert(key, Value::Text(value.into()));
        if !self.explicit.contains(&key) {
            self.explicit.push(key);
        }
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(&key)
    }

    /// `# key = value` lines, defaults marked.
    pub fn header(&self) -> String {
        let mut out = format!("# ks-blowup {}\n", self.command);
        for (k, v) in &self.values {
            let mark = if self.is_explicit(k) { "" } else { "  (default)" };
            out.push_str(&format!("# {k} = {v}{mark}\n"));
        }
        out
    }
}

/// Parses `text` against the schema of `command`; the first error wins.
pub fn parse_config(command: Command, text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::defaults(command);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: content.into() });
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(key) = schema(command).iter().find(|s| s.name == k) else {
            return Err(ConfigError::UnknownKey { line, key: k.into(), command: command.name().into() });
        };
        if cfg.explicit.contains(&key.name) {
            return Err(ConfigError::Duplicate { line, key: k.into() });
        }
        cfg.values.insert(key.name, parse_value(key, v, line)?);
        cfg.explicit.push(key.name);
    }
    derive_defaults(&mut cfg);
    cross_checks(&cfg)?;
    Ok(cfg)
}

fn derive_defaults(cfg: &mut RunConfig) {
    let log_t0 = match cfg.command {
        Command::Evolve | Command::ReducedOde => cfg.f64("t0").ln(),
        _ => return,
    };
    let (key, v) = match cfg.command {
        Command::Evolve => ("lambda", 1.0 / log_t0.sqrt()),
        _ => ("eta0", 1.0 / log_t0),
    };
    if !cfg.is_explicit(key) {
        cfg.values.insert(key, Value::Float(v));
    }
}

fn cross_checks(cfg: &RunConfig) -> Result<(), ConfigError> {
    let ordered = |a: &str, b: &str| -> Result<(), ConfigError> {
        if cfg.f64(b) <= cfg.f64(a) {
            return Err(ConfigError::Invalid(format!("{b} = {} must exceed {a} = {}", cfg.f64(b), cfg.f64(a))));
        }
        Ok(())
    };
    match cfg.command {
        Command::Evolve | Command::ReducedOde => ordered("t0", "t_end"),
        Command::InnerSolve => ordered("fit_lo", "fit_hi"),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_default_parses() {
        for c in [
            Command::Ansatz,
            Command::Moments,
            Command::Evolve,
            Command::FitRate,
            Command::Spectrum,
            Command::InnerSolve,
            Command::ReducedOde,
            Command::VerifyAll,
        ] {
            let cfg = parse_config(c, "").unwrap();
            assert!(cfg.header().starts_with(&format!("# ks-blowup {c}\n")));
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = parse_config(Command::Evolve, "# run\n\nmass = 25.132741228718345  # 8π\n").unwrap();
        assert_eq!(cfg.f64("mass"), 25.132741228718345);
        assert!(cfg.is_explicit("mass") && !cfg.is_explicit("t0"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config(Command::ReducedOde, "t0 = 1000\neta0 = -1\n").unwrap_err();
        assert!(matches!(e, ConfigError::Range { line: 2, .. }), "{e}");
        let e = parse_config(Command::Moments, "\nn = 1.5\n").unwrap_err();
        assert!(matches!(e, ConfigError::Type { line: 2, .. }), "{e}");
        let e = parse_config(Command::Moments, "n = 100\nn = 200\n").unwrap_err();
        assert!(matches!(e, ConfigError::Duplicate { line: 2, .. }), "{e}");
        let e = parse_config(Command::Moments, "n 100\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 1, .. }), "{e}");
        let e = parse_config(Command::VerifyAll, "full = yes\n").unwrap_err();
        assert!(matches!(e, ConfigError::Type { line: 1, .. }), "{e}");
    }

    #[test]
    fn derived_defaults_follow_t0() {
        let cfg = parse_config(Command::Evolve, "t0 = 10000\nt_end = 20000\n").unwrap();
        assert_eq!(cfg.f64("lambda"), 1.0 / 1e4f64.ln().sqrt());
        let cfg = parse_config(Command::Evolve, "lambda = 0.2\n").unwrap();
        assert_eq!(cfg.f64("lambda"), 0.2);
        let cfg = parse_config(Command::ReducedOde, "").unwrap();
        assert_eq!(cfg.f64("eta0"), 1.0 / 1e3f64.ln());
    }
}
