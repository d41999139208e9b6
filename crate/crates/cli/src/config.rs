//! Run configuration: defaults, `key = value` files and flag overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use osp_thermo::nlie::SolverConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Sweep,
    SpecificHeat,
    Hte,
    FiniteN,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Sweep => "sweep",
            Self::SpecificHeat => "specific-heat",
            Self::Hte => "hte",
            Self::FiniteN => "finite-n",
            Self::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Qsystem,
    YbeCommutation,
    Bae,
    NlieVsEd,
    NlieVsHte,
    Trotter,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Qsystem => "qsystem",
            Self::YbeCommutation => "ybe-commutation",
            Self::Bae => "bae",
            Self::NlieVsEd => "nlie-vs-ed",
            Self::NlieVsHte => "nlie-vs-hte",
            Self::Trotter => "trotter",
            Self::All => "all",
        }
    }

    /// Suites run by `all`, in order.
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Self::All => vec![
                Self::Qsystem,
                Self::YbeCommutation,
                Self::Bae,
                Self::NlieVsEd,
                Self::NlieVsHte,
                Self::Trotter,
            ],
            other => vec![other],
        }
    }
}

fn value_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, false).map_err(|_| CliError::usage(key, format!("unrecognised value {value:?}")))
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::usage(key, format!("cannot parse {value:?}: {e}")))
}

/// Everything one invocation needs. Defaults are those of [`RunConfig::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub s: usize,
    pub coupling: f64,
    pub temperature: Option<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub trotter: Option<usize>,
    pub sites: Option<usize>,
    pub solver: SolverConfig,
    pub order: usize,
    pub pade_m: usize,
    pub pade_n: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub suite: Suite,
}

/// Keys accepted in configuration files (flags use the same names).
pub const KEYS: &[&str] = &[
    "command", "s", "J", "T", "t-min", "t-max", "points", "N", "L", "radius", "nodes", "tol", "max-iter", "omega",
    "order", "pade-m", "pade-n", "out", "output", "suite",
];

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            s: 1,
            coupling: -1.0,
            temperature: None,
            t_min: 0.4,
            t_max: 5.0,
            points: 30,
            trotter: None,
            sites: None,
            solver: SolverConfig::default(),
            order: 12,
            pade_m: 6,
            pade_n: 6,
            format: Format::Text,
            output: None,
            suite: Suite::All,
        }
    }

    /// Sets one field from its textual form. Underscores in `key` are read
    /// as dashes.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.replace('_', "-");
        let k = key.as_str();
        match k {
            "command" => self.command = value_enum(k, value)?,
            "s" => self.s = number(k, value)?,
            "J" => self.coupling = number(k, value)?,
            "T" => self.temperature = Some(number(k, value)?),
            "t-min" => self.t_min = number(k, value)?,
            "t-max" => self.t_max = number(k, value)?,
            "points" => self.points = number(k, value)?,
            "N" => self.trotter = Some(number(k, value)?),
            "L" => self.sites = Some(number(k, value)?),
            "radius" => self.solver.radius = number(k, value)?,
            "nodes" => self.solver.nodes = number(k, value)?,
            "tol" => self.solver.tolerance = number(k, value)?,
            "max-iter" => self.solver.max_iterations = number(k, value)?,
            "omega" => self.solver.omega = number(k, value)?,
            "order" => self.order = number(k, value)?,
            "pade-m" => self.pade_m = number(k, value)?,
            "pade-n" => self.pade_n = number(k, value)?,
            "out" => self.format = value_enum(k, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "suite" => self.suite = value_enum(k, value)?,
            _ => return Err(CliError::usage(k, format!("unknown configuration key {k:?}"))),
        }
        Ok(())
    }

    /// Cross-field checks for the selected command.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.s == 0 {
            return Err(CliError::usage("s", "rank must be at least 1"));
        }
        if !self.coupling.is_finite() {
            return Err(CliError::usage("J", "coupling must be finite"));
        }
        self.solver
            .validate()
            .map_err(|e| CliError::usage("solver", e.to_string()))?;
        let need_t = matches!(self.command, Command::Solve | Command::FiniteN);
        match self.temperature {
            None if need_t => {
                return Err(CliError::usage(
                    "T",
                    format!("{} needs a temperature", self.command.name()),
                ))
            }
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                return Err(CliError::usage("T", format!("temperature must be positive, got {t}")))
            }
            _ => {}
        }
        if matches!(self.command, Command::Sweep | Command::SpecificHeat) {
            if !(self.t_min > 0.0 && self.t_min.is_finite() && self.t_max.is_finite() && self.t_min <= self.t_max) {
                return Err(CliError::usage(
                    "t-min",
                    format!("need 0 < t-min <= t-max, got [{}, {}]", self.t_min, self.t_max),
                ));
            }
            if self.points == 0 {
                return Err(CliError::usage("points", "sweep needs at least one point"));
            }
        }
        if self.command == Command::FiniteN {
            match self.trotter {
                None => return Err(CliError::usage("N", "finite-n needs a Trotter number")),
                Some(n) if n == 0 || n % 2 == 1 => {
                    return Err(CliError::usage(
                        "N",
                        format!("Trotter number must be even and positive, got {n}"),
                    ))
                }
                _ => {}
            }
        }
        if self.command == Command::Hte && (self.order == 0 || self.order > osp_thermo::hte::MAX_ORDER) {
            return Err(CliError::usage(
                "order",
                format!("order must lie in 1..={}", osp_thermo::hte::MAX_ORDER),
            ));
        }
        if matches!(self.command, Command::Sweep | Command::SpecificHeat | Command::Hte)
            && self.pade_m + self.pade_n > self.order
        {
            return Err(CliError::usage(
                "pade-m",
                format!(
                    "[{}/{}] needs order >= {}",
                    self.pade_m,
                    self.pade_n,
                    self.pade_m + self.pade_n
                ),
            ));
        }
        Ok(())
    }
}

/// Splits configuration text into `(key, value)` pairs. Blank lines and
/// everything after `#` are ignored.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::usage(
                "config",
                format!("line {}: expected `key = value`, got {line:?}", lineno + 1),
            ));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::usage(
                "config",
                format!("line {}: empty key or value", lineno + 1),
            ));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Parses a whole configuration file into `base`.
pub fn apply_config_text(base: &mut RunConfig, text: &str) -> Result<(), CliError> {
    for (k, v) in parse_config_text(text)? {
        base.apply(&k, &v)?;
    }
    Ok(())
}
