//! Front end for the `osp-thermo` library: one subcommand per computation,
//! configuration from flags and `key = value` files, and machine-readable
//! output.
//!
//! Exit status: `0` success, `2` usage or I/O error, `3` non-convergence or
//! numerical failure, `4` verification failure. Every failure also writes a
//! one-line JSON error record to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod verify;

use config::{Command, RunConfig};
use error::{CliError, ErrorKind};

#[derive(Debug, Parser)]
#[command(
    name = "osp-thermo",
    version,
    about = "Thermodynamics of the osp(1|2s) integrable spin chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CommandArg {
    /// Free energy, entropy and specific heat at one temperature.
    #[command(allow_negative_numbers = true)]
    Solve,
    /// Thermodynamic table over a log-spaced temperature grid.
    #[command(allow_negative_numbers = true)]
    Sweep,
    /// Specific heat from the NLIE, the series and its Padé approximant.
    #[command(allow_negative_numbers = true)]
    SpecificHeat,
    /// Exact high-temperature series (s = 1).
    #[command(allow_negative_numbers = true)]
    Hte,
    /// Finite Trotter number solution and its dense-QTM cross-check.
    #[command(allow_negative_numbers = true)]
    FiniteN,
    /// Run oracle suites.
    #[command(allow_negative_numbers = true)]
    Verify,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Solve => Command::Solve,
            CommandArg::Sweep => Command::Sweep,
            CommandArg::SpecificHeat => Command::SpecificHeat,
            CommandArg::Hte => Command::Hte,
            CommandArg::FiniteN => Command::FiniteN,
            CommandArg::Verify => Command::Verify,
        }
    }
}

/// Flags; each overrides the configuration file key of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Rank s of the algebra.
    #[arg(long, global = true)]
    pub s: Option<String>,
    /// Coupling J.
    #[arg(long = "J", global = true, allow_hyphen_values = true)]
    pub coupling: Option<String>,
    /// Temperature T.
    #[arg(long = "T", global = true)]
    pub temperature: Option<String>,
    #[arg(long = "t-min", global = true)]
    pub t_min: Option<String>,
    #[arg(long = "t-max", global = true)]
    pub t_max: Option<String>,
    /// Number of temperatures in a sweep.
    #[arg(long, global = true)]
    pub points: Option<String>,
    /// Trotter number N.
    #[arg(long = "N", global = true)]
    pub trotter: Option<String>,
    /// Chain length L for an exact-diagonalisation comparison.
    #[arg(long = "L", global = true)]
    pub sites: Option<String>,
    #[arg(long, global = true)]
    pub radius: Option<String>,
    #[arg(long, global = true)]
    pub nodes: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<String>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<String>,
    #[arg(long, global = true)]
    pub omega: Option<String>,
    /// Series order.
    #[arg(long, global = true)]
    pub order: Option<String>,
    #[arg(long = "pade-m", global = true)]
    pub pade_m: Option<String>,
    #[arg(long = "pade-n", global = true)]
    pub pade_n: Option<String>,
    /// Output format: json, csv or text.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<String>,
    /// Verification suite (qsystem, ybe-commutation, bae, nlie-vs-ed,
    /// nlie-vs-hte, trotter, all).
    #[arg(long, global = true)]
    pub suite: Option<String>,
}

impl Opts {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let fields: [(&'static str, &Option<String>); 19] = [
            ("s", &self.s),
            ("J", &self.coupling),
            ("T", &self.temperature),
            ("t-min", &self.t_min),
            ("t-max", &self.t_max),
            ("points", &self.points),
            ("N", &self.trotter),
            ("L", &self.sites),
            ("radius", &self.radius),
            ("nodes", &self.nodes),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("omega", &self.omega),
            ("order", &self.order),
            ("pade-m", &self.pade_m),
            ("pade-n", &self.pade_n),
            ("out", &self.out),
            ("output", &self.output),
            ("suite", &self.suite),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

/// Builds the run configuration: defaults, then the file, then flags. The
/// subcommand always wins over a `command` key in the file.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let command: Command = cli.command.into();
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &cli.opts.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io("config", e))?;
        config::apply_config_text(&mut cfg, &text)?;
        cfg.command = command;
    }
    for (k, v) in cli.opts.overrides() {
        cfg.apply(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(stderr: &mut dyn Write, err: &CliError) -> i32 {
    let _ = writeln!(stderr, "{}", err.to_json());
    err.exit_code()
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(
                e.kind(),
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = write!(stdout, "{}", e.render());
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand {
                    2
                } else {
                    0
                };
            }
            let _ = write!(stderr, "{}", e.render());
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return report(stderr, &CliError::usage("arguments", first.to_string()));
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => return report(stderr, &e),
    };
    let outcome = match run::execute(&cfg) {
        Ok(o) => o,
        Err(e) => return report(stderr, &e),
    };
    let text = outcome.document.render(cfg.format);
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        return report(stderr, &CliError::io("output", e));
    }
    if outcome.failed {
        let failing: Vec<String> = match &outcome.document {
            output::Document::Verify(checks) => checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{}/{}", c.suite, c.name))
                .collect(),
            _ => Vec::new(),
        };
        let err = CliError::new(ErrorKind::Verification, "verify", &failing.join("; "), "check failed");
        return report(stderr, &err);
    }
    0
}
