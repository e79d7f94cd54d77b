//! Command-line front end: reproduces the discrimination experiments as
//! deterministic CSV artifacts.
//!
//! Exit codes: 0 success, 2 configuration error, 3 assertion or numerical
//! failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use noisedisc::experiments::{
    self, BoundsCompareConfig, OracleVerifyConfig, ProbeSpec, ScatterRandomConfig,
    SweepTimeConfig,
};
use noisedisc::Error;

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "NOISEDISC_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "noisedisc",
    about = "Local-versus-common classical noise discrimination on two-mode Gaussian probes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal strip half-width and error probability over a time grid,
    /// for all four quadrature pairs.
    SweepTime(CommonArgs),
    /// Random fixed-purity states against the probe family curves.
    ScatterRandom(CommonArgs),
    /// Strip error probability against the fidelity and Chernoff bounds.
    BoundsCompare(CommonArgs),
    /// Cross-check the Gaussian formulas against the Fock and trajectory
    /// oracles on a small instance.
    OracleVerify(CommonArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Plain key=value config file; explicit flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Probe family: sts | sv | ssv.
    #[arg(long)]
    probe: Option<String>,
    /// Mean photons per mode (sts).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Squeezing fraction in [0, 1] (sts).
    #[arg(long)]
    gamma: Option<f64>,
    /// Thermal photon number (sv/ssv).
    #[arg(long)]
    nbar: Option<f64>,
    /// Squeeze parameter (sv/ssv).
    #[arg(long)]
    r: Option<f64>,
    /// Purity target for random states.
    #[arg(long)]
    mu: Option<f64>,
    /// Coupling constant.
    #[arg(long)]
    lambda: Option<f64>,
    /// Single interaction time (scatter-random, oracle-verify).
    #[arg(long)]
    time: Option<f64>,
    #[arg(long)]
    tmin: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    tsteps: Option<usize>,
    /// Number of random states (scatter-random).
    #[arg(long)]
    nstates: Option<usize>,
    /// RNG seed for seeded commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Fock cutoff per mode (oracle-verify).
    #[arg(long)]
    cutoff: Option<usize>,
    /// Trajectory count (oracle-verify).
    #[arg(long)]
    ntraj: Option<usize>,
    /// Output path; defaults to $NOISEDISC_OUT_DIR/<command>.csv when the
    /// variable is set, stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Key=value file contents; `#` starts a comment.
fn read_config_file(path: &Path) -> Result<HashMap<String, String>, Error> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in body.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "{}:{}: expected key=value, got {raw:?}",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "probe", "epsilon", "gamma", "nbar", "r", "mu", "lambda", "time", "tmin", "tmax",
    "tsteps", "nstates", "seed", "cutoff", "ntraj", "out",
];

struct Settings {
    args: CommonArgs,
    file: HashMap<String, String>,
}

impl Settings {
    fn load(args: &CommonArgs) -> Result<Self, Error> {
        let file = match &args.config {
            Some(path) => {
                let map = read_config_file(path)?;
                for key in map.keys() {
                    if !KNOWN_KEYS.contains(&key.as_str()) {
                        return Err(Error::Config(format!("unknown config key {key:?}")));
                    }
                }
                map
            }
            None => HashMap::new(),
        };
        Ok(Self {
            args: args.clone(),
            file,
        })
    }

    fn parse_file<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("config key {key} has invalid value {raw:?}"))
            }),
        }
    }

    fn get<T: FromStr + Copy>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, Error> {
        if let Some(v) = flag {
            return Ok(v);
        }
        Ok(self.parse_file::<T>(key)?.unwrap_or(default))
    }

    fn get_opt<T: FromStr + Clone>(&self, flag: &Option<T>, key: &str) -> Result<Option<T>, Error> {
        if flag.is_some() {
            return Ok(flag.clone());
        }
        self.parse_file::<T>(key)
    }

    fn probe(&self, default: ProbeSpec) -> Result<ProbeSpec, Error> {
        let family = self.get_opt(&self.args.probe, "probe")?;
        let Some(family) = family else {
            return Ok(default);
        };
        match family.as_str() {
            "sts" => Ok(ProbeSpec::Sts {
                mean_photons: self.get(self.args.epsilon, "epsilon", 1.0)?,
                squeezing_fraction: self.get(self.args.gamma, "gamma", 0.7)?,
            }),
            "sv" => Ok(ProbeSpec::Sv {
                thermal_photons: self.get(self.args.nbar, "nbar", 1.0)?,
                squeeze: self.get(self.args.r, "r", 0.7)?,
            }),
            "ssv" => Ok(ProbeSpec::Ssv {
                thermal_photons: self.get(self.args.nbar, "nbar", 1.0)?,
                squeeze: self.get(self.args.r, "r", 0.7)?,
            }),
            other => Err(Error::Config(format!(
                "unknown probe family {other:?} (expected sts, sv or ssv)"
            ))),
        }
    }

    fn out_path(&self, command: &str) -> Result<Option<PathBuf>, Error> {
        if let Some(path) = self.get_opt(&self.args.out, "out")? {
            return Ok(Some(path));
        }
        match std::env::var_os(OUT_DIR_VAR) {
            Some(dir) => Ok(Some(PathBuf::from(dir).join(format!("{command}.csv")))),
            None => Ok(None),
        }
    }
}

fn emit(output: &str, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, output)?;
        }
        None => print!("{output}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::SweepTime(args) => {
            let s = Settings::load(args)?;
            let cfg = SweepTimeConfig {
                probe: s.probe(ProbeSpec::Sts {
                    mean_photons: 1.0,
                    squeezing_fraction: 0.7,
                })?,
                coupling: s.get(args.lambda, "lambda", 1.0)?,
                tmin: s.get(args.tmin, "tmin", 0.1)?,
                tmax: s.get(args.tmax, "tmax", 5.0)?,
                tsteps: s.get(args.tsteps, "tsteps", 50)?,
            };
            let csv = experiments::sweep_time(&cfg)?;
            emit(&csv, s.out_path("sweep-time")?.as_deref())
        }
        Command::ScatterRandom(args) => {
            let s = Settings::load(args)?;
            let defaults = ScatterRandomConfig::default();
            let cfg = ScatterRandomConfig {
                purity: s.get(args.mu, "mu", defaults.purity)?,
                coupling: s.get(args.lambda, "lambda", defaults.coupling)?,
                time: s.get(args.time, "time", defaults.time)?,
                n_states: s.get(args.nstates, "nstates", defaults.n_states)?,
                seed: s.get(args.seed, "seed", defaults.seed)?,
                ..defaults
            };
            let csv = experiments::scatter_random(&cfg)?;
            emit(&csv, s.out_path("scatter-random")?.as_deref())
        }
        Command::BoundsCompare(args) => {
            let s = Settings::load(args)?;
            let cfg = BoundsCompareConfig {
                probe: s.probe(ProbeSpec::Sts {
                    mean_photons: 1.956,
                    squeezing_fraction: 0.6593,
                })?,
                coupling: s.get(args.lambda, "lambda", 1.0)?,
                tmin: s.get(args.tmin, "tmin", 0.05)?,
                tmax: s.get(args.tmax, "tmax", 3.0)?,
                tsteps: s.get(args.tsteps, "tsteps", 40)?,
            };
            let csv = experiments::bounds_compare(&cfg)?;
            emit(&csv, s.out_path("bounds-compare")?.as_deref())
        }
        Command::OracleVerify(args) => {
            let s = Settings::load(args)?;
            let defaults = OracleVerifyConfig::default();
            let cfg = OracleVerifyConfig {
                probe: s.probe(defaults.probe)?,
                coupling: s.get(args.lambda, "lambda", defaults.coupling)?,
                time: s.get(args.time, "time", defaults.time)?,
                cutoff: s.get(args.cutoff, "cutoff", defaults.cutoff)?,
                n_traj: s.get(args.ntraj, "ntraj", defaults.n_traj)?,
                seed: s.get(args.seed, "seed", defaults.seed)?,
            };
            let report = experiments::oracle_verify(&cfg)?;
            let rendered = report.render();
            emit(&rendered, s.out_path("oracle-verify")?.as_deref())?;
            if !report.all_passed() {
                return Err(Error::AssertionFailed(
                    "one or more oracle checks failed".into(),
                ));
            }
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
