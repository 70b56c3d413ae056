//! Argument parsing, config resolution, output writing and the run manifest.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qlab_core::gun::DetectionMode;

use crate::commands::{self, CheckKind, Report};
use crate::config::{Law, MediumKind, RunConfig, RunRecord};
use crate::error::CliError;

/// Environment variable naming the output directory (below `--out`, above the config).
pub const OUT_ENV: &str = "QLAB_OUT";

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Parser)]
#[command(name = "qlab", version, about = "Rays, actions, waves and pilot-wave particles on a grid")]
pub struct Cli {
    /// TOML run configuration; every key is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (recorded in the manifest; results do not depend on it).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Copenhagen,
    Bohm,
}

impl From<Mode> for DetectionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Copenhagen => DetectionMode::Copenhagen,
            Mode::Bohm => DetectionMode::Bohm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refraction angle from the wave or corpuscular law.
    Snell {
        /// Incidence angle in degrees.
        #[arg(long)]
        theta1: Option<f64>,
        #[arg(long)]
        n1: Option<f64>,
        #[arg(long)]
        n2: Option<f64>,
        #[arg(long, value_enum)]
        law: Option<Law>,
    },
    /// Trace one ray through a graded or two-media index field.
    RayTrace {
        /// Launch angle in degrees.
        #[arg(long)]
        angle: Option<f64>,
        #[arg(long, value_enum)]
        medium: Option<MediumKind>,
    },
    /// Fixed-energy action surface from trajectories, with its HJ residual.
    ActionSurface {
        #[arg(long)]
        energy: Option<f64>,
    },
    /// Propagate a Gaussian packet.
    Propagate {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Guide an ensemble along a 1D packet and compare it to |psi|^2.
    Bohm {
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Electron-gun experiment: 1 free beam, 2 single slit, 3 double slit.
    Experiment {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        number: u8,
        #[arg(long, value_enum, default_value = "copenhagen")]
        mode: Mode,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a built-in numerical check against the configured tolerances.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Screen statistics of flashes and Bohmian crossings from one simulation.
    CompareModes {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3), default_value = "3")]
        number: u8,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run the command recorded in a manifest with its recorded configuration.
    Replay { manifest: PathBuf },
}

/// Applies command-line overrides to the configuration.
fn apply_overrides(cfg: &mut RunConfig, cmd: &Command) {
    fn set<T: Copy>(slot: &mut T, v: Option<T>) {
        if let Some(v) = v {
            *slot = v;
        }
    }
    match *cmd {
        Command::Snell { theta1, n1, n2, law } => {
            set(&mut cfg.optics.theta1, theta1);
            set(&mut cfg.optics.n1, n1);
            set(&mut cfg.optics.n2, n2);
            set(&mut cfg.optics.law, law);
        }
        Command::RayTrace { angle, medium } => {
            set(&mut cfg.optics.angle, angle);
            set(&mut cfg.optics.medium, medium);
        }
        Command::ActionSurface { energy } => set(&mut cfg.mechanics.energy, energy),
        Command::Propagate { steps, dt } => {
            set(&mut cfg.propagator.steps, steps);
            set(&mut cfg.propagator.dt, dt);
        }
        Command::Bohm { count, seed } => {
            set(&mut cfg.ensemble.count, count);
            set(&mut cfg.seed, seed);
        }
        Command::Experiment { shots, seed, .. } | Command::CompareModes { shots, seed, .. } => {
            set(&mut cfg.apparatus.shots, shots);
            set(&mut cfg.seed, seed);
        }
        Command::Check { steps, .. } => set(&mut cfg.propagator.steps, steps),
        Command::Replay { .. } => {}
    }
}

fn execute(cfg: &RunConfig, cmd: &Command) -> Result<Report, CliError> {
    match *cmd {
        Command::Snell { .. } => commands::snell(cfg),
        Command::RayTrace { .. } => commands::ray_trace(cfg),
        Command::ActionSurface { .. } => commands::action_surface(cfg),
        Command::Propagate { .. } => commands::propagate_cmd(cfg),
        Command::Bohm { .. } => commands::bohm(cfg),
        Command::Experiment { number, mode, .. } => commands::experiment(cfg, number, mode.into()),
        Command::Check { kind, .. } => commands::check(cfg, kind),
        Command::CompareModes { number, .. } => commands::compare_modes(cfg, number),
        Command::Replay { .. } => Err(CliError::Usage("a manifest cannot replay another replay".into())),
    }
}

/// The argument tail with the global flags (and their values) removed.
fn command_words(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if ["--config", "--out", "--threads"].contains(&a.as_str()) {
            it.next();
        } else if !["--config=", "--out=", "--threads="].iter().any(|p| a.starts_with(p)) {
            out.push(a.clone());
        }
    }
    out
}

fn output_dir(cli: &Cli, env_out: Option<&str>, cfg: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| env_out.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
}

fn write_outputs(dir: &Path, report: &Report, manifest: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &report.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    std::fs::write(dir.join(MANIFEST), manifest)?;
    Ok(())
}

fn run_parsed(cli: &Cli, args: &[String], env_out: Option<&str>, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let (mut cfg, words, cmd_holder);
    let cmd = match &cli.command {
        Command::Replay { manifest } => {
            cfg = RunConfig::load(manifest)?;
            let run = cfg.run.take().ok_or_else(|| CliError::Config("manifest has no [run] table".into()))?;
            let mut argv = vec!["qlab".to_string()];
            argv.extend(run.command.iter().cloned());
            cmd_holder = Cli::try_parse_from(&argv).map_err(|e| CliError::Config(format!("recorded command: {e}")))?;
            if matches!(cmd_holder.command, Command::Replay { .. }) {
                return Err(CliError::Config("recorded command is itself a replay".into()));
            }
            words = run.command;
            &cmd_holder.command
        }
        other => {
            cfg = match &cli.config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            if cfg.run.take().is_some() {
                // A manifest passed as --config is just a config.
            }
            words = command_words(args);
            other
        }
    };
    apply_overrides(&mut cfg, cmd);
    let report = execute(&cfg, cmd)?;
    for line in &report.lines {
        writeln!(stdout, "{line}")?;
    }
    let dir = output_dir(cli, env_out, &cfg);
    cfg.run = Some(RunRecord { version: env!("CARGO_PKG_VERSION").to_string(), command: words, threads: cli.threads });
    write_outputs(&dir, &report, &cfg.to_toml())?;
    Ok(report.passed)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, env_out: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    if args.len() <= 1 {
        let mut cmd = <Cli as clap::CommandFactory>::command();
        let _ = write!(stderr, "{}", cmd.render_usage());
        let _ = writeln!(stderr);
        return 2;
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match run_parsed(&cli, &args, env_out, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(a: &[&str]) -> Vec<String> {
        command_words(&a.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    }

    #[test]
    fn global_flags_are_not_recorded() {
        assert_eq!(
            words(&["qlab", "--out", "d", "experiment", "3", "--threads=4", "--seed", "7", "--config", "c.toml"]),
            ["experiment", "3", "--seed", "7"]
        );
    }

    #[test]
    fn out_flag_beats_environment_and_config() {
        let cfg = RunConfig::default();
        let cli = Cli::try_parse_from(["qlab", "--out", "a", "snell"]).unwrap();
        assert_eq!(output_dir(&cli, Some("b"), &cfg), PathBuf::from("a"));
        let cli = Cli::try_parse_from(["qlab", "snell"]).unwrap();
        assert_eq!(output_dir(&cli, Some("b"), &cfg), PathBuf::from("b"));
        assert_eq!(output_dir(&cli, None, &cfg), PathBuf::from(&cfg.output.dir));
    }

    #[test]
    fn overrides_land_in_config() {
        let mut cfg = RunConfig::default();
        let cli = Cli::try_parse_from(["qlab", "experiment", "2", "--shots", "50", "--seed", "9"]).unwrap();
        apply_overrides(&mut cfg, &cli.command);
        assert_eq!((cfg.apparatus.shots, cfg.seed), (50, 9));
    }
}
