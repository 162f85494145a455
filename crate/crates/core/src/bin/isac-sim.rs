//! Command-line driver for the detection and downlink studies.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use repeater_isac::harness::{self, OracleComparison, StudyResult, WORKERS_ENV};
use repeater_isac::scenario::ScenarioConfig;
use repeater_isac::{IsacError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "isac-sim",
    version,
    about = "Repeater-assisted bi-static ISAC Monte Carlo studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability of detection versus RCS variance, with and without the repeater.
    Pod(CommonArgs),
    /// CDF of per-user downlink spectral efficiency.
    Secdf(CommonArgs),
    /// Compare the closed-form detector against the brute-force oracle.
    OracleCheck(CommonArgs),
    /// Calibrate the detection threshold only.
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the per-trial detector dump here.
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML scenario file; defaults apply to missing keys.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Overrides the trial count of the chosen study.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// CSV output path; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, value_name = "N", env = WORKERS_ENV)]
    workers: Option<usize>,
}

impl CommonArgs {
    fn load_config(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        Ok(config)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        open_output(self.out.as_deref())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| IsacError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn positive(trials: Option<usize>) -> Result<Option<usize>> {
    match trials {
        Some(0) => Err(IsacError::Config("--trials must be positive".into())),
        t => Ok(t),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Pod(args) => {
            let mut config = args.load_config()?;
            if let Some(n) = positive(args.trials)? {
                config.mc_trials = n;
            }
            config.validate()?;
            let result = harness::with_workers(args.workers, || {
                harness::run_pod_vs_rcs(&config, &config.rcs_grid)
            })??;
            if let StudyResult::PodVsRcs { warnings, .. } = &result {
                for w in warnings {
                    eprintln!("warning: {w}");
                }
            }
            result.write_csv(args.output()?)
        }
        Command::Secdf(args) => {
            let mut config = args.load_config()?;
            if let Some(n) = positive(args.trials)? {
                config.mc_trials = n;
            }
            config.validate()?;
            let result = harness::with_workers(args.workers, || harness::run_se_cdf(&config))??;
            if let StudyResult::SeCdf { curves, drops } = &result {
                for c in curves.iter().filter(|c| c.degenerate_drops > 0) {
                    eprintln!(
                        "warning: {} with repeater {}: {} of {drops} drops degenerate",
                        harness::mode_name(c.mode),
                        if c.repeater { "on" } else { "off" },
                        c.degenerate_drops
                    );
                }
            }
            result.write_csv(args.output()?)
        }
        Command::OracleCheck(args) => {
            let config = args.load_config()?;
            let instances = positive(args.trials)?.unwrap_or(100);
            let rows = harness::with_workers(args.workers, || {
                harness::run_oracle_check(config.master_seed, instances)
            })??;
            harness::write_oracle_csv(&rows, args.output()?)?;
            let failed = rows.iter().filter(|r| !r.passed()).count();
            let worst = rows.iter().map(OracleComparison::error).fold(0.0, f64::max);
            eprintln!(
                "oracle check: {} of {instances} within tolerance, largest error {worst:.3e}",
                instances - failed
            );
            if failed > 0 {
                return Err(IsacError::Oracle(format!(
                    "{failed} of {instances} instances outside tolerance"
                )));
            }
            Ok(())
        }
        Command::Calibrate { common, dump } => {
            let mut config = common.load_config()?;
            if let Some(n) = positive(common.trials)? {
                config.calibration_trials = n;
            }
            config.validate()?;
            let (calibration, records) =
                harness::with_workers(common.workers, || harness::run_calibration(&config))??;
            if let Some(w) = &calibration.warning {
                eprintln!("warning: {w}");
            }
            harness::write_calibration_csv(&config, &calibration, common.output()?)?;
            if let Some(path) = dump {
                harness::write_detector_dump(&records, open_output(Some(&path))?)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
