//! Library side of the `psiaxiom` command: configuration, input parsing,
//! command execution and report emission.

mod commands;
pub mod ingest;
pub mod report;
pub mod spec;

use std::path::PathBuf;
use std::time::Instant;

use psiaxiom::axiomlab::{Axiom, ObservationPool, SamplerConfig};
use psiaxiom::{Interval, Observation, WeightedSample};

pub use ingest::{ingest_sample, parse_block, DataFormat, IngestError};
pub use report::{Format, Report, Timing, ToleranceSnapshot};
pub use spec::{parse_psi_spec, parse_tolerances, SpecError, ToleranceOverrides};

/// Exit status for a run that completed and found every checked condition
/// satisfied.
pub const EXIT_OK: i32 = 0;
/// Operational failure: bad input, no bracket, solver limits.
pub const EXIT_ERROR: i32 = 1;
/// The run completed and falsified something: an axiom failed or synthesis
/// produced an infeasibility certificate.
pub const EXIT_FALSIFIED: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnosis {
    Ratio {
        x: WeightedSample,
        y: WeightedSample,
        grid: usize,
    },
    ZLimits {
        x: WeightedSample,
        y: Observation,
    },
    Semigroup {
        t: f64,
        core: Option<(WeightedSample, WeightedSample)>,
        n_max: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Estimate,
    Audit {
        axioms: Vec<Axiom>,
        /// Level for the subsemigroup closure probe.
        t: Option<f64>,
        /// Extra point for a single asymptotic-idempotency run on the data.
        y: Option<Observation>,
        /// Largest exponent of the `1, 2, ..., 2^k` schedule.
        schedule_exp: u32,
        generators: Option<(String, String)>,
    },
    Kolmogorov,
    Diagnose(Diagnosis),
    Synthesize {
        alphabet: Vec<Observation>,
        max_size: usize,
        grid: usize,
        table_path: Option<PathBuf>,
    },
    CatalogList,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Audit { .. } => "audit",
            Command::Kolmogorov => "kolmogorov",
            Command::Diagnose(Diagnosis::Ratio { .. }) => "diagnose ratio",
            Command::Diagnose(Diagnosis::ZLimits { .. }) => "diagnose zlimits",
            Command::Diagnose(Diagnosis::Semigroup { .. }) => "diagnose semigroup",
            Command::Synthesize { .. } => "synthesize",
            Command::CatalogList => "catalog list",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerOptions {
    pub seed: u64,
    pub trials: usize,
    pub max_block: usize,
    /// Finite observation range; without it the pool is the data file's
    /// distinct observations.
    pub range: Option<(f64, f64)>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            max_block: 8,
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub psi_spec: Option<String>,
    /// Builtin estimator or `qa:<generator>`, for commands that take a
    /// black-box mean.
    pub mean_spec: Option<String>,
    pub data_path: Option<PathBuf>,
    pub theta_interval: Option<Interval>,
    pub tolerances: ToleranceOverrides,
    pub sampler: SamplerOptions,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            psi_spec: None,
            mean_spec: None,
            data_path: None,
            theta_interval: None,
            tolerances: ToleranceOverrides::default(),
            sampler: SamplerOptions::default(),
            output_path: None,
            format: Format::Json,
        }
    }

    /// Checks that the fields the command needs are present and that no
    /// field it would ignore was given.
    pub fn validate(&self) -> anyhow::Result<()> {
        use anyhow::bail;
        let name = self.command.name();
        let has_pool = self.sampler.range.is_some() || self.data_path.is_some();
        match &self.command {
            Command::Estimate => {
                if self.psi_spec.is_none() || self.data_path.is_none() {
                    bail!("{name} needs --psi and --data");
                }
            }
            Command::Audit { generators, .. } => {
                if self.psi_spec.is_some() && self.mean_spec.is_some() {
                    bail!("{name} takes --psi or --mean, not both");
                }
                if self.psi_spec.is_none() && self.mean_spec.is_none() && generators.is_none() {
                    bail!("{name} needs --psi, --mean or --generators");
                }
                if !has_pool {
                    bail!("{name} needs --data or --range to sample from");
                }
            }
            Command::Kolmogorov => {
                if self.mean_spec.is_none() || self.sampler.range.is_none() {
                    bail!("{name} needs --mean and --range");
                }
            }
            Command::Diagnose(Diagnosis::Ratio { .. } | Diagnosis::ZLimits { .. }) => {
                if self.psi_spec.is_none() {
                    bail!("{name} needs --psi");
                }
            }
            Command::Diagnose(Diagnosis::Semigroup { .. }) => {
                if self.psi_spec.is_some() == self.mean_spec.is_some() {
                    bail!("{name} needs exactly one of --psi or --mean");
                }
                if !has_pool {
                    bail!("{name} needs --data or --range to sample from");
                }
            }
            Command::Synthesize {
                alphabet,
                max_size,
                grid,
                ..
            } => {
                if self.mean_spec.is_none() || alphabet.is_empty() {
                    bail!("{name} needs --mean and --alphabet");
                }
                if *max_size == 0 || *grid == 0 {
                    bail!("{name} needs positive --max-size and --grid");
                }
            }
            Command::CatalogList => {}
        }
        if self.theta_interval.is_some()
            && !matches!(self.command, Command::Estimate | Command::Synthesize { .. })
        {
            bail!("--theta applies to estimate and synthesize only");
        }
        Ok(())
    }

    pub fn tolerance_snapshot(&self) -> ToleranceSnapshot {
        ToleranceSnapshot {
            estimation: self.tolerances.estimation,
            axiom: self.tolerances.axiom,
            limit: self.tolerances.limit,
            boundary: self.tolerances.boundary,
        }
    }

    pub(crate) fn data(&self) -> anyhow::Result<Option<WeightedSample>> {
        match &self.data_path {
            None => Ok(None),
            Some(p) => Ok(Some(ingest_sample(p, DataFormat::from_path(p))?)),
        }
    }

    pub(crate) fn sampler_config(
        &self,
        data: Option<&WeightedSample>,
    ) -> anyhow::Result<SamplerConfig> {
        let pool = match (self.sampler.range, data) {
            (Some((lo, hi)), _) => ObservationPool::Range { lo, hi },
            (None, Some(d)) => ObservationPool::List(d.observations().cloned().collect()),
            (None, None) => anyhow::bail!("no observation pool: give --range or --data"),
        };
        let cfg = SamplerConfig::new(pool)
            .with_seed(self.sampler.seed)
            .with_trials(self.sampler.trials)
            .with_max_block(self.sampler.max_block)
            .with_tolerance(self.tolerances.axiom);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A finished run: the report and the process exit code it maps to.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub exit_code: i32,
}

/// Executes the configured command. Operational problems come back as
/// `Err` (exit code 1); falsifications are a successful outcome with exit
/// code 2.
pub fn run(config: &RunConfig) -> anyhow::Result<RunOutcome> {
    config.validate()?;
    let start = Instant::now();
    let mut report = commands::execute(config)?;
    report.timing = Some(Timing {
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    let exit_code = if report.falsified() {
        EXIT_FALSIFIED
    } else {
        EXIT_OK
    };
    Ok(RunOutcome { report, exit_code })
}

/// Runs and writes the report to `output_path` (or stdout); returns the
/// exit code, printing operational errors to stderr.
pub fn run_and_emit(config: &RunConfig) -> i32 {
    let outcome = match run(config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_ERROR;
        }
    };
    let written = match &config.output_path {
        Some(path) => std::fs::File::create(path)
            .and_then(|mut f| outcome.report.write_to(config.format, &mut f)),
        None => outcome
            .report
            .write_to(config.format, &mut std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_ERROR;
    }
    outcome.exit_code
}
