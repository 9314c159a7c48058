use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use psiaxiom::axiomlab::Axiom;
use psiaxiom::Observation;
use psiaxiom_cli::spec::{parse_interval, parse_range};
use psiaxiom_cli::{
    parse_block, parse_tolerances, Command, Diagnosis, Format, RunConfig, SamplerOptions,
    EXIT_ERROR,
};

#[derive(Parser)]
#[command(
    name = "psiaxiom",
    version,
    about = "Generalized psi-estimators: estimate, audit, diagnose, synthesize"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Score family: qa:id|ln|recip|pow:<p>, huber:<kappa>, arctan, median, step, table:<path>
    #[arg(long)]
    psi: Option<String>,
    /// Sample file (CSV `value[,count]` lines, or a .json array)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Parameter interval `lo:hi`; `-inf` and `inf` are accepted
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Tolerance overrides `key=value,...`
    #[arg(long)]
    tol: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report destination; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args, Clone)]
struct Sampling {
    /// Finite observation range `lo:hi` to sample from
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Largest sampled block length
    #[arg(long, default_value_t = 8)]
    max_block: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Point of sign change of the score sum on the data
    Estimate {
        #[command(flatten)]
        common: Common,
    },
    /// Sampled axiom checks against a score family or a builtin estimator
    Audit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Builtin estimator (arithmetic, geometric, harmonic, max, min, sum, median, first-biased) or qa:<generator>
        #[arg(long)]
        mean: Option<String>,
        /// Comma-separated axiom names; a default set when absent
        #[arg(long, value_delimiter = ',')]
        axioms: Vec<Axiom>,
        /// Level for subsemigroup-closure
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Extra point: run asymptotic idempotency on the data block with this y
        #[arg(long, allow_hyphen_values = true)]
        y: Option<Observation>,
        /// Idempotency schedule runs over n = 1, 2, ..., 2^k
        #[arg(long, default_value_t = 15)]
        schedule: u32,
        /// Two generators `f,g` for generator-equivalence
        #[arg(long)]
        generators: Option<String>,
    },
    /// Kolmogorov-Nagumo checks of a mean sequence on a compact range
    Kolmogorov {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        mean: String,
    },
    /// Ratio, one-sided limit and semigroup diagnostics
    Diagnose {
        #[command(subcommand)]
        which: DiagnoseCmd,
    },
    /// Build a score table from a black-box estimator by linear separation
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mean: String,
        /// Comma-separated alphabet, e.g. 1,2,3,4
        #[arg(long)]
        alphabet: String,
        #[arg(long)]
        max_size: usize,
        /// Number of grid points on the theta range
        #[arg(long, default_value_t = 13)]
        grid: usize,
        /// Where to write the table
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Catalog contents
    Catalog {
        #[command(subcommand)]
        which: CatalogCmd,
    },
}

#[derive(Subcommand)]
enum DiagnoseCmd {
    /// f_{x,y}(t) = -S_x(t) / S_y(t) between the two estimates
    Ratio {
        #[command(flatten)]
        common: Common,
        /// x block, e.g. `0` or `1,3:2` (value:count)
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// One-sided limits of f_{x,{y}} at the x estimate
    Zlimits {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: Observation,
    },
    /// Closure of the level sets and the core probe
    Semigroup {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        mean: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Core probe base block (must lie below t)
        #[arg(long, allow_hyphen_values = true, requires = "s")]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "a")]
        s: Option<String>,
        #[arg(long, default_value_t = 1000)]
        n_max: u64,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List {
        #[command(flatten)]
        common: Common,
    },
}

fn apply_common(cfg: &mut RunConfig, c: Common) -> anyhow::Result<()> {
    cfg.psi_spec = c.psi;
    cfg.data_path = c.data;
    cfg.theta_interval = c.theta.as_deref().map(parse_interval).transpose()?;
    if let Some(t) = c.tol.as_deref() {
        cfg.tolerances = parse_tolerances(t)?;
    }
    cfg.sampler.seed = c.seed;
    cfg.output_path = c.out;
    cfg.format = match c.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    Ok(())
}

fn apply_sampling(cfg: &mut RunConfig, s: Sampling) -> anyhow::Result<()> {
    cfg.sampler = SamplerOptions {
        seed: cfg.sampler.seed,
        trials: s.trials,
        max_block: s.max_block,
        range: s.range.as_deref().map(parse_range).transpose()?,
    };
    Ok(())
}

fn config(cli: Cli) -> anyhow::Result<RunConfig> {
    let (command, common, sampling, mean) = match cli.command {
        Cmd::Estimate { common } => (Command::Estimate, common, None, None),
        Cmd::Audit {
            common,
            sampling,
            mean,
            axioms,
            t,
            y,
            schedule,
            generators,
        } => {
            let generators = generators
                .map(|g| {
                    g.split_once(',')
                        .map(|(f, g)| (f.trim().to_string(), g.trim().to_string()))
                        .context("--generators expects `f,g`")
                })
                .transpose()?;
            let cmd = Command::Audit {
                axioms,
                t,
                y,
                schedule_exp: schedule,
                generators,
            };
            (cmd, common, Some(sampling), mean)
        }
        Cmd::Kolmogorov {
            common,
            sampling,
            mean,
        } => (Command::Kolmogorov, common, Some(sampling), Some(mean)),
        Cmd::Diagnose { which } => match which {
            DiagnoseCmd::Ratio { common, x, y, grid } => {
                let d = Diagnosis::Ratio {
                    x: parse_block(&x)?,
                    y: parse_block(&y)?,
                    grid,
                };
                (Command::Diagnose(d), common, None, None)
            }
            DiagnoseCmd::Zlimits { common, x, y } => {
                let d = Diagnosis::ZLimits {
                    x: parse_block(&x)?,
                    y,
                };
                (Command::Diagnose(d), common, None, None)
            }
            DiagnoseCmd::Semigroup {
                common,
                sampling,
                mean,
                t,
                a,
                s,
                n_max,
            } => {
                let core = match (a, s) {
                    (Some(a), Some(s)) => Some((parse_block(&a)?, parse_block(&s)?)),
                    _ => None,
                };
                let d = Diagnosis::Semigroup { t, core, n_max };
                (Command::Diagnose(d), common, Some(sampling), mean)
            }
        },
        Cmd::Synthesize {
            common,
            mean,
            alphabet,
            max_size,
            grid,
            table,
        } => {
            let alphabet = alphabet
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse::<Observation>)
                .collect::<Result<Vec<_>, _>>()?;
            let cmd = Command::Synthesize {
                alphabet,
                max_size,
                grid,
                table_path: table,
            };
            (cmd, common, None, Some(mean))
        }
        Cmd::Catalog {
            which: CatalogCmd::List { common },
        } => (Command::CatalogList, common, None, None),
    };
    let mut cfg = RunConfig::new(command);
    apply_common(&mut cfg, common)?;
    if let Some(s) = sampling {
        apply_sampling(&mut cfg, s)?;
    }
    cfg.mean_spec = mean;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match config(cli) {
        Ok(cfg) => psiaxiom_cli::run_and_emit(&cfg),
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    };
    ExitCode::from(code as u8)
}
