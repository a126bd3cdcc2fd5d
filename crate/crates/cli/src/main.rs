//! `phaselab` command-line interface.
//!
//! Exit codes: 0 success, 1 valid negative result (collision, `sigma = 0`,
//! singular Fisher matrix), 2 usage or input error, 3 enumeration budget
//! exceeded.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phaselab::ensemble::io::{load_ensemble, save_ensemble, vector_from_json};
use phaselab::ensemble::{fractional_dft_stack, identity};
use phaselab::injectivity::{
    check, conjecture_status, cp_necessity_filter, hmw_lower_bound, hmw_test, nullspace_classifier,
    real_injectivity, CheckOptions, ConjectureStatus, InjectivityVerdict, Method, Status,
};
use phaselab::stability_avg::{
    fisher_matrix, from_real_coordinates, monte_carlo_fisher, FisherReport, NoiseModel,
};
use phaselab::stability_worst::{
    complex_gaussian_ensemble, gaussian_ensemble, lipschitz_report, localized_fourier_frame,
    run_gaussian_experiment, scp_sigma, scp_upper_bound, write_points_csv, write_summary_csv,
    GaussianExperimentConfig, RedundancySummary, DEFAULT_SCP_BUDGET,
};
use phaselab::{Error, Field, MeasurementEnsemble};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "phaselab",
    version,
    about = "Injectivity and stability analysis of phase-retrieval ensembles"
)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "PHASELAB_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide or bound injectivity of the intensity map.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckMethod::Auto)]
        method: CheckMethod,
        /// Seed for random span probes.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest N for subset enumeration.
        #[arg(long, default_value_t = CheckOptions::default().cp_budget)]
        budget: usize,
        /// Absolute floor of the rank tolerance.
        #[arg(long, default_value_t = 1e-10)]
        rank_floor: f64,
    },
    /// Strong complement property constant.
    Scp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ScpMode::Exact)]
        mode: ScpMode,
        /// Comma-separated zero-based indices of S (upper-bound mode).
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_SCP_BUDGET)]
        budget: usize,
    },
    /// Lipschitz bounds of the root-intensity map of a real ensemble.
    Lipschitz {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SCP_BUDGET)]
        budget: usize,
    },
    /// Stability constants of random Gaussian ensembles.
    Gaussian {
        #[arg(long = "M")]
        m: usize,
        /// Comma-separated redundancies N / M.
        #[arg(long = "R", value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-trial CSV.
        #[arg(long)]
        out: PathBuf,
        /// Per-redundancy CSV; defaults to `<out stem>.summary.csv`.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SCP_BUDGET)]
        budget: usize,
    },
    /// Fisher information and Cramer-Rao bound at a parameter.
    Crlb {
        #[arg(long)]
        input: PathBuf,
        /// JSON array of numbers or `[re, im]` pairs.
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        noise_sigma: f64,
        /// Monte Carlo trials for a cross-check.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a named ensemble.
    Make {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lower bound on measurements for complex injectivity.
    Bounds {
        #[arg(long = "M")]
        m: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMethod {
    Auto,
    Cp,
    Hmw,
    Nullspace,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScpMode {
    Exact,
    UpperBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Identity,
    FourierLocalized,
    Fracft3,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

/// Result of a command: a payload for stdout and whether it is a negative
/// finding.
struct Outcome {
    json: String,
    negative: bool,
}

impl Outcome {
    fn new<T: Serialize>(value: &T, negative: bool) -> Result<Self, Error> {
        Ok(Self {
            json: serde_json::to_string_pretty(value)?,
            negative,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(out) => {
            println!("{}", out.json);
            ExitCode::from(u8::from(out.negative))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BudgetExceeded { .. } => 3,
                _ => 2,
            })
        }
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Check {
            input,
            method,
            seed,
            budget,
            rank_floor,
        } => {
            let phi = load_ensemble(&input)?;
            let mut opts = CheckOptions {
                seed,
                cp_budget: budget,
                ..CheckOptions::default()
            };
            opts.rank_tol.absolute_floor = rank_floor;
            let verdict = cmd_check(&phi, method, &opts)?;
            Outcome::new(&verdict, verdict.status == Status::NotInjective)
        }
        Command::Scp {
            input,
            mode,
            subset,
            budget,
        } => {
            let phi = load_ensemble(&input)?;
            match mode {
                ScpMode::Exact => {
                    let report = scp_sigma(&phi, budget)?;
                    Outcome::new(&report, report.sigma == 0.0)
                }
                ScpMode::UpperBound => {
                    if subset.is_empty() {
                        return Err(Error::InvalidArgument(
                            "upper-bound mode needs --subset".into(),
                        ));
                    }
                    let bound = scp_upper_bound(&phi, &subset)?;
                    Outcome::new(&bound, bound.sigma_upper == 0.0)
                }
            }
        }
        Command::Lipschitz {
            input,
            samples,
            seed,
            budget,
        } => {
            let phi = load_ensemble(&input)?;
            let report = lipschitz_report(&phi, samples, seed, budget)?;
            Outcome::new(&report, !report.stability_constant_upper.is_finite())
        }
        Command::Gaussian {
            m,
            r,
            trials,
            seed,
            out,
            summary,
            budget,
        } => {
            let cfg = GaussianExperimentConfig {
                budget,
                ..GaussianExperimentConfig::new(m, r, trials, seed)
            };
            let result = run_gaussian_experiment(&cfg)?;
            let summary = summary.unwrap_or_else(|| summary_path(&out));
            let mut w = BufWriter::new(File::create(&out)?);
            write_points_csv(&result, &mut w)?;
            w.flush()?;
            let mut w = BufWriter::new(File::create(&summary)?);
            write_summary_csv(&result, &mut w)?;
            w.flush()?;
            let report = GaussianOutput {
                points_csv: out.display().to_string(),
                summary_csv: summary.display().to_string(),
                rows: result.points.len(),
                summaries: result.summaries,
            };
            Outcome::new(&report, false)
        }
        Command::Crlb {
            input,
            theta,
            noise_sigma,
            mc,
            seed,
        } => {
            let phi = load_ensemble(&input)?;
            let theta = vector_from_json(&std::fs::read_to_string(&theta)?)?;
            let noise = NoiseModel::new(noise_sigma)?;
            let report = fisher_matrix(&theta, &phi, &noise)?;
            let monte_carlo = match mc {
                Some(trials) => Some(cmd_mc(&report, &phi, &noise, trials, seed)?),
                None => None,
            };
            let negative = !report.positive_definite();
            Outcome::new(
                &CrlbOutput {
                    report,
                    monte_carlo,
                },
                negative,
            )
        }
        Command::Make {
            kind,
            m,
            n,
            seed,
            field,
            out,
        } => {
            let phi = cmd_make(kind, m, n, seed, field)?;
            save_ensemble(&phi, &out)?;
            let info = MakeOutput {
                path: out.display().to_string(),
                field: phi.field(),
                m: phi.dim(),
                n: phi.len(),
            };
            Outcome::new(&info, false)
        }
        Command::Bounds { m } => {
            if m == 0 {
                return Err(Error::InvalidArgument("M must be positive".into()));
            }
            let out = BoundsOutput {
                m,
                hmw: hmw_lower_bound(m),
                conjecture_4m4: 4 * m - 4,
                status: conjecture_status(m),
            };
            Outcome::new(&out, false)
        }
    }
}

fn cmd_check(
    phi: &MeasurementEnsemble,
    method: CheckMethod,
    opts: &CheckOptions,
) -> Result<InjectivityVerdict, Error> {
    match method {
        CheckMethod::Auto => check(phi, opts),
        CheckMethod::Hmw => hmw_test(phi, opts),
        CheckMethod::Nullspace => nullspace_classifier(phi, opts),
        CheckMethod::Cp => match phi.field() {
            Field::Real => real_injectivity(phi, opts),
            Field::Complex => Ok(cp_necessity_filter(phi, opts)?.unwrap_or_else(|| {
                InjectivityVerdict::indeterminate(
                    Method::CpNecessity,
                    "complement property holds; it is necessary but not sufficient for complex injectivity",
                )
            })),
        },
    }
}

fn cmd_make(
    kind: Kind,
    m: Option<usize>,
    n: Option<usize>,
    seed: u64,
    field: FieldArg,
) -> Result<MeasurementEnsemble, Error> {
    let need = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this kind")))
    };
    let field = match field {
        FieldArg::Real => Field::Real,
        FieldArg::Complex => Field::Complex,
    };
    match kind {
        Kind::Identity => {
            let m = need(m, "M")?;
            if m == 0 {
                return Err(Error::InvalidArgument("M must be positive".into()));
            }
            Ok(identity(m, field))
        }
        Kind::FourierLocalized => localized_fourier_frame(need(m, "M")?, need(n, "N")?),
        Kind::Fracft3 => Ok(fractional_dft_stack(&[0.0, 0.5, 1.0, 1.5])),
        Kind::Gaussian => {
            let (m, n) = (need(m, "M")?, need(n, "N")?);
            match field {
                Field::Real => gaussian_ensemble(m, n, seed),
                Field::Complex => complex_gaussian_ensemble(m, n, seed),
            }
        }
    }
}

fn cmd_mc(
    report: &FisherReport,
    phi: &MeasurementEnsemble,
    noise: &NoiseModel,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloCheck, Error> {
    let theta = from_real_coordinates(&report.theta, report.field);
    let mc = monte_carlo_fisher(&theta, phi, noise, trials, seed)?;
    let norm = report.j.norm();
    let distance = (&mc - &report.j).norm();
    Ok(MonteCarloCheck {
        trials,
        seed,
        frobenius_distance: distance,
        relative_discrepancy: (norm > 0.0).then(|| distance / norm),
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.summary.csv"))
}

#[derive(Serialize)]
struct GaussianOutput {
    points_csv: String,
    summary_csv: String,
    rows: usize,
    summaries: Vec<RedundancySummary>,
}

#[derive(Serialize)]
struct MonteCarloCheck {
    trials: usize,
    seed: u64,
    frobenius_distance: f64,
    /// Distance relative to `|J|_F`; absent when `J = 0`.
    relative_discrepancy: Option<f64>,
}

#[derive(Serialize)]
struct CrlbOutput {
    #[serde(flatten)]
    report: FisherReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<MonteCarloCheck>,
}

#[derive(Serialize)]
struct MakeOutput {
    path: String,
    field: Field,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Serialize)]
struct BoundsOutput {
    #[serde(rename = "M")]
    m: usize,
    hmw: usize,
    conjecture_4m4: usize,
    status: ConjectureStatus,
}
