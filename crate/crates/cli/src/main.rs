use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multiband::subband::Tiling;
use multiband_cli::commands::{self, Algorithm, CombineArgs, MetricsArgs, PlanSource};
use multiband_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "multiband", version, about = "Coherent multiband ranging experiments")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Bp,
    Spbp,
    Omp,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Bp => Algorithm::Bp,
            AlgoArg::Spbp => Algorithm::Spbp,
            AlgoArg::Omp => Algorithm::Omp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TilingArg {
    PerInterval,
    Packed,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its CFR dataset.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Range ambiguity function of a plan, with PSLR and sidelobes.
    Raf {
        /// Take the plan from a scenario file.
        #[arg(long, conflicts_with = "alloc", required_unless_present = "alloc")]
        scenario: Option<PathBuf>,
        /// Comma-separated allocation labels, e.g. S1,S2.
        #[arg(long, value_delimiter = ',')]
        alloc: Option<Vec<String>>,
        #[arg(long, default_value_t = 0.5e9)]
        granularity_hz: f64,
        #[arg(long, value_enum, default_value_t = TilingArg::PerInterval)]
        tiling: TilingArg,
        /// Main-lobe half width in m (default 1.2 x resolution).
        #[arg(long)]
        omega_m: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        r_max_m: f64,
        /// Grid step in m (default resolution / 16).
        #[arg(long)]
        step_m: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lobes_out: Option<PathBuf>,
    },
    /// Combine a dataset into a range profile and detections.
    Combine {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        algorithm: AlgoArg,
        /// Scenario or analysis TOML with [grid], [peaks], [spbp], [omp], [truth].
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        spbp_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        detections_out: PathBuf,
    },
    /// Coherence metrics and OSPA against ground truth.
    Metrics {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgoArg::Bp)]
        algorithm: AlgoArg,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated true ranges in m.
        #[arg(long, value_delimiter = ',')]
        truth: Option<Vec<f64>>,
        /// OSPA cutoff in m.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        spbp_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coherence versus carrier and combined bandwidth.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated combined bandwidths in Hz.
        #[arg(long, value_delimiter = ',')]
        total_bandwidths: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Simulate { scenario, out } => commands::cmd_simulate(&scenario, &out),
        Command::Raf {
            scenario,
            alloc,
            granularity_hz,
            tiling,
            omega_m,
            r_max_m,
            step_m,
            out,
            lobes_out,
        } => {
            let src = match (&scenario, alloc) {
                (Some(p), _) => PlanSource::Scenario(p),
                (None, Some(labels)) => PlanSource::Allocations {
                    labels,
                    granularity: granularity_hz,
                    tiling: match tiling {
                        TilingArg::PerInterval => Tiling::PerInterval,
                        TilingArg::Packed => Tiling::Packed,
                    },
                },
                (None, None) => return Err(CliError::Config("pass --scenario or --alloc".into())),
            };
            commands::cmd_raf(&src, &out, omega_m, r_max_m, step_m, lobes_out.as_deref())
        }
        Command::Combine {
            dataset,
            algorithm,
            config,
            spbp_seed,
            out,
            detections_out,
        } => commands::cmd_combine(&CombineArgs {
            dataset: &dataset,
            algorithm: algorithm.into(),
            config: config.as_deref(),
            spbp_seed,
            out: &out,
            detections_out: &detections_out,
        }),
        Command::Metrics {
            dataset,
            algorithm,
            config,
            truth,
            mu,
            spbp_seed,
            out,
        } => commands::cmd_metrics(&MetricsArgs {
            dataset: &dataset,
            algorithm: algorithm.into(),
            config: config.as_deref(),
            truth,
            mu,
            spbp_seed,
            out: &out,
        }),
        Command::Sweep {
            scenario,
            total_bandwidths,
            out,
        } => commands::cmd_sweep(&scenario, total_bandwidths, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("multiband: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
