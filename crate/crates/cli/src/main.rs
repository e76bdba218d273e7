use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netdiv::analyze::run_analyze;
use netdiv::config::RunConfig;
use netdiv::generate::{meta_path, run_generate};
use netdiv::verify::verify_bundle;
use netdiv_core::analysis::{MeasureOptions, ThetaScope};
use netdiv_core::connectivity::DiameterOptions;
use netdiv_core::growth::{GrowthConfig, GrowthModel, KernelKind};
use netdiv_core::ingest::Scenario;
use netdiv_core::spectral::SpectralOptions;
use netdiv_core::trend::{format_table, MeasureId, TrendOptions};

#[derive(Parser)]
#[command(
    name = "netdiv",
    version,
    about = "Structural diversity trends in growing networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every measure over the snapshot series of each dataset.
    Analyze(AnalyzeArgs),
    /// Write a synthetic temporal edge list.
    Generate(GenerateArgs),
    /// Recompute and cross-check a report bundle.
    Verify {
        /// Bundle directory written by `analyze`.
        bundle: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Full,
    Connected,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThetaArg {
    Lcc,
    Nonisolated,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Tab-separated `name  path  unipartite|bipartite` lines.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 100)]
    timepoints: usize,
    #[arg(long, default_value_t = 75)]
    t1: usize,
    #[arg(long, default_value_t = 0.05)]
    sig_level: f64,
    /// Eigenpairs used by the spectral measures.
    #[arg(long, default_value_t = 50)]
    rank_r: usize,
    #[arg(long, default_value_t = 4)]
    rw_steps: u32,
    /// BFS sources for the effective diameter.
    #[arg(long, default_value_t = 500)]
    diameter_samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Comma-separated measure ids (default: all).
    #[arg(long, value_delimiter = ',')]
    measures: Option<Vec<String>>,
    #[arg(long, default_value = "netdiv-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Use line order as time instead of the timestamp column.
    #[arg(long)]
    assume_order: bool,
    #[arg(long)]
    two_sided: bool,
    /// Start the connected series after the anchor timepoint.
    #[arg(long)]
    exclude_anchor: bool,
    #[arg(long, value_enum, default_value = "lcc")]
    theta_scope: ThetaArg,
}

#[derive(Args)]
struct GenerateArgs {
    /// ba, eigenvector_pa, triangle_closing or kernel_growth.
    #[arg(long)]
    model: GrowthModel,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m0: usize,
    /// exp or neumann (kernel growth only).
    #[arg(long, default_value = "exp")]
    kernel: KernelKind,
    #[arg(long, default_value_t = 0.5)]
    kernel_alpha: f64,
    /// Weight of uniformly chosen pairs under triangle closing.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn run_config(a: AnalyzeArgs) -> Result<RunConfig> {
    let measures: BTreeSet<MeasureId> = match a.measures {
        None => MeasureId::ALL.into_iter().collect(),
        Some(list) => list
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse())
            .collect::<netdiv_core::Result<_>>()?,
    };
    Ok(RunConfig {
        manifest: a.manifest,
        scenarios: match a.scenario {
            ScenarioArg::Full => vec![Scenario::Full],
            ScenarioArg::Connected => vec![Scenario::Connected],
            ScenarioArg::Both => vec![Scenario::Full, Scenario::Connected],
        },
        timepoints: a.timepoints,
        t1: a.t1,
        exclude_anchor: a.exclude_anchor,
        assume_order: a.assume_order,
        trend: TrendOptions {
            sig_level: a.sig_level,
            two_sided: a.two_sided,
        },
        measure: MeasureOptions {
            measures,
            spectral: SpectralOptions {
                rel_tolerance: a.tolerance,
                r: a.rank_r,
                seed: a.seed,
                ..Default::default()
            },
            diameter: DiameterOptions {
                sample_size: a.diameter_samples,
                seed: a.seed,
                ..Default::default()
            },
            rw_steps: a.rw_steps,
            theta_scope: match a.theta_scope {
                ThetaArg::Lcc => ThetaScope::Lcc,
                ThetaArg::Nonisolated => ThetaScope::NonIsolated,
            },
        },
        out: a.out,
        jobs: a.jobs,
    })
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let cfg = run_config(args)?;
    let run = run_analyze(&cfg)?;
    for d in &run.metadata.datasets {
        if let Some(e) = &d.error {
            eprintln!("dataset {} failed: {e}", d.name);
        }
    }
    print!("{}", format_table(&run.table));
    println!("bundle written to {}", cfg.out.display());
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let cfg = GrowthConfig {
        model: a.model,
        n_target: a.n,
        edges_per_step: a.m0,
        kernel: a.kernel,
        kernel_alpha: a.kernel_alpha,
        triangle_epsilon: a.epsilon,
        seed: a.seed,
    };
    let meta =
        run_generate(&cfg, &a.out).with_context(|| format!("generating {}", a.out.display()))?;
    println!(
        "{} edges on {} vertices written to {} (metadata in {})",
        meta.edges,
        meta.vertices,
        a.out.display(),
        meta_path(&a.out).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Generate(g) => generate(g),
        Command::Verify { bundle } => verify_bundle(&bundle)
            .map(|r| {
                println!(
                    "bundle ok: {} series, {} points, {} summary rows",
                    r.series, r.points, r.summary_rows
                )
            })
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
