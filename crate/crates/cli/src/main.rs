use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use relfeed_core::simulator::DatasetSource;
use relfeed_core::{generate_synthetic, run_experiment, Algorithm, DataFormat, ExperimentConfig};
use relfeed_service::{AppState, ServiceConfig};

#[derive(Parser)]
#[command(name = "relfeed", version, about = "Bayesian relevance-feedback search: simulations, data tooling, HTTP service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run simulated searches and write a report CSV.
    Simulate(SimulateArgs),
    /// Write a synthetic uniform dataset.
    GenData(GenDataArgs),
    /// Start the HTTP session service.
    Serve(ServeArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    target_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset file (.csv, .bin) or synthetic:N:DIM:SEED.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Extra config keys, e.g. --set sigma=0.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

#[derive(clap::Args)]
struct GenDataArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Defaults to the output file extension (.bin/.fsvec mean binary).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Dataset file (.csv, .bin) or synthetic:N:DIM:SEED.
    #[arg(long)]
    dataset: String,
    /// Name clients use for the dataset; defaults to the file stem.
    #[arg(long)]
    dataset_id: Option<String>,
    #[arg(long)]
    assets_dir: Option<PathBuf>,
    /// Write engine snapshots and transcripts of finished sessions here.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = ExperimentConfig::<f64>::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config
            .apply_kv_text(&text)
            .with_context(|| format!("in {}", path.display()))?;
    }
    for kv in &args.overrides {
        let Some((key, value)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {kv:?}");
        };
        config.set(key, value)?;
    }
    if let Some(a) = args.algo {
        config.algorithm = a;
    }
    if let Some(k) = args.k {
        config.k = k;
    }
    if let Some(r) = args.runs {
        config.runs = r;
    }
    if let Some(t) = args.target_size {
        config.target_set_size = t;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(m) = args.max_iterations {
        config.max_iterations = m;
    }
    if let Some(d) = &args.dataset {
        config.dataset = d.parse()?;
    }
    let dataset = config
        .dataset
        .load::<f64>()
        .with_context(|| format!("loading dataset {}", config.dataset))?;
    let report = run_experiment(&config, &dataset)?;
    match &args.out {
        Some(path) => relfeed_core::export_report(&report, path)?,
        None => print!("{}", report.to_csv_string()),
    }
    eprintln!(
        "{} k={} target_size={} runs={}: mean_iterations={:.2} success_rate={:.3}",
        config.algorithm, config.k, config.target_set_size, config.runs, report.mean_iterations, report.success_rate
    );
    Ok(())
}

fn gen_data(args: GenDataArgs) -> Result<()> {
    let format = match args.format {
        Some(Format::Csv) => DataFormat::Csv,
        Some(Format::Binary) => DataFormat::Binary,
        None => DataFormat::from_path(&args.out),
    };
    let dataset = generate_synthetic::<f64>(args.n, args.dim, args.seed)?;
    dataset.save(&args.out, format)?;
    eprintln!("wrote {} items of dimension {} to {}", args.n, args.dim, args.out.display());
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let source: DatasetSource = args.dataset.parse()?;
    let dataset = source.load::<f64>().with_context(|| format!("loading dataset {source}"))?;
    let dataset_id = args.dataset_id.unwrap_or_else(|| match &source {
        DatasetSource::File(p) => p
            .file_stem()
            .map_or("default".into(), |s| s.to_string_lossy().into_owned()),
        DatasetSource::Synthetic { .. } => "default".into(),
    });
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("bad address {}:{}", args.host, args.port))?;
    let config = ServiceConfig {
        dataset_id,
        assets_dir: args.assets_dir,
        snapshot_dir: args.snapshot_dir,
        ..ServiceConfig::default()
    };
    eprintln!("serving {} items as dataset {:?} on http://{addr}", dataset.len(), config.dataset_id);
    let state = AppState::new(dataset, config);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(relfeed_service::serve(addr, state))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::GenData(a) => gen_data(a),
        Command::Serve(a) => serve(a),
    }
}
