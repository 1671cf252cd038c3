use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use smws_cli::fmt::sig6;
use smws_cli::sweep::{build_stats_report, run_once, run_sweep, SweepConfig};
use smws_core::ingest::{generate, parse_dax, parse_json, to_json, Family, GeneratorSpec};
use smws_core::sched::{fs_lb, QosConstraints};
use smws_core::stats::parse_results_csv;
use smws_core::InstanceCatalog;

/// Workflow scheduling simulator: structure-based multi-objective
/// schedulers on a modeled IaaS cloud.
#[derive(Parser)]
#[command(name = "smws", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule one workflow, simulate it and print the metrics.
    Schedule(ScheduleArgs),
    /// Generate a synthetic workflow in the native JSON format.
    Gen(GenArgs),
    /// Run the experiment grid and aggregate statistics.
    Sweep(SweepArgs),
    /// Recompute statistics from a results CSV.
    Stats(StatsArgs),
}

#[derive(Args)]
struct CatalogArgs {
    /// Instance catalog CSV; defaults to $SMWS_CATALOG or the embedded one.
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Inter-VM bandwidth in MB/s.
    #[arg(long, default_value_t = 20.0)]
    bandwidth_mbps: f64,
    /// Billing period in seconds.
    #[arg(long, default_value_t = 3600.0)]
    billing_period_s: f64,
    /// VM provisioning delay in seconds.
    #[arg(long, default_value_t = 100.0)]
    provisioning_delay_s: f64,
}

impl CatalogArgs {
    fn load(&self) -> Result<InstanceCatalog> {
        let path = self
            .catalog
            .clone()
            .or_else(|| std::env::var_os("SMWS_CATALOG").map(PathBuf::from));
        let mut catalog = match path {
            Some(p) => {
                let text = fs::read_to_string(&p)
                    .with_context(|| format!("reading catalog {}", p.display()))?;
                InstanceCatalog::from_csv(&text)?
            }
            None => InstanceCatalog::default_catalog(),
        };
        catalog.bandwidth_mbps = self.bandwidth_mbps;
        catalog.billing_period_s = self.billing_period_s;
        catalog.provisioning_delay_s = self.provisioning_delay_s;
        Ok(catalog)
    }
}

#[derive(Args)]
struct ScheduleArgs {
    /// Workflow file: native .json or Pegasus .dax/.xml.
    workflow: PathBuf,
    /// Algorithm: smwso, smwsh or heft.
    #[arg(long, default_value = "smwso")]
    algo: String,
    /// Deadline factor; deadline = alpha * fastest-schedule time.
    #[arg(long)]
    alpha: Option<f64>,
    /// Budget factor; budget = beta * lowest-budget cost.
    #[arg(long)]
    beta: Option<f64>,
    /// Absolute deadline in seconds (overrides --alpha).
    #[arg(long)]
    deadline: Option<f64>,
    /// Absolute budget (overrides --beta).
    #[arg(long)]
    budget: Option<f64>,
    /// MIPS rating used to convert DAX runtimes into instructions.
    #[arg(long, default_value_t = 1.0)]
    reference_mips: f64,
    /// Write the execution trace JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    catalog: CatalogArgs,
}

#[derive(Args)]
struct GenArgs {
    /// Workflow family (montage-like, cybershake-like, epigenomics-like,
    /// sipht-like, ligo-like).
    #[arg(long)]
    family: Family,
    /// Number of tasks.
    #[arg(long)]
    tasks: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',')]
    families: Vec<Family>,
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    betas: Vec<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithms (smwso, smwsh, heft).
    #[arg(long, value_delimiter = ',')]
    algos: Vec<String>,
    /// Run the full reference grid (sizes up to 1000, 30 repetitions).
    #[arg(long)]
    full: bool,
    /// Output directory for results.csv and stats.json.
    #[arg(long, default_value = "sweep-out")]
    out_dir: PathBuf,
    #[command(flatten)]
    catalog: CatalogArgs,
}

#[derive(Args)]
struct StatsArgs {
    /// Results CSV (local runs and external baselines mix freely).
    results: PathBuf,
    /// Write the stats report JSON here; stdout tables print either way.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Schedule(args) => cmd_schedule(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Stats(args) => cmd_stats(args),
    }
}

fn load_workflow(path: &Path, reference_mips: f64) -> Result<smws_core::WorkflowDag> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase();
    let dag = match ext.as_str() {
        "json" => parse_json(&fs::read_to_string(path)?)?,
        "dax" | "xml" => parse_dax(&fs::read(path)?, reference_mips)?,
        other => bail!("unsupported workflow format `.{other}` (expected .json, .dax or .xml)"),
    };
    Ok(dag)
}

fn cmd_schedule(args: ScheduleArgs) -> Result<()> {
    let catalog = args.catalog.load()?;
    let dag = load_workflow(&args.workflow, args.reference_mips)?;
    let qos = match (args.deadline, args.budget) {
        (Some(d), Some(b)) => QosConstraints::new(d, b),
        (None, None) => {
            let (fs_s, lb) = fs_lb(&dag, &catalog);
            let alpha = args.alpha.unwrap_or(16.0);
            let beta = args.beta.unwrap_or(16.0);
            QosConstraints::new(alpha * fs_s, beta * lb)
        }
        _ => bail!("--deadline and --budget must be given together"),
    };
    let trace = run_once(&args.algo, &dag, &catalog, &qos)?;
    let cr = trace.total_cost / qos.budget;
    let tr = trace.makespan_s / qos.deadline_s;
    println!(
        "algo={} tasks={} makespan_s={} cost={} energy_kwh={} cr={} tr={} success={}",
        args.algo,
        dag.task_count(),
        sig6(trace.makespan_s),
        sig6(trace.total_cost),
        sig6(trace.total_energy_kwh),
        sig6(cr),
        sig6(tr),
        cr <= 1.0 && tr <= 1.0
    );
    if let Some(out) = args.out {
        fs::write(&out, trace.to_json())
            .with_context(|| format!("writing trace {}", out.display()))?;
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let spec = GeneratorSpec::new(args.family, args.tasks, args.seed);
    let dag = generate(&spec)?;
    let text = to_json(&dag);
    match args.out {
        Some(path) => fs::write(&path, text)
            .with_context(|| format!("writing workflow {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::from_config_text(
            &fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?,
        )?,
        None => SweepConfig::default(),
    };
    if args.full {
        cfg = cfg.full_grid();
    }
    if !args.families.is_empty() {
        cfg.families = args.families.clone();
    }
    if !args.sizes.is_empty() {
        cfg.sizes = args.sizes.clone();
    }
    if !args.alphas.is_empty() {
        cfg.alphas = args.alphas.clone();
    }
    if !args.betas.is_empty() {
        cfg.betas = args.betas.clone();
    }
    if let Some(r) = args.reps {
        cfg.repetitions = r;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if !args.algos.is_empty() {
        cfg.algorithms = args.algos.clone();
    }
    cfg.validate()?;
    let catalog = args.catalog.load()?;

    let out = run_sweep(&cfg, &catalog);
    fs::create_dir_all(&args.out_dir)?;
    let csv_path = args.out_dir.join("results.csv");
    fs::write(&csv_path, &out.csv)?;
    let stats_path = args.out_dir.join("stats.json");
    fs::write(&stats_path, serde_json::to_string_pretty(&out.report)?)?;
    print!("{}", out.report.render_tables());
    println!(
        "rows={} failures={} -> {}",
        out.results.len(),
        out.failures.len(),
        csv_path.display()
    );
    for f in &out.failures {
        eprintln!("failed cell: {f}");
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let text = fs::read_to_string(&args.results)
        .with_context(|| format!("reading results {}", args.results.display()))?;
    let results = parse_results_csv(&text)?;
    if results.is_empty() {
        bail!("no result rows in {}", args.results.display());
    }
    let report = build_stats_report(&results);
    print!("{}", report.render_tables());
    if let Some(out) = args.out {
        fs::write(&out, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing stats {}", out.display()))?;
    }
    Ok(())
}
