use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsmooth::error::{CliError, Result};
use qsmooth::experiments::generate_graphs;
use qsmooth::formats::format_graphs;
use qsmooth::run::{run_certified_ratio, run_convergence, run_heatmap, run_single, Outputs};
use qsmooth::{svg, ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(
    name = "qsmooth",
    version,
    about = "Certified robustness for bit-flip smoothing via amplitude estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certificate heat map over (additions, deletions) radii.
    Heatmap(RunArgs),
    /// Certified fraction of instances against radius.
    CertifiedRatio(RunArgs),
    /// Estimation error against oracle calls for Monte Carlo and QAE.
    Convergence(RunArgs),
    /// Evaluate and certify one instance, printing a report.
    Single(RunArgs),
    /// Write the random graph set used by graph_clique to `graphs.txt`.
    Graphs(RunArgs),
    /// Re-render an SVG figure from a CSV written by a previous run.
    Plot {
        /// Figure CSV (`heatmap_cells.csv`, `certified_ratio_curve.csv`, `convergence_summary.csv`).
        csv: PathBuf,
        /// Output path; defaults to the CSV path with an `.svg` extension.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` config file; flags below override its entries.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    p_plus: Option<String>,
    #[arg(long)]
    p_minus: Option<String>,
    /// Comma-separated counting-qubit budgets.
    #[arg(long)]
    counting_qubits: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Comma-separated Monte Carlo sample budgets.
    #[arg(long)]
    mc_samples: Option<String>,
    #[arg(long = "instances")]
    instance_count: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "out")]
    output_dir: Option<String>,
    #[arg(long)]
    max_radius: Option<String>,
    #[arg(long)]
    truth_table: Option<String>,
    #[arg(long)]
    graph_file: Option<String>,
    /// Base point as a bit string, bit 0 first.
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    instance_id: Option<String>,
    /// Use one shot per repeat instead of the median-boosted estimator.
    #[arg(long)]
    per_shot: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        let overrides = [
            ("experiment", &self.experiment),
            ("p_plus", &self.p_plus),
            ("p_minus", &self.p_minus),
            ("counting_qubits", &self.counting_qubits),
            ("delta", &self.delta),
            ("mc_samples", &self.mc_samples),
            ("instance_count", &self.instance_count),
            ("seed", &self.seed),
            ("output_dir", &self.output_dir),
            ("max_radius", &self.max_radius),
            ("truth_table", &self.truth_table),
            ("graph_file", &self.graph_file),
            ("x", &self.x),
            ("instance_id", &self.instance_id),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                raw.set(key, v.as_str())?;
            }
        }
        if self.per_shot {
            raw.set("per_shot", "true")?;
        }
        raw.resolve()
    }
}

fn finish(cfg: &ExperimentConfig, out: Outputs) -> Result<()> {
    out.write_to(&cfg.output_dir)?;
    for name in out.files.keys() {
        println!("{}", cfg.output_dir.join(name).display());
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Heatmap(args) => {
            let cfg = args.resolve()?;
            finish(&cfg, run_heatmap(&cfg)?)
        }
        Command::CertifiedRatio(args) => {
            let cfg = args.resolve()?;
            finish(&cfg, run_certified_ratio(&cfg)?)
        }
        Command::Convergence(args) => {
            let cfg = args.resolve()?;
            finish(&cfg, run_convergence(&cfg)?)
        }
        Command::Single(args) => {
            let cfg = args.resolve()?;
            print!("{}", run_single(&cfg)?);
            Ok(())
        }
        Command::Graphs(args) => {
            let cfg = args.resolve()?;
            let graphs = generate_graphs(cfg.instance_count, cfg.seed)?;
            let mut out = Outputs::default();
            out.files.insert("graphs.txt".into(), format_graphs(&graphs));
            finish(&cfg, out)
        }
        Command::Plot { csv, out } => {
            let text = std::fs::read_to_string(&csv).map_err(|e| CliError::io(&csv, e))?;
            let rendered = svg::render(&text)?;
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&out, rendered).map_err(|e| CliError::io(&out, e))?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
