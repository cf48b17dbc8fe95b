use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ipgq::ansatz::CircuitTemplate;
use ipgq_bench::config::{algorithm_from_name, entangler_from_name};
use ipgq_bench::{
    export_all, export_qasm, output_dir, read_record, run_experiment, AggregateRecord, BenchError, ConfigOverrides,
    ExperimentConfig, ExperimentKind, GrowLayers, Result,
};

#[derive(Parser)]
#[command(name = "ipgq", version, about = "Optimize parameterized circuits and export the results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prepare a GHZ or W state from |0...0> (default: ghz_prep).
    PrepareState(RunArgs),
    /// Approximate the QFT unitary (default: qft_frobenius).
    CompileUnitary(RunArgs),
    /// Run one experiment, or all four when none is selected.
    Bench(RunArgs),
    /// Write the best circuit of a saved record as OpenQASM 2.0.
    ExportQasm(QasmArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ghz_prep, w_prep, qft_matrix_distance or qft_frobenius.
    #[arg(long)]
    experiment: Option<String>,
    /// Optimizers to run, e.g. `gd,adam,lbfgs,ipg`.
    #[arg(long, value_delimiter = ',')]
    optimizer: Vec<String>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    qubits: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Output directory [default: $IPGQ_OUT_DIR, else ./ipgq-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Start all optimizers from the same seeds.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    shared_init: Option<bool>,
    /// `every` (a CNOT chain after each layer) or `between`.
    #[arg(long)]
    entangler: Option<String>,
    /// Add two layers and re-run while the best cost exceeds this value.
    #[arg(long, value_name = "THRESHOLD")]
    grow_layers: Option<f64>,
}

#[derive(Args)]
struct QasmArgs {
    /// Record written by a previous run.
    #[arg(long)]
    record: PathBuf,
    #[arg(long, default_value = "ipg")]
    optimizer: String,
    /// Target file [default: <record dir>/<experiment>_<optimizer>.qasm].
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Result<ConfigOverrides> {
        Ok(ConfigOverrides {
            experiment: self.experiment.as_deref().map(str::parse).transpose()?,
            num_qubits: self.qubits,
            num_layers: self.layers,
            optimizers: if self.optimizer.is_empty() {
                None
            } else {
                Some(self.optimizer.iter().map(|n| algorithm_from_name(n)).collect::<Result<_>>()?)
            },
            iterations: self.iters,
            n_runs: self.runs,
            base_seed: self.seed,
            entangler: self.entangler.as_deref().map(entangler_from_name).transpose()?,
            shared_init: self.shared_init,
            grow_layers: self.grow_layers.map(GrowLayers::new),
            histogram_samples: None,
            output_dir: self.out.clone(),
        })
    }
}

/// Keeps the file's settings for optimizers that the flags only name.
fn merge_optimizers(file: Option<&ConfigOverrides>, flags: &mut ConfigOverrides) {
    let (Some(named), Some(listed)) = (flags.optimizers.as_mut(), file.and_then(|f| f.optimizers.as_ref())) else {
        return;
    };
    for a in named.iter_mut() {
        if let Some(b) = listed.iter().find(|b| b.tag() == a.tag()) {
            *a = *b;
        }
    }
}

fn configs(args: &RunArgs, allowed: &[ExperimentKind], run_all: bool) -> Result<Vec<ExperimentConfig>> {
    let file = args.config.as_deref().map(ConfigOverrides::from_file).transpose()?;
    let mut flags = args.overrides()?;
    merge_optimizers(file.as_ref(), &mut flags);
    let chosen = flags.experiment.or(file.as_ref().and_then(|f| f.experiment));
    let kinds = match chosen {
        Some(k) if !allowed.contains(&k) => {
            return Err(BenchError::Config(format!("experiment {k} is not available for this command")));
        }
        Some(k) => vec![k],
        None if run_all => allowed.to_vec(),
        None => vec![allowed[0]],
    };
    kinds.into_iter().map(|k| ExperimentConfig::resolve(k, file.as_ref(), &flags)).collect()
}

fn summarize(record: &AggregateRecord) {
    println!("{} ({}, {} layers)", record.config.experiment, record.cost, record.num_layers);
    for r in &record.results {
        let avg = r.average_history.last().copied().unwrap_or(f64::NAN);
        let flag = if r.failed { "  numerical abort" } else { "" };
        println!(
            "  {:<6} best {:.3e} (seed {})  average {:.3e}{flag}",
            r.optimizer,
            r.best.final_cost(),
            r.best.seed.unwrap_or_default(),
            avg
        );
    }
    if let Some(floor) = record.matrix_distance_floor {
        println!("  phase floor of the matrix distance: {floor:.4e}");
    }
    for h in &record.histograms {
        let mut f: Vec<f64> = h.samples.iter().map(|s| s.fidelity).collect();
        f.sort_by(f64::total_cmp);
        println!("  {:<6} histogram: median fidelity {:.10}, min {:.10}", h.optimizer, f[f.len() / 2], f[0]);
    }
}

fn run(args: &RunArgs, allowed: &[ExperimentKind], run_all: bool) -> Result<()> {
    let mut aborted = Vec::new();
    for config in configs(args, allowed, run_all)? {
        let dir = output_dir(config.output_dir.as_deref());
        let record = run_experiment(&config)?;
        summarize(&record);
        let files = export_all(&record, &dir)?;
        println!("  wrote {}", files.json.display());
        if record.failed {
            aborted.push(config.experiment.to_string());
        }
    }
    if aborted.is_empty() {
        Ok(())
    } else {
        Err(BenchError::NumericalAbort(format!("runs aborted in {}", aborted.join(", "))))
    }
}

fn qasm(args: &QasmArgs) -> Result<()> {
    let record = read_record(&args.record)?;
    let result = record
        .result(&args.optimizer)
        .ok_or_else(|| BenchError::Config(format!("record has no results for '{}'", args.optimizer)))?;
    let template = CircuitTemplate::new(record.config.num_qubits, record.num_layers, record.config.entangler)?;
    let path = args.out.clone().unwrap_or_else(|| {
        let dir = args.record.parent().unwrap_or(Path::new("."));
        dir.join(format!("{}_{}.qasm", record.config.experiment, args.optimizer))
    });
    export_qasm(&template, &result.best.final_params, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    use ExperimentKind::*;
    let outcome = match &cli.command {
        Command::PrepareState(a) => run(a, &[GhzPrep, WPrep], false),
        Command::CompileUnitary(a) => run(a, &[QftFrobenius, QftMatrixDistance], false),
        Command::Bench(a) => run(a, &ExperimentKind::ALL, true),
        Command::ExportQasm(a) => qasm(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
