//! Command-line driver for pruning sweeps and expressivity diagnostics.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use wlticket::expressivity::{measure_tau, BoundReport, TauOptions, Tolerance};
use wlticket::gnn::{
    evaluate, load_checkpoint, save_checkpoint, train, Activation, GnnModel, Variant,
};
use wlticket::graph::{sifdg_pairs, Dataset, DEFAULT_NODE_CAP};
use wlticket::harness::{
    emit_reports, read_runs, resume_sweep, write_timings, DatasetSpec, ExperimentConfig,
    PreparedDataset,
};
use wlticket::pruning::{injectivity_preserving_sparsify, SparsifyConfig};
use wlticket::tensor::Rng;
use wlticket::wl::isomorphism_type_representatives;
use wlticket::{Error, Parallelism};

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Expressivity-aware lottery-ticket experiments for graph neural networks.
///
/// Datasets are given as `tu:<dir>/<NAME>[:count]` for a TUDataset directory
/// or as a generated set: `mutag_like[:count]`, `trees_vs_unicyclic[:count]`,
/// `triangle_vs_path[:copies]`, `swapped_labels[:copies]`.
#[derive(Parser)]
#[command(name = "wlticket", version)]
struct Cli {
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pruning sweep and write runs.csv, timings.csv and the reports.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Skip cells already present in <out>/runs.csv.
        #[arg(long)]
        resume: bool,
    },
    /// Injectivity probabilities for a pruned layer and the widths they need.
    Bounds {
        /// Number of distinct layer inputs.
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        rho: f64,
        /// Minimum nonzero components of any input difference.
        #[arg(long)]
        k: usize,
        /// Layer width.
        #[arg(long)]
        m: usize,
        /// Target probability; reports the width that reaches it.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 2)]
        mlp_layers: usize,
        #[arg(long, default_value_t = 2)]
        mp_layers: usize,
        /// Dataset size for the whole-network bound.
        #[arg(long)]
        dataset_size: Option<usize>,
    },
    /// Expressivity of a saved model on a dataset.
    Tau {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value = "relative")]
        tolerance: String,
        /// Compare node-embedding multisets instead of graph sums.
        #[arg(long)]
        node_multiset: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
    },
    /// Structurally isomorphic graph pairs with divergent node features.
    Sifdg {
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
    },
    /// Prune layer by layer while keeping every layer injective on the data.
    Sparsify {
        #[arg(long)]
        dataset: String,
        #[arg(long, default_value_t = 0.1)]
        rho_step: f64,
        #[arg(long, default_value_t = 20)]
        k_trials: usize,
        #[arg(long, default_value_t = 0.9)]
        max_sparsity: f64,
        /// Start from a saved model instead of a fresh initialization.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        /// Write the masked model here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the aggregate reports from a runs.csv.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bucket and kappa grids; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train a dense model and save it as a checkpoint.
    Train {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 250)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
    },
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, default_value = "gin")]
    variant: String,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Defaults to the feature dimension.
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long, default_value = "relu")]
    activation: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn build(&self, data: &Dataset) -> wlticket::Result<GnnModel> {
        let variant = match self.variant.as_str() {
            "gin" => Variant::Gin,
            "gcn" => Variant::Gcn,
            other => return Err(Error::Config(format!("unknown variant `{other}`"))),
        };
        let mut cfg = wlticket::gnn::ModelConfig::new(
            variant,
            data.feature_dim(),
            self.layers,
            data.num_classes(),
        );
        cfg.hidden_dim = self.hidden_dim.unwrap_or(data.feature_dim());
        cfg.activation = Activation::parse(&self.activation)?;
        GnnModel::new(cfg, &mut Rng::new(self.seed, 0))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Domain(_)
        | Error::PathCapExceeded { .. }
        | Error::Undefined(_) => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn load(spec: &str) -> wlticket::Result<Dataset> {
    DatasetSpec(spec.to_string()).load(0)
}

fn run(cli: Cli) -> wlticket::Result<u8> {
    let mode = if cli.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    };
    match cli.command {
        Command::Sweep {
            config,
            out,
            resume,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config).map_err(|e| match e {
                Error::MissingFile(p) => {
                    Error::Config(format!("config file {} not found", p.display()))
                }
                other => other,
            })?;
            if cli.sequential {
                cfg.parallelism = Parallelism::Sequential;
            }
            let datasets = cfg
                .datasets
                .iter()
                .map(|spec| PreparedDataset::new(spec.load(cfg.data_seed)?, &cfg))
                .collect::<wlticket::Result<Vec<_>>>()?;
            let runs_path = out.join("runs.csv");
            let done = if resume && runs_path.exists() {
                read_runs(&runs_path)?
            } else {
                Vec::new()
            };
            let outcome = resume_sweep(&cfg, &datasets, &done);
            emit_reports(&outcome.records, &cfg, &out)?;
            write_timings(&outcome.records, out.join("timings.csv"))?;
            log::info!(
                "{} runs written to {}",
                outcome.records.len(),
                out.display()
            );
            if outcome.failures.is_empty() {
                Ok(0)
            } else {
                for f in &outcome.failures {
                    eprintln!(
                        "failed: {} rho={} seed={}: {}",
                        f.dataset, f.rho, f.seed, f.error
                    );
                }
                Ok(EXIT_PARTIAL)
            }
        }
        Command::Bounds {
            n,
            rho,
            k,
            m,
            gamma,
            mlp_layers,
            mp_layers,
            dataset_size,
        } => {
            let report =
                BoundReport::compute(n, rho, k, m, mlp_layers, mp_layers, dataset_size, gamma)?;
            print_json(&serde_json::to_value(report)?);
            Ok(0)
        }
        Command::Tau {
            checkpoint,
            dataset,
            tolerance,
            node_multiset,
            node_cap,
        } => {
            let model = load_checkpoint(&checkpoint)?;
            let data = load(&dataset)?;
            if data.feature_dim() != model.config().input_dim {
                return Err(Error::InvalidDataset(format!(
                    "dataset has {} features, model expects {}",
                    data.feature_dim(),
                    model.config().input_dim
                )));
            }
            let types =
                isomorphism_type_representatives(&data, model.config().layers, node_cap, mode);
            let options = TauOptions {
                tolerance: Tolerance::parse(&tolerance)?,
                node_multiset,
            };
            let report = measure_tau(&model, &data, &types.representatives, options, mode)?;
            print_json(&json!({
                "tau": report.tau,
                "representatives": report.representatives.len(),
                "distinguishable": report.distinguishable_count,
                "indistinguishable_pairs": report.indistinguishable_pairs,
                "approximate_types": types.any_approximate(),
                "epsilon": report.epsilon,
                "tolerance": report.tolerance,
                "node_multiset": report.node_multiset,
            }));
            Ok(0)
        }
        Command::Sifdg { dataset, node_cap } => {
            let data = load(&dataset)?;
            let report = sifdg_pairs(&data, node_cap);
            print_json(&json!({
                "pairs": report.pairs.len(),
                "skipped": report.skipped,
                "witnesses": report.pairs,
            }));
            Ok(0)
        }
        Command::Sparsify {
            dataset,
            rho_step,
            k_trials,
            max_sparsity,
            checkpoint,
            model,
            out,
        } => {
            let data = load(&dataset)?;
            let net = match checkpoint {
                Some(p) => load_checkpoint(p)?,
                None => model.build(&data)?,
            };
            let cfg = SparsifyConfig {
                rho_step,
                k_trials,
                max_sparsity,
                ..Default::default()
            };
            let result =
                injectivity_preserving_sparsify(&net, &data, &cfg, &mut Rng::new(model.seed, 1))?;
            if let Some(path) = out {
                let mut pruned = net.clone();
                pruned.set_masks(&result.masks.layers)?;
                save_checkpoint(&pruned, path)?;
            }
            print_json(&json!({
                "sparsity": result.sparsity,
                "layer_sparsity": result.layer_sparsity,
            }));
            Ok(0)
        }
        Command::Report { runs, out, config } => {
            let cfg = match config {
                Some(p) => ExperimentConfig::from_file(p)?,
                None => ExperimentConfig::default(),
            };
            let records = read_runs(&runs)?;
            emit_reports(&records, &cfg, &out)?;
            Ok(0)
        }
        Command::Train {
            dataset,
            out,
            model,
            epochs,
            batch_size,
            lr,
        } => {
            let data = load(&dataset)?;
            let mut net = model.build(&data)?;
            let tc = wlticket::gnn::TrainConfig {
                epochs,
                batch_size,
                lr,
            };
            let losses = train(&mut net, &data, &tc, Rng::new(model.seed, 2))?;
            save_checkpoint(&net, &out)?;
            print_json(&json!({
                "final_loss": losses.last(),
                "train_accuracy": evaluate(&net, &data)?,
            }));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
