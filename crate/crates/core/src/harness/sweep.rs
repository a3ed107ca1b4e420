//! Cells of a pruning sweep: one (dataset, rho, seed) triple each.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::expressivity::{measure_tau, TauOptions};
use crate::gnn::{evaluate, train, GnnModel, ModelConfig};
use crate::graph::{split_indices, Dataset};
use crate::par::{map_slice, Parallelism};
use crate::pruning::random_mask;
use crate::tensor::Rng;
use crate::wl::isomorphism_type_representatives;

const INIT_STREAM: u64 = 0x1417;
const TRAIN_STREAM: u64 = 0x7A11;
const MASK_STREAM: u64 = 0x3A5C_0000_0000;

/// One experiment outcome. `wall_time_ms` is not written to `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub seed: u64,
    pub rho_nominal: f64,
    pub rho_realized: f64,
    pub tau_pre: f64,
    pub tau_post: f64,
    /// Test accuracy of the dense twin.
    pub a_clean: f64,
    /// Test accuracy of the trained pruned model.
    pub a_post: f64,
    pub winning_ticket: bool,
    /// Isomorphism-type representatives that tau is measured over.
    pub representatives: usize,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub dataset: String,
    pub rho: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    /// Sorted by (dataset, rho, seed).
    pub records: Vec<RunRecord>,
    pub failures: Vec<CellFailure>,
}

/// A dataset with its split, representatives and model shape, shared by
/// every cell on it.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub data: Dataset,
    pub train: Dataset,
    pub test: Dataset,
    pub representatives: Vec<usize>,
    pub model: ModelConfig,
}

impl PreparedDataset {
    pub fn new(data: Dataset, config: &ExperimentConfig) -> Result<Self> {
        data.check_nontrivial()?;
        let (train, _val, test) = split_indices(&data, config.split, config.split_seed)?;
        let types = isomorphism_type_representatives(
            &data,
            config.layers,
            config.node_cap,
            config.parallelism,
        );
        if types.any_approximate() {
            log::warn!(
                "{}: graphs above {} nodes grouped by WL equivalence only",
                data.name(),
                config.node_cap
            );
        }
        let model = config.model_config(&data);
        model.validate()?;
        Ok(Self {
            train: data.subset(&train),
            test: data.subset(&test),
            representatives: types.representatives,
            model,
            data,
        })
    }

    pub fn name(&self) -> &str {
        self.data.name()
    }
}

fn mask_stream(rho: f64) -> u64 {
    MASK_STREAM + (rho * 1e6).round() as u64
}

fn tau(model: &GnnModel, prep: &PreparedDataset, config: &ExperimentConfig) -> Result<f64> {
    let options = TauOptions {
        tolerance: config.tolerance,
        node_multiset: false,
    };
    Ok(measure_tau(
        model,
        &prep.data,
        &prep.representatives,
        options,
        Parallelism::Sequential,
    )?
    .tau)
}

/// Trained dense twin: accuracy and tau after training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseTwin {
    pub a_clean: f64,
    pub tau_pre: f64,
    pub tau_post: f64,
}

fn dense_twin(prep: &PreparedDataset, config: &ExperimentConfig, seed: u64) -> Result<DenseTwin> {
    let mut model = GnnModel::new(prep.model.clone(), &mut Rng::new(seed, INIT_STREAM))?;
    let tau_pre = tau(&model, prep, config)?;
    train(
        &mut model,
        &prep.train,
        &config.train_config(),
        Rng::new(seed, TRAIN_STREAM),
    )?;
    Ok(DenseTwin {
        a_clean: evaluate(&model, &prep.test)?,
        tau_pre,
        tau_post: tau(&model, prep, config)?,
    })
}

/// Runs one cell. The pruned model shares the twin's initialization and
/// mini-batch order, so only the mask differs.
pub fn run_cell(
    prep: &PreparedDataset,
    config: &ExperimentConfig,
    rho: f64,
    seed: u64,
    twin: &DenseTwin,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut model = GnnModel::new(prep.model.clone(), &mut Rng::new(seed, INIT_STREAM))?;
    let masks = random_mask(
        &prep.model.mlp_shapes(),
        rho,
        config.mask_mode,
        &mut Rng::new(seed, mask_stream(rho)),
    )?;
    let rho_realized = masks.sparsity();
    let (tau_pre, tau_post, a_post) = if rho_realized == 0.0 {
        (twin.tau_pre, twin.tau_post, twin.a_clean)
    } else {
        model.set_masks(&masks.layers)?;
        let tau_pre = tau(&model, prep, config)?;
        train(
            &mut model,
            &prep.train,
            &config.train_config(),
            Rng::new(seed, TRAIN_STREAM),
        )?;
        (
            tau_pre,
            tau(&model, prep, config)?,
            evaluate(&model, &prep.test)?,
        )
    };
    Ok(RunRecord {
        dataset: prep.name().to_string(),
        seed,
        rho_nominal: rho,
        rho_realized,
        tau_pre,
        tau_post,
        a_clean: twin.a_clean,
        a_post,
        winning_ticket: config.ticket_rule.is_winning(
            twin.a_clean,
            a_post,
            config.ticket_threshold,
        ),
        representatives: prep.representatives.len(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        a.dataset
            .cmp(&b.dataset)
            .then(a.rho_nominal.total_cmp(&b.rho_nominal))
            .then(a.seed.cmp(&b.seed))
    });
}

/// Runs every (dataset, rho, seed) cell not already present in `done`, and
/// returns the union sorted by (dataset, rho, seed). Cells are pure
/// functions of their coordinates, so resuming from a partial `runs.csv`
/// gives the same result as an uninterrupted run.
pub fn resume_sweep(
    config: &ExperimentConfig,
    datasets: &[PreparedDataset],
    done: &[RunRecord],
) -> SweepOutcome {
    let seeds = config.seed_list();
    let is_done = |name: &str, rho: f64, seed: u64| {
        done.iter()
            .any(|r| r.dataset == name && r.seed == seed && (r.rho_nominal - rho).abs() < 1e-12)
    };
    let mut cells = Vec::new();
    for (d, prep) in datasets.iter().enumerate() {
        for &rho in &config.rho_grid {
            for &seed in &seeds {
                if !is_done(prep.name(), rho, seed) {
                    cells.push((d, rho, seed));
                }
            }
        }
    }
    let mut twin_keys: Vec<(usize, u64)> = cells.iter().map(|&(d, _, s)| (d, s)).collect();
    twin_keys.sort_unstable();
    twin_keys.dedup();
    let twins = map_slice(&twin_keys, config.parallelism, |&(d, seed)| {
        dense_twin(&datasets[d], config, seed)
    });
    let twin_of = |d: usize, seed: u64| {
        let i = twin_keys
            .binary_search(&(d, seed))
            .expect("twin computed for every cell");
        &twins[i]
    };
    let results = map_slice(
        &cells,
        config.parallelism,
        |&(d, rho, seed)| match twin_of(d, seed) {
            Ok(twin) => run_cell(&datasets[d], config, rho, seed, twin),
            Err(e) => Err(crate::Error::Config(format!("dense twin failed: {e}"))),
        },
    );

    let mut out = SweepOutcome {
        records: done.to_vec(),
        failures: Vec::new(),
    };
    for (&(d, rho, seed), result) in cells.iter().zip(results) {
        match result {
            Ok(r) => out.records.push(r),
            Err(e) => {
                log::error!(
                    "cell {} rho={rho} seed={seed} failed: {e}",
                    datasets[d].name()
                );
                out.failures.push(CellFailure {
                    dataset: datasets[d].name().to_string(),
                    rho,
                    seed,
                    error: e.to_string(),
                });
            }
        }
    }
    sort_records(&mut out.records);
    out
}

/// Loads and prepares the configured datasets, then runs the full sweep.
/// Dataset errors abort; per-cell errors are collected as failures.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let datasets = config
        .datasets
        .iter()
        .map(|spec| PreparedDataset::new(spec.load(config.data_seed)?, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(resume_sweep(config, &datasets, &[]))
}
