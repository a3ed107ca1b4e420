//! Experiment configuration, read from JSON or flat `key = value` text.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expressivity::Tolerance;
use crate::gnn::{Activation, ModelConfig, TrainConfig, Variant};
use crate::graph::synthetic::{
    mutag_like, swapped_label_dataset, trees_vs_unicyclic, triangle_vs_path,
};
use crate::graph::{parse_tudataset, Dataset, SplitFractions, DEFAULT_NODE_CAP};
use crate::par::Parallelism;
use crate::pruning::MaskMode;

/// Winning-ticket degradation measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TicketRule {
    /// `(A_clean - A_post) / A_clean < threshold`.
    #[default]
    Relative,
    /// `A_clean - A_post < threshold`.
    Absolute,
}

impl TicketRule {
    pub fn is_winning(self, a_clean: f64, a_post: f64, threshold: f64) -> bool {
        let drop = a_clean - a_post;
        match self {
            // a dense twin at zero accuracy cannot be degraded
            TicketRule::Relative if a_clean <= 0.0 => true,
            TicketRule::Relative => drop / a_clean < threshold,
            TicketRule::Absolute => drop < threshold,
        }
    }
}

/// Where a sweep dataset comes from.
///
/// Text form: `name[:count]` for generated sets (`mutag_like`,
/// `trees_vs_unicyclic`, `triangle_vs_path`, `swapped_labels`) or
/// `tu:<dir>/<NAME>[:count]` for a TUDataset stored as `<dir>/NAME_*.txt`
/// or `<dir>/NAME/NAME_*.txt`. `count` caps the
/// number of graphs, taking a seeded subset for TUDatasets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec(pub String);

impl DatasetSpec {
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        let (body, count) = match self.0.rsplit_once(':') {
            Some((b, c)) if !c.is_empty() && c.bytes().all(|x| x.is_ascii_digit()) => (
                b,
                Some(
                    c.parse::<usize>()
                        .map_err(|e| Error::Config(e.to_string()))?,
                ),
            ),
            _ => (self.0.as_str(), None),
        };
        if let Some(path) = body.strip_prefix("tu:") {
            let path = PathBuf::from(path);
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .ok_or_else(|| {
                    Error::Config(format!("dataset path `{}` has no name", path.display()))
                })?
                .to_string();
            // both `<dir>/NAME_A.txt` and the usual download layout `<dir>/NAME/NAME_A.txt`
            let root = if path.join(format!("{name}_A.txt")).is_file() {
                path.clone()
            } else {
                path.parent().map(Path::to_path_buf).unwrap_or_default()
            };
            let full = parse_tudataset(root, &name)?;
            return Ok(match count {
                Some(c) if c < full.len() => {
                    let mut idx: Vec<usize> = (0..full.len()).collect();
                    crate::tensor::Rng::new(seed, 0x5B5E7).shuffle(&mut idx);
                    idx.truncate(c);
                    idx.sort_unstable();
                    full.subset(&idx).renamed(format!("{name}:{c}"))
                }
                _ => full,
            });
        }
        let ds = match body {
            "mutag_like" => mutag_like(count.unwrap_or(188), seed),
            "trees_vs_unicyclic" => trees_vs_unicyclic(count.unwrap_or(100), seed),
            "triangle_vs_path" => triangle_vs_path(count.unwrap_or(20)),
            "swapped_labels" => swapped_label_dataset(count.unwrap_or(20)),
            other => return Err(Error::Config(format!("unknown dataset `{other}`"))),
        };
        Ok(ds.renamed(self.0.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    /// Seed for generated datasets and TUDataset subsets.
    pub data_seed: u64,
    pub variant: Variant,
    /// Message-passing depth.
    pub layers: usize,
    /// Defaults to the dataset's feature dimension.
    pub hidden_dim: Option<usize>,
    pub mlp_depth: usize,
    pub activation: Activation,
    pub train_epsilon: bool,
    pub rho_grid: Vec<f64>,
    pub mask_mode: MaskMode,
    pub seeds: usize,
    pub seed_offset: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub split: SplitFractions,
    pub split_seed: u64,
    pub ticket_threshold: f64,
    pub ticket_rule: TicketRule,
    pub tolerance: Tolerance,
    /// Node cap for exact isomorphism when grouping representatives.
    pub node_cap: usize,
    pub theta_grid: Vec<f64>,
    pub bucket_epsilon: f64,
    pub kappa_grid: Vec<f64>,
    pub parallelism: Parallelism,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: vec![
                DatasetSpec("mutag_like:100".into()),
                DatasetSpec("trees_vs_unicyclic:100".into()),
            ],
            data_seed: 0,
            variant: Variant::Gin,
            layers: 2,
            hidden_dim: None,
            mlp_depth: 2,
            activation: Activation::Relu,
            train_epsilon: true,
            rho_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            mask_mode: MaskMode::Bernoulli,
            seeds: 10,
            seed_offset: 0,
            epochs: 250,
            batch_size: 32,
            lr: 0.01,
            split: SplitFractions {
                train: 0.6,
                val: 0.1,
                test: 0.3,
            },
            split_seed: 0,
            ticket_threshold: 0.05,
            ticket_rule: TicketRule::Relative,
            tolerance: Tolerance::Relative,
            node_cap: DEFAULT_NODE_CAP,
            theta_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            bucket_epsilon: 0.05,
            kappa_grid: (1..=12).map(|j| j as f64 / 12.0).collect(),
            parallelism: Parallelism::Parallel,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse `{v}`: {e}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim().trim_start_matches('[').trim_end_matches(']');
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_num(key, x)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!(
            "{key}: expected a boolean, got `{other}`"
        ))),
    }
}

impl ExperimentConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "datasets" | "dataset" => {
                self.datasets = v
                    .trim_start_matches('[')
                    .trim_end_matches(']')
                    .split(',')
                    .map(|s| s.trim().trim_matches('"'))
                    .filter(|s| !s.is_empty())
                    .map(|s| DatasetSpec(s.to_string()))
                    .collect()
            }
            "data_seed" => self.data_seed = parse_num(key, v)?,
            "variant" | "model" => {
                self.variant = match v {
                    "gin" => Variant::Gin,
                    "gcn" => Variant::Gcn,
                    other => return Err(Error::Config(format!("unknown variant `{other}`"))),
                }
            }
            "layers" | "k" => self.layers = parse_num(key, v)?,
            "hidden_dim" => {
                self.hidden_dim = match v {
                    "" | "auto" | "null" => None,
                    _ => Some(parse_num(key, v)?),
                }
            }
            "mlp_depth" => self.mlp_depth = parse_num(key, v)?,
            "activation" => self.activation = Activation::parse(v)?,
            "train_epsilon" => self.train_epsilon = parse_bool(key, v)?,
            "rho_grid" => self.rho_grid = parse_list(key, v)?,
            "mask_mode" => {
                self.mask_mode = match v {
                    "bernoulli" => MaskMode::Bernoulli,
                    "fixed_count" | "fixed-count" => MaskMode::FixedCount,
                    other => return Err(Error::Config(format!("unknown mask mode `{other}`"))),
                }
            }
            "seeds" => self.seeds = parse_num(key, v)?,
            "seed_offset" => self.seed_offset = parse_num(key, v)?,
            "epochs" => self.epochs = parse_num(key, v)?,
            "batch_size" => self.batch_size = parse_num(key, v)?,
            "lr" => self.lr = parse_num(key, v)?,
            "split_train" => self.split.train = parse_num(key, v)?,
            "split_val" => self.split.val = parse_num(key, v)?,
            "split_test" => self.split.test = parse_num(key, v)?,
            "split_seed" => self.split_seed = parse_num(key, v)?,
            "ticket_threshold" => self.ticket_threshold = parse_num(key, v)?,
            "ticket_rule" => {
                self.ticket_rule = match v {
                    "relative" => TicketRule::Relative,
                    "absolute" => TicketRule::Absolute,
                    other => return Err(Error::Config(format!("unknown ticket rule `{other}`"))),
                }
            }
            "tolerance" => self.tolerance = Tolerance::parse(v)?,
            "node_cap" => self.node_cap = parse_num(key, v)?,
            "theta_grid" => self.theta_grid = parse_list(key, v)?,
            "bucket_epsilon" => self.bucket_epsilon = parse_num(key, v)?,
            "kappa_grid" => self.kappa_grid = parse_list(key, v)?,
            "parallel" => {
                self.parallelism = if parse_bool(key, v)? {
                    Parallelism::Parallel
                } else {
                    Parallelism::Sequential
                }
            }
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a JSON object or `key = value` lines (`#` starts a comment).
    /// Both forms accept the same keys, applied over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        if text.trim_start().starts_with('{') {
            let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(text)
                .map_err(|e| Error::Config(format!("invalid JSON config: {e}")))?;
            for (k, v) in map {
                let text = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Null => "null".into(),
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|i| match i {
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                cfg.set(&k, &text)?;
            }
        } else {
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::Config(format!("line {}: expected `key = value`", n + 1))
                })?;
                cfg.set(k.trim(), v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.datasets.is_empty() {
            return bad("at least one dataset is required".into());
        }
        if !(2..=4).contains(&self.layers) {
            return bad(format!("layers must be 2, 3 or 4, got {}", self.layers));
        }
        if self.mlp_depth == 0 || self.hidden_dim == Some(0) {
            return bad("mlp_depth and hidden_dim must be positive".into());
        }
        if self.rho_grid.is_empty() || self.rho_grid.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad(format!(
                "rho_grid values must lie in [0, 1): {:?}",
                self.rho_grid
            ));
        }
        if self.seeds == 0 || self.epochs == 0 || self.batch_size == 0 {
            return bad("seeds, epochs and batch_size must be positive".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        self.split
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.ticket_threshold > 0.0 && self.ticket_threshold.is_finite()) {
            return bad("ticket_threshold must be positive".into());
        }
        if !(0.0..=0.5).contains(&self.bucket_epsilon) {
            return bad("bucket_epsilon must lie in [0, 0.5]".into());
        }
        let in_unit = |g: &[f64]| g.iter().all(|x| (0.0..=1.0).contains(x));
        if !in_unit(&self.theta_grid) || !in_unit(&self.kappa_grid) {
            return bad("theta_grid and kappa_grid values must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            lr: self.lr,
        }
    }

    pub fn model_config(&self, data: &Dataset) -> ModelConfig {
        let mut m = ModelConfig::new(
            self.variant,
            data.feature_dim(),
            self.layers,
            data.num_classes(),
        );
        m.hidden_dim = self.hidden_dim.unwrap_or(data.feature_dim());
        m.mlp_depth = self.mlp_depth;
        m.activation = self.activation;
        m.train_epsilon = self.train_epsilon;
        m
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64)
            .map(|s| s + self.seed_offset)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!((c.epochs, c.batch_size, c.lr), (250, 32, 0.01));
        assert_eq!(c.rho_grid.len(), 9);
        assert_eq!(c.kappa_grid.len(), 12);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn both_formats_agree() {
        let kv = "# sweep\nvariant = gcn\nlayers = 3\nrho_grid = 0.2, 0.4\nactivation = leaky_relu\nhidden_dim = 16\ndatasets = triangle_vs_path:5\nparallel = false\n";
        let json = r#"{"variant": "gcn", "layers": 3, "rho_grid": [0.2, 0.4], "activation": "leaky_relu",
                      "hidden_dim": 16, "datasets": ["triangle_vs_path:5"], "parallel": false}"#;
        let a = ExperimentConfig::parse(kv).unwrap();
        let b = ExperimentConfig::parse(json).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rho_grid, vec![0.2, 0.4]);
        assert_eq!(a.hidden_dim, Some(16));
        assert_eq!(a.parallelism, Parallelism::Sequential);
    }

    #[test]
    fn errors_are_config_errors() {
        for bad in [
            "layers = 5",
            "nonsense = 1",
            "rho_grid = 1.0",
            "lr = -1",
            "variant = gat",
            "just text",
            "{\"seeds\": 0}",
        ] {
            assert!(
                matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn ticket_rules() {
        assert!(TicketRule::Relative.is_winning(0.8, 0.77, 0.05));
        assert!(!TicketRule::Relative.is_winning(0.8, 0.76, 0.05));
        assert!(TicketRule::Relative.is_winning(0.8, 0.9, 0.05));
        assert!(TicketRule::Absolute.is_winning(0.8, 0.76, 0.05));
        assert!(TicketRule::Relative.is_winning(0.0, 0.0, 0.05));
    }

    #[test]
    fn dataset_specs() {
        let d = DatasetSpec("triangle_vs_path:3".into()).load(0).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.name(), "triangle_vs_path:3");
        assert!(DatasetSpec("cora".into()).load(0).is_err());
        assert!(matches!(
            DatasetSpec("tu:/nonexistent/MUTAG".into()).load(0),
            Err(Error::MissingFile(_))
        ));
    }
}
