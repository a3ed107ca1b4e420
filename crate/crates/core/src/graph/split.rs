use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::tensor::Rng;

const SPLIT_STREAM: u64 = 0x5911_7000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Domain(format!(
                "split fractions must be positive: {self:?}"
            )));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "split fractions must sum to 1: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Stratified, seeded partition of graph indices into (train, val, test).
///
/// Validation and test sizes are `floor(N * fraction)`; the remainder goes to
/// training. Each class is shuffled separately and the classes are
/// interleaved by relative rank, so every prefix of the combined order is
/// close to the class proportions. Indices inside each part are ascending.
pub fn split_indices(
    dataset: &Dataset,
    fractions: SplitFractions,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    fractions.validate()?;
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidDataset(
            "cannot split an empty dataset".into(),
        ));
    }
    let n_val = (n as f64 * fractions.val + 1e-9).floor() as usize;
    let n_test = (n as f64 * fractions.test + 1e-9).floor() as usize;

    let mut rng = Rng::new(seed, SPLIT_STREAM);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes()];
    for (i, g) in dataset.graphs().iter().enumerate() {
        by_class[g.label()].push(i);
    }
    let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    for (class, members) in by_class.iter_mut().enumerate() {
        rng.shuffle(members);
        let size = members.len() as f64;
        for (pos, &idx) in members.iter().enumerate() {
            keyed.push(((pos as f64 + 0.5) / size, class, idx));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = keyed.into_iter().map(|(_, _, i)| i).collect();

    let mut val = order[..n_val].to_vec();
    let mut test = order[n_val..n_val + n_test].to_vec();
    let mut train = order[n_val + n_test..].to_vec();
    val.sort_unstable();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, val, test))
}

pub fn split(
    dataset: &Dataset,
    fractions: SplitFractions,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let (train, val, test) = split_indices(dataset, fractions, seed)?;
    Ok((
        dataset.subset(&train),
        dataset.subset(&val),
        dataset.subset(&test),
    ))
}
