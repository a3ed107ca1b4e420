use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Mask, Rng};

/// How zeros are placed by [`random_mask`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Each coordinate is zeroed independently with probability rho.
    #[default]
    Bernoulli,
    /// Exactly `ceil(rho * n)` zeros per matrix, uniformly placed.
    /// Lower variance; not the canonical scheme.
    FixedCount,
}

/// One mask per MLP layer of every message-passing layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    pub layers: Vec<Vec<Mask>>,
}

const MAGIC: &[u8; 4] = b"WLMS";
const VERSION: u32 = 1;

impl MaskSet {
    pub fn ones(shapes: &[Vec<(usize, usize)>]) -> Self {
        Self {
            layers: shapes
                .iter()
                .map(|l| l.iter().map(|&(r, c)| Mask::ones(r, c)).collect())
                .collect(),
        }
    }

    pub fn shapes(&self) -> Vec<Vec<(usize, usize)>> {
        self.layers
            .iter()
            .map(|l| l.iter().map(Mask::shape).collect())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.layers.iter().flatten().map(Mask::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zeros(&self) -> usize {
        self.layers.iter().flatten().map(Mask::count_zeros).sum()
    }

    /// Realized fraction of pruned coordinates.
    pub fn sparsity(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.zeros() as f64 / self.len() as f64
        }
    }

    /// `WLMS`, version, layer counts and shapes (all u32 little-endian),
    /// then each mask bit-packed MSB first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend(VERSION.to_le_bytes());
        out.extend((self.layers.len() as u32).to_le_bytes());
        for layer in &self.layers {
            out.extend((layer.len() as u32).to_le_bytes());
            for m in layer {
                let (r, c) = m.shape();
                out.extend((r as u32).to_le_bytes());
                out.extend((c as u32).to_le_bytes());
                out.extend(m.to_packed());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(4)? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.word()?;
        if version != VERSION as usize {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let n_layers = r.word()?;
        let mut layers = Vec::new();
        for _ in 0..n_layers {
            let n = r.word()?;
            let mut masks = Vec::new();
            for _ in 0..n {
                let (rows, cols) = (r.word()?, r.word()?);
                let packed = r.take((rows * cols).div_ceil(8))?;
                masks.push(Mask::from_packed(rows, cols, packed)?);
            }
            layers.push(masks);
        }
        if r.at != bytes.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(Self { layers })
    }
}

fn corrupt(msg: &str) -> Error {
    Error::Checkpoint(format!("mask set: {msg}"))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self
            .bytes
            .get(self.at..self.at + n)
            .ok_or_else(|| corrupt("truncated"))?;
        self.at += n;
        Ok(s)
    }

    fn word(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
}

/// Random mask for the given layer shapes; `0 <= rho < 1`.
pub fn random_mask(
    shapes: &[Vec<(usize, usize)>],
    rho: f64,
    mode: MaskMode,
    rng: &mut Rng,
) -> Result<MaskSet> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Domain(format!("pruning ratio {rho} outside [0, 1)")));
    }
    let layers = shapes
        .iter()
        .map(|l| {
            l.iter()
                .map(|&(r, c)| match mode {
                    MaskMode::Bernoulli => Mask::from_fn(r, c, |_, _| !rng.bernoulli(rho)),
                    MaskMode::FixedCount => {
                        let n = r * c;
                        let zeros = ((rho * n as f64).ceil() as usize).min(n);
                        let mut idx: Vec<usize> = (0..n).collect();
                        rng.shuffle(&mut idx);
                        let mut bits = vec![true; n];
                        for &i in &idx[..zeros] {
                            bits[i] = false;
                        }
                        Mask::from_bits(r, c, bits).expect("length matches")
                    }
                })
                .collect()
        })
        .collect();
    Ok(MaskSet { layers })
}
