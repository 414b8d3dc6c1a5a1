//! One-step training pairs, 24-hour blocks, the chronological train/test
//! split, and min-max scaling.

use serde::{Deserialize, Serialize};

/// Pairs per block: one day of hourly readings.
pub const BLOCK_HOURS: usize = 24;

/// Fraction of blocks assigned to training.
pub const DEFAULT_SPLIT_RATIO: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("series has {0} values; at least 2 are needed to form a pair")]
    SeriesTooShort(usize),
    #[error("block needs exactly {BLOCK_HOURS} pairs, got {0}")]
    BlockLength(usize),
    #[error("pair {0} is not chained to its successor (y != next x)")]
    BrokenChain(usize),
    #[error("pair {0} holds a non-finite value")]
    NonFinite(usize),
    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("no blocks to split")]
    NoBlocks,
    #[error("split of {total} blocks at ratio {ratio} leaves the {side} side empty")]
    EmptySide { total: usize, ratio: f64, side: &'static str },
    #[error("cannot fit scaler on an empty training set")]
    EmptyTrain,
    #[error("degenerate scaler range: every training value equals {0}")]
    DegenerateRange(f64),
}

/// Input reading and the reading one hour later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePair {
    pub x: f64,
    pub y: f64,
}

/// Twenty-four consecutive, chained pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DayBlock {
    pairs: [SamplePair; BLOCK_HOURS],
}

impl DayBlock {
    pub fn new(pairs: &[SamplePair]) -> Result<Self, DatasetError> {
        let pairs: [SamplePair; BLOCK_HOURS] = pairs.try_into().map_err(|_| DatasetError::BlockLength(pairs.len()))?;
        if let Some(i) = pairs.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(DatasetError::NonFinite(i));
        }
        if let Some(i) = pairs.windows(2).position(|w| w[0].y != w[1].x) {
            return Err(DatasetError::BrokenChain(i));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[SamplePair] {
        &self.pairs
    }

    pub fn inputs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.x).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.y).collect()
    }

    /// Applies `f` to every value. A strictly monotone `f` keeps the chain
    /// intact because equal inputs map to equal outputs.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { pairs: self.pairs.map(|p| SamplePair { x: f(p.x), y: f(p.y) }) }
    }
}

/// Blocks plus the number of trailing pairs that did not fill a block.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub blocks: Vec<DayBlock>,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset {
    pub train: Vec<DayBlock>,
    pub test: Vec<DayBlock>,
    pub split_ratio: f64,
}

impl SplitDataset {
    pub fn scaled(&self, scaler: &Scaler) -> Self {
        let scale = |blocks: &[DayBlock]| blocks.iter().map(|b| b.map(|v| scaler.scale(v))).collect();
        Self { train: scale(&self.train), test: scale(&self.test), split_ratio: self.split_ratio }
    }

    /// Index of the first test block within the unsplit block sequence.
    pub fn test_offset(&self) -> usize {
        self.train.len()
    }
}

/// Pairs each reading with its successor: `pair[i] = (values[i], values[i + 1])`.
pub fn make_pairs(values: &[f64]) -> Result<Vec<SamplePair>, DatasetError> {
    if values.len() < 2 {
        return Err(DatasetError::SeriesTooShort(values.len()));
    }
    Ok(values.windows(2).map(|w| SamplePair { x: w[0], y: w[1] }).collect())
}

/// Cuts pairs into consecutive 24-pair blocks, dropping the incomplete tail.
pub fn group_blocks(pairs: &[SamplePair]) -> Result<Blocks, DatasetError> {
    let chunks = pairs.chunks_exact(BLOCK_HOURS);
    let dropped = chunks.remainder().len();
    let blocks = chunks.map(DayBlock::new).collect::<Result<Vec<_>, _>>()?;
    Ok(Blocks { blocks, dropped })
}

/// First `floor(ratio * n)` blocks train, the rest test.
pub fn split_dataset(blocks: &[DayBlock], ratio: f64) -> Result<SplitDataset, DatasetError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DatasetError::InvalidRatio(ratio));
    }
    if blocks.is_empty() {
        return Err(DatasetError::NoBlocks);
    }
    let total = blocks.len();
    let n_train = (ratio * total as f64).floor() as usize;
    // floor(ratio * n) < n for ratio < 1, so only the train side can come up empty
    if n_train == 0 {
        return Err(DatasetError::EmptySide { total, ratio, side: "train" });
    }
    Ok(SplitDataset { train: blocks[..n_train].to_vec(), test: blocks[n_train..].to_vec(), split_ratio: ratio })
}

/// Pairs, blocks, and splits a series in one go. Also returns the number of
/// trailing pairs dropped.
pub fn prepare_split(values: &[f64], ratio: f64) -> Result<(SplitDataset, usize), DatasetError> {
    let pairs = make_pairs(values)?;
    let Blocks { blocks, dropped } = group_blocks(&pairs)?;
    Ok((split_dataset(&blocks, ratio)?, dropped))
}

/// Min-max map from °C onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: f64,
    pub max: f64,
}

impl Scaler {
    pub fn new(min: f64, max: f64) -> Result<Self, DatasetError> {
        if max > min && min.is_finite() && max.is_finite() {
            Ok(Self { min, max })
        } else {
            Err(DatasetError::DegenerateRange(min))
        }
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn scale(&self, v: f64) -> f64 {
        (v - self.min) / self.range()
    }

    pub fn invert_scale(&self, s: f64) -> f64 {
        s * self.range() + self.min
    }
}

/// Fits the scaler on training blocks only.
pub fn fit_scaler(train: &[DayBlock]) -> Result<Scaler, DatasetError> {
    let (min, max) = train
        .iter()
        .flat_map(|b| b.pairs().iter().flat_map(|p| [p.x, p.y]))
        .fold(None, |acc: Option<(f64, f64)>, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .ok_or(DatasetError::EmptyTrain)?;
    if max == min {
        return Err(DatasetError::DegenerateRange(min));
    }
    Scaler::new(min, max)
}
