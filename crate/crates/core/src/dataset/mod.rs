//! Labeled datasets and the seeded operations applied to them before
//! training: min-max scaling, train/test splits, label noise, k-fold
//! partitions and synthetic generators.
//!
//! All randomness flows through an explicit `seed`; every operation here is
//! a pure function of its inputs.

mod synth;

pub use synth::{generate_crossplane, generate_ndc};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Binary class label, stored as the real values `+1` / `-1` in every
/// numerical routine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub const fn value(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub const fn flipped(self) -> Label {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }

    /// `+1` for non-negative scores, `-1` otherwise.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = String;
    fn try_from(v: i8) -> core::result::Result<Self, String> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(alloc::format!("label must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pos => "1",
            Label::Neg => "-1",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    /// Columns rescaled with ranges fitted on this dataset; all values in `[0, 1]`.
    MinMax,
    /// Columns rescaled with ranges fitted on another dataset (test data).
    MinMaxFitted,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub normalization: Normalization,
    pub noise_rate: Option<f64>,
    pub seed: Option<u64>,
}

impl DatasetMeta {
    pub fn named(source: impl Into<String>) -> Self {
        DatasetMeta { source: source.into(), ..Default::default() }
    }
}

/// `n` samples by `m` attributes with a `±1` label per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Vec<Label>,
    meta: DatasetMeta,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Vec<Label>, meta: DatasetMeta) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InvalidDataset("dataset needs at least one row and one column".into()));
        }
        if features.nrows() != labels.len() {
            return Err(Error::InvalidDataset(alloc::format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "dataset features" });
        }
        Ok(Dataset { features, labels, meta })
    }

    /// Builds a dataset from row slices.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>, meta: DatasetMeta) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidDataset(alloc::format!("row {} has {} values, expected {m}", bad + 1, rows[bad].len())));
        }
        let features = DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
        Dataset::new(features, labels, meta)
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn m(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: DatasetMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Pos).count();
        (pos, self.labels.len() - pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (p, n) = self.class_counts();
        p > 0 && n > 0
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("row selection"));
        }
        let features = self.features.select_rows(rows);
        let labels = rows.iter().map(|&i| self.labels[i]).collect();
        Ok(Dataset { features, labels, meta: self.meta.clone() })
    }
}

/// Per-column affine map onto `[0, 1]`, fitted on one dataset and reusable
/// on another. Constant columns map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub ranges: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(d: &Dataset) -> Self {
        let cols = d.features.column_iter();
        let (mins, ranges) = cols
            .map(|c| {
                let lo = c.min();
                (lo, c.max() - lo)
            })
            .unzip();
        MinMaxScaler { mins, ranges }
    }

    pub fn transform_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mins.len(),
                found: x.ncols(),
                context: "min-max transform",
            });
        }
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            let r = self.ranges[j];
            if r > 0.0 {
                (x[(i, j)] - self.mins[j]) / r
            } else {
                0.0
            }
        }))
    }

    /// Applies ranges fitted elsewhere; values may fall outside `[0, 1]`.
    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        let features = self.transform_matrix(&d.features)?;
        let mut meta = d.meta.clone();
        meta.normalization = Normalization::MinMaxFitted;
        Dataset::new(features, d.labels.clone(), meta)
    }
}

/// Rescales every column of `d` onto `[0, 1]` using its own ranges.
pub fn normalize_minmax(d: &Dataset) -> Dataset {
    let scaler = MinMaxScaler::fit(d);
    let features = scaler.transform_matrix(&d.features).expect("scaler fitted on the same columns");
    let mut meta = d.meta.clone();
    meta.normalization = Normalization::MinMax;
    Dataset { features, labels: d.labels.clone(), meta }
}

/// `floor(rate * n)`, robust to the representation error of products such
/// as `0.7 * 10`.
pub fn floor_count(rate: f64, n: usize) -> usize {
    let x = rate * n as f64;
    let nearest = libm::round(x);
    if libm::fabs(x - nearest) <= 1e-9 * (1.0 + x) {
        nearest as usize
    } else {
        libm::floor(x) as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub ratio: f64,
    pub seed: u64,
}

/// Random train/test partition; the train side receives `floor(ratio * n)`
/// rows. Both sides keep the original relative row order.
pub fn split_train_test(d: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(invalid("ratio", alloc::format!("must lie strictly between 0 and 1, got {ratio}")));
    }
    let n = d.n();
    if n < 2 {
        return Err(Error::EmptyInput("split needs at least two rows"));
    }
    let n_train = floor_count(ratio, n);
    if n_train == 0 || n_train == n {
        return Err(invalid("ratio", alloc::format!("ratio {ratio} leaves an empty side for n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train_indices = order[..n_train].to_vec();
    let mut test_indices = order[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    Ok(SplitPair {
        train: d.select_rows(&train_indices)?,
        test: d.select_rows(&test_indices)?,
        train_indices,
        test_indices,
        ratio,
        seed,
    })
}

/// Flips the labels of exactly `floor(rate * n)` distinct rows chosen
/// uniformly at random.
pub fn inject_label_noise(d: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(invalid("rate", alloc::format!("must lie in [0, 1], got {rate}")));
    }
    let n = d.n();
    let count = floor_count(rate, n).min(n);
    let mut out = d.clone();
    for i in index::sample(&mut ChaCha8Rng::seed_from_u64(seed), n, count) {
        out.labels[i] = out.labels[i].flipped();
    }
    out.meta.noise_rate = Some(rate);
    out.meta.seed = Some(seed);
    Ok(out)
}

/// Partitions `0..n` into `k` folds whose sizes differ by at most one.
/// Indices inside each fold are sorted.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(invalid("k", alloc::format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}
