//! Granular-ball generation: the training set starts as one ball that is
//! split with 2-means until every ball reaches the purity threshold.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{Dataset, Label};
use crate::error::{invalid, Error, Result};

/// Lloyd iterations allowed per split.
pub const MAX_LLOYD_ITERATIONS: usize = 100;

/// Fraction of members carrying the majority label.
pub fn purity(labels: &[Label]) -> Result<f64> {
    majority(labels.iter().copied()).map(|(_, p)| p)
}

/// Majority label and purity. A tie goes to `+1`.
fn majority(labels: impl Iterator<Item = Label>) -> Result<(Label, f64)> {
    let (mut pos, mut total) = (0usize, 0usize);
    for l in labels {
        total += 1;
        pos += usize::from(l == Label::Pos);
    }
    if total == 0 {
        return Err(Error::EmptyInput("purity of an empty ball"));
    }
    let neg = total - pos;
    let (label, count) = if pos >= neg { (Label::Pos, pos) } else { (Label::Neg, neg) };
    Ok((label, count as f64 / total as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranularBall {
    /// Row indices into the source dataset, ascending.
    pub members: Vec<usize>,
    pub center: Vec<f64>,
    pub label: Label,
    pub purity: f64,
}

impl GranularBall {
    fn from_members(data: &Dataset, members: Vec<usize>) -> Result<Self> {
        let (label, purity) = majority(members.iter().map(|&i| data.labels()[i]))?;
        let x = data.features();
        let inv = 1.0 / members.len() as f64;
        let center = (0..data.m())
            .map(|j| members.iter().map(|&i| x[(i, j)]).sum::<f64>() * inv)
            .collect();
        Ok(GranularBall { members, center, label, purity })
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceFingerprint {
    pub n: usize,
    pub m: usize,
    /// Hex SHA-256 prefix over feature bits and labels.
    pub hash: String,
}

impl SourceFingerprint {
    pub fn of(data: &Dataset) -> Self {
        let mut h = Sha256::new();
        for v in data.features().iter() {
            h.update(v.to_bits().to_le_bytes());
        }
        for l in data.labels() {
            h.update([u8::from(*l == Label::Pos)]);
        }
        SourceFingerprint { n: data.n(), m: data.m(), hash: hex_prefix(&h.finalize(), 16) }
    }
}

pub(crate) fn hex_prefix(bytes: &[u8], n_bytes: usize) -> String {
    use core::fmt::Write;
    let mut s = String::with_capacity(2 * n_bytes);
    for b in bytes.iter().take(n_bytes) {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranularBallSet {
    /// In finalization order.
    pub balls: Vec<GranularBall>,
    pub eta: f64,
    pub seed: u64,
    pub source: SourceFingerprint,
    /// Impure balls whose members all coincide; kept with their majority label.
    pub unsplittable: usize,
}

impl GranularBallSet {
    pub fn k(&self) -> usize {
        self.balls.len()
    }

    /// `(C, t)`: one row per ball center and the matching labels.
    pub fn centers_matrix(&self) -> (DMatrix<f64>, Vec<Label>) {
        let m = self.source.m;
        let c = DMatrix::from_fn(self.balls.len(), m, |i, j| self.balls[i].center[j]);
        (c, self.balls.iter().map(|b| b.label).collect())
    }

    /// Centers and labels packaged as a dataset of `k` rows.
    pub fn centers_dataset(&self) -> Result<Dataset> {
        let (c, t) = self.centers_matrix();
        Dataset::new(c, t, crate::dataset::DatasetMeta::named("granular-ball centers"))
    }
}

fn sq_dist(x: &DMatrix<f64>, i: usize, c: &[f64]) -> f64 {
    c.iter().enumerate().map(|(j, cj)| (x[(i, j)] - cj) * (x[(i, j)] - cj)).sum()
}

fn mean_of(x: &DMatrix<f64>, rows: &[usize]) -> Vec<f64> {
    let inv = 1.0 / rows.len() as f64;
    (0..x.ncols()).map(|j| rows.iter().map(|&i| x[(i, j)]).sum::<f64>() * inv).collect()
}

/// Splits `rows` of `x` into two nonempty groups with Lloyd's 2-means.
///
/// Initial centroids are the class means when both labels occur among the
/// rows (the `+1` mean seeds the first group) and otherwise the two
/// mutually farthest points, ties going to the lowest indices. Points
/// equidistant from both centroids join the first group. Iteration stops at
/// an assignment fixpoint or after [`MAX_LLOYD_ITERATIONS`]. If a group
/// comes out empty, the rows are halved in their given order instead.
pub fn two_means(x: &DMatrix<f64>, rows: &[usize], labels: &[Label]) -> Result<(Vec<usize>, Vec<usize>)> {
    if rows.len() < 2 {
        return Err(Error::EmptyInput("two_means needs at least two points"));
    }
    let (pos, neg): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| labels[i] == Label::Pos);
    let (mut ca, mut cb) = if !pos.is_empty() && !neg.is_empty() {
        (mean_of(x, &pos), mean_of(x, &neg))
    } else {
        let (a, b) = farthest_pair(x, rows);
        (x.row(a).iter().copied().collect(), x.row(b).iter().copied().collect())
    };

    let split = |assign: &[bool]| -> (Vec<usize>, Vec<usize>) {
        let (a, b): (Vec<(usize, bool)>, Vec<(usize, bool)>) =
            rows.iter().copied().zip(assign.iter().copied()).partition(|&(_, to_a)| to_a);
        (a.into_iter().map(|(i, _)| i).collect(), b.into_iter().map(|(i, _)| i).collect())
    };

    let mut assign: Vec<bool> = Vec::new();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let next: Vec<bool> = rows.iter().map(|&i| sq_dist(x, i, &ca) <= sq_dist(x, i, &cb)).collect();
        if next == assign {
            break;
        }
        let (a, b) = split(&next);
        if a.is_empty() || b.is_empty() {
            let half = rows.len() / 2;
            return Ok((rows[..half].to_vec(), rows[half..].to_vec()));
        }
        ca = mean_of(x, &a);
        cb = mean_of(x, &b);
        assign = next;
    }
    Ok(split(&assign))
}

fn farthest_pair(x: &DMatrix<f64>, rows: &[usize]) -> (usize, usize) {
    let mut best = (rows[0], rows[1], -1.0);
    for (p, &i) in rows.iter().enumerate() {
        for &j in &rows[p + 1..] {
            let d = (x.row(i) - x.row(j)).norm_squared();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    (best.0, best.1)
}

fn all_identical(x: &DMatrix<f64>, rows: &[usize]) -> bool {
    let first = x.row(rows[0]);
    rows[1..].iter().all(|&i| x.row(i) == first)
}

/// Recursively splits the whole training set until every ball has purity
/// at least `eta`, is a singleton, or consists of identical points.
///
/// Balls are processed first-in first-out, so the output order is the
/// breadth-first finalization order. `seed` is recorded for provenance; the
/// splitting itself is deterministic.
pub fn generate_granular_balls(data: &Dataset, eta: f64, seed: u64) -> Result<GranularBallSet> {
    if !(eta > 0.5 && eta <= 1.0) {
        return Err(invalid("eta", alloc::format!("must lie in (0.5, 1], got {eta}")));
    }
    let x = data.features();
    let labels = data.labels();
    let mut queue: VecDeque<Vec<usize>> = VecDeque::new();
    queue.push_back((0..data.n()).collect());
    let mut balls = Vec::new();
    let mut unsplittable = 0;

    while let Some(members) = queue.pop_front() {
        let (_, p) = majority(members.iter().map(|&i| labels[i]))?;
        if members.len() == 1 || p >= eta {
            balls.push(GranularBall::from_members(data, members)?);
        } else if all_identical(x, &members) {
            unsplittable += 1;
            balls.push(GranularBall::from_members(data, members)?);
        } else {
            let (a, b) = two_means(x, &members, labels)?;
            queue.push_back(a);
            queue.push_back(b);
        }
    }

    Ok(GranularBallSet { balls, eta, seed, source: SourceFingerprint::of(data), unsplittable })
}
