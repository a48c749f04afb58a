//! Classification metrics and rank-based multi-model comparison.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Accuracy is in `[0, 1]`; ratios with an empty denominator are `None`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub specificity: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(truth: &[Label], predicted: &[Label]) -> Result<Metrics> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: predicted.len(), context: "predictions" });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("metrics of an empty set"));
    }
    let mut c = Confusion::default();
    for (t, p) in truth.iter().zip(predicted) {
        match (t, p) {
            (Label::Pos, Label::Pos) => c.tp += 1,
            (Label::Neg, Label::Neg) => c.tn += 1,
            (Label::Neg, Label::Pos) => c.fp += 1,
            (Label::Pos, Label::Neg) => c.fn_ += 1,
        }
    }
    Ok(Metrics {
        accuracy: (c.tp + c.tn) as f64 / truth.len() as f64,
        specificity: ratio(c.tn, c.tn + c.fp),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
        confusion: c,
    })
}

/// Per-dataset ranks (1 = best) and their column averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub ranks: Vec<Vec<f64>>,
    pub average: Vec<f64>,
}

/// Ranks each row of `scores` (higher is better); tied scores share the
/// average of the ranks they span.
pub fn rank_models(scores: &[Vec<f64>]) -> Result<RankTable> {
    let q = scores.first().map(Vec::len).ok_or(Error::EmptyInput("rank table"))?;
    if q < 2 {
        return Err(invalid("models", "need at least two models to rank"));
    }
    let mut ranks = Vec::with_capacity(scores.len());
    for row in scores {
        if row.len() != q {
            return Err(Error::DimensionMismatch { expected: q, found: row.len(), context: "rank table row" });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "rank table" });
        }
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        let mut r = alloc::vec![0.0; q];
        let mut i = 0;
        while i < q {
            let mut j = i;
            while j + 1 < q && row[order[j + 1]] == row[order[i]] {
                j += 1;
            }
            let shared = (i + j) as f64 / 2.0 + 1.0;
            for &k in &order[i..=j] {
                r[k] = shared;
            }
            i = j + 1;
        }
        ranks.push(r);
    }
    let p = ranks.len() as f64;
    let average = (0..q).map(|k| ranks.iter().map(|r| r[k]).sum::<f64>() / p).collect();
    Ok(RankTable { ranks, average })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    /// Iman-Davenport statistic; infinite when every dataset ranks the
    /// models identically.
    pub ff: f64,
    pub df_num: usize,
    pub df_den: usize,
}

/// Friedman test over a rank table of `P` datasets and `q` models.
pub fn friedman_test(table: &RankTable) -> Result<FriedmanResult> {
    friedman_from_ranks(&table.average, table.ranks.len())
}

/// Friedman test from average ranks of `q` models over `datasets` datasets.
pub fn friedman_from_ranks(average_ranks: &[f64], datasets: usize) -> Result<FriedmanResult> {
    let q = average_ranks.len();
    if q < 2 {
        return Err(invalid("models", "need at least two models"));
    }
    if datasets < 2 {
        return Err(invalid("datasets", "need at least two datasets"));
    }
    let (qf, pf) = (q as f64, datasets as f64);
    let sum_sq: f64 = average_ranks.iter().map(|r| r * r).sum();
    let chi2 = 12.0 * pf / (qf * (qf + 1.0)) * (sum_sq - qf * (qf + 1.0) * (qf + 1.0) / 4.0);
    let den = pf * (qf - 1.0) - chi2;
    let ff = if den.abs() <= 1e-12 * pf * qf { f64::INFINITY } else { (pf - 1.0) * chi2 / den };
    Ok(FriedmanResult { chi2, ff, df_num: q - 1, df_den: (q - 1) * (datasets - 1) })
}

/// Nemenyi critical difference for `q` models over `datasets` datasets,
/// given the studentized-range critical value `q_alpha`.
pub fn nemenyi_cd(q: usize, datasets: usize, q_alpha: f64) -> Result<f64> {
    if q < 2 || datasets == 0 {
        return Err(invalid("nemenyi", "need at least two models and one dataset"));
    }
    if !(q_alpha >= 0.0 && q_alpha.is_finite()) {
        return Err(invalid("q_alpha", alloc::format!("must be finite and >= 0, got {q_alpha}")));
    }
    let (qf, pf) = (q as f64, datasets as f64);
    Ok(q_alpha * libm::sqrt(qf * (qf + 1.0) / (6.0 * pf)))
}

/// `q_α / √2` values of the Nemenyi test at α = 0.05 for 2..=10 models.
pub const NEMENYI_Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];

pub fn nemenyi_q_05(q: usize) -> Option<f64> {
    q.checked_sub(2).and_then(|i| NEMENYI_Q_05.get(i)).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const P: Label = Label::Pos;
    const N: Label = Label::Neg;

    #[test]
    fn metrics_example() {
        let m = compute_metrics(&[P, P, N, N], &[P, N, N, P]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.confusion, Confusion { tp: 1, tn: 1, fp: 1, fn_: 1 });
        assert_eq!(m.precision, Some(0.5));
        let all_pos = compute_metrics(&[P, P], &[P, P]).unwrap();
        assert_eq!(all_pos.specificity, None);
        assert!(compute_metrics(&[P], &[]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        let t = rank_models(&[vec![0.9, 0.8, 0.8], vec![0.5, 0.7, 0.6]]).unwrap();
        assert_eq!(t.ranks[0], vec![1.0, 2.5, 2.5]);
        assert_eq!(t.ranks[1], vec![3.0, 1.0, 2.0]);
        assert_eq!(t.average, vec![2.0, 1.75, 2.25]);
    }

    #[test]
    fn friedman_example() {
        let rows = [vec![0.9, 0.8, 0.7], vec![0.9, 0.8, 0.7], vec![0.9, 0.8, 0.7], vec![0.7, 0.8, 0.9]];
        let t = rank_models(&rows).unwrap();
        assert_eq!(t.average, vec![1.5, 2.0, 2.5]);
        let r = friedman_test(&t).unwrap();
        assert_eq!((r.df_num, r.df_den), (2, 6));
        assert!((r.chi2 - 2.0).abs() < 1e-12);
        assert!((r.ff - 1.0).abs() < 1e-12);
        let perfect = friedman_from_ranks(&[1.0, 2.0, 3.0], 5).unwrap();
        assert!(perfect.ff.is_infinite());
        assert!((perfect.chi2 - 10.0).abs() < 1e-12);
        assert_eq!(friedman_from_ranks(&[2.0, 2.0, 2.0], 5).unwrap().chi2, 0.0);
    }

    #[test]
    fn cd_example() {
        let cd = nemenyi_cd(8, 32, 3.031).unwrap();
        assert!((cd - 1.856100852593953).abs() < 1e-12);
        assert_eq!(nemenyi_cd(8, 32, 0.0).unwrap(), 0.0);
        assert!((nemenyi_cd(2, 6, 1.0).unwrap() - (6.0f64 / 36.0).sqrt()).abs() < 1e-15);
        assert!(nemenyi_cd(2, 6, -1.0).is_err());
        assert_eq!(nemenyi_q_05(8), Some(3.031));
        assert_eq!(nemenyi_q_05(1), None);
    }
}
