use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use super::{Dataset, DatasetMeta, Label};
use crate::error::{invalid, Result};

const MEAN_SPREAD: f64 = 5.0;

/// Normally distributed clusters labeled by a random hyperplane.
///
/// Cluster means are drawn uniformly from `[-5, 5]^m` and each cluster gets
/// an isotropic scale in `[0.5, 1.5]`. A random unit normal `v` ranks the
/// clusters by `v·mean`; the upper half is labeled `+1`, the lower half
/// `-1`, and every cluster is then pushed `separability` units along `±v`
/// away from the separating plane. All members of a cluster carry its
/// label, so samples that spill across the plane act as boundary noise
/// whose share shrinks as `separability` grows. With one cluster the
/// samples are labeled by their own side of a plane through the mean and
/// pushed apart the same way.
///
/// Sample `i` is drawn from the cluster at position `i % n_clusters` in an
/// order that alternates classes, so any `n >= 2` with two or more clusters
/// contains both labels.
pub fn generate_ndc(n: usize, m: usize, n_clusters: usize, separability: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(invalid("n", format!("need at least 2 samples, got {n}")));
    }
    if m < 1 {
        return Err(invalid("m", "need at least one feature"));
    }
    if n_clusters < 1 {
        return Err(invalid("n_clusters", "need at least one cluster"));
    }
    if !(separability >= 0.0 && separability.is_finite()) {
        return Err(invalid("separability", format!("must be finite and >= 0, got {separability}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let spread = Uniform::new_inclusive(-MEAN_SPREAD, MEAN_SPREAD).expect("finite bounds");
    let scale_dist = Uniform::new_inclusive(0.5, 1.5).expect("finite bounds");

    let mut normal = DVector::from_fn(m, |_, _| std_normal.sample(&mut rng));
    let norm = normal.norm();
    if norm > 0.0 {
        normal /= norm;
    } else {
        normal[0] = 1.0;
    }

    let mut means: Vec<DVector<f64>> = (0..n_clusters).map(|_| DVector::<f64>::from_fn(m, |_, _| spread.sample(&mut rng))).collect();
    let scales: Vec<f64> = (0..n_clusters).map(|_| scale_dist.sample(&mut rng)).collect();

    let mut features = DMatrix::zeros(n, m);
    let mut labels = Vec::with_capacity(n);

    if n_clusters == 1 {
        for i in 0..n {
            let noise = DVector::from_fn(m, |_, _| std_normal.sample(&mut rng));
            let offset = noise * scales[0];
            let label = Label::from_score(normal.dot(&offset));
            let x = &means[0] + offset + &normal * (label.value() * separability);
            features.row_mut(i).tr_copy_from(&x);
            labels.push(label);
        }
    } else {
        let mut order: Vec<usize> = (0..n_clusters).collect();
        let proj: Vec<f64> = means.iter().map(|mu| normal.dot(mu)).collect();
        order.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]).then(a.cmp(&b)));
        let n_neg = n_clusters / 2;
        let (neg, pos) = order.split_at(n_neg);
        let mut cluster_label = alloc::vec![Label::Pos; n_clusters];
        for &c in neg {
            cluster_label[c] = Label::Neg;
        }
        for (c, mean) in means.iter_mut().enumerate() {
            *mean += &normal * (cluster_label[c].value() * separability);
        }
        // alternate classes: pos[0], neg[0], pos[1], neg[1], ...
        let mut schedule: Vec<usize> = Vec::with_capacity(n_clusters);
        for i in 0..pos.len().max(neg.len()) {
            schedule.extend(pos.get(i));
            schedule.extend(neg.get(i));
        }
        for i in 0..n {
            let c = schedule[i % n_clusters];
            let mu: &DVector<f64> = &means[c];
            let x = DVector::from_fn(m, |j, _| {
                let z: f64 = std_normal.sample(&mut rng);
                mu[j] + scales[c] * z
            });
            features.row_mut(i).tr_copy_from(&x);
            labels.push(cluster_label[c]);
        }
    }

    let meta = DatasetMeta {
        source: format!("ndc(n={n},m={m},clusters={n_clusters},separability={separability})"),
        seed: Some(seed),
        ..DatasetMeta::default()
    };
    Dataset::new(features, labels, meta)
}

/// Two noisy line segments with different slopes, one per class, that meet
/// outside the sampled window: `+1` along `y = 0.5 t + 1.2`, `-1` along
/// `y = -0.5 t - 1.2`, `t` uniform in `[-1, 1]`, Gaussian jitter of
/// standard deviation `jitter` on both coordinates. Linearly separable
/// whenever the jitter stays well below the gap of 1.4.
pub fn generate_crossplane(n: usize, jitter: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(invalid("n", format!("need at least 2 samples, got {n}")));
    }
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(invalid("jitter", format!("must be finite and >= 0, got {jitter}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, jitter).expect("finite jitter");
    let mut features = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Pos } else { Label::Neg };
        let t: f64 = rng.random_range(-1.0..=1.0);
        let y = label.value() * (0.5 * t + 1.2);
        features[(i, 0)] = t + noise.sample(&mut rng);
        features[(i, 1)] = y + noise.sample(&mut rng);
        labels.push(label);
    }
    let meta = DatasetMeta {
        source: format!("crossplane(n={n},jitter={jitter})"),
        seed: Some(seed),
        ..DatasetMeta::default()
    };
    Dataset::new(features, labels, meta)
}
