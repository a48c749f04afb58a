//! Experiment protocols: cross-validated grid search, hold-out evaluation,
//! label-noise sweeps, multi-dataset comparison, ablation and timing.

use std::time::Instant;

use gbtsvm_core::dataset::{inject_label_noise, kfold_indices, split_train_test, Dataset, MinMaxScaler};
use gbtsvm_core::feature_map::Activation;
use gbtsvm_core::model::{fit_variant, FittedModel, ModelConfig, Variant};
use gbtsvm_core::stats::{compute_metrics, friedman_test, nemenyi_cd, rank_models, FriedmanResult, Metrics, RankTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, CoreContext, Result};

/// Independent seed for stream `index` under `master` (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: Vec<f64>,
    pub hidden: Vec<usize>,
    pub activation: Vec<Activation>,
}

impl Grid {
    /// `d ∈ {10⁻⁵, …, 10⁵}`, `h ∈ {3, 23, …, 203}`, all nine activations.
    pub fn full() -> Self {
        Grid {
            d: (-5..=5).map(|e| 10f64.powi(e)).collect(),
            hidden: (3..=203).step_by(20).collect(),
            activation: Activation::ALL.to_vec(),
        }
    }

    pub fn single(d: f64, hidden: usize, activation: Activation) -> Self {
        Grid { d: vec![d], hidden: vec![hidden], activation: vec![activation] }
    }

    /// Combinations in `d`-major order. Variants without a random layer only
    /// use the first `h` and activation, which have no effect on them.
    pub fn combinations(&self, variant: Variant) -> Vec<(f64, usize, Activation)> {
        let (hs, acts) = if variant.uses_random_layer() {
            (&self.hidden[..], &self.activation[..])
        } else {
            (&self.hidden[..self.hidden.len().min(1)], &self.activation[..self.activation.len().min(1)])
        };
        let mut out = Vec::with_capacity(self.d.len() * hs.len() * acts.len());
        for &d in &self.d {
            for &h in hs {
                for &a in acts {
                    out.push((d, h, a));
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.d.is_empty() || self.hidden.is_empty() || self.activation.is_empty() {
            return Err(AppError::Usage("grid must be nonempty in every axis".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub index: usize,
    pub d: f64,
    pub hidden: usize,
    pub activation: Activation,
    pub seed: u64,
    /// `None` for folds that were skipped.
    pub fold_accuracy: Vec<Option<f64>>,
    pub mean_accuracy: Option<f64>,
    /// Skipped folds with the reason.
    pub skipped: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub variant: Variant,
    pub folds: usize,
    pub best_index: usize,
    pub best: ModelConfig,
    pub table: Vec<CvRow>,
}

fn accuracy(model: &FittedModel, test: &Dataset) -> Result<f64> {
    let pred = model.predict(test.features()).context("predicting")?;
    Ok(compute_metrics(test.labels(), &pred).context("scoring")?.accuracy)
}

fn configure(template: &ModelConfig, d: f64, hidden: usize, activation: Activation, seed: u64) -> ModelConfig {
    ModelConfig { d1: d, d2: d, hidden, activation, seed, ..template.clone() }
}

/// k-fold grid search. Folds are shared by all combinations; combination `i`
/// fits with seed `derive_seed(seed, i)`. Folds whose training part holds a
/// single class, or whose fit fails, are skipped and listed in the row.
/// The best row has the highest mean accuracy, ties going to smaller `d`,
/// then smaller `h`, then lower activation index.
pub fn grid_search_cv(
    train: &Dataset,
    variant: Variant,
    template: &ModelConfig,
    folds: usize,
    grid: &Grid,
    seed: u64,
) -> Result<GridResult> {
    grid.validate()?;
    let parts = kfold_indices(train.n(), folds, seed).context("building folds")?;
    let splits: Vec<(Dataset, Dataset)> = (0..folds)
        .map(|f| {
            let rest: Vec<usize> = parts.iter().enumerate().filter(|(g, _)| *g != f).flat_map(|(_, p)| p.iter().copied()).collect();
            Ok((train.select_rows(&rest).context("fold split")?, train.select_rows(&parts[f]).context("fold split")?))
        })
        .collect::<Result<_>>()?;

    let combos = grid.combinations(variant);
    let table: Vec<CvRow> = combos
        .par_iter()
        .enumerate()
        .map(|(index, &(d, hidden, activation))| {
            let combo_seed = derive_seed(seed, index as u64);
            let cfg = configure(template, d, hidden, activation, combo_seed);
            let mut fold_accuracy = Vec::with_capacity(folds);
            let mut skipped = Vec::new();
            for (f, (tr, te)) in splits.iter().enumerate() {
                if !tr.has_both_classes() {
                    fold_accuracy.push(None);
                    skipped.push((f, "single-class training fold".to_string()));
                    continue;
                }
                match fit_variant(variant, &cfg, tr).context("fitting").and_then(|m| accuracy(&m, te)) {
                    Ok(a) => fold_accuracy.push(Some(a)),
                    Err(e) => {
                        fold_accuracy.push(None);
                        skipped.push((f, e.to_string()));
                    }
                }
            }
            let done: Vec<f64> = fold_accuracy.iter().flatten().copied().collect();
            let mean_accuracy = (!done.is_empty()).then(|| done.iter().sum::<f64>() / done.len() as f64);
            CvRow { index, d, hidden, activation, seed: combo_seed, fold_accuracy, mean_accuracy, skipped }
        })
        .collect();

    let best = table
        .iter()
        .filter_map(|r| r.mean_accuracy.map(|a| (a, r)))
        .min_by(|(a, r), (b, s)| {
            b.total_cmp(a)
                .then(r.d.total_cmp(&s.d))
                .then(r.hidden.cmp(&s.hidden))
                .then(r.activation.index().cmp(&s.activation.index()))
        })
        .map(|(_, r)| r)
        .ok_or_else(|| AppError::Data("grid search: every fold of every combination was skipped".into()))?;
    let best_cfg = configure(template, best.d, best.hidden, best.activation, best.seed);
    Ok(GridResult { variant, folds, best_index: best.index, best: best_cfg, table })
}

/// Optional hyperparameter tuning inside an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub folds: usize,
    pub grid: Grid,
}

/// Hold-out protocol shared by every experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub ratio: f64,
    pub seed: u64,
    /// Min-max scaling fitted on the training split.
    pub normalize: bool,
    pub tuning: Option<Tuning>,
}

impl Protocol {
    pub fn new(seed: u64) -> Self {
        Protocol { ratio: 0.7, seed, normalize: true, tuning: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub variant: Variant,
    pub config: ModelConfig,
    pub metrics: Metrics,
    /// Rows the twin duals were built from (balls or samples).
    pub training_rows: Option<usize>,
    pub fit_seconds: f64,
}

/// Splits, optionally injects noise into the training part, scales, and
/// returns `(train, test, scaler)`.
pub fn prepare(data: &Dataset, protocol: &Protocol, noise_rate: f64) -> Result<(Dataset, Dataset, Option<MinMaxScaler>)> {
    let split = split_train_test(data, protocol.ratio, protocol.seed).context("splitting")?;
    let mut train = split.train;
    if noise_rate > 0.0 {
        train = inject_label_noise(&train, noise_rate, derive_seed(protocol.seed, u64::MAX)).context("injecting noise")?;
    }
    if !protocol.normalize {
        return Ok((train, split.test, None));
    }
    let scaler = MinMaxScaler::fit(&train);
    let train = scaler.transform(&train).context("scaling")?;
    let test = scaler.transform(&split.test).context("scaling")?;
    Ok((train, test, Some(scaler)))
}

/// Tunes (if requested) on `train`, refits on all of it and scores on `test`.
pub fn fit_and_score(
    variant: Variant,
    template: &ModelConfig,
    train: &Dataset,
    test: &Dataset,
    protocol: &Protocol,
) -> Result<(FittedModel, Evaluation)> {
    let config = match &protocol.tuning {
        Some(t) => grid_search_cv(train, variant, template, t.folds, &t.grid, protocol.seed)?.best,
        None => template.clone(),
    };
    let start = Instant::now();
    let model = fit_variant(variant, &config, train).context("fitting")?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let pred = model.predict(test.features()).context("predicting")?;
    let metrics = compute_metrics(test.labels(), &pred).context("scoring")?;
    let training_rows = match &model {
        FittedModel::Twin(m) => Some(m.diagnostics().k1 + m.diagnostics().k2),
        FittedModel::Rvfl(_) => None,
    };
    Ok((model, Evaluation { variant, config, metrics, training_rows, fit_seconds }))
}

pub fn evaluate(data: &Dataset, variant: Variant, template: &ModelConfig, protocol: &Protocol) -> Result<Evaluation> {
    let (train, test, _) = prepare(data, protocol, 0.0)?;
    fit_and_score(variant, template, &train, &test, protocol).map(|(_, e)| e)
}

pub const NOISE_RATES: [f64; 5] = [0.0, 0.05, 0.10, 0.15, 0.20];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub rate: f64,
    pub variant: Variant,
    pub accuracy: f64,
    pub config: ModelConfig,
}

/// Flips `rate` of the training labels (test labels stay clean) and scores
/// every variant at every rate.
pub fn noise_sweep(
    data: &Dataset,
    variants: &[Variant],
    rates: &[f64],
    template: &ModelConfig,
    protocol: &Protocol,
) -> Result<Vec<NoiseRow>> {
    let jobs: Vec<(f64, Variant)> = rates.iter().flat_map(|&r| variants.iter().map(move |&v| (r, v))).collect();
    jobs.par_iter()
        .map(|&(rate, variant)| {
            let (train, test, _) = prepare(data, protocol, rate)?;
            let (_, e) = fit_and_score(variant, template, &train, &test, protocol)?;
            Ok(NoiseRow { rate, variant, accuracy: e.metrics.accuracy, config: e.config })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedmanSummary {
    pub chi2: f64,
    /// `None` when every dataset ranks the models identically.
    pub ff: Option<f64>,
    pub df_num: usize,
    pub df_den: usize,
}

impl From<FriedmanResult> for FriedmanSummary {
    fn from(r: FriedmanResult) -> Self {
        FriedmanSummary { chi2: r.chi2, ff: r.ff.is_finite().then_some(r.ff), df_num: r.df_num, df_den: r.df_den }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub datasets: Vec<String>,
    pub variants: Vec<Variant>,
    /// `accuracy[dataset][variant]`.
    pub accuracy: Vec<Vec<f64>>,
    pub ranks: RankTable,
    pub friedman: Option<FriedmanSummary>,
    pub q_alpha: Option<f64>,
    pub critical_difference: Option<f64>,
}

/// Ranks and tests already-computed accuracies.
pub fn summarize(datasets: Vec<String>, variants: Vec<Variant>, accuracy: Vec<Vec<f64>>, q_alpha: Option<f64>) -> Result<Comparison> {
    let ranks = rank_models(&accuracy).context("ranking")?;
    let friedman = if accuracy.len() >= 2 { Some(friedman_test(&ranks).context("friedman test")?.into()) } else { None };
    let critical_difference = q_alpha.map(|q| nemenyi_cd(variants.len(), accuracy.len(), q)).transpose().context("nemenyi")?;
    Ok(Comparison { datasets, variants, accuracy, ranks, friedman, q_alpha, critical_difference })
}

/// Scores every variant on every dataset and ranks them.
pub fn compare(
    datasets: &[(String, Dataset)],
    variants: &[Variant],
    template: &ModelConfig,
    protocol: &Protocol,
    q_alpha: Option<f64>,
) -> Result<Comparison> {
    if variants.len() < 2 {
        return Err(AppError::Usage("compare needs at least two variants".into()));
    }
    let accuracy: Vec<Vec<f64>> = datasets
        .par_iter()
        .map(|(_, d)| {
            let (train, test, _) = prepare(d, protocol, 0.0)?;
            variants
                .par_iter()
                .map(|&v| fit_and_score(v, template, &train, &test, protocol).map(|(_, e)| e.metrics.accuracy))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    summarize(datasets.iter().map(|(n, _)| n.clone()).collect(), variants.to_vec(), accuracy, q_alpha)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: Variant,
    pub granulate: bool,
    pub feature_space: gbtsvm_core::FeatureSpace,
    pub evaluation: Evaluation,
}

/// The six twin variants on one dataset.
pub fn ablate(data: &Dataset, template: &ModelConfig, protocol: &Protocol) -> Result<Vec<AblationRow>> {
    let (train, test, _) = prepare(data, protocol, 0.0)?;
    Variant::ABLATION
        .par_iter()
        .map(|&variant| {
            let (granulate, feature_space) = variant.twin_switches().expect("ablation rows are twin variants");
            let (_, evaluation) = fit_and_score(variant, template, &train, &test, protocol)?;
            Ok(AblationRow { variant, granulate, feature_space, evaluation })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub variant: Variant,
    pub n: usize,
    pub training_rows: Option<usize>,
    /// Median of the repeated fits.
    pub fit_seconds: f64,
    pub accuracy: f64,
}

/// Median wall-clock time of `repeats` calls, plus the last result.
pub fn median_time<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        last = Some(f()?);
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok((times[times.len() / 2], last.expect("at least one run")))
}

/// Times each variant on each dataset sequentially (so timings do not
/// compete for cores). `n` is the full dataset size; fits use the split.
pub fn benchmark_fit(
    datasets: &[Dataset],
    variants: &[Variant],
    template: &ModelConfig,
    protocol: &Protocol,
    repeats: usize,
) -> Result<Vec<TimingRow>> {
    let mut rows = Vec::new();
    for d in datasets {
        let (train, test, _) = prepare(d, protocol, 0.0)?;
        for &variant in variants {
            let (fit_seconds, model) = median_time(repeats, || fit_variant(variant, template, &train).context("fitting"))?;
            let acc = accuracy(&model, &test)?;
            let training_rows = match &model {
                FittedModel::Twin(m) => Some(m.diagnostics().k1 + m.diagnostics().k2),
                FittedModel::Rvfl(_) => None,
            };
            rows.push(TimingRow { variant, n: d.n(), training_rows, fit_seconds, accuracy: acc });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gbtsvm_core::dataset::generate_ndc;

    #[test]
    fn default_grid_has_1089_combinations() {
        let g = Grid::full();
        assert_eq!(g.combinations(Variant::EfGbtsvm).len(), 1089);
        assert_eq!(g.combinations(Variant::Tsvm).len(), 11);
        assert_eq!(g.hidden.last(), Some(&203));
    }

    #[test]
    fn single_combination_grid_returns_it() {
        let d = generate_ndc(60, 3, 4, 1.0, 1).unwrap();
        let grid = Grid::single(0.1, 13, Activation::Sigmoid);
        let r = grid_search_cv(&d, Variant::EfGbtsvm, &ModelConfig::default(), 3, &grid, 5).unwrap();
        assert_eq!((r.best.d1, r.best.d2, r.best.hidden, r.best.activation), (0.1, 0.1, 13, Activation::Sigmoid));
        assert_eq!(r.table.len(), 1);
    }

    #[test]
    fn grid_search_is_reproducible() {
        let d = generate_ndc(60, 3, 4, 0.3, 2).unwrap();
        let grid = Grid { d: vec![0.01, 1.0, 100.0], hidden: vec![3, 23], activation: vec![Activation::Relu, Activation::Sine] };
        let a = grid_search_cv(&d, Variant::EfGbtsvm, &ModelConfig::default(), 4, &grid, 9).unwrap();
        let b = grid_search_cv(&d, Variant::EfGbtsvm, &ModelConfig::default(), 4, &grid, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ties_prefer_small_d_then_h() {
        let d = generate_ndc(80, 2, 2, 5.0, 4).unwrap();
        let grid = Grid { d: vec![10.0, 1.0], hidden: vec![23, 3], activation: vec![Activation::Relu] };
        let r = grid_search_cv(&d, Variant::EfGbtsvm, &ModelConfig::default(), 4, &grid, 1).unwrap();
        // perfectly separable: every combination scores 1
        assert!(r.table.iter().all(|row| row.mean_accuracy == Some(1.0)));
        assert_eq!((r.best.d1, r.best.hidden), (1.0, 3));
    }

    #[test]
    fn seeds_differ_per_stream() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn ablation_has_six_rows() {
        let d = generate_ndc(120, 3, 4, 1.0, 6).unwrap();
        let rows = ablate(&d, &ModelConfig { hidden: 13, ..ModelConfig::default() }, &Protocol::new(6)).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows.iter().map(|r| r.variant).collect::<Vec<_>>(), Variant::ABLATION.to_vec());
    }
}
