//! Twin-hyperplane classifiers and the RVFL least-squares baseline.
//!
//! A [`TwinModel`] fits one hyperplane per class. Plane `+1` stays close to
//! the positive rows and at least unit distance from the negative rows;
//! plane `−1` the reverse. Both come from box-constrained duals: with
//! `F = [T₊ | 1]` and `E = [T₋ | 1]`,
//!
//! ```text
//! α = argmax 1ᵀα − ½ αᵀ E (FᵀF + δI)⁻¹ Eᵀ α,   0 ≤ α ≤ d₁
//! u₊ = −(FᵀF + δI)⁻¹ Eᵀ α
//! γ = argmax 1ᵀγ − ½ γᵀ F (EᵀE + δI)⁻¹ Fᵀ γ,   0 ≤ γ ≤ d₂
//! u₋ = (EᵀE + δI)⁻¹ Fᵀ γ
//! ```
//!
//! The rows `T₊`, `T₋` are raw samples or granular-ball centers, mapped into
//! the original, hidden or enhanced feature space. A new point goes to the
//! class whose plane is nearer.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{invalid, Error, Result};
use crate::feature_map::{map_features, Activation, FeatureSpace, RandomLayer};
use crate::granular_ball::generate_granular_balls;
use crate::qp::{ridge_factorize, solve_box_qp, BoxQp, QpSolution, SolverOptions};

/// Duals with at most this many variables are solved with an explicit
/// Hessian; larger ones use the `Q = P Pᵀ` factor directly.
pub const DENSE_HESSIAN_LIMIT: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Train on granular-ball centers instead of raw samples.
    pub granulate: bool,
    pub feature_space: FeatureSpace,
    pub d1: f64,
    pub d2: f64,
    pub delta: f64,
    pub eta: f64,
    pub hidden: usize,
    pub activation: Activation,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            granulate: true,
            feature_space: FeatureSpace::Enhanced,
            d1: 1.0,
            d2: 1.0,
            delta: 1e-5,
            eta: 0.9,
            hidden: 103,
            activation: Activation::Relu,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, alloc::format!("must be finite and > 0, got {v}")))
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        positive("d1", self.d1)?;
        positive("d2", self.d2)?;
        positive("delta", self.delta)?;
        if !(self.eta > 0.5 && self.eta <= 1.0) {
            return Err(invalid("eta", alloc::format!("must lie in (0.5, 1], got {}", self.eta)));
        }
        if self.feature_space.needs_layer() && self.hidden == 0 {
            return Err(invalid("hidden", "hidden and enhanced spaces need at least one hidden node"));
        }
        positive("tol", self.solver.tol)
    }

    /// Applies the granulation / feature-space switches of a twin variant.
    pub fn with_variant(mut self, variant: Variant) -> Self {
        if let Some((granulate, space)) = variant.twin_switches() {
            self.granulate = granulate;
            self.feature_space = space;
        }
        self
    }
}

/// The comparison set: six twin variants from two orthogonal switches plus
/// the two RVFL baselines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Tsvm,
    Gbtsvm,
    HfTsvm,
    HfGbtsvm,
    EfTsvm,
    EfGbtsvm,
    Rvfl,
    RvflWodl,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Tsvm,
        Variant::Gbtsvm,
        Variant::HfTsvm,
        Variant::HfGbtsvm,
        Variant::EfTsvm,
        Variant::EfGbtsvm,
        Variant::Rvfl,
        Variant::RvflWodl,
    ];

    /// Rows of the granular-ball ablation.
    pub const ABLATION: [Variant; 6] =
        [Variant::Tsvm, Variant::Gbtsvm, Variant::HfTsvm, Variant::HfGbtsvm, Variant::EfTsvm, Variant::EfGbtsvm];

    pub const fn name(self) -> &'static str {
        match self {
            Variant::Tsvm => "tsvm",
            Variant::Gbtsvm => "gbtsvm",
            Variant::HfTsvm => "hf-tsvm",
            Variant::HfGbtsvm => "hf-gbtsvm",
            Variant::EfTsvm => "ef-tsvm",
            Variant::EfGbtsvm => "ef-gbtsvm",
            Variant::Rvfl => "rvfl",
            Variant::RvflWodl => "rvfl-wodl",
        }
    }

    /// `(granulate, feature space)` for twin variants, `None` for RVFL.
    pub const fn twin_switches(self) -> Option<(bool, FeatureSpace)> {
        match self {
            Variant::Tsvm => Some((false, FeatureSpace::Original)),
            Variant::Gbtsvm => Some((true, FeatureSpace::Original)),
            Variant::HfTsvm => Some((false, FeatureSpace::Hidden)),
            Variant::HfGbtsvm => Some((true, FeatureSpace::Hidden)),
            Variant::EfTsvm => Some((false, FeatureSpace::Enhanced)),
            Variant::EfGbtsvm => Some((true, FeatureSpace::Enhanced)),
            Variant::Rvfl | Variant::RvflWodl => None,
        }
    }

    /// Whether the hidden-node count and activation affect the model.
    pub const fn uses_random_layer(self) -> bool {
        match self.twin_switches() {
            Some((_, space)) => space.needs_layer(),
            None => true,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| invalid("variant", alloc::format!("unknown variant `{s}`")))
    }
}

/// Augmented normal `(w, b)`; the plane is `{x : wᵀx + b = 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Hyperplane {
    fn from_augmented(u: &DVector<f64>) -> Self {
        let c = u.len() - 1;
        Hyperplane { w: u.rows(0, c).iter().copied().collect(), b: u[c] }
    }

    pub fn normal_norm(&self) -> f64 {
        libm::sqrt(self.w.iter().map(|v| v * v).sum())
    }

    /// Perpendicular distance `|wᵀx + b| / ‖w‖`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let s: f64 = self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b;
        libm::fabs(s) / self.normal_norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Hyperplane { w: self.w.iter().map(|v| v * factor).collect(), b: self.b * factor }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DualStats {
    pub size: usize,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    pub converged: bool,
    pub dense_hessian: bool,
}

impl DualStats {
    fn from_solution(s: &QpSolution, dense: bool) -> Self {
        DualStats {
            size: s.alpha.len(),
            iterations: s.iterations,
            kkt_residual: s.kkt_residual,
            objective: s.objective,
            converged: s.converged,
            dense_hessian: dense,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Positive / negative training rows (balls when granulated).
    pub k1: usize,
    pub k2: usize,
    pub samples: usize,
    pub unsplittable_balls: usize,
    pub pos_dual: DualStats,
    pub neg_dual: DualStats,
}

impl FitDiagnostics {
    pub fn converged(&self) -> bool {
        self.pos_dual.converged && self.neg_dual.converged
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinModel {
    plane_pos: Hyperplane,
    plane_neg: Hyperplane,
    layer: Option<RandomLayer>,
    config: ModelConfig,
    input_dim: usize,
    diagnostics: FitDiagnostics,
}

/// A fitted model together with both dual solutions.
#[derive(Clone, Debug)]
pub struct TwinFit {
    pub model: TwinModel,
    /// Multipliers of the `+1` plane's constraints, one per negative row.
    pub alpha: Vec<f64>,
    /// Multipliers of the `−1` plane's constraints, one per positive row.
    pub gamma: Vec<f64>,
}

fn augmented(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    let c = x.ncols();
    DMatrix::from_fn(rows.len(), c + 1, |i, j| if j < c { x[(rows[i], j)] } else { 1.0 })
}

/// One twin dual: `own` rows define the plane, `other` rows the constraints.
fn solve_plane(
    own: &DMatrix<f64>,
    other: &DMatrix<f64>,
    penalty: f64,
    delta: f64,
    opts: &SolverOptions,
    sign: f64,
) -> Result<(DVector<f64>, QpSolution, bool)> {
    let gram = ridge_factorize(own, delta)?;
    let p = gram.whiten_rows(other)?;
    let dense = p.nrows() <= DENSE_HESSIAN_LIMIT;
    let qp = if dense { BoxQp::dense(&p * p.transpose(), penalty)? } else { BoxQp::factored(&p, penalty)? };
    let sol = solve_box_qp(&qp, opts)?;
    let v = p.tr_mul(&DVector::from_column_slice(&sol.alpha));
    let u = gram.unwhiten(&v)? * sign;
    Ok((u, sol, dense))
}

/// Fits a twin model and also returns both dual vectors.
pub fn fit_twin(cfg: &ModelConfig, train: &Dataset) -> Result<TwinFit> {
    cfg.validate()?;
    let (rows, labels, unsplittable) = if cfg.granulate {
        let balls = generate_granular_balls(train, cfg.eta, cfg.seed)?;
        let (c, t) = balls.centers_matrix();
        (c, t, balls.unsplittable)
    } else {
        (train.features().clone(), train.labels().to_vec(), 0)
    };
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i] == Label::Pos);
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }

    let layer = if cfg.feature_space.needs_layer() {
        Some(RandomLayer::new(train.m(), cfg.hidden, cfg.activation, cfg.seed)?)
    } else {
        None
    };
    let mapped = map_features(layer.as_ref(), &rows, cfg.feature_space)?.values;
    let f = augmented(&mapped, &pos);
    let e = augmented(&mapped, &neg);

    let (u1, alpha, dense1) = solve_plane(&f, &e, cfg.d1, cfg.delta, &cfg.solver, -1.0)?;
    let (u2, gamma, dense2) = solve_plane(&e, &f, cfg.d2, cfg.delta, &cfg.solver, 1.0)?;

    let diagnostics = FitDiagnostics {
        k1: pos.len(),
        k2: neg.len(),
        samples: train.n(),
        unsplittable_balls: unsplittable,
        pos_dual: DualStats::from_solution(&alpha, dense1),
        neg_dual: DualStats::from_solution(&gamma, dense2),
    };
    let model = TwinModel::from_parts(
        Hyperplane::from_augmented(&u1),
        Hyperplane::from_augmented(&u2),
        layer,
        cfg.clone(),
        train.m(),
        diagnostics,
    )?;
    Ok(TwinFit { model, alpha: alpha.alpha, gamma: gamma.alpha })
}

/// Fits a twin model. Dual non-convergence is not an error; check
/// [`FitDiagnostics::converged`].
pub fn fit(cfg: &ModelConfig, train: &Dataset) -> Result<TwinModel> {
    fit_twin(cfg, train).map(|f| f.model)
}

impl TwinModel {
    /// Assembles a model from stored parts, enforcing that a random layer is
    /// present exactly when the feature space needs one and that widths agree.
    pub fn from_parts(
        plane_pos: Hyperplane,
        plane_neg: Hyperplane,
        layer: Option<RandomLayer>,
        config: ModelConfig,
        input_dim: usize,
        diagnostics: FitDiagnostics,
    ) -> Result<Self> {
        let space = config.feature_space;
        match (&layer, space.needs_layer()) {
            (None, true) => return Err(invalid("layer", "hidden and enhanced models need their random layer")),
            (Some(_), false) => return Err(invalid("layer", "original-space models carry no random layer")),
            (Some(l), true) if l.input_dim() != input_dim => {
                return Err(Error::DimensionMismatch { expected: input_dim, found: l.input_dim(), context: "model layer" })
            }
            _ => {}
        }
        let width = space.width(input_dim, layer.as_ref().map_or(0, RandomLayer::hidden));
        for plane in [&plane_pos, &plane_neg] {
            if plane.w.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: plane.w.len(), context: "hyperplane normal" });
            }
        }
        for (i, plane) in [&plane_pos, &plane_neg].into_iter().enumerate() {
            if !(plane.normal_norm() > 0.0) {
                return Err(Error::DegenerateHyperplane { plane: i + 1 });
            }
        }
        Ok(TwinModel { plane_pos, plane_neg, layer, config, input_dim, diagnostics })
    }

    pub fn plane_pos(&self) -> &Hyperplane {
        &self.plane_pos
    }

    pub fn plane_neg(&self) -> &Hyperplane {
        &self.plane_neg
    }

    pub fn layer(&self) -> Option<&RandomLayer> {
        self.layer.as_ref()
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn diagnostics(&self) -> &FitDiagnostics {
        &self.diagnostics
    }

    /// Same model with both augmented normals multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.plane_pos = self.plane_pos.scaled(factor);
        out.plane_neg = self.plane_neg.scaled(factor);
        out
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, found: cols, context: "model input" });
        }
        Ok(())
    }

    /// Raw rows mapped into the model's feature space.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_input(x.ncols())?;
        Ok(map_features(self.layer.as_ref(), x, self.config.feature_space)?.values)
    }

    /// Distances of one raw row to the `+1` and `−1` planes.
    pub fn decision_values(&self, x: &[f64]) -> Result<(f64, f64)> {
        let row = DMatrix::from_row_slice(1, x.len(), x);
        Ok(self.decision_matrix(&row)?[0])
    }

    pub fn decision_matrix(&self, x: &DMatrix<f64>) -> Result<Vec<(f64, f64)>> {
        let mapped = self.transform(x)?;
        let mut row = alloc::vec![0.0; mapped.ncols()];
        Ok((0..mapped.nrows())
            .map(|i| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = mapped[(i, j)];
                }
                (self.plane_pos.distance(&row), self.plane_neg.distance(&row))
            })
            .collect())
    }

    /// Nearest plane wins; equal distances go to `+1`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        Ok(self
            .decision_matrix(x)?
            .into_iter()
            .map(|(dp, dn)| if dp <= dn { Label::Pos } else { Label::Neg })
            .collect())
    }
}

/// Random-vector functional-link baseline: ridge least squares from the
/// hidden (or enhanced, with direct links) features plus a bias column to
/// the `±1` targets.
#[derive(Clone, Debug, PartialEq)]
pub struct RvflModel {
    layer: RandomLayer,
    direct_links: bool,
    ridge: f64,
    /// Output weights; the last entry multiplies the constant column.
    weights: Vec<f64>,
}

pub fn fit_rvfl_baseline(
    hidden: usize,
    activation: Activation,
    ridge: f64,
    seed: u64,
    train: &Dataset,
    direct_links: bool,
) -> Result<RvflModel> {
    positive("ridge", ridge)?;
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let layer = RandomLayer::new(train.m(), hidden, activation, seed)?;
    let model = RvflModel { layer, direct_links, ridge, weights: Vec::new() };
    let a = model.design(train.features())?;
    let gram = ridge_factorize(&a, ridge)?;
    let y = DVector::from_iterator(train.n(), train.labels().iter().map(|l| l.value()));
    let weights = gram.solve_vec(&a.tr_mul(&y))?;
    Ok(RvflModel { weights: weights.iter().copied().collect(), ..model })
}

impl RvflModel {
    /// Restores a fitted model; `weights` must match the feature width plus one.
    pub fn from_parts(layer: RandomLayer, direct_links: bool, ridge: f64, weights: Vec<f64>) -> Result<Self> {
        let width = layer.hidden() + if direct_links { layer.input_dim() } else { 0 } + 1;
        if weights.len() != width {
            return Err(Error::DimensionMismatch { expected: width, found: weights.len(), context: "rvfl output weights" });
        }
        Ok(RvflModel { layer, direct_links, ridge, weights })
    }

    fn design(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let space = if self.direct_links { FeatureSpace::Enhanced } else { FeatureSpace::Hidden };
        let feats = self.layer.map(x, space)?.values;
        let c = feats.ncols();
        Ok(DMatrix::from_fn(feats.nrows(), c + 1, |i, j| if j < c { feats[(i, j)] } else { 1.0 }))
    }

    pub fn layer(&self) -> &RandomLayer {
        &self.layer
    }

    pub fn direct_links(&self) -> bool {
        self.direct_links
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Width of the feature block feeding the output layer (bias excluded).
    pub fn feature_width(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer.input_dim()
    }

    pub fn scores(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let a = self.design(x)?;
        Ok((a * DVector::from_column_slice(&self.weights)).iter().copied().collect())
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        Ok(self.scores(x)?.into_iter().map(Label::from_score).collect())
    }
}

/// Either model family behind one prediction interface.
#[derive(Clone, Debug, PartialEq)]
pub enum FittedModel {
    Twin(TwinModel),
    Rvfl(RvflModel),
}

impl FittedModel {
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        match self {
            FittedModel::Twin(m) => m.predict(x),
            FittedModel::Rvfl(m) => m.predict(x),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            FittedModel::Twin(m) => m.input_dim(),
            FittedModel::Rvfl(m) => m.input_dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FittedModel::Twin(_) => "twin",
            FittedModel::Rvfl(_) => "rvfl",
        }
    }
}

/// Fits `variant` with the hyperparameters in `cfg`. The RVFL baselines use
/// `cfg.hidden`, `cfg.activation`, `cfg.seed` and ridge `1 / cfg.d1`.
pub fn fit_variant(variant: Variant, cfg: &ModelConfig, train: &Dataset) -> Result<FittedModel> {
    match variant {
        Variant::Rvfl | Variant::RvflWodl => {
            positive("d1", cfg.d1)?;
            fit_rvfl_baseline(cfg.hidden, cfg.activation, 1.0 / cfg.d1, cfg.seed, train, variant == Variant::Rvfl)
                .map(FittedModel::Rvfl)
        }
        _ => fit(&cfg.clone().with_variant(variant), train).map(FittedModel::Twin),
    }
}

/// Human-readable summary used in reports.
pub fn describe(cfg: &ModelConfig) -> String {
    alloc::format!(
        "granulate={} space={:?} d1={} d2={} delta={} eta={} hidden={} activation={}",
        cfg.granulate,
        cfg.feature_space,
        cfg.d1,
        cfg.d2,
        cfg.delta,
        cfg.eta,
        cfg.hidden,
        cfg.activation.index()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DatasetMeta;
    use alloc::vec;

    fn line_data() -> Dataset {
        Dataset::from_rows(
            &[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]],
            vec![Label::Pos, Label::Pos, Label::Neg, Label::Neg],
            DatasetMeta::default(),
        )
        .unwrap()
    }

    fn raw_cfg() -> ModelConfig {
        ModelConfig { granulate: false, feature_space: FeatureSpace::Original, ..ModelConfig::default() }
    }

    #[test]
    fn classical_tsvm_separates_line() {
        let d = line_data();
        let m = fit(&raw_cfg(), &d).unwrap();
        assert_eq!(m.predict(d.features()).unwrap(), d.labels());
        assert!(m.diagnostics().converged());
    }

    #[test]
    fn single_class_is_rejected() {
        let d = Dataset::from_rows(&[vec![1.0], vec![1.0], vec![1.0]], vec![Label::Pos; 3], DatasetMeta::default()).unwrap();
        assert_eq!(fit(&ModelConfig::default(), &d).unwrap_err(), Error::SingleClass);
        assert_eq!(fit(&raw_cfg(), &d).unwrap_err(), Error::SingleClass);
    }

    #[test]
    fn decision_value_examples() {
        let cfg = raw_cfg();
        let diag = FitDiagnostics::default();
        let m = TwinModel::from_parts(
            Hyperplane { w: vec![1.0, 0.0], b: 0.0 },
            Hyperplane { w: vec![0.0, 1.0], b: 0.0 },
            None,
            cfg,
            2,
            diag,
        )
        .unwrap();
        assert_eq!(m.decision_values(&[0.0, 5.0]).unwrap(), (0.0, 5.0));
        assert_eq!(m.predict(&DMatrix::from_row_slice(1, 2, &[0.0, 5.0])).unwrap(), vec![Label::Pos]);
        assert_eq!(m.predict(&DMatrix::from_row_slice(1, 2, &[5.0, 0.0])).unwrap(), vec![Label::Neg]);
        // equidistant
        assert_eq!(m.predict(&DMatrix::from_row_slice(1, 2, &[2.0, 2.0])).unwrap(), vec![Label::Pos]);
        let tripled = m.rescaled(3.0);
        assert_eq!(tripled.decision_values(&[3.0, 4.0]).unwrap(), m.decision_values(&[3.0, 4.0]).unwrap());
        assert!(m.decision_values(&[1.0]).is_err());
    }

    #[test]
    fn from_parts_enforces_layer_invariant() {
        let cfg = ModelConfig::default();
        let plane = Hyperplane { w: vec![1.0; 105], b: 0.0 };
        let err = TwinModel::from_parts(plane.clone(), plane, None, cfg, 2, FitDiagnostics::default());
        assert!(err.is_err());
        let zero = Hyperplane { w: vec![0.0, 0.0], b: 1.0 };
        let ok = Hyperplane { w: vec![1.0, 0.0], b: 1.0 };
        let err = TwinModel::from_parts(zero, ok, None, raw_cfg(), 2, FitDiagnostics::default()).unwrap_err();
        assert_eq!(err, Error::DegenerateHyperplane { plane: 1 });
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("EF_GBTSVM".parse::<Variant>().unwrap(), Variant::EfGbtsvm);
        assert!("svm".parse::<Variant>().is_err());
    }

    #[test]
    fn rvfl_widths_and_shrinkage() {
        let d = line_data();
        let with = fit_rvfl_baseline(5, Activation::Sigmoid, 1e-3, 1, &d, true).unwrap();
        assert_eq!(with.feature_width(), 6);
        let without = fit_rvfl_baseline(5, Activation::Sigmoid, 1e-3, 1, &d, false).unwrap();
        assert_eq!(without.feature_width(), 5);
        let shrunk = fit_rvfl_baseline(5, Activation::Sigmoid, 1e9, 1, &d, true).unwrap();
        let norm: f64 = shrunk.weights().iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm <= 1e-3, "{norm}");
        assert!(fit_rvfl_baseline(5, Activation::Sigmoid, 0.0, 1, &d, true).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig { d1: 0.0, ..ModelConfig::default() }.validate().is_err());
        assert!(ModelConfig { eta: 0.5, ..ModelConfig::default() }.validate().is_err());
        assert!(ModelConfig { hidden: 0, ..ModelConfig::default() }.validate().is_err());
        assert!(ModelConfig { hidden: 0, ..raw_cfg() }.validate().is_ok());
    }
}
