//! JSON documents for fitted models and granular-ball sets.
//!
//! A random layer is stored as its generating metadata plus a checksum of
//! the regenerated weights; loading rebuilds the layer and refuses to
//! continue if the checksum differs.

use std::path::Path;

use gbtsvm_core::dataset::{Label, MinMaxScaler};
use gbtsvm_core::feature_map::{Activation, RandomLayer};
use gbtsvm_core::granular_ball::{GranularBallSet, SourceFingerprint};
use gbtsvm_core::model::{FitDiagnostics, FittedModel, Hyperplane, ModelConfig, RvflModel, TwinModel, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, CoreContext, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const BALLS_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub input_dim: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub seed: u64,
    /// SHA-256 of the weights then the bias, as little-endian f64 bits.
    pub checksum: String,
}

impl LayerDoc {
    pub fn of(layer: &RandomLayer) -> Self {
        LayerDoc {
            input_dim: layer.input_dim(),
            hidden: layer.hidden(),
            activation: layer.activation(),
            seed: layer.seed(),
            checksum: layer.checksum(),
        }
    }

    pub fn restore(&self) -> Result<RandomLayer> {
        let layer = RandomLayer::new(self.input_dim, self.hidden, self.activation, self.seed).context("restoring random layer")?;
        if layer.checksum() != self.checksum {
            return Err(AppError::Data(format!(
                "random layer checksum mismatch: stored {}, regenerated {}",
                self.checksum,
                layer.checksum()
            )));
        }
        Ok(layer)
    }
}

fn augmented(p: &Hyperplane) -> Vec<f64> {
    p.w.iter().copied().chain([p.b]).collect()
}

fn split_augmented(u: &[f64], name: &str) -> Result<Hyperplane> {
    let (b, w) = u.split_last().ok_or_else(|| AppError::Data(format!("{name} is empty")))?;
    Ok(Hyperplane { w: w.to_vec(), b: *b })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelBody {
    Twin {
        config: ModelConfig,
        input_dim: usize,
        layer: Option<LayerDoc>,
        /// `(w₊, b₊)` of the `+1` plane.
        u1: Vec<f64>,
        /// `(w₋, b₋)` of the `−1` plane.
        u2: Vec<f64>,
        diagnostics: FitDiagnostics,
    },
    Rvfl {
        layer: LayerDoc,
        direct_links: bool,
        ridge: f64,
        weights: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub variant: Variant,
    /// Train-fitted min-max ranges applied to inputs before prediction.
    pub scaler: Option<MinMaxScaler>,
    #[serde(flatten)]
    pub body: ModelBody,
}

/// A model ready for prediction on raw (unscaled) inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct SavedModel {
    pub variant: Variant,
    pub scaler: Option<MinMaxScaler>,
    pub model: FittedModel,
}

impl SavedModel {
    pub fn input_dim(&self) -> usize {
        self.model.input_dim()
    }

    pub fn predict(&self, x: &nalgebra::DMatrix<f64>) -> Result<Vec<Label>> {
        let scaled;
        let input = match &self.scaler {
            Some(s) => {
                scaled = s.transform_matrix(x).context("scaling inputs")?;
                &scaled
            }
            None => x,
        };
        self.model.predict(input).context("predicting")
    }

    pub fn to_document(&self) -> ModelDocument {
        let body = match &self.model {
            FittedModel::Twin(m) => ModelBody::Twin {
                config: m.config().clone(),
                input_dim: m.input_dim(),
                layer: m.layer().map(LayerDoc::of),
                u1: augmented(m.plane_pos()),
                u2: augmented(m.plane_neg()),
                diagnostics: m.diagnostics().clone(),
            },
            FittedModel::Rvfl(m) => ModelBody::Rvfl {
                layer: LayerDoc::of(m.layer()),
                direct_links: m.direct_links(),
                ridge: m.ridge(),
                weights: m.weights().to_vec(),
            },
        };
        ModelDocument { version: MODEL_FORMAT_VERSION, variant: self.variant, scaler: self.scaler.clone(), body }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(AppError::Data(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                doc.version
            )));
        }
        let model = match doc.body {
            ModelBody::Twin { config, input_dim, layer, u1, u2, diagnostics } => {
                let layer = layer.as_ref().map(LayerDoc::restore).transpose()?;
                let m = TwinModel::from_parts(
                    split_augmented(&u1, "u1")?,
                    split_augmented(&u2, "u2")?,
                    layer,
                    config,
                    input_dim,
                    diagnostics,
                )
                .context("loading twin model")?;
                FittedModel::Twin(m)
            }
            ModelBody::Rvfl { layer, direct_links, ridge, weights } => {
                let m = RvflModel::from_parts(layer.restore()?, direct_links, ridge, weights).context("loading rvfl model")?;
                FittedModel::Rvfl(m)
            }
        };
        if let Some(s) = &doc.scaler {
            if s.mins.len() != model.input_dim() || s.ranges.len() != model.input_dim() {
                return Err(AppError::Data("scaler width does not match model input".into()));
            }
        }
        Ok(SavedModel { variant: doc.variant, scaler: doc.scaler, model })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| AppError::Data(format!("invalid model document: {e}")))?;
        Self::from_document(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(AppError::io(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
        Self::from_json(&text).map_err(|e| match e {
            AppError::Data(msg) => AppError::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallDoc {
    pub center: Vec<f64>,
    pub label: Label,
    pub purity: f64,
    pub count: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSetDocument {
    pub version: u32,
    pub eta: f64,
    pub seed: u64,
    pub k: usize,
    pub unsplittable: usize,
    pub source: SourceFingerprint,
    pub balls: Vec<BallDoc>,
}

impl BallSetDocument {
    pub fn of(set: &GranularBallSet) -> Self {
        BallSetDocument {
            version: BALLS_FORMAT_VERSION,
            eta: set.eta,
            seed: set.seed,
            k: set.k(),
            unsplittable: set.unsplittable,
            source: set.source.clone(),
            balls: set
                .balls
                .iter()
                .map(|b| BallDoc {
                    center: b.center.clone(),
                    label: b.label,
                    purity: b.purity,
                    count: b.count(),
                    members: b.members.clone(),
                })
                .collect(),
        }
    }

    pub fn into_set(self) -> Result<GranularBallSet> {
        if self.version != BALLS_FORMAT_VERSION {
            return Err(AppError::Data(format!("unsupported ball set version {}", self.version)));
        }
        if self.k != self.balls.len() || self.balls.iter().any(|b| b.count != b.members.len()) {
            return Err(AppError::Data("ball set counts are inconsistent".into()));
        }
        let balls = self
            .balls
            .into_iter()
            .map(|b| gbtsvm_core::GranularBall { members: b.members, center: b.center, label: b.label, purity: b.purity })
            .collect();
        Ok(GranularBallSet { balls, eta: self.eta, seed: self.seed, source: self.source, unsplittable: self.unsplittable })
    }
}

pub fn save_ball_set(path: &Path, set: &GranularBallSet) -> Result<()> {
    let text = serde_json::to_string_pretty(&BallSetDocument::of(set)).expect("ball set serializes");
    std::fs::write(path, text).map_err(AppError::io(path))
}

pub fn load_ball_set(path: &Path) -> Result<GranularBallSet> {
    let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
    let doc: BallSetDocument =
        serde_json::from_str(&text).map_err(|e| AppError::Data(format!("{}: invalid ball set: {e}", path.display())))?;
    doc.into_set()
}

#[cfg(test)]
mod tests {
    use super::*;
    use gbtsvm_core::dataset::generate_ndc;
    use gbtsvm_core::model::fit_variant;

    fn saved(variant: Variant) -> (SavedModel, gbtsvm_core::Dataset) {
        let d = generate_ndc(80, 3, 4, 0.5, 3).unwrap();
        let cfg = ModelConfig { hidden: 9, seed: 3, ..ModelConfig::default() };
        let model = fit_variant(variant, &cfg, &d).unwrap();
        (SavedModel { variant, scaler: Some(MinMaxScaler::fit(&d)), model }, d)
    }

    #[test]
    fn every_variant_round_trips() {
        for v in Variant::ALL {
            let (m, d) = saved(v);
            let back = SavedModel::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m, "{v}");
            assert_eq!(back.predict(d.features()).unwrap(), m.predict(d.features()).unwrap());
        }
    }

    #[test]
    fn tampered_checksum_and_version_are_rejected() {
        let (m, _) = saved(Variant::EfGbtsvm);
        let mut doc = m.to_document();
        if let ModelBody::Twin { layer: Some(l), .. } = &mut doc.body {
            l.checksum = "00".into();
        }
        assert!(SavedModel::from_document(doc).unwrap_err().to_string().contains("checksum"));
        let mut doc = m.to_document();
        doc.version = 99;
        assert!(SavedModel::from_document(doc).unwrap_err().to_string().contains("version"));
        let mut doc = m.to_document();
        if let ModelBody::Twin { layer, .. } = &mut doc.body {
            *layer = None;
        }
        assert!(SavedModel::from_document(doc).is_err());
    }

    #[test]
    fn ball_set_round_trips() {
        let d = generate_ndc(60, 2, 4, 0.2, 1).unwrap();
        let g = gbtsvm_core::generate_granular_balls(&d, 0.9, 1).unwrap();
        let text = serde_json::to_string(&BallSetDocument::of(&g)).unwrap();
        let back: BallSetDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_set().unwrap(), g);
    }
}
