//! Schema-versioned JSON run reports and flat CSV exports.

use std::fmt::Write as _;
use std::path::Path;

use gbtsvm_core::dataset::{Dataset, Label};
use gbtsvm_core::model::{FitDiagnostics, ModelConfig, Variant};
use gbtsvm_core::stats::Metrics;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::experiment::{AblationRow, Comparison, GridResult, NoiseRow, TimingRow};
use crate::error::{AppError, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub n: usize,
    pub m: usize,
    pub positives: usize,
    pub negatives: usize,
}

impl DatasetSummary {
    pub fn of(d: &Dataset) -> Self {
        let (positives, negatives) = d.class_counts();
        DatasetSummary { source: d.meta().source.clone(), n: d.n(), m: d.m(), positives, negatives }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Results {
    Train {
        variant: Variant,
        config: ModelConfig,
        diagnostics: Option<FitDiagnostics>,
        train_metrics: Metrics,
        test_metrics: Option<Metrics>,
        fit_seconds: f64,
    },
    Predict {
        n: usize,
        positives: usize,
        metrics: Option<Metrics>,
    },
    Gridsearch {
        grid: GridResult,
        test_metrics: Metrics,
    },
    NoiseSweep {
        rows: Vec<NoiseRow>,
    },
    GenNdc {
        n: usize,
        m: usize,
        clusters: usize,
        separability: f64,
        positives: usize,
    },
    ScaleBench {
        rows: Vec<TimingRow>,
    },
    Compare {
        comparison: Comparison,
    },
    Ablate {
        rows: Vec<AblationRow>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub tool: String,
    pub config: RunConfig,
    pub dataset: Option<DatasetSummary>,
    pub results: Results,
}

impl EvaluationReport {
    pub fn new(config: RunConfig, dataset: Option<DatasetSummary>, results: Results) -> Self {
        EvaluationReport {
            schema_version: REPORT_SCHEMA_VERSION,
            tool: concat!("gbtsvm ", env!("CARGO_PKG_VERSION")).to_string(),
            config,
            dataset,
            results,
        }
    }
}

pub fn emit_report(report: &EvaluationReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(AppError::io(path))
}

pub fn parse_report(text: &str) -> Result<EvaluationReport> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| AppError::Data(format!("invalid report: {e}")))?;
    match value.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(AppError::Data(format!(
                "report schema version {v} is not supported (expected {REPORT_SCHEMA_VERSION})"
            )))
        }
        None => return Err(AppError::Data("report has no schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| AppError::Data(format!("invalid report: {e}")))
}

pub fn read_report(path: &Path) -> Result<EvaluationReport> {
    let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
    parse_report(&text)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per grid combination.
pub fn grid_csv(grid: &GridResult) -> String {
    let mut s = String::from("index,d,hidden,activation,mean_accuracy,skipped_folds\n");
    for r in &grid.table {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.index, r.d, r.hidden, r.activation.index(), opt(r.mean_accuracy), r.skipped.len());
    }
    s
}

pub fn noise_csv(rows: &[NoiseRow]) -> String {
    let mut s = String::from("rate,variant,accuracy\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.rate, r.variant, r.accuracy);
    }
    s
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut s = String::from("variant,n,training_rows,fit_seconds,accuracy\n");
    for r in rows {
        let k = r.training_rows.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{}", r.variant, r.n, k, r.fit_seconds, r.accuracy);
    }
    s
}

/// Accuracy matrix with a trailing average-rank row.
pub fn comparison_csv(c: &Comparison) -> String {
    let mut s = String::from("dataset");
    for v in &c.variants {
        let _ = write!(s, ",{v}");
    }
    s.push('\n');
    for (name, row) in c.datasets.iter().zip(&c.accuracy) {
        s.push_str(name);
        for a in row {
            let _ = write!(s, ",{a}");
        }
        s.push('\n');
    }
    s.push_str("average_rank");
    for r in &c.ranks.average {
        let _ = write!(s, ",{r}");
    }
    s.push('\n');
    s
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut s = String::from("variant,granulate,feature_space,accuracy,training_rows,fit_seconds\n");
    for r in rows {
        let k = r.evaluation.training_rows.map(|k| k.to_string()).unwrap_or_default();
        let space = format!("{:?}", r.feature_space).to_ascii_lowercase();
        let _ = writeln!(s, "{},{},{},{},{},{}", r.variant, r.granulate, space, r.evaluation.metrics.accuracy, k, r.evaluation.fit_seconds);
    }
    s
}

pub fn count_positives(labels: &[Label]) -> usize {
    labels.iter().filter(|l| **l == Label::Pos).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sample() -> EvaluationReport {
        let cfg = RunConfig { command: "gen-ndc".into(), params: BTreeMap::from([("seed".into(), "7".into())]) };
        EvaluationReport::new(cfg, None, Results::GenNdc { n: 10, m: 2, clusters: 2, separability: 1.5, positives: 5 })
    }

    #[test]
    fn report_round_trips_with_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let r = sample();
        emit_report(&r, &path).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.config.get("seed"), Some("7"));
    }

    #[test]
    fn schema_mismatch_is_explicit() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["schema_version"] = 2.into();
        let err = parse_report(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("schema version 2"), "{err}");
    }
}
