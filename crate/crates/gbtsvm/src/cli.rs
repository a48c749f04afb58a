//! Command-line front end. Every subcommand reads its parameters from flags
//! and an optional `--config` file, then writes its artifacts and a report.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gbtsvm_core::dataset::{generate_ndc, Dataset, Label};
use gbtsvm_core::model::{FittedModel, ModelConfig, Variant};
use gbtsvm_core::stats::{compute_metrics, nemenyi_q_05};
use gbtsvm_core::{generate_granular_balls, SolverOptions};

use crate::config::{parse_activation, RunConfig};
use crate::csv_io::{load_csv, load_features, save_dataset, save_labels, CsvOptions, LabelColumn};
use crate::error::{AppError, CoreContext, Result};
use crate::experiment::{
    ablate, benchmark_fit, compare, fit_and_score, grid_search_cv, noise_sweep, prepare, Grid, Protocol, Tuning, NOISE_RATES,
};
use crate::persist::{save_ball_set, SavedModel};
use crate::report::{self, emit_report, DatasetSummary, EvaluationReport, Results};

#[derive(Parser, Debug)]
#[command(name = "gbtsvm", version, about = "Granular-ball twin SVMs in enhanced random-feature space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one variant and write the model JSON and a report.
    Train(Flags),
    /// Label a CSV with a saved model.
    Predict(Flags),
    /// Cross-validated grid search over d, hidden nodes and activation.
    Gridsearch(Flags),
    /// Accuracy versus training-label noise rate.
    NoiseSweep(Flags),
    /// Write a synthetic normally-distributed-clusters dataset.
    GenNdc(Flags),
    /// Fit-time table over growing synthetic datasets.
    ScaleBench(Flags),
    /// Rank variants over a directory of CSV datasets.
    Compare(Flags),
    /// The six granulation / feature-space combinations on one dataset.
    Ablate(Flags),
}

macro_rules! flags {
    ($($field:ident => $key:literal),* $(,)?) => {
        #[derive(clap::Args, Debug, Default)]
        struct Flags {
            /// `key = value` file; flags override its entries.
            #[arg(long)]
            config: Option<PathBuf>,
            $(
                #[arg(long = $key)]
                $field: Option<String>,
            )*
        }

        impl Flags {
            fn map(&self) -> BTreeMap<String, String> {
                let mut m = BTreeMap::new();
                $(
                    if let Some(v) = &self.$field {
                        m.insert($key.to_string(), v.clone());
                    }
                )*
                m
            }
        }
    };
}

flags! {
    data => "data",
    out => "out",
    seed => "seed",
    variant => "variant",
    eta => "eta",
    d1 => "d1",
    d2 => "d2",
    delta => "delta",
    hidden => "hidden",
    activation => "activation",
    folds => "folds",
    ratio => "ratio",
    noise_rate => "noise-rate",
    model => "model",
    report => "report",
    csv => "csv",
    n => "n",
    m => "m",
    clusters => "clusters",
    separability => "separability",
    sizes => "sizes",
    variants => "variants",
    rates => "rates",
    repeats => "repeats",
    tune => "tune",
    normalize => "normalize",
    grid_d => "grid-d",
    grid_hidden => "grid-hidden",
    grid_activation => "grid-activation",
    label_column => "label-column",
    positive_label => "positive-label",
    header => "header",
    q_alpha => "q-alpha",
    balls => "balls",
    tol => "tol",
    max_iter => "max-iter",
}

const MODEL_KEYS: &[&str] = &["variant", "eta", "d1", "d2", "delta", "hidden", "activation", "tol", "max-iter"];
const CSV_KEYS: &[&str] = &["label-column", "positive-label", "header"];
const GRID_KEYS: &[&str] = &["folds", "grid-d", "grid-hidden", "grid-activation"];

fn allowed(command: &str) -> Vec<&'static str> {
    let mut keys: Vec<&'static str> = vec!["seed", "out", "report"];
    let (model, csv, grid, extra): (bool, bool, bool, &[&'static str]) = match command {
        "train" => (true, true, false, &["data", "ratio", "normalize", "noise-rate", "balls"]),
        "predict" => (false, false, false, &["data", "model"]),
        "gridsearch" => (true, true, true, &["data", "ratio", "normalize", "csv"]),
        "noise-sweep" => (true, true, true, &["data", "ratio", "normalize", "rates", "noise-rate", "variants", "tune", "csv"]),
        "gen-ndc" => (false, false, false, &["n", "m", "clusters", "separability"]),
        "scale-bench" => (true, false, false, &["sizes", "m", "clusters", "separability", "variants", "repeats", "ratio", "csv"]),
        "compare" => (true, true, true, &["data", "ratio", "normalize", "variants", "tune", "q-alpha", "csv"]),
        "ablate" => (true, true, true, &["data", "ratio", "normalize", "tune", "csv"]),
        _ => (false, false, false, &[]),
    };
    for (on, group) in [(model, MODEL_KEYS), (csv, CSV_KEYS), (grid, GRID_KEYS)] {
        if on {
            keys.extend_from_slice(group);
        }
    }
    keys.extend_from_slice(extra);
    keys
}

fn model_config(rc: &RunConfig, seed: u64) -> Result<ModelConfig> {
    let base = ModelConfig::default();
    let solver = SolverOptions {
        tol: rc.parse_or("tol", base.solver.tol)?,
        max_iter: rc.parse_or("max-iter", base.solver.max_iter)?,
        ..base.solver
    };
    let cfg = ModelConfig {
        d1: rc.parse_or("d1", base.d1)?,
        d2: rc.parse_or("d2", base.d2)?,
        delta: rc.parse_or("delta", base.delta)?,
        eta: rc.parse_or("eta", base.eta)?,
        hidden: rc.parse_or("hidden", base.hidden)?,
        activation: rc.get("activation").map(parse_activation).transpose()?.unwrap_or(base.activation),
        seed,
        solver,
        ..base
    };
    cfg.validate().context("model configuration")?;
    Ok(cfg)
}

fn variant(rc: &RunConfig) -> Result<Variant> {
    rc.get("variant").map_or(Ok(Variant::EfGbtsvm), |v| v.parse().map_err(|e: gbtsvm_core::Error| AppError::Usage(e.to_string())))
}

fn variants(rc: &RunConfig, default: &[Variant]) -> Result<Vec<Variant>> {
    Ok(rc.list::<Variant>("variants")?.unwrap_or_else(|| default.to_vec()))
}

fn csv_options(rc: &RunConfig) -> Result<CsvOptions> {
    let label_column = match rc.get("label-column") {
        None | Some("last") => LabelColumn::Last,
        Some(_) => LabelColumn::Index(rc.require("label-column")?),
    };
    let has_header = rc.get("header").map(|_| rc.flag("header", false)).transpose()?;
    Ok(CsvOptions { has_header, label_column, positive_label: rc.get("positive-label").map(str::to_string) })
}

fn path(rc: &RunConfig, key: &str) -> Result<PathBuf> {
    rc.get(key).map(PathBuf::from).ok_or_else(|| AppError::Usage(format!("`{}` requires --{key}", rc.command)))
}

fn load_data(rc: &RunConfig) -> Result<Dataset> {
    load_csv(&path(rc, "data")?, &csv_options(rc)?)
}

fn protocol(rc: &RunConfig, seed: u64, tune_default: bool) -> Result<Protocol> {
    let ratio: f64 = rc.parse_or("ratio", 0.7)?;
    let tuning = if rc.flag("tune", tune_default)? { Some(tuning(rc)?) } else { None };
    Ok(Protocol { ratio, seed, normalize: rc.flag("normalize", true)?, tuning })
}

fn tuning(rc: &RunConfig) -> Result<Tuning> {
    let def = Grid::full();
    let activation = match rc.list::<String>("grid-activation")? {
        Some(names) => names.iter().map(|s| parse_activation(s)).collect::<Result<_>>()?,
        None => def.activation,
    };
    let grid = Grid {
        d: rc.list("grid-d")?.unwrap_or(def.d),
        hidden: rc.list("grid-hidden")?.unwrap_or(def.hidden),
        activation,
    };
    Ok(Tuning { folds: rc.parse_or("folds", 5)?, grid })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(AppError::io(path))
}

fn finish(rc: &RunConfig, report: EvaluationReport, csv: Option<String>) -> Result<()> {
    if let Some(p) = rc.get("report").or(rc.get("out")) {
        emit_report(&report, Path::new(p))?;
    }
    if let (Some(p), Some(body)) = (rc.get("csv"), csv) {
        write_text(Path::new(p), &body)?;
    }
    Ok(())
}

fn cmd_gen_ndc(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let n = rc.parse_or("n", 1000)?;
    let m = rc.parse_or("m", 32)?;
    let clusters = rc.parse_or("clusters", 4)?;
    let separability = rc.parse_or("separability", 1.0)?;
    let out = path(rc, "out")?;
    let d = generate_ndc(n, m, clusters, separability, seed).context("generating ndc data")?;
    save_dataset(&out, &d)?;
    let (positives, _) = d.class_counts();
    if let Some(p) = rc.get("report") {
        let r = EvaluationReport::new(rc.clone(), Some(DatasetSummary::of(&d)), Results::GenNdc { n, m, clusters, separability, positives });
        emit_report(&r, Path::new(p))?;
    }
    println!("wrote {} samples x {} features to {}", n, m, out.display());
    Ok(())
}

fn cmd_train(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let data = load_data(rc)?;
    let variant = variant(rc)?;
    let cfg = model_config(rc, seed)?;
    let out = path(rc, "out")?;
    let noise: f64 = rc.parse_or("noise-rate", 0.0)?;
    let proto = Protocol { ratio: rc.parse_or("ratio", 0.7)?, seed, normalize: rc.flag("normalize", true)?, tuning: None };

    let (train, test, scaler) = if rc.get("ratio").is_some() {
        let (tr, te, s) = prepare(&data, &proto, noise)?;
        (tr, Some(te), s)
    } else {
        let mut tr = data.clone();
        if noise > 0.0 {
            tr = gbtsvm_core::dataset::inject_label_noise(&tr, noise, crate::experiment::derive_seed(seed, u64::MAX))
                .context("injecting noise")?;
        }
        if proto.normalize {
            let s = gbtsvm_core::dataset::MinMaxScaler::fit(&tr);
            (s.transform(&tr).context("scaling")?, None, Some(s))
        } else {
            (tr, None, None)
        }
    };

    let scoring_set = test.as_ref().unwrap_or(&train);
    let (model, eval) = fit_and_score(variant, &cfg, &train, scoring_set, &proto)?;
    let train_metrics = compute_metrics(train.labels(), &model.predict(train.features()).context("predicting")?).context("scoring")?;
    let diagnostics = match &model {
        FittedModel::Twin(m) => {
            if !m.diagnostics().converged() {
                eprintln!("warning: a dual did not reach the KKT tolerance; see diagnostics in the report");
            }
            if m.diagnostics().unsplittable_balls > 0 {
                eprintln!("warning: {} impure balls of identical points were kept whole", m.diagnostics().unsplittable_balls);
            }
            Some(m.diagnostics().clone())
        }
        FittedModel::Rvfl(_) => None,
    };
    if let Some(p) = rc.get("balls") {
        let balls = generate_granular_balls(&train, cfg.eta, seed).context("granulating")?;
        save_ball_set(Path::new(p), &balls)?;
    }
    SavedModel { variant, scaler, model }.save(&out)?;

    let test_metrics = test.as_ref().map(|_| eval.metrics);
    let report_path = rc.get("report").map_or_else(|| out.with_extension("report.json"), PathBuf::from);
    let r = EvaluationReport::new(
        rc.clone(),
        Some(DatasetSummary::of(&data)),
        Results::Train { variant, config: eval.config, diagnostics, train_metrics, test_metrics, fit_seconds: eval.fit_seconds },
    );
    emit_report(&r, &report_path)?;
    match test_metrics {
        Some(t) => println!("{variant}: train accuracy {:.4}, test accuracy {:.4}", train_metrics.accuracy, t.accuracy),
        None => println!("{variant}: train accuracy {:.4}", train_metrics.accuracy),
    }
    Ok(())
}

fn parse_label_token(t: &str) -> Option<Label> {
    match t.trim().parse::<f64>().ok()? {
        1.0 => Some(Label::Pos),
        -1.0 => Some(Label::Neg),
        _ => None,
    }
}

fn cmd_predict(rc: &RunConfig) -> Result<()> {
    let model = SavedModel::load(&path(rc, "model")?)?;
    let (x, tokens) = load_features(&path(rc, "data")?, model.input_dim())?;
    let labels = model.predict(&x)?;
    let out = path(rc, "out")?;
    save_labels(&out, &labels)?;
    let truth: Option<Vec<Label>> = tokens.and_then(|t| t.iter().map(|s| parse_label_token(s)).collect());
    let metrics = truth.map(|t| compute_metrics(&t, &labels)).transpose().context("scoring")?;
    if let Some(p) = rc.get("report") {
        let r = EvaluationReport::new(rc.clone(), None, Results::Predict { n: labels.len(), positives: report::count_positives(&labels), metrics });
        emit_report(&r, Path::new(p))?;
    }
    match metrics {
        Some(m) => println!("labeled {} rows to {} (accuracy {:.4})", labels.len(), out.display(), m.accuracy),
        None => println!("labeled {} rows to {}", labels.len(), out.display()),
    }
    Ok(())
}

fn cmd_gridsearch(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let data = load_data(rc)?;
    let variant = variant(rc)?;
    let cfg = model_config(rc, seed)?;
    let proto = protocol(rc, seed, false)?;
    let tune = tuning(rc)?;
    let (train, test, _) = prepare(&data, &proto, 0.0)?;
    let grid = grid_search_cv(&train, variant, &cfg, tune.folds, &tune.grid, seed)?;
    let (_, eval) = fit_and_score(variant, &grid.best, &train, &test, &proto)?;
    println!(
        "{variant}: best d={} hidden={} activation={} cv accuracy {:.4}, test accuracy {:.4}",
        grid.best.d1,
        grid.best.hidden,
        grid.best.activation.index(),
        grid.table[grid.best_index].mean_accuracy.unwrap_or(f64::NAN),
        eval.metrics.accuracy
    );
    let csv = report::grid_csv(&grid);
    finish(rc, EvaluationReport::new(rc.clone(), Some(DatasetSummary::of(&data)), Results::Gridsearch { grid, test_metrics: eval.metrics }), Some(csv))
}

fn cmd_noise_sweep(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let data = load_data(rc)?;
    let cfg = model_config(rc, seed)?;
    let proto = protocol(rc, seed, false)?;
    let rates = match (rc.list::<f64>("rates")?, rc.parse::<f64>("noise-rate")?) {
        (Some(r), _) => r,
        (None, Some(r)) => vec![r],
        (None, None) => NOISE_RATES.to_vec(),
    };
    if let Some(bad) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(AppError::Usage(format!("noise rate {bad} is outside [0, 1]")));
    }
    let vs = variants(rc, &Variant::ALL)?;
    let rows = noise_sweep(&data, &vs, &rates, &cfg, &proto)?;
    for r in &rows {
        println!("rate {:.2} {:>10}: {:.4}", r.rate, r.variant.name(), r.accuracy);
    }
    let csv = report::noise_csv(&rows);
    finish(rc, EvaluationReport::new(rc.clone(), Some(DatasetSummary::of(&data)), Results::NoiseSweep { rows }), Some(csv))
}

fn cmd_scale_bench(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let sizes: Vec<usize> = rc.list("sizes")?.unwrap_or_else(|| vec![1000, 5000, 20000]);
    let m = rc.parse_or("m", 32)?;
    let clusters = rc.parse_or("clusters", 2)?;
    let separability = rc.parse_or("separability", 2.0)?;
    let cfg = model_config(rc, seed)?;
    let proto = Protocol { ratio: rc.parse_or("ratio", 0.7)?, seed, normalize: true, tuning: None };
    let vs = variants(rc, &[Variant::EfGbtsvm, Variant::Gbtsvm, Variant::Tsvm])?;
    let data: Vec<Dataset> = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| generate_ndc(n, m, clusters, separability, crate::experiment::derive_seed(seed, i as u64)).context("generating ndc data"))
        .collect::<Result<_>>()?;
    let rows = benchmark_fit(&data, &vs, &cfg, &proto, rc.parse_or("repeats", 3)?)?;
    for r in &rows {
        println!("n={:>8} {:>10}: {:.4}s  accuracy {:.4}", r.n, r.variant.name(), r.fit_seconds, r.accuracy);
    }
    let csv = report::timing_csv(&rows);
    finish(rc, EvaluationReport::new(rc.clone(), None, Results::ScaleBench { rows }), Some(csv))
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(AppError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(AppError::Data(format!("{}: no .csv files", dir.display())));
    }
    Ok(files)
}

fn cmd_compare(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let opts = csv_options(rc)?;
    let sets: Vec<(String, Dataset)> = csv_files(&path(rc, "data")?)?
        .into_iter()
        .map(|p| load_csv(&p, &opts).map(|d| (d.meta().source.clone(), d)))
        .collect::<Result<_>>()?;
    let cfg = model_config(rc, seed)?;
    let proto = protocol(rc, seed, false)?;
    let vs = variants(rc, &Variant::ALL)?;
    let q_alpha = rc.parse::<f64>("q-alpha")?.or_else(|| nemenyi_q_05(vs.len()));
    let comparison = compare(&sets, &vs, &cfg, &proto, q_alpha)?;
    for (v, r) in comparison.variants.iter().zip(&comparison.ranks.average) {
        println!("{:>10}: average rank {:.3}", v.name(), r);
    }
    if let Some(f) = &comparison.friedman {
        println!("friedman chi2 {:.3}, F_F {}", f.chi2, f.ff.map_or("inf".into(), |x| format!("{x:.3}")));
    }
    if let Some(cd) = comparison.critical_difference {
        println!("nemenyi critical difference {cd:.4}");
    }
    let csv = report::comparison_csv(&comparison);
    finish(rc, EvaluationReport::new(rc.clone(), None, Results::Compare { comparison }), Some(csv))
}

fn cmd_ablate(rc: &RunConfig) -> Result<()> {
    let seed = rc.seed()?;
    let data = load_data(rc)?;
    let cfg = model_config(rc, seed)?;
    let proto = protocol(rc, seed, false)?;
    let rows = ablate(&data, &cfg, &proto)?;
    for r in &rows {
        println!("{:>10}: accuracy {:.4}", r.variant.name(), r.evaluation.metrics.accuracy);
    }
    let csv = report::ablation_csv(&rows);
    finish(rc, EvaluationReport::new(rc.clone(), Some(DatasetSummary::of(&data)), Results::Ablate { rows }), Some(csv))
}

fn dispatch(cli: Cli) -> Result<()> {
    let (name, flags, handler): (&str, &Flags, fn(&RunConfig) -> Result<()>) = match &cli.command {
        Command::Train(f) => ("train", f, cmd_train),
        Command::Predict(f) => ("predict", f, cmd_predict),
        Command::Gridsearch(f) => ("gridsearch", f, cmd_gridsearch),
        Command::NoiseSweep(f) => ("noise-sweep", f, cmd_noise_sweep),
        Command::GenNdc(f) => ("gen-ndc", f, cmd_gen_ndc),
        Command::ScaleBench(f) => ("scale-bench", f, cmd_scale_bench),
        Command::Compare(f) => ("compare", f, cmd_compare),
        Command::Ablate(f) => ("ablate", f, cmd_ablate),
    };
    let rc = RunConfig::build(name, &allowed(name), flags.config.as_deref(), flags.map())?;
    handler(&rc)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Re-runs the command recorded in a report's embedded configuration.
pub fn rerun(config: &RunConfig) -> Result<()> {
    let handler: fn(&RunConfig) -> Result<()> = match config.command.as_str() {
        "train" => cmd_train,
        "predict" => cmd_predict,
        "gridsearch" => cmd_gridsearch,
        "noise-sweep" => cmd_noise_sweep,
        "gen-ndc" => cmd_gen_ndc,
        "scale-bench" => cmd_scale_bench,
        "compare" => cmd_compare,
        "ablate" => cmd_ablate,
        other => return Err(AppError::Usage(format!("unknown command `{other}`"))),
    };
    let rc = RunConfig::build(&config.command, &allowed(&config.command), None, config.params.clone())?;
    handler(&rc)
}
