//! Comma-separated datasets: one sample per row, features as real numbers
//! and a two-valued label column.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use gbtsvm_core::dataset::{Dataset, DatasetMeta, Label};
use nalgebra::DMatrix;

use crate::error::{AppError, CoreContext, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
}

impl LabelColumn {
    fn resolve(&self, width: usize) -> Result<usize> {
        match *self {
            LabelColumn::Last => Ok(width - 1),
            LabelColumn::Index(i) if i < width => Ok(i),
            LabelColumn::Index(i) => Err(AppError::Data(format!("label column {i} out of range for {width} columns"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CsvOptions {
    /// `None` detects a header from a non-numeric feature cell in the first row.
    pub has_header: Option<bool>,
    pub label_column: LabelColumn,
    /// Token mapped to `+1`. Without one, two numeric tokens map the larger
    /// to `+1`; otherwise the lexicographically smaller token is `+1`.
    pub positive_label: Option<String>,
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input)
}

fn records<R: Read>(input: R) -> Result<Vec<csv::StringRecord>> {
    reader(input)
        .into_records()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| AppError::Data(format!("malformed row {}: {e}", i + 1))))
        .filter(|r| !matches!(r, Ok(rec) if rec.iter().all(str::is_empty)))
        .collect()
}

fn parse_cell(cell: &str, line: usize, col: usize) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| AppError::Data(format!("non-numeric feature cell `{cell}` at row {line}, column {}", col + 1)))?;
    if !v.is_finite() {
        return Err(AppError::Data(format!("non-finite feature cell at row {line}, column {}", col + 1)));
    }
    Ok(v)
}

fn label_map(tokens: &BTreeSet<String>, positive: Option<&str>) -> Result<String> {
    if tokens.len() > 2 {
        let shown: Vec<&str> = tokens.iter().map(String::as_str).collect();
        return Err(AppError::Data(format!("more than two classes in label column: {}", shown.join(", "))));
    }
    if let Some(p) = positive {
        return Ok(p.to_string());
    }
    let numeric: Option<Vec<f64>> = tokens.iter().map(|t| t.parse::<f64>().ok()).collect();
    Ok(match numeric {
        Some(values) if values.len() == 2 => {
            let larger = if values[0] >= values[1] { 0 } else { 1 };
            tokens.iter().nth(larger).cloned().unwrap_or_default()
        }
        Some(values) if values.len() == 1 => {
            // a lone numeric class is positive only when it is positive
            let t = tokens.iter().next().cloned().unwrap_or_default();
            if values[0] > 0.0 { t } else { String::new() }
        }
        _ => tokens.iter().next().cloned().unwrap_or_default(),
    })
}

/// Parses a labeled dataset from CSV text.
pub fn parse_csv<R: Read>(input: R, opts: &CsvOptions, source: &str) -> Result<Dataset> {
    let rows = records(input)?;
    let first = rows.first().ok_or_else(|| AppError::Data(format!("{source}: empty file")))?;
    let width = first.len();
    if width < 2 {
        return Err(AppError::Data(format!("{source}: need at least one feature column and a label column")));
    }
    let label_col = opts.label_column.resolve(width)?;
    let header = opts.has_header.unwrap_or_else(|| {
        first.iter().enumerate().any(|(j, c)| j != label_col && c.parse::<f64>().is_err())
    });

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, rec) in rows.iter().enumerate().skip(usize::from(header)) {
        let line = i + 1;
        if rec.len() != width {
            return Err(AppError::Data(format!("malformed row {line}: expected {width} columns, found {}", rec.len())));
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == label_col {
                raw_labels.push(cell.to_string());
            } else {
                features.push(parse_cell(cell, line, j)?);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(AppError::Data(format!("{source}: no data rows")));
    }
    let tokens: BTreeSet<String> = raw_labels.iter().cloned().collect();
    let positive = label_map(&tokens, opts.positive_label.as_deref())?;
    let labels = raw_labels.iter().map(|t| if *t == positive { Label::Pos } else { Label::Neg }).collect();
    let x = DMatrix::from_row_slice(raw_labels.len(), width - 1, &features);
    Dataset::new(x, labels, DatasetMeta::named(source)).context("loading csv")
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(AppError::io(path))?;
    let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    parse_csv(std::io::BufReader::new(file), opts, &name).map_err(|e| match e {
        AppError::Data(msg) => AppError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads an unlabeled feature matrix, or a labeled one when the file has
/// exactly one column more than `expected_m` (the last column is then the
/// label and is returned separately).
pub fn load_features(path: &Path, expected_m: usize) -> Result<(DMatrix<f64>, Option<Vec<String>>)> {
    let file = std::fs::File::open(path).map_err(AppError::io(path))?;
    let rows = records(std::io::BufReader::new(file))?;
    let first = rows.first().ok_or_else(|| AppError::Data(format!("{}: empty file", path.display())))?;
    let width = first.len();
    let labeled = match width {
        w if w == expected_m => false,
        w if w == expected_m + 1 => true,
        w => {
            return Err(AppError::Data(format!(
                "{}: model expects m = {expected_m} features, file has {w} columns",
                path.display()
            )))
        }
    };
    let header = first.iter().take(expected_m).any(|c| c.parse::<f64>().is_err());
    let mut values = Vec::new();
    let mut labels = labeled.then(Vec::new);
    for (i, rec) in rows.iter().enumerate().skip(usize::from(header)) {
        if rec.len() != width {
            return Err(AppError::Data(format!("malformed row {}: expected {width} columns, found {}", i + 1, rec.len())));
        }
        for (j, cell) in rec.iter().enumerate().take(expected_m) {
            values.push(parse_cell(cell, i + 1, j)?);
        }
        if let Some(l) = labels.as_mut() {
            l.push(rec[expected_m].to_string());
        }
    }
    let n = values.len() / expected_m.max(1);
    Ok((DMatrix::from_row_slice(n, expected_m, &values), labels))
}

fn fmt_row(out: &mut String, row: impl Iterator<Item = f64>) {
    for v in row {
        out.push_str(&v.to_string());
        out.push(',');
    }
}

/// Writes features then a `label` column holding `1` / `-1`, with a header.
pub fn write_dataset<W: Write>(mut w: W, d: &Dataset) -> std::io::Result<()> {
    let header: Vec<String> = (1..=d.m()).map(|j| format!("x{j}")).chain(["label".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..d.n() {
        line.clear();
        fmt_row(&mut line, d.features().row(i).iter().copied());
        line.push_str(&d.labels()[i].to_string());
        writeln!(w, "{line}")?;
    }
    w.flush()
}

pub fn save_dataset(path: &Path, d: &Dataset) -> Result<()> {
    let file = std::fs::File::create(path).map_err(AppError::io(path))?;
    write_dataset(std::io::BufWriter::new(file), d).map_err(AppError::io(path))
}

pub fn save_labels(path: &Path, labels: &[Label]) -> Result<()> {
    let mut body = String::from("label\n");
    for l in labels {
        body.push_str(&l.to_string());
        body.push('\n');
    }
    std::fs::write(path, body).map_err(AppError::io(path))
}
