//! Delimited-text input and output. Indices are 1-based in every file.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{saicc, ModelScore, PipelineOutcome};
use crate::report::ScreenReport;
use crate::sim::{RepStats, SimResult, Summary};

/// A numeric matrix stored one observation per line.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub path: PathBuf,
    pub delimiter: u8,
    pub has_header: bool,
}

impl MatrixFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            delimiter: b',',
            has_header: false,
        }
    }

    pub fn delimiter(mut self, delimiter: u8) -> Self {
        self.delimiter = delimiter;
        self
    }

    pub fn header(mut self, has_header: bool) -> Self {
        self.has_header = has_header;
        self
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path, source),
        other => parse_err(path, row, 0, format!("{other:?}")),
    }
}

/// Reads a rectangular numeric matrix. Row numbers in errors are file line
/// numbers; columns are 1-based.
pub fn load_matrix(file: &MatrixFile) -> Result<(Array2<f64>, Option<Vec<String>>)> {
    let path = file.path.as_path();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(file.delimiter)
        .has_headers(file.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;

    let names = if file.has_header {
        let header = reader.headers().map_err(|e| csv_err(path, e))?;
        let names: Vec<String> = header.iter().map(str::to_owned).collect();
        let mut seen = HashSet::new();
        for (c, name) in names.iter().enumerate() {
            if !seen.insert(name.as_str()) {
                return Err(parse_err(path, 1, c + 1, format!("duplicate header name '{name}'")));
            }
        }
        Some(names)
    } else {
        None
    };

    let mut width = names.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    path,
                    line,
                    record.len().min(w) + 1,
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
            Some(_) => {}
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(path, line, c + 1, format!("'{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(path, line, c + 1, format!("'{cell}' is not finite")));
            }
            values.push(v);
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(parse_err(path, 0, 0, "no data rows"));
    }
    let m = Array2::from_shape_vec((rows, cols), values).expect("rectangular by construction");
    Ok((m, names))
}

pub fn load_dataset(x_file: &MatrixFile, y_file: &MatrixFile) -> Result<Dataset> {
    let (x, x_names) = load_matrix(x_file)?;
    let (y, y_names) = load_matrix(y_file)?;
    let mut data = Dataset::new(x, y)?;
    if let Some(names) = x_names {
        data = data.with_feature_names(names)?;
    }
    if let Some(names) = y_names {
        data = data.with_response_names(names)?;
    }
    Ok(data)
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn join_indices(indices: &[usize]) -> String {
    indices.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(";")
}

fn join_names(indices: &[usize], names: &[String]) -> String {
    indices.iter().map(|&j| names[j].as_str()).collect::<Vec<_>>().join(";")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn finish(path: &Path, mut w: impl Write) -> Result<()> {
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes a report as CSV. The `names` column is present only when
/// feature names are supplied.
pub fn write_report_to(w: &mut impl Write, report: &ScreenReport, names: Option<&[String]>) -> std::io::Result<()> {
    if names.is_some() {
        writeln!(w, "rank,indices,names,utility")?;
    } else {
        writeln!(w, "rank,indices,utility")?;
    }
    for (pos, s) in report.scores().iter().enumerate() {
        let ix = join_indices(&s.indices);
        match names {
            Some(n) => writeln!(w, "{},{},{},{}", pos + 1, ix, join_names(&s.indices, n), format_value(s.value))?,
            None => writeln!(w, "{},{},{}", pos + 1, ix, format_value(s.value))?,
        }
    }
    Ok(())
}

pub fn write_report(report: &ScreenReport, names: Option<&[String]>, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_report_to(&mut w, report, names).map_err(|e| io_err(path, e))?;
    finish(path, w)
}

/// Reads back the `utility` column of a written report.
pub fn read_report_utilities(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "utility")
        .ok_or_else(|| parse_err(path, 1, 0, "missing 'utility' column"))?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        out.push(
            rec[col]
                .parse()
                .map_err(|_| parse_err(path, i + 2, col + 1, "bad utility"))?,
        );
    }
    Ok(out)
}

/// Aggregate statistics in long form: method,statistic,value.
pub fn write_sim_summary_to(w: &mut impl Write, result: &SimResult) -> std::io::Result<()> {
    writeln!(w, "sim,reps,base_seed,method,statistic,value")?;
    let prefix = format!("{},{},{}", result.config_id, result.reps, result.base_seed);
    for m in &result.methods {
        let stats: Vec<(String, f64)> = match &m.summary {
            Summary::Marginal(s) => vec![
                ("mean_best".into(), s.mean_best),
                ("mean_medial".into(), s.mean_medial),
                ("mean_worst".into(), s.mean_worst),
                ("median_best".into(), s.median_best),
                ("median_medial".into(), s.median_medial),
                ("median_worst".into(), s.median_worst),
            ],
            Summary::Interaction(s) => {
                let mut v: Vec<(String, f64)> = s
                    .p_in_window
                    .iter()
                    .enumerate()
                    .map(|(t, &p)| (format!("p_truth_{}", t + 1), p))
                    .collect();
                v.extend([
                    ("p_top".into(), s.p_top),
                    ("p_all".into(), s.p_all),
                    ("q25".into(), s.q25),
                    ("q50".into(), s.q50),
                    ("q75".into(), s.q75),
                    ("q90".into(), s.q90),
                ]);
                v
            }
        };
        for (name, value) in stats {
            writeln!(w, "{prefix},{},{name},{value}", m.method)?;
        }
    }
    Ok(())
}

/// Per-replicate ranks, one line per (method, replicate).
pub fn write_sim_reps_to(w: &mut impl Write, result: &SimResult) -> std::io::Result<()> {
    let interaction = matches!(result.methods.first().map(|m| &m.reps), Some(RepStats::Interaction(_)));
    if interaction {
        let truths = match &result.methods[0].reps {
            RepStats::Interaction(v) => v.first().map_or(0, |r| r.ranks.len()),
            RepStats::Marginal(_) => 0,
        };
        let cols: Vec<String> = (1..=truths).map(|t| format!("rank_truth_{t}")).collect();
        writeln!(w, "method,rep,{},min_model_size", cols.join(","))?;
    } else {
        writeln!(w, "method,rep,best,medial,worst")?;
    }
    for m in &result.methods {
        match &m.reps {
            RepStats::Marginal(v) => {
                for (rep, r) in v.iter().enumerate() {
                    writeln!(w, "{},{rep},{},{},{}", m.method, r.best, r.medial, r.worst)?;
                }
            }
            RepStats::Interaction(v) => {
                for (rep, r) in v.iter().enumerate() {
                    let ranks: Vec<String> = r.ranks.iter().map(usize::to_string).collect();
                    writeln!(w, "{},{rep},{},{}", m.method, ranks.join(","), r.min_model_size())?;
                }
            }
        }
    }
    Ok(())
}

/// Writes `summary.csv` and `replicates.csv` into `dir`.
pub fn write_sim_result(result: &SimResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join("summary.csv");
    let mut w = create(&path)?;
    write_sim_summary_to(&mut w, result).map_err(|e| io_err(&path, e))?;
    finish(&path, w)?;
    let path = dir.join("replicates.csv");
    let mut w = create(&path)?;
    write_sim_reps_to(&mut w, result).map_err(|e| io_err(&path, e))?;
    finish(&path, w)
}

pub fn write_pipeline_to(w: &mut impl Write, outcome: &PipelineOutcome, names: Option<&[String]>) -> std::io::Result<()> {
    if names.is_some() {
        writeln!(w, "source,indices,names,utility,rank")?;
    } else {
        writeln!(w, "source,indices,utility,rank")?;
    }
    for row in outcome.rows() {
        let ix = join_indices(&row.indices);
        let value = format_value(row.utility);
        match names {
            Some(n) => writeln!(w, "{},{ix},{},{value},{}", row.source.as_str(), join_names(&row.indices, n), row.rank)?,
            None => writeln!(w, "{},{ix},{value},{}", row.source.as_str(), row.rank)?,
        }
    }
    Ok(())
}

/// Writes `selected.csv` (all features) and `p1.txt` into `dir`.
pub fn write_pipeline(outcome: &PipelineOutcome, names: Option<&[String]>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join("selected.csv");
    let mut w = create(&path)?;
    write_pipeline_to(&mut w, outcome, names).map_err(|e| io_err(&path, e))?;
    finish(&path, w)?;
    let path = dir.join("p1.txt");
    std::fs::write(&path, format!("{}\n", outcome.marginal.p1)).map_err(|e| io_err(&path, e))
}

/// One candidate model from a `model_id,k,deviance,null_deviance` file.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateModel {
    pub model_id: String,
    pub k: usize,
    pub deviance: f64,
    pub null_deviance: f64,
}

pub fn read_candidates(path: &Path) -> Result<Vec<CandidateModel>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(path, 1, 0, format!("missing '{name}' column")))
    };
    let (id_c, k_c, d_c, d0_c) = (find("model_id")?, find("k")?, find("deviance")?, find("null_deviance")?);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        let cell = |c: usize| {
            rec.get(c)
                .ok_or_else(|| parse_err(path, line, c + 1, "missing field"))
        };
        let num = |c: usize| -> Result<f64> {
            let s = cell(c)?;
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, line, c + 1, format!("'{s}' is not a finite number")))
        };
        let k_str = cell(k_c)?;
        out.push(CandidateModel {
            model_id: cell(id_c)?.to_owned(),
            k: k_str
                .parse()
                .map_err(|_| parse_err(path, line, k_c + 1, format!("'{k_str}' is not a count")))?,
            deviance: num(d_c)?,
            null_deviance: num(d0_c)?,
        });
    }
    Ok(out)
}

pub fn score_candidates(models: &[CandidateModel], n: usize, q: usize) -> Result<Vec<(String, ModelScore)>> {
    models
        .iter()
        .map(|m| Ok((m.model_id.clone(), saicc(m.deviance, m.null_deviance, n, q, m.k)?)))
        .collect()
}

pub fn write_saicc_to(w: &mut impl Write, scores: &[(String, ModelScore)]) -> std::io::Result<()> {
    writeln!(w, "model_id,k,deviance,null_deviance,saicc,saicc_scaled")?;
    for (id, s) in scores {
        writeln!(
            w,
            "{id},{},{},{},{},{}",
            s.k,
            format_value(s.deviance),
            format_value(s.null_deviance),
            format_value(s.saicc),
            format_value(s.saicc_scaled)
        )?;
    }
    Ok(())
}

pub fn write_saicc(scores: &[(String, ModelScore)], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_saicc_to(&mut w, scores).map_err(|e| io_err(path, e))?;
    finish(path, w)
}
