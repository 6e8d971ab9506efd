//! Plain-text series ingestion and report serialization.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::AggregateResult;
use crate::model::{ARModel, ChangepointConfig, Series};

fn parse_value(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("'{}' is not a number", field.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value '{}'", field.trim()),
        });
    }
    Ok(v)
}

fn is_skipped(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parse one value per line, or the named column of a CSV table with a
/// header row. Blank lines and `#` comments are skipped.
pub fn parse_series(text: &str, column: Option<&str>) -> Result<Series> {
    let values = match column {
        None => parse_single_column(text)?,
        Some(name) => parse_csv_column(text, name)?,
    };
    if values.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "no observations found".into(),
        });
    }
    Series::new(values).map_err(|e| Error::Parse {
        line: text.lines().count().max(1),
        message: e.to_string(),
    })
}

fn parse_single_column(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_skipped(line) {
            continue;
        }
        if line.contains(',') {
            return Err(Error::Parse {
                line: i + 1,
                message: "several fields on one line; select one with --column".into(),
            });
        }
        values.push(parse_value(line, i + 1)?);
    }
    Ok(values)
}

fn parse_csv_column(text: &str, name: &str) -> Result<Vec<f64>> {
    let kept: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !is_skipped(l))
        .map(|(i, l)| (i + 1, l))
        .collect();
    let Some(((header_line, header), rows)) = kept.split_first() else {
        return Ok(Vec::new());
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(header.as_bytes());
    let header = reader
        .records()
        .next()
        .transpose()
        .map_err(|e| Error::Parse {
            line: *header_line,
            message: e.to_string(),
        })?
        .unwrap_or_default();
    let idx = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Parse {
            line: *header_line,
            message: format!("no column named '{name}' in header"),
        })?;
    rows.iter()
        .map(|&(line, row)| {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_reader(row.as_bytes());
            let record = reader
                .records()
                .next()
                .transpose()
                .map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?
                .unwrap_or_default();
            let field = record.get(idx).ok_or_else(|| Error::Parse {
                line,
                message: format!(
                    "row has {} fields, column '{name}' is field {}",
                    record.len(),
                    idx + 1
                ),
            })?;
            parse_value(field, line)
        })
        .collect()
}

pub fn read_series(path: &Path, column: Option<&str>) -> Result<Series> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text, column)
}

/// One value per line, preceded by optional `#` header lines. Values are
/// written in shortest round-trip form.
pub fn format_series(values: &[f64], header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

/// Parameters of a simulated series, written next to it for later scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub coeffs: Vec<f64>,
    pub noise_var: f64,
    pub n: usize,
    pub changepoint_times: Vec<usize>,
    pub segment_means: Vec<f64>,
    pub seed: u64,
    pub burnin: usize,
}

impl Truth {
    pub fn new(
        model: &ARModel,
        config: &ChangepointConfig,
        n: usize,
        seed: u64,
        burnin: usize,
    ) -> Self {
        Self {
            coeffs: model.coeffs().to_vec(),
            noise_var: model.noise_var(),
            n,
            changepoint_times: config.times().to_vec(),
            segment_means: config.means().to_vec(),
            seed,
            burnin,
        }
    }
}

pub fn read_truth(path: &Path) -> Result<Truth> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    design: &'static str,
    seed: u64,
    reps: usize,
    spec: &'a crate::experiments::ScenarioSpec,
    files: [&'static str; 2],
    summary_rows: usize,
    records: usize,
}

pub const RECORDS_FILE: &str = "replications.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Write the per-replication table, the summary table and the manifest.
pub fn write_experiment(dir: &Path, result: &AggregateResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_text(&dir.join(RECORDS_FILE), &csv_string(&result.records)?)?;
    write_text(&dir.join(SUMMARY_FILE), &csv_string(&result.summary)?)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        design: result.spec.design.name(),
        seed: result.spec.seed,
        reps: result.spec.reps,
        spec: &result.spec,
        files: [RECORDS_FILE, SUMMARY_FILE],
        summary_rows: result.summary.len(),
        records: result.records.len(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}
