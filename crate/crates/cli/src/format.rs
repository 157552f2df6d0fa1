//! Prediction files.
//!
//! JSONL (canonical), one observation per line:
//!
//! ```text
//! {"obs_id":"a","label":1,"predictions":[[0.3,0.7],[0.8,0.2]]}
//! ```
//!
//! CSV, one row per classifier per observation, rows of an observation
//! contiguous and in classifier order. The header is optional; the label
//! column is empty for unlabeled data:
//!
//! ```text
//! obs_id,classifier_idx,label,p0,p1
//! a,0,1,0.3,0.7
//! a,1,1,0.8,0.2
//! ```

use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use yayambo::{validate_distribution, Distribution, EnsembleSnapshot, DEFAULT_TOLERANCE};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// One observation: the ensemble's outputs plus an optional label.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub obs_id: String,
    pub label: Option<usize>,
    pub predictions: EnsembleSnapshot,
    /// 1-based line of the record's first input line.
    pub line: u64,
}

impl PredictionRecord {
    pub fn members(&self) -> usize {
        self.predictions.len()
    }

    pub fn classes(&self) -> usize {
        self.predictions.classes()
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    obs_id: serde_json::Value,
    #[serde(default)]
    label: Option<usize>,
    predictions: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    obs_id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
    predictions: Vec<&'a [f64]>,
}

fn obs_id_string(value: serde_json::Value, line: u64) -> Result<String> {
    match value {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(CliError::Parse {
            line,
            reason: format!("obs_id must be a string, got {other}"),
        }),
    }
}

fn build_record(
    obs_id: String,
    label: Option<usize>,
    rows: &[Vec<f64>],
    line: u64,
    row_lines: &[u64],
) -> Result<PredictionRecord> {
    if rows.is_empty() {
        return Err(CliError::Parse {
            line,
            reason: "no predictions".into(),
        });
    }
    let members = rows
        .iter()
        .enumerate()
        .map(|(row, r)| {
            validate_distribution(r, DEFAULT_TOLERANCE).map_err(|reason| {
                CliError::InvalidDistribution {
                    line: row_lines.get(row).copied().unwrap_or(line),
                    row,
                    reason,
                }
            })
        })
        .collect::<Result<Vec<Distribution>>>()?;
    let classes = members[0].classes();
    if let Some(bad) = members.iter().position(|d| d.classes() != classes) {
        return Err(CliError::Parse {
            line: row_lines.get(bad).copied().unwrap_or(line),
            reason: format!(
                "classifier {bad} has {} classes, classifier 0 has {classes}",
                members[bad].classes()
            ),
        });
    }
    if let Some(y) = label.filter(|&y| y >= classes) {
        return Err(CliError::Parse {
            line,
            reason: format!("label {y} outside [0, {classes})"),
        });
    }
    let predictions = EnsembleSnapshot::new(members).expect("members checked above");
    Ok(PredictionRecord {
        obs_id,
        label,
        predictions,
        line,
    })
}

fn check_shape(records: &[PredictionRecord], next: &PredictionRecord) -> Result<()> {
    if let Some(first) = records.first() {
        if first.members() != next.members() || first.classes() != next.classes() {
            return Err(CliError::InconsistentShape {
                line: next.line,
                expected_members: first.members(),
                expected_classes: first.classes(),
                members: next.members(),
                classes: next.classes(),
            });
        }
    }
    Ok(())
}

pub fn parse_predictions<R: Read>(input: R, format: Format) -> Result<Vec<PredictionRecord>> {
    match format {
        Format::Jsonl => parse_jsonl(std::io::BufReader::new(input)),
        Format::Csv => parse_csv(input),
    }
}

fn parse_jsonl<R: BufRead>(input: R) -> Result<Vec<PredictionRecord>> {
    let mut records = Vec::new();
    for (idx, text) in input.lines().enumerate() {
        let line = idx as u64 + 1;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&text).map_err(|e| CliError::Parse {
            line,
            reason: e.to_string(),
        })?;
        let obs_id = obs_id_string(raw.obs_id, line)?;
        let row_lines = vec![line; raw.predictions.len()];
        let record = build_record(obs_id, raw.label, &raw.predictions, line, &row_lines)?;
        check_shape(&records, &record)?;
        records.push(record);
    }
    Ok(records)
}

struct CsvGroup {
    obs_id: String,
    label: Option<usize>,
    rows: Vec<Vec<f64>>,
    lines: Vec<u64>,
}

impl CsvGroup {
    fn finish(self, records: &mut Vec<PredictionRecord>) -> Result<()> {
        let record = build_record(
            self.obs_id,
            self.label,
            &self.rows,
            self.lines[0],
            &self.lines,
        )?;
        check_shape(records, &record)?;
        records.push(record);
        Ok(())
    }
}

fn parse_csv<R: Read>(input: R) -> Result<Vec<PredictionRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut records = Vec::new();
    let mut group: Option<CsvGroup> = None;

    for (idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(idx as u64 + 1, |p| p.line());
        if idx == 0 && row.get(0) == Some("obs_id") {
            continue;
        }
        if row.len() < 5 {
            return Err(CliError::Parse {
                line,
                reason: "expected obs_id,classifier_idx,label,p0,p1,...".into(),
            });
        }
        let parse_err = |what: &str, value: &str| CliError::Parse {
            line,
            reason: format!("invalid {what} {value:?}"),
        };
        let obs_id = row[0].to_string();
        let classifier: usize = row[1]
            .parse()
            .map_err(|_| parse_err("classifier_idx", &row[1]))?;
        let label = match &row[2] {
            "" => None,
            s => Some(s.parse::<usize>().map_err(|_| parse_err("label", s))?),
        };
        let probs = row
            .iter()
            .skip(3)
            .map(|s| s.parse::<f64>().map_err(|_| parse_err("probability", s)))
            .collect::<Result<Vec<f64>>>()?;

        if group.as_ref().is_some_and(|g| g.obs_id != obs_id) {
            group.take().unwrap().finish(&mut records)?;
        }
        let g = group.get_or_insert_with(|| CsvGroup {
            obs_id,
            label,
            rows: Vec::new(),
            lines: Vec::new(),
        });
        if classifier != g.rows.len() {
            return Err(CliError::Parse {
                line,
                reason: format!(
                    "expected classifier_idx {}, found {classifier}",
                    g.rows.len()
                ),
            });
        }
        if label != g.label {
            return Err(CliError::Parse {
                line,
                reason: "label differs between rows of one observation".into(),
            });
        }
        g.rows.push(probs);
        g.lines.push(line);
    }
    if let Some(g) = group {
        g.finish(&mut records)?;
    }
    Ok(records)
}

/// Writes records in the given format; the output parses back with [`parse_predictions`].
pub fn write_predictions<W: Write>(
    mut out: W,
    records: &[PredictionRecord],
    format: Format,
) -> Result<()> {
    match format {
        Format::Jsonl => {
            for r in records {
                let rec = RecordOut {
                    obs_id: &r.obs_id,
                    label: r.label,
                    predictions: r.predictions.members().iter().map(|d| d.probs()).collect(),
                };
                serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
                out.write_all(b"\n")?;
            }
        }
        Format::Csv => {
            let classes = records.first().map_or(0, PredictionRecord::classes);
            write!(out, "obs_id,classifier_idx,label")?;
            for k in 0..classes {
                write!(out, ",p{k}")?;
            }
            writeln!(out)?;
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                let label = r.label.map(|y| y.to_string()).unwrap_or_default();
                for (i, d) in r.predictions.members().iter().enumerate() {
                    let mut fields = vec![r.obs_id.clone(), i.to_string(), label.clone()];
                    fields.extend(d.probs().iter().map(f64::to_string));
                    w.write_record(&fields)
                        .map_err(|e| std::io::Error::other(e.to_string()))?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}
