//! The four batch commands. Each takes parsed records and returns its
//! output as data; `main` handles files, streams and exit codes.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use yayambo::metrics::{
    decision_agreement, evaluate, prediction_disagreement, LabeledPredictions, MetricsReport,
};
use yayambo::synth::{generate, ArtificialEnsembleSpec};
use yayambo::yayambo::yayambo_fuse;
use yayambo::{Distribution, EnsembleSnapshot, FusionError, FusionRule, YayamboParams};

use crate::error::{CliError, Result};
use crate::format::PredictionRecord;

/// Options shared by `fuse` and `eval`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub rules: Vec<FusionRule>,
    pub params: YayamboParams,
    pub trace: bool,
    pub floor: f64,
}

impl RunConfig {
    pub fn new(
        rules: Vec<FusionRule>,
        params: YayamboParams,
        trace: bool,
        floor: f64,
    ) -> Result<Self> {
        params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(floor > 0.0 && floor < 1.0) {
            return Err(CliError::Config(format!(
                "floor must lie in (0, 1), got {floor}"
            )));
        }
        if rules.is_empty() {
            return Err(CliError::Config("no fusion rule selected".into()));
        }
        Ok(Self {
            rules,
            params,
            trace,
            floor,
        })
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rules: FusionRule::ALL.to_vec(),
            params: YayamboParams::default(),
            trace: false,
            floor: yayambo::metrics::DEFAULT_CE_FLOOR,
        }
    }
}

// ---------------------------------------------------------------------------
// fuse

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub distributions: Vec<Vec<f64>>,
    pub sum_rule: Vec<f64>,
    /// Summed member movement of the step; absent at `t = 0`.
    pub difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuseResult {
    pub obs_id: String,
    pub rule: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fused: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceStep>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FuseResult {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    fn failed(obs_id: &str, rule: FusionRule, err: FusionError) -> Self {
        Self {
            obs_id: obs_id.to_string(),
            rule: rule.name(),
            fused: None,
            decision: None,
            iterations: None,
            converged: None,
            trace: None,
            error: Some(err.to_string()),
        }
    }
}

fn fuse_one(record: &PredictionRecord, rule: FusionRule, config: &RunConfig) -> FuseResult {
    let result = if rule == FusionRule::Yayambo && config.trace {
        yayambo_fuse(&record.predictions, &config.params, true).map(|out| {
            let trace = out
                .trajectory
                .unwrap_or_default()
                .iter()
                .map(|s| TraceStep {
                    t: s.iteration(),
                    distributions: s
                        .distributions()
                        .iter()
                        .map(|d| d.probs().to_vec())
                        .collect(),
                    sum_rule: s.sum_rule().into_vec(),
                    difference: s.last_difference(),
                })
                .collect();
            (
                out.fused,
                out.decision,
                Some(out.iterations),
                Some(out.converged),
                Some(trace),
            )
        })
    } else {
        rule.apply(&record.predictions, &config.params)
            .map(|out| (out.fused, out.decision, out.iterations, out.converged, None))
    };
    match result {
        Ok((fused, decision, iterations, converged, trace)) => FuseResult {
            obs_id: record.obs_id.clone(),
            rule: rule.name(),
            fused: Some(fused.into_vec()),
            decision: Some(decision.class_index()),
            iterations,
            converged,
            trace,
            error: None,
        },
        Err(err) => FuseResult::failed(&record.obs_id, rule, err),
    }
}

/// Fuses every record under every configured rule, in input order
/// (record-major, then rule order). Failed records yield error results.
pub fn cmd_fuse(records: &[PredictionRecord], config: &RunConfig) -> Vec<FuseResult> {
    records
        .par_iter()
        .flat_map_iter(|r| {
            config
                .rules
                .iter()
                .map(move |&rule| fuse_one(r, rule, config))
        })
        .collect()
}

pub fn write_fuse_results<W: Write>(mut out: W, results: &[FuseResult]) -> Result<()> {
    for r in results {
        serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Classifier,
    Rule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub name: String,
    pub kind: RowKind,
    /// Observations that produced an output.
    pub evaluated: usize,
    pub failed: usize,
    pub accuracy: Option<f64>,
    pub cross_entropy: Option<f64>,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
    pub macro_f1: Option<f64>,
}

impl EvalRow {
    fn new(
        name: String,
        kind: RowKind,
        report: Option<MetricsReport>,
        evaluated: usize,
        failed: usize,
    ) -> Self {
        Self {
            name,
            kind,
            evaluated,
            failed,
            accuracy: report.map(|r| r.accuracy),
            cross_entropy: report.map(|r| r.cross_entropy),
            macro_precision: report.map(|r| r.macro_precision),
            macro_recall: report.map(|r| r.macro_recall),
            macro_f1: report.map(|r| r.macro_f1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub observations: usize,
    pub classifiers: usize,
    pub classes: usize,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().map(|r| r.failed).sum()
    }

    pub fn row(&self, name: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

pub fn classifier_name(i: usize) -> String {
    format!("c{i}")
}

fn labels_of(records: &[PredictionRecord]) -> Result<Vec<usize>> {
    records
        .iter()
        .map(|r| {
            r.label.ok_or_else(|| CliError::MissingLabels {
                line: r.line,
                obs_id: r.obs_id.clone(),
            })
        })
        .collect()
}

fn report_for(outputs: &[Distribution], labels: &[usize], floor: f64) -> Option<MetricsReport> {
    LabeledPredictions::new(outputs, labels)
        .ok()
        .map(|p| evaluate(&p, floor))
}

/// Metrics for every classifier column and every configured rule.
pub fn cmd_eval(records: &[PredictionRecord], config: &RunConfig) -> Result<EvalReport> {
    let first = records.first().ok_or(CliError::EmptyInput)?;
    let labels = labels_of(records)?;
    let (m, l) = (first.members(), first.classes());
    let mut rows = Vec::with_capacity(m + config.rules.len());

    for i in 0..m {
        let outputs: Vec<Distribution> = records
            .iter()
            .map(|r| r.predictions.members()[i].clone())
            .collect();
        let report = report_for(&outputs, &labels, config.floor);
        rows.push(EvalRow::new(
            classifier_name(i),
            RowKind::Classifier,
            report,
            records.len(),
            0,
        ));
    }

    for &rule in &config.rules {
        let fused: Vec<Option<Distribution>> = records
            .par_iter()
            .map(|r| {
                rule.apply(&r.predictions, &config.params)
                    .ok()
                    .map(|o| o.fused)
            })
            .collect();
        let (outputs, kept): (Vec<Distribution>, Vec<usize>) = fused
            .into_iter()
            .zip(&labels)
            .filter_map(|(d, &y)| d.map(|d| (d, y)))
            .unzip();
        let failed = records.len() - outputs.len();
        let report = report_for(&outputs, &kept, config.floor);
        rows.push(EvalRow::new(
            rule.name().to_string(),
            RowKind::Rule,
            report,
            outputs.len(),
            failed,
        ));
    }

    Ok(EvalReport {
        observations: records.len(),
        classifiers: m,
        classes: l,
        rows,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

pub fn render_eval(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:>9} {:>13} {:>9} {:>9} {:>9} {:>7}",
        "name", "accuracy", "cross_entropy", "precision", "recall", "f1", "failed"
    );
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:>13} {:>9} {:>9} {:>9} {:>7}",
            r.name,
            cell(r.accuracy),
            cell(r.cross_entropy),
            cell(r.macro_precision),
            cell(r.macro_recall),
            cell(r.macro_f1),
            r.failed
        );
    }
    s
}

// ---------------------------------------------------------------------------
// pairwise

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub classifiers: Vec<String>,
    /// Euclidean distance between stacked outputs; symmetric.
    pub prediction_disagreement: Vec<Vec<f64>>,
    /// Fraction of matching decisions; symmetric.
    pub decision_agreement: Vec<Vec<f64>>,
}

pub fn cmd_pairwise(records: &[PredictionRecord]) -> Result<PairwiseReport> {
    let first = records.first().ok_or(CliError::EmptyInput)?;
    let m = first.members();
    let columns: Vec<Vec<Distribution>> = (0..m)
        .map(|i| {
            records
                .iter()
                .map(|r| r.predictions.members()[i].clone())
                .collect()
        })
        .collect();
    let mut disagreement = vec![vec![0.0; m]; m];
    let mut agreement = vec![vec![1.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            // shapes were checked at parse time
            let d = prediction_disagreement(&columns[a], &columns[b]).expect("aligned columns");
            let g = decision_agreement(&columns[a], &columns[b]).expect("aligned columns");
            disagreement[a][b] = d;
            disagreement[b][a] = d;
            agreement[a][b] = g;
            agreement[b][a] = g;
        }
    }
    Ok(PairwiseReport {
        classifiers: (0..m).map(classifier_name).collect(),
        prediction_disagreement: disagreement,
        decision_agreement: agreement,
    })
}

fn render_upper(s: &mut String, title: &str, names: &[String], matrix: &[Vec<f64>]) {
    let _ = writeln!(s, "{title}");
    let _ = write!(s, "{:<6}", "");
    for n in names {
        let _ = write!(s, " {n:>9}");
    }
    let _ = writeln!(s);
    for (a, row) in matrix.iter().enumerate() {
        let _ = write!(s, "{:<6}", names[a]);
        for (b, v) in row.iter().enumerate() {
            if b < a {
                let _ = write!(s, " {:>9}", "-");
            } else {
                let _ = write!(s, " {v:>9.4}");
            }
        }
        let _ = writeln!(s);
    }
}

pub fn render_pairwise(report: &PairwiseReport) -> String {
    let mut s = String::new();
    render_upper(
        &mut s,
        "prediction disagreement (euclidean)",
        &report.classifiers,
        &report.prediction_disagreement,
    );
    let _ = writeln!(s);
    render_upper(
        &mut s,
        "decision agreement",
        &report.classifiers,
        &report.decision_agreement,
    );
    s
}

// ---------------------------------------------------------------------------
// synth

/// Synthetic ensemble as labeled records with obs_id `0..2n`.
pub fn cmd_synth(spec: &ArtificialEnsembleSpec) -> Vec<PredictionRecord> {
    let data = generate(spec);
    (0..data.len())
        .map(|i| PredictionRecord {
            obs_id: i.to_string(),
            label: Some(data.labels[i]),
            predictions: data.snapshot(i),
            line: i as u64 + 1,
        })
        .collect()
}

/// Records built directly from rows, for callers that already hold matrices.
pub fn record_from_rows(
    obs_id: &str,
    label: Option<usize>,
    rows: &[Vec<f64>],
) -> std::result::Result<PredictionRecord, FusionError> {
    Ok(PredictionRecord {
        obs_id: obs_id.to_string(),
        label,
        predictions: EnsembleSnapshot::from_rows(rows)?,
        line: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_one() -> Vec<PredictionRecord> {
        vec![record_from_rows("t1", Some(0), &[vec![0.3, 0.7], vec![0.8, 0.2]]).unwrap()]
    }

    #[test]
    fn fuse_sum_on_table_one() {
        let config = RunConfig {
            rules: vec![FusionRule::Sum],
            ..RunConfig::default()
        };
        let out = cmd_fuse(&table_one(), &config);
        assert_eq!(out.len(), 1);
        let fused = out[0].fused.as_ref().unwrap();
        assert!((fused[0] - 0.55).abs() < 1e-15);
        assert_eq!(out[0].decision, Some(0));
        assert_eq!(out[0].iterations, None);
    }

    #[test]
    fn fuse_all_fans_out() {
        let out = cmd_fuse(&table_one(), &RunConfig::default());
        let rules: Vec<&str> = out.iter().map(|r| r.rule).collect();
        assert_eq!(rules, ["borda", "majority", "product", "sum", "yayambo"]);
    }

    #[test]
    fn yayambo_trace_has_every_iteration() {
        let config = RunConfig {
            rules: vec![FusionRule::Yayambo],
            trace: true,
            ..RunConfig::default()
        };
        let out = cmd_fuse(&table_one(), &config);
        let trace = out[0].trace.as_ref().unwrap();
        assert_eq!(trace.len(), 8);
        assert_eq!(trace[0].difference, None);
        assert!((trace[1].distributions[0][0] - 0.7130).abs() < 5e-5);
        assert!((trace[1].difference.unwrap() - 0.9435).abs() < 5e-5);
        assert_eq!(out[0].iterations, Some(7));
    }

    #[test]
    fn failing_record_does_not_affect_others() {
        let records = vec![
            record_from_rows("ok", Some(0), &[vec![0.6, 0.4], vec![0.7, 0.3]]).unwrap(),
            record_from_rows("bad", Some(0), &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            record_from_rows("ok2", Some(1), &[vec![0.2, 0.8], vec![0.3, 0.7]]).unwrap(),
        ];
        let config = RunConfig {
            rules: vec![FusionRule::Product],
            ..RunConfig::default()
        };
        let out = cmd_fuse(&records, &config);
        assert!(!out[0].is_error() && out[1].is_error() && !out[2].is_error());
        let alone = cmd_fuse(&records[2..], &config);
        assert_eq!(alone[0], out[2]);

        let report = cmd_eval(&records, &config).unwrap();
        let product = report.row("product").unwrap();
        assert_eq!((product.evaluated, product.failed), (2, 1));
        assert_eq!(product.accuracy, Some(1.0));
        assert_eq!(report.failures(), 1);
    }

    #[test]
    fn eval_requires_labels() {
        let records = vec![record_from_rows("a", None, &[vec![0.6, 0.4]]).unwrap()];
        assert!(matches!(
            cmd_eval(&records, &RunConfig::default()),
            Err(CliError::MissingLabels { .. })
        ));
    }

    #[test]
    fn eval_always_wrong() {
        let records = vec![
            record_from_rows("a", Some(1), &[vec![0.9, 0.1], vec![0.8, 0.2]]).unwrap(),
            record_from_rows("b", Some(0), &[vec![0.1, 0.9], vec![0.4, 0.6]]).unwrap(),
        ];
        let report = cmd_eval(&records, &RunConfig::default()).unwrap();
        for row in &report.rows {
            assert_eq!(row.accuracy, Some(0.0), "{}", row.name);
        }
        let text = render_eval(&report);
        assert!(text.lines().count() == 1 + 2 + 5);
    }

    #[test]
    fn pairwise_diagonal() {
        let records =
            vec![
                record_from_rows("a", None, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.4]])
                    .unwrap(),
            ];
        let report = cmd_pairwise(&records).unwrap();
        for i in 0..3 {
            assert_eq!(report.prediction_disagreement[i][i], 0.0);
            assert_eq!(report.decision_agreement[i][i], 1.0);
        }
        assert!((report.prediction_disagreement[0][1] - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(report.decision_agreement[0][1], 0.0);
        assert_eq!(report.decision_agreement[0][2], 1.0);
        assert!(render_pairwise(&report).contains("1.4142"));
    }

    #[test]
    fn config_validation() {
        assert!(
            RunConfig::new(vec![FusionRule::Sum], YayamboParams::default(), false, 0.0).is_err()
        );
        assert!(RunConfig::new(vec![], YayamboParams::default(), false, 1e-15).is_err());
        let bad = YayamboParams {
            max_iter: 0,
            ..YayamboParams::default()
        };
        assert!(RunConfig::new(vec![FusionRule::Sum], bad, false, 1e-15).is_err());
    }
}
