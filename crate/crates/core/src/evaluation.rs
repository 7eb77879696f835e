//! Scoring audits against ground-truth discrimination scores.

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierModel;
use crate::dataset::{Dataset, Schema};
use crate::graph::AuditRoles;
use crate::situation_test::{audit_with, AuditConfig, AuditError, AuditOptions, DiscriminationReport, SUMMARY_QUANTILES};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {0} estimates vs {1} truths")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
}

pub fn rmse(estimates: &[f64], truths: &[f64]) -> Result<f64, EvalError> {
    if estimates.len() != truths.len() {
        return Err(EvalError::LengthMismatch(estimates.len(), truths.len()));
    }
    if estimates.is_empty() {
        return Err(EvalError::Empty);
    }
    let sse: f64 = estimates.iter().zip(truths).map(|(e, t)| (e - t) * (e - t)).sum();
    Ok((sse / estimates.len() as f64).sqrt())
}

/// Linear-interpolation quantiles. Empty input yields NaN values.
pub fn quantiles(values: &[f64], qs: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    qs.iter()
        .map(|&q| {
            if sorted.is_empty() {
                return (q, f64::NAN);
            }
            let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            (q, sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins on `[lo, hi]`; values outside are clamped into the end bins.
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let b = if width > 0.0 { ((v - lo) / width).floor() } else { 0.0 };
            counts[(b.max(0.0) as usize).min(bins - 1)] += 1;
        }
        Histogram { edges, counts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Nst,
    Ust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub method: Method,
    pub rmse: f64,
    pub n: usize,
    pub score_quantiles: Vec<(f64, f64)>,
    pub histogram: Histogram,
}

pub const HISTOGRAM_BINS: usize = 20;

impl EvaluationResult {
    fn new(method: Method, scores: &[f64], truths: &[f64]) -> Result<Self, EvalError> {
        Ok(EvaluationResult {
            method,
            rmse: rmse(scores, truths)?,
            n: scores.len(),
            score_quantiles: quantiles(scores, &SUMMARY_QUANTILES),
            histogram: Histogram::new(scores, 0.0, 1.0, HISTOGRAM_BINS),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScores {
    pub id: usize,
    pub truth: f64,
    pub nds: f64,
    pub ds: f64,
}

/// Paired NST/UST evaluation over the same records and model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// NST is scored as `|nds|` against the unsigned truth.
    pub convention: String,
    pub nst: EvaluationResult,
    pub ust: EvaluationResult,
    pub truth_histogram: Histogram,
    pub per_record: Vec<RecordScores>,
}

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn compare(
    model: &ClassifierModel,
    test: &Dataset,
    roles: &AuditRoles,
    config: &AuditConfig,
    truths: &[f64],
) -> Result<(Comparison, DiscriminationReport), CompareError> {
    compare_with(model, test, roles, config, truths, AuditOptions::default())
}

pub fn compare_with(
    model: &ClassifierModel,
    test: &Dataset,
    roles: &AuditRoles,
    config: &AuditConfig,
    truths: &[f64],
    options: AuditOptions,
) -> Result<(Comparison, DiscriminationReport), CompareError> {
    if truths.len() != test.len() {
        return Err(EvalError::LengthMismatch(test.len(), truths.len()).into());
    }
    let report = audit_with(model, test, roles, config, options)?;
    Ok((compare_report(&report, truths)?, report))
}

/// Builds the comparison from an existing audit report.
pub fn compare_report(report: &DiscriminationReport, truths: &[f64]) -> Result<Comparison, EvalError> {
    let nst: Vec<f64> = report.individuals.iter().map(|s| s.nds.abs()).collect();
    let ust: Vec<f64> = report.individuals.iter().map(|s| s.ds).collect();
    Ok(Comparison {
        convention: "NST scored as |nds| against the unsigned ground truth".to_string(),
        nst: EvaluationResult::new(Method::Nst, &nst, truths)?,
        ust: EvaluationResult::new(Method::Ust, &ust, truths)?,
        truth_histogram: Histogram::new(truths, 0.0, 1.0, HISTOGRAM_BINS),
        per_record: report
            .individuals
            .iter()
            .zip(truths)
            .map(|(s, &truth)| RecordScores { id: s.id, truth, nds: s.nds, ds: s.ds })
            .collect(),
    })
}

impl Comparison {
    /// Aligned text table, one row per labelled comparison.
    pub fn table(rows: &[(String, &Comparison)]) -> String {
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(10);
        let mut out = format!("{:<width$}  {:>8}  {:>8}  {:>6}\n", "classifier", "NST", "UST", "n");
        for (label, c) in rows {
            out.push_str(&format!("{:<width$}  {:>8.3}  {:>8.3}  {:>6}\n", label, c.nst.rmse, c.ust.rmse, c.nst.n));
        }
        out.push_str(&format!("RMSE against ground truth; {}\n", rows.first().map(|(_, c)| c.convention.as_str()).unwrap_or("")));
        out
    }

    pub fn per_record_csv(&self) -> String {
        let mut out = String::from("id,truth,nds,ds\n");
        for r in &self.per_record {
            out.push_str(&format!("{},{},{},{}\n", r.id, r.truth, r.nds, r.ds));
        }
        out
    }
}

/// Per-individual example rows: protected value, both tests' probabilities
/// and scores, and the truth when known.
pub fn example_table(
    report: &DiscriminationReport,
    test: &Dataset,
    schema: &Schema,
    ids: &[usize],
    truths: Option<&[f64]>,
) -> String {
    let a = schema.protected_index();
    let mut out = format!(
        "{:>6} {:>3} {:>10} {:>10} {:>8} {:>10} {:>10} {:>8} {:>8}\n",
        "id", "A", "naive p0", "naive p1", "|NDS|", "do(A=0)", "do(A=1)", "DS", "truth"
    );
    for &id in ids {
        let Some(pos) = test.records.iter().position(|r| r.id == id) else { continue };
        let s = &report.individuals[pos];
        let truth = truths.map(|t| format!("{:.3}", t[pos])).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:>6} {:>3} {:>10.3} {:>10.3} {:>8.3} {:>10.3} {:>10.3} {:>8.3} {:>8}\n",
            id,
            test.records[pos].values[a],
            s.nst_p0,
            s.nst_p1,
            s.nds.abs(),
            s.p0,
            s.p1,
            s.ds,
            truth
        ));
    }
    out
}
