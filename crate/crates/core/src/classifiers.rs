//! The audited classifier `f()`: built-in trainable models, a probability
//! lookup table, and a subprocess protocol for external models.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::dataset::{Attribute, AttributeKind, DataError, Dataset, Record, Schema};
use crate::graph::AuditRoles;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("training data has a single outcome class ({0})")]
    SingleClass(f64),
    #[error("training data is empty")]
    EmptyTraining,
    #[error("record lacks feature `{0}`")]
    MissingFeature(String),
    #[error("feature `{feature}`: unseen categorical level {value}")]
    UnseenLevel { feature: String, value: f64 },
    #[error("expected {expected} feature values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("lookup table has no entry for {0:?}")]
    NoLookupEntry(Vec<f64>),
    #[error("external model: {0}")]
    External(String),
    #[error("external model returned {got} probabilities for {expected} rows")]
    CountMismatch { expected: usize, got: usize },
    #[error("external model returned out-of-range value `{0}` (line {1})")]
    OutOfRange(String, usize),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid model specification: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    NaiveBayes,
    Knn,
    External,
    Lookup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub l2: f64,
    pub iterations: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams { learning_rate: 0.1, l2: 1e-4, iterations: 5000 }
    }
}

/// Training recipe for a built-in model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainSpec {
    Logistic(LogisticParams),
    NaiveBayes,
    Knn { k: usize },
}

impl TrainSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainSpec::Logistic(_) => ModelKind::Logistic,
            TrainSpec::NaiveBayes => ModelKind::NaiveBayes,
            TrainSpec::Knn { .. } => ModelKind::Knn,
        }
    }
}

/// Raw feature values to a numeric design row. Categorical features are
/// one-hot encoded, optionally dropping the first level.
#[derive(Debug, Clone, PartialEq)]
struct Encoder {
    features: Vec<Attribute>,
    drop_first: bool,
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl Encoder {
    fn width_of(kind: &AttributeKind, drop_first: bool) -> usize {
        match kind {
            AttributeKind::Categorical(levels) if drop_first => levels.len().saturating_sub(1),
            AttributeKind::Categorical(levels) => levels.len(),
            _ => 1,
        }
    }

    fn raw_width(features: &[Attribute], drop_first: bool) -> usize {
        features.iter().map(|f| Encoder::width_of(&f.kind, drop_first)).sum()
    }

    fn encode_raw(features: &[Attribute], drop_first: bool, row: &[f64], out: &mut Vec<f64>) -> Result<(), ModelError> {
        if row.len() != features.len() {
            return Err(ModelError::Arity { expected: features.len(), got: row.len() });
        }
        out.clear();
        for (f, &v) in features.iter().zip(row) {
            match &f.kind {
                AttributeKind::Categorical(levels) => {
                    if !f.accepts(v) {
                        return Err(ModelError::UnseenLevel { feature: f.name.clone(), value: v });
                    }
                    let start = if drop_first { 1 } else { 0 };
                    for l in start..levels.len() {
                        out.push(if v as usize == l { 1.0 } else { 0.0 });
                    }
                }
                _ => out.push(v),
            }
        }
        Ok(())
    }

    /// Fits standardization on the encoded training rows.
    fn fit(features: Vec<Attribute>, drop_first: bool, rows: &[Vec<f64>]) -> Result<(Encoder, Vec<Vec<f64>>), ModelError> {
        let width = Encoder::raw_width(&features, drop_first);
        let mut encoded = Vec::with_capacity(rows.len());
        let mut buf = Vec::with_capacity(width);
        for r in rows {
            Encoder::encode_raw(&features, drop_first, r, &mut buf)?;
            encoded.push(buf.clone());
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        for r in &encoded {
            for (m, x) in means.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut scales = vec![0.0; width];
        for r in &encoded {
            for ((s, x), m) in scales.iter_mut().zip(r).zip(&means) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in scales.iter_mut() {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        let enc = Encoder { features, drop_first, means, scales };
        for r in encoded.iter_mut() {
            enc.standardize(r);
        }
        Ok((enc, encoded))
    }

    fn identity(features: Vec<Attribute>) -> Encoder {
        let width = Encoder::raw_width(&features, true);
        Encoder { features, drop_first: true, means: vec![0.0; width], scales: vec![1.0; width] }
    }

    fn standardize(&self, row: &mut [f64]) {
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.scales) {
            *x = (*x - m) / s;
        }
    }

    fn encode(&self, row: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(self.means.len());
        Encoder::encode_raw(&self.features, self.drop_first, row, &mut out)?;
        self.standardize(&mut out);
        Ok(out)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic regression on standardized, one-hot encoded features.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    encoder: Encoder,
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Mean log-loss plus `l2/2 * |w|^2` on already-encoded rows.
pub fn logistic_loss(weights: &[f64], bias: f64, rows: &[Vec<f64>], labels: &[f64], l2: f64) -> f64 {
    let n = rows.len() as f64;
    let data: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = bias + dot(weights, x);
            // log(1 + e^z) - y z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - y * z
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * dot(weights, weights)
}

/// Gradient of [`logistic_loss`]; the bias component comes last.
pub fn logistic_gradient(weights: &[f64], bias: f64, rows: &[Vec<f64>], labels: &[f64], l2: f64) -> Vec<f64> {
    let n = rows.len() as f64;
    let d = weights.len();
    let mut g = vec![0.0; d + 1];
    for (x, &y) in rows.iter().zip(labels) {
        let r = sigmoid(bias + dot(weights, x)) - y;
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += r * xj;
        }
        g[d] += r;
    }
    for gj in g.iter_mut() {
        *gj /= n;
    }
    for (gj, w) in g.iter_mut().zip(weights) {
        *gj += l2 * w;
    }
    g
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LogisticModel {
    /// A model over raw (unstandardized) features with the given coefficients.
    /// Categorical features take one weight per non-first level.
    pub fn from_parameters(features: Vec<Attribute>, weights: Vec<f64>, bias: f64) -> Result<Self, ModelError> {
        let encoder = Encoder::identity(features);
        if weights.len() != encoder.means.len() {
            return Err(ModelError::Arity { expected: encoder.means.len(), got: weights.len() });
        }
        Ok(LogisticModel { encoder, weights, bias })
    }

    fn train(features: Vec<Attribute>, rows: &[Vec<f64>], labels: &[f64], params: LogisticParams) -> Result<Self, ModelError> {
        let (encoder, x) = Encoder::fit(features, true, rows)?;
        let mut weights = vec![0.0; encoder.means.len()];
        let mut bias = 0.0;
        for _ in 0..params.iterations {
            let g = logistic_gradient(&weights, bias, &x, labels, params.l2);
            for (w, gj) in weights.iter_mut().zip(&g) {
                *w -= params.learning_rate * gj;
            }
            bias -= params.learning_rate * g[weights.len()];
        }
        Ok(LogisticModel { encoder, weights, bias })
    }

    /// Encoded, standardized design rows as the optimizer saw them.
    pub fn design_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ModelError> {
        rows.iter().map(|r| self.encoder.encode(r)).collect()
    }

    fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        let x = self.encoder.encode(row)?;
        Ok(sigmoid(self.bias + dot(&self.weights, &x)))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum NbFeature {
    /// Per class: mean, variance.
    Gaussian([(f64, f64); 2]),
    /// Per class: smoothed log-probability of each level.
    Discrete([Vec<f64>; 2]),
}

/// Naive Bayes: Gaussian likelihood for continuous features, add-one smoothed
/// frequencies for binary and categorical ones.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    features: Vec<Attribute>,
    log_prior: [f64; 2],
    likelihoods: Vec<NbFeature>,
}

impl NaiveBayesModel {
    fn train(features: Vec<Attribute>, rows: &[Vec<f64>], labels: &[f64]) -> Result<Self, ModelError> {
        let mut class_rows: [Vec<&Vec<f64>>; 2] = [Vec::new(), Vec::new()];
        for (r, &y) in rows.iter().zip(labels) {
            class_rows[(y == 1.0) as usize].push(r);
        }
        let n = rows.len() as f64;
        let log_prior = [(class_rows[0].len() as f64 / n).ln(), (class_rows[1].len() as f64 / n).ln()];
        let mut max_var: f64 = 0.0;
        let mut likelihoods = Vec::with_capacity(features.len());
        for (j, f) in features.iter().enumerate() {
            let levels = match &f.kind {
                AttributeKind::Binary => Some(2),
                AttributeKind::Categorical(l) => Some(l.len()),
                AttributeKind::Continuous => None,
            };
            match levels {
                Some(levels) => {
                    let per_class = |rows: &Vec<&Vec<f64>>| -> Result<Vec<f64>, ModelError> {
                        let mut counts = vec![1.0; levels];
                        for r in rows {
                            let v = r[j];
                            if !f.accepts(v) {
                                return Err(ModelError::UnseenLevel { feature: f.name.clone(), value: v });
                            }
                            counts[v as usize] += 1.0;
                        }
                        let total = rows.len() as f64 + levels as f64;
                        Ok(counts.iter().map(|c| (c / total).ln()).collect())
                    };
                    likelihoods.push(NbFeature::Discrete([per_class(&class_rows[0])?, per_class(&class_rows[1])?]));
                }
                None => {
                    let stats = |rows: &Vec<&Vec<f64>>| {
                        let m = rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64;
                        let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / rows.len() as f64;
                        (m, v)
                    };
                    let s = [stats(&class_rows[0]), stats(&class_rows[1])];
                    max_var = max_var.max(s[0].1).max(s[1].1);
                    likelihoods.push(NbFeature::Gaussian(s));
                }
            }
        }
        let eps = 1e-9 * max_var.max(1e-12);
        for l in likelihoods.iter_mut() {
            if let NbFeature::Gaussian(s) = l {
                s[0].1 += eps;
                s[1].1 += eps;
            }
        }
        Ok(NaiveBayesModel { features, log_prior, likelihoods })
    }

    fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.features.len() {
            return Err(ModelError::Arity { expected: self.features.len(), got: row.len() });
        }
        let mut score = self.log_prior;
        for ((f, l), &v) in self.features.iter().zip(&self.likelihoods).zip(row) {
            match l {
                NbFeature::Gaussian(s) => {
                    for (c, (m, var)) in s.iter().enumerate() {
                        score[c] += -0.5 * ((v - m).powi(2) / var + (2.0 * std::f64::consts::PI * var).ln());
                    }
                }
                NbFeature::Discrete(p) => {
                    let i = v as usize;
                    if v < 0.0 || v.fract() != 0.0 || i >= p[0].len() {
                        return Err(ModelError::UnseenLevel { feature: f.name.clone(), value: v });
                    }
                    score[0] += p[0][i];
                    score[1] += p[1][i];
                }
            }
        }
        Ok(sigmoid(score[1] - score[0]))
    }
}

/// k nearest neighbours, Euclidean on standardized one-hot features.
/// Distance ties go to the lower training row.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    encoder: Encoder,
    points: Vec<Vec<f64>>,
    labels: Vec<bool>,
    pub k: usize,
}

impl KnnModel {
    fn train(features: Vec<Attribute>, rows: &[Vec<f64>], labels: &[f64], k: usize) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::Spec("k must be positive".into()));
        }
        let (encoder, points) = Encoder::fit(features, false, rows)?;
        Ok(KnnModel { encoder, points, labels: labels.iter().map(|&y| y == 1.0).collect(), k })
    }

    fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        let x = self.encoder.encode(row)?;
        let k = self.k.min(self.points.len());
        // Sorted ascending by (distance, row); rows arrive in increasing order so
        // a strict comparison keeps the lower row on ties.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, p) in self.points.iter().enumerate() {
            let mut d = 0.0;
            for (a, b) in p.iter().zip(&x) {
                d += (a - b) * (a - b);
            }
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(k);
        }
        let positives = best.iter().filter(|&&(_, i)| self.labels[i]).count();
        Ok(positives as f64 / k as f64)
    }
}

/// Probability table keyed by exact feature tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    pub features: Vec<String>,
    pub table: Vec<(Vec<f64>, f64)>,
    #[serde(skip)]
    index: HashMap<Vec<u64>, f64>,
}

fn key(values: &[f64]) -> Vec<u64> {
    values.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect()
}

impl LookupTable {
    pub fn new(features: Vec<String>, table: Vec<(Vec<f64>, f64)>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(table.len());
        for (t, p) in &table {
            if t.len() != features.len() {
                return Err(ModelError::Arity { expected: features.len(), got: t.len() });
            }
            if !(0.0..=1.0).contains(p) {
                return Err(ModelError::Spec(format!("probability {p} outside [0,1]")));
            }
            if index.insert(key(t), *p).is_some() {
                return Err(ModelError::Spec(format!("duplicate lookup entry {t:?}")));
            }
        }
        Ok(LookupTable { features, table, index })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: LookupTable = serde_json::from_str(text).map_err(|e| ModelError::Spec(e.to_string()))?;
        LookupTable::new(raw.features, raw.table)
    }

    fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        self.index.get(&key(row)).copied().ok_or_else(|| ModelError::NoLookupEntry(row.to_vec()))
    }
}

/// A model served by a subprocess: CSV with header on stdin, one probability
/// per line on stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalModel {
    pub command: String,
    pub features: Vec<Attribute>,
}

impl ExternalModel {
    fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        let mut input = String::new();
        let header: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        input.push_str(&header.join(","));
        input.push('\n');
        for r in rows {
            let cells: Vec<String> = self.features.iter().zip(r).map(|(f, &v)| f.format_value(v)).collect();
            input.push_str(&cells.join(","));
            input.push('\n');
        }
        let output = run_piped(&self.command, input.into_bytes())?;
        parse_probabilities(&output, rows.len())
    }
}

fn run_piped(command: &str, input: Vec<u8>) -> Result<String, ModelError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| ModelError::External(format!("cannot start `{command}`: {e}")))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        // The child may exit without reading; a broken pipe surfaces through
        // the exit status instead.
        let _ = stdin.write_all(&input);
    });
    let mut stdout = String::new();
    let mut stderr = String::new();
    child.stdout.take().expect("piped stdout").read_to_string(&mut stdout).map_err(|e| ModelError::External(e.to_string()))?;
    child.stderr.take().expect("piped stderr").read_to_string(&mut stderr).map_err(|e| ModelError::External(e.to_string()))?;
    let status = child.wait().map_err(|e| ModelError::External(e.to_string()))?;
    let _ = writer.join();
    if !status.success() {
        return Err(ModelError::External(format!("`{command}` exited with {status}: {}", stderr.trim())));
    }
    Ok(stdout)
}

fn parse_probabilities(output: &str, expected: usize) -> Result<Vec<f64>, ModelError> {
    let lines: Vec<&str> = output.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.len() != expected {
        return Err(ModelError::CountMismatch { expected, got: lines.len() });
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| match l.parse::<f64>() {
            Ok(p) if (0.0..=1.0).contains(&p) => Ok(p),
            _ => Err(ModelError::OutOfRange(l.to_string(), i + 1)),
        })
        .collect()
}

/// Runs an external model command over `records`.
pub fn external_predict(
    command: &str,
    schema: &Schema,
    features: &[String],
    records: &[Record],
) -> Result<Vec<f64>, ModelError> {
    let model = ClassifierModel::external(command, schema, features)?;
    let rows: Vec<Vec<f64>> = records.iter().map(|r| model.features_of(schema, r)).collect::<Result<_, _>>()?;
    model.predict_batch(&rows)
}

#[derive(Debug, Clone, PartialEq)]
enum Inner {
    Logistic(LogisticModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
    External(ExternalModel),
    Lookup(LookupTable),
}

/// A binary classifier producing `P(Y=1 | features)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    feature_names: Vec<String>,
    inner: Inner,
}

fn feature_attributes(schema: &Schema, features: &[String]) -> Result<Vec<Attribute>, ModelError> {
    features
        .iter()
        .map(|f| {
            if *f == schema.roles.outcome {
                return Err(ModelError::Spec(format!("outcome `{f}` cannot be a feature")));
            }
            schema.attribute(f).cloned().ok_or_else(|| ModelError::MissingFeature(f.clone()))
        })
        .collect()
}

impl ClassifierModel {
    /// Fits a built-in model on `data`, predicting the schema's outcome from
    /// `features`.
    pub fn train(spec: TrainSpec, data: &Dataset, features: &[String]) -> Result<Self, ModelError> {
        let attrs = feature_attributes(&data.schema, features)?;
        if data.is_empty() {
            return Err(ModelError::EmptyTraining);
        }
        let cols: Vec<usize> = features.iter().map(|f| data.schema.require(f)).collect::<Result<_, _>>()?;
        let y = data.schema.outcome_index();
        let rows: Vec<Vec<f64>> = data.records.iter().map(|r| cols.iter().map(|&j| r.values[j]).collect()).collect();
        let labels: Vec<f64> = data.records.iter().map(|r| r.values[y]).collect();
        if labels.iter().all(|&l| l == labels[0]) {
            return Err(ModelError::SingleClass(labels[0]));
        }
        let inner = match spec {
            TrainSpec::Logistic(p) => Inner::Logistic(LogisticModel::train(attrs, &rows, &labels, p)?),
            TrainSpec::NaiveBayes => Inner::NaiveBayes(NaiveBayesModel::train(attrs, &rows, &labels)?),
            TrainSpec::Knn { k } => Inner::Knn(KnnModel::train(attrs, &rows, &labels, k)?),
        };
        Ok(ClassifierModel { feature_names: features.to_vec(), inner })
    }

    pub fn logistic(model: LogisticModel) -> Self {
        let feature_names = model.encoder.features.iter().map(|f| f.name.clone()).collect();
        ClassifierModel { feature_names, inner: Inner::Logistic(model) }
    }

    pub fn lookup(table: LookupTable) -> Self {
        ClassifierModel { feature_names: table.features.clone(), inner: Inner::Lookup(table) }
    }

    pub fn external(command: &str, schema: &Schema, features: &[String]) -> Result<Self, ModelError> {
        let attrs = feature_attributes(schema, features)?;
        Ok(ClassifierModel {
            feature_names: features.to_vec(),
            inner: Inner::External(ExternalModel { command: command.to_string(), features: attrs }),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self.inner {
            Inner::Logistic(_) => ModelKind::Logistic,
            Inner::NaiveBayes(_) => ModelKind::NaiveBayes,
            Inner::Knn(_) => ModelKind::Knn,
            Inner::External(_) => ModelKind::External,
            Inner::Lookup(_) => ModelKind::Lookup,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn as_logistic(&self) -> Option<&LogisticModel> {
        match &self.inner {
            Inner::Logistic(m) => Some(m),
            _ => None,
        }
    }

    /// Schema positions of this model's features.
    pub fn feature_columns(&self, schema: &Schema) -> Result<Vec<usize>, ModelError> {
        self.feature_names
            .iter()
            .map(|f| schema.position(f).ok_or_else(|| ModelError::MissingFeature(f.clone())))
            .collect()
    }

    pub fn features_of(&self, schema: &Schema, record: &Record) -> Result<Vec<f64>, ModelError> {
        Ok(self.feature_columns(schema)?.into_iter().map(|j| record.values[j]).collect())
    }

    /// `P(Y=1)` for one row of feature values in model order.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        let p = match &self.inner {
            Inner::Logistic(m) => m.predict(row)?,
            Inner::NaiveBayes(m) => m.predict(row)?,
            Inner::Knn(m) => m.predict(row)?,
            Inner::Lookup(m) => m.predict(row)?,
            Inner::External(m) => m.predict_batch(&[row.to_vec()])?[0],
        };
        Ok(p.clamp(0.0, 1.0))
    }

    /// Predicts a batch. External models see the whole batch in one process.
    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        match &self.inner {
            Inner::External(m) if !rows.is_empty() => m.predict_batch(rows),
            _ => rows.iter().map(|r| self.predict_row(r)).collect(),
        }
    }

    pub fn predict_proba(&self, schema: &Schema, record: &Record) -> Result<f64, ModelError> {
        self.predict_row(&self.features_of(schema, record)?)
    }

    /// Parses `lr`, `nb`, `knn` or `knn:k=7`.
    pub fn parse_train_spec(spec: &str) -> Result<TrainSpec, ModelError> {
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        match name {
            "lr" | "logistic" if args.is_empty() => Ok(TrainSpec::Logistic(LogisticParams::default())),
            "nb" | "naive_bayes" if args.is_empty() => Ok(TrainSpec::NaiveBayes),
            "knn" => {
                let mut k = 5;
                for arg in args.split(',').filter(|a| !a.is_empty()) {
                    match arg.split_once('=') {
                        Some(("k", v)) => {
                            k = v.parse().map_err(|_| ModelError::Spec(format!("bad k `{v}`")))?;
                        }
                        _ => return Err(ModelError::Spec(format!("unknown knn option `{arg}`"))),
                    }
                }
                if k == 0 {
                    return Err(ModelError::Spec("k must be positive".into()));
                }
                Ok(TrainSpec::Knn { k })
            }
            _ => Err(ModelError::Spec(format!("unknown model `{spec}`"))),
        }
    }
}

/// Copy of `record` with the binary protected attribute mapped 0 <-> 1.
pub fn flip_protected(record: &Record, schema: &Schema) -> Record {
    let a = schema.protected_index();
    record.with_value(a, 1.0 - record.values[a])
}

/// Same as [`flip_protected`], locating the attribute by role name.
pub fn flip_by_roles(record: &Record, schema: &Schema, roles: &AuditRoles) -> Result<Record, DataError> {
    let a = schema.require(&roles.protected)?;
    Ok(record.with_value(a, 1.0 - record.values[a]))
}
