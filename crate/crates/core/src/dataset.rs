//! Tabular data: schema, CSV ingestion and empirical joint distributions of
//! the variables an audit marginalizes over.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::graph::{AuditRoles, Dag};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: {message}")]
    Cell { row: usize, column: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` must be binary")]
    NotBinary(String),
    #[error("attribute `{0}` is not in the DAG")]
    NotInDag(String),
    #[error("empty dataset")]
    Empty,
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Binary,
    Categorical(Vec<String>),
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn new(name: impl Into<String>, kind: AttributeKind) -> Self {
        Attribute { name: name.into(), kind }
    }

    fn parse_cell(&self, cell: &str) -> Result<f64, String> {
        let cell = cell.trim();
        if cell.is_empty() {
            return Err("missing value".into());
        }
        match &self.kind {
            AttributeKind::Binary => match cell.parse::<f64>() {
                Ok(v) if v == 0.0 || v == 1.0 => Ok(v),
                _ => Err(format!("`{cell}` is not a binary value (0 or 1)")),
            },
            AttributeKind::Categorical(levels) => levels
                .iter()
                .position(|l| l == cell)
                .map(|i| i as f64)
                .ok_or_else(|| format!("unseen categorical level `{cell}`")),
            AttributeKind::Continuous => match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("`{cell}` is not a finite number")),
            },
        }
    }

    /// Whether `v` is a legal stored value for this attribute.
    pub fn accepts(&self, v: f64) -> bool {
        match &self.kind {
            AttributeKind::Binary => v == 0.0 || v == 1.0,
            AttributeKind::Categorical(levels) => v >= 0.0 && v.fract() == 0.0 && (v as usize) < levels.len(),
            AttributeKind::Continuous => v.is_finite(),
        }
    }

    pub fn format_value(&self, v: f64) -> String {
        match &self.kind {
            AttributeKind::Binary => format!("{}", v as u8),
            AttributeKind::Categorical(levels) => {
                levels.get(v as usize).cloned().unwrap_or_else(|| format!("{v}"))
            }
            AttributeKind::Continuous => format!("{v}"),
        }
    }
}

/// Ordered attributes plus the audit roles they are bound to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub attributes: Vec<Attribute>,
    pub roles: AuditRoles,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>, roles: AuditRoles) -> Result<Self, DataError> {
        let mut index = HashMap::new();
        for (i, a) in attributes.iter().enumerate() {
            if index.insert(a.name.clone(), i).is_some() {
                return Err(DataError::DuplicateAttribute(a.name.clone()));
            }
        }
        let schema = Schema { attributes, roles, index };
        for role in [&schema.roles.protected, &schema.roles.outcome] {
            let attr = schema.attribute(role).ok_or_else(|| DataError::UnknownAttribute(role.clone()))?;
            if attr.kind != AttributeKind::Binary {
                return Err(DataError::NotBinary(role.clone()));
            }
        }
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let raw: Schema = serde_json::from_str(text)?;
        Schema::new(raw.attributes, raw.roles)
    }

    /// Guesses kinds from CSV content: columns holding only 0/1 are binary,
    /// other numeric columns continuous, anything else categorical with
    /// sorted levels.
    pub fn infer(text: &str, roles: AuditRoles) -> Result<Self, DataError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut numeric = vec![true; headers.len()];
        let mut binary = vec![true; headers.len()];
        let mut levels: Vec<std::collections::BTreeSet<String>> = vec![Default::default(); headers.len()];
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            for (j, cell) in rec.iter().enumerate() {
                if cell.is_empty() {
                    return Err(DataError::Cell {
                        row,
                        column: headers.get(j).cloned().unwrap_or_default(),
                        message: "missing value".into(),
                    });
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        if v != 0.0 && v != 1.0 {
                            binary[j] = false;
                        }
                    }
                    _ => numeric[j] = false,
                }
                if levels[j].len() <= 1000 {
                    levels[j].insert(cell.to_string());
                }
            }
        }
        let attributes = headers
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let kind = if numeric[j] && binary[j] {
                    AttributeKind::Binary
                } else if numeric[j] {
                    AttributeKind::Continuous
                } else {
                    AttributeKind::Categorical(levels[j].iter().cloned().collect())
                };
                Attribute::new(name.clone(), kind)
            })
            .collect();
        Schema::new(attributes, roles)
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        if self.index.len() != self.attributes.len() {
            return self.attributes.iter().position(|a| a.name == name);
        }
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, DataError> {
        self.position(name).ok_or_else(|| DataError::UnknownAttribute(name.to_string()))
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.position(name).map(|i| &self.attributes[i])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.iter().map(|a| a.name.as_str())
    }

    pub fn protected_index(&self) -> usize {
        self.position(&self.roles.protected).expect("validated in Schema::new")
    }

    pub fn outcome_index(&self) -> usize {
        self.position(&self.roles.outcome).expect("validated in Schema::new")
    }

    /// Checks that the listed attributes all appear in the DAG, along with the
    /// roles.
    pub fn check_against_dag<'a>(
        &self,
        dag: &Dag,
        participating: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), DataError> {
        let check = |name: &str| {
            self.require(name)?;
            match dag.node(name) {
                Some(_) => Ok(()),
                None => Err(DataError::NotInDag(name.to_string())),
            }
        };
        check(&self.roles.protected)?;
        check(&self.roles.outcome)?;
        participating.into_iter().try_for_each(check)
    }
}

/// One row. `values` is aligned with the schema's attribute order; binary
/// attributes hold 0/1, categorical ones a level index.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: usize,
    pub values: Vec<f64>,
}

impl Record {
    pub fn get(&self, schema: &Schema, name: &str) -> Option<f64> {
        schema.position(name).map(|i| self.values[i])
    }

    pub fn with_value(&self, index: usize, value: f64) -> Record {
        let mut r = self.clone();
        r.values[index] = value;
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub records: Vec<Record>,
}

impl Dataset {
    pub fn new(schema: Schema, records: Vec<Record>) -> Result<Self, DataError> {
        for r in &records {
            if r.values.len() != schema.len() {
                return Err(DataError::Cell {
                    row: r.id,
                    column: String::new(),
                    message: format!("expected {} values, got {}", schema.len(), r.values.len()),
                });
            }
            for (a, &v) in schema.attributes.iter().zip(&r.values) {
                if !a.accepts(v) {
                    return Err(DataError::Cell {
                        row: r.id,
                        column: a.name.clone(),
                        message: format!("value {v} does not conform to {:?}", a.kind),
                    });
                }
            }
        }
        Ok(Dataset { schema, records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, DataError> {
        let j = self.schema.require(name)?;
        Ok(self.records.iter().map(|r| r.values[j]).collect())
    }

    /// Returns the records with the given positions, ids renumbered from 0.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let records = rows
            .iter()
            .enumerate()
            .map(|(id, &r)| Record { id, values: self.records[r].values.clone() })
            .collect();
        Dataset { schema: self.schema.clone(), records }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.schema.names().collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.records {
            let cells: Vec<String> =
                self.schema.attributes.iter().zip(&r.values).map(|(a, &v)| a.format_value(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Reads CSV text against `schema`. Columns may appear in any order; columns
/// not in the schema are ignored. Row ids follow file order.
pub fn load_csv(text: &str, schema: &Schema) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut source = Vec::with_capacity(schema.len());
    for a in &schema.attributes {
        let j = headers.iter().position(|h| *h == a.name).ok_or_else(|| DataError::MissingColumn(a.name.clone()))?;
        source.push(j);
    }
    let mut records = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let mut values = Vec::with_capacity(schema.len());
        for (a, &j) in schema.attributes.iter().zip(&source) {
            let cell = rec.get(j).unwrap_or("");
            let v = a.parse_cell(cell).map_err(|message| DataError::Cell { row, column: a.name.clone(), message })?;
            values.push(v);
        }
        records.push(Record { id: row, values });
    }
    Ok(Dataset { schema: schema.clone(), records })
}

/// Bin edges and per-bin representative values for one continuous variable.
/// `edges` holds the minimum, the interior cut points and the maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub edges: Vec<f64>,
    pub reps: Vec<f64>,
}

impl Binning {
    /// Equal-frequency bins with the within-bin mean as representative.
    /// Equal values always share a bin, so heavy ties can yield fewer bins.
    pub fn equal_frequency(values: &[f64], bins: usize) -> Binning {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let lo = sorted[0];
        let hi = sorted[n - 1];
        let mut interior: Vec<f64> = (1..bins).map(|k| sorted[k * n / bins]).filter(|&e| e > lo).collect();
        interior.dedup();
        let mut sums = vec![0.0; interior.len() + 1];
        let mut counts = vec![0usize; interior.len() + 1];
        for &v in &sorted {
            let b = interior.partition_point(|&e| e <= v);
            sums[b] += v;
            counts[b] += 1;
        }
        let reps = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
        let mut edges = Vec::with_capacity(interior.len() + 2);
        edges.push(lo);
        edges.extend(interior);
        edges.push(hi);
        Binning { edges, reps }
    }

    pub fn bin_of(&self, v: f64) -> usize {
        let interior = &self.edges[1..self.edges.len() - 1];
        interior.partition_point(|&e| e <= v)
    }

    pub fn represent(&self, v: f64) -> f64 {
        self.reps[self.bin_of(v)]
    }
}

/// Joint frequency table `P(c)` over an ordered list of variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalJointDistribution {
    pub variables: Vec<String>,
    #[serde(default)]
    pub binning: BTreeMap<String, Binning>,
    pub support: Vec<(Vec<f64>, f64)>,
}

/// Above this many joint tuples the fit falls back to a product of marginals.
pub const MAX_JOINT_SUPPORT: usize = 10_000;

fn tuple_key(values: &[f64]) -> Vec<u64> {
    values.iter().map(|v| if *v == 0.0 { 0 } else { v.to_bits() }).collect()
}

impl EmpiricalJointDistribution {
    pub fn trivial() -> Self {
        EmpiricalJointDistribution { variables: Vec::new(), binning: BTreeMap::new(), support: vec![(Vec::new(), 1.0)] }
    }

    /// Builds a distribution from explicit tuples, checking arity, signs,
    /// distinctness and normalization within `tol`.
    pub fn from_support(
        variables: Vec<String>,
        binning: BTreeMap<String, Binning>,
        support: Vec<(Vec<f64>, f64)>,
        tol: f64,
    ) -> Result<Self, DataError> {
        let dist = EmpiricalJointDistribution { variables, binning, support };
        dist.validate(tol)?;
        Ok(dist)
    }

    pub fn validate(&self, tol: f64) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::Distribution(m));
        let mut names = HashSet::new();
        for v in &self.variables {
            if !names.insert(v) {
                return bad(format!("duplicate variable `{v}`"));
            }
        }
        for name in self.binning.keys() {
            if !names.contains(name) {
                return bad(format!("binning for unknown variable `{name}`"));
            }
        }
        if self.support.is_empty() {
            return bad("empty support".into());
        }
        let mut seen = HashSet::new();
        let mut total = 0.0;
        for (tuple, p) in &self.support {
            if tuple.len() != self.variables.len() {
                return bad(format!("tuple {tuple:?} has arity {}, expected {}", tuple.len(), self.variables.len()));
            }
            if !p.is_finite() || *p < 0.0 {
                return bad(format!("negative or non-finite probability {p}"));
            }
            if tuple.iter().any(|v| !v.is_finite()) {
                return bad(format!("non-finite value in tuple {tuple:?}"));
            }
            if !seen.insert(tuple_key(tuple)) {
                return bad(format!("duplicate tuple {tuple:?}"));
            }
            total += p;
        }
        if (total - 1.0).abs() > tol {
            return bad(format!("probabilities sum to {total}"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let dist: EmpiricalJointDistribution = serde_json::from_str(text)?;
        dist.validate(1e-6)?;
        Ok(dist)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }

    /// Expected value of one variable under the table.
    pub fn mean(&self, variable: &str) -> Option<f64> {
        let j = self.variables.iter().position(|v| v == variable)?;
        Some(self.support.iter().map(|(t, p)| t[j] * p).sum())
    }

    /// Reorders the variables (and every tuple) to `order`.
    pub fn reordered(&self, order: &[String]) -> Result<Self, DataError> {
        if order.len() != self.variables.len() {
            return Err(DataError::Distribution(format!(
                "variables {:?} do not match {:?}",
                self.variables, order
            )));
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|v| {
                self.variables
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| DataError::Distribution(format!("variable `{v}` not in distribution")))
            })
            .collect::<Result<_, _>>()?;
        Ok(EmpiricalJointDistribution {
            variables: order.to_vec(),
            binning: self.binning.clone(),
            support: self.support.iter().map(|(t, p)| (perm.iter().map(|&j| t[j]).collect(), *p)).collect(),
        })
    }
}

fn count_tuples(rows: impl Iterator<Item = Vec<f64>>) -> Vec<(Vec<f64>, f64)> {
    let mut counts: HashMap<Vec<u64>, (Vec<f64>, usize)> = HashMap::new();
    let mut n = 0usize;
    for t in rows {
        n += 1;
        counts.entry(tuple_key(&t)).or_insert_with(|| (t, 0)).1 += 1;
    }
    let mut support: Vec<(Vec<f64>, f64)> = counts.into_values().map(|(t, c)| (t, c as f64 / n as f64)).collect();
    support.sort_by(|a, b| {
        a.0.iter().zip(&b.0).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    support
}

/// Fits the joint frequency table of `variables` over `data`, binning
/// continuous variables into `bins` equal-frequency bins.
pub fn fit_distribution(
    data: &Dataset,
    variables: &[String],
    bins: usize,
) -> Result<EmpiricalJointDistribution, DataError> {
    if variables.is_empty() {
        return Ok(EmpiricalJointDistribution::trivial());
    }
    if data.is_empty() {
        return Err(DataError::Empty);
    }
    let bins = bins.max(1);
    let mut binning = BTreeMap::new();
    let mut columns = Vec::with_capacity(variables.len());
    for v in variables {
        let j = data.schema.require(v)?;
        let mut col: Vec<f64> = data.records.iter().map(|r| r.values[j]).collect();
        if data.schema.attributes[j].kind == AttributeKind::Continuous {
            let b = Binning::equal_frequency(&col, bins);
            for x in col.iter_mut() {
                *x = b.represent(*x);
            }
            binning.insert(v.clone(), b);
        }
        columns.push(col);
    }
    let n = data.len();
    let joint = count_tuples((0..n).map(|i| columns.iter().map(|c| c[i]).collect()));
    let support = if joint.len() > MAX_JOINT_SUPPORT {
        log::warn!(
            "joint support of {:?} has {} tuples (> {}); using the product of marginals",
            variables,
            joint.len(),
            MAX_JOINT_SUPPORT
        );
        let marginals: Vec<Vec<(Vec<f64>, f64)>> =
            columns.iter().map(|c| count_tuples(c.iter().map(|&x| vec![x]))).collect();
        marginals.iter().fold(vec![(Vec::new(), 1.0)], |acc, m| {
            acc.iter()
                .flat_map(|(t, p)| {
                    m.iter().map(move |(x, q)| {
                        let mut t = t.clone();
                        t.push(x[0]);
                        (t, p * q)
                    })
                })
                .collect()
        })
    } else {
        joint
    };
    EmpiricalJointDistribution::from_support(variables.to_vec(), binning, support, 1e-9)
}
