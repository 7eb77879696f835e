//! Data generators: the twelve-variable synthetic benchmark with an injected
//! collider, and small discrete structural causal models that support exact
//! interventional queries.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::classifiers::LookupTable;
use crate::dataset::{Attribute, AttributeKind, Dataset, EmpiricalJointDistribution, Record, Schema};
use crate::graph::{AuditRoles, Dag, GraphError};

#[derive(Debug, thiserror::Error)]
pub enum ScmError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node `{0}`: {1}")]
    Table(String, String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("value {value} outside the domain of `{node}` (size {size})")]
    Domain { node: String, value: usize, size: usize },
    #[error("joint state space of {0} states exceeds the enumeration limit")]
    StateSpace(u128),
    #[error("conditioning event has probability zero")]
    ZeroProbability,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parameters of the synthetic benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub seed: u64,
    /// Scale of the protected attribute's effect on the outcome.
    pub delta: f64,
    /// Weight of the outcome in the collider.
    pub collider_y_weight: f64,
    /// Weight of the protected attribute in the collider.
    pub collider_a_weight: f64,
    /// Collider noise is uniform on `[0, noise_bound]`.
    pub noise_bound: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { n: 10_000, seed: 0, delta: 1.0, collider_y_weight: 1.0, collider_a_weight: 1.0, noise_bound: 0.01 }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), ScmError> {
        if self.n == 0 {
            return Err(ScmError::Config("n must be positive".into()));
        }
        if !self.noise_bound.is_finite() || self.noise_bound < 0.0 {
            return Err(ScmError::Config(format!("noise bound {} must be a finite non-negative number", self.noise_bound)));
        }
        for (name, v) in [("delta", self.delta), ("collider_y_weight", self.collider_y_weight), ("collider_a_weight", self.collider_a_weight)] {
            if !v.is_finite() {
                return Err(ScmError::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

pub const SYNTHETIC_COLUMNS: [&str; 15] =
    ["A", "X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8", "X9", "X10", "C", "Y", "tau", "true_ds"];

/// Policy graph of the synthetic benchmark. Correlated pairs are drawn as
/// `X1 -> X2`, `X5 -> X6`, `X7 -> X8`; X3, X4, X9, X10 are isolated.
pub const SYNTHETIC_DAG: &str = "\
# synthetic benchmark policy graph
X3
X4
X9
X10
X1 -> X2
X5 -> X6
X7 -> X8
A -> Y
X1 -> Y
X2 -> Y
X5 -> Y
X6 -> Y
X7 -> Y
X8 -> Y
A -> C
Y -> C
";

pub fn synthetic_dag() -> Dag {
    Dag::parse(SYNTHETIC_DAG).expect("bundled DAG parses")
}

pub fn synthetic_schema() -> Schema {
    use AttributeKind::{Binary, Continuous};
    let kinds = [
        Binary, Continuous, Continuous, Binary, Continuous, Continuous, Continuous, Binary, Binary, Continuous, Binary,
        Continuous, Binary, Continuous, Continuous,
    ];
    let attrs = SYNTHETIC_COLUMNS.iter().zip(kinds).map(|(n, k)| Attribute::new(*n, k)).collect();
    Schema::new(attrs, AuditRoles::new("A", "Y").expect("distinct roles")).expect("valid schema")
}

/// `f_Y = 4 x1 + 2 x2 + 2 x5 + 4 x6 + 4 x8`.
pub fn outcome_index(x1: f64, x2: f64, x5: f64, x6: f64, x8: f64) -> f64 {
    4.0 * x1 + 2.0 * x2 + 2.0 * x5 + 4.0 * x6 + 4.0 * x8
}

/// `tau = delta * (eta1 + eta2 + eta7)` with `eta_j = 2 x_j` when positive.
pub fn individual_effect(x1: f64, x2: f64, x7: f64, delta: f64) -> f64 {
    let eta = |x: f64| if x > 0.0 { 2.0 * x } else { 0.0 };
    delta * (eta(x1) + eta(x2) + eta(x7))
}

fn g(t: f64) -> f64 {
    1.0 / (1.0 + t.exp())
}

/// Success probability of the outcome given the protected value.
pub fn outcome_probability(a: f64, tau: f64, f_y: f64) -> f64 {
    g((a - 1.0) * tau + f_y)
}

/// Ground-truth discrimination score `|g(f_Y) - g(f_Y - tau)|`.
pub fn true_ds_from(tau: f64, f_y: f64) -> f64 {
    (g(f_y) - g(-tau + f_y)).abs()
}

/// Ground truth from raw covariates.
pub fn true_ds(x1: f64, x2: f64, x5: f64, x6: f64, x7: f64, x8: f64, delta: f64) -> f64 {
    true_ds_from(individual_effect(x1, x2, x7, delta), outcome_index(x1, x2, x5, x6, x8))
}

/// Draws one record in `SYNTHETIC_COLUMNS` order.
fn draw(rng: &mut ChaCha8Rng, cfg: &SyntheticConfig) -> [f64; 15] {
    const RHO_NORMAL: f64 = 0.5;
    let tail = (1.0 - RHO_NORMAL * RHO_NORMAL).sqrt();
    let normal_pair = |rng: &mut ChaCha8Rng| {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (z1, RHO_NORMAL * z1 + tail * z2)
    };
    let (x1, x2) = normal_pair(rng);
    let (x5, x6) = normal_pair(rng);
    // Bernoulli(0.5) pair with correlation 0.7: P(1,1) = P(0,0) = 0.25 + 0.7/4.
    let u: f64 = rng.random();
    let (x7, x8) = if u < 0.425 {
        (1.0, 1.0)
    } else if u < 0.85 {
        (0.0, 0.0)
    } else if u < 0.925 {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let x3 = if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 };
    let x10 = if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 };
    let x4: f64 = rng.sample(StandardNormal);
    let x9: f64 = rng.sample(StandardNormal);
    let a = if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 };
    let tau = individual_effect(x1, x2, x7, cfg.delta);
    let f_y = outcome_index(x1, x2, x5, x6, x8);
    let y = if rng.random::<f64>() < outcome_probability(a, tau, f_y) { 1.0 } else { 0.0 };
    let noise = rng.random::<f64>() * cfg.noise_bound;
    let c = cfg.collider_y_weight * y + cfg.collider_a_weight * a + noise;
    [a, x1, x2, x3, x4, x5, x6, x7, x8, x9, x10, c, y, tau, true_ds_from(tau, f_y)]
}

/// Generates the synthetic benchmark with `tau` and `true_ds` columns.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Dataset, ScmError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let records = (0..cfg.n).map(|id| Record { id, values: draw(&mut rng, cfg).to_vec() }).collect();
    Ok(Dataset { schema: synthetic_schema(), records })
}

/// Seeded 70/30 style split: shuffles row positions and cuts at
/// `round(train_fraction * n)`.
pub fn train_test_split(data: &Dataset, train_fraction: f64, seed: u64) -> (Dataset, Dataset) {
    use rand::seq::SliceRandom;
    let mut rows: Vec<usize> = (0..data.len()).collect();
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((data.len() as f64) * train_fraction.clamp(0.0, 1.0)).round() as usize;
    let (train, test) = rows.split_at(cut);
    (data.subset(train), data.subset(test))
}

/// Node description in the SCM JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmNode {
    pub name: String,
    pub domain: usize,
    #[serde(default)]
    pub parents: Vec<String>,
    /// One distribution over `0..domain` per parent configuration; the first
    /// listed parent varies slowest.
    pub cpt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub nodes: Vec<ScmNode>,
}

/// Finite-domain SCM given by conditional probability tables.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm {
    dag: Dag,
    domains: Vec<usize>,
    parents: Vec<Vec<usize>>,
    tables: Vec<Vec<Vec<f64>>>,
    order: Vec<usize>,
}

pub const MAX_ENUMERATION_STATES: u128 = 10_000_000;

/// Values fixed per node, `None` where the node keeps its mechanism.
pub type Assignment = Vec<Option<usize>>;

impl DiscreteScm {
    pub fn new(spec: &ScmSpec) -> Result<Self, ScmError> {
        let names: Vec<&str> = spec.nodes.iter().map(|n| n.name.as_str()).collect();
        let edges: Vec<(&str, &str)> =
            spec.nodes.iter().flat_map(|n| n.parents.iter().map(move |p| (p.as_str(), n.name.as_str()))).collect();
        let dag = Dag::new(&names, &edges)?;
        let mut domains = Vec::with_capacity(names.len());
        let mut parents = Vec::with_capacity(names.len());
        let mut tables = Vec::with_capacity(names.len());
        for node in &spec.nodes {
            if node.domain == 0 {
                return Err(ScmError::Table(node.name.clone(), "empty domain".into()));
            }
            domains.push(node.domain);
            parents.push(node.parents.iter().map(|p| dag.node(p).expect("checked by Dag::new")).collect::<Vec<_>>());
        }
        for (v, node) in spec.nodes.iter().enumerate() {
            let rows: usize = parents[v].iter().map(|&p| domains[p]).product();
            if node.cpt.len() != rows {
                return Err(ScmError::Table(
                    node.name.clone(),
                    format!("{} rows for {} parent configurations", node.cpt.len(), rows),
                ));
            }
            for (i, row) in node.cpt.iter().enumerate() {
                if row.len() != node.domain {
                    return Err(ScmError::Table(node.name.clone(), format!("row {i} has {} entries", row.len())));
                }
                if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(ScmError::Table(node.name.clone(), format!("row {i} has a negative entry")));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(ScmError::Table(node.name.clone(), format!("row {i} sums to {s}")));
                }
            }
            tables.push(node.cpt.clone());
        }
        let order = dag.topological_order()?;
        Ok(DiscreteScm { dag, domains, parents, tables, order })
    }

    pub fn from_json(text: &str) -> Result<Self, ScmError> {
        DiscreteScm::new(&serde_json::from_str(text)?)
    }

    pub fn to_spec(&self) -> ScmSpec {
        ScmSpec {
            nodes: (0..self.dag.len())
                .map(|v| ScmNode {
                    name: self.dag.name(v).to_string(),
                    domain: self.domains[v],
                    parents: self.parents[v].iter().map(|&p| self.dag.name(p).to_string()).collect(),
                    cpt: self.tables[v].clone(),
                })
                .collect(),
        }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn domain(&self, v: usize) -> usize {
        self.domains[v]
    }

    pub fn node(&self, name: &str) -> Result<usize, ScmError> {
        self.dag.node(name).ok_or_else(|| ScmError::UnknownNode(name.to_string()))
    }

    fn row_index(&self, v: usize, state: &[usize]) -> usize {
        self.parents[v].iter().fold(0, |acc, &p| acc * self.domains[p] + state[p])
    }

    /// `P(v = value | parents as in state)`.
    pub fn cpt(&self, v: usize, state: &[usize], value: usize) -> f64 {
        self.tables[v][self.row_index(v, state)][value]
    }

    /// Converts `name -> value` interventions into a checked assignment.
    pub fn assignment(&self, values: &[(&str, usize)]) -> Result<Assignment, ScmError> {
        let mut out = vec![None; self.dag.len()];
        for &(name, value) in values {
            let v = self.node(name)?;
            if value >= self.domains[v] {
                return Err(ScmError::Domain { node: name.to_string(), value, size: self.domains[v] });
            }
            out[v] = Some(value);
        }
        Ok(out)
    }

    fn sample_states(&self, fixed: &Assignment, n: usize, seed: u64) -> Vec<Vec<usize>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let mut state = vec![0usize; self.dag.len()];
                for &v in &self.order {
                    state[v] = match fixed[v] {
                        Some(x) => x,
                        None => {
                            let row = &self.tables[v][self.row_index(v, &state)];
                            let u: f64 = rng.random();
                            let mut acc = 0.0;
                            let mut pick = row.len() - 1;
                            for (x, p) in row.iter().enumerate() {
                                acc += p;
                                if u < acc {
                                    pick = x;
                                    break;
                                }
                            }
                            pick
                        }
                    };
                }
                state
            })
            .collect()
    }

    /// Observational ancestral sampling in topological order.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Vec<usize>> {
        self.sample_states(&vec![None; self.dag.len()], n, seed)
    }

    /// Sampling from the mutilated model: intervened nodes lose their
    /// incoming edges and take the fixed value.
    pub fn intervene_sample(&self, interventions: &[(&str, usize)], n: usize, seed: u64) -> Result<Vec<Vec<usize>>, ScmError> {
        Ok(self.sample_states(&self.assignment(interventions)?, n, seed))
    }

    pub fn schema(&self, roles: &AuditRoles) -> Result<Schema, ScmError> {
        let attrs = (0..self.dag.len())
            .map(|v| {
                let kind = if self.domains[v] == 2 {
                    AttributeKind::Binary
                } else {
                    AttributeKind::Categorical((0..self.domains[v]).map(|x| x.to_string()).collect())
                };
                Attribute::new(self.dag.name(v), kind)
            })
            .collect();
        Schema::new(attrs, roles.clone()).map_err(|e| ScmError::Config(e.to_string()))
    }

    pub fn to_dataset(&self, roles: &AuditRoles, states: &[Vec<usize>]) -> Result<Dataset, ScmError> {
        let schema = self.schema(roles)?;
        let records = states
            .iter()
            .enumerate()
            .map(|(id, s)| Record { id, values: s.iter().map(|&x| x as f64).collect() })
            .collect();
        Ok(Dataset { schema, records })
    }

    pub fn state_space(&self) -> u128 {
        self.domains.iter().map(|&d| d as u128).product()
    }

    /// Exact joint probabilities over all states under `fixed` interventions.
    /// States are indexed in mixed radix with node 0 varying slowest.
    pub fn joint(&self, fixed: &Assignment) -> Result<Vec<f64>, ScmError> {
        let total = self.state_space();
        if total > MAX_ENUMERATION_STATES {
            return Err(ScmError::StateSpace(total));
        }
        let n = self.dag.len();
        let mut out = Vec::with_capacity(total as usize);
        let mut state = vec![0usize; n];
        for _ in 0..total {
            let mut p = 1.0;
            for v in 0..n {
                match fixed[v] {
                    Some(x) if x != state[v] => {
                        p = 0.0;
                        break;
                    }
                    Some(_) => {}
                    None => p *= self.cpt(v, &state, state[v]),
                }
            }
            out.push(p);
            for v in (0..n).rev() {
                state[v] += 1;
                if state[v] < self.domains[v] {
                    break;
                }
                state[v] = 0;
            }
        }
        Ok(out)
    }

    fn for_each_state(&self, joint: &[f64], mut f: impl FnMut(&[usize], f64)) {
        let n = self.dag.len();
        let mut state = vec![0usize; n];
        for &p in joint {
            f(&state, p);
            for v in (0..n).rev() {
                state[v] += 1;
                if state[v] < self.domains[v] {
                    break;
                }
                state[v] = 0;
            }
        }
    }

    /// `P(target = value | given)` under `fixed` interventions, by enumeration.
    pub fn probability(
        &self,
        target: (usize, usize),
        given: &[(usize, usize)],
        fixed: &Assignment,
    ) -> Result<f64, ScmError> {
        let joint = self.joint(fixed)?;
        conditional_from_joint(self, &joint, target, given)
    }

    /// Exact `P(Y=1 | do(A=1), do(b)) - P(Y=1 | do(A=0), do(b))`.
    pub fn oracle_direct_effect(&self, roles: &AuditRoles, b_values: &[(&str, usize)]) -> Result<f64, ScmError> {
        let a = self.node(&roles.protected)?;
        let y = self.node(&roles.outcome)?;
        let mut p = [0.0; 2];
        for (slot, a_value) in p.iter_mut().zip([0usize, 1]) {
            let mut fixed = self.assignment(b_values)?;
            fixed[a] = Some(a_value);
            *slot = self.probability((y, 1), &[], &fixed)?;
        }
        Ok(p[1] - p[0])
    }

    /// Exact observational `P(Y=1 | features)` for every feature combination
    /// of positive probability.
    pub fn exact_lookup(&self, outcome: &str, features: &[String]) -> Result<LookupTable, ScmError> {
        let y = self.node(outcome)?;
        let cols: Vec<usize> = features.iter().map(|f| self.node(f)).collect::<Result<_, _>>()?;
        let joint = self.joint(&vec![None; self.dag.len()])?;
        let mut acc: HashMap<Vec<usize>, (f64, f64)> = HashMap::new();
        self.for_each_state(&joint, |state, p| {
            let key: Vec<usize> = cols.iter().map(|&c| state[c]).collect();
            let e = acc.entry(key).or_insert((0.0, 0.0));
            e.0 += p;
            if state[y] == 1 {
                e.1 += p;
            }
        });
        let mut table: Vec<(Vec<f64>, f64)> = acc
            .into_iter()
            .filter(|(_, (mass, _))| *mass > 0.0)
            .map(|(k, (mass, pos))| (k.iter().map(|&x| x as f64).collect(), (pos / mass).clamp(0.0, 1.0)))
            .collect();
        table.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite keys"));
        LookupTable::new(features.to_vec(), table).map_err(|e| ScmError::Config(e.to_string()))
    }

    /// Exact observational joint marginal of `variables`.
    pub fn exact_marginal(&self, variables: &[String]) -> Result<EmpiricalJointDistribution, ScmError> {
        let cols: Vec<usize> = variables.iter().map(|f| self.node(f)).collect::<Result<_, _>>()?;
        let joint = self.joint(&vec![None; self.dag.len()])?;
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        self.for_each_state(&joint, |state, p| {
            *acc.entry(cols.iter().map(|&c| state[c]).collect()).or_insert(0.0) += p;
        });
        let support = acc.into_iter().map(|(k, p)| (k.iter().map(|&x| x as f64).collect(), p)).collect();
        EmpiricalJointDistribution::from_support(variables.to_vec(), BTreeMap::new(), support, 1e-9)
            .map_err(|e| ScmError::Config(e.to_string()))
    }

    /// Random SCM over `n_nodes` with strictly positive CPTs. Node names are
    /// `A`, `Y` and `V2..`; the edge `A -> Y` is always present, other
    /// forward edges of a random order appear with probability `edge_prob`.
    pub fn random(n_nodes: usize, edge_prob: f64, max_domain: usize, seed: u64) -> DiscreteScm {
        use rand::seq::SliceRandom;
        assert!(n_nodes >= 2, "need at least A and Y");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> =
            (0..n_nodes).map(|i| match i { 0 => "A".to_string(), 1 => "Y".to_string(), _ => format!("V{i}") }).collect();
        let mut order: Vec<usize> = (0..n_nodes).collect();
        order.shuffle(&mut rng);
        let pos_a = order.iter().position(|&v| v == 0).unwrap();
        let pos_y = order.iter().position(|&v| v == 1).unwrap();
        if pos_a > pos_y {
            order.swap(pos_a, pos_y);
        }
        let domains: Vec<usize> = (0..n_nodes)
            .map(|v| if v < 2 { 2 } else { rng.random_range(2..=max_domain.max(2)) })
            .collect();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
        for i in 0..n_nodes {
            for j in (i + 1)..n_nodes {
                let (p, c) = (order[i], order[j]);
                if (p == 0 && c == 1) || rng.random::<f64>() < edge_prob {
                    parents[c].push(p);
                }
            }
        }
        let nodes = (0..n_nodes)
            .map(|v| {
                let rows: usize = parents[v].iter().map(|&p| domains[p]).product();
                let cpt = (0..rows)
                    .map(|_| {
                        let raw: Vec<f64> = (0..domains[v]).map(|_| 0.05 + rng.random::<f64>()).collect();
                        let s: f64 = raw.iter().sum();
                        raw.iter().map(|x| x / s).collect()
                    })
                    .collect();
                ScmNode {
                    name: names[v].clone(),
                    domain: domains[v],
                    parents: parents[v].iter().map(|&p| names[p].clone()).collect(),
                    cpt,
                }
            })
            .collect();
        DiscreteScm::new(&ScmSpec { nodes }).expect("random SCM is well formed")
    }
}

fn conditional_from_joint(
    scm: &DiscreteScm,
    joint: &[f64],
    target: (usize, usize),
    given: &[(usize, usize)],
) -> Result<f64, ScmError> {
    let mut num = 0.0;
    let mut den = 0.0;
    scm.for_each_state(joint, |state, p| {
        if given.iter().all(|&(v, x)| state[v] == x) {
            den += p;
            if state[target.0] == target.1 {
                num += p;
            }
        }
    });
    if den <= 0.0 {
        return Err(ScmError::ZeroProbability);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn true_ds_cases() {
        assert_eq!(true_ds_from(0.0, 1.3), 0.0);
        // f_Y = 0, e^{-tau} = 1/9: |0.5 - 0.9|
        let v = true_ds_from(9f64.ln(), 0.0);
        assert!((v - 0.4).abs() < 1e-12, "{v}");
        assert_eq!(true_ds(-0.1, -2.0, 1.0, 1.0, 0.0, 1.0, 1.0), 0.0);
    }

    #[test]
    fn true_ds_monotone_in_tau() {
        for f_y in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let mut prev = 0.0;
            for k in 0..200 {
                let v = true_ds_from(k as f64 * 0.05, f_y);
                assert!(v >= prev - 1e-15, "f_y={f_y} k={k}");
                prev = v;
            }
        }
    }

    #[test]
    fn protected_one_ignores_tau() {
        for tau in [0.0, 1.0, 5.0] {
            assert_eq!(outcome_probability(1.0, tau, 0.8), 1.0 / (1.0 + 0.8f64.exp()));
        }
    }

    #[test]
    fn zero_effect_records() {
        let d = generate_synthetic(&SyntheticConfig { n: 2000, seed: 3, ..Default::default() }).unwrap();
        let s = &d.schema;
        let (x1, x2, x7, tau, ds) =
            (s.require("X1").unwrap(), s.require("X2").unwrap(), s.require("X7").unwrap(), s.require("tau").unwrap(), s.require("true_ds").unwrap());
        let mut seen = 0;
        for r in &d.records {
            if r.values[x1] <= 0.0 && r.values[x2] <= 0.0 && r.values[x7] == 0.0 {
                assert_eq!(r.values[tau], 0.0);
                assert_eq!(r.values[ds], 0.0);
                seen += 1;
            }
        }
        assert!(seen > 100);
    }

    #[test]
    fn config_validation() {
        assert!(generate_synthetic(&SyntheticConfig { n: 0, ..Default::default() }).is_err());
        assert!(generate_synthetic(&SyntheticConfig { n: 1, noise_bound: -1.0, ..Default::default() }).is_err());
    }

    #[test]
    fn seed_determinism() {
        let cfg = SyntheticConfig { n: 500, seed: 11, ..Default::default() };
        assert_eq!(generate_synthetic(&cfg).unwrap().to_csv(), generate_synthetic(&cfg).unwrap().to_csv());
    }

    #[test]
    fn synthetic_dag_partition() {
        let p = synthetic_dag().partition(&AuditRoles::new("A", "Y").unwrap()).unwrap();
        assert_eq!(p.descendants.iter().collect::<Vec<_>>(), vec!["C"]);
        assert_eq!(p.antecedents.len(), 6);
        assert_eq!(p.irrelevant.len(), 4);
    }

    fn two_node(p_y_given_a: [f64; 2]) -> DiscreteScm {
        DiscreteScm::from_json(&format!(
            r#"{{"nodes":[
                {{"name":"A","domain":2,"cpt":[[0.5,0.5]]}},
                {{"name":"B","domain":2,"cpt":[[0.3,0.7]]}},
                {{"name":"Y","domain":2,"parents":["A","B"],"cpt":[[0.9,0.1],[{},{}],[0.8,0.2],[{},{}]]}}
            ]}}"#,
            1.0 - p_y_given_a[0],
            p_y_given_a[0],
            1.0 - p_y_given_a[1],
            p_y_given_a[1]
        ))
        .unwrap()
    }

    #[test]
    fn oracle_reads_cpt() {
        // Row order: (A,B) = (0,0), (0,1), (1,0), (1,1).
        let scm = two_node([0.4, 0.7]);
        let roles = AuditRoles::new("A", "Y").unwrap();
        let d = scm.oracle_direct_effect(&roles, &[("B", 1)]).unwrap();
        assert!((d - 0.3).abs() < 1e-12, "{d}");
    }

    #[test]
    fn oracle_zero_when_outcome_ignores_protected() {
        let scm = DiscreteScm::from_json(
            r#"{"nodes":[
                {"name":"A","domain":2,"cpt":[[0.5,0.5]]},
                {"name":"B","domain":3,"cpt":[[0.2,0.3,0.5]]},
                {"name":"Y","domain":2,"parents":["A","B"],"cpt":[[0.9,0.1],[0.5,0.5],[0.2,0.8],[0.9,0.1],[0.5,0.5],[0.2,0.8]]}
            ]}"#,
        )
        .unwrap();
        let roles = AuditRoles::new("A", "Y").unwrap();
        for b in 0..3 {
            assert!(scm.oracle_direct_effect(&roles, &[("B", b)]).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn table_validation() {
        let bad_sum = r#"{"nodes":[{"name":"A","domain":2,"cpt":[[0.5,0.6]]}]}"#;
        assert!(matches!(DiscreteScm::from_json(bad_sum), Err(ScmError::Table(..))));
        let bad_rows = r#"{"nodes":[{"name":"A","domain":2,"cpt":[[0.5,0.5]]},{"name":"Y","domain":2,"parents":["A"],"cpt":[[0.5,0.5]]}]}"#;
        assert!(matches!(DiscreteScm::from_json(bad_rows), Err(ScmError::Table(..))));
        let scm = two_node([0.4, 0.7]);
        assert!(matches!(scm.intervene_sample(&[("A", 2)], 10, 0), Err(ScmError::Domain { .. })));
        assert!(matches!(scm.intervene_sample(&[("Q", 0)], 10, 0), Err(ScmError::UnknownNode(_))));
        let round = DiscreteScm::new(&scm.to_spec()).unwrap();
        assert_eq!(round, scm);
    }

    #[test]
    fn intervened_nodes_are_fixed() {
        let scm = two_node([0.4, 0.7]);
        let states = scm.intervene_sample(&[("B", 0)], 200, 1).unwrap();
        let b = scm.node("B").unwrap();
        assert!(states.iter().all(|s| s[b] == 0));
    }

    #[test]
    fn joint_sums_to_one() {
        let scm = DiscreteScm::random(6, 0.5, 3, 9);
        let total: f64 = scm.joint(&vec![None; 6]).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let a = scm.node("A").unwrap();
        let y = scm.node("Y").unwrap();
        assert!(scm.dag().has_edge(a, y));
    }
}
