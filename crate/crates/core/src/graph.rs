//! Causal DAG over named variables: parsing, reachability, d-separation and
//! the node partition that decides which variables an unbiased audit
//! conditions on.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: self-loop on `{node}`")]
    SelfLoop { line: usize, node: String },
    #[error("line {line}: invalid node name `{name}`")]
    InvalidName { line: usize, name: String },
    #[error("edge references unknown node `{0}`")]
    UnknownNode(String),
    #[error("directed cycle through `{0}`")]
    Cycle(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("conditioning set overlaps endpoint `{0}`")]
    ConditionOverlap(String),
    #[error("protected and outcome must differ (both `{0}`)")]
    SameRole(String),
    #[error("invalid DAG JSON: {0}")]
    Json(String),
}

/// Directed acyclic graph of named variables.
///
/// Node indices follow declaration order. Parent and child lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

/// JSON form of a DAG: `{"nodes":[...],"edges":[["Parent","Child"],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagJson {
    #[serde(default)]
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Dag {
    /// Builds a DAG from declared nodes and edges. Every edge endpoint must be
    /// declared.
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self, GraphError> {
        let mut dag = Dag::empty();
        for n in nodes {
            let n = n.as_ref();
            if !is_valid_name(n) {
                return Err(GraphError::InvalidName { line: 0, name: n.to_string() });
            }
            if dag.index.contains_key(n) {
                return Err(GraphError::DuplicateNode(n.to_string()));
            }
            dag.add_node(n);
        }
        for (p, c) in edges {
            let (p, c) = (p.as_ref(), c.as_ref());
            let pi = dag.node(p).ok_or_else(|| GraphError::UnknownNode(p.to_string()))?;
            let ci = dag.node(c).ok_or_else(|| GraphError::UnknownNode(c.to_string()))?;
            if pi == ci {
                return Err(GraphError::SelfLoop { line: 0, node: p.to_string() });
            }
            dag.add_edge(pi, ci)?;
        }
        dag.finish()?;
        Ok(dag)
    }

    fn empty() -> Self {
        Dag { names: Vec::new(), index: HashMap::new(), parents: Vec::new(), children: Vec::new() }
    }

    fn add_node(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.parents.push(Vec::new());
        self.children.push(Vec::new());
        i
    }

    fn add_edge(&mut self, p: usize, c: usize) -> Result<(), GraphError> {
        if self.children[p].contains(&c) {
            return Err(GraphError::DuplicateEdge(self.names[p].clone(), self.names[c].clone()));
        }
        self.children[p].push(c);
        self.parents[c].push(p);
        Ok(())
    }

    fn finish(&mut self) -> Result<(), GraphError> {
        for v in self.parents.iter_mut().chain(self.children.iter_mut()) {
            v.sort_unstable();
        }
        self.topological_order().map(|_| ())
    }

    /// Parses the edge-list text format: one `Parent -> Child` per line, `#`
    /// starts a comment, and a line holding a single name declares a node.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut dag = Dag::empty();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let check = |name: &str| -> Result<(), GraphError> {
                if is_valid_name(name) {
                    Ok(())
                } else {
                    Err(GraphError::InvalidName { line, name: name.to_string() })
                }
            };
            match content.split_once("->") {
                None => {
                    if content.split_whitespace().count() != 1 {
                        return Err(GraphError::Syntax {
                            line,
                            message: format!("expected `Parent -> Child`, got `{content}`"),
                        });
                    }
                    check(content)?;
                    dag.add_node(content);
                }
                Some((p, c)) => {
                    let (p, c) = (p.trim(), c.trim());
                    if p.is_empty() || c.is_empty() || c.contains("->") {
                        return Err(GraphError::Syntax {
                            line,
                            message: format!("expected `Parent -> Child`, got `{content}`"),
                        });
                    }
                    check(p)?;
                    check(c)?;
                    if p == c {
                        return Err(GraphError::SelfLoop { line, node: p.to_string() });
                    }
                    let pi = dag.add_node(p);
                    let ci = dag.add_node(c);
                    dag.add_edge(pi, ci).map_err(|_| GraphError::Syntax {
                        line,
                        message: format!("duplicate edge {p} -> {c}"),
                    })?;
                }
            }
        }
        dag.finish()?;
        Ok(dag)
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let spec: DagJson = serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        Dag::new(&spec.nodes, &spec.edges)
    }

    /// Accepts either the JSON form or the edge-list text.
    pub fn parse_any(text: &str) -> Result<Self, GraphError> {
        if text.trim_start().starts_with('{') {
            Dag::from_json(text)
        } else {
            Dag::parse(text)
        }
    }

    pub fn to_json(&self) -> DagJson {
        DagJson {
            nodes: self.names.clone(),
            edges: self.edges().map(|(p, c)| (self.names[p].clone(), self.names[c].clone())).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push('\n');
        }
        for (p, c) in self.edges() {
            out.push_str(&format!("{} -> {}\n", self.names[p], self.names[c]));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children.iter().enumerate().flat_map(|(p, cs)| cs.iter().map(move |&c| (p, c)))
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, p: usize, c: usize) -> bool {
        self.children[p].binary_search(&c).is_ok()
    }

    pub fn parents_of(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children_of(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.node(name).ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    fn to_names(&self, set: impl IntoIterator<Item = usize>) -> BTreeSet<String> {
        set.into_iter().map(|i| self.names[i].clone()).collect()
    }

    pub fn parents(&self, v: &str) -> Result<BTreeSet<String>, GraphError> {
        let i = self.require(v)?;
        Ok(self.to_names(self.parents[i].iter().copied()))
    }

    pub fn children(&self, v: &str) -> Result<BTreeSet<String>, GraphError> {
        let i = self.require(v)?;
        Ok(self.to_names(self.children[i].iter().copied()))
    }

    pub fn descendants(&self, v: &str) -> Result<BTreeSet<String>, GraphError> {
        let i = self.require(v)?;
        Ok(self.to_names(self.reach(&[i], &self.children)))
    }

    pub fn ancestors(&self, v: &str) -> Result<BTreeSet<String>, GraphError> {
        let i = self.require(v)?;
        Ok(self.to_names(self.reach(&[i], &self.parents)))
    }

    /// Nodes reachable from `start` along `adj`, excluding the start nodes
    /// unless they are reachable through a path.
    fn reach(&self, start: &[usize], adj: &[Vec<usize>]) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = start.to_vec();
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    out.push(w);
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn descendant_indices(&self, v: usize) -> Vec<usize> {
        self.reach(&[v], &self.children)
    }

    pub fn ancestor_indices(&self, v: usize) -> Vec<usize> {
        self.reach(&[v], &self.parents)
    }

    /// Kahn's algorithm; ties resolved by node index so the order is stable.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
            (0..n).filter(|&i| indeg[i] == 0).map(std::cmp::Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(std::cmp::Reverse(c));
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap_or(0);
            return Err(GraphError::Cycle(self.names[stuck].clone()));
        }
        Ok(order)
    }

    /// Returns a copy with one more edge, or an error if it would create a
    /// cycle or duplicate an existing edge.
    pub fn with_edge(&self, p: &str, c: &str) -> Result<Dag, GraphError> {
        let pi = self.require(p)?;
        let ci = self.require(c)?;
        if pi == ci {
            return Err(GraphError::SelfLoop { line: 0, node: p.to_string() });
        }
        let mut dag = self.clone();
        dag.add_edge(pi, ci)?;
        dag.finish()?;
        Ok(dag)
    }

    /// Decides whether `x` and `y` are d-separated by `z`.
    pub fn is_d_separated(&self, x: &str, y: &str, z: &[&str]) -> Result<bool, GraphError> {
        let xi = self.require(x)?;
        let yi = self.require(y)?;
        let mut zi = Vec::with_capacity(z.len());
        for name in z {
            let i = self.require(name)?;
            if i == xi || i == yi {
                return Err(GraphError::ConditionOverlap(name.to_string()));
            }
            zi.push(i);
        }
        Ok(self.d_separated(xi, yi, &zi))
    }

    /// Index form of [`Dag::is_d_separated`]. Callers guarantee `x`, `y` are
    /// not in `z`.
    pub fn d_separated(&self, x: usize, y: usize, z: &[usize]) -> bool {
        !self.d_connected_from(x, z)[y]
    }

    /// Marks every node d-connected to `source` given `z` (the "reachable"
    /// procedure of Koller and Friedman, Alg. 3.1).
    fn d_connected_from(&self, source: usize, z: &[usize]) -> Vec<bool> {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        // Ancestors of z, including z itself: colliders here are open.
        let mut anc_z = in_z.clone();
        let mut stack: Vec<usize> = z.to_vec();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !anc_z[p] {
                    anc_z[p] = true;
                    stack.push(p);
                }
            }
        }

        // Direction of travel: `up` = arrived from a child, `down` = from a parent.
        let mut visited_up = vec![false; n];
        let mut visited_down = vec![false; n];
        let mut reachable = vec![false; n];
        let mut queue = VecDeque::new();
        queue.push_back((source, true));
        while let Some((v, up)) = queue.pop_front() {
            let visited = if up { &mut visited_up } else { &mut visited_down };
            if visited[v] {
                continue;
            }
            visited[v] = true;
            if !in_z[v] {
                reachable[v] = true;
            }
            if up {
                if !in_z[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, true));
                    }
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
            } else {
                if !in_z[v] {
                    for &c in &self.children[v] {
                        queue.push_back((c, false));
                    }
                }
                if anc_z[v] {
                    for &p in &self.parents[v] {
                        queue.push_back((p, true));
                    }
                }
            }
        }
        reachable[source] = false;
        reachable
    }

    pub fn partition(&self, roles: &AuditRoles) -> Result<NodePartition, GraphError> {
        partition_nodes(self, roles)
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Protected attribute and outcome of an audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRoles {
    pub protected: String,
    pub outcome: String,
}

impl AuditRoles {
    pub fn new(protected: impl Into<String>, outcome: impl Into<String>) -> Result<Self, GraphError> {
        let roles = AuditRoles { protected: protected.into(), outcome: outcome.into() };
        if roles.protected == roles.outcome {
            return Err(GraphError::SameRole(roles.protected));
        }
        Ok(roles)
    }

    pub fn check(&self, dag: &Dag) -> Result<(usize, usize), GraphError> {
        if self.protected == self.outcome {
            return Err(GraphError::SameRole(self.protected.clone()));
        }
        Ok((dag.require(&self.protected)?, dag.require(&self.outcome)?))
    }
}

/// Split of every node other than the protected attribute and the outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePartition {
    /// Nodes with a directed path into the outcome.
    pub antecedents: BTreeSet<String>,
    /// Descendants of the outcome; these get marginalized out.
    pub descendants: BTreeSet<String>,
    /// Nodes sharing a direct child with the outcome.
    pub spouses: BTreeSet<String>,
    pub irrelevant: BTreeSet<String>,
}

pub fn partition_nodes(dag: &Dag, roles: &AuditRoles) -> Result<NodePartition, GraphError> {
    let (a, y) = roles.check(dag)?;
    let n = dag.len();
    // 0 = unassigned, 1 = B, 2 = C, 3 = S
    let mut class = vec![0u8; n];
    for d in dag.descendant_indices(y) {
        class[d] = 2;
    }
    for b in dag.ancestor_indices(y) {
        if b != a {
            class[b] = 1;
        }
    }
    for &child in dag.children_of(y) {
        for &s in dag.parents_of(child) {
            if s != y && s != a && class[s] == 0 {
                class[s] = 3;
            }
        }
    }
    let mut part = NodePartition {
        antecedents: BTreeSet::new(),
        descendants: BTreeSet::new(),
        spouses: BTreeSet::new(),
        irrelevant: BTreeSet::new(),
    };
    for (v, &cls) in class.iter().enumerate().take(n) {
        if v == a || v == y {
            continue;
        }
        let name = dag.name(v).to_string();
        match cls {
            1 => part.antecedents.insert(name),
            2 => part.descendants.insert(name),
            3 => part.spouses.insert(name),
            _ => part.irrelevant.insert(name),
        };
    }
    Ok(part)
}

/// Findings of [`validate_for_audit`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub warnings: Vec<String>,
    /// Common children of the protected attribute and the outcome.
    pub colliders: Vec<String>,
    /// Descendants of colliders that are not colliders themselves.
    pub collider_descendants: Vec<String>,
    pub acyclic: bool,
}

impl ValidationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("acyclic: {}\n", if self.acyclic { "yes" } else { "no" }));
        out.push_str(&format!("colliders: {}\n", fmt_list(&self.colliders)));
        out.push_str(&format!("collider descendants: {}\n", fmt_list(&self.collider_descendants)));
        if self.warnings.is_empty() {
            out.push_str("warnings: none\n");
        } else {
            for w in &self.warnings {
                out.push_str(&format!("warning: {w}\n"));
            }
        }
        out
    }
}

fn fmt_list(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".to_string()
    } else {
        items.join(", ")
    }
}

/// Checks the DAG against the audit roles. Never fails on graph shape: an
/// unknown role becomes a warning.
pub fn validate_for_audit(dag: &Dag, roles: &AuditRoles) -> ValidationReport {
    let mut report = ValidationReport {
        warnings: Vec::new(),
        colliders: Vec::new(),
        collider_descendants: Vec::new(),
        acyclic: dag.topological_order().is_ok(),
    };
    let (a, y) = match roles.check(dag) {
        Ok(pair) => pair,
        Err(e) => {
            report.warnings.push(e.to_string());
            return report;
        }
    };
    if !dag.has_edge(a, y) {
        report.warnings.push(format!(
            "no edge {} -> {}: the outcome has no direct dependence on the protected attribute in the policy graph",
            roles.protected, roles.outcome
        ));
    }
    if dag.has_edge(y, a) || dag.descendant_indices(y).contains(&a) {
        report.warnings.push(format!(
            "protected attribute {} is a descendant of outcome {}",
            roles.protected, roles.outcome
        ));
    }
    let colliders: Vec<usize> =
        dag.children_of(a).iter().copied().filter(|c| dag.children_of(y).contains(c)).collect();
    let mut desc = BTreeSet::new();
    for &c in &colliders {
        desc.extend(dag.descendant_indices(c));
    }
    for c in &colliders {
        desc.remove(c);
    }
    report.colliders = colliders.iter().map(|&c| dag.name(c).to_string()).collect();
    report.collider_descendants = desc.into_iter().map(|c| dag.name(c).to_string()).collect();
    if !report.colliders.is_empty() {
        report.warnings.push(format!(
            "colliders of {} and {}: {}; a naive flip test conditioning on them (or their descendants) is biased",
            roles.protected,
            roles.outcome,
            report.colliders.join(", ")
        ));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Dag {
        Dag::parse("Race -> Suburb\nSalary -> Suburb").unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_collider_example() {
        let dag = fig1();
        assert_eq!(dag.len(), 3);
        assert_eq!(dag.edge_count(), 2);
        assert_eq!(dag.parents("Suburb").unwrap(), set(&["Race", "Salary"]));
        assert!(dag.parents("Race").unwrap().is_empty());
        assert_eq!(dag.descendants("Race").unwrap(), set(&["Suburb"]));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            Dag::parse("A -> A").unwrap_err(),
            GraphError::SelfLoop { line: 1, node: "A".into() }
        );
        assert!(matches!(Dag::parse("A -> B\nB -> C\nC -> A"), Err(GraphError::Cycle(_))));
        assert!(matches!(Dag::parse("# header\nA -> B\nA => B"), Err(GraphError::Syntax { line: 3, .. })));
        assert!(matches!(Dag::parse("A -> 1B"), Err(GraphError::InvalidName { line: 1, .. })));
        assert!(matches!(Dag::parse("A -> B -> C"), Err(GraphError::Syntax { line: 1, .. })));
        assert!(matches!(Dag::parse("A -> B\nA -> B"), Err(GraphError::Syntax { line: 2, .. })));
    }

    #[test]
    fn comments_and_isolated_nodes() {
        let dag = Dag::parse("# policy\nX3\nA -> Y # direct\n\nY -> C\n").unwrap();
        assert_eq!(dag.names(), &["X3", "A", "Y", "C"]);
        assert_eq!(Dag::parse(&dag.to_text()).unwrap(), dag);
    }

    #[test]
    fn json_form_rejects_unknown_nodes() {
        let dag = Dag::from_json(r#"{"nodes":["A","Y"],"edges":[["A","Y"]]}"#).unwrap();
        assert_eq!(dag.edge_count(), 1);
        assert_eq!(
            Dag::from_json(r#"{"nodes":["A"],"edges":[["A","Y"]]}"#).unwrap_err(),
            GraphError::UnknownNode("Y".into())
        );
        let round = Dag::parse_any(&serde_json::to_string(&dag.to_json()).unwrap()).unwrap();
        assert_eq!(round, dag);
    }

    #[test]
    fn chain_queries() {
        let dag = Dag::parse("A -> B\nB -> C").unwrap();
        assert_eq!(dag.parents("C").unwrap(), set(&["B"]));
        assert_eq!(dag.descendants("A").unwrap(), set(&["B", "C"]));
        assert_eq!(dag.ancestors("C").unwrap(), set(&["A", "B"]));
        assert!(dag.is_d_separated("A", "C", &["B"]).unwrap());
        assert!(!dag.is_d_separated("A", "C", &[]).unwrap());
        assert_eq!(dag.parents("Q").unwrap_err(), GraphError::UnknownNode("Q".into()));
    }

    #[test]
    fn collider_opens_on_conditioning() {
        let dag = fig1();
        assert!(dag.is_d_separated("Race", "Salary", &[]).unwrap());
        assert!(!dag.is_d_separated("Race", "Salary", &["Suburb"]).unwrap());
        let deeper = Dag::parse("Race -> Suburb\nSalary -> Suburb\nSuburb -> Rent").unwrap();
        assert!(!deeper.is_d_separated("Race", "Salary", &["Rent"]).unwrap());
        assert_eq!(
            dag.is_d_separated("Race", "Salary", &["Race"]).unwrap_err(),
            GraphError::ConditionOverlap("Race".into())
        );
    }

    #[test]
    fn partitions() {
        let roles = AuditRoles::new("Race", "Salary").unwrap();
        let p = partition_nodes(&fig1(), &roles).unwrap();
        assert!(p.antecedents.is_empty());
        assert_eq!(p.descendants, set(&["Suburb"]));
        assert!(p.spouses.is_empty() && p.irrelevant.is_empty());

        let chain = Dag::parse("A -> Y\nY -> C2").unwrap();
        let p = partition_nodes(&chain, &AuditRoles::new("A", "Y").unwrap()).unwrap();
        assert_eq!(p.descendants, set(&["C2"]));
        assert!(p.antecedents.is_empty());

        let dag = Dag::parse("X1 -> Y\nX1 -> X3\nY -> X3\nA -> Y").unwrap();
        let p = partition_nodes(&dag, &AuditRoles::new("A", "Y").unwrap()).unwrap();
        assert_eq!(p.antecedents, set(&["X1"]));
        assert_eq!(p.descendants, set(&["X3"]));
        assert!(p.spouses.is_empty() && p.irrelevant.is_empty());
    }

    #[test]
    fn partition_spouses_and_irrelevant() {
        let dag = Dag::parse("A -> Y\nW -> Y\nY -> K\nS -> K\nS -> T\nA -> Z\nQ").unwrap();
        let p = partition_nodes(&dag, &AuditRoles::new("A", "Y").unwrap()).unwrap();
        assert_eq!(p.antecedents, set(&["W"]));
        assert_eq!(p.descendants, set(&["K"]));
        assert_eq!(p.spouses, set(&["S"]));
        assert_eq!(p.irrelevant, set(&["Q", "T", "Z"]));
    }

    #[test]
    fn validation_reports() {
        let r = validate_for_audit(&fig1(), &AuditRoles::new("Race", "Salary").unwrap());
        assert!(r.acyclic);
        assert_eq!(r.colliders, vec!["Suburb"]);
        assert!(r.warnings.iter().any(|w| w.contains("no edge Race -> Salary")));

        let clean = Dag::parse("A -> Y").unwrap();
        let r = validate_for_audit(&clean, &AuditRoles::new("A", "Y").unwrap());
        assert!(r.warnings.is_empty());
        assert!(r.colliders.is_empty());

        let dag = Dag::parse("A -> C\nY -> C\nA -> Y\nC -> D").unwrap();
        let r = validate_for_audit(&dag, &AuditRoles::new("A", "Y").unwrap());
        assert_eq!(r.colliders, vec!["C"]);
        assert_eq!(r.collider_descendants, vec!["D"]);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["colliders"][0], "C");
        assert_eq!(json["collider_descendants"][0], "D");
    }

    #[test]
    fn with_edge_rejects_cycles() {
        let dag = Dag::parse("A -> B").unwrap();
        assert!(matches!(dag.with_edge("B", "A"), Err(GraphError::Cycle(_))));
        assert_eq!(dag.with_edge("A", "B").unwrap_err(), GraphError::DuplicateEdge("A".into(), "B".into()));
    }
}
