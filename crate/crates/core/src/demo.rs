//! The Race / Salary / Suburb collider scenario.
//!
//! Race and Salary are independent; both cause Suburb. The Suburb table is
//! chosen so that Suburb's distribution does not depend on Race once Salary is
//! summed out, while within each suburb Race and Salary are associated. A
//! classifier reading (Race, Suburb) therefore looks unfair to the naive flip
//! test, yet marginalizing Suburb recovers `P(high | race) = P(high)` for both
//! races.

use std::collections::BTreeMap;

use crate::classifiers::{ClassifierModel, LookupTable};
use crate::dataset::{Dataset, EmpiricalJointDistribution};
use crate::graph::{AuditRoles, Dag};
use crate::scm::{DiscreteScm, ScmError};
use crate::situation_test::{AuditConfig, AuditError};

pub const DEMO_DAG: &str = "\
# Race and Salary collide at Suburb
Race -> Suburb
Salary -> Suburb
";

/// `Race`: 0 = white, 1 = other. `Salary`: 1 = high. `Suburb`: 1 = suburb B.
pub const DEMO_SCM: &str = r#"{"nodes":[
  {"name":"Race","domain":2,"cpt":[[0.6,0.4]]},
  {"name":"Salary","domain":2,"cpt":[[0.7,0.3]]},
  {"name":"Suburb","domain":2,"parents":["Race","Salary"],
   "cpt":[[0.8,0.2],[0.2,0.8],[0.5,0.5],[0.9,0.1]]}
]}"#;

#[derive(Debug, Clone)]
pub struct ColliderDemo {
    pub dag: Dag,
    pub roles: AuditRoles,
    pub scm: DiscreteScm,
    /// Exact `P(Salary = high | Race, Suburb)`.
    pub classifier: ClassifierModel,
    pub lookup: LookupTable,
    /// Exact marginal of Suburb.
    pub distribution: EmpiricalJointDistribution,
    pub test: Dataset,
}

impl ColliderDemo {
    pub fn build(n_individuals: usize, seed: u64) -> Result<Self, ScmError> {
        let dag = Dag::parse(DEMO_DAG)?;
        let roles = AuditRoles::new("Race", "Salary")?;
        let scm = DiscreteScm::from_json(DEMO_SCM)?;
        let lookup = scm.exact_lookup("Salary", &["Race".to_string(), "Suburb".to_string()])?;
        let distribution = scm.exact_marginal(&["Suburb".to_string()])?;
        let states = scm.sample(n_individuals, seed);
        let test = scm.to_dataset(&roles, &states)?;
        Ok(ColliderDemo { dag, roles, scm, classifier: ClassifierModel::lookup(lookup.clone()), lookup, distribution, test })
    }

    pub fn config(&self, threshold: f64) -> Result<AuditConfig, AuditError> {
        let partition = self.dag.partition(&self.roles).map_err(|e| AuditError::Data(crate::dataset::DataError::Distribution(e.to_string())))?;
        AuditConfig::new(threshold, partition, self.distribution.clone())
    }

    /// `P(high | race)` from the model, the "data view on race only".
    pub fn race_only(&self) -> Result<BTreeMap<usize, f64>, ScmError> {
        let race = self.scm.node("Race")?;
        let salary = self.scm.node("Salary")?;
        let mut out = BTreeMap::new();
        for r in 0..2 {
            out.insert(r, self.scm.probability((salary, 1), &[(race, r)], &vec![None; self.scm.dag().len()])?);
        }
        Ok(out)
    }
}
