//! Individual-level discrimination audits for black-box binary classifiers.
//!
//! Given a policy DAG naming the protected attribute and the outcome, the
//! audit compares a naive flip test against an unbiased situation test that
//! marginalizes the outcome's descendants (colliders among them) out of the
//! classifier's prediction.

pub mod classifiers;
pub mod dataset;
pub mod demo;
pub mod evaluation;
pub mod graph;
pub mod scm;

pub use classifiers::{flip_protected, ClassifierModel, LogisticParams, LookupTable, ModelError, ModelKind, TrainSpec};
pub use dataset::{
    fit_distribution, load_csv, Attribute, AttributeKind, DataError, Dataset, EmpiricalJointDistribution, Record, Schema,
};
pub use evaluation::{compare, rmse, Comparison, EvaluationResult};
pub use graph::{partition_nodes, validate_for_audit, AuditRoles, Dag, GraphError, NodePartition, ValidationReport};
pub use scm::{generate_synthetic, DiscreteScm, SyntheticConfig};
pub use situation_test::{
    audit, marginalized_proba, nds_score, uds_score, AuditConfig, AuditError, DiscriminationReport, ScoredIndividual,
};
