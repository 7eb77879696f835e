use std::fmt;

use collider_audit::evaluation::{CompareError, EvalError};
use collider_audit::scm::ScmError;
use collider_audit::{AuditError, DataError, GraphError, ModelError};

/// Failure classes map onto the process exit code: 1 for bad input, 2 for
/// failures while running.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(format!("DAG: {e}"))
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ScmError> for CliError {
    fn from(e: ScmError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn model_failed_at_runtime(e: &ModelError) -> bool {
    matches!(e, ModelError::External(_) | ModelError::CountMismatch { .. } | ModelError::OutOfRange(..))
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        if model_failed_at_runtime(&e) {
            CliError::Runtime(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        let runtime = match &e {
            AuditError::Record { source, .. } | AuditError::Model(source) => model_failed_at_runtime(source),
            _ => false,
        };
        if runtime {
            CliError::Runtime(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<CompareError> for CliError {
    fn from(e: CompareError) -> Self {
        match e {
            CompareError::Audit(a) => a.into(),
            CompareError::Eval(v) => v.into(),
        }
    }
}
