//! Workflow ingestion: the native JSON format, a Pegasus DAX XML subset,
//! and seeded synthetic generators shaped like five well-known scientific
//! workflow families.

mod dax;
mod generate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::workflow::{EdgeSpec, Task, WorkflowDag};

pub use dax::parse_dax;
pub use generate::generate;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("xml error at byte {position}: {reason}")]
    Xml { position: u64, reason: String },
    #[error("duplicate job id `{0}`")]
    DuplicateJob(String),
    #[error("dependency references unknown job `{0}`")]
    UnknownJob(String),
    #[error("job `{id}` has non-positive runtime {runtime}")]
    NonPositiveRuntime { id: String, runtime: f64 },
    #[error("invalid json workflow: {0}")]
    Json(#[from] serde_json::Error),
    #[error("workflow is invalid: {0}")]
    InvalidWorkflow(String),
    #[error("generator spec invalid: {0}")]
    InvalidSpec(String),
}

/// Serialized form of the native JSON workflow format.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonWorkflow {
    tasks: Vec<Task>,
    edges: Vec<EdgeSpec>,
}

/// Parses the native `{tasks: [{id, weight_mi}], edges: [{from, to,
/// data_mb}]}` format and validates the result.
pub fn parse_json(text: &str) -> Result<WorkflowDag, IngestError> {
    let raw: JsonWorkflow = serde_json::from_str(text)?;
    let dag = WorkflowDag::new(raw.tasks, raw.edges);
    let violations = dag.validate();
    if violations.is_empty() {
        Ok(dag)
    } else {
        Err(IngestError::InvalidWorkflow(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

/// Serializes a DAG to the native JSON format. Tasks come out in id order
/// and edges in (from, to) order, so equal DAGs yield identical bytes.
pub fn to_json(dag: &WorkflowDag) -> String {
    let doc = JsonWorkflow {
        tasks: dag.tasks().to_vec(),
        edges: dag
            .edges()
            .iter()
            .map(|e| EdgeSpec {
                from: dag.task(e.from).id.clone(),
                to: dag.task(e.to).id.clone(),
                data_mb: e.data_mb,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("workflow serializes")
}

/// The five generator shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    MontageLike,
    CybershakeLike,
    EpigenomicsLike,
    SiphtLike,
    LigoLike,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::MontageLike,
        Family::CybershakeLike,
        Family::EpigenomicsLike,
        Family::SiphtLike,
        Family::LigoLike,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::MontageLike => "montage-like",
            Family::CybershakeLike => "cybershake-like",
            Family::EpigenomicsLike => "epigenomics-like",
            Family::SiphtLike => "sipht-like",
            Family::LigoLike => "ligo-like",
        }
    }

    /// Smallest task count the family shape supports.
    pub fn min_tasks(&self) -> usize {
        match self {
            Family::MontageLike => 9,
            Family::CybershakeLike => 7,
            Family::EpigenomicsLike => 8,
            Family::SiphtLike => 8,
            Family::LigoLike => 6,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Fully deterministic description of a synthetic workflow instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub task_count: usize,
    pub seed: u64,
    /// Task weights, log-uniform (decade-stratified) over [lo, hi).
    pub weight_range_mi: (f64, f64),
    /// Edge data sizes, log-uniform (decade-stratified) over [lo, hi).
    pub data_range_mb: (f64, f64),
}

impl GeneratorSpec {
    pub fn new(family: Family, task_count: usize, seed: u64) -> Self {
        Self {
            family,
            task_count,
            seed,
            weight_range_mi: (1e4, 1e6),
            data_range_mb: (1.0, 1e3),
        }
    }
}
