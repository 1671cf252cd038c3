//! Structure-based multi-objective workflow scheduling on a modeled IaaS
//! cloud: DAG analysis, VM provisioning plans, the SMWSO / SMWSH / HEFT
//! schedulers, an analytic execution simulator and the statistics used to
//! compare algorithm runs.

pub mod cloud;
pub mod ingest;
pub mod sched;
pub mod sim;
pub mod stats;
pub mod workflow;

pub use cloud::{InstanceCatalog, InstanceType, VmInstance};
pub use sched::{QosConstraints, Schedule};
pub use sim::ExecutionTrace;
pub use workflow::{Task, WidthProfile, WorkflowDag};
