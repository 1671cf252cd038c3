//! Scheduling: provisioning plans, task prioritization and the SMWSO,
//! SMWSH and HEFT list schedulers.

mod algorithms;
mod analysis;
mod state;

use serde::{Deserialize, Serialize};

use crate::cloud::VmInstance;

pub use algorithms::{schedule_heft, schedule_smwsh, schedule_smwso, HeftPool};
pub use analysis::{
    distribute_deadline, est_eft, est_eft_on, estimate_makespan, fs_lb, onvm,
    optimal_instance_type, rank_u, RankInputs, Ranking, SubDeadlines,
};

/// User-defined QoS constraints. Infinite values disable a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosConstraints {
    pub deadline_s: f64,
    pub budget: f64,
}

impl QosConstraints {
    pub fn new(deadline_s: f64, budget: f64) -> Self {
        assert!(deadline_s > 0.0, "deadline must be positive");
        assert!(budget > 0.0, "budget must be positive");
        Self { deadline_s, budget }
    }

    pub fn unconstrained() -> Self {
        Self {
            deadline_s: f64::INFINITY,
            budget: f64::INFINITY,
        }
    }
}

/// The up-front provisioning decision both schedulers share: how many VMs
/// and which single instance type fits the width profile and the QoS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvisionPlan {
    pub opt_vm_count: usize,
    pub opt_instance_ix: usize,
    pub estimated_makespan_s: f64,
}

/// How pipeline slack reclamation scales CPU utilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SlackMode {
    /// Stretch a subgroup to finish exactly with the longest pipeline:
    /// u = sum / longest.
    #[default]
    Normalized,
    /// u = longest / (longest + slack): reclaims only part of the slack,
    /// so a stretched subgroup still finishes ahead of the longest
    /// pipeline.
    Partial,
    /// Disable pipeline merging and slacking entirely.
    Off,
}

/// Scheduler knobs; the defaults reproduce the reference behavior.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SchedulerOptions {
    pub slack_mode: SlackMode,
    /// Disable the entry-task duplication phase.
    pub no_duplication: bool,
}

/// Final placement of one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub vm: usize,
    pub ast: f64,
    pub aft: f64,
    pub utilization: f64,
}

/// An extra execution of an entry task placed on another VM so its children
/// can read the data locally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuplicateExec {
    pub task: usize,
    pub vm: usize,
    pub ast: f64,
    pub aft: f64,
}

/// Audit record of one pipeline subgroup that was merged and slacked.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackRecord {
    pub head: usize,
    pub vm: usize,
    pub utilization: f64,
    pub tasks: Vec<usize>,
    /// First start and last finish of the merged subgroup on its VM.
    pub span: (f64, f64),
    /// Total busy seconds of the subgroup after stretching.
    pub busy_s: f64,
    /// Length of the group's longest pipeline in seconds on this VM.
    pub longest_len_s: f64,
}

/// Audit record of one duplication-pinned child placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuplicationRecord {
    pub entry: usize,
    pub child: usize,
    pub pinned_vm: usize,
    /// Start the child would get through the pin.
    pub pinned_ast: f64,
    /// Best start selection would have produced had duplication never run.
    pub free_ast: f64,
    /// Start actually committed at this decision point (later phases may
    /// re-time the task, pipeline slacking in particular).
    pub committed_ast: f64,
    pub kept_pin: bool,
}

/// A complete schedule: placements, the VM fleet with its busy timelines,
/// duplication and slacking audit trails.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub algorithm: String,
    pub plan: ProvisionPlan,
    pub assignments: Vec<Option<Assignment>>,
    pub vms: Vec<VmInstance>,
    pub duplicates: Vec<DuplicateExec>,
    /// VMs provisioned by the regular selection path (capped by the plan).
    pub base_vm_count: usize,
    /// VMs provisioned by entry-task duplication, tallied separately.
    pub duplication_vm_count: usize,
    pub slack_records: Vec<SlackRecord>,
    pub duplication_records: Vec<DuplicationRecord>,
    /// Set when the deadline sits below the analytic lower bound.
    pub deadline_below_bound: bool,
}

impl Schedule {
    pub fn assignment(&self, task: usize) -> &Assignment {
        self.assignments[task]
            .as_ref()
            .expect("every task is assigned in a complete schedule")
    }

    pub fn makespan_claimed_s(&self) -> f64 {
        self.assignments
            .iter()
            .flatten()
            .map(|a| a.aft)
            .fold(0.0, f64::max)
    }

    /// Checks precedence (transfer-aware, duplicate-aware) and per-VM
    /// non-overlap; returns human-readable violations.
    pub fn verify(
        &self,
        dag: &crate::workflow::WorkflowDag,
        catalog: &crate::cloud::InstanceCatalog,
    ) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        for e in dag.edges() {
            let (Some(p), Some(c)) = (&self.assignments[e.from], &self.assignments[e.to]) else {
                errs.push(format!(
                    "edge endpoint unassigned on {}",
                    dag.task(e.from).id
                ));
                continue;
            };
            let mut arrival =
                p.aft + crate::cloud::tt(e.data_mb, p.vm == c.vm, catalog.bandwidth_mbps);
            for d in self.duplicates.iter().filter(|d| d.task == e.from) {
                let a = d.aft + crate::cloud::tt(e.data_mb, d.vm == c.vm, catalog.bandwidth_mbps);
                arrival = arrival.min(a);
            }
            if c.ast < arrival - 1e-6 {
                errs.push(format!(
                    "precedence violated on {} -> {}: ast {} < arrival {}",
                    dag.task(e.from).id,
                    dag.task(e.to).id,
                    c.ast,
                    arrival
                ));
            }
        }
        for vm in &self.vms {
            for w in vm.segments.windows(2) {
                if w[1].start_s < w[0].end_s - 1e-6 {
                    errs.push(format!(
                        "vm {} has overlapping segments at {}",
                        vm.id, w[1].start_s
                    ));
                }
            }
            if let Some(first) = vm.segments.first() {
                if first.start_s < vm.available_from_s - 1e-6 {
                    errs.push(format!("vm {} runs work before it is available", vm.id));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}
