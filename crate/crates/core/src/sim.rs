//! Replays a schedule against the cloud model from first principles. The
//! trace it produces — not the scheduler's bookkeeping — is the source of
//! truth for makespan, cost and energy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{tt, InstanceCatalog, VmInstance};
use crate::sched::{QosConstraints, Schedule};
use crate::workflow::WorkflowDag;

/// Tolerance for the scheduler-vs-replay consistency check.
const DIVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("schedule leaves task `{0}` unassigned")]
    Unassigned(String),
    #[error("replay diverges from the schedule at task `{task}`: scheduler {claimed}, replay {replayed}")]
    Divergence {
        task: String,
        claimed: f64,
        replayed: f64,
    },
}

/// One executed task occurrence (originals and duplicates alike).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub task: String,
    pub vm: usize,
    #[serde(rename = "type")]
    pub type_name: String,
    pub ast: f64,
    pub aft: f64,
    pub utilization: f64,
    pub duplicate: bool,
}

/// Per-VM lease summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmRow {
    pub vm: usize,
    #[serde(rename = "type")]
    pub type_name: String,
    pub lease_start: f64,
    pub lease_end: f64,
    pub billed_periods: u64,
    pub energy_kwh: f64,
    /// Idle seconds inside the lease attributable to awaited transfers.
    pub tits_s: f64,
}

/// The authoritative execution record of one scheduled run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub makespan_s: f64,
    pub total_cost: f64,
    pub total_energy_kwh: f64,
    pub tasks: Vec<TaskRow>,
    pub vms: Vec<VmRow>,
}

impl ExecutionTrace {
    pub fn tits_total_s(&self) -> f64 {
        self.vms.iter().map(|v| v.tits_s).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

struct Exec {
    task: usize,
    vm: usize,
    utilization: f64,
    duplicate: bool,
    claimed_ast: f64,
    ast: f64,
    aft: f64,
}

/// Recomputes every start and finish from data-ready times, VM availability
/// and the DVFS-stretched durations, then derives makespan, billing, energy
/// and the transfer-induced idle slots. Any drift beyond `1e-6` s from the
/// scheduler's claimed times is reported as an error.
pub fn simulate(
    schedule: &Schedule,
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
) -> Result<ExecutionTrace, SimError> {
    let mut execs: Vec<Exec> = Vec::new();
    for (task, a) in schedule.assignments.iter().enumerate() {
        let a = a
            .as_ref()
            .ok_or_else(|| SimError::Unassigned(dag.task(task).id.clone()))?;
        execs.push(Exec {
            task,
            vm: a.vm,
            utilization: a.utilization,
            duplicate: false,
            claimed_ast: a.ast,
            ast: 0.0,
            aft: 0.0,
        });
    }
    for d in &schedule.duplicates {
        execs.push(Exec {
            task: d.task,
            vm: d.vm,
            utilization: 1.0,
            duplicate: true,
            claimed_ast: d.ast,
            ast: 0.0,
            aft: 0.0,
        });
    }
    // Claimed starts order the replay; precedence makes parents strictly
    // earlier than their children, so this is a valid processing order.
    execs.sort_by(|a, b| {
        a.claimed_ast
            .total_cmp(&b.claimed_ast)
            .then(a.task.cmp(&b.task))
            .then(a.duplicate.cmp(&b.duplicate))
    });

    let n = dag.task_count();
    // Finish time of the original execution and of duplicates, per task.
    let mut orig_aft: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut dup_afts: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut vm_front: Vec<f64> = schedule.vms.iter().map(|v| v.available_from_s).collect();
    let mut vm_tits: Vec<f64> = vec![0.0; schedule.vms.len()];
    let mut vm_busy_started: Vec<bool> = vec![false; schedule.vms.len()];

    for e in execs.iter_mut() {
        let (mut ready_tt, mut ready_raw) = (0.0f64, 0.0f64);
        if !e.duplicate {
            for edge in dag.in_edges(e.task) {
                let (pvm, paft) = orig_aft[edge.from].expect("parent replayed first");
                let mut arrival = paft + tt(edge.data_mb, pvm == e.vm, catalog.bandwidth_mbps);
                let mut raw = paft;
                for &(dvm, daft) in &dup_afts[edge.from] {
                    arrival =
                        arrival.min(daft + tt(edge.data_mb, dvm == e.vm, catalog.bandwidth_mbps));
                    raw = raw.min(daft);
                }
                ready_tt = ready_tt.max(arrival);
                ready_raw = ready_raw.max(raw);
            }
        }
        let front = vm_front[e.vm];
        e.ast = ready_tt.max(front);
        let weight = dag.task(e.task).weight_mi;
        let duration =
            crate::cloud::et(weight, catalog.get(schedule.vms[e.vm].type_ix)) / e.utilization;
        e.aft = e.ast + duration;
        // A gap is charged to transfers only for the stretch past the point
        // where the raw inputs were already computed.
        if vm_busy_started[e.vm] && e.ast > front {
            vm_tits[e.vm] += (e.ast - front.max(ready_raw)).max(0.0);
        }
        vm_busy_started[e.vm] = true;
        vm_front[e.vm] = e.aft;
        if e.duplicate {
            dup_afts[e.task].push((e.vm, e.aft));
        } else {
            orig_aft[e.task] = Some((e.vm, e.aft));
        }
        if (e.ast - e.claimed_ast).abs() > DIVERGENCE_TOL {
            return Err(SimError::Divergence {
                task: dag.task(e.task).id.clone(),
                claimed: e.claimed_ast,
                replayed: e.ast,
            });
        }
    }

    let makespan_s = dag
        .exits()
        .map(|ix| orig_aft[ix].expect("all tasks replayed").1)
        .fold(0.0, f64::max);

    // Rebuild the leases from the replayed times.
    let mut vms_out: Vec<VmRow> = Vec::new();
    let mut total_cost = 0.0;
    let mut total_energy = 0.0;
    for vm in &schedule.vms {
        let mut segs: Vec<(f64, f64, f64)> = execs
            .iter()
            .filter(|e| e.vm == vm.id)
            .map(|e| (e.ast, e.aft, e.utilization))
            .collect();
        segs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // The divergence check already pinned replayed times to the claimed
        // ones, so the scheduler's lease opening stands; the lease closes
        // right after the VM's final work.
        let lease_start = vm.lease_start_s;
        let lease_end = segs.last().map_or(lease_start, |s| s.1);
        let replayed = VmInstance {
            id: vm.id,
            type_ix: vm.type_ix,
            lease_start_s: lease_start,
            available_from_s: vm.available_from_s,
            lease_end_s: lease_end,
            segments: segs
                .iter()
                .map(|&(s, e, u)| crate::cloud::UtilizationSegment {
                    start_s: s,
                    end_s: e,
                    utilization: u,
                })
                .collect(),
        };
        let cost = replayed.billing(catalog);
        let energy = replayed.energy_kwh(catalog);
        total_cost += cost;
        total_energy += energy;
        vms_out.push(VmRow {
            vm: vm.id,
            type_name: catalog.get(vm.type_ix).name.clone(),
            lease_start,
            lease_end,
            billed_periods: crate::cloud::billed_periods(
                lease_end - lease_start,
                catalog.billing_period_s,
            ),
            energy_kwh: energy,
            tits_s: vm_tits[vm.id],
        });
    }

    let tasks = execs
        .iter()
        .map(|e| TaskRow {
            task: dag.task(e.task).id.clone(),
            vm: e.vm,
            type_name: catalog.get(schedule.vms[e.vm].type_ix).name.clone(),
            ast: e.ast,
            aft: e.aft,
            utilization: e.utilization,
            duplicate: e.duplicate,
        })
        .collect();

    Ok(ExecutionTrace {
        makespan_s,
        total_cost,
        total_energy_kwh: total_energy,
        tasks,
        vms: vms_out,
    })
}

/// Whether the run landed inside the budget and the deadline (inclusive).
pub fn check_feasibility(trace: &ExecutionTrace, qos: &QosConstraints) -> (bool, bool) {
    (
        trace.total_cost <= qos.budget,
        trace.makespan_s <= qos.deadline_s,
    )
}
