//! Pre-scheduling analyses: idealized start/finish times, the optimal VM
//! count and instance type, sub-deadline distribution, task prioritization
//! and the fastest-schedule / lowest-budget baselines.

use serde::{Deserialize, Serialize};

use crate::cloud::{ec, et, tt, InstanceCatalog};
use crate::workflow::{critical_path, WidthProfile, WorkflowDag};

use super::QosConstraints;

/// Earliest start/finish per task when every task runs on `type_ix` and all
/// transfers cross VM boundaries.
pub fn est_eft_on(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    type_ix: usize,
) -> (Vec<f64>, Vec<f64>) {
    let order = dag.topo_order().expect("est/eft require an acyclic dag");
    let instance = catalog.get(type_ix);
    let n = dag.task_count();
    let mut est = vec![0.0f64; n];
    let mut eft = vec![0.0f64; n];
    for &ix in &order {
        let mut start = 0.0f64;
        for e in dag.in_edges(ix) {
            start = start.max(eft[e.from] + tt(e.data_mb, false, catalog.bandwidth_mbps));
        }
        est[ix] = start;
        eft[ix] = start + et(dag.task(ix).weight_mi, instance);
    }
    (est, eft)
}

/// EST/EFT on the fastest type; the maximum exit EFT is the minimum
/// possible makespan.
pub fn est_eft(dag: &WorkflowDag, catalog: &InstanceCatalog) -> (Vec<f64>, Vec<f64>) {
    est_eft_on(dag, catalog, catalog.fastest())
}

/// Minimum possible makespan: largest exit-task EFT on the fastest type.
pub fn min_makespan(dag: &WorkflowDag, catalog: &InstanceCatalog) -> f64 {
    let (_, eft) = est_eft(dag, catalog);
    dag.exits().map(|ix| eft[ix]).fold(0.0, f64::max)
}

/// Optimal number of VMs from the width profile.
pub fn onvm(profile: &WidthProfile) -> usize {
    let raw = if profile.avg_width <= profile.stddev_width {
        profile.avg_width
    } else {
        (profile.avg_width + profile.stddev_width).min(profile.max_width as f64)
    };
    (raw.round() as usize).max(1)
}

/// Estimated makespan when running the whole workflow on `opt_vm_count` VMs
/// of one type: total work plus each task's worst outgoing transfer, spread
/// over the fleet.
pub fn estimate_makespan(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    type_ix: usize,
    opt_vm_count: usize,
) -> f64 {
    assert!(opt_vm_count >= 1);
    let instance = catalog.get(type_ix);
    let total: f64 = (0..dag.task_count())
        .map(|ix| {
            let worst_tt = dag
                .out_edges(ix)
                .map(|e| tt(e.data_mb, false, catalog.bandwidth_mbps))
                .fold(0.0, f64::max);
            et(dag.task(ix).weight_mi, instance) + worst_tt
        })
        .sum();
    total / opt_vm_count as f64
}

/// The fastest instance type whose estimated makespan meets the deadline
/// and whose per-VM cost share fits the budget slice. When nothing
/// qualifies, deadline wins over budget: the fastest type within the budget
/// slice, and failing that the cheapest type.
pub fn optimal_instance_type(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    qos: &QosConstraints,
    opt_vm_count: usize,
) -> usize {
    let slice = qos.budget / opt_vm_count as f64;
    let mut best_budget_only = None;
    for k in (0..catalog.len()).rev() {
        let est = estimate_makespan(dag, catalog, k, opt_vm_count);
        let cost = ec(est, catalog.get(k), catalog.billing_period_s);
        let in_budget = cost <= slice;
        if in_budget && best_budget_only.is_none() {
            best_budget_only = Some(k);
        }
        if est <= qos.deadline_s && in_budget {
            return k;
        }
    }
    best_budget_only.unwrap_or_else(|| catalog.cheapest())
}

/// Per-task sub-deadlines for the heterogeneous scheduler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubDeadlines {
    /// Final sub-deadline per task.
    pub per_task: Vec<f64>,
    /// The proportionally scaled finish times before spare distribution.
    pub scaled: Vec<f64>,
    /// Spare seconds granted to each task.
    pub spare_per_task: Vec<f64>,
    /// Makespan of the all-on-optimal-type relaxation.
    pub opt_makespan_s: f64,
    /// True when the deadline sits below the fastest-type lower bound;
    /// scheduling proceeds but a time-ratio above one is expected.
    pub below_lower_bound: bool,
}

/// Scales each task's optimal-type finish time so the latest exit lands
/// exactly on the deadline, then spreads any spare time over the tasks in
/// proportion to their weight against the critical path.
pub fn distribute_deadline(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    opt_type_ix: usize,
    qos: &QosConstraints,
) -> SubDeadlines {
    let n = dag.task_count();
    let (_, eft_opt) = est_eft_on(dag, catalog, opt_type_ix);
    let m_opt = dag.exits().map(|ix| eft_opt[ix]).fold(0.0, f64::max);
    let below = qos.deadline_s < min_makespan(dag, catalog) - 1e-9;
    if !qos.deadline_s.is_finite() {
        return SubDeadlines {
            per_task: vec![f64::INFINITY; n],
            scaled: vec![f64::INFINITY; n],
            spare_per_task: vec![0.0; n],
            opt_makespan_s: m_opt,
            below_lower_bound: false,
        };
    }
    let scaled: Vec<f64> = eft_opt
        .iter()
        .map(|&v| v * qos.deadline_s / m_opt)
        .collect();
    let max_scaled = scaled.iter().copied().fold(0.0, f64::max);
    let spare = (qos.deadline_s - max_scaled).max(0.0);
    let cp = critical_path(dag, catalog);
    let cp_weight: f64 = cp.iter().map(|&ix| dag.task(ix).weight_mi).sum();
    let spare_per_task: Vec<f64> = (0..n)
        .map(|ix| spare * dag.task(ix).weight_mi / cp_weight)
        .collect();
    let per_task = scaled
        .iter()
        .zip(&spare_per_task)
        .map(|(&s, &x)| s + x)
        .collect();
    SubDeadlines {
        per_task,
        scaled,
        spare_per_task,
        opt_makespan_s: m_opt,
        below_lower_bound: below,
    }
}

/// Per-task ingredients of the upward rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankInputs {
    /// Population standard deviation of the execution time across the
    /// catalog types.
    pub sigma: Vec<f64>,
    pub outdegree: Vec<usize>,
    /// Mean outgoing transfer time; zero for exit tasks.
    pub avg_occw: Vec<f64>,
}

/// Upward ranks plus the descending priority order they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub inputs: RankInputs,
    pub rank: Vec<f64>,
    /// Task indices sorted by decreasing rank, ties toward the smaller id.
    pub order: Vec<usize>,
}

/// Upward rank: execution-time spread plus out-degree plus mean outgoing
/// transfer time, accumulated along the heaviest downstream chain. Parents
/// always outrank their children, so the order is topological.
pub fn rank_u(dag: &WorkflowDag, catalog: &InstanceCatalog) -> Ranking {
    let n = dag.task_count();
    let k = catalog.len() as f64;
    let mut sigma = vec![0.0f64; n];
    let mut outdegree = vec![0usize; n];
    let mut avg_occw = vec![0.0f64; n];
    for ix in 0..n {
        let ets: Vec<f64> = catalog
            .types()
            .iter()
            .map(|t| et(dag.task(ix).weight_mi, t))
            .collect();
        let mean = ets.iter().sum::<f64>() / k;
        sigma[ix] = (ets.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / k).sqrt();
        outdegree[ix] = dag.out_degree(ix);
        if outdegree[ix] > 0 {
            let occw: f64 = dag
                .out_edges(ix)
                .map(|e| tt(e.data_mb, false, catalog.bandwidth_mbps))
                .sum();
            avg_occw[ix] = occw / outdegree[ix] as f64;
        }
    }
    let order_topo = dag.topo_order().expect("rank requires an acyclic dag");
    let mut rank = vec![0.0f64; n];
    for &ix in order_topo.iter().rev() {
        let down = dag.children(ix).map(|c| rank[c]).fold(0.0, f64::max);
        rank[ix] = sigma[ix] + outdegree[ix] as f64 + avg_occw[ix] + down;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rank[b].total_cmp(&rank[a]).then(a.cmp(&b)));
    Ranking {
        inputs: RankInputs {
            sigma,
            outdegree,
            avg_occw,
        },
        rank,
        order,
    }
}

/// Fastest-schedule and lowest-budget baselines: critical-path time on the
/// fastest type, and the cost of running every task on the cheapest one.
pub fn fs_lb(dag: &WorkflowDag, catalog: &InstanceCatalog) -> (f64, f64) {
    let fastest = catalog.get(catalog.fastest());
    let fs: f64 = critical_path(dag, catalog)
        .iter()
        .map(|&ix| et(dag.task(ix).weight_mi, fastest))
        .sum();
    let cheapest = catalog.get(catalog.cheapest());
    let lb: f64 = (0..dag.task_count())
        .map(|ix| {
            ec(
                et(dag.task(ix).weight_mi, cheapest),
                cheapest,
                catalog.billing_period_s,
            )
        })
        .sum();
    (fs, lb)
}
