//! The SMWSO, SMWSH and HEFT list schedulers.

use std::collections::BTreeMap;

use crate::cloud::{et, InstanceCatalog};
use crate::workflow::{detect_pipelines, WorkflowDag};

use super::analysis::{
    distribute_deadline, estimate_makespan, min_makespan, onvm, optimal_instance_type, rank_u,
};
use super::state::{Placement, SchedState};
use super::{ProvisionPlan, QosConstraints, Schedule, SchedulerOptions, SlackMode};

/// Homogeneous-fleet structure-based scheduler: one optimal instance type,
/// at most the optimal number of VMs, with entry-task duplication and
/// pipeline merge-and-slack.
pub fn schedule_smwso(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    qos: &QosConstraints,
    options: SchedulerOptions,
) -> Schedule {
    let ranking = rank_u(dag, catalog);
    let profile = dag.width_profile();
    let vm_cap = onvm(&profile);
    let opt = optimal_instance_type(dag, catalog, qos, vm_cap);
    let plan = ProvisionPlan {
        opt_vm_count: vm_cap,
        opt_instance_ix: opt,
        estimated_makespan_s: estimate_makespan(dag, catalog, opt, vm_cap),
    };
    let below = qos.deadline_s < min_makespan(dag, catalog) - 1e-9;
    let groups = detect_pipelines(dag);
    let head_of: BTreeMap<usize, (usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| {
            group
                .pipelines
                .iter()
                .filter_map(move |p| group.subgroup_of_head(p.head).map(|sg| (p.head, (g, sg))))
        })
        .collect();

    let mut state = SchedState::new(dag, catalog, plan, options);
    for &task in &ranking.order {
        if state.is_premapped(task) {
            continue;
        }
        if state.pinned_vm(task).is_some() {
            let entry = dag.parents(task).next().expect("pinned child has a parent");
            let no_dup = smwso_choice(&state, task, false);
            let best = smwso_choice(&state, task, true);
            state.place_pinned(task, entry, no_dup, best);
        } else {
            let placement = smwso_choice(&state, task, true);
            state.commit(task, placement);
        }
        if dag.in_degree(task) == 0 {
            let opt_ix = state.plan.opt_instance_ix;
            state.duplicate_entry(
                task,
                &ranking.rank,
                profile.level_width(2),
                profile.level_width(1),
                move |s, entry, bound| {
                    let weight = s.dag.task(entry).weight_mi;
                    (et(weight, s.catalog.get(opt_ix)) < bound).then_some(opt_ix)
                },
            );
        }
        if options.slack_mode != SlackMode::Off && !state.is_premapped(task) {
            if let Some(&(g, sg)) = head_of.get(&task) {
                state.merge_and_slack(&groups[g], sg, task);
            }
        }
    }
    state.finalize("smwso", below)
}

/// Earliest-finish placement over the provisioned fleet, with a fresh VM of
/// the optimal type as a rival candidate while the cap allows it.
fn smwso_choice(state: &SchedState, task: usize, use_dups: bool) -> Placement {
    let best = state.best_existing(task, None, use_dups);
    let under_cap = state.base_vm_count() < state.plan.opt_vm_count;
    let opt = state.plan.opt_instance_ix;
    match best {
        None => state.probe_fresh(task, opt, use_dups),
        Some(existing) => {
            if under_cap {
                let fresh = state.probe_fresh(task, opt, use_dups);
                if fresh.eft < existing.eft {
                    return fresh;
                }
            }
            existing
        }
    }
}

/// Heterogeneous variant: starts from one VM of the optimal type, selects
/// VMs against per-task sub-deadlines, and provisions the cheapest type
/// that still meets them.
pub fn schedule_smwsh(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    qos: &QosConstraints,
    options: SchedulerOptions,
) -> Schedule {
    let ranking = rank_u(dag, catalog);
    let profile = dag.width_profile();
    let vm_cap = onvm(&profile);
    let opt = optimal_instance_type(dag, catalog, qos, vm_cap);
    let plan = ProvisionPlan {
        opt_vm_count: vm_cap,
        opt_instance_ix: opt,
        estimated_makespan_s: estimate_makespan(dag, catalog, opt, vm_cap),
    };
    let sub = distribute_deadline(dag, catalog, opt, qos);
    let groups = detect_pipelines(dag);
    let head_of: BTreeMap<usize, (usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| {
            group
                .pipelines
                .iter()
                .filter_map(move |p| group.subgroup_of_head(p.head).map(|sg| (p.head, (g, sg))))
        })
        .collect();

    let mut state = SchedState::new(dag, catalog, plan, options);
    state.provision(opt, 0.0, true);
    for &task in &ranking.order {
        if state.is_premapped(task) {
            continue;
        }
        let deadline = sub.per_task[task];
        if state.pinned_vm(task).is_some() {
            let entry = dag.parents(task).next().expect("pinned child has a parent");
            let no_dup = smwsh_choice(&state, task, deadline, false);
            let best = smwsh_choice(&state, task, deadline, true);
            state.place_pinned(task, entry, no_dup, best);
        } else {
            let placement = smwsh_choice(&state, task, deadline, true);
            state.commit(task, placement);
        }
        if dag.in_degree(task) == 0 {
            state.duplicate_entry(
                task,
                &ranking.rank,
                profile.level_width(2),
                profile.level_width(1),
                |s, entry, bound| {
                    // Slowest type that still beats shipping the data.
                    let weight = s.dag.task(entry).weight_mi;
                    (0..s.catalog.len()).find(|&k| et(weight, s.catalog.get(k)) < bound)
                },
            );
        }
        if options.slack_mode != SlackMode::Off && !state.is_premapped(task) {
            if let Some(&(g, sg)) = head_of.get(&task) {
                state.merge_and_slack(&groups[g], sg, task);
            }
        }
    }
    state.finalize("smwsh", sub.below_lower_bound)
}

/// SMWSH placement: earliest finish under the sub-deadline when possible,
/// otherwise earliest finish outright; fresh VMs take the slowest type that
/// still meets the sub-deadline, falling back to the fastest.
fn smwsh_choice(state: &SchedState, task: usize, sub_deadline: f64, use_dups: bool) -> Placement {
    let within = state.best_existing(task, Some(sub_deadline), use_dups);
    let any = state.best_existing(task, None, use_dups);
    let under_cap = state.base_vm_count() < state.plan.opt_vm_count;
    let fresh = under_cap.then(|| {
        let ready = state.ready_fresh(task, use_dups);
        let weight = state.dag.task(task).weight_mi;
        let fits = |k: usize| {
            ready + state.catalog.provisioning_delay_s + et(weight, state.catalog.get(k))
                <= sub_deadline + 1e-9
        };
        let type_ix = (0..state.catalog.len())
            .find(|&k| fits(k))
            .unwrap_or_else(|| state.catalog.fastest());
        state.probe_fresh(task, type_ix, use_dups)
    });
    match (within, fresh) {
        (Some(existing), Some(f)) => {
            if f.eft <= sub_deadline + 1e-9 && f.eft < existing.eft {
                f
            } else {
                existing
            }
        }
        (Some(existing), None) => existing,
        (None, Some(f)) => {
            let fallback = any.expect("smwsh always has the initial vm");
            if f.eft <= sub_deadline + 1e-9 || f.eft < fallback.eft {
                f
            } else {
                fallback
            }
        }
        (None, None) => any.expect("smwsh always has the initial vm"),
    }
}

/// Pool specification for the HEFT baseline.
#[derive(Debug, Clone, Default)]
pub enum HeftPool {
    /// One pre-provisioned VM of every catalog type.
    #[default]
    OnePerType,
    /// Explicit list of instance type indices, one VM each.
    Custom(Vec<usize>),
}

/// Classic insertion-based earliest-finish-time list scheduling over a
/// fixed, pre-provisioned VM pool.
pub fn schedule_heft(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    _qos: &QosConstraints,
    pool: &HeftPool,
) -> Schedule {
    let ranking = rank_u(dag, catalog);
    let type_ixs: Vec<usize> = match pool {
        HeftPool::OnePerType => (0..catalog.len()).collect(),
        HeftPool::Custom(ixs) => ixs.clone(),
    };
    assert!(!type_ixs.is_empty(), "heft needs a non-empty pool");
    let plan = ProvisionPlan {
        opt_vm_count: type_ixs.len(),
        opt_instance_ix: catalog.fastest(),
        estimated_makespan_s: estimate_makespan(dag, catalog, catalog.fastest(), type_ixs.len()),
    };
    let mut state = SchedState::new(dag, catalog, plan, SchedulerOptions::default());
    for &ty in &type_ixs {
        state.add_pool_vm(ty);
    }
    for &task in &ranking.order {
        let placement = state
            .best_existing(task, None, true)
            .expect("pool is non-empty");
        state.commit(task, placement);
    }
    state.finalize("heft", false)
}
