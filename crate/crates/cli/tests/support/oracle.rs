//! Independent brute-force oracles for the acceptance suite. These
//! deliberately re-derive times with different machinery than the
//! simulator: a Bellman-style relaxation over executions instead of a
//! single chronological pass, and explicit path enumeration instead of
//! topological recursions.

use smws_core::cloud::{et, tt, InstanceCatalog};
use smws_core::sched::Schedule;
use smws_core::workflow::WorkflowDag;

#[derive(Clone, Copy)]
struct ExecRef {
    task: usize,
    vm: usize,
    utilization: f64,
    duplicate: bool,
    decided_ast: f64,
}

/// Rebuilds every start/finish by relaxing the constraint system to its
/// least fixed point, then re-derives makespan and billed cost.
pub fn replay_schedule(
    dag: &WorkflowDag,
    catalog: &InstanceCatalog,
    schedule: &Schedule,
) -> (f64, f64) {
    let mut execs: Vec<ExecRef> = Vec::new();
    for (task, a) in schedule.assignments.iter().enumerate() {
        let a = a.as_ref().expect("complete schedule");
        execs.push(ExecRef {
            task,
            vm: a.vm,
            utilization: a.utilization,
            duplicate: false,
            decided_ast: a.ast,
        });
    }
    for d in &schedule.duplicates {
        execs.push(ExecRef {
            task: d.task,
            vm: d.vm,
            utilization: 1.0,
            duplicate: true,
            decided_ast: d.ast,
        });
    }
    // The scheduler's per-VM execution order is part of the schedule; only
    // the times are recomputed.
    let mut order_on_vm: Vec<Vec<usize>> = vec![Vec::new(); schedule.vms.len()];
    let mut by_vm: Vec<Vec<usize>> = vec![Vec::new(); schedule.vms.len()];
    for (ix, e) in execs.iter().enumerate() {
        by_vm[e.vm].push(ix);
    }
    for (vm, list) in by_vm.into_iter().enumerate() {
        let mut list = list;
        list.sort_by(|&a, &b| execs[a].decided_ast.total_cmp(&execs[b].decided_ast));
        order_on_vm[vm] = list;
    }

    let durations: Vec<f64> = execs
        .iter()
        .map(|e| {
            et(
                dag.task(e.task).weight_mi,
                catalog.get(schedule.vms[e.vm].type_ix),
            ) / e.utilization
        })
        .collect();

    let mut ast = vec![0.0f64; execs.len()];
    let mut originals = vec![usize::MAX; dag.task_count()];
    let mut copies: Vec<Vec<usize>> = vec![Vec::new(); dag.task_count()];
    for (ix, e) in execs.iter().enumerate() {
        if e.duplicate {
            copies[e.task].push(ix);
        } else {
            originals[e.task] = ix;
        }
    }

    // Relax until stable: every pass can only push starts later.
    loop {
        let mut changed = false;
        for vm_order in &order_on_vm {
            let mut prev_end = f64::NEG_INFINITY;
            for &eix in vm_order {
                let e = execs[eix];
                let mut lower = schedule.vms[e.vm].available_from_s;
                if prev_end > lower {
                    lower = prev_end;
                }
                if !e.duplicate {
                    for edge in dag.in_edges(e.task) {
                        let mut arrival = f64::INFINITY;
                        let o = originals[edge.from];
                        let candidates =
                            std::iter::once(o).chain(copies[edge.from].iter().copied());
                        for c in candidates {
                            let c_aft = ast[c] + durations[c];
                            let a = c_aft
                                + tt(edge.data_mb, execs[c].vm == e.vm, catalog.bandwidth_mbps);
                            if a < arrival {
                                arrival = a;
                            }
                        }
                        if arrival > lower {
                            lower = arrival;
                        }
                    }
                }
                if lower > ast[eix] {
                    ast[eix] = lower;
                    changed = true;
                }
                prev_end = ast[eix] + durations[eix];
            }
        }
        if !changed {
            break;
        }
    }

    let makespan = dag
        .exits()
        .map(|t| {
            let o = originals[t];
            ast[o] + durations[o]
        })
        .fold(0.0, f64::max);

    let mut cost = 0.0;
    for (vm_ix, vm_order) in order_on_vm.iter().enumerate() {
        let vm = &schedule.vms[vm_ix];
        let lease_end = vm_order
            .iter()
            .map(|&e| ast[e] + durations[e])
            .fold(vm.lease_start_s, f64::max);
        let runtime = (lease_end - vm.lease_start_s).max(0.0);
        let periods = if runtime <= 0.0 {
            0.0
        } else {
            (runtime / catalog.billing_period_s - 1e-9).ceil().max(1.0)
        };
        cost += periods * catalog.get(vm.type_ix).cost_per_period;
    }
    (makespan, cost)
}

/// Earliest start/finish per task on the fastest type by explicit
/// enumeration of every incoming path.
pub fn est_eft_by_paths(dag: &WorkflowDag, catalog: &InstanceCatalog) -> (Vec<f64>, Vec<f64>) {
    let fastest = catalog.get(catalog.fastest());
    let n = dag.task_count();
    let mut est = vec![0.0f64; n];
    // Walk every path from every entry, tracking the accumulated finish.
    let mut stack: Vec<(usize, f64)> = dag.entries().map(|e| (e, 0.0)).collect();
    while let Some((node, start)) = stack.pop() {
        if start > est[node] {
            est[node] = start;
        }
        let finish = start + et(dag.task(node).weight_mi, fastest);
        for edge in dag.out_edges(node) {
            let arrival = finish + tt(edge.data_mb, false, catalog.bandwidth_mbps);
            stack.push((edge.to, arrival));
        }
    }
    let eft = (0..n)
        .map(|ix| est[ix] + et(dag.task(ix).weight_mi, fastest))
        .collect();
    (est, eft)
}

/// All entry-to-exit paths.
pub fn all_paths(dag: &WorkflowDag) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for entry in dag.entries() {
        let mut stack = vec![vec![entry]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if dag.out_degree(last) == 0 {
                out.push(path);
                continue;
            }
            for c in dag.children(last) {
                let mut next = path.clone();
                next.push(c);
                stack.push(next);
            }
        }
    }
    out
}

/// Path weight under the critical-path metric, accumulated back to front
/// to mirror the production recursion bit for bit.
pub fn path_weight(dag: &WorkflowDag, catalog: &InstanceCatalog, path: &[usize]) -> f64 {
    let fastest = catalog.get(catalog.fastest());
    let mut acc = et(dag.task(*path.last().unwrap()).weight_mi, fastest);
    for w in path.windows(2).rev() {
        let data = dag.edge_data_mb(w[0], w[1]).expect("path follows edges");
        acc =
            et(dag.task(w[0]).weight_mi, fastest) + (tt(data, false, catalog.bandwidth_mbps) + acc);
    }
    acc
}

/// Best path by weight with near-ties broken toward the lexicographically
/// smaller index sequence, matching the production tie-break.
pub fn critical_path_by_enumeration(dag: &WorkflowDag, catalog: &InstanceCatalog) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for path in all_paths(dag) {
        let w = path_weight(dag, catalog, &path);
        let better = match &best {
            None => true,
            Some((bw, bp)) => w > bw + 1e-12 || (w >= bw - 1e-12 && path < *bp),
        };
        if better {
            best = Some((w, path));
        }
    }
    best.expect("valid dag has at least one path").1
}
