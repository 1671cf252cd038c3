#![allow(dead_code)] // each test target uses a different subset

//! Shared helpers for the integration suites: seeded random DAGs, small
//! catalogs and brute-force path enumeration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use smws_core::cloud::{et, tt, InstanceCatalog, InstanceType};
use smws_core::workflow::{EdgeSpec, Task, WorkflowDag};

pub fn dag(tasks: &[(&str, f64)], edges: &[(&str, &str, f64)]) -> WorkflowDag {
    WorkflowDag::new(
        tasks
            .iter()
            .map(|&(id, w)| Task {
                id: id.to_string(),
                weight_mi: w,
            })
            .collect(),
        edges
            .iter()
            .map(|&(f, t, d)| EdgeSpec {
                from: f.to_string(),
                to: t.to_string(),
                data_mb: d,
            })
            .collect(),
    )
}

/// Random DAG over an upper-triangular edge mask; always valid.
pub fn random_dag(rng: &mut ChaCha8Rng, max_tasks: usize) -> WorkflowDag {
    let n = rng.random_range(2..=max_tasks);
    let tasks: Vec<(String, f64)> = (0..n)
        .map(|i| (format!("t{i:02}"), rng.random_range(10.0..1000.0)))
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < 0.4 {
                let data = if rng.random::<f64>() < 0.3 {
                    0.0
                } else {
                    rng.random_range(1.0..200.0)
                };
                edges.push(EdgeSpec {
                    from: tasks[i].0.clone(),
                    to: tasks[j].0.clone(),
                    data_mb: data,
                });
            }
        }
    }
    WorkflowDag::new(
        tasks
            .into_iter()
            .map(|(id, weight_mi)| Task { id, weight_mi })
            .collect(),
        edges,
    )
}

pub fn single_type_catalog(mips: f64, delay_s: f64) -> InstanceCatalog {
    InstanceCatalog::new(
        vec![InstanceType {
            name: "only".into(),
            mips,
            cost_per_period: 0.10,
            power_idle_w: 140.0,
            power_max_w: 228.0,
        }],
        20.0,
        3600.0,
        delay_s,
    )
    .unwrap()
}

/// All entry-to-exit paths of a small DAG.
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

/// Path weight matching the critical-path metric: execution on the fastest
/// type plus transfer along the path, accumulated back to front.
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
