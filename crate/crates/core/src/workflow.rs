//! Workflow DAG representation and the pure structural analyses the
//! schedulers build on: level numbering, width profile, critical path and
//! parallel-pipeline detection.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cloud::{et, tt, InstanceCatalog};

/// A workflow task: an opaque id plus its weight in millions of instructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub weight_mi: f64,
}

/// A data dependency between two tasks, by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub data_mb: f64,
}

/// Resolved edge between task indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub data_mb: f64,
}

/// Everything that can be wrong with a DAG. Violations are data, not
/// failures: [`WorkflowDag::validate`] collects all of them.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateTaskId(String),
    NonPositiveWeight(String),
    DanglingEdge { from: String, to: String },
    SelfEdge(String),
    DuplicateEdge { from: String, to: String },
    NegativeEdgeData { from: String, to: String },
    Cycle(Vec<String>),
    NoEntryTask,
    NoExitTask,
    Empty,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateTaskId(id) => write!(f, "duplicate task id `{id}`"),
            Violation::NonPositiveWeight(id) => write!(f, "task `{id}` has non-positive weight"),
            Violation::DanglingEdge { from, to } => {
                write!(f, "edge `{from}` -> `{to}` names an unknown task")
            }
            Violation::SelfEdge(id) => write!(f, "self edge on `{id}`"),
            Violation::DuplicateEdge { from, to } => {
                write!(f, "duplicate edge `{from}` -> `{to}`")
            }
            Violation::NegativeEdgeData { from, to } => {
                write!(f, "edge `{from}` -> `{to}` has negative data size")
            }
            Violation::Cycle(ids) => write!(f, "cycle through {}", ids.join(" -> ")),
            Violation::NoEntryTask => write!(f, "no entry task (every task has a parent)"),
            Violation::NoExitTask => write!(f, "no exit task (every task has a child)"),
            Violation::Empty => write!(f, "workflow has no tasks"),
        }
    }
}

/// A workflow DAG. Tasks are stored sorted by id, so index order doubles as
/// the deterministic tie-break order used throughout the schedulers.
#[derive(Debug, Clone)]
pub struct WorkflowDag {
    tasks: Vec<Task>,
    edges: Vec<Edge>,
    /// Edges whose endpoints did not resolve; kept for validation only.
    dangling: Vec<EdgeSpec>,
    duplicate_ids: Vec<String>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl WorkflowDag {
    pub fn new(mut tasks: Vec<Task>, edge_specs: Vec<EdgeSpec>) -> Self {
        tasks.sort_by(|a, b| a.id.cmp(&b.id));
        let mut duplicate_ids = Vec::new();
        for w in tasks.windows(2) {
            if w[0].id == w[1].id {
                duplicate_ids.push(w[0].id.clone());
            }
        }
        let index: BTreeMap<&str, usize> = tasks
            .iter()
            .enumerate()
            .map(|(ix, t)| (t.id.as_str(), ix))
            .collect();
        let mut edges = Vec::new();
        let mut dangling = Vec::new();
        for spec in edge_specs {
            match (index.get(spec.from.as_str()), index.get(spec.to.as_str())) {
                (Some(&from), Some(&to)) => edges.push(Edge {
                    from,
                    to,
                    data_mb: spec.data_mb,
                }),
                _ => dangling.push(spec),
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));
        let mut preds = vec![Vec::new(); tasks.len()];
        let mut succs = vec![Vec::new(); tasks.len()];
        for (ix, e) in edges.iter().enumerate() {
            if e.from != e.to {
                succs[e.from].push(ix);
                preds[e.to].push(ix);
            }
        }
        Self {
            tasks,
            edges,
            dangling,
            duplicate_ids,
            preds,
            succs,
        }
    }

    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, ix: usize) -> &Task {
        &self.tasks[ix]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.tasks.binary_search_by(|t| t.id.as_str().cmp(id)).ok()
    }

    /// Parent task indices of `ix`, ascending.
    pub fn parents(&self, ix: usize) -> impl Iterator<Item = usize> + '_ {
        self.preds[ix].iter().map(move |&e| self.edges[e].from)
    }

    /// Child task indices of `ix`, ascending.
    pub fn children(&self, ix: usize) -> impl Iterator<Item = usize> + '_ {
        self.succs[ix].iter().map(move |&e| self.edges[e].to)
    }

    /// Incoming edges of `ix`.
    pub fn in_edges(&self, ix: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.preds[ix].iter().map(move |&e| &self.edges[e])
    }

    /// Outgoing edges of `ix`.
    pub fn out_edges(&self, ix: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.succs[ix].iter().map(move |&e| &self.edges[e])
    }

    pub fn in_degree(&self, ix: usize) -> usize {
        self.preds[ix].len()
    }

    pub fn out_degree(&self, ix: usize) -> usize {
        self.succs[ix].len()
    }

    pub fn entries(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.task_count()).filter(|&ix| self.in_degree(ix) == 0)
    }

    pub fn exits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.task_count()).filter(|&ix| self.out_degree(ix) == 0)
    }

    /// Data size on the edge `from -> to`, if present.
    pub fn edge_data_mb(&self, from: usize, to: usize) -> Option<f64> {
        self.out_edges(from).find(|e| e.to == to).map(|e| e.data_mb)
    }

    /// Collects every invariant violation; an empty list means the DAG is
    /// valid and all structural operations are safe to call.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.tasks.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        for id in &self.duplicate_ids {
            out.push(Violation::DuplicateTaskId(id.clone()));
        }
        // The negated form also rejects NaN weights.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        for t in &self.tasks {
            if !(t.weight_mi > 0.0) {
                out.push(Violation::NonPositiveWeight(t.id.clone()));
            }
        }
        for spec in &self.dangling {
            out.push(Violation::DanglingEdge {
                from: spec.from.clone(),
                to: spec.to.clone(),
            });
        }
        let mut seen = BTreeMap::new();
        for e in &self.edges {
            if e.from == e.to {
                out.push(Violation::SelfEdge(self.tasks[e.from].id.clone()));
                continue;
            }
            if e.data_mb < 0.0 {
                out.push(Violation::NegativeEdgeData {
                    from: self.tasks[e.from].id.clone(),
                    to: self.tasks[e.to].id.clone(),
                });
            }
            if seen.insert((e.from, e.to), ()).is_some() {
                out.push(Violation::DuplicateEdge {
                    from: self.tasks[e.from].id.clone(),
                    to: self.tasks[e.to].id.clone(),
                });
            }
        }
        match self.topo_order() {
            Ok(_) => {
                if self.entries().next().is_none() {
                    out.push(Violation::NoEntryTask);
                }
                if self.exits().next().is_none() {
                    out.push(Violation::NoExitTask);
                }
            }
            Err(cycle) => {
                out.push(Violation::Cycle(
                    cycle.iter().map(|&ix| self.tasks[ix].id.clone()).collect(),
                ));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Kahn topological order (ascending index among ready tasks); the tasks
    /// left over on a cycle are returned as the error.
    pub fn topo_order(&self) -> Result<Vec<usize>, Vec<usize>> {
        let n = self.task_count();
        let mut indeg: Vec<usize> = (0..n).map(|ix| self.in_degree(ix)).collect();
        let mut ready: Vec<usize> = (0..n).filter(|&ix| indeg[ix] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(ix) = ready.pop() {
            order.push(ix);
            for c in self.children(ix) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).filter(|&ix| indeg[ix] > 0).collect())
        }
    }

    /// Level numbers: entries sit at level 1, every other task one past its
    /// deepest parent.
    pub fn levels(&self) -> Vec<u32> {
        let order = self.topo_order().expect("levels require an acyclic dag");
        let mut levels = vec![1u32; self.task_count()];
        for &ix in &order {
            let lvl = self
                .parents(ix)
                .map(|p| levels[p])
                .max()
                .map_or(1, |m| m + 1);
            levels[ix] = lvl;
        }
        levels
    }

    /// Level map keyed by task id, mostly for inspection and tests.
    pub fn levels_by_id(&self) -> BTreeMap<String, u32> {
        self.levels()
            .into_iter()
            .enumerate()
            .map(|(ix, l)| (self.tasks[ix].id.clone(), l))
            .collect()
    }

    pub fn width_profile(&self) -> WidthProfile {
        let levels = self.levels();
        let max_level = levels.iter().copied().max().unwrap_or(0) as usize;
        let mut per_level = vec![0usize; max_level];
        for l in levels {
            per_level[(l - 1) as usize] += 1;
        }
        WidthProfile::from_level_widths(&per_level)
    }
}

/// Per-level task counts and their summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthProfile {
    pub per_level: Vec<usize>,
    pub max_width: usize,
    pub avg_width: f64,
    /// Population standard deviation of the level widths.
    pub stddev_width: f64,
}

impl WidthProfile {
    pub fn from_level_widths(per_level: &[usize]) -> Self {
        assert!(
            !per_level.is_empty(),
            "width profile needs at least one level"
        );
        let n = per_level.len() as f64;
        let avg = per_level.iter().sum::<usize>() as f64 / n;
        let var = per_level
            .iter()
            .map(|&w| (w as f64 - avg).powi(2))
            .sum::<f64>()
            / n;
        WidthProfile {
            per_level: per_level.to_vec(),
            max_width: per_level.iter().copied().max().unwrap_or(0),
            avg_width: avg,
            stddev_width: var.sqrt(),
        }
    }

    /// Width of level `l` (1-based); 0 for levels past the last.
    pub fn level_width(&self, l: usize) -> usize {
        if l == 0 || l > self.per_level.len() {
            0
        } else {
            self.per_level[l - 1]
        }
    }
}

/// The entry-to-exit path maximizing execution time on the fastest type plus
/// transfer time along the path. Ties break toward the smaller task index,
/// which is the smaller task id.
pub fn critical_path(dag: &WorkflowDag, catalog: &InstanceCatalog) -> Vec<usize> {
    let order = dag
        .topo_order()
        .expect("critical path requires an acyclic dag");
    let fastest = catalog.get(catalog.fastest());
    let n = dag.task_count();
    // down[ix] = best weight of a path starting at ix (its own ET included).
    let mut down = vec![0.0f64; n];
    let mut next = vec![usize::MAX; n];
    for &ix in order.iter().rev() {
        let own = et(dag.task(ix).weight_mi, fastest);
        let mut best: Option<(f64, usize)> = None;
        for e in dag.out_edges(ix) {
            let w = tt(e.data_mb, false, catalog.bandwidth_mbps) + down[e.to];
            let better = match best {
                None => true,
                Some((bw, bt)) => w > bw + 1e-12 || (w >= bw - 1e-12 && e.to < bt),
            };
            if better {
                best = Some((w, e.to));
            }
        }
        match best {
            Some((w, t)) => {
                down[ix] = own + w;
                next[ix] = t;
            }
            None => down[ix] = own,
        }
    }
    let start = dag
        .entries()
        .max_by(|&a, &b| {
            down[a].partial_cmp(&down[b]).unwrap().then(b.cmp(&a)) // prefer the smaller index on ties
        })
        .expect("valid dag has an entry task");
    let mut path = vec![start];
    let mut cur = start;
    while next[cur] != usize::MAX {
        cur = next[cur];
        path.push(cur);
    }
    path
}

/// A maximal chain of one-parent/one-child tasks hanging off a distribution
/// task and draining into an aggregation task.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    /// First body task.
    pub head: usize,
    /// The full chain, head included, in execution order.
    pub body: Vec<usize>,
    /// Total computation length of the body in MI.
    pub length_mi: f64,
    /// The distribution task the chain hangs off.
    pub source: usize,
    /// The aggregation task fed by the last body task.
    pub sink: usize,
}

/// Parallel pipelines sharing a source and a sink, packed into subgroups
/// that each fit within the longest pipeline's length.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineGroup {
    pub source: usize,
    pub sink: usize,
    /// Sorted by descending length, ties by head index.
    pub pipelines: Vec<Pipeline>,
    pub longest_mi: f64,
    /// Indices into `pipelines`; the longest pipeline sits alone in the
    /// first subgroup, the rest are packed first-fit-decreasing under the
    /// `longest_mi` capacity.
    pub subgroups: Vec<Vec<usize>>,
}

impl PipelineGroup {
    pub fn subgroup_length_mi(&self, subgroup: &[usize]) -> f64 {
        subgroup.iter().map(|&p| self.pipelines[p].length_mi).sum()
    }

    /// Subgroup that contains the pipeline headed by `head`, if any.
    pub fn subgroup_of_head(&self, head: usize) -> Option<usize> {
        let pipe = self.pipelines.iter().position(|p| p.head == head)?;
        self.subgroups.iter().position(|sg| sg.contains(&pipe))
    }
}

/// Finds all parallel-pipeline groups of the DAG, keyed by (source, sink).
pub fn detect_pipelines(dag: &WorkflowDag) -> Vec<PipelineGroup> {
    let n = dag.task_count();
    let mut by_key: BTreeMap<(usize, usize), Vec<Pipeline>> = BTreeMap::new();
    for source in 0..n {
        if dag.out_degree(source) <= 1 {
            continue;
        }
        for first in dag.children(source) {
            if dag.in_degree(first) != 1 || dag.out_degree(first) != 1 {
                continue;
            }
            let mut body = vec![first];
            let mut cur = first;
            loop {
                let next = dag.children(cur).next().expect("body task has one child");
                if dag.in_degree(next) == 1 && dag.out_degree(next) == 1 {
                    body.push(next);
                    cur = next;
                } else {
                    // `next` terminates the chain; without a real aggregation
                    // task (an exit reached by this chain alone) the chain
                    // cannot be grouped with anything.
                    let length_mi = body.iter().map(|&ix| dag.task(ix).weight_mi).sum();
                    by_key.entry((source, next)).or_default().push(Pipeline {
                        head: first,
                        body,
                        length_mi,
                        source,
                        sink: next,
                    });
                    break;
                }
            }
        }
    }
    let mut groups = Vec::new();
    for ((source, sink), mut pipelines) in by_key {
        pipelines.sort_by(|a, b| {
            b.length_mi
                .partial_cmp(&a.length_mi)
                .unwrap()
                .then(a.head.cmp(&b.head))
        });
        let longest_mi = pipelines[0].length_mi;
        // First-fit-decreasing under the longest pipeline's length. The
        // longest lands alone because any companion would overflow it.
        let mut subgroups: Vec<Vec<usize>> = Vec::new();
        let mut loads: Vec<f64> = Vec::new();
        for (ix, p) in pipelines.iter().enumerate() {
            let fit = subgroups
                .iter()
                .enumerate()
                .find(|(sg, _)| loads[*sg] + p.length_mi <= longest_mi + 1e-9 && *sg != 0)
                .map(|(sg, _)| sg);
            let fit = if ix == 0 { None } else { fit };
            match fit {
                Some(sg) => {
                    subgroups[sg].push(ix);
                    loads[sg] += p.length_mi;
                }
                None => {
                    subgroups.push(vec![ix]);
                    loads.push(p.length_mi);
                }
            }
        }
        groups.push(PipelineGroup {
            source,
            sink,
            pipelines,
            longest_mi,
            subgroups,
        });
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn ids(dag: &WorkflowDag, ixs: &[usize]) -> Vec<String> {
        ixs.iter().map(|&ix| dag.task(ix).id.clone()).collect()
    }

    #[test]
    fn valid_chain_has_no_violations() {
        let d = dag(
            &[("a", 1.0), ("b", 2.0), ("c", 3.0)],
            &[("a", "b", 0.0), ("b", "c", 0.0)],
        );
        assert!(d.validate().is_empty());
    }

    #[test]
    fn two_cycle_is_reported() {
        let d = dag(
            &[("a", 1.0), ("b", 1.0)],
            &[("a", "b", 0.0), ("b", "a", 0.0)],
        );
        let v = d.validate();
        assert!(v.iter().any(|x| matches!(x, Violation::Cycle(_))));
    }

    #[test]
    fn dangling_edge_is_reported() {
        let d = dag(
            &[("a", 1.0), ("b", 1.0)],
            &[("a", "x", 0.0), ("a", "b", 0.0)],
        );
        let v = d.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DanglingEdge { .. })));
    }

    #[test]
    fn zero_weight_and_duplicates_are_reported() {
        let d = dag(
            &[("a", 0.0), ("b", 1.0)],
            &[("a", "b", 1.0), ("a", "b", 1.0), ("b", "b", 0.0)],
        );
        let v = d.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::NonPositiveWeight(_))));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DuplicateEdge { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::SelfEdge(_))));
    }

    #[test]
    fn chain_levels() {
        let d = dag(
            &[("a", 1.0), ("b", 1.0), ("c", 1.0)],
            &[("a", "b", 0.0), ("b", "c", 0.0)],
        );
        let lv = d.levels_by_id();
        assert_eq!(lv["a"], 1);
        assert_eq!(lv["b"], 2);
        assert_eq!(lv["c"], 3);
    }

    #[test]
    fn diamond_levels() {
        let d = dag(
            &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)],
            &[
                ("a", "b", 0.0),
                ("a", "c", 0.0),
                ("b", "d", 0.0),
                ("c", "d", 0.0),
            ],
        );
        let lv = d.levels_by_id();
        assert_eq!((lv["a"], lv["b"], lv["c"], lv["d"]), (1, 2, 2, 3));
    }

    #[test]
    fn levels_are_iteration_order_independent() {
        // Same diamond, tasks and edges fed in scrambled order.
        let d1 = dag(
            &[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)],
            &[
                ("a", "b", 0.0),
                ("a", "c", 0.0),
                ("b", "d", 0.0),
                ("c", "d", 0.0),
            ],
        );
        let d2 = dag(
            &[("d", 1.0), ("c", 1.0), ("b", 1.0), ("a", 1.0)],
            &[
                ("c", "d", 0.0),
                ("b", "d", 0.0),
                ("a", "c", 0.0),
                ("a", "b", 0.0),
            ],
        );
        assert_eq!(d1.levels_by_id(), d2.levels_by_id());
    }

    #[test]
    fn width_profile_stats() {
        let p = WidthProfile::from_level_widths(&[4, 6, 1, 1, 4, 1, 1, 1, 1]);
        assert_eq!(p.max_width, 6);
        assert!((p.avg_width - 2.22).abs() < 0.005);
        assert!((p.stddev_width - 1.81).abs() < 0.005);

        let single = WidthProfile::from_level_widths(&[1]);
        assert_eq!(single.max_width, 1);
        assert_eq!(single.avg_width, 1.0);
        assert_eq!(single.stddev_width, 0.0);

        let skewed = WidthProfile::from_level_widths(&[1, 1, 1, 9]);
        assert!((skewed.avg_width - 3.0).abs() < 1e-12);
        assert!((skewed.stddev_width - 3.4641).abs() < 1e-4);
    }

    #[test]
    fn width_profile_sums_to_task_count() {
        let p = WidthProfile::from_level_widths(&[4, 6, 1, 1, 4, 1, 1, 1, 1]);
        assert_eq!(p.per_level.iter().sum::<usize>(), 20);
        assert!(p.avg_width <= p.max_width as f64);
    }

    #[test]
    fn critical_path_of_chain_is_the_chain() {
        let cat = InstanceCatalog::default_catalog();
        let d = dag(&[("a", 10.0), ("b", 20.0)], &[("a", "b", 40.0)]);
        assert_eq!(ids(&d, &critical_path(&d, &cat)), vec!["a", "b"]);
    }

    #[test]
    fn critical_path_takes_heavier_branch() {
        let cat = InstanceCatalog::default_catalog();
        let d = dag(
            &[("a", 10.0), ("b", 500.0), ("c", 10.0), ("d", 10.0)],
            &[
                ("a", "b", 0.0),
                ("a", "c", 0.0),
                ("b", "d", 0.0),
                ("c", "d", 0.0),
            ],
        );
        assert_eq!(ids(&d, &critical_path(&d, &cat)), vec!["a", "b", "d"]);
    }

    #[test]
    fn critical_path_tie_breaks_to_smaller_id() {
        let cat = InstanceCatalog::default_catalog();
        let d = dag(
            &[("a", 10.0), ("b", 50.0), ("c", 50.0), ("d", 10.0)],
            &[
                ("a", "b", 5.0),
                ("a", "c", 5.0),
                ("b", "d", 5.0),
                ("c", "d", 5.0),
            ],
        );
        assert_eq!(ids(&d, &critical_path(&d, &cat)), vec!["a", "b", "d"]);
    }

    #[test]
    fn fan_out_fan_in_pipelines_pack_first_fit_decreasing() {
        let d = dag(
            &[
                ("src", 1.0),
                ("p1", 100.0),
                ("p2", 60.0),
                ("p3", 30.0),
                ("sink", 1.0),
            ],
            &[
                ("src", "p1", 0.0),
                ("src", "p2", 0.0),
                ("src", "p3", 0.0),
                ("p1", "sink", 0.0),
                ("p2", "sink", 0.0),
                ("p3", "sink", 0.0),
            ],
        );
        let groups = detect_pipelines(&d);
        assert_eq!(groups.len(), 1);
        let g = &groups[0];
        assert_eq!(g.longest_mi, 100.0);
        assert_eq!(g.pipelines.len(), 3);
        assert_eq!(g.subgroups.len(), 2);
        assert_eq!(g.subgroups[0].len(), 1);
        assert_eq!(g.pipelines[g.subgroups[0][0]].length_mi, 100.0);
        let second: f64 = g.subgroup_length_mi(&g.subgroups[1]);
        assert_eq!(second, 90.0);
    }

    #[test]
    fn plain_chain_has_no_pipeline_groups() {
        let d = dag(
            &[("a", 1.0), ("b", 1.0), ("c", 1.0)],
            &[("a", "b", 0.0), ("b", "c", 0.0)],
        );
        assert!(detect_pipelines(&d).is_empty());
    }

    #[test]
    fn multi_parent_branch_is_not_a_pipeline() {
        // "m" has two parents, so the src->m->sink chain is not a pipeline.
        let d = dag(
            &[
                ("src", 1.0),
                ("x", 1.0),
                ("m", 1.0),
                ("q", 1.0),
                ("sink", 1.0),
            ],
            &[
                ("src", "m", 0.0),
                ("src", "q", 0.0),
                ("x", "m", 0.0),
                ("m", "sink", 0.0),
                ("q", "sink", 0.0),
                ("x", "sink", 0.0),
            ],
        );
        let groups = detect_pipelines(&d);
        for g in &groups {
            for p in &g.pipelines {
                assert!(!p.body.contains(&d.index_of("m").unwrap()));
            }
        }
    }

    #[test]
    fn subgroups_partition_the_group() {
        let d = dag(
            &[
                ("src", 1.0),
                ("a", 70.0),
                ("b", 40.0),
                ("c", 35.0),
                ("e", 20.0),
                ("sink", 1.0),
            ],
            &[
                ("src", "a", 0.0),
                ("src", "b", 0.0),
                ("src", "c", 0.0),
                ("src", "e", 0.0),
                ("a", "sink", 0.0),
                ("b", "sink", 0.0),
                ("c", "sink", 0.0),
                ("e", "sink", 0.0),
            ],
        );
        let g = &detect_pipelines(&d)[0];
        let mut seen = vec![false; g.pipelines.len()];
        for sg in &g.subgroups {
            assert!(g.subgroup_length_mi(sg) <= g.longest_mi + 1e-9);
            for &p in sg {
                assert!(!seen[p], "pipeline appears in two subgroups");
                seen[p] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
