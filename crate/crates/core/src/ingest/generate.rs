//! Seeded synthetic DAG generators echoing the structure of five
//! scientific workflow families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::workflow::{EdgeSpec, Task, WorkflowDag};

use super::{Family, GeneratorSpec, IngestError};

/// Generates a family-shaped DAG with exactly `task_count` tasks,
/// bit-identical for identical specs.
pub fn generate(spec: &GeneratorSpec) -> Result<WorkflowDag, IngestError> {
    if spec.task_count < spec.family.min_tasks() {
        return Err(IngestError::InvalidSpec(format!(
            "{} needs at least {} tasks, got {}",
            spec.family.name(),
            spec.family.min_tasks(),
            spec.task_count
        )));
    }
    let (lo, hi) = spec.weight_range_mi;
    if !(lo > 0.0 && hi > lo) {
        return Err(IngestError::InvalidSpec(
            "weight range must be positive and ordered".into(),
        ));
    }
    let (dlo, dhi) = spec.data_range_mb;
    if !(dlo > 0.0 && dhi > dlo) {
        return Err(IngestError::InvalidSpec(
            "data range must be positive and ordered".into(),
        ));
    }
    let mut b = Builder::new(spec);
    match spec.family {
        Family::MontageLike => montage_like(&mut b),
        Family::CybershakeLike => cybershake_like(&mut b),
        Family::EpigenomicsLike => epigenomics_like(&mut b),
        Family::SiphtLike => sipht_like(&mut b),
        Family::LigoLike => ligo_like(&mut b),
    }
    assert_eq!(
        b.tasks.len(),
        spec.task_count,
        "generator produced a wrong task count"
    );
    Ok(WorkflowDag::new(b.tasks, b.edges))
}

struct Builder<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    tasks: Vec<Task>,
    edges: Vec<EdgeSpec>,
    id_width: usize,
}

impl<'a> Builder<'a> {
    fn new(spec: &'a GeneratorSpec) -> Self {
        let id_width = spec.task_count.to_string().len();
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            tasks: Vec::with_capacity(spec.task_count),
            edges: Vec::new(),
            id_width,
        }
    }

    fn task(&mut self) -> usize {
        let id = format!("t{:0width$}", self.tasks.len(), width = self.id_width);
        let weight_mi = sample_log_uniform(&mut self.rng, self.spec.weight_range_mi);
        self.tasks.push(Task { id, weight_mi });
        self.tasks.len() - 1
    }

    fn tier(&mut self, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.task()).collect()
    }

    fn link(&mut self, from: usize, to: usize) {
        let data_mb = sample_log_uniform(&mut self.rng, self.spec.data_range_mb);
        self.edges.push(EdgeSpec {
            from: self.tasks[from].id.clone(),
            to: self.tasks[to].id.clone(),
            data_mb,
        });
    }
}

/// Log-uniform sampling, stratified by decade so no transcendental
/// functions enter the stream: pick a decade, then a mantissa in [1, 10).
fn sample_log_uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    let (lo, hi) = range;
    let d_lo = decade_floor(lo);
    let d_hi = decade_floor(hi * (1.0 - 1e-12));
    loop {
        let d = rng.random_range(d_lo..=d_hi);
        let mantissa = 1.0 + 9.0 * rng.random::<f64>();
        let x = mantissa * pow10(d);
        if x >= lo && x < hi {
            return x;
        }
    }
}

fn decade_floor(x: f64) -> i32 {
    debug_assert!(x > 0.0);
    let mut d = 0i32;
    let mut v = 1.0f64;
    if x >= 1.0 {
        while v * 10.0 <= x {
            v *= 10.0;
            d += 1;
        }
    } else {
        while v > x {
            v /= 10.0;
            d -= 1;
        }
    }
    d
}

fn pow10(d: i32) -> f64 {
    let mut v = 1.0f64;
    for _ in 0..d.abs() {
        v *= 10.0;
    }
    if d < 0 {
        1.0 / v
    } else {
        v
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = 0;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Wide projection tier fanning into a wider fit tier, two aggregation
/// steps, a re-fan-out matching the first tier, then a single-task tail.
/// At 20 tasks the widths come out 4, 6, 1, 1, 4, 1, 1, 1, 1.
fn montage_like(b: &mut Builder) {
    let n = b.spec.task_count;
    let flexible = n - 6;
    let w1 = (((flexible as f64) * 2.0 / 7.0).round() as usize).clamp(1, flexible - 1);
    let w2 = flexible - 2 * w1;
    let (w1, w2) = if w2 == 0 { (w1 - 1, 2) } else { (w1, w2) };

    let projections = b.tier(w1);
    let fits = b.tier(w2);
    // Every fit reads one projection; every projection feeds someone.
    for (j, &fit) in fits.iter().enumerate() {
        b.link(projections[j % w1], fit);
    }
    for (i, &p) in projections.iter().enumerate().skip(w2) {
        b.link(p, fits[i % w2]);
    }
    for &fit in &fits {
        let extra = b.rng.random_range(0..=2usize);
        for _ in 0..extra {
            let p = projections[b.rng.random_range(0..w1)];
            if !b
                .edges
                .iter()
                .any(|e| e.from == b.tasks[p].id && e.to == b.tasks[fit].id)
            {
                b.link(p, fit);
            }
        }
    }
    let concat = b.task();
    for &fit in &fits {
        b.link(fit, concat);
    }
    let model = b.task();
    b.link(concat, model);
    let backgrounds = b.tier(w1);
    for &bg in &backgrounds {
        b.link(model, bg);
    }
    let gather = b.task();
    for &bg in &backgrounds {
        b.link(bg, gather);
    }
    let mut prev = gather;
    for _ in 0..3 {
        let next = b.task();
        b.link(prev, next);
        prev = next;
    }
}

/// Two roots feeding a strip of extractors, each bursting into synthesis
/// leaves, gathered by a zip task and a final exit.
fn cybershake_like(b: &mut Builder) {
    let n = b.spec.task_count;
    let roots = b.tier(2);
    let k = isqrt(n - 4).max(2);
    let extractors = b.tier(k);
    for &x in &extractors {
        for &r in &roots {
            b.link(r, x);
        }
    }
    let leaf_budget = n - 4 - k;
    let mut leaves_of = vec![0usize; k];
    for i in 0..leaf_budget {
        leaves_of[i % k] += 1;
    }
    let gather = {
        let mut all_leaves = Vec::new();
        for (i, &x) in extractors.iter().enumerate() {
            for _ in 0..leaves_of[i] {
                let leaf = b.task();
                b.link(x, leaf);
                all_leaves.push(leaf);
            }
        }
        let gather = b.task();
        for &l in &all_leaves {
            b.link(l, gather);
        }
        // Extractors that got no leaves drain straight into the gather.
        for (i, &x) in extractors.iter().enumerate() {
            if leaves_of[i] == 0 {
                b.link(x, gather);
            }
        }
        gather
    };
    let exit = b.task();
    b.link(gather, exit);
}

/// One split task, parallel same-length chains, a merge and a short tail:
/// the canonical parallel-pipeline shape.
fn epigenomics_like(b: &mut Builder) {
    let n = b.spec.task_count;
    let chain_budget = n - 4;
    let len = if chain_budget >= 8 { 4 } else { 2 };
    let p = (chain_budget / len).max(2);
    let mut lengths = vec![len; p];
    for i in 0..(chain_budget - p * len) {
        lengths[i % p] += 1;
    }
    let split = b.task();
    let merge_sources: Vec<usize> = lengths
        .iter()
        .map(|&l| {
            let mut prev = split;
            let mut last = split;
            for _ in 0..l {
                let t = b.task();
                b.link(prev, t);
                prev = t;
                last = t;
            }
            last
        })
        .collect();
    let merge = b.task();
    for &m in &merge_sources {
        b.link(m, merge);
    }
    let index = b.task();
    b.link(merge, index);
    let exit = b.task();
    b.link(index, exit);
}

/// Independent star-shaped clusters whose collectors join late.
fn sipht_like(b: &mut Builder) {
    let n = b.spec.task_count;
    let c = ((n - 2) / 12).clamp(2, 8);
    let budget = n - 2;
    let mut cluster_size = vec![budget / c; c];
    for i in 0..(budget - c * (budget / c)) {
        cluster_size[i % c] += 1;
    }
    let mut collectors = Vec::new();
    for size in cluster_size {
        let root = b.task();
        let leaves = b.tier(size - 2);
        for &l in &leaves {
            b.link(root, l);
        }
        let collector = b.task();
        for &l in &leaves {
            b.link(l, collector);
        }
        collectors.push(collector);
    }
    let join = b.task();
    for &c in &collectors {
        b.link(c, join);
    }
    let exit = b.task();
    b.link(join, exit);
}

/// A chain of diamond blocks: each junction fans out and gathers again.
fn ligo_like(b: &mut Builder) {
    let n = b.spec.task_count;
    let blocks = ((n - 1) / 5).max(1);
    let mid_budget = n - 1 - blocks;
    let mut widths = vec![mid_budget / blocks; blocks];
    for i in 0..(mid_budget - blocks * (mid_budget / blocks)) {
        widths[i % blocks] += 1;
    }
    let mut junction = b.task();
    for width in widths {
        let mids = b.tier(width);
        for &m in &mids {
            b.link(junction, m);
        }
        let next = b.task();
        for &m in &mids {
            b.link(m, next);
        }
        junction = next;
    }
}
