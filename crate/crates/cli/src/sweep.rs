//! The experiment grid: generate workflow instances, derive deadline and
//! budget from the tightness factors, run every algorithm over every cell
//! and aggregate the statistics.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use smws_core::ingest::{generate, Family, GeneratorSpec};
use smws_core::sched::{
    fs_lb, schedule_heft, schedule_smwsh, schedule_smwso, HeftPool, QosConstraints,
    SchedulerOptions,
};
use smws_core::sim::simulate;
use smws_core::stats::{
    anova, ratios, result_to_csv_row, success_rate, tukey_kramer, AnovaResult, GroupSummary,
    RunResult, TukeyResult, RESULTS_CSV_HEADER,
};
use smws_core::InstanceCatalog;

use crate::fmt::sig6;

/// One full sweep description. The defaults are desk-scale: every family,
/// sizes 50 and 100, three repetitions, the four-by-four factor grid.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub algorithms: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            sizes: vec![50, 100],
            alphas: vec![4.0, 8.0, 12.0, 16.0],
            betas: vec![4.0, 8.0, 12.0, 16.0],
            repetitions: 3,
            base_seed: 42,
            algorithms: vec!["smwso".into(), "smwsh".into()],
        }
    }
}

impl SweepConfig {
    /// The full reference grid: all five sizes, thirty repetitions.
    pub fn full_grid(mut self) -> Self {
        self.sizes = vec![50, 100, 200, 500, 1000];
        self.repetitions = 30;
        self
    }

    /// Parses the simple `key = value` config format; unknown keys are
    /// rejected so typos do not silently fall back to defaults.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (ix, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("config line {}: expected `key = value`", ix + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            match key {
                "families" => {
                    cfg.families = list()
                        .map(|s| s.parse::<Family>().map_err(anyhow::Error::msg))
                        .collect::<Result<_>>()?
                }
                "sizes" => {
                    cfg.sizes = list()
                        .map(|s| s.parse().context("size"))
                        .collect::<Result<_>>()?
                }
                "alphas" => {
                    cfg.alphas = list()
                        .map(|s| s.parse().context("alpha"))
                        .collect::<Result<_>>()?
                }
                "betas" => {
                    cfg.betas = list()
                        .map(|s| s.parse().context("beta"))
                        .collect::<Result<_>>()?
                }
                "reps" => cfg.repetitions = value.parse().context("reps")?,
                "seed" => cfg.base_seed = value.parse().context("seed")?,
                "algorithms" => cfg.algorithms = list().map(str::to_string).collect(),
                other => bail!("config line {}: unknown key `{other}`", ix + 1),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty()
            || self.sizes.is_empty()
            || self.alphas.is_empty()
            || self.betas.is_empty()
            || self.algorithms.is_empty()
        {
            bail!("families, sizes, alphas, betas and algorithms must be non-empty");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        for a in &self.algorithms {
            if !matches!(a.as_str(), "smwso" | "smwsh" | "heft") {
                bail!("unknown algorithm `{a}` (expected smwso, smwsh or heft)");
            }
        }
        Ok(())
    }
}

/// FNV-1a over the cell coordinates: stable across platforms, so sweeps
/// are reorderable and reproducible.
pub fn cell_seed(base_seed: u64, family: Family, size: usize, repetition: usize) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(&base_seed.to_le_bytes());
    eat(family.name().as_bytes());
    eat(&(size as u64).to_le_bytes());
    eat(&(repetition as u64).to_le_bytes());
    h
}

pub struct SweepOutput {
    pub results: Vec<RunResult>,
    pub failures: Vec<String>,
    pub csv: String,
    pub report: StatsReport,
}

/// Runs one algorithm on one workflow and measures it.
pub fn run_once(
    algorithm: &str,
    dag: &smws_core::WorkflowDag,
    catalog: &InstanceCatalog,
    qos: &QosConstraints,
) -> Result<smws_core::ExecutionTrace> {
    let schedule = match algorithm {
        "smwso" => schedule_smwso(dag, catalog, qos, SchedulerOptions::default()),
        "smwsh" => schedule_smwsh(dag, catalog, qos, SchedulerOptions::default()),
        "heft" => schedule_heft(dag, catalog, qos, &HeftPool::OnePerType),
        other => bail!("unknown algorithm `{other}`"),
    };
    schedule
        .verify(dag, catalog)
        .map_err(|errs| anyhow::anyhow!("schedule invariants violated: {}", errs.join("; ")))?;
    Ok(simulate(&schedule, dag, catalog)?)
}

/// Executes the whole grid. Cell failures are recorded and skipped; the
/// CSV is emitted in sorted order with fixed six-significant-digit
/// formatting, so a given config and seed always produce identical bytes.
pub fn run_sweep(config: &SweepConfig, catalog: &InstanceCatalog) -> SweepOutput {
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for &family in &config.families {
        for &size in &config.sizes {
            for rep in 0..config.repetitions {
                let seed = cell_seed(config.base_seed, family, size, rep);
                let spec = GeneratorSpec::new(family, size, seed);
                let dag = match generate(&spec) {
                    Ok(d) => d,
                    Err(e) => {
                        failures.push(format!("{} {} rep {rep}: {e}", family.name(), size));
                        continue;
                    }
                };
                let (fs, lb) = fs_lb(&dag, catalog);
                for &alpha in &config.alphas {
                    for &beta in &config.betas {
                        let qos = QosConstraints::new(alpha * fs, beta * lb);
                        for algorithm in &config.algorithms {
                            match run_once(algorithm, &dag, catalog, &qos) {
                                Ok(trace) => {
                                    let (cr, tr, success) = ratios(&trace, &qos);
                                    results.push(RunResult {
                                        algorithm: algorithm.clone(),
                                        family: family.name().to_string(),
                                        size,
                                        alpha,
                                        beta,
                                        seed,
                                        makespan_s: trace.makespan_s,
                                        cost: trace.total_cost,
                                        energy_kwh: trace.total_energy_kwh,
                                        cr,
                                        tr,
                                        success,
                                    });
                                }
                                Err(e) => failures.push(format!(
                                    "{} {} rep {rep} a{alpha} b{beta} {algorithm}: {e}",
                                    family.name(),
                                    size
                                )),
                            }
                        }
                    }
                }
            }
        }
    }
    results.sort_by(|a, b| {
        a.family
            .cmp(&b.family)
            .then(a.size.cmp(&b.size))
            .then(a.seed.cmp(&b.seed))
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.beta.total_cmp(&b.beta))
            .then(a.algorithm.cmp(&b.algorithm))
    });
    let csv = results_to_csv(&results);
    let report = build_stats_report(&results);
    SweepOutput {
        results,
        failures,
        csv,
        report,
    }
}

pub fn results_to_csv(results: &[RunResult]) -> String {
    let mut out = String::from(RESULTS_CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&result_to_csv_row(r, sig6));
        out.push('\n');
    }
    out
}

/// Energy comparison and success rates per (family, size) cell, plus the
/// overall success rate per algorithm.
#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub cells: Vec<CellStats>,
    pub overall_success_rate: Vec<AlgorithmRate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgorithmRate {
    pub algorithm: String,
    pub success_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellStats {
    pub family: String,
    pub size: usize,
    /// Energy summaries per algorithm, alphabetical.
    pub groups: Vec<GroupSummary>,
    pub anova: Option<AnovaResult>,
    pub tukey: Option<TukeyResult>,
    /// Energy-saving rank per group, aligned with `groups`.
    pub ranking: Vec<usize>,
    pub success_rate: Vec<AlgorithmRate>,
    pub notice: Option<String>,
}

/// Groups rows by (family, size), summarizes energy per algorithm and runs
/// the ANOVA + Tukey-Kramer comparison where enough groups exist.
pub fn build_stats_report(results: &[RunResult]) -> StatsReport {
    let mut cells: Vec<CellStats> = Vec::new();
    let mut keys: Vec<(String, usize)> =
        results.iter().map(|r| (r.family.clone(), r.size)).collect();
    keys.sort();
    keys.dedup();
    for (family, size) in keys {
        let rows: Vec<&RunResult> = results
            .iter()
            .filter(|r| r.family == family && r.size == size)
            .collect();
        let mut algos: Vec<String> = rows.iter().map(|r| r.algorithm.clone()).collect();
        algos.sort();
        algos.dedup();
        let mut groups = Vec::new();
        let mut rates = Vec::new();
        let mut notice = None;
        for algo in &algos {
            let of_algo: Vec<RunResult> = rows
                .iter()
                .filter(|r| &r.algorithm == algo)
                .map(|r| (*r).clone())
                .collect();
            let energy: Vec<f64> = of_algo.iter().map(|r| r.energy_kwh).collect();
            match GroupSummary::from_samples(algo, &energy) {
                Ok(g) => groups.push(g),
                Err(e) => notice = Some(e.to_string()),
            }
            rates.push(AlgorithmRate {
                algorithm: algo.clone(),
                success_rate: success_rate(&of_algo).unwrap_or(0.0),
            });
        }
        let (anova_res, tukey_res, ranking) = if groups.len() >= 2 {
            match anova(&groups) {
                Ok(a) => {
                    let t = tukey_kramer(&groups, a.ms_within, a.df_within).ok();
                    let ranking = t
                        .as_ref()
                        .map(|t| t.ranking.clone())
                        .unwrap_or_else(|| vec![1; groups.len()]);
                    (Some(a), t, ranking)
                }
                Err(e) => {
                    notice = Some(e.to_string());
                    (None, None, vec![1; groups.len()])
                }
            }
        } else {
            if notice.is_none() {
                notice = Some("single algorithm: anova skipped".to_string());
            }
            (None, None, vec![1; groups.len()])
        };
        cells.push(CellStats {
            family,
            size,
            groups,
            anova: anova_res,
            tukey: tukey_res,
            ranking,
            success_rate: rates,
            notice,
        });
    }

    let mut algos: Vec<String> = results.iter().map(|r| r.algorithm.clone()).collect();
    algos.sort();
    algos.dedup();
    let overall = algos
        .into_iter()
        .map(|a| {
            let of_algo: Vec<RunResult> = results
                .iter()
                .filter(|r| r.algorithm == a)
                .cloned()
                .collect();
            AlgorithmRate {
                success_rate: success_rate(&of_algo).unwrap_or(0.0),
                algorithm: a,
            }
        })
        .collect();
    StatsReport {
        cells,
        overall_success_rate: overall,
    }
}

impl StatsReport {
    /// The energy-efficiency ranking table plus per-cell details, as text.
    pub fn render_tables(&self) -> String {
        let mut out = String::new();
        let mut algos: Vec<String> = self
            .cells
            .iter()
            .flat_map(|c| c.groups.iter().map(|g| g.label.clone()))
            .collect();
        algos.sort();
        algos.dedup();
        let _ = writeln!(
            out,
            "energy-saving ranking (1 = most efficient; ties share a rank)"
        );
        let _ = write!(out, "{:<24}", "workflow");
        for a in &algos {
            let _ = write!(out, "{a:>10}");
        }
        let _ = writeln!(out);
        for cell in &self.cells {
            let _ = write!(out, "{:<24}", format!("{} {}", cell.family, cell.size));
            for a in &algos {
                match cell.groups.iter().position(|g| &g.label == a) {
                    Some(ix) => {
                        let _ = write!(out, "{:>10}", cell.ranking[ix]);
                    }
                    None => {
                        let _ = write!(out, "{:>10}", "-");
                    }
                }
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out);
        for cell in &self.cells {
            let _ = writeln!(out, "{} {}:", cell.family, cell.size);
            for (g, rate) in cell.groups.iter().zip(&cell.success_rate) {
                let _ = writeln!(
                    out,
                    "  {:<8} n={:<3} mean={} var={} sr={}%",
                    g.label,
                    g.count,
                    sig6(g.mean),
                    sig6(g.variance),
                    sig6(rate.success_rate)
                );
            }
            if let Some(a) = &cell.anova {
                let _ = writeln!(
                    out,
                    "  anova: F={} Fcrit={} p={} -> {}",
                    sig6(a.f_stat),
                    sig6(a.f_critical),
                    sig6(a.p_value),
                    if a.significant {
                        "significant"
                    } else {
                        "not significant"
                    }
                );
            }
            if let Some(t) = &cell.tukey {
                for p in &t.pairs {
                    let _ = writeln!(
                        out,
                        "  {} vs {}: diff={} threshold={} {}",
                        p.a,
                        p.b,
                        sig6(p.difference),
                        sig6(p.threshold),
                        if p.significant { "SIG" } else { "ns" }
                    );
                }
            }
            if let Some(n) = &cell.notice {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        let _ = writeln!(out, "overall success rate:");
        for r in &self.overall_success_rate {
            let _ = writeln!(out, "  {:<8} {}%", r.algorithm, sig6(r.success_rate));
        }
        out
    }
}
