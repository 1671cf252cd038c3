//! Run metrics (cost ratio, time ratio, success rate), one-way ANOVA with
//! a Tukey-Kramer post-hoc test, and the results CSV schema shared with
//! external baselines.

mod anova;
mod tukey;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sched::QosConstraints;
use crate::sim::ExecutionTrace;

pub use anova::{anova, f_critical, AnovaResult};
pub use tukey::{tukey_kramer, PairComparison, TukeyResult};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} groups, got {got}")]
    TooFewGroups { need: usize, got: usize },
    #[error("group `{0}` needs a count of at least 2")]
    GroupTooSmall(String),
    #[error("within-group degrees of freedom {0} below the tabulated minimum of 5")]
    DfTooSmall(usize),
    #[error("no results to aggregate")]
    Empty,
    #[error("results csv is missing column `{0}`")]
    MissingColumn(String),
    #[error("results csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Outcome of one scheduled run of one algorithm on one workflow instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub family: String,
    pub size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub makespan_s: f64,
    pub cost: f64,
    pub energy_kwh: f64,
    pub cr: f64,
    pub tr: f64,
    pub success: bool,
}

/// Cost ratio, time ratio and the success flag for one trace.
pub fn ratios(trace: &ExecutionTrace, qos: &QosConstraints) -> (f64, f64, bool) {
    let cr = trace.total_cost / qos.budget;
    let tr = trace.makespan_s / qos.deadline_s;
    (cr, tr, cr <= 1.0 && tr <= 1.0)
}

/// Percentage of successful runs.
pub fn success_rate(results: &[RunResult]) -> Result<f64, StatsError> {
    if results.is_empty() {
        return Err(StatsError::Empty);
    }
    let wins = results.iter().filter(|r| r.success).count();
    Ok(100.0 * wins as f64 / results.len() as f64)
}

/// Count, mean and sample variance of one comparison group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl GroupSummary {
    pub fn from_samples(label: &str, samples: &[f64]) -> Result<Self, StatsError> {
        if samples.len() < 2 {
            return Err(StatsError::GroupTooSmall(label.to_string()));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            label: label.to_string(),
            count: samples.len(),
            mean,
            variance,
        })
    }
}

/// Header of the results CSV, also the import schema for external baselines.
pub const RESULTS_CSV_HEADER: &str =
    "algorithm,family,size,alpha,beta,seed,makespan_s,cost,energy_kwh,cr,tr,success";

/// Renders one CSV row; numbers go through the caller's formatter so sweep
/// output stays byte-stable.
pub fn result_to_csv_row(r: &RunResult, fmt: impl Fn(f64) -> String) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.algorithm,
        r.family,
        r.size,
        fmt(r.alpha),
        fmt(r.beta),
        r.seed,
        fmt(r.makespan_s),
        fmt(r.cost),
        fmt(r.energy_kwh),
        fmt(r.cr),
        fmt(r.tr),
        r.success
    )
}

/// Parses a results CSV produced by this tool or an external comparator.
/// The header must carry every schema column (order-insensitive); unknown
/// columns are ignored.
pub fn parse_results_csv(text: &str) -> Result<Vec<RunResult>, StatsError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(StatsError::Empty)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut col_ix = Vec::new();
    for want in RESULTS_CSV_HEADER.split(',') {
        match cols.iter().position(|c| *c == want) {
            Some(ix) => col_ix.push(ix),
            None => return Err(StatsError::MissingColumn(want.to_string())),
        }
    }
    let mut out = Vec::new();
    for (ix, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |slot: usize| -> Result<&str, StatsError> {
            fields.get(col_ix[slot]).copied().ok_or(StatsError::Csv {
                line: ix + 1,
                reason: "row shorter than header".into(),
            })
        };
        let num = |slot: usize| -> Result<f64, StatsError> {
            let s = get(slot)?;
            s.parse().map_err(|_| StatsError::Csv {
                line: ix + 1,
                reason: format!("invalid number `{s}`"),
            })
        };
        out.push(RunResult {
            algorithm: get(0)?.to_string(),
            family: get(1)?.to_string(),
            size: num(2)? as usize,
            alpha: num(3)?,
            beta: num(4)?,
            seed: num(5)? as u64,
            makespan_s: num(6)?,
            cost: num(7)?,
            energy_kwh: num(8)?,
            cr: num(9)?,
            tr: num(10)?,
            success: matches!(get(11)?, "true" | "1"),
        });
    }
    Ok(out)
}
