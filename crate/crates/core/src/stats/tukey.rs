//! Tukey-Kramer pairwise comparison after ANOVA, with the studentized-range
//! quantiles taken from the standard alpha = 0.05 table.

use serde::{Deserialize, Serialize};

use super::{GroupSummary, StatsError};

/// q(0.05; k, df) for k = 2..=10 at the tabulated df rows.
const Q_DF_ROWS: [usize; 22] = [
    5,
    6,
    7,
    8,
    9,
    10,
    11,
    12,
    13,
    14,
    15,
    16,
    17,
    18,
    19,
    20,
    24,
    30,
    40,
    60,
    120,
    usize::MAX,
];
#[rustfmt::skip]
const Q_TABLE: [[f64; 9]; 22] = [
    [3.64, 4.60, 5.22, 5.67, 6.03, 6.33, 6.58, 6.80, 6.99], // df = 5
    [3.46, 4.34, 4.90, 5.30, 5.63, 5.90, 6.12, 6.32, 6.49],
    [3.34, 4.16, 4.68, 5.06, 5.36, 5.61, 5.82, 6.00, 6.16],
    [3.26, 4.04, 4.53, 4.89, 5.17, 5.40, 5.60, 5.77, 5.92],
    [3.20, 3.95, 4.41, 4.76, 5.02, 5.24, 5.43, 5.59, 5.74],
    [3.15, 3.88, 4.33, 4.65, 4.91, 5.12, 5.30, 5.46, 5.60], // df = 10
    [3.11, 3.82, 4.26, 4.57, 4.82, 5.03, 5.20, 5.35, 5.49],
    [3.08, 3.77, 4.20, 4.51, 4.75, 4.95, 5.12, 5.27, 5.39],
    [3.06, 3.73, 4.15, 4.45, 4.69, 4.88, 5.05, 5.19, 5.32],
    [3.03, 3.70, 4.11, 4.41, 4.64, 4.83, 4.99, 5.13, 5.25],
    [3.01, 3.67, 4.08, 4.37, 4.59, 4.78, 4.94, 5.08, 5.20], // df = 15
    [3.00, 3.65, 4.05, 4.33, 4.56, 4.74, 4.90, 5.03, 5.15],
    [2.98, 3.63, 4.02, 4.30, 4.52, 4.70, 4.86, 4.99, 5.11],
    [2.97, 3.61, 4.00, 4.28, 4.49, 4.67, 4.82, 4.96, 5.07],
    [2.96, 3.59, 3.98, 4.25, 4.47, 4.65, 4.79, 4.92, 5.04],
    [2.95, 3.58, 3.96, 4.23, 4.45, 4.62, 4.77, 4.90, 5.01], // df = 20
    [2.92, 3.53, 3.90, 4.17, 4.37, 4.54, 4.68, 4.81, 4.92],
    [2.89, 3.49, 3.85, 4.10, 4.30, 4.46, 4.60, 4.72, 4.82],
    [2.86, 3.44, 3.79, 4.04, 4.23, 4.39, 4.52, 4.63, 4.73],
    [2.83, 3.40, 3.74, 3.98, 4.16, 4.31, 4.44, 4.55, 4.65], // df = 60
    [2.80, 3.36, 3.68, 3.92, 4.10, 4.24, 4.36, 4.47, 4.56],
    [2.77, 3.31, 3.63, 3.86, 4.03, 4.17, 4.29, 4.39, 4.47], // df = inf
];

/// Studentized-range quantile q(0.05; k, df), linearly interpolated between
/// tabulated df rows (in 1/df beyond the last finite row).
pub fn q_quantile(k: usize, df: usize) -> Result<f64, StatsError> {
    if !(2..=10).contains(&k) {
        return Err(StatsError::TooFewGroups { need: 2, got: k });
    }
    if df < 5 {
        return Err(StatsError::DfTooSmall(df));
    }
    let col = k - 2;
    let pos = Q_DF_ROWS.iter().position(|&r| df <= r).unwrap();
    if Q_DF_ROWS[pos] == df {
        return Ok(Q_TABLE[pos][col]);
    }
    let (lo_df, hi_df) = (Q_DF_ROWS[pos - 1], Q_DF_ROWS[pos]);
    let (lo_q, hi_q) = (Q_TABLE[pos - 1][col], Q_TABLE[pos][col]);
    let frac = if hi_df == usize::MAX {
        // Interpolate toward infinity in 1/df.
        let lo_inv = 1.0 / lo_df as f64;
        (lo_inv - 1.0 / df as f64) / lo_inv
    } else {
        (df - lo_df) as f64 / (hi_df - lo_df) as f64
    };
    Ok(lo_q + (hi_q - lo_q) * frac)
}

/// One pairwise comparison between groups `a` and `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    /// mean(a) - mean(b).
    pub difference: f64,
    pub abs_difference: f64,
    /// Honestly-significant-difference threshold for this pair.
    pub threshold: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub q: f64,
    pub pairs: Vec<PairComparison>,
    /// Rank per group, aligned with the input order: 1 is the lowest mean;
    /// groups that are statistically indistinguishable share a rank.
    pub ranking: Vec<usize>,
}

impl TukeyResult {
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairComparison> {
        self.pairs
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

/// Tukey-Kramer post-hoc test. `ms_within` and `df_within` come from the
/// preceding ANOVA; unequal group sizes use the Kramer form of the
/// standard error, which reduces to plain Tukey for equal sizes.
pub fn tukey_kramer(
    groups: &[GroupSummary],
    ms_within: f64,
    df_within: usize,
) -> Result<TukeyResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups {
            need: 2,
            got: groups.len(),
        });
    }
    let q = q_quantile(groups.len(), df_within)?;
    let mut pairs = Vec::new();
    let mut significant = vec![vec![false; groups.len()]; groups.len()];
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            let (gi, gj) = (&groups[i], &groups[j]);
            let se = (ms_within / 2.0 * (1.0 / gi.count as f64 + 1.0 / gj.count as f64)).sqrt();
            let threshold = q * se;
            let difference = gi.mean - gj.mean;
            let sig = difference.abs() > threshold;
            significant[i][j] = sig;
            significant[j][i] = sig;
            pairs.push(PairComparison {
                a: gi.label.clone(),
                b: gj.label.clone(),
                difference,
                abs_difference: difference.abs(),
                threshold,
                significant: sig,
            });
        }
    }
    // Rank 1 is the best (lowest mean); a group is pushed down one rank for
    // every group that is both significantly different and lower, so ties
    // share the better rank.
    let ranking = (0..groups.len())
        .map(|i| {
            1 + (0..groups.len())
                .filter(|&j| j != i && significant[i][j] && groups[j].mean < groups[i].mean)
                .count()
        })
        .collect();
    Ok(TukeyResult { q, pairs, ranking })
}
