//! One-way ANOVA from group summaries, with the F critical value computed
//! from the regularized incomplete beta function.

use serde::{Deserialize, Serialize};

use super::{GroupSummary, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub ss_between: f64,
    pub ss_within: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ms_between: f64,
    pub ms_within: f64,
    pub f_stat: f64,
    pub p_value: f64,
    /// Upper 5% quantile of F(df_between, df_within).
    pub f_critical: f64,
    /// Strictly by f_stat >= f_critical.
    pub significant: bool,
}

/// One-way ANOVA over two or more summarized groups (unequal sizes allowed).
pub fn anova(groups: &[GroupSummary]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups {
            need: 2,
            got: groups.len(),
        });
    }
    for g in groups {
        if g.count < 2 {
            return Err(StatsError::GroupTooSmall(g.label.clone()));
        }
    }
    let total_n: usize = groups.iter().map(|g| g.count).sum();
    let grand_mean = groups.iter().map(|g| g.mean * g.count as f64).sum::<f64>() / total_n as f64;
    let ss_between: f64 = groups
        .iter()
        .map(|g| g.count as f64 * (g.mean - grand_mean).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| (g.count as f64 - 1.0) * g.variance)
        .sum();
    let df_between = groups.len() - 1;
    let df_within = total_n - groups.len();
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let f_stat = if ms_within == 0.0 {
        if ms_between == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ms_between / ms_within
    };
    let f_critical = f_critical(0.05, df_between, df_within);
    let p_value = f_sf(f_stat, df_between as f64, df_within as f64);
    Ok(AnovaResult {
        ss_between,
        ss_within,
        df_between,
        df_within,
        ms_between,
        ms_within,
        f_stat,
        p_value,
        f_critical,
        significant: f_stat >= f_critical,
    })
}

/// Upper `alpha` critical value of the F distribution, found by bisecting
/// the survival function.
pub fn f_critical(alpha: f64, df1: usize, df2: usize) -> f64 {
    let (d1, d2) = (df1 as f64, df2 as f64);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while f_sf(hi, d1, d2) > alpha {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_sf(mid, d1, d2) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Survival function P(F > x) for F(d1, d2).
fn f_sf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if !x.is_finite() {
        return 0.0;
    }
    // P(F > x) = I_{d2/(d2 + d1 x)}(d2/2, d1/2), computed directly so tiny
    // tail probabilities keep their precision.
    reg_inc_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0)
}

/// Regularized incomplete beta function I_x(a, b).
fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(x, a, b) / a
    } else {
        1.0 - front * beta_cf(1.0 - x, b, a) / b
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Log-gamma via the Lanczos approximation.
#[allow(clippy::excessive_precision)]
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(label: &str, count: usize, mean: f64, variance: f64) -> GroupSummary {
        GroupSummary {
            label: label.into(),
            count,
            mean,
            variance,
        }
    }

    #[test]
    fn reference_success_rate_comparison() {
        let groups = [
            group("reews", 25, 93.0, 183.33),
            group("smwso", 25, 98.0, 47.92),
            group("smwsh", 25, 88.52, 311.43),
        ];
        let a = anova(&groups).unwrap();
        assert!((a.ss_between - 1124.51).abs() < 0.5);
        assert!((a.ss_within - 13024.24).abs() < 0.5);
        assert!((a.f_stat - 3.11).abs() < 0.01);
        assert_eq!((a.df_between, a.df_within), (2, 72));
        assert!((a.f_critical - 3.12).abs() < 0.01);
        assert!((a.p_value - 0.05).abs() < 0.005);
        assert!(!a.significant);
    }

    #[test]
    fn identical_groups_give_zero_f() {
        let groups = [group("a", 10, 5.0, 1.0), group("b", 10, 5.0, 1.0)];
        let a = anova(&groups).unwrap();
        assert_eq!(a.f_stat, 0.0);
        assert!(!a.significant);
    }

    #[test]
    fn reference_energy_comparison_is_significant() {
        let groups = [
            group("smwso", 16, 4.51, 8.41e-31),
            group("smwsh", 16, 2.26, 8.41e-31),
            group("reews", 16, 8.24, 2.72),
        ];
        let a = anova(&groups).unwrap();
        assert!((a.f_stat - 161.17).abs() / 161.17 < 0.005);
        assert!((a.f_critical - 3.20).abs() < 0.01);
        assert!(a.significant);
        assert!(a.p_value < 1e-15);
    }

    #[test]
    fn too_small_groups_are_rejected() {
        assert!(anova(&[group("a", 10, 5.0, 1.0)]).is_err());
        assert!(anova(&[group("a", 1, 5.0, 0.0), group("b", 10, 5.0, 1.0)]).is_err());
    }

    #[test]
    fn f_critical_matches_reference_points() {
        // Spot values of the F table at alpha = 0.05.
        for (df1, df2, expect) in [
            (2, 72, 3.1239),
            (2, 45, 3.2043),
            (1, 10, 4.9646),
            (3, 30, 2.9223),
            (5, 100, 2.3053),
        ] {
            let got = f_critical(0.05, df1, df2);
            assert!(
                (got - expect).abs() < 1.5e-3,
                "F(0.05; {df1}, {df2}) = {got}, want {expect}"
            );
        }
    }

    #[test]
    fn summary_and_raw_sample_routes_agree() {
        // Construct raw samples realizing each summary exactly: mean m and
        // sample variance v via m +- sqrt(v (n-1) / 2) on two elements.
        let spec = [(12usize, 7.5, 3.2), (9, 5.0, 1.7), (15, 9.25, 0.4)];
        let mut summaries = Vec::new();
        let mut raw_summaries = Vec::new();
        for (i, &(n, m, v)) in spec.iter().enumerate() {
            summaries.push(group(&format!("g{i}"), n, m, v));
            let spread = (v * (n as f64 - 1.0) / 2.0).sqrt();
            let mut xs = vec![m; n];
            xs[0] = m + spread;
            xs[1] = m - spread;
            raw_summaries.push(GroupSummary::from_samples(&format!("g{i}"), &xs).unwrap());
        }
        let a = anova(&summaries).unwrap();
        let b = anova(&raw_summaries).unwrap();
        assert!((a.ss_between - b.ss_between).abs() < 1e-9);
        assert!((a.ss_within - b.ss_within).abs() < 1e-9);
        assert!((a.f_stat - b.f_stat).abs() < 1e-9);
    }
}
