//! Convergence diagnostics: split R-hat and effective sample size.

use serde::{Deserialize, Serialize};

/// Per-parameter convergence summary for a multi-chain run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub parameter_names: Vec<String>,
    /// Split R-hat per parameter; +inf marks a degenerate (zero within-chain
    /// variance) parameter.
    pub r_hat: Vec<f64>,
    pub ess: Vec<f64>,
    /// Parameters whose chains had (numerically) zero variance.
    pub degenerate: Vec<bool>,
    pub divergences: usize,
    pub total_draws: usize,
    /// Post-warmup mean acceptance probability per chain.
    pub acceptance: Vec<f64>,
    pub warnings: Vec<String>,
}

const VAR_FLOOR: f64 = 1e-30;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn split_halves<'a>(chains: &[&'a [f64]]) -> Vec<&'a [f64]> {
    let mut halves = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let mid = chain.len() / 2;
        halves.push(&chain[..mid]);
        halves.push(&chain[chain.len() - mid..]);
    }
    halves
}

/// Split R-hat: each chain is halved, and the ratio of pooled to within-chain
/// variance is computed across the half-chains. Returns +inf when the
/// within-chain variance is zero (constant chains).
pub fn split_rhat(chains: &[&[f64]]) -> f64 {
    if chains.len() < 2 || chains.iter().any(|c| c.len() < 4) {
        return f64::NAN;
    }
    let halves = split_halves(chains);
    let m = halves.len() as f64;
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let grand = mean(&means);
    let between: f64 =
        means.iter().map(|&cm| (cm - grand) * (cm - grand)).sum::<f64>() * n / (m - 1.0);
    let within: f64 = halves
        .iter()
        .zip(&means)
        .map(|(h, &cm)| sample_var(h, cm))
        .sum::<f64>()
        / m;
    if within < VAR_FLOOR {
        return f64::INFINITY;
    }
    let var_plus = (n - 1.0) / n * within + between / n;
    // floor at 1: finite-sample noise can push the raw ratio slightly below
    (var_plus / within).sqrt().max(1.0)
}

/// Effective sample size via the initial monotone sequence estimator on split
/// chains, combined across chains as in the usual multi-chain formulation.
/// Capped at the total number of draws; returns 0 for constant chains.
pub fn effective_sample_size(chains: &[&[f64]]) -> f64 {
    if chains.is_empty() || chains.iter().any(|c| c.len() < 4) {
        return f64::NAN;
    }
    let halves = split_halves(chains);
    let m = halves.len();
    let n = halves[0].len();
    let total = (m * n) as f64;

    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let vars: Vec<f64> = halves.iter().zip(&means).map(|(h, &cm)| sample_var(h, cm)).collect();
    let within = mean(&vars);
    if within < VAR_FLOOR {
        return 0.0;
    }
    let grand = mean(&means);
    let between_over_n = if m > 1 {
        means.iter().map(|&cm| (cm - grand) * (cm - grand)).sum::<f64>() / (m as f64 - 1.0)
    } else {
        0.0
    };
    let var_plus = (n as f64 - 1.0) / n as f64 * within + between_over_n;

    // per-chain autocovariances at each lag, averaged across chains
    let autocov = |h: &[f64], cm: f64, t: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..h.len() - t {
            s += (h[i] - cm) * (h[i + t] - cm);
        }
        s / h.len() as f64
    };

    let mut tau = 1.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 1;
    while t + 1 < n {
        let rho = |lag: usize| -> f64 {
            let acov = halves
                .iter()
                .zip(&means)
                .map(|(h, &cm)| autocov(h, cm, lag))
                .sum::<f64>()
                / m as f64;
            1.0 - (within - acov) / var_plus
        };
        let pair = rho(t) + rho(t + 1);
        if pair <= 0.0 {
            break;
        }
        // enforce monotone decrease of the paired sums
        let pair = pair.min(prev_pair);
        prev_pair = pair;
        tau += 2.0 * pair;
        t += 2;
    }
    (total / tau).min(total)
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let q = q.clamp(0.0, 1.0);
    let h = (sorted.len() as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
