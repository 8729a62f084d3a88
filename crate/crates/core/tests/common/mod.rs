//! Independent oracles shared by the integration tests. Everything here is
//! deliberately written from scratch (no calls into the crate's numeric
//! paths) so agreement with the library is meaningful.

use ndarray::{Array2, Array3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ratings::dataset::{LongEntry, LongRatings, RatingDataset};
use ratings::params::{DsParams, Params};

/// A small rating problem in plain arrays: `ratings[i]` lists (rater, rating)
/// pairs, all 0-based.
pub struct SmallProblem {
    pub items: usize,
    pub raters: usize,
    pub categories: usize,
    pub ratings: Vec<Vec<(usize, usize)>>,
}

impl SmallProblem {
    pub fn dataset(&self) -> RatingDataset {
        // explicit label vectors keep rater indices aligned with the oracle's
        // theta even when some raters never appear
        let entries: Vec<LongEntry> = self
            .ratings
            .iter()
            .enumerate()
            .flat_map(|(i, list)| {
                list.iter().map(move |&(rater, rating)| LongEntry { item: i, rater, rating })
            })
            .collect();
        RatingDataset::from_long(
            LongRatings::new(
                entries,
                self.categories,
                (1..=self.items as i64).collect(),
                (1..=self.raters as i64).collect(),
            )
            .unwrap(),
        )
    }
}

/// Enumerate all K^I latent-class configurations and sum the z-explicit
/// likelihood: sum_z prod_i pi[z_i] prod_{(j,y) in item i} theta[j, z_i, y].
pub fn enumeration_log_likelihood(
    problem: &SmallProblem,
    pi: &[f64],
    theta: &Array3<f64>,
) -> f64 {
    let k = problem.categories;
    let mut totals = 0.0f64;
    let mut assignment = vec![0usize; problem.items];
    loop {
        let mut prob = 1.0;
        for (i, &z) in assignment.iter().enumerate() {
            prob *= pi[z];
            for &(j, y) in &problem.ratings[i] {
                prob *= theta[[j, z, y]];
            }
        }
        totals += prob;
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == problem.items {
                return totals.ln();
            }
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// Brute-force Bayes for one item: Pr(z_i = k | y) by enumerating the joint
/// Pr(y_i, z_i = k) directly.
pub fn enumeration_conditional_z(
    problem: &SmallProblem,
    pi: &[f64],
    theta: &Array3<f64>,
) -> Array2<f64> {
    let k = problem.categories;
    let mut out = Array2::zeros((problem.items, k));
    for i in 0..problem.items {
        let mut joint = vec![0.0f64; k];
        for (z, slot) in joint.iter_mut().enumerate() {
            let mut p = pi[z];
            for &(j, y) in &problem.ratings[i] {
                p *= theta[[j, z, y]];
            }
            *slot = p;
        }
        let total: f64 = joint.iter().sum();
        for z in 0..k {
            out[[i, z]] = joint[z] / total;
        }
    }
    out
}

/// Random strictly-positive simplex.
pub fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

pub fn random_ds_params(rng: &mut ChaCha8Rng, raters: usize, categories: usize) -> Params {
    let pi = random_simplex(rng, categories);
    let mut theta = Array3::zeros((raters, categories, categories));
    for j in 0..raters {
        for a in 0..categories {
            let row = random_simplex(rng, categories);
            for (b, &v) in row.iter().enumerate() {
                theta[[j, a, b]] = v;
            }
        }
    }
    Params::DawidSkene(DsParams { pi, theta })
}

/// Random small problem with every item rated at least once.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    max_items: usize,
    max_raters: usize,
    max_categories: usize,
) -> SmallProblem {
    let items = rng.random_range(1..=max_items);
    let raters = rng.random_range(1..=max_raters);
    let categories = rng.random_range(2..=max_categories);
    let ratings = (0..items)
        .map(|_| {
            let n = rng.random_range(1..=raters + 1);
            (0..n)
                .map(|_| {
                    (rng.random_range(0..raters), rng.random_range(0..categories))
                })
                .collect()
        })
        .collect();
    SmallProblem { items, raters, categories, ratings }
}

/// Central finite differences of a scalar function.
pub fn finite_difference_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// Lanczos log-gamma, independent of the library's libm route.
pub fn ln_gamma_oracle(x: f64) -> f64 {
    // g = 7, n = 9 Lanczos coefficients
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
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
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_oracle(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn dirichlet_lpdf_oracle(x: &[f64], alpha: &[f64]) -> f64 {
    let alpha_sum: f64 = alpha.iter().sum();
    let mut lp = ln_gamma_oracle(alpha_sum);
    for (&xi, &ai) in x.iter().zip(alpha) {
        lp += (ai - 1.0) * xi.ln() - ln_gamma_oracle(ai);
    }
    lp
}

pub fn beta_lpdf_oracle(p: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * p.ln() + (b - 1.0) * (1.0 - p).ln() + ln_gamma_oracle(a + b)
        - ln_gamma_oracle(a)
        - ln_gamma_oracle(b)
}
