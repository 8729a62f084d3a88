//! Marginalized log-likelihoods, log-priors, and gradients.
//!
//! The latent class of each item is summed out, so the likelihood is a product
//! over items (or over distinct rating patterns, weighted by their tallies) of
//! a K-term mixture. All sums over classes run through log-sum-exp, and the
//! per-(group, class) terms are computed once and shared between the
//! likelihood value, its gradient, and the conditional class probabilities.

use ndarray::{Array2, Array3};

use crate::dataset::{RatingData, RatingDataset};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Prior};
use crate::params::{self, Params};

/// One likelihood group: an item's ratings (weight 1) or a grouped pattern
/// (weight = tally).
#[derive(Debug, Clone)]
pub(crate) struct Group {
    pub weight: f64,
    pub ratings: Vec<(usize, usize)>,
}

/// Dataset view shared by the likelihood, EM, and the conditional-class
/// computations: a list of weighted rating groups.
#[derive(Debug, Clone)]
pub struct LikelihoodData {
    categories: usize,
    raters: usize,
    groups: Vec<Group>,
    total_weight: f64,
    from_grouped: bool,
}

impl LikelihoodData {
    pub fn new(dataset: &RatingDataset) -> Result<Self> {
        let (groups, raters, categories, from_grouped) = match dataset.data() {
            RatingData::Long(l) => {
                let groups = l
                    .by_item()
                    .into_iter()
                    .map(|ratings| Group { weight: 1.0, ratings })
                    .collect::<Vec<_>>();
                (groups, l.raters(), l.categories(), false)
            }
            RatingData::Wide(w) => {
                let groups = w
                    .rows()
                    .iter()
                    .map(|row| Group {
                        weight: 1.0,
                        ratings: row
                            .iter()
                            .enumerate()
                            .filter_map(|(j, cell)| cell.map(|y| (j, y)))
                            .collect(),
                    })
                    .collect::<Vec<_>>();
                (groups, w.raters(), w.categories(), false)
            }
            RatingData::Grouped(g) => {
                let groups = g
                    .patterns()
                    .iter()
                    .zip(g.tallies())
                    .map(|(pattern, &tally)| Group {
                        weight: tally as f64,
                        ratings: pattern.iter().copied().enumerate().collect(),
                    })
                    .collect::<Vec<_>>();
                (groups, g.raters(), g.categories(), true)
            }
        };
        let total_weight = groups.iter().map(|g| g.weight).sum();
        Ok(Self { categories, raters, groups, total_weight, from_grouped })
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn from_grouped(&self) -> bool {
        self.from_grouped
    }

    /// Group weights (tallies for grouped data, 1 per item otherwise).
    pub fn weights(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.weight).collect()
    }

    pub(crate) fn groups(&self) -> &[Group] {
        &self.groups
    }

    fn check_params(&self, params: &Params) -> Result<()> {
        let layout = params.layout();
        if layout.categories < self.categories {
            return Err(Error::shape(format!(
                "data contains rating {} but parameters cover {} categories",
                self.categories, layout.categories
            )));
        }
        if layout.raters < self.raters {
            return Err(Error::shape(format!(
                "data contains rater {} but parameters cover {} raters",
                self.raters, layout.raters
            )));
        }
        Ok(())
    }
}

/// Marginal likelihood evaluation: total log-likelihood, the per-group
/// marginal log-likelihood terms, and the per-group conditional class
/// probabilities (the mixture responsibilities).
pub(crate) struct Marginal {
    pub log_lik: f64,
    pub group_log_lik: Vec<f64>,
    pub resp: Array2<f64>,
}

pub(crate) fn evaluate(
    pi: &[f64],
    log_theta: &Array3<f64>,
    data: &LikelihoodData,
) -> Result<Marginal> {
    let k = pi.len();
    let log_pi: Vec<f64> = pi.iter().map(|&p| p.ln()).collect();
    let mut resp = Array2::zeros((data.groups.len(), k));
    let mut group_log_lik = Vec::with_capacity(data.groups.len());
    let mut log_lik = 0.0;
    let mut scores = vec![0.0f64; k];
    for (g, group) in data.groups.iter().enumerate() {
        for c in 0..k {
            let mut a = log_pi[c];
            for &(j, y) in &group.ratings {
                a += log_theta[[j, c, y]];
            }
            scores[c] = a;
        }
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::numerical(format!(
                "all class scores vanished for group {}",
                g + 1
            )));
        }
        let sum: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
        let lse = max + sum.ln();
        for c in 0..k {
            resp[[g, c]] = (scores[c] - lse).exp();
        }
        group_log_lik.push(lse);
        log_lik += group.weight * lse;
    }
    Ok(Marginal { log_lik, group_log_lik, resp })
}

fn log_theta_of(params: &Params) -> Array3<f64> {
    params.error_matrices().mapv(f64::ln)
}

/// Marginalized log-likelihood for any dataset view.
pub fn log_likelihood(params: &Params, data: &LikelihoodData) -> Result<f64> {
    data.check_params(params)?;
    Ok(evaluate(params.pi(), &log_theta_of(params), data)?.log_lik)
}

/// Marginalized log-likelihood of long-format data:
/// sum over items of log sum_k pi_k prod_n theta[j_n, k, y_n].
pub fn log_likelihood_long(params: &Params, dataset: &RatingDataset) -> Result<f64> {
    if dataset.as_long().is_none() {
        return Err(Error::unsupported("log_likelihood_long needs long data"));
    }
    log_likelihood(params, &LikelihoodData::new(dataset)?)
}

/// Grouped form: sum over patterns of tally * log sum_k pi_k prod_j theta[j, k, y_lj].
pub fn log_likelihood_grouped(params: &Params, dataset: &RatingDataset) -> Result<f64> {
    if dataset.as_grouped().is_none() {
        return Err(Error::unsupported("log_likelihood_grouped needs grouped data"));
    }
    log_likelihood(params, &LikelihoodData::new(dataset)?)
}

pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub(crate) fn dirichlet_lpdf(x: &[f64], alpha: &[f64]) -> f64 {
    let alpha_sum: f64 = alpha.iter().sum();
    let mut lp = ln_gamma(alpha_sum);
    for (&xi, &ai) in x.iter().zip(alpha) {
        lp += (ai - 1.0) * xi.ln() - ln_gamma(ai);
    }
    lp
}

pub(crate) fn beta_lpdf(p: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * p.ln() + (b - 1.0) * (1.0 - p).ln() + ln_gamma(a + b)
        - ln_gamma(a)
        - ln_gamma(b)
}

const LN_2PI: f64 = 1.8378770664093453;

pub(crate) fn normal_lpdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * LN_2PI - sd.ln() - 0.5 * z * z
}

/// Half-normal(0, 1) density on x > 0.
pub(crate) fn half_normal_lpdf(x: f64) -> f64 {
    std::f64::consts::LN_2 - 0.5 * LN_2PI - 0.5 * x * x
}

/// Log prior density, normalizing constants included so values are comparable
/// across runs and models.
pub fn log_prior(params: &Params, spec: &ModelSpec) -> Result<f64> {
    params.validate()?;
    match (params, &spec.prior) {
        (Params::DawidSkene(p), Prior::Dirichlet(prior)) => {
            let (j, k, _) = p.theta.dim();
            if prior.beta.dim() != (j, k, k) || prior.alpha.len() != k {
                return Err(Error::shape("prior dimensions do not match parameters"));
            }
            let mut lp = dirichlet_lpdf(&p.pi, &prior.alpha);
            for r in 0..j {
                for a in 0..k {
                    let row: Vec<f64> = (0..k).map(|b| p.theta[[r, a, b]]).collect();
                    let alpha: Vec<f64> = (0..k).map(|b| prior.beta[[r, a, b]]).collect();
                    lp += dirichlet_lpdf(&row, &alpha);
                }
            }
            Ok(lp)
        }
        (Params::ClassConditional(p), Prior::ClassConditional(prior)) => {
            let (j, k) = p.accuracy.dim();
            if prior.beta1.len() != k || prior.alpha.len() != k {
                return Err(Error::shape("prior dimensions do not match parameters"));
            }
            let mut lp = dirichlet_lpdf(&p.pi, &prior.alpha);
            for r in 0..j {
                for a in 0..k {
                    lp += beta_lpdf(p.accuracy[[r, a]], prior.beta1[a], prior.beta2[a]);
                }
            }
            Ok(lp)
        }
        (Params::Hierarchical(p), Prior::Hierarchical(prior)) => {
            let (j, k, _) = p.gamma.dim();
            if prior.alpha.len() != k {
                return Err(Error::shape("prior dimensions do not match parameters"));
            }
            let mut lp = dirichlet_lpdf(&p.pi, &prior.alpha);
            for a in 0..k {
                for b in 0..k {
                    lp += normal_lpdf(p.mu[[a, b]], 0.0, 1.0);
                    lp += half_normal_lpdf(p.sigma[[a, b]]);
                }
            }
            for r in 0..j {
                for a in 0..k {
                    for b in 0..k {
                        lp += normal_lpdf(p.gamma[[r, a, b]], p.mu[[a, b]], p.sigma[[a, b]]);
                    }
                }
            }
            Ok(lp)
        }
        _ => Err(Error::shape("parameter kind does not match the model prior")),
    }
}

/// Log posterior density (up to the marginal-likelihood constant). The grouped
/// likelihood form is used automatically when the dataset is grouped.
pub fn log_posterior(params: &Params, spec: &ModelSpec, dataset: &RatingDataset) -> Result<f64> {
    let data = LikelihoodData::new(dataset)?;
    Ok(log_prior(params, spec)? + log_likelihood(params, &data)?)
}

/// Expected-count sufficient statistics under the conditional class
/// probabilities: per-class weight, per-(rater, class, rating) weighted
/// counts, and their per-(rater, class) totals.
pub(crate) struct SoftCounts {
    pub class_weight: Vec<f64>,
    pub rating_counts: Array3<f64>,
    pub rating_totals: Array2<f64>,
}

pub(crate) fn soft_counts(data: &LikelihoodData, resp: &Array2<f64>, k: usize, j: usize) -> SoftCounts {
    let mut class_weight = vec![0.0; k];
    let mut rating_counts = Array3::zeros((j, k, k));
    let mut rating_totals = Array2::zeros((j, k));
    for (g, group) in data.groups().iter().enumerate() {
        for c in 0..k {
            let w = group.weight * resp[[g, c]];
            class_weight[c] += w;
            for &(r, y) in &group.ratings {
                rating_counts[[r, c, y]] += w;
                rating_totals[[r, c]] += w;
            }
        }
    }
    SoftCounts { class_weight, rating_counts, rating_totals }
}

/// Log posterior and gradient in unconstrained coordinates. When
/// `include_jacobian` is set the log-Jacobian of the constraining transform is
/// added, giving the density the sampler targets; without it the value is the
/// constrained-space posterior used for mode finding.
pub(crate) fn value_and_grad(
    v: &[f64],
    spec: &ModelSpec,
    data: &LikelihoodData,
    include_jacobian: bool,
) -> Result<(f64, Vec<f64>)> {
    let layout = crate::params::Layout::new(spec.variant, spec.categories, spec.raters);
    let params = params::from_unconstrained(&layout, v)?;
    data.check_params(&params)?;
    let k = spec.categories;
    let j = spec.raters;
    let kf = k as f64;
    let pi = params.pi();
    let theta = params.error_matrices();
    let log_theta = theta.mapv(f64::ln);
    let marginal = evaluate(pi, &log_theta, data)?;
    let counts = soft_counts(data, &marginal.resp, k, j);

    let mut value = marginal.log_lik + log_prior(&params, spec)?;
    if include_jacobian {
        value += params::log_jacobian(&params);
    }

    let mut grad = Vec::with_capacity(layout.unconstrained_dim());
    let alpha = spec.alpha();
    let alpha_excess: f64 = alpha.iter().map(|a| a - 1.0).sum();
    let total = data.total_weight + alpha_excess;
    for a in 0..k - 1 {
        let mut g = (counts.class_weight[a] + alpha[a] - 1.0) - pi[a] * total;
        if include_jacobian {
            g += 1.0 - kf * pi[a];
        }
        grad.push(g);
    }

    match (&params, &spec.prior) {
        (Params::DawidSkene(p), Prior::Dirichlet(prior)) => {
            for r in 0..j {
                for a in 0..k {
                    let beta_excess: f64 =
                        (0..k).map(|b| prior.beta[[r, a, b]] - 1.0).sum();
                    let row_total = counts.rating_totals[[r, a]] + beta_excess;
                    for b in 0..k - 1 {
                        let mut g = (counts.rating_counts[[r, a, b]] + prior.beta[[r, a, b]]
                            - 1.0)
                            - p.theta[[r, a, b]] * row_total;
                        if include_jacobian {
                            g += 1.0 - kf * p.theta[[r, a, b]];
                        }
                        grad.push(g);
                    }
                }
            }
        }
        (Params::ClassConditional(p), Prior::ClassConditional(prior)) => {
            for r in 0..j {
                for a in 0..k {
                    let acc = p.accuracy[[r, a]];
                    let hits = counts.rating_counts[[r, a, a]];
                    let misses = counts.rating_totals[[r, a]] - hits;
                    let mut g = (hits + prior.beta1[a] - 1.0) * (1.0 - acc)
                        - (misses + prior.beta2[a] - 1.0) * acc;
                    if include_jacobian {
                        g += 1.0 - 2.0 * acc;
                    }
                    grad.push(g);
                }
            }
        }
        (Params::Hierarchical(p), Prior::Hierarchical(_)) => {
            // mu block
            for a in 0..k {
                for b in 0..k {
                    let mut g = -p.mu[[a, b]];
                    let var = p.sigma[[a, b]] * p.sigma[[a, b]];
                    for r in 0..j {
                        g += (p.gamma[[r, a, b]] - p.mu[[a, b]]) / var;
                    }
                    grad.push(g);
                }
            }
            // log-sigma block
            for a in 0..k {
                for b in 0..k {
                    let sigma = p.sigma[[a, b]];
                    let var = sigma * sigma;
                    let mut g = -var;
                    for r in 0..j {
                        let z = p.gamma[[r, a, b]] - p.mu[[a, b]];
                        g += -1.0 + z * z / var;
                    }
                    if include_jacobian {
                        g += 1.0;
                    }
                    grad.push(g);
                }
            }
            // gamma block
            for r in 0..j {
                for a in 0..k {
                    for b in 0..k {
                        let var = p.sigma[[a, b]] * p.sigma[[a, b]];
                        let g = counts.rating_counts[[r, a, b]]
                            - theta[[r, a, b]] * counts.rating_totals[[r, a]]
                            - (p.gamma[[r, a, b]] - p.mu[[a, b]]) / var;
                        grad.push(g);
                    }
                }
            }
        }
        _ => return Err(Error::shape("parameter kind does not match the model prior")),
    }

    if !value.is_finite() {
        return Err(Error::numerical("log posterior is not finite"));
    }
    if let Some(idx) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::numerical_at("gradient is not finite", idx));
    }
    Ok((value, grad))
}

/// Public entry point matching the sampling target: log posterior plus the
/// transform log-Jacobian, with its exact gradient.
pub fn log_posterior_unconstrained(
    v: &[f64],
    spec: &ModelSpec,
    dataset: &RatingDataset,
) -> Result<(f64, Vec<f64>)> {
    let data = LikelihoodData::new(dataset)?;
    value_and_grad(v, spec, &data, true)
}
