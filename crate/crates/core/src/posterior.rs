//! Inference on fitted models: conditional class probabilities, point
//! estimates, credible intervals, posterior predictive simulation, and WAIC.
//!
//! Class probabilities marginalize the latent classes by conditioning: each
//! posterior draw yields exact conditional probabilities Pr(z_i = k | theta*,
//! pi*, y), and averaging those conditionals across draws estimates
//! Pr(z_i = k | y) with lower variance than sampling z directly would.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::RatingDataset;
use crate::diagnostics::quantile;
use crate::error::{Error, Result};
use crate::fit::{FitMethod, FitResult};
use crate::likelihood::{self, LikelihoodData};
use crate::mcmc::PosteriorDraws;
use crate::model::Variant;
use crate::params::Params;

/// Conditional class probabilities at fixed parameters: row i is
/// Pr(z_i = . | params, y), computed in log space and renormalized. Grouped
/// data is expanded back to one row per item (pattern-major, matching
/// `to_long`).
pub fn conditional_z(params: &Params, dataset: &RatingDataset) -> Result<Array2<f64>> {
    let data = LikelihoodData::new(dataset)?;
    let resp = conditional_weights(params, &data)?;
    Ok(expand_rows(&resp, &data))
}

/// Per-group conditional probabilities (one row per item, or per pattern for
/// grouped data).
pub(crate) fn conditional_weights(params: &Params, data: &LikelihoodData) -> Result<Array2<f64>> {
    let log_theta = params.error_matrices().mapv(f64::ln);
    Ok(likelihood::evaluate(params.pi(), &log_theta, data)?.resp)
}

fn expand_rows(rows: &Array2<f64>, data: &LikelihoodData) -> Array2<f64> {
    if !data.from_grouped() {
        return rows.clone();
    }
    let weights = data.weights();
    let total: usize = weights.iter().map(|&w| w as usize).sum();
    let mut out = Array2::zeros((total, rows.ncols()));
    let mut item = 0;
    for (g, &w) in weights.iter().enumerate() {
        for _ in 0..w as usize {
            out.row_mut(item).assign(&rows.row(g));
            item += 1;
        }
    }
    out
}

/// The dataset a fit actually conditioned on (single-rater form for the
/// homogeneous variant).
pub(crate) fn fit_dataset(fit_variant: Variant, dataset: &RatingDataset) -> Result<RatingDataset> {
    if fit_variant == Variant::Homogeneous {
        crate::model::homogenize(dataset)
    } else {
        Ok(dataset.clone())
    }
}

/// Rao-Blackwellized class-probability table: the mean over posterior draws of
/// the conditional class probabilities.
pub(crate) fn mean_conditional_z(
    draws: &PosteriorDraws,
    data: &LikelihoodData,
) -> Result<Array2<f64>> {
    let mut acc: Option<Array2<f64>> = None;
    let mut count = 0usize;
    for chain in 0..draws.n_chains() {
        for draw in 0..draws.draws_per_chain() {
            let params = draws.params_at(chain, draw)?;
            let resp = conditional_weights(&params, data)?;
            match &mut acc {
                Some(a) => *a += &resp,
                None => acc = Some(resp),
            }
            count += 1;
        }
    }
    let mut mean = acc.ok_or_else(|| Error::State("fit holds no draws".into()))?;
    mean /= count as f64;
    Ok(expand_rows(&mean, data))
}

/// Class-probability table for a fit: Monte-Carlo average of the conditional
/// probabilities for MCMC fits, the conditional at the mode for MAP fits.
pub fn class_probabilities(fit: &FitResult, dataset: &RatingDataset) -> Result<Array2<f64>> {
    let dataset = fit_dataset(fit.spec.variant, dataset)?;
    let data = LikelihoodData::new(&dataset)?;
    match fit.method {
        FitMethod::Mcmc => {
            let draws = fit.draws.as_ref().ok_or_else(|| {
                Error::State("MCMC fit holds no draws".into())
            })?;
            mean_conditional_z(draws, &data)
        }
        FitMethod::Optim => {
            let mode = fit.mode.as_ref().ok_or_else(|| {
                Error::State("optimisation fit holds no mode".into())
            })?;
            let resp = conditional_weights(&mode.params, &data)?;
            Ok(expand_rows(&resp, &data))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Pi,
    Theta,
    Z,
    P,
}

impl std::str::FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pi" => Ok(Which::Pi),
            "theta" => Ok(Which::Theta),
            "z" => Ok(Which::Z),
            "p" => Ok(Which::P),
            other => Err(Error::domain(format!("unknown parameter group '{other}'"))),
        }
    }
}

/// Named values for a continuous parameter block.
#[derive(Debug, Clone)]
pub struct NamedValues {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Set when the block was derived rather than sampled directly
    /// (e.g. error matrices of a class-conditional fit).
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub enum PointEstimate {
    Continuous(NamedValues),
    /// Most probable class per item, 1-based.
    Classes(Vec<usize>),
}

fn theta_names(raters: usize, categories: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(raters * categories * categories);
    for r in 1..=raters {
        for a in 1..=categories {
            for b in 1..=categories {
                names.push(format!("theta[{r},{a},{b}]"));
            }
        }
    }
    names
}

/// Draw matrix (pooled across chains) for a continuous block, deriving error
/// matrices on demand for variants that do not sample them directly.
fn block_draws(fit: &FitResult, which: Which) -> Result<(NamedValues, Array2<f64>)> {
    let draws = match (&fit.draws, fit.method) {
        (Some(d), FitMethod::Mcmc) => d,
        _ => return Err(Error::unsupported("draws are not available for optimisation fits")),
    };
    let layout = draws.layout;
    let k = layout.categories;
    let j = layout.raters;
    let total = draws.total_draws();
    let names = &draws.names;

    let select_prefix = |prefix: &str| -> (Vec<String>, Vec<usize>) {
        let mut sel_names = Vec::new();
        let mut idx = Vec::new();
        for (i, n) in names.iter().enumerate() {
            if n.starts_with(prefix) {
                sel_names.push(n.clone());
                idx.push(i);
            }
        }
        (sel_names, idx)
    };

    match which {
        Which::Pi => {
            let (sel_names, idx) = select_prefix("pi[");
            let mut m = Array2::zeros((total, idx.len()));
            for (col, &p) in idx.iter().enumerate() {
                for (row, v) in draws.pooled(p).into_iter().enumerate() {
                    m[[row, col]] = v;
                }
            }
            Ok((NamedValues { names: sel_names, values: vec![], note: None }, m))
        }
        Which::P => {
            if layout.variant != Variant::ClassConditional {
                return Err(Error::unsupported(
                    "p is only a parameter of the class-conditional variant",
                ));
            }
            let (sel_names, idx) = select_prefix("p[");
            let mut m = Array2::zeros((total, idx.len()));
            for (col, &p) in idx.iter().enumerate() {
                for (row, v) in draws.pooled(p).into_iter().enumerate() {
                    m[[row, col]] = v;
                }
            }
            Ok((NamedValues { names: sel_names, values: vec![], note: None }, m))
        }
        Which::Theta => {
            if matches!(layout.variant, Variant::DawidSkene | Variant::Homogeneous) {
                let (sel_names, idx) = select_prefix("theta[");
                let mut m = Array2::zeros((total, idx.len()));
                for (col, &p) in idx.iter().enumerate() {
                    for (row, v) in draws.pooled(p).into_iter().enumerate() {
                        m[[row, col]] = v;
                    }
                }
                return Ok((NamedValues { names: sel_names, values: vec![], note: None }, m));
            }
            // derive theta per draw
            let sel_names = theta_names(j, k);
            let mut m = Array2::zeros((total, sel_names.len()));
            let mut row = 0;
            for chain in 0..draws.n_chains() {
                for draw in 0..draws.draws_per_chain() {
                    let params = draws.params_at(chain, draw)?;
                    let theta = params.error_matrices();
                    for (col, v) in theta.iter().enumerate() {
                        m[[row, col]] = *v;
                    }
                    row += 1;
                }
            }
            let note = Some(format!(
                "theta derived from the {} parameterization",
                layout.variant.as_str()
            ));
            Ok((NamedValues { names: sel_names, values: vec![], note }, m))
        }
        Which::Z => Err(Error::domain("z is not a continuous block")),
    }
}

fn mode_block(fit: &FitResult, which: Which) -> Result<NamedValues> {
    let mode = fit
        .mode
        .as_ref()
        .ok_or_else(|| Error::State("optimisation fit holds no mode".into()))?;
    let params = &mode.params;
    let layout = params.layout();
    match which {
        Which::Pi => Ok(NamedValues {
            names: (1..=layout.categories).map(|a| format!("pi[{a}]")).collect(),
            values: params.pi().to_vec(),
            note: None,
        }),
        Which::P => match params {
            Params::ClassConditional(p) => Ok(NamedValues {
                names: (1..=layout.raters)
                    .flat_map(|r| (1..=layout.categories).map(move |a| format!("p[{r},{a}]")))
                    .collect(),
                values: p.accuracy.iter().copied().collect(),
                note: None,
            }),
            _ => Err(Error::unsupported(
                "p is only a parameter of the class-conditional variant",
            )),
        },
        Which::Theta => {
            let theta = params.error_matrices();
            let note = match params {
                Params::DawidSkene(_) => None,
                _ => Some(format!(
                    "theta derived from the {} parameterization",
                    layout.variant.as_str()
                )),
            };
            Ok(NamedValues {
                names: theta_names(layout.raters, layout.categories),
                values: theta.iter().copied().collect(),
                note,
            })
        }
        Which::Z => Err(Error::domain("z is not a continuous block")),
    }
}

/// Row-wise argmax with ties broken toward the smaller class index.
pub(crate) fn map_classes(class_probs: &Array2<f64>) -> Vec<usize> {
    class_probs
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_value = row[0];
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > best_value {
                    best = c;
                    best_value = v;
                }
            }
            best + 1
        })
        .collect()
}

/// Point estimates: posterior means for continuous blocks of an MCMC fit,
/// mode values for an optimisation fit, and the highest-probability class per
/// item for `z`.
pub fn point_estimate(fit: &FitResult, which: Which) -> Result<PointEstimate> {
    match which {
        Which::Z => Ok(PointEstimate::Classes(map_classes(&fit.class_probabilities))),
        _ => match fit.method {
            FitMethod::Mcmc => {
                let (mut named, m) = block_draws(fit, which)?;
                named.values = (0..m.ncols())
                    .map(|c| m.column(c).sum() / m.nrows() as f64)
                    .collect();
                Ok(PointEstimate::Continuous(named))
            }
            FitMethod::Optim => Ok(PointEstimate::Continuous(mode_block(fit, which)?)),
        },
    }
}

/// Central credible intervals per parameter at level `q` (e.g. 0.8 gives the
/// 10%/90% quantiles, linearly interpolated). MCMC fits only.
#[derive(Debug, Clone)]
pub struct CredibleIntervals {
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

pub fn posterior_interval(fit: &FitResult, level: f64, which: Which) -> Result<CredibleIntervals> {
    if fit.method != FitMethod::Mcmc {
        return Err(Error::unsupported(
            "posterior intervals are not available for optimisation fits",
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("interval level must lie in (0,1)"));
    }
    if which == Which::Z {
        return Err(Error::domain("z has no credible interval; use class probabilities"));
    }
    let (named, m) = block_draws(fit, which)?;
    let lo_q = (1.0 - level) / 2.0;
    let hi_q = 1.0 - lo_q;
    let mut lower = Vec::with_capacity(m.ncols());
    let mut upper = Vec::with_capacity(m.ncols());
    for c in 0..m.ncols() {
        let mut column: Vec<f64> = m.column(c).to_vec();
        column.sort_by(|a, b| a.partial_cmp(b).expect("draws are finite"));
        lower.push(quantile(&column, lo_q));
        upper.push(quantile(&column, hi_q));
    }
    Ok(CredibleIntervals { names: named.names, lower, upper, level })
}

fn sample_categorical(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Simulate ratings from the posterior predictive distribution for a design of
/// (item, rater) pairs, both 1-based. Items beyond the fitted item count are
/// treated as new: their class is drawn from the prevalence of the sampled
/// draw. Existing items draw their class from the fit's class-probability row.
/// One class is drawn per distinct item per call.
pub fn posterior_predict(
    fit: &FitResult,
    design: &[(usize, usize)],
    seed: u64,
) -> Result<Vec<(usize, usize, usize)>> {
    if fit.spec.variant == Variant::Hierarchical {
        return Err(Error::unsupported(
            "posterior prediction covers the dawid-skene and class-conditional variants",
        ));
    }
    let items = fit.class_probabilities.nrows();
    let raters = fit.spec.raters;
    for &(item, rater) in design {
        if item == 0 || rater == 0 || rater > raters {
            return Err(Error::domain(format!(
                "design pair ({item}, {rater}) is outside 1..={raters} raters"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // group design rows by item, preserving output order
    let mut order: Vec<usize> = Vec::new();
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (row, &(item, _)) in design.iter().enumerate() {
        match groups.iter_mut().find(|(i, _)| *i == item) {
            Some((_, rows)) => rows.push(row),
            None => {
                order.push(item);
                groups.push((item, vec![row]));
            }
        }
    }

    let total_draws = fit.draws.as_ref().map(|d| d.total_draws()).unwrap_or(0);
    let mut out = vec![(0usize, 0usize, 0usize); design.len()];
    for (item, rows) in groups {
        let params = match (&fit.draws, &fit.mode) {
            (Some(draws), _) => {
                let s = rng.random_range(0..total_draws);
                let chain = s / draws.draws_per_chain();
                let draw = s % draws.draws_per_chain();
                draws.params_at(chain, draw)?
            }
            (None, Some(mode)) => mode.params.clone(),
            (None, None) => return Err(Error::State("fit holds neither draws nor a mode".into())),
        };
        let z = if item <= items {
            let row: Vec<f64> = fit.class_probabilities.row(item - 1).to_vec();
            sample_categorical(&mut rng, &row)
        } else {
            sample_categorical(&mut rng, params.pi())
        };
        let theta = params.error_matrices();
        for row in rows {
            let (_, rater) = design[row];
            let probs: Vec<f64> =
                (0..fit.spec.categories).map(|b| theta[[rater - 1, z, b]]).collect();
            let rating = sample_categorical(&mut rng, &probs);
            out[row] = (item, rater, rating + 1);
        }
    }
    Ok(out)
}

/// Generate ratings from known parameters for a design of 1-based
/// (item, rater) pairs. Returns the rows and the latent class drawn for each
/// distinct item (1-based classes, indexed by item order of first appearance).
pub fn simulate_with_classes(
    params: &Params,
    design: &[(usize, usize)],
    seed: u64,
) -> Result<(Vec<(usize, usize, usize)>, Vec<(usize, usize)>)> {
    let layout = params.layout();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = params.error_matrices();
    let mut classes: Vec<(usize, usize)> = Vec::new();
    let mut rows = Vec::with_capacity(design.len());
    for &(item, rater) in design {
        if item == 0 || rater == 0 || rater > layout.raters {
            return Err(Error::domain(format!(
                "design pair ({item}, {rater}) is outside 1..={} raters",
                layout.raters
            )));
        }
        let z = match classes.iter().find(|(i, _)| *i == item) {
            Some((_, z)) => *z,
            None => {
                let z = sample_categorical(&mut rng, params.pi());
                classes.push((item, z));
                z
            }
        };
        let probs: Vec<f64> = (0..layout.categories).map(|b| theta[[rater - 1, z, b]]).collect();
        let rating = sample_categorical(&mut rng, &probs);
        rows.push((item, rater, rating + 1));
    }
    let classes = classes.into_iter().map(|(i, z)| (i, z + 1)).collect();
    Ok((rows, classes))
}

/// Seeded rating simulation from known parameters.
pub fn simulate_ratings(
    params: &Params,
    design: &[(usize, usize)],
    seed: u64,
) -> Result<Vec<(usize, usize, usize)>> {
    Ok(simulate_with_classes(params, design, seed)?.0)
}

/// Widely applicable information criterion over item-level pointwise
/// log-likelihoods.
#[derive(Debug, Clone)]
pub struct Waic {
    pub waic: f64,
    pub lppd: f64,
    pub p_waic: f64,
    /// Per item (1-based): pointwise lppd and effective-parameter terms.
    pub pointwise: Vec<(usize, f64, f64)>,
}

/// WAIC from an MCMC fit: per item i, lppd_i = log mean_s exp(l_is) and
/// p_waic_i = var_s(l_is), with l_is the item's marginal log-likelihood at
/// draw s; waic = -2 sum_i (lppd_i - p_waic_i).
pub fn waic(fit: &FitResult, dataset: &RatingDataset) -> Result<Waic> {
    let draws = match (&fit.draws, fit.method) {
        (Some(d), FitMethod::Mcmc) => d,
        _ => return Err(Error::unsupported("waic needs an MCMC fit")),
    };
    let total = draws.total_draws();
    if total < 2 {
        return Err(Error::State("waic needs at least 2 draws".into()));
    }
    let dataset = fit_dataset(fit.spec.variant, dataset)?;
    let data = LikelihoodData::new(&dataset)?;

    // group-level log-likelihood per draw
    let n_groups = data.n_groups();
    let mut loglik = Array2::zeros((total, n_groups));
    let mut s = 0;
    for chain in 0..draws.n_chains() {
        for draw in 0..draws.draws_per_chain() {
            let params = draws.params_at(chain, draw)?;
            let log_theta = params.error_matrices().mapv(f64::ln);
            let marginal = likelihood::evaluate(params.pi(), &log_theta, &data)?;
            for (g, &v) in marginal.group_log_lik.iter().enumerate() {
                loglik[[s, g]] = v;
            }
            s += 1;
        }
    }

    let weights = data.weights();
    let mut pointwise = Vec::new();
    let mut lppd = 0.0;
    let mut p_waic = 0.0;
    let mut item = 1usize;
    let sf = total as f64;
    for g in 0..n_groups {
        let column = loglik.column(g);
        let max = column.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lppd_g = max + (column.iter().map(|&v| (v - max).exp()).sum::<f64>() / sf).ln();
        let mean = column.sum() / sf;
        let var_g =
            column.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (sf - 1.0);
        // each of the tally-many items of this pattern contributes identically
        for _ in 0..weights[g] as usize {
            pointwise.push((item, lppd_g, var_g));
            item += 1;
        }
        lppd += weights[g] * lppd_g;
        p_waic += weights[g] * var_g;
    }
    let waic = -2.0 * (lppd - p_waic);
    Ok(Waic { waic, lppd, p_waic, pointwise })
}
