//! MAP estimation: EM with closed-form updates for the Dawid-Skene and
//! class-conditional variants, and quasi-Newton ascent for the hierarchical
//! variant (or any variant, on request).
//!
//! Both maximize the posterior density in constrained space; the transform
//! Jacobian is deliberately excluded so that the reported mode does not depend
//! on the unconstrained parameterization.

use ndarray::{Array2, Array3};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::dataset::RatingDataset;
use crate::error::{Error, Result};
use crate::likelihood::{self, LikelihoodData};
use crate::model::{check_offdiagonal_beta, homogenize, ModelSpec, Prior, Variant};
use crate::params::{self, CcParams, DsParams, HdsParams, Layout, Params};

/// Pseudo-count floor used when prior entries below 1 drive an M-step
/// numerator to zero or below.
const MSTEP_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// pi uniform, error-matrix diagonals 0.7 with the rest spread evenly.
    UniformDiagonal,
    /// Uniform-diagonal base with seeded Dirichlet noise.
    Jittered,
    /// Responsibilities seeded from the per-item plurality vote, then one
    /// M-step.
    FromMajorityVote,
}

impl InitStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitStrategy::UniformDiagonal => "uniform-diagonal",
            InitStrategy::Jittered => "jittered",
            InitStrategy::FromMajorityVote => "from-majority-vote",
        }
    }
}

impl std::str::FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-diagonal" => Ok(InitStrategy::UniformDiagonal),
            "jittered" => Ok(InitStrategy::Jittered),
            "from-majority-vote" => Ok(InitStrategy::FromMajorityVote),
            other => Err(Error::domain(format!("unknown init strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapOptions {
    /// EM stopping rule: absolute change in log posterior.
    pub tol: f64,
    /// Quasi-Newton stopping rule: gradient max-norm.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub init: InitStrategy,
    pub seed: u64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            grad_tol: 1e-5,
            max_iter: 1000,
            init: InitStrategy::UniformDiagonal,
            seed: 1234,
        }
    }
}

/// Result of a MAP fit.
#[derive(Debug, Clone)]
pub struct MapResult {
    pub params: Params,
    pub log_posterior: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective value after every iteration, starting at the initial point.
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// EM iteration state: current parameters and the soft class assignments of
/// the E-step (one row per item, or per pattern for grouped data).
#[derive(Debug, Clone)]
pub struct EmState {
    pub params: Params,
    pub responsibilities: Array2<f64>,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

fn diagonal_theta(categories: usize, raters: usize, diag: f64) -> Array3<f64> {
    let off = (1.0 - diag) / (categories as f64 - 1.0);
    let mut theta = Array3::from_elem((raters, categories, categories), off);
    for r in 0..raters {
        for a in 0..categories {
            theta[[r, a, a]] = diag;
        }
    }
    theta
}

fn dirichlet_sample(rng: &mut ChaCha8Rng, alpha: &[f64]) -> Vec<f64> {
    let mut draws: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let sum: f64 = draws.iter().sum();
    if sum <= 0.0 {
        // numerically degenerate; fall back to the mean
        let k = alpha.len() as f64;
        return vec![1.0 / k; alpha.len()];
    }
    for d in &mut draws {
        *d /= sum;
    }
    draws
}

/// Starting parameters for optimisation or sampling.
pub fn init_params(
    spec: &ModelSpec,
    data: &LikelihoodData,
    strategy: InitStrategy,
    seed: u64,
) -> Result<Params> {
    let k = spec.categories;
    let j = spec.raters;
    match strategy {
        InitStrategy::UniformDiagonal => Ok(base_params(spec, vec![1.0 / k as f64; k], 0.7)),
        InitStrategy::Jittered => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            const CONC: f64 = 30.0;
            let pi = dirichlet_sample(&mut rng, &vec![CONC / k as f64; k]);
            let off = 0.3 / (k as f64 - 1.0);
            match spec.variant {
                Variant::DawidSkene | Variant::Homogeneous => {
                    let mut theta = Array3::zeros((j, k, k));
                    for r in 0..j {
                        for a in 0..k {
                            let alpha: Vec<f64> = (0..k)
                                .map(|b| CONC * if a == b { 0.7 } else { off })
                                .collect();
                            let row = dirichlet_sample(&mut rng, &alpha);
                            for b in 0..k {
                                theta[[r, a, b]] = row[b];
                            }
                        }
                    }
                    Ok(Params::DawidSkene(DsParams { pi, theta }))
                }
                Variant::ClassConditional => {
                    let mut accuracy = Array2::zeros((j, k));
                    for r in 0..j {
                        for a in 0..k {
                            let row = dirichlet_sample(&mut rng, &[CONC * 0.7, CONC * 0.3]);
                            accuracy[[r, a]] = row[0].clamp(1e-6, 1.0 - 1e-6);
                        }
                    }
                    Ok(Params::ClassConditional(CcParams { pi, accuracy }))
                }
                Variant::Hierarchical => {
                    let noise = Normal::new(0.0, 0.1).expect("valid normal");
                    let mut mu = Array2::zeros((k, k));
                    let mut gamma = Array3::zeros((j, k, k));
                    for a in 0..k {
                        for b in 0..k {
                            let base = if a == b { 0.7f64 } else { off };
                            mu[[a, b]] = base.ln() + noise.sample(&mut rng);
                            for r in 0..j {
                                gamma[[r, a, b]] = base.ln() + noise.sample(&mut rng);
                            }
                        }
                    }
                    Ok(Params::Hierarchical(HdsParams {
                        pi,
                        mu,
                        sigma: Array2::from_elem((k, k), 1.0),
                        gamma,
                    }))
                }
            }
        }
        InitStrategy::FromMajorityVote => {
            let mut resp = Array2::zeros((data.n_groups(), k));
            for (g, group) in data.groups().iter().enumerate() {
                let mut votes = vec![0usize; k];
                for &(_, y) in &group.ratings {
                    votes[y] += 1;
                }
                let best = votes.iter().copied().max().unwrap_or(0);
                if best == 0 {
                    for c in 0..k {
                        resp[[g, c]] = 1.0 / k as f64;
                    }
                } else {
                    let winners: Vec<usize> =
                        (0..k).filter(|&c| votes[c] == best).collect();
                    for &c in &winners {
                        resp[[g, c]] = 1.0 / winners.len() as f64;
                    }
                }
            }
            let mut warnings = Vec::new();
            m_step(spec, data, &resp, &mut warnings)
        }
    }
}

fn base_params(spec: &ModelSpec, pi: Vec<f64>, diag: f64) -> Params {
    let k = spec.categories;
    let j = spec.raters;
    match spec.variant {
        Variant::DawidSkene | Variant::Homogeneous => {
            Params::DawidSkene(DsParams { pi, theta: diagonal_theta(k, j, diag) })
        }
        Variant::ClassConditional => Params::ClassConditional(CcParams {
            pi,
            accuracy: Array2::from_elem((j, k), diag),
        }),
        Variant::Hierarchical => {
            let off = (1.0 - diag) / (k as f64 - 1.0);
            let mut mu = Array2::zeros((k, k));
            let mut gamma = Array3::zeros((j, k, k));
            for a in 0..k {
                for b in 0..k {
                    let logit = if a == b { diag.ln() } else { off.ln() };
                    mu[[a, b]] = logit;
                    for r in 0..j {
                        gamma[[r, a, b]] = logit;
                    }
                }
            }
            Params::Hierarchical(HdsParams { pi, mu, sigma: Array2::from_elem((k, k), 1.0), gamma })
        }
    }
}

/// Closed-form M-step: maximize the expected complete-data log posterior.
fn m_step(
    spec: &ModelSpec,
    data: &LikelihoodData,
    resp: &Array2<f64>,
    warnings: &mut Vec<String>,
) -> Result<Params> {
    let k = spec.categories;
    let j = spec.raters;
    let counts = likelihood::soft_counts(data, resp, k, j);
    let alpha = spec.alpha();
    let mut clamped = false;

    let mut pi: Vec<f64> = (0..k)
        .map(|c| {
            let v = alpha[c] - 1.0 + counts.class_weight[c];
            if v <= 0.0 {
                clamped = true;
                MSTEP_FLOOR
            } else {
                v
            }
        })
        .collect();
    let pi_sum: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= pi_sum;
    }

    let params = match &spec.prior {
        Prior::Dirichlet(prior) => {
            let mut theta = Array3::zeros((j, k, k));
            for r in 0..j {
                for a in 0..k {
                    let mut row: Vec<f64> = (0..k)
                        .map(|b| {
                            let v = prior.beta[[r, a, b]] - 1.0 + counts.rating_counts[[r, a, b]];
                            if v <= 0.0 {
                                clamped = true;
                                MSTEP_FLOOR
                            } else {
                                v
                            }
                        })
                        .collect();
                    let sum: f64 = row.iter().sum();
                    for v in &mut row {
                        *v /= sum;
                    }
                    for b in 0..k {
                        theta[[r, a, b]] = row[b];
                    }
                }
            }
            Params::DawidSkene(DsParams { pi, theta })
        }
        Prior::ClassConditional(prior) => {
            let mut accuracy = Array2::zeros((j, k));
            for r in 0..j {
                for a in 0..k {
                    let hits = counts.rating_counts[[r, a, a]];
                    let total = counts.rating_totals[[r, a]];
                    let num = prior.beta1[a] - 1.0 + hits;
                    let den = prior.beta1[a] + prior.beta2[a] - 2.0 + total;
                    let p = if den > 0.0 { num / den } else { f64::NAN };
                    let p = if p.is_finite() && p > 0.0 && p < 1.0 {
                        p
                    } else {
                        clamped = true;
                        p.max(MSTEP_FLOOR).min(1.0 - MSTEP_FLOOR)
                    };
                    let p = if p.is_nan() { 0.5 } else { p };
                    accuracy[[r, a]] = p;
                }
            }
            Params::ClassConditional(CcParams { pi, accuracy })
        }
        Prior::Hierarchical(_) => {
            return Err(Error::unsupported(
                "EM has no closed-form M-step for the hierarchical variant; use gradient_map_fit",
            ))
        }
    };
    if clamped && warnings.is_empty() {
        warnings.push(
            "M-step numerator was non-positive (prior entries below 1); \
             values clamped to a small floor"
                .into(),
        );
    }
    Ok(params)
}

/// The MAP objective EM ascends: log prior plus marginalized log likelihood.
fn objective(params: &Params, spec: &ModelSpec, data: &LikelihoodData) -> Result<f64> {
    Ok(likelihood::log_prior(params, spec)? + likelihood::log_likelihood(params, data)?)
}

fn em_dataset(spec: &ModelSpec, dataset: &RatingDataset) -> Result<LikelihoodData> {
    if spec.variant == Variant::Homogeneous {
        LikelihoodData::new(&homogenize(dataset)?)
    } else {
        LikelihoodData::new(dataset)
    }
}

/// EM for the Dawid-Skene, class-conditional, and homogeneous variants.
pub fn em_fit(
    spec: &ModelSpec,
    dataset: &RatingDataset,
    init: Option<Params>,
    options: &MapOptions,
) -> Result<MapResult> {
    let (result, _) = em_fit_with_state(spec, dataset, init, options)?;
    Ok(result)
}

/// EM returning the final state (responsibilities included) alongside the fit.
pub fn em_fit_with_state(
    spec: &ModelSpec,
    dataset: &RatingDataset,
    init: Option<Params>,
    options: &MapOptions,
) -> Result<(MapResult, EmState)> {
    if spec.variant == Variant::Hierarchical {
        return Err(Error::unsupported(
            "EM supports the dawid-skene, class-conditional, and homogeneous variants",
        ));
    }
    if options.tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    let data = em_dataset(spec, dataset)?;
    let mut warnings = check_offdiagonal_beta(spec);
    let mut params = match init {
        Some(p) => p,
        None => init_params(spec, &data, options.init, options.seed)?,
    };

    let mut value = objective(&params, spec, &data)?;
    let mut trace = vec![value];
    let mut resp = Array2::zeros((data.n_groups(), spec.categories));
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..options.max_iter {
        // E-step: conditional class probabilities at the current parameters.
        let marginal = likelihood::evaluate(
            params.pi(),
            &params.error_matrices().mapv(f64::ln),
            &data,
        )?;
        resp = marginal.resp;
        // M-step: closed-form maximizer of the expected complete-data posterior.
        params = m_step(spec, &data, &resp, &mut warnings)?;
        let next = objective(&params, spec, &data)?;
        if !next.is_finite() {
            return Err(Error::numerical("EM objective became non-finite"));
        }
        iterations += 1;
        let delta = next - value;
        value = next;
        trace.push(value);
        if delta.abs() < options.tol {
            converged = true;
            break;
        }
    }

    let result = MapResult {
        params: params.clone(),
        log_posterior: value,
        converged,
        iterations,
        trace: trace.clone(),
        warnings,
    };
    let state = EmState { params, responsibilities: resp, iterations, trace };
    Ok((result, state))
}

/// Outcome of a quasi-Newton ascent run.
#[derive(Debug, Clone)]
pub struct AscentResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Limited-memory quasi-Newton ascent (two-loop recursion, backtracking line
/// search) of a differentiable objective. Stops when the gradient max-norm
/// falls below `grad_tol`; a failed line search returns the best point found
/// so far.
pub fn maximize(
    eval: impl Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
    x0: Vec<f64>,
    grad_tol: f64,
    max_iter: usize,
) -> Result<AscentResult> {
    let mut x = x0;
    let (mut value, mut grad) = eval(&x)?;
    let mut trace = vec![value];
    let mut warnings = Vec::new();
    const MEMORY: usize = 10;
    let mut s_list: Vec<Vec<f64>> = Vec::new();
    let mut y_list: Vec<Vec<f64>> = Vec::new();
    let mut rho_list: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < grad_tol {
            converged = true;
            break;
        }
        // two-loop recursion on the negative gradient of -f (i.e. ascend)
        let mut direction = grad.clone();
        let mut alphas = vec![0.0; s_list.len()];
        for i in (0..s_list.len()).rev() {
            let a = rho_list[i] * dot(&s_list[i], &direction);
            alphas[i] = a;
            axpy(&mut direction, -a, &y_list[i]);
        }
        if let (Some(s), Some(y)) = (s_list.last(), y_list.last()) {
            let scale = dot(s, y) / dot(y, y);
            if scale.is_finite() && scale > 0.0 {
                for d in &mut direction {
                    *d *= scale;
                }
            }
        }
        for i in 0..s_list.len() {
            let b = rho_list[i] * dot(&y_list[i], &direction);
            axpy(&mut direction, alphas[i] - b, &s_list[i]);
        }

        let mut slope = dot(&grad, &direction);
        if !slope.is_finite() || slope <= 0.0 {
            // not an ascent direction; fall back to steepest ascent
            direction = grad.clone();
            s_list.clear();
            y_list.clear();
            rho_list.clear();
            slope = dot(&grad, &direction);
        }

        // backtracking Armijo line search
        let mut step = 1.0f64;
        let mut accepted = None;
        for _ in 0..40 {
            let candidate: Vec<f64> =
                x.iter().zip(&direction).map(|(xi, di)| xi + step * di).collect();
            match eval(&candidate) {
                Ok((v, g)) if v.is_finite() && v >= value + 1e-4 * step * slope => {
                    accepted = Some((candidate, v, g));
                    break;
                }
                _ => step *= 0.5,
            }
        }
        let Some((x_new, v_new, g_new)) = accepted else {
            // No representable improvement left. Near the mode this is just
            // f64 exhaustion; report convergence when the gradient is small.
            if gnorm < 1e-3 {
                converged = true;
            } else {
                warnings.push("line search failed; returning best point found".into());
            }
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm(&s) * norm(&y) {
            if s_list.len() == MEMORY {
                s_list.remove(0);
                y_list.remove(0);
                rho_list.remove(0);
            }
            rho_list.push(1.0 / sy);
            s_list.push(s);
            y_list.push(y);
        }
        x = x_new;
        value = v_new;
        grad = g_new;
        trace.push(value);
        iterations += 1;
    }

    if !converged && iterations == max_iter {
        warnings.push(format!(
            "stopped at the iteration limit ({max_iter}) before reaching the gradient tolerance"
        ));
    }
    Ok(AscentResult { x, value, converged, iterations, trace, warnings })
}

/// MAP estimation by quasi-Newton ascent on the unconstrained coordinates,
/// excluding the transform Jacobian so the result is a constrained-space mode.
/// Works for every variant; it is the only MAP route for the hierarchical
/// model.
pub fn gradient_map_fit(
    spec: &ModelSpec,
    dataset: &RatingDataset,
    init: Option<Params>,
    options: &MapOptions,
) -> Result<MapResult> {
    let data = em_dataset(spec, dataset)?;
    let mut warnings = check_offdiagonal_beta(spec);
    let start = match init {
        Some(p) => p,
        None => init_params(spec, &data, options.init, options.seed)?,
    };
    let x0 = params::to_unconstrained(&start)?;
    let ascent = maximize(
        |v| likelihood::value_and_grad(v, spec, &data, false),
        x0,
        options.grad_tol,
        options.max_iter,
    )?;
    warnings.extend(ascent.warnings);
    let layout = Layout::new(spec.variant, spec.categories, spec.raters);
    let params = params::from_unconstrained(&layout, &ascent.x)?;
    Ok(MapResult {
        params,
        log_posterior: ascent.value,
        converged: ascent.converged,
        iterations: ascent.iterations,
        trace: ascent.trace,
        warnings,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(target: &mut [f64], scale: f64, source: &[f64]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t += scale * s;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{LongRatings, RatingDataset};
    use crate::model::{resolve_spec, PriorOverrides};

    fn dataset(rows: &[(i64, i64, i64)]) -> RatingDataset {
        RatingDataset::from_long(LongRatings::from_labelled(rows, None).unwrap())
    }

    #[test]
    fn uniform_diagonal_init_k2() {
        let spec = resolve_spec(Variant::DawidSkene, 2, 1, &PriorOverrides::default()).unwrap();
        let d = dataset(&[(1, 1, 1), (2, 1, 2)]);
        let data = LikelihoodData::new(&d).unwrap();
        let params = init_params(&spec, &data, InitStrategy::UniformDiagonal, 0).unwrap();
        match params {
            Params::DawidSkene(p) => {
                assert_eq!(p.pi, vec![0.5, 0.5]);
                assert_eq!(p.theta[[0, 0, 0]], 0.7);
                assert!((p.theta[[0, 0, 1]] - 0.3).abs() < 1e-15);
                assert!((p.theta[[0, 1, 0]] - 0.3).abs() < 1e-15);
                assert_eq!(p.theta[[0, 1, 1]], 0.7);
            }
            _ => panic!("expected DS params"),
        }
    }

    #[test]
    fn jittered_init_is_seed_deterministic() {
        let spec = resolve_spec(Variant::DawidSkene, 3, 2, &PriorOverrides::default()).unwrap();
        let d = dataset(&[(1, 1, 1), (1, 2, 2), (2, 1, 3), (2, 2, 3)]);
        let data = LikelihoodData::new(&d).unwrap();
        let a = init_params(&spec, &data, InitStrategy::Jittered, 7).unwrap();
        let b = init_params(&spec, &data, InitStrategy::Jittered, 7).unwrap();
        let c = init_params(&spec, &data, InitStrategy::Jittered, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        a.validate().unwrap();
    }

    #[test]
    fn majority_vote_seeds_plurality_classes() {
        // Table 1(a): items 2 and 3 are unanimous in category 2.
        let rows = [(1, 1, 3), (1, 2, 4), (2, 1, 2), (2, 2, 2), (3, 1, 2), (3, 2, 2)];
        let spec = resolve_spec(Variant::DawidSkene, 4, 2, &PriorOverrides::default()).unwrap();
        let d = dataset(&rows);
        let data = LikelihoodData::new(&d).unwrap();
        let params = init_params(&spec, &data, InitStrategy::FromMajorityVote, 0).unwrap();
        // After one M-step from those votes, category 2 should carry the most
        // prevalence mass.
        let pi = params.pi();
        assert!(pi[1] > pi[0] && pi[1] > pi[2] && pi[1] > pi[3]);
    }

    #[test]
    fn em_consensus_degenerate_case() {
        // every rater always answers 1
        let rows: Vec<(i64, i64, i64)> =
            (1..=6).flat_map(|i| [(i, 1, 1), (i, 2, 1)]).collect();
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let result = em_fit(&spec, &dataset(&rows), None, &MapOptions::default()).unwrap();
        match &result.params {
            Params::DawidSkene(p) => {
                // soft counts approach the Dirichlet(alpha + item counts) mode
                // (3-1+6, 3-1+0) / 10 = 0.8
                assert!((p.pi[0] - 0.8).abs() < 0.05, "pi[0] = {}", p.pi[0]);
                assert!(p.theta[[0, 0, 0]] > 0.8);
                assert!(p.theta[[1, 0, 0]] > 0.8);
            }
            _ => panic!("expected DS params"),
        }
        assert!(result.converged);
    }

    #[test]
    fn em_trace_is_monotone() {
        let rows = [
            (1, 1, 1),
            (1, 2, 1),
            (2, 1, 2),
            (2, 2, 1),
            (3, 1, 2),
            (3, 2, 2),
            (4, 1, 1),
            (4, 2, 2),
        ];
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let result = em_fit(&spec, &dataset(&rows), None, &MapOptions::default()).unwrap();
        for w in result.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8, "trace decreased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn em_rejects_hierarchical() {
        let spec = resolve_spec(Variant::Hierarchical, 2, 2, &PriorOverrides::default()).unwrap();
        let err = em_fit(&spec, &dataset(&[(1, 1, 1), (1, 2, 2)]), None, &MapOptions::default());
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }

    #[test]
    fn gradient_fit_matches_em_on_toy() {
        let rows = [
            (1, 1, 1),
            (1, 2, 1),
            (2, 1, 1),
            (2, 2, 2),
            (3, 1, 2),
            (3, 2, 2),
            (4, 1, 2),
            (4, 2, 2),
        ];
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let d = dataset(&rows);
        let em = em_fit(&spec, &d, None, &MapOptions::default()).unwrap();
        let qn = gradient_map_fit(&spec, &d, None, &MapOptions::default()).unwrap();
        let (a, b) = (em.params.flatten(), qn.params.flatten());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-3, "modes differ: {x} vs {y}");
        }
    }
}
