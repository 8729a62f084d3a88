//! Full-posterior sampling with an adaptive Hamiltonian sampler.
//!
//! Each chain runs Hamiltonian Monte Carlo with randomized trajectory lengths
//! (step counts drawn uniformly up to trajectory-length/step-size, capped),
//! dual-averaging step-size adaptation toward a target acceptance rate, and
//! diagonal mass-matrix estimation over expanding warmup windows. Randomizing
//! the integration time suppresses the periodic-orbit stalls a fixed length
//! is prone to. Chains are independent, each with a private RNG
//! stream derived from (seed, chain index), and may run concurrently; results
//! are assembled in chain order so output is deterministic.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::RatingDataset;
use crate::diagnostics::{effective_sample_size, split_rhat, Diagnostics};
use crate::error::{Error, Result};
use crate::likelihood::{value_and_grad, LikelihoodData};
use crate::model::{homogenize, ModelSpec, Variant};
use crate::optimize::{init_params, InitStrategy};
use crate::params::{self, Layout, Params};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub seed: u64,
    pub target_accept: f64,
    /// Cap on leapfrog steps per trajectory.
    pub max_leapfrog: usize,
    /// Target integration time per transition; the step count is this divided
    /// by the step size, capped at `max_leapfrog`.
    pub trajectory_length: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            warmup: 1000,
            draws: 1000,
            seed: 1234,
            target_accept: 0.8,
            max_leapfrog: 64,
            trajectory_length: 5.0,
        }
    }
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.draws == 0 {
            return Err(Error::domain("chain and draw counts must be positive"));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::domain("target acceptance must lie in (0,1)"));
        }
        if self.max_leapfrog == 0 {
            return Err(Error::domain("leapfrog cap must be positive"));
        }
        if !(self.trajectory_length > 0.0) {
            return Err(Error::domain("trajectory length must be positive"));
        }
        Ok(())
    }
}

/// Constrained-space posterior draws, one matrix per chain, with canonical
/// parameter names ("pi[1]", "theta[1,2,3]", ...).
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub layout: Layout,
    pub names: Vec<String>,
    pub chains: Vec<Array2<f64>>,
}

impl PosteriorDraws {
    pub fn n_chains(&self) -> usize {
        self.chains.len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.chains.first().map_or(0, |c| c.nrows())
    }

    pub fn total_draws(&self) -> usize {
        self.chains.iter().map(|c| c.nrows()).sum()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// All draws of one parameter, chains concatenated in order.
    pub fn pooled(&self, param: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_draws());
        for chain in &self.chains {
            out.extend(chain.column(param).iter().copied());
        }
        out
    }

    /// Per-chain draws of one parameter.
    pub fn per_chain(&self, param: usize) -> Vec<Vec<f64>> {
        self.chains.iter().map(|c| c.column(param).to_vec()).collect()
    }

    /// Reconstruct the full parameter object for one stored draw.
    pub fn params_at(&self, chain: usize, draw: usize) -> Result<Params> {
        let row = self.chains[chain].row(draw);
        Params::from_flat(&self.layout, row.as_slice().expect("row is contiguous"))
    }

    /// Posterior mean of every stored parameter.
    pub fn means(&self) -> Vec<f64> {
        let p = self.names.len();
        let mut means = vec![0.0; p];
        let total = self.total_draws() as f64;
        for chain in &self.chains {
            for row in chain.rows() {
                for (m, v) in means.iter_mut().zip(row) {
                    *m += v;
                }
            }
        }
        for m in &mut means {
            *m /= total;
        }
        means
    }

    /// CSV export: chain and iteration first, then one column per parameter.
    pub fn write_csv<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        write!(writer, "chain,iteration")?;
        for name in &self.names {
            write!(writer, ",{name}")?;
        }
        writeln!(writer)?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (i, row) in chain.rows().into_iter().enumerate() {
                write!(writer, "{},{}", c + 1, i + 1)?;
                for v in row {
                    write!(writer, ",{v}")?;
                }
                writeln!(writer)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct SampleOutput {
    pub draws: PosteriorDraws,
    pub diagnostics: Diagnostics,
}

/// A differentiable log-density target. `None` signals a non-finite value or
/// gradient (the proposal is treated as divergent).
pub(crate) trait Target: Sync {
    fn value_grad(&self, v: &[f64]) -> Option<(f64, Vec<f64>)>;
}

struct PosteriorTarget<'a> {
    spec: &'a ModelSpec,
    data: &'a LikelihoodData,
}

impl Target for PosteriorTarget<'_> {
    fn value_grad(&self, v: &[f64]) -> Option<(f64, Vec<f64>)> {
        match value_and_grad(v, self.spec, self.data, true) {
            Ok((value, grad)) if value.is_finite() => Some((value, grad)),
            _ => None,
        }
    }
}

#[derive(Clone)]
struct DualAverage {
    log_step: f64,
    log_step_avg: f64,
    h_bar: f64,
    mu: f64,
    count: f64,
}

impl DualAverage {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(initial_step: f64) -> Self {
        Self {
            log_step: initial_step.ln(),
            log_step_avg: initial_step.ln(),
            h_bar: 0.0,
            mu: (10.0 * initial_step).ln(),
            count: 1.0,
        }
    }

    fn advance(&mut self, accept: f64, target: f64) {
        let w = 1.0 / (self.count + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (target - accept);
        self.log_step = self.mu - self.h_bar * self.count.sqrt() / Self::GAMMA;
        let mk = self.count.powf(-Self::KAPPA);
        self.log_step_avg = mk * self.log_step + (1.0 - mk) * self.log_step_avg;
        self.count += 1.0;
    }

    fn current(&self) -> f64 {
        self.log_step.exp()
    }

    fn averaged(&self) -> f64 {
        self.log_step_avg.exp()
    }
}

struct ChainState {
    q: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

struct StepOutcome {
    accept_stat: f64,
    divergent: bool,
}

const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// One HMC transition; `inv_mass` holds the per-coordinate posterior variance
/// estimate (the inverse mass matrix diagonal).
fn hmc_transition<T: Target>(
    target: &T,
    state: &mut ChainState,
    rng: &mut ChaCha8Rng,
    step: f64,
    n_steps: usize,
    inv_mass: &[f64],
) -> StepOutcome {
    let dim = state.q.len();
    let mut p: Vec<f64> = (0..dim)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            z / inv_mass[i].sqrt()
        })
        .collect();
    let kinetic = |p: &[f64]| -> f64 {
        0.5 * p.iter().zip(inv_mass).map(|(pi, m)| pi * pi * m).sum::<f64>()
    };
    let h0 = -state.value + kinetic(&p);

    let mut q = state.q.clone();
    let mut grad = state.grad.clone();
    let mut value = state.value;
    let mut diverged = false;

    for (pi, gi) in p.iter_mut().zip(&grad) {
        *pi += 0.5 * step * gi;
    }
    for leap in 0..n_steps {
        for i in 0..dim {
            q[i] += step * inv_mass[i] * p[i];
        }
        match target.value_grad(&q) {
            Some((v, g)) => {
                value = v;
                grad = g;
            }
            None => {
                diverged = true;
                break;
            }
        }
        let half = if leap + 1 == n_steps { 0.5 } else { 1.0 };
        for (pi, gi) in p.iter_mut().zip(&grad) {
            *pi += half * step * gi;
        }
    }

    if diverged {
        return StepOutcome { accept_stat: 0.0, divergent: true };
    }
    let h1 = -value + kinetic(&p);
    let delta = h0 - h1;
    if !delta.is_finite() || -delta > DIVERGENCE_THRESHOLD {
        return StepOutcome { accept_stat: 0.0, divergent: true };
    }
    let accept_stat = delta.min(0.0).exp();
    let u: f64 = rng.random();
    if u.ln() < delta {
        state.q = q;
        state.value = value;
        state.grad = grad;
    }
    StepOutcome { accept_stat, divergent: false }
}

fn find_initial_step<T: Target>(
    target: &T,
    state: &ChainState,
    rng: &mut ChaCha8Rng,
    inv_mass: &[f64],
) -> f64 {
    let dim = state.q.len();
    let p0: Vec<f64> = (0..dim)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            z / inv_mass[i].sqrt()
        })
        .collect();
    let kinetic = |p: &[f64]| -> f64 {
        0.5 * p.iter().zip(inv_mass).map(|(pi, m)| pi * pi * m).sum::<f64>()
    };
    let h0 = -state.value + kinetic(&p0);

    let log_accept_of = |step: f64| -> f64 {
        let mut q = state.q.clone();
        let mut p = p0.clone();
        for (pi, gi) in p.iter_mut().zip(&state.grad) {
            *pi += 0.5 * step * gi;
        }
        for i in 0..dim {
            q[i] += step * inv_mass[i] * p[i];
        }
        match target.value_grad(&q) {
            Some((v, g)) => {
                for (pi, gi) in p.iter_mut().zip(&g) {
                    *pi += 0.5 * step * gi;
                }
                let h1 = -v + kinetic(&p);
                h0 - h1
            }
            None => f64::NEG_INFINITY,
        }
    };

    let mut step = 0.1f64;
    let target_log = 0.5f64.ln();
    let going_up = log_accept_of(step) > target_log;
    for _ in 0..60 {
        let next = if going_up { step * 2.0 } else { step * 0.5 };
        if !(1e-10..=100.0).contains(&next) {
            break;
        }
        let la = log_accept_of(next);
        if going_up && la <= target_log {
            break;
        }
        if !going_up && la > target_log {
            step = next;
            break;
        }
        step = next;
    }
    step
}

struct ChainRun {
    draws: Array2<f64>,
    accept_mean: f64,
    divergences: usize,
}

/// Warmup layout: 15% step-size search, 60% expanding mass-matrix windows,
/// 25% final step-size polish.
fn mass_window_ends(warmup: usize) -> Vec<usize> {
    let fast = (warmup as f64 * 0.15) as usize;
    let settle = (warmup as f64 * 0.75) as usize;
    let mut ends = Vec::new();
    if settle <= fast || settle - fast < 20 {
        return ends;
    }
    let mut pos = fast;
    let mut size = 25usize.max((settle - fast) / 8);
    while pos < settle {
        let mut end = pos + size;
        // absorb a too-small trailing window into this one
        if end + size / 2 >= settle {
            end = settle;
        }
        ends.push(end.min(settle));
        pos = end;
        size *= 2;
    }
    ends
}

fn run_chain<T: Target>(
    target: &T,
    config: &SamplerConfig,
    chain_index: usize,
    init: Vec<f64>,
    record: impl Fn(&[f64]) -> Vec<f64>,
    n_record: usize,
) -> Result<ChainRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1 + chain_index as u64);

    let (value, grad) = target
        .value_grad(&init)
        .ok_or_else(|| Error::Init("posterior not finite at the initial point".into()))?;
    let mut state = ChainState { q: init, value, grad };
    let dim = state.q.len();
    let mut inv_mass = vec![1.0f64; dim];

    let mut step = find_initial_step(target, &state, &mut rng, &inv_mass);
    let mut adapt = DualAverage::new(step);
    let window_ends = mass_window_ends(config.warmup);
    let fast_end = (config.warmup as f64 * 0.15) as usize;
    let mut window_sum = vec![0.0f64; dim];
    let mut window_sq = vec![0.0f64; dim];
    let mut window_n = 0usize;
    let mut next_window = 0usize;

    let mut draws = Array2::zeros((config.draws, n_record));
    let mut accept_sum = 0.0;
    let mut divergences = 0usize;

    for iter in 0..config.warmup + config.draws {
        let warming = iter < config.warmup;
        // randomize the integration time to avoid near-periodic trajectories
        let max_steps =
            ((config.trajectory_length / step).round() as usize).clamp(1, config.max_leapfrog);
        let n_steps = rng.random_range(1..=max_steps);
        let outcome = hmc_transition(target, &mut state, &mut rng, step, n_steps, &inv_mass);

        if warming {
            adapt.advance(outcome.accept_stat, config.target_accept);
            step = adapt.current();
            if next_window < window_ends.len() && iter >= fast_end {
                for i in 0..dim {
                    window_sum[i] += state.q[i];
                    window_sq[i] += state.q[i] * state.q[i];
                }
                window_n += 1;
                if iter + 1 == window_ends[next_window] {
                    if window_n >= 10 {
                        let n = window_n as f64;
                        for i in 0..dim {
                            let mean = window_sum[i] / n;
                            let var =
                                (window_sq[i] / n - mean * mean).max(0.0) * n / (n - 1.0);
                            inv_mass[i] = var * n / (n + 5.0) + 1e-3 * (5.0 / (n + 5.0));
                        }
                    }
                    window_sum.fill(0.0);
                    window_sq.fill(0.0);
                    window_n = 0;
                    next_window += 1;
                    step = find_initial_step(target, &state, &mut rng, &inv_mass);
                    adapt = DualAverage::new(step);
                }
            }
            if iter + 1 == config.warmup {
                step = adapt.averaged();
            }
        } else {
            accept_sum += outcome.accept_stat;
            if outcome.divergent {
                divergences += 1;
            }
            let row = record(&state.q);
            draws.row_mut(iter - config.warmup).assign(&ndarray::ArrayView1::from(&row));
        }
    }

    Ok(ChainRun {
        draws,
        accept_mean: if config.draws > 0 { accept_sum / config.draws as f64 } else { 0.0 },
        divergences,
    })
}

/// Draw from the posterior of a model over a dataset. The grouped likelihood
/// is used automatically for grouped data; the homogeneous variant relabels
/// the data to a single rater first. Deterministic given the config seed.
pub fn sample(spec: &ModelSpec, dataset: &RatingDataset, config: &SamplerConfig) -> Result<SampleOutput> {
    config.validate()?;
    let fit_data = if spec.variant == Variant::Homogeneous {
        LikelihoodData::new(&homogenize(dataset)?)?
    } else {
        LikelihoodData::new(dataset)?
    };
    let layout = Layout::new(spec.variant, spec.categories, spec.raters);
    let target = PosteriorTarget { spec, data: &fit_data };

    // per-chain initial points: jittered, retried on a non-finite posterior
    let mut inits = Vec::with_capacity(config.chains);
    for chain in 0..config.chains {
        let mut found = None;
        for attempt in 0..5u64 {
            let seed = config
                .seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(chain as u64 * 8 + attempt);
            let params = init_params(spec, &fit_data, InitStrategy::Jittered, seed)?;
            let v = params::to_unconstrained(&params)?;
            if target.value_grad(&v).is_some() {
                found = Some(v);
                break;
            }
        }
        inits.push(found.ok_or_else(|| {
            Error::Init(format!(
                "no finite starting point found for chain {} after 5 attempts",
                chain + 1
            ))
        })?);
    }

    let names = layout.names();
    let n_record = names.len();
    let record = |q: &[f64]| -> Vec<f64> {
        params::from_unconstrained(&layout, q)
            .expect("dimensions fixed by layout")
            .flatten()
    };

    let runs: Vec<Result<ChainRun>> = inits
        .into_par_iter()
        .enumerate()
        .map(|(chain, init)| run_chain(&target, config, chain, init, &record, n_record))
        .collect();

    let mut chains = Vec::with_capacity(config.chains);
    let mut acceptance = Vec::with_capacity(config.chains);
    let mut divergences = 0usize;
    for run in runs {
        let run = run?;
        chains.push(run.draws);
        acceptance.push(run.accept_mean);
        divergences += run.divergences;
    }

    let draws = PosteriorDraws { layout, names: names.clone(), chains };
    let diagnostics = build_diagnostics(spec, &draws, acceptance, divergences);
    Ok(SampleOutput { draws, diagnostics })
}

fn build_diagnostics(
    spec: &ModelSpec,
    draws: &PosteriorDraws,
    acceptance: Vec<f64>,
    divergences: usize,
) -> Diagnostics {
    let p = draws.names.len();
    let mut r_hat = Vec::with_capacity(p);
    let mut ess = Vec::with_capacity(p);
    let mut degenerate = Vec::with_capacity(p);
    for param in 0..p {
        let per_chain = draws.per_chain(param);
        let refs: Vec<&[f64]> = per_chain.iter().map(|c| c.as_slice()).collect();
        let r = split_rhat(&refs);
        r_hat.push(r);
        ess.push(effective_sample_size(&refs));
        degenerate.push(r.is_infinite());
    }

    let total_draws = draws.total_draws();
    let mut warnings = Vec::new();
    if total_draws > 0 && divergences * 10 > total_draws {
        warnings.push(format!(
            "{divergences} of {total_draws} post-warmup draws were divergent; \
             the posterior may be poorly explored"
        ));
    }

    // Label-switching guard: the accuracy-favouring prior should keep every
    // error-matrix diagonal above chance.
    let k = spec.categories as f64;
    let means = draws.means();
    let mut weak_diag = false;
    for (name, mean) in draws.names.iter().zip(&means) {
        let is_diag = parse_diag_name(name);
        if let Some(true) = is_diag {
            if *mean < 1.0 / k {
                weak_diag = true;
            }
        }
    }
    if weak_diag {
        warnings.push(
            "an error-matrix diagonal posterior mean fell below 1/K; \
             class labels may have switched during sampling"
                .into(),
        );
    }

    Diagnostics {
        parameter_names: draws.names.clone(),
        r_hat,
        ess,
        degenerate,
        divergences,
        total_draws,
        acceptance,
        warnings,
    }
}

/// Is this parameter an error-matrix diagonal entry (theta[j,k,k] or p[j,k])?
fn parse_diag_name(name: &str) -> Option<bool> {
    if let Some(rest) = name.strip_prefix("theta[") {
        let idx: Vec<&str> = rest.trim_end_matches(']').split(',').collect();
        if idx.len() == 3 {
            return Some(idx[1] == idx[2]);
        }
    }
    if name.starts_with("p[") {
        return Some(true);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LongRatings;
    use crate::model::{resolve_spec, PriorOverrides};

    struct StdNormalTarget;

    impl Target for StdNormalTarget {
        fn value_grad(&self, v: &[f64]) -> Option<(f64, Vec<f64>)> {
            let value = -0.5 * v.iter().map(|x| x * x).sum::<f64>();
            let grad = v.iter().map(|x| -x).collect();
            Some((value, grad))
        }
    }

    fn toy_dataset() -> RatingDataset {
        let rows = [
            (1, 1, 1),
            (1, 2, 1),
            (2, 1, 1),
            (2, 2, 2),
            (3, 1, 2),
            (3, 2, 2),
            (4, 1, 2),
            (4, 2, 2),
            (5, 1, 1),
            (5, 2, 1),
        ];
        RatingDataset::from_long(LongRatings::from_labelled(&rows, None).unwrap())
    }

    #[test]
    fn standard_normal_moments_are_recovered() {
        let target = StdNormalTarget;
        let config = SamplerConfig {
            chains: 4,
            warmup: 500,
            draws: 2000,
            seed: 42,
            ..Default::default()
        };
        let record = |q: &[f64]| q.to_vec();
        let runs: Vec<ChainRun> = (0..config.chains)
            .map(|c| run_chain(&target, &config, c, vec![0.1; 3], record, 3).unwrap())
            .collect();
        for d in 0..3 {
            let mut all = Vec::new();
            let mut batch_means = Vec::new();
            let mut batch_vars = Vec::new();
            for run in &runs {
                let column: Vec<f64> = run.draws.column(d).to_vec();
                for half in [&column[..column.len() / 2], &column[column.len() / 2..]] {
                    let m = half.iter().sum::<f64>() / half.len() as f64;
                    let v = half.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
                        / (half.len() as f64 - 1.0);
                    batch_means.push(m);
                    batch_vars.push(v);
                }
                all.extend(column);
            }
            let n = all.len() as f64;
            let mean = all.iter().sum::<f64>() / n;
            let var = all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            // MC standard errors from the scatter of per-half-chain estimates
            let se = |batch: &[f64]| -> f64 {
                let b = batch.len() as f64;
                let m = batch.iter().sum::<f64>() / b;
                let v = batch.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1.0);
                (v / b).sqrt()
            };
            let se_mean = se(&batch_means).max(1e-3);
            let se_var = se(&batch_vars).max(1e-3);
            assert!(mean.abs() < 3.0 * se_mean, "mean {mean} (se {se_mean})");
            assert!((var - 1.0).abs() < 3.0 * se_var, "var {var} (se {se_var})");
        }
    }


    #[test]
    fn sampling_is_deterministic_given_seed() {
        let d = toy_dataset();
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let config =
            SamplerConfig { chains: 2, warmup: 100, draws: 50, seed: 7, ..Default::default() };
        let a = sample(&spec, &d, &config).unwrap();
        let b = sample(&spec, &d, &config).unwrap();
        assert_eq!(a.draws.chains, b.draws.chains);
        let c = sample(
            &spec,
            &d,
            &SamplerConfig { seed: 8, ..config },
        )
        .unwrap();
        assert_ne!(a.draws.chains, c.draws.chains);
    }

    #[test]
    fn draws_satisfy_constrained_invariants() {
        let d = toy_dataset();
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let config =
            SamplerConfig { chains: 2, warmup: 200, draws: 100, seed: 11, ..Default::default() };
        let out = sample(&spec, &d, &config).unwrap();
        for chain in 0..out.draws.n_chains() {
            for draw in 0..out.draws.draws_per_chain() {
                let params = out.draws.params_at(chain, draw).unwrap();
                params.validate().unwrap();
            }
        }
        assert!(out.diagnostics.r_hat.iter().all(|r| *r >= 1.0 - 1e-6));
    }

    #[test]
    fn acceptance_lands_near_target() {
        let d = toy_dataset();
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let config = SamplerConfig {
            chains: 2,
            warmup: 800,
            draws: 800,
            seed: 3,
            ..Default::default()
        };
        let out = sample(&spec, &d, &config).unwrap();
        for accept in &out.diagnostics.acceptance {
            assert!(
                (accept - config.target_accept).abs() < 0.1,
                "acceptance {accept} vs target {}",
                config.target_accept
            );
        }
    }

    #[test]
    fn csv_export_has_expected_shape() {
        let d = toy_dataset();
        let spec = resolve_spec(Variant::DawidSkene, 2, 2, &PriorOverrides::default()).unwrap();
        let config =
            SamplerConfig { chains: 2, warmup: 50, draws: 10, seed: 5, ..Default::default() };
        let out = sample(&spec, &d, &config).unwrap();
        let mut buf = Vec::new();
        out.draws.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 10);
        assert!(lines[0].starts_with("chain,iteration,pi[1],pi[2],theta[1,1,1]"));
    }
}
