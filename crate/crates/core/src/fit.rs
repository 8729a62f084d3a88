//! High-level fitting: dispatch a model spec and dataset to MAP or MCMC and
//! assemble the result with its class-probability table.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::RatingDataset;
use crate::diagnostics::Diagnostics;
use crate::error::{Error, Result};
use crate::likelihood::LikelihoodData;
use crate::mcmc::{sample, PosteriorDraws, SamplerConfig};
use crate::model::{ModelSpec, Variant};
use crate::optimize::{em_fit, gradient_map_fit, MapOptions, MapResult};
use crate::posterior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Mcmc,
    Optim,
}

impl FitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitMethod::Mcmc => "MCMC",
            FitMethod::Optim => "optimisation",
        }
    }
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mcmc" => Ok(FitMethod::Mcmc),
            "optim" => Ok(FitMethod::Optim),
            other => Err(Error::domain(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub method: FitMethod,
    pub sampler: SamplerConfig,
    pub map: MapOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            method: FitMethod::Mcmc,
            sampler: SamplerConfig::default(),
            map: MapOptions::default(),
        }
    }
}

/// A fitted model: posterior draws (MCMC) or a mode (optimisation), the
/// Rao-Blackwellized class-probability table, and diagnostics where they
/// exist.
#[derive(Debug)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub method: FitMethod,
    pub draws: Option<PosteriorDraws>,
    pub mode: Option<MapResult>,
    pub diagnostics: Option<Diagnostics>,
    /// One row per item; rows sum to 1.
    pub class_probabilities: Array2<f64>,
    pub warnings: Vec<String>,
}

/// Fit `spec` to `dataset`. The homogeneous variant relabels the data to a
/// single pooled rater and then fits the full model; grouped datasets use the
/// pattern-tally likelihood throughout.
pub fn fit(spec: &ModelSpec, dataset: &RatingDataset, options: &FitOptions) -> Result<FitResult> {
    let fit_data = posterior::fit_dataset(spec.variant, dataset)?;
    let data = LikelihoodData::new(&fit_data)?;
    if data.categories() > spec.categories {
        return Err(Error::shape(format!(
            "data contains rating {} but the model covers {} categories",
            data.categories(),
            spec.categories
        )));
    }
    if data.raters() > spec.raters {
        return Err(Error::shape(format!(
            "data contains rater {} but the model covers {} raters",
            data.raters(),
            spec.raters
        )));
    }

    match options.method {
        FitMethod::Mcmc => {
            let out = sample(spec, &fit_data, &options.sampler)?;
            let class_probabilities = posterior::mean_conditional_z(&out.draws, &data)?;
            let warnings = out.diagnostics.warnings.clone();
            Ok(FitResult {
                spec: spec.clone(),
                method: FitMethod::Mcmc,
                draws: Some(out.draws),
                mode: None,
                diagnostics: Some(out.diagnostics),
                class_probabilities,
                warnings,
            })
        }
        FitMethod::Optim => {
            let mode = match spec.variant {
                Variant::Hierarchical => gradient_map_fit(spec, &fit_data, None, &options.map)?,
                _ => em_fit(spec, &fit_data, None, &options.map)?,
            };
            let resp = posterior::conditional_weights(&mode.params, &data)?;
            let class_probabilities = expand(&resp, &data);
            let warnings = mode.warnings.clone();
            Ok(FitResult {
                spec: spec.clone(),
                method: FitMethod::Optim,
                draws: None,
                mode: Some(mode),
                diagnostics: None,
                class_probabilities,
                warnings,
            })
        }
    }
}

fn expand(resp: &Array2<f64>, data: &LikelihoodData) -> Array2<f64> {
    if !data.from_grouped() {
        return resp.clone();
    }
    let weights = data.weights();
    let total: usize = weights.iter().map(|&w| w as usize).sum();
    let mut out = Array2::zeros((total, resp.ncols()));
    let mut item = 0;
    for (g, &w) in weights.iter().enumerate() {
        for _ in 0..w as usize {
            out.row_mut(item).assign(&resp.row(g));
            item += 1;
        }
    }
    out
}
