//! Model variants and prior resolution.
//!
//! Four variants share one latent-class structure: the full model with a free
//! error matrix per rater, a class-conditional restriction (single correct-
//! rating probability per rater and class), a hierarchical version that pools
//! error matrices across raters through a normal population model, and a
//! homogeneous version obtained by relabelling all ratings to a single pooled
//! rater.

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::dataset::{LongEntry, LongRatings, RatingDataset};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 3.0;
pub const DEFAULT_PSEUDOCOUNT: f64 = 8.0;
pub const DEFAULT_ACCURACY: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    DawidSkene,
    ClassConditional,
    Hierarchical,
    Homogeneous,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::DawidSkene => "dawid-skene",
            Variant::ClassConditional => "class-conditional",
            Variant::Hierarchical => "hierarchical",
            Variant::Homogeneous => "homogeneous",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dawid-skene" | "dawid_skene" => Ok(Variant::DawidSkene),
            "class-conditional" | "class_conditional" => Ok(Variant::ClassConditional),
            "hierarchical" => Ok(Variant::Hierarchical),
            "homogeneous" => Ok(Variant::Homogeneous),
            other => Err(Error::domain(format!("unknown model variant '{other}'"))),
        }
    }
}

/// Dirichlet prior for the full model: `alpha` on the prevalence simplex and a
/// per-rater stack of K x K Dirichlet row parameters on the error matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPrior {
    pub alpha: Vec<f64>,
    pub beta: Array3<f64>,
}

/// Beta prior on the per-(rater, class) correct-rating probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConditionalPrior {
    pub alpha: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
}

/// Standard-normal location and half-normal(0,1) scale hyper-priors for the
/// population model on error-matrix logits. The scales are fixed; only the
/// prevalence prior is adjustable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalPrior {
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prior {
    Dirichlet(DirichletPrior),
    ClassConditional(ClassConditionalPrior),
    Hierarchical(HierarchicalPrior),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Default,
    Custom,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::Default => "default",
            Origin::Custom => "custom",
        }
    }
}

/// A variant plus fully numeric prior hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub categories: usize,
    pub raters: usize,
    pub prior: Prior,
    pub alpha_origin: Origin,
    pub beta_origin: Origin,
}

/// User-supplied prior pieces; anything left `None` falls back to the default
/// construction from (N, p).
#[derive(Debug, Clone, Default)]
pub struct PriorOverrides {
    pub alpha: Option<Vec<f64>>,
    /// A single K x K matrix is broadcast to all raters.
    pub beta_matrix: Option<Array2<f64>>,
    /// A per-rater J x K x K stack.
    pub beta_array: Option<Array3<f64>>,
    pub pseudocount: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Default error-matrix prior: diagonal `N * p`, off-diagonal `N * (1 - p) / (K - 1)`,
/// so each row carries a pseudo-sample of size N centred on accuracy p.
pub fn default_beta(categories: usize, pseudocount: f64, accuracy: f64) -> Result<Array2<f64>> {
    if categories < 2 {
        return Err(Error::domain("default beta needs at least 2 categories"));
    }
    if pseudocount <= 0.0 {
        return Err(Error::domain("pseudo-sample size must be positive"));
    }
    if accuracy <= 0.0 || accuracy >= 1.0 {
        return Err(Error::domain("assumed accuracy must lie strictly between 0 and 1"));
    }
    let off = pseudocount * (1.0 - accuracy) / (categories as f64 - 1.0);
    let mut beta = Array2::from_elem((categories, categories), off);
    for k in 0..categories {
        beta[[k, k]] = pseudocount * accuracy;
    }
    Ok(beta)
}

fn all_positive(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    for v in values {
        if !(v > 0.0) {
            return Err(Error::domain(format!("{what} entries must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Resolve a variant, dimensions, and overrides into fully numeric
/// hyper-parameters. Idempotent: feeding a resolved prior back through the
/// overrides reproduces the same spec.
pub fn resolve_spec(
    variant: Variant,
    categories: usize,
    raters: usize,
    overrides: &PriorOverrides,
) -> Result<ModelSpec> {
    if categories < 2 {
        return Err(Error::domain("models need at least 2 categories"));
    }
    if raters == 0 {
        return Err(Error::domain("models need at least 1 rater"));
    }
    let pseudocount = overrides.pseudocount.unwrap_or(DEFAULT_PSEUDOCOUNT);
    let accuracy = overrides.accuracy.unwrap_or(DEFAULT_ACCURACY);
    if pseudocount <= 0.0 {
        return Err(Error::domain("pseudo-sample size must be positive"));
    }
    if accuracy <= 0.0 || accuracy >= 1.0 {
        return Err(Error::domain("assumed accuracy must lie strictly between 0 and 1"));
    }

    let alpha = match &overrides.alpha {
        Some(a) => {
            if a.len() != categories {
                return Err(Error::shape(format!(
                    "alpha has {} entries, expected {categories}",
                    a.len()
                )));
            }
            all_positive(a.iter().copied(), "alpha")?;
            a.clone()
        }
        None => vec![DEFAULT_ALPHA; categories],
    };
    let alpha_origin = if overrides.alpha.is_some() { Origin::Custom } else { Origin::Default };

    // The homogeneous variant pools everything into one rater.
    let prior_raters = if variant == Variant::Homogeneous { 1 } else { raters };

    let custom_beta = overrides.beta_matrix.is_some()
        || overrides.beta_array.is_some()
        || overrides.pseudocount.is_some()
        || overrides.accuracy.is_some();
    let beta_origin = if custom_beta { Origin::Custom } else { Origin::Default };

    let prior = match variant {
        Variant::DawidSkene | Variant::Homogeneous => {
            let beta = if let Some(array) = &overrides.beta_array {
                if array.dim() != (prior_raters, categories, categories) {
                    return Err(Error::shape(format!(
                        "beta array has shape {:?}, expected ({prior_raters}, {categories}, {categories})",
                        array.dim()
                    )));
                }
                all_positive(array.iter().copied(), "beta")?;
                array.clone()
            } else {
                let matrix = match &overrides.beta_matrix {
                    Some(m) => {
                        if m.dim() != (categories, categories) {
                            return Err(Error::shape(format!(
                                "beta matrix has shape {:?}, expected ({categories}, {categories})",
                                m.dim()
                            )));
                        }
                        all_positive(m.iter().copied(), "beta")?;
                        m.clone()
                    }
                    None => default_beta(categories, pseudocount, accuracy)?,
                };
                broadcast_beta(&matrix, prior_raters)
            };
            Prior::Dirichlet(DirichletPrior { alpha, beta })
        }
        Variant::ClassConditional => {
            if overrides.beta_array.is_some() {
                return Err(Error::unsupported(
                    "class-conditional priors take (N, p), not a per-rater beta array",
                ));
            }
            let (beta1, beta2) = match &overrides.beta_matrix {
                // A 2-row matrix is read as (beta1; beta2) rows of length K.
                Some(m) => {
                    if m.dim() != (2, categories) {
                        return Err(Error::shape(format!(
                            "class-conditional beta has shape {:?}, expected (2, {categories})",
                            m.dim()
                        )));
                    }
                    all_positive(m.iter().copied(), "beta")?;
                    (m.row(0).to_vec(), m.row(1).to_vec())
                }
                None => (
                    vec![pseudocount * accuracy; categories],
                    vec![pseudocount * (1.0 - accuracy); categories],
                ),
            };
            Prior::ClassConditional(ClassConditionalPrior { alpha, beta1, beta2 })
        }
        Variant::Hierarchical => Prior::Hierarchical(HierarchicalPrior { alpha }),
    };

    Ok(ModelSpec {
        variant,
        categories,
        raters: prior_raters,
        prior,
        alpha_origin,
        beta_origin,
    })
}

fn broadcast_beta(matrix: &Array2<f64>, raters: usize) -> Array3<f64> {
    let k = matrix.nrows();
    let mut beta = Array3::zeros((raters, k, k));
    for j in 0..raters {
        beta.index_axis_mut(ndarray::Axis(0), j).assign(matrix);
    }
    beta
}

impl ModelSpec {
    pub fn alpha(&self) -> &[f64] {
        match &self.prior {
            Prior::Dirichlet(p) => &p.alpha,
            Prior::ClassConditional(p) => &p.alpha,
            Prior::Hierarchical(p) => &p.alpha,
        }
    }
}

/// Warn when optimisation would see off-diagonal Dirichlet pseudo-counts below
/// 1 (or class-conditional Beta parameters below 1), which push the mode to the
/// boundary. Sampling is unaffected, so callers only consult this on the
/// optimisation path.
pub fn check_offdiagonal_beta(spec: &ModelSpec) -> Vec<String> {
    let mut warnings = Vec::new();
    match &spec.prior {
        Prior::Dirichlet(p) => {
            let mut smallest: Option<f64> = None;
            for j in 0..p.beta.dim().0 {
                for k in 0..spec.categories {
                    for k2 in 0..spec.categories {
                        if k != k2 {
                            let v = p.beta[[j, k, k2]];
                            if v < 1.0 {
                                smallest =
                                    Some(smallest.map_or(v, |s: f64| s.min(v)));
                            }
                        }
                    }
                }
            }
            if let Some(v) = smallest {
                warnings.push(format!(
                    "off-diagonal beta prior entries as small as {v:.4} are below 1; \
                     the posterior mode may sit on the simplex boundary. Consider larger \
                     beta values (e.g. a bigger prior pseudo-count) when optimising."
                ));
            }
        }
        Prior::ClassConditional(p) => {
            if p.beta1.iter().chain(&p.beta2).any(|&v| v < 1.0) {
                warnings.push(
                    "Beta prior parameters below 1 can push the posterior mode to 0 or 1 \
                     when optimising; consider larger values."
                        .into(),
                );
            }
        }
        Prior::Hierarchical(_) => {}
    }
    warnings
}

/// Relabel every rating as coming from a single pooled rater. Items, ratings,
/// and entry order are untouched.
pub fn homogenize(dataset: &RatingDataset) -> Result<RatingDataset> {
    let long = dataset.to_long()?;
    let l = long.as_long().expect("to_long returns long data");
    if l.raters() == 1 {
        return Ok(long);
    }
    let entries: Vec<LongEntry> = l
        .entries()
        .iter()
        .map(|e| LongEntry { item: e.item, rater: 0, rating: e.rating })
        .collect();
    let pooled = LongRatings::new(entries, l.categories(), l.item_labels().to_vec(), vec![1])?;
    Ok(RatingDataset::new(
        crate::dataset::RatingData::Long(pooled),
        long.provenance().clone(),
    ))
}
