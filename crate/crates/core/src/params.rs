//! Parameter containers and the bijection between constrained and
//! unconstrained coordinates.
//!
//! Simplexes use the additive log-ratio transform with the last category as
//! reference (K-1 free coordinates, log-Jacobian = sum of log components),
//! probabilities in (0,1) use the logit, and positive scales use the log.

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Variant;

pub const SIMPLEX_TOL: f64 = 1e-12;

/// Full-model parameters: prevalence simplex and one K x K row-stochastic
/// error matrix per rater.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsParams {
    pub pi: Vec<f64>,
    pub theta: Array3<f64>,
}

/// Class-conditional parameters: prevalence plus the correct-rating
/// probability for each (rater, class); off-diagonal error mass is uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcParams {
    pub pi: Vec<f64>,
    pub accuracy: Array2<f64>,
}

/// Hierarchical parameters: population locations and scales for error-matrix
/// logits, plus the per-rater logits themselves. Error matrices are derived
/// as row-wise softmax of `gamma` and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdsParams {
    pub pi: Vec<f64>,
    pub mu: Array2<f64>,
    pub sigma: Array2<f64>,
    pub gamma: Array3<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Params {
    DawidSkene(DsParams),
    ClassConditional(CcParams),
    Hierarchical(HdsParams),
}

/// Which parameterization a vector of coordinates describes. The homogeneous
/// variant shares the Dawid-Skene parameterization with a single rater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub variant: Variant,
    pub categories: usize,
    pub raters: usize,
}

impl Layout {
    pub fn new(variant: Variant, categories: usize, raters: usize) -> Self {
        Self { variant, categories, raters }
    }

    fn is_ds(&self) -> bool {
        matches!(self.variant, Variant::DawidSkene | Variant::Homogeneous)
    }

    /// Number of unconstrained coordinates.
    pub fn unconstrained_dim(&self) -> usize {
        let k = self.categories;
        let j = self.raters;
        match self.variant {
            Variant::DawidSkene | Variant::Homogeneous => (k - 1) * (1 + j * k),
            Variant::ClassConditional => (k - 1) + j * k,
            Variant::Hierarchical => (k - 1) + 2 * k * k + j * k * k,
        }
    }

    /// Number of constrained parameters (those reported in draws).
    pub fn constrained_len(&self) -> usize {
        let k = self.categories;
        let j = self.raters;
        match self.variant {
            Variant::DawidSkene | Variant::Homogeneous => k + j * k * k,
            Variant::ClassConditional => k + j * k,
            Variant::Hierarchical => k + 2 * k * k + j * k * k,
        }
    }

    /// Canonical constrained-parameter names, 1-based, matching `flatten`.
    pub fn names(&self) -> Vec<String> {
        let k = self.categories;
        let j = self.raters;
        let mut names = Vec::with_capacity(self.constrained_len());
        for a in 1..=k {
            names.push(format!("pi[{a}]"));
        }
        match self.variant {
            Variant::DawidSkene | Variant::Homogeneous => {
                for r in 1..=j {
                    for a in 1..=k {
                        for b in 1..=k {
                            names.push(format!("theta[{r},{a},{b}]"));
                        }
                    }
                }
            }
            Variant::ClassConditional => {
                for r in 1..=j {
                    for a in 1..=k {
                        names.push(format!("p[{r},{a}]"));
                    }
                }
            }
            Variant::Hierarchical => {
                for a in 1..=k {
                    for b in 1..=k {
                        names.push(format!("mu[{a},{b}]"));
                    }
                }
                for a in 1..=k {
                    for b in 1..=k {
                        names.push(format!("sigma[{a},{b}]"));
                    }
                }
                for r in 1..=j {
                    for a in 1..=k {
                        for b in 1..=k {
                            names.push(format!("gamma[{r},{a},{b}]"));
                        }
                    }
                }
            }
        }
        names
    }
}

impl Params {
    pub fn layout(&self) -> Layout {
        match self {
            Params::DawidSkene(p) => {
                Layout::new(Variant::DawidSkene, p.pi.len(), p.theta.dim().0)
            }
            Params::ClassConditional(p) => {
                Layout::new(Variant::ClassConditional, p.pi.len(), p.accuracy.dim().0)
            }
            Params::Hierarchical(p) => {
                Layout::new(Variant::Hierarchical, p.pi.len(), p.gamma.dim().0)
            }
        }
    }

    pub fn pi(&self) -> &[f64] {
        match self {
            Params::DawidSkene(p) => &p.pi,
            Params::ClassConditional(p) => &p.pi,
            Params::Hierarchical(p) => &p.pi,
        }
    }

    /// Materialize the per-rater error matrices.
    pub fn error_matrices(&self) -> Array3<f64> {
        match self {
            Params::DawidSkene(p) => p.theta.clone(),
            Params::ClassConditional(p) => {
                let (j, k) = p.accuracy.dim();
                let mut theta = Array3::zeros((j, k, k));
                for r in 0..j {
                    for a in 0..k {
                        let acc = p.accuracy[[r, a]];
                        let off = (1.0 - acc) / (k as f64 - 1.0);
                        for b in 0..k {
                            theta[[r, a, b]] = if a == b { acc } else { off };
                        }
                    }
                }
                theta
            }
            Params::Hierarchical(p) => {
                let (j, k, _) = p.gamma.dim();
                let mut theta = Array3::zeros((j, k, k));
                for r in 0..j {
                    for a in 0..k {
                        let row: Vec<f64> = (0..k).map(|b| p.gamma[[r, a, b]]).collect();
                        let probs = softmax(&row);
                        for b in 0..k {
                            theta[[r, a, b]] = probs[b];
                        }
                    }
                }
                theta
            }
        }
    }

    /// Check simplex and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        check_simplex(self.pi(), "pi")?;
        match self {
            Params::DawidSkene(p) => {
                let (j, k, _) = p.theta.dim();
                for r in 0..j {
                    for a in 0..k {
                        let row: Vec<f64> = (0..k).map(|b| p.theta[[r, a, b]]).collect();
                        check_simplex(&row, &format!("theta[{},{}]", r + 1, a + 1))?;
                    }
                }
            }
            Params::ClassConditional(p) => {
                for &v in p.accuracy.iter() {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::domain(format!(
                            "accuracy entries must lie in (0,1), got {v}"
                        )));
                    }
                }
            }
            Params::Hierarchical(p) => {
                for &v in p.sigma.iter() {
                    if !(v > 0.0) {
                        return Err(Error::domain(format!("sigma must be positive, got {v}")));
                    }
                }
                if p.gamma.iter().chain(p.mu.iter()).any(|v| !v.is_finite()) {
                    return Err(Error::domain("mu and gamma must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Flatten to the constrained vector matching `Layout::names`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.layout().constrained_len());
        out.extend_from_slice(self.pi());
        match self {
            Params::DawidSkene(p) => out.extend(p.theta.iter().copied()),
            Params::ClassConditional(p) => out.extend(p.accuracy.iter().copied()),
            Params::Hierarchical(p) => {
                out.extend(p.mu.iter().copied());
                out.extend(p.sigma.iter().copied());
                out.extend(p.gamma.iter().copied());
            }
        }
        out
    }

    /// Rebuild from a constrained vector laid out as in `Layout::names`.
    pub fn from_flat(layout: &Layout, values: &[f64]) -> Result<Params> {
        if values.len() != layout.constrained_len() {
            return Err(Error::shape(format!(
                "constrained vector has {} entries, expected {}",
                values.len(),
                layout.constrained_len()
            )));
        }
        let k = layout.categories;
        let j = layout.raters;
        let pi = values[..k].to_vec();
        let rest = &values[k..];
        let params = if layout.is_ds() {
            let theta = Array3::from_shape_vec((j, k, k), rest.to_vec())
                .map_err(|e| Error::shape(e.to_string()))?;
            Params::DawidSkene(DsParams { pi, theta })
        } else if layout.variant == Variant::ClassConditional {
            let accuracy = Array2::from_shape_vec((j, k), rest.to_vec())
                .map_err(|e| Error::shape(e.to_string()))?;
            Params::ClassConditional(CcParams { pi, accuracy })
        } else {
            let kk = k * k;
            let mu = Array2::from_shape_vec((k, k), rest[..kk].to_vec())
                .map_err(|e| Error::shape(e.to_string()))?;
            let sigma = Array2::from_shape_vec((k, k), rest[kk..2 * kk].to_vec())
                .map_err(|e| Error::shape(e.to_string()))?;
            let gamma = Array3::from_shape_vec((j, k, k), rest[2 * kk..].to_vec())
                .map_err(|e| Error::shape(e.to_string()))?;
            Params::Hierarchical(HdsParams { pi, mu, sigma, gamma })
        };
        Ok(params)
    }
}

fn check_simplex(values: &[f64], what: &str) -> Result<()> {
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::domain(format!("{what} sums to {sum}, expected 1")));
    }
    for &v in values {
        if !(v > 0.0 && v < 1.0) && values.len() > 1 {
            return Err(Error::domain(format!(
                "{what} entries must lie strictly inside (0,1), got {v}"
            )));
        }
    }
    Ok(())
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Additive log-ratio coordinates of a simplex (length K-1).
fn simplex_to_alr(simplex: &[f64], out: &mut Vec<f64>) -> Result<()> {
    let last = *simplex.last().expect("simplex is non-empty");
    for &v in &simplex[..simplex.len() - 1] {
        if !(v > 0.0 && v < 1.0) || !(last > 0.0) {
            return Err(Error::domain(
                "cannot map a boundary simplex to unconstrained coordinates",
            ));
        }
        out.push((v / last).ln());
    }
    Ok(())
}

fn alr_to_simplex(alr: &[f64]) -> Vec<f64> {
    let mut logits = alr.to_vec();
    logits.push(0.0);
    softmax(&logits)
}

fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("logit needs p in (0,1), got {p}")));
    }
    Ok((p / (1.0 - p)).ln())
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Map constrained parameters to the flat unconstrained vector.
pub fn to_unconstrained(params: &Params) -> Result<Vec<f64>> {
    let layout = params.layout();
    let mut v = Vec::with_capacity(layout.unconstrained_dim());
    simplex_to_alr(params.pi(), &mut v)?;
    match params {
        Params::DawidSkene(p) => {
            let (j, k, _) = p.theta.dim();
            for r in 0..j {
                for a in 0..k {
                    let row: Vec<f64> = (0..k).map(|b| p.theta[[r, a, b]]).collect();
                    simplex_to_alr(&row, &mut v)?;
                }
            }
        }
        Params::ClassConditional(p) => {
            for &acc in p.accuracy.iter() {
                v.push(logit(acc)?);
            }
        }
        Params::Hierarchical(p) => {
            v.extend(p.mu.iter().copied());
            for &s in p.sigma.iter() {
                if !(s > 0.0) {
                    return Err(Error::domain(format!("sigma must be positive, got {s}")));
                }
                v.push(s.ln());
            }
            v.extend(p.gamma.iter().copied());
        }
    }
    debug_assert_eq!(v.len(), layout.unconstrained_dim());
    Ok(v)
}

/// Map a flat unconstrained vector back to constrained parameters.
pub fn from_unconstrained(layout: &Layout, v: &[f64]) -> Result<Params> {
    if v.len() != layout.unconstrained_dim() {
        return Err(Error::shape(format!(
            "unconstrained vector has {} coordinates, expected {}",
            v.len(),
            layout.unconstrained_dim()
        )));
    }
    let k = layout.categories;
    let j = layout.raters;
    let pi = alr_to_simplex(&v[..k - 1]);
    let rest = &v[k - 1..];
    let params = if layout.is_ds() {
        let mut theta = Array3::zeros((j, k, k));
        for r in 0..j {
            for a in 0..k {
                let offset = (r * k + a) * (k - 1);
                let row = alr_to_simplex(&rest[offset..offset + k - 1]);
                for b in 0..k {
                    theta[[r, a, b]] = row[b];
                }
            }
        }
        Params::DawidSkene(DsParams { pi, theta })
    } else if layout.variant == Variant::ClassConditional {
        let mut accuracy = Array2::zeros((j, k));
        for r in 0..j {
            for a in 0..k {
                accuracy[[r, a]] = sigmoid(rest[r * k + a]);
            }
        }
        Params::ClassConditional(CcParams { pi, accuracy })
    } else {
        let kk = k * k;
        let mu = Array2::from_shape_vec((k, k), rest[..kk].to_vec()).expect("shape checked");
        let sigma = Array2::from_shape_vec(
            (k, k),
            rest[kk..2 * kk].iter().map(|&s| s.exp()).collect(),
        )
        .expect("shape checked");
        let gamma = Array3::from_shape_vec((j, k, k), rest[2 * kk..].to_vec())
            .expect("shape checked");
        Params::Hierarchical(HdsParams { pi, mu, sigma, gamma })
    };
    Ok(params)
}

/// Log absolute determinant of the unconstrained-to-constrained map, evaluated
/// at the constrained point.
pub fn log_jacobian(params: &Params) -> f64 {
    let mut lj: f64 = params.pi().iter().map(|&p| p.ln()).sum();
    match params {
        Params::DawidSkene(p) => {
            lj += p.theta.iter().map(|&t| t.ln()).sum::<f64>();
        }
        Params::ClassConditional(p) => {
            lj += p.accuracy.iter().map(|&a| a.ln() + (1.0 - a).ln()).sum::<f64>();
        }
        Params::Hierarchical(p) => {
            lj += p.sigma.iter().map(|&s| s.ln()).sum::<f64>();
        }
    }
    lj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_ds() -> Params {
        let pi = vec![0.5, 0.3, 0.2];
        let mut theta = Array3::zeros((2, 3, 3));
        for r in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    theta[[r, a, b]] = if a == b { 0.8 } else { 0.1 };
                }
            }
        }
        Params::DawidSkene(DsParams { pi, theta })
    }

    #[test]
    fn symmetric_simplex_maps_to_zero() {
        let mut v = Vec::new();
        simplex_to_alr(&[0.5, 0.5], &mut v).unwrap();
        assert_eq!(v, vec![0.0]);
    }

    #[test]
    fn alr_closed_form() {
        let mut v = Vec::new();
        simplex_to_alr(&[0.8, 0.2], &mut v).unwrap();
        assert!((v[0] - 4.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn round_trip_within_tolerance() {
        let params = toy_ds();
        let v = to_unconstrained(&params).unwrap();
        let back = from_unconstrained(&params.layout(), &v).unwrap();
        let (a, b) = (params.flatten(), back.flatten());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn boundary_values_are_rejected() {
        let params = Params::ClassConditional(CcParams {
            pi: vec![0.5, 0.5],
            accuracy: Array2::from_elem((1, 2), 1.0),
        });
        assert!(to_unconstrained(&params).is_err());
    }

    #[test]
    fn unconstrained_dims_match_flattened_transforms() {
        for variant in [Variant::DawidSkene, Variant::ClassConditional, Variant::Hierarchical] {
            let layout = Layout::new(variant, 3, 2);
            let v = vec![0.1; layout.unconstrained_dim()];
            let params = from_unconstrained(&layout, &v).unwrap();
            params.validate().unwrap();
            let back = to_unconstrained(&params).unwrap();
            assert_eq!(back.len(), layout.unconstrained_dim());
            assert_eq!(params.flatten().len(), layout.constrained_len());
            assert_eq!(layout.names().len(), layout.constrained_len());
        }
    }

    #[test]
    fn flatten_round_trips() {
        let params = toy_ds();
        let flat = params.flatten();
        let back = Params::from_flat(&params.layout(), &flat).unwrap();
        assert_eq!(params, back);
    }
}
