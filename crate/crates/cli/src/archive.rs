//! Fit archives: a single JSON document with human-readable headers and
//! base64-packed draw matrices. Reloading an archive reproduces the fit
//! object exactly, so summaries are identical before and after a round trip.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use ndarray::Array2;
use ratings::dataset::{serialize, Format, RatingDataset};
use ratings::diagnostics::Diagnostics;
use ratings::fit::{FitMethod, FitResult};
use ratings::mcmc::{PosteriorDraws, SamplerConfig};
use ratings::model::ModelSpec;
use ratings::optimize::{MapOptions, MapResult};
use ratings::params::{Layout, Params};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const ARCHIVE_FORMAT: &str = "ratings-fit/1";

#[derive(Debug, Serialize, Deserialize)]
pub struct DataSummary {
    pub source: String,
    pub format: String,
    pub fingerprint: String,
    pub items: usize,
    pub raters: usize,
    pub categories: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DrawsBlock {
    pub draws_per_chain: usize,
    /// One base64 block per chain: row-major f64 little-endian, one row per
    /// draw, one column per parameter.
    pub chains: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModeBlock {
    pub values: Vec<f64>,
    pub log_posterior: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixBlock {
    pub rows: usize,
    pub columns: usize,
    pub values: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Archive {
    pub format: String,
    pub method: FitMethod,
    pub seed: u64,
    pub spec: ModelSpec,
    pub sampler: Option<SamplerConfig>,
    pub optimizer: Option<MapOptions>,
    pub data: DataSummary,
    pub parameter_names: Vec<String>,
    pub draws: Option<DrawsBlock>,
    pub mode: Option<ModeBlock>,
    pub class_probabilities: MatrixBlock,
    pub diagnostics: Option<Diagnostics>,
    pub warnings: Vec<String>,
}

pub fn fingerprint(dataset: &RatingDataset) -> String {
    let canonical = serialize(dataset);
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

fn encode_f64s(values: impl Iterator<Item = f64>) -> String {
    let mut bytes = Vec::new();
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn decode_f64s(text: &str, expected: usize) -> Result<Vec<f64>, CliError> {
    let bytes = BASE64
        .decode(text)
        .map_err(|e| CliError::corrupt(format!("invalid base64 block: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(CliError::corrupt(format!(
            "block holds {} bytes, expected {}",
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn encode_matrix(m: &Array2<f64>) -> MatrixBlock {
    MatrixBlock {
        rows: m.nrows(),
        columns: m.ncols(),
        values: encode_f64s(m.iter().copied()),
    }
}

fn decode_matrix(block: &MatrixBlock) -> Result<Array2<f64>, CliError> {
    let values = decode_f64s(&block.values, block.rows * block.columns)?;
    Array2::from_shape_vec((block.rows, block.columns), values)
        .map_err(|e| CliError::corrupt(format!("bad matrix block: {e}")))
}

pub struct ArchiveInputs<'a> {
    pub fit: &'a FitResult,
    pub dataset: &'a RatingDataset,
    pub data_format: Format,
    pub source: String,
    pub seed: u64,
    pub sampler: Option<SamplerConfig>,
    pub optimizer: Option<MapOptions>,
}

pub fn build(inputs: &ArchiveInputs) -> Archive {
    let fit = inputs.fit;
    let layout = Layout::new(fit.spec.variant, fit.spec.categories, fit.spec.raters);
    let draws = fit.draws.as_ref().map(|d| DrawsBlock {
        draws_per_chain: d.draws_per_chain(),
        chains: d.chains.iter().map(|c| encode_f64s(c.iter().copied())).collect(),
    });
    let mode = fit.mode.as_ref().map(|m| ModeBlock {
        values: m.params.flatten(),
        log_posterior: m.log_posterior,
        converged: m.converged,
        iterations: m.iterations,
    });
    Archive {
        format: ARCHIVE_FORMAT.into(),
        method: fit.method,
        seed: inputs.seed,
        spec: fit.spec.clone(),
        sampler: inputs.sampler.clone(),
        optimizer: inputs.optimizer.clone(),
        data: DataSummary {
            source: inputs.source.clone(),
            format: inputs.data_format.as_str().into(),
            fingerprint: fingerprint(inputs.dataset),
            items: inputs.dataset.items(),
            raters: inputs.dataset.raters(),
            categories: inputs.dataset.categories(),
        },
        parameter_names: layout.names(),
        draws,
        mode,
        class_probabilities: encode_matrix(&fit.class_probabilities),
        diagnostics: fit.diagnostics.clone(),
        warnings: fit.warnings.clone(),
    }
}

pub fn to_json(archive: &Archive) -> String {
    serde_json::to_string_pretty(archive).expect("archive serializes")
}

pub fn read(path: &str) -> Result<Archive, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::corrupt(format!("cannot read archive {path}: {e}")))?;
    let archive: Archive = serde_json::from_str(&text)
        .map_err(|e| CliError::corrupt(format!("cannot parse archive {path}: {e}")))?;
    if archive.format != ARCHIVE_FORMAT {
        return Err(CliError::corrupt(format!(
            "unsupported archive format '{}'",
            archive.format
        )));
    }
    Ok(archive)
}

/// Rebuild the in-memory fit from an archive.
pub fn to_fit(archive: &Archive) -> Result<FitResult, CliError> {
    let layout = Layout::new(
        archive.spec.variant,
        archive.spec.categories,
        archive.spec.raters,
    );
    if archive.parameter_names != layout.names() {
        return Err(CliError::corrupt("parameter names do not match the model spec".into()));
    }
    let p = layout.constrained_len();
    let draws = match &archive.draws {
        Some(block) => {
            let mut chains = Vec::with_capacity(block.chains.len());
            for encoded in &block.chains {
                let values = decode_f64s(encoded, block.draws_per_chain * p)?;
                chains.push(
                    Array2::from_shape_vec((block.draws_per_chain, p), values)
                        .map_err(|e| CliError::corrupt(format!("bad draw block: {e}")))?,
                );
            }
            Some(PosteriorDraws { layout, names: archive.parameter_names.clone(), chains })
        }
        None => None,
    };
    let mode = match &archive.mode {
        Some(block) => {
            let params = Params::from_flat(&layout, &block.values)
                .map_err(|e| CliError::corrupt(format!("bad mode block: {e}")))?;
            Some(MapResult {
                params,
                log_posterior: block.log_posterior,
                converged: block.converged,
                iterations: block.iterations,
                trace: Vec::new(),
                warnings: Vec::new(),
            })
        }
        None => None,
    };
    if draws.is_none() && mode.is_none() {
        return Err(CliError::corrupt("archive holds neither draws nor a mode".into()));
    }
    Ok(FitResult {
        spec: archive.spec.clone(),
        method: archive.method,
        draws,
        mode,
        diagnostics: archive.diagnostics.clone(),
        class_probabilities: decode_matrix(&archive.class_probabilities)?,
        warnings: archive.warnings.clone(),
    })
}
