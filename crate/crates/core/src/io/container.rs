//! Self-describing binary containers: 8-byte magic, `u64` LE header length,
//! JSON header, then a little-endian `f64` blob.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};
use crate::models::dataset::{DatasetConfig, EqInput, Origin, SymbolDataset};
use crate::models::scheme::{ModelMeta, TrainedModel};
use crate::nn::MlpModel;
use crate::nr::pbch::CODED_BITS;
use crate::rx::Stage;

pub const MODEL_MAGIC: &[u8; 8] = b"PBCHMDL1";
pub const DATASET_MAGIC: &[u8; 8] = b"PBCHDST1";

fn write_container<H: Serialize>(path: &Path, magic: &[u8; 8], header: &H, blob: &[f64]) -> Result<()> {
    let json = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(16 + json.len() + blob.len() * 8);
    out.extend_from_slice(magic);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in blob {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_container<H: DeserializeOwned>(path: &Path, magic: &[u8; 8]) -> Result<(H, Vec<f64>)> {
    let bytes = read_file(path)?;
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(Error::Format(format!(
            "{}: expected magic {}",
            path.display(),
            String::from_utf8_lossy(magic)
        )));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if len > body.len() {
        return Err(Error::Format(format!("header length {len} exceeds file")));
    }
    let header = serde_json::from_slice(&body[..len])?;
    let blob = &body[len..];
    if blob.len() % 8 != 0 {
        return Err(Error::Format(format!("blob of {} bytes is not f64-aligned", blob.len())));
    }
    let values = blob
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, values))
}

fn take<'a>(blob: &mut &'a [f64], n: usize) -> Result<&'a [f64]> {
    if blob.len() < n {
        return Err(Error::Format(format!("blob too short: need {n}, have {}", blob.len())));
    }
    let (head, tail) = blob.split_at(n);
    *blob = tail;
    Ok(head)
}

fn finish(blob: &[f64]) -> Result<()> {
    if blob.is_empty() {
        Ok(())
    } else {
        Err(Error::Format(format!("{} trailing values", blob.len())))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    layer_dims: Vec<usize>,
    hidden_activation: String,
    output_activation: String,
    meta: ModelMeta,
}

/// Header plus weights then biases of each layer, row-major.
pub fn save_model(tm: &TrainedModel, path: &Path) -> Result<()> {
    tm.model.validate()?;
    let header = ModelHeader {
        layer_dims: tm.model.layer_dims.clone(),
        hidden_activation: "tanh".into(),
        output_activation: "identity".into(),
        meta: tm.meta.clone(),
    };
    let mut blob = Vec::with_capacity(tm.model.num_params());
    for (w, b) in tm.model.weights.iter().zip(&tm.model.biases) {
        blob.extend(w.iter());
        blob.extend(b.iter());
    }
    write_container(path, MODEL_MAGIC, &header, &blob)
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let (h, values): (ModelHeader, _) = read_container(path, MODEL_MAGIC)?;
    if h.hidden_activation != "tanh" || h.output_activation != "identity" {
        return Err(Error::Format(format!(
            "unsupported activations {}/{}",
            h.hidden_activation, h.output_activation
        )));
    }
    if h.layer_dims.len() < 2 {
        return Err(Error::Format("model needs at least two layer dims".into()));
    }
    let mut blob = values.as_slice();
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for d in h.layer_dims.windows(2) {
        let w = take(&mut blob, d[0] * d[1])?;
        weights.push(Array2::from_shape_vec((d[0], d[1]), w.to_vec()).map_err(|e| Error::Format(e.to_string()))?);
        biases.push(Array1::from(take(&mut blob, d[1])?.to_vec()));
    }
    finish(blob)?;
    let model = MlpModel {
        layer_dims: h.layer_dims,
        weights,
        biases,
    };
    model.validate()?;
    Ok(TrainedModel { model, meta: h.meta })
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetDims {
    examples: usize,
    input_dim: usize,
    target_dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetCounts {
    redraws: usize,
    crc_failures: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    stage: Stage,
    eq_input: EqInput,
    origin: Origin,
    dims: DatasetDims,
    #[serde(with = "crate::serde_ext::inf_vec")]
    snr_tags: Vec<f64>,
    cell_ids: Vec<u16>,
    crc_pass: Vec<bool>,
    seeds: Vec<u64>,
    counts: DatasetCounts,
    config: Option<DatasetConfig>,
}

/// Header plus inputs, targets and MMSE outputs, each row-major.
pub fn save_dataset(ds: &SymbolDataset, config: Option<&DatasetConfig>, path: &Path) -> Result<()> {
    let header = DatasetHeader {
        stage: ds.stage,
        eq_input: ds.eq_input,
        origin: ds.origin,
        dims: DatasetDims {
            examples: ds.len(),
            input_dim: ds.input_dim(),
            target_dim: ds.targets.ncols(),
        },
        snr_tags: ds.snr_tags.clone(),
        cell_ids: ds.cell_ids.clone(),
        crc_pass: ds.crc_pass.clone(),
        seeds: ds.seeds.clone(),
        counts: DatasetCounts {
            redraws: ds.redraws,
            crc_failures: ds.crc_pass.iter().filter(|&&p| !p).count(),
        },
        config: config.cloned(),
    };
    let mut blob = Vec::with_capacity(ds.inputs.len() + 2 * ds.targets.len());
    blob.extend(ds.inputs.iter());
    blob.extend(ds.targets.iter());
    blob.extend(ds.mmse.iter());
    write_container(path, DATASET_MAGIC, &header, &blob)
}

pub fn load_dataset(path: &Path) -> Result<(SymbolDataset, Option<DatasetConfig>)> {
    let (h, values): (DatasetHeader, _) = read_container(path, DATASET_MAGIC)?;
    let DatasetDims {
        examples: n,
        input_dim,
        target_dim,
    } = h.dims;
    if target_dim != CODED_BITS {
        return Err(Error::Format(format!("target dim {target_dim}, expected {CODED_BITS}")));
    }
    for (what, len) in [
        ("snr_tags", h.snr_tags.len()),
        ("cell_ids", h.cell_ids.len()),
        ("crc_pass", h.crc_pass.len()),
        ("seeds", h.seeds.len()),
    ] {
        if len != n {
            return Err(Error::Format(format!("{what} has {len} entries for {n} examples")));
        }
    }
    let mut blob = values.as_slice();
    let mut matrix = |cols: usize| -> Result<Array2<f64>> {
        Array2::from_shape_vec((n, cols), take(&mut blob, n * cols)?.to_vec())
            .map_err(|e| Error::Format(e.to_string()))
    };
    let inputs = matrix(input_dim)?;
    let targets = matrix(target_dim)?;
    let mmse = matrix(target_dim)?;
    finish(blob)?;
    Ok((
        SymbolDataset {
            stage: h.stage,
            eq_input: h.eq_input,
            origin: h.origin,
            inputs,
            targets,
            mmse,
            snr_tags: h.snr_tags,
            cell_ids: h.cell_ids,
            crc_pass: h.crc_pass,
            seeds: h.seeds,
            redraws: h.counts.redraws,
        },
        h.config,
    ))
}
