//! The two network applications: Symbol Enhancement (refines MMSE output)
//! and Equalization (replaces channel estimation and equalization).
//!
//! Complex vectors are realified as interleaved `[re0, im0, re1, im1, ...]`.

pub mod dataset;
pub mod eval;
pub mod labels;
pub mod layout;
pub mod scheme;

use num_complex::Complex64;

pub use dataset::{
    build_synthetic_dataset, ChannelSpec, DatasetConfig, EqInput, Origin, SnrSpec, SymbolDataset,
};
pub use eval::{evaluate, EvalConfig, EvalReport, SnrPoint};
pub use labels::regenerate_labels;
pub use layout::BlockLayout;
pub use scheme::{train_scheme, ModelMeta, SchemeMode, TrainScheme, TrainedModel};

use crate::error::{Error, Result};

pub const DEFAULT_SNR_GRID: [f64; 7] = [0.0, 2.0, 5.0, 7.0, 10.0, 15.0, 20.0];
pub const PAPER_EXAMPLES: usize = 3024;

pub fn realify(symbols: &[Complex64]) -> Vec<f64> {
    symbols.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn complexify(values: &[f64]) -> Result<Vec<Complex64>> {
    if !values.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "complexify needs an even length, got {}",
            values.len()
        )));
    }
    Ok(values
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect())
}
