//! How dataset examples are cut into network rows.
//!
//! | layout | rows per example | row input | row output |
//! |---|---|---|---|
//! | `Whole` | 1 | full example | 864 |
//! | `Symbol` | 432 | one symbol (2) | 2 |
//! | `Prb` | 48 | 3 pilot REs (6) + 9 data REs (18), or 18 without pilots | 18 |
//!
//! A PRB chunk is 12 consecutive PBCH subcarriers of one symbol: 20 chunks in
//! symbol 1, 4 + 4 beside the SSS in symbol 2, and 20 in symbol 3. Each holds
//! exactly 3 DMRS and 9 data REs, so chunk `c` owns data symbols `9c..9c+9`
//! and pilots `3c..3c+3` in mapping order.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nr::pbch::DATA_SYMBOLS;
use crate::nr::sequence::DMRS_LEN;

pub const PRB_CHUNKS: usize = 48;
const DATA_PER_CHUNK: usize = DATA_SYMBOLS / PRB_CHUNKS;
const PILOTS_PER_CHUNK: usize = DMRS_LEN / PRB_CHUNKS;
const TARGET_DIM: usize = 2 * DATA_SYMBOLS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLayout {
    Whole,
    Symbol,
    Prb,
}

impl BlockLayout {
    pub fn rows_per_example(self) -> usize {
        match self {
            Self::Whole => 1,
            Self::Symbol => DATA_SYMBOLS,
            Self::Prb => PRB_CHUNKS,
        }
    }

    /// Row input width for examples of width `example_dim`.
    pub fn row_in(self, example_dim: usize) -> Result<usize> {
        match (self, example_dim) {
            (Self::Whole, d) => Ok(d),
            (Self::Symbol, TARGET_DIM) => Ok(2),
            (Self::Prb, TARGET_DIM) => Ok(2 * DATA_PER_CHUNK),
            (Self::Prb, d) if d == TARGET_DIM + 2 * DMRS_LEN => {
                Ok(2 * (DATA_PER_CHUNK + PILOTS_PER_CHUNK))
            }
            (layout, d) => Err(Error::Dimension(format!(
                "layout {layout:?} cannot cut examples of width {d}"
            ))),
        }
    }

    pub fn row_out(self) -> usize {
        TARGET_DIM / self.rows_per_example()
    }

    /// Cuts `n x example_dim` inputs into rows.
    pub fn input_rows(self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let width = self.row_in(x.ncols())?;
        let rows = self.rows_per_example();
        let mut out = Array2::zeros((x.nrows() * rows, width));
        let with_pilots = x.ncols() > TARGET_DIM;
        for (e, ex) in x.outer_iter().enumerate() {
            for r in 0..rows {
                let mut row = out.row_mut(e * rows + r);
                match self {
                    Self::Whole => row.assign(&ex),
                    Self::Symbol => {
                        row[0] = ex[2 * r];
                        row[1] = ex[2 * r + 1];
                    }
                    Self::Prb => {
                        let mut c = 0;
                        if with_pilots {
                            let p0 = TARGET_DIM + 2 * PILOTS_PER_CHUNK * r;
                            for i in 0..2 * PILOTS_PER_CHUNK {
                                row[c] = ex[p0 + i];
                                c += 1;
                            }
                        }
                        let d0 = 2 * DATA_PER_CHUNK * r;
                        for i in 0..2 * DATA_PER_CHUNK {
                            row[c] = ex[d0 + i];
                            c += 1;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Cuts `n x 864` targets into rows.
    pub fn target_rows(self, y: &Array2<f64>) -> Result<Array2<f64>> {
        if y.ncols() != TARGET_DIM {
            return Err(Error::Dimension(format!("targets must be {TARGET_DIM} wide, got {}", y.ncols())));
        }
        let rows = self.rows_per_example();
        y.to_owned()
            .into_shape_with_order((y.nrows() * rows, TARGET_DIM / rows))
            .map_err(|e| Error::Dimension(e.to_string()))
    }

    /// Reassembles per-row outputs into `n x 864` examples.
    pub fn merge_rows(self, rows: Array2<f64>) -> Result<Array2<f64>> {
        let per = self.rows_per_example();
        if !rows.nrows().is_multiple_of(per) || rows.ncols() != self.row_out() {
            return Err(Error::Dimension(format!("cannot merge {:?} rows", rows.dim())));
        }
        let n = rows.nrows() / per;
        let rows = if rows.is_standard_layout() {
            rows
        } else {
            rows.as_standard_layout().into_owned()
        };
        rows.into_shape_with_order((n, TARGET_DIM))
            .map_err(|e| Error::Dimension(e.to_string()))
    }
}
