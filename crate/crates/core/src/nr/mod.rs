//! Transmit side of the SSB: payload, coding, sequences, grid mapping and OFDM.

pub mod burst;
pub mod crc;
pub mod grid;
pub mod mib;
pub mod ofdm;
pub mod pbch;
pub mod polar;
pub mod qpsk;
pub mod sequence;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_CELL_ID: u16 = 1007;

/// Physical cell identity, `n_cell_id = 3 * n_id_1 + n_id_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct CellIdentity(u16);

impl CellIdentity {
    pub fn new(n_cell_id: u16) -> Result<Self> {
        if n_cell_id > MAX_CELL_ID {
            return Err(Error::field("n_cell_id", format!("{n_cell_id} > {MAX_CELL_ID}")));
        }
        Ok(Self(n_cell_id))
    }

    pub fn from_parts(n_id_1: u16, n_id_2: u8) -> Result<Self> {
        if n_id_1 > 335 {
            return Err(Error::field("n_id_1", format!("{n_id_1} > 335")));
        }
        if n_id_2 > 2 {
            return Err(Error::field("n_id_2", format!("{n_id_2} > 2")));
        }
        Ok(Self(3 * n_id_1 + u16::from(n_id_2)))
    }

    pub fn id(self) -> u16 {
        self.0
    }

    pub fn n_id_1(self) -> u16 {
        self.0 / 3
    }

    pub fn n_id_2(self) -> u8 {
        (self.0 % 3) as u8
    }

    /// Subcarrier offset of the DMRS comb, `n_cell_id mod 4`.
    pub fn v_shift(self) -> usize {
        usize::from(self.0 % 4)
    }
}

impl TryFrom<u16> for CellIdentity {
    type Error = Error;

    fn try_from(value: u16) -> Result<Self> {
        Self::new(value)
    }
}

impl From<CellIdentity> for u16 {
    fn from(cell: CellIdentity) -> u16 {
        cell.0
    }
}

impl std::fmt::Display for CellIdentity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
