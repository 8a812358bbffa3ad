//! Master Information Block and the 32-bit PBCH payload.
//!
//! Bit layout of the packed payload (index 0 is transmitted first):
//!
//! | bits    | content                                             |
//! |---------|-----------------------------------------------------|
//! | 0       | BCCH-BCH message choice (always 0, `mib`)            |
//! | 1..=6   | SFN bits 9..4 (MSB first)                            |
//! | 7       | subCarrierSpacingCommon                             |
//! | 8..=11  | ssb-SubcarrierOffset, 4 LSBs of k_SSB (MSB first)    |
//! | 12      | dmrs-TypeA-Position                                 |
//! | 13..=20 | pdcch-ConfigSIB1 (MSB first)                         |
//! | 21      | cellBarred                                          |
//! | 22      | intraFreqReselection                                |
//! | 23      | spare                                               |
//! | 24..=27 | SFN bits 3..0 (bit 27 is the SFN LSB)                |
//! | 28      | half-frame bit                                      |
//! | 29      | k_SSB MSB                                           |
//! | 30..=31 | reserved                                            |

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

pub const MIB_BITS: usize = 24;
pub const PAYLOAD_BITS: usize = 32;

/// Bit index of the SFN least significant bit inside the packed payload.
pub const SFN_LSB_BIT: usize = 27;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ScsCommon {
    #[default]
    Scs15or60,
    Scs30or120,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DmrsTypeAPosition {
    #[default]
    Pos2,
    Pos3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CellBarred {
    #[default]
    Barred,
    NotBarred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum IntraFreqReselection {
    #[default]
    Allowed,
    NotAllowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MibPayload {
    /// System frame number, 0..=1023.
    pub sfn: u16,
    pub scs_common: ScsCommon,
    /// k_SSB, 0..=31. The 4 LSBs live in the MIB, the MSB in the extra bits.
    pub ssb_subcarrier_offset: u8,
    pub dmrs_type_a_position: DmrsTypeAPosition,
    pub pdcch_config_sib1: u8,
    pub cell_barred: CellBarred,
    pub intra_freq_reselection: IntraFreqReselection,
    pub half_frame: bool,
    /// MIB spare bit.
    pub spare: bool,
    /// The two reserved payload bits, 0..=3.
    pub reserved: u8,
}

fn push_msb(bits: &mut Vec<u8>, value: u32, width: usize) {
    for i in (0..width).rev() {
        bits.push(((value >> i) & 1) as u8);
    }
}

fn read_msb(bits: &[u8]) -> u32 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b & 1))
}

impl MibPayload {
    pub fn validate(&self) -> Result<()> {
        if self.sfn > 1023 {
            return Err(Error::field("sfn", format!("{} > 1023", self.sfn)));
        }
        if self.ssb_subcarrier_offset > 31 {
            return Err(Error::field(
                "ssb_subcarrier_offset",
                format!("{} > 31", self.ssb_subcarrier_offset),
            ));
        }
        if self.reserved > 3 {
            return Err(Error::field("reserved", format!("{} > 3", self.reserved)));
        }
        Ok(())
    }

    /// Packs into the 32-bit payload (24 MIB bits + 8 additional bits).
    pub fn pack(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let mut bits = Vec::with_capacity(PAYLOAD_BITS);
        bits.push(0);
        push_msb(&mut bits, u32::from(self.sfn >> 4), 6);
        bits.push(self.scs_common as u8);
        push_msb(&mut bits, u32::from(self.ssb_subcarrier_offset & 0x0f), 4);
        bits.push(self.dmrs_type_a_position as u8);
        push_msb(&mut bits, u32::from(self.pdcch_config_sib1), 8);
        bits.push(self.cell_barred as u8);
        bits.push(self.intra_freq_reselection as u8);
        bits.push(u8::from(self.spare));
        push_msb(&mut bits, u32::from(self.sfn & 0x0f), 4);
        bits.push(u8::from(self.half_frame));
        bits.push(self.ssb_subcarrier_offset >> 4);
        push_msb(&mut bits, u32::from(self.reserved), 2);
        debug_assert_eq!(bits.len(), PAYLOAD_BITS);
        Ok(bits)
    }

    pub fn unpack(bits: &[u8]) -> Result<Self> {
        check_len("PBCH payload", PAYLOAD_BITS, bits.len())?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::field("payload", "bits must be 0 or 1"));
        }
        if bits[0] != 0 {
            return Err(Error::field("message choice", "not a MIB"));
        }
        let sfn = (read_msb(&bits[1..7]) << 4 | read_msb(&bits[24..28])) as u16;
        let k_ssb = (u32::from(bits[29]) << 4 | read_msb(&bits[8..12])) as u8;
        Ok(Self {
            sfn,
            scs_common: if bits[7] == 0 {
                ScsCommon::Scs15or60
            } else {
                ScsCommon::Scs30or120
            },
            ssb_subcarrier_offset: k_ssb,
            dmrs_type_a_position: if bits[12] == 0 {
                DmrsTypeAPosition::Pos2
            } else {
                DmrsTypeAPosition::Pos3
            },
            pdcch_config_sib1: read_msb(&bits[13..21]) as u8,
            cell_barred: if bits[21] == 0 {
                CellBarred::Barred
            } else {
                CellBarred::NotBarred
            },
            intra_freq_reselection: if bits[22] == 0 {
                IntraFreqReselection::Allowed
            } else {
                IntraFreqReselection::NotAllowed
            },
            spare: bits[23] == 1,
            half_frame: bits[28] == 1,
            reserved: read_msb(&bits[30..32]) as u8,
        })
    }

    /// Draws every field uniformly from its range.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            sfn: rng.random_range(0..1024),
            scs_common: if rng.random() {
                ScsCommon::Scs30or120
            } else {
                ScsCommon::Scs15or60
            },
            ssb_subcarrier_offset: rng.random_range(0..32),
            dmrs_type_a_position: if rng.random() {
                DmrsTypeAPosition::Pos3
            } else {
                DmrsTypeAPosition::Pos2
            },
            pdcch_config_sib1: rng.random(),
            cell_barred: if rng.random() {
                CellBarred::NotBarred
            } else {
                CellBarred::Barred
            },
            intra_freq_reselection: if rng.random() {
                IntraFreqReselection::NotAllowed
            } else {
                IntraFreqReselection::Allowed
            },
            half_frame: rng.random(),
            spare: rng.random(),
            reserved: rng.random_range(0..4),
        }
    }
}

/// Packs a MIB into its 32-bit payload.
pub fn build_mib_payload(mib: &MibPayload) -> Result<Vec<u8>> {
    mib.pack()
}
