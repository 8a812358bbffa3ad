//! The 240 x 4 SSB resource grid and its PSS/SSS/PBCH/DMRS layout.
//!
//! | symbol | content |
//! |---|---|
//! | 0 | PSS on subcarriers 56..=182 |
//! | 1 | PBCH on 0..=239 |
//! | 2 | PBCH on 0..=47 and 192..=239, SSS on 56..=182 |
//! | 3 | PBCH on 0..=239 |
//!
//! DMRS occupies PBCH subcarriers with `k mod 4 == n_cell_id mod 4`. PBCH REs
//! are ordered by subcarrier first, then symbol.

use num_complex::Complex64;

use super::sequence::{DMRS_LEN, SYNC_SEQ_LEN};
use super::pbch::DATA_SYMBOLS;
use super::CellIdentity;
use crate::error::{check_len, Result};

pub const SSB_SUBCARRIERS: usize = 240;
pub const SSB_SYMBOLS: usize = 4;
pub const PBCH_RES: usize = DATA_SYMBOLS + DMRS_LEN;
pub const SYNC_START: usize = 56;

/// Subcarrier/symbol position of every PBCH RE in mapping order.
pub fn pbch_positions() -> Vec<(usize, usize)> {
    (1..SSB_SYMBOLS)
        .flat_map(|l| {
            (0..SSB_SUBCARRIERS)
                .filter(move |&k| l != 2 || !(48..192).contains(&k))
                .map(move |k| (k, l))
        })
        .collect()
}

/// Whether each PBCH RE (in [`pbch_positions`] order) carries DMRS.
pub fn dmrs_flags(cell: CellIdentity) -> Vec<bool> {
    pbch_positions()
        .into_iter()
        .map(|(k, _)| k % 4 == cell.v_shift())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsbGrid {
    /// Resource elements, index `l * 240 + k`.
    pub res: Vec<Complex64>,
    pub issb: u8,
    pub dmrs_mask: Vec<bool>,
    pub data_mask: Vec<bool>,
}

fn idx(k: usize, l: usize) -> usize {
    l * SSB_SUBCARRIERS + k
}

impl SsbGrid {
    /// An empty grid with masks for `cell`.
    pub fn new(cell: CellIdentity, issb: u8) -> Self {
        let n = SSB_SUBCARRIERS * SSB_SYMBOLS;
        let mut dmrs_mask = vec![false; n];
        let mut data_mask = vec![false; n];
        for ((k, l), is_dmrs) in pbch_positions().into_iter().zip(dmrs_flags(cell)) {
            if is_dmrs {
                dmrs_mask[idx(k, l)] = true;
            } else {
                data_mask[idx(k, l)] = true;
            }
        }
        Self {
            res: vec![Complex64::new(0.0, 0.0); n],
            issb,
            dmrs_mask,
            data_mask,
        }
    }

    /// Wraps received REs (index `l * 240 + k`) with the masks for `cell`.
    pub fn from_res(res: Vec<Complex64>, cell: CellIdentity, issb: u8) -> Result<Self> {
        check_len("SSB grid", SSB_SUBCARRIERS * SSB_SYMBOLS, res.len())?;
        let mut g = Self::new(cell, issb);
        g.res = res;
        Ok(g)
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.res[idx(k, l)]
    }

    pub fn set(&mut self, k: usize, l: usize, v: Complex64) {
        self.res[idx(k, l)] = v;
    }

    pub fn symbol(&self, l: usize) -> &[Complex64] {
        &self.res[idx(0, l)..idx(0, l + 1)]
    }

    fn masked(&self, mask: &[bool]) -> Vec<Complex64> {
        pbch_positions()
            .into_iter()
            .map(|(k, l)| idx(k, l))
            .filter(|&i| mask[i])
            .map(|i| self.res[i])
            .collect()
    }

    /// The 432 data REs in mapping order.
    pub fn data(&self) -> Vec<Complex64> {
        self.masked(&self.data_mask)
    }

    /// The 144 DMRS REs in mapping order.
    pub fn dmrs(&self) -> Vec<Complex64> {
        self.masked(&self.dmrs_mask)
    }

    /// All 576 PBCH REs in mapping order.
    pub fn pbch(&self) -> Vec<Complex64> {
        pbch_positions().into_iter().map(|(k, l)| self.get(k, l)).collect()
    }

    pub fn pss(&self) -> Vec<Complex64> {
        self.symbol(0)[SYNC_START..SYNC_START + SYNC_SEQ_LEN].to_vec()
    }

    pub fn sss(&self) -> Vec<Complex64> {
        self.symbol(2)[SYNC_START..SYNC_START + SYNC_SEQ_LEN].to_vec()
    }
}

/// Places data, DMRS, PSS and SSS onto a fresh grid.
pub fn map_ssb_grid(
    symbols: &[Complex64],
    dmrs: &[Complex64],
    pss: &[f64],
    sss: &[f64],
    cell: CellIdentity,
    issb: u8,
) -> Result<SsbGrid> {
    check_len("PBCH symbols", DATA_SYMBOLS, symbols.len())?;
    check_len("DMRS", DMRS_LEN, dmrs.len())?;
    check_len("PSS", SYNC_SEQ_LEN, pss.len())?;
    check_len("SSS", SYNC_SEQ_LEN, sss.len())?;
    let mut g = SsbGrid::new(cell, issb);
    for n in 0..SYNC_SEQ_LEN {
        g.set(SYNC_START + n, 0, Complex64::new(pss[n], 0.0));
        g.set(SYNC_START + n, 2, Complex64::new(sss[n], 0.0));
    }
    let mut data = symbols.iter();
    let mut pilots = dmrs.iter();
    for ((k, l), is_dmrs) in pbch_positions().into_iter().zip(dmrs_flags(cell)) {
        let v = if is_dmrs { pilots.next() } else { data.next() };
        g.set(k, l, *v.expect("counts checked"));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::nr::sequence::{gen_dmrs, gen_pss, gen_sss};

    fn random_symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn mask_counts_and_disjointness() {
        for id in 0..8 {
            let g = SsbGrid::new(CellIdentity::new(id).unwrap(), 0);
            assert_eq!(g.data_mask.iter().filter(|&&m| m).count(), 432);
            assert_eq!(g.dmrs_mask.iter().filter(|&&m| m).count(), 144);
            assert!(g.data_mask.iter().zip(&g.dmrs_mask).all(|(a, b)| !(a & b)));
        }
    }

    #[test]
    fn dmrs_comb_follows_cell_id() {
        let patterns: Vec<Vec<bool>> = (0..4)
            .map(|id| SsbGrid::new(CellIdentity::new(id).unwrap(), 0).dmrs_mask)
            .collect();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(a == b, patterns[a] == patterns[b]);
            }
        }
        let g = SsbGrid::new(CellIdentity::new(6).unwrap(), 0);
        for k in 0..SSB_SUBCARRIERS {
            assert_eq!(g.dmrs_mask[idx(k, 1)], k % 4 == 2);
        }
    }

    #[test]
    fn extraction_inverts_mapping() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cell = CellIdentity::new(123).unwrap();
        let data = random_symbols(&mut rng, 432);
        let dmrs = gen_dmrs(cell, 1, false).unwrap();
        let pss = gen_pss(cell.n_id_2()).unwrap();
        let sss = gen_sss(cell);
        let g = map_ssb_grid(&data, &dmrs, &pss, &sss, cell, 1).unwrap();
        assert_eq!(g.data(), data);
        assert_eq!(g.dmrs(), dmrs);
        assert!(g.pss().iter().zip(&pss).all(|(a, b)| a.re == *b && a.im == 0.0));
        assert!(g.sss().iter().zip(&sss).all(|(a, b)| a.re == *b && a.im == 0.0));
        assert_eq!(g.pbch().len(), PBCH_RES);
        for k in (48..56).chain(183..192) {
            assert_eq!(g.get(k, 2), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        let cell = CellIdentity::new(0).unwrap();
        let z = vec![Complex64::new(0.0, 0.0); 432];
        let p = vec![1.0; 127];
        assert!(map_ssb_grid(&z[..431], &z[..144], &p, &p, cell, 0).is_err());
        assert!(map_ssb_grid(&z, &z[..143], &p, &p, cell, 0).is_err());
        assert!(map_ssb_grid(&z, &z[..144], &p[..126], &p, cell, 0).is_err());
    }
}
