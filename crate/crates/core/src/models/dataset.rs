//! Synthetic datasets: random MIB and cell, transmit chain, GEO channel,
//! classical receiver truncated at the requested stage.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::realify;
use crate::channel::{draw_profile, simulate, DEFAULT_DELAY_RANGE_S};
use crate::error::{Error, Result};
use crate::nr::burst::{generate_burst, Burst, BurstConfig};
use crate::nr::mib::MibPayload;
use crate::nr::ofdm::SCS_HZ;
use crate::nr::pbch::CODED_BITS;
use crate::nr::sequence::DMRS_LEN;
use crate::nr::{CellIdentity, MAX_CELL_ID};
use crate::rng::sub_seed;
use crate::rx::{receive, RxConfig, RxOutput, Stage};

/// What the Equalization network sees besides the 432 post-sync data REs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqInput {
    /// Received DMRS times the conjugate of the known pilot.
    #[default]
    PilotReferenced,
    /// Received DMRS as is.
    RawDmrs,
    /// Data REs only.
    DataOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Synthetic,
    Captured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrSpec {
    Noiseless,
    Fixed(#[serde(with = "crate::serde_ext::inf_f64")] f64),
    /// Examples cycle through the grid, giving balanced counts.
    Grid(#[serde(with = "crate::serde_ext::inf_vec")] Vec<f64>),
}

impl SnrSpec {
    pub fn for_example(&self, i: usize) -> Result<f64> {
        match self {
            Self::Noiseless => Ok(f64::INFINITY),
            Self::Fixed(s) => Ok(*s),
            Self::Grid(g) if g.is_empty() => Err(Error::Config("empty SNR grid".into())),
            Self::Grid(g) => Ok(g[i % g.len()]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelSpec {
    pub cfo: bool,
    pub delay: bool,
    pub delay_range_s: (f64, f64),
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            cfo: true,
            delay: true,
            delay_range_s: DEFAULT_DELAY_RANGE_S,
        }
    }
}

impl ChannelSpec {
    /// No CFO and no delay.
    pub fn clean() -> Self {
        Self {
            cfo: false,
            delay: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub stage: Stage,
    pub snr: SnrSpec,
    pub n_examples: usize,
    pub seed: u64,
    pub channel: ChannelSpec,
    pub eq_input: EqInput,
    pub burst: BurstConfig,
    pub rx: RxConfig,
    /// Redraw budget per example before giving up.
    pub max_redraws: usize,
}

impl DatasetConfig {
    pub fn new(stage: Stage, snr: SnrSpec, n_examples: usize, seed: u64) -> Self {
        Self {
            stage,
            snr,
            n_examples,
            seed,
            channel: ChannelSpec::default(),
            eq_input: EqInput::default(),
            burst: BurstConfig::default(),
            rx: RxConfig::default(),
            max_redraws: 100,
        }
    }
}

/// Paired network inputs and targets, one example per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDataset {
    pub stage: Stage,
    pub eq_input: EqInput,
    pub origin: Origin,
    /// `n x 864` (Symbol Enhancement) or `n x 1152` / `n x 864` (Equalization).
    pub inputs: Array2<f64>,
    /// `n x 864` transmitted symbols.
    pub targets: Array2<f64>,
    /// `n x 864` classical MMSE output, the pre-network baseline.
    pub mmse: Array2<f64>,
    pub snr_tags: Vec<f64>,
    pub cell_ids: Vec<u16>,
    /// Receiver CRC outcome on the MMSE path.
    pub crc_pass: Vec<bool>,
    pub seeds: Vec<u64>,
    /// Draws rejected because the receiver failed to synchronize.
    pub redraws: usize,
}

impl SymbolDataset {
    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// Mean squared difference between MMSE output and targets.
    pub fn mmse_mse(&self) -> f64 {
        mean_sq_diff(&self.mmse, &self.targets)
    }

    /// Distinct SNR tags in first-seen order.
    pub fn distinct_snrs(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &s in &self.snr_tags {
            if !out.iter().any(|&o| o == s || (o.is_infinite() && s.is_infinite())) {
                out.push(s);
            }
        }
        out
    }

    /// Empty dataset with the given widths.
    pub fn empty(stage: Stage, eq_input: EqInput, origin: Origin, input_dim: usize) -> Self {
        Self {
            stage,
            eq_input,
            origin,
            inputs: Array2::zeros((0, input_dim)),
            targets: Array2::zeros((0, CODED_BITS)),
            mmse: Array2::zeros((0, CODED_BITS)),
            snr_tags: Vec::new(),
            cell_ids: Vec::new(),
            crc_pass: Vec::new(),
            seeds: Vec::new(),
            redraws: 0,
        }
    }

    pub(crate) fn from_examples(
        stage: Stage,
        eq_input: EqInput,
        origin: Origin,
        examples: Vec<Example>,
        redraws: usize,
    ) -> Result<Self> {
        let d_in = input_dim(stage, eq_input);
        let n = examples.len();
        let mut ds = Self::empty(stage, eq_input, origin, d_in);
        let mut inputs = Vec::with_capacity(n * d_in);
        let mut targets = Vec::with_capacity(n * CODED_BITS);
        let mut mmse = Vec::with_capacity(n * CODED_BITS);
        for ex in examples {
            inputs.extend(ex.input);
            targets.extend(ex.target);
            mmse.extend(ex.mmse);
            ds.snr_tags.push(ex.snr_db);
            ds.cell_ids.push(ex.cell_id);
            ds.crc_pass.push(ex.crc_pass);
            ds.seeds.push(ex.seed);
        }
        let shape = |d: usize, v: Vec<f64>| {
            Array2::from_shape_vec((n, d), v).map_err(|e| Error::Dimension(e.to_string()))
        };
        ds.inputs = shape(d_in, inputs)?;
        ds.targets = shape(CODED_BITS, targets)?;
        ds.mmse = shape(CODED_BITS, mmse)?;
        ds.redraws = redraws;
        Ok(ds)
    }
}

pub(crate) fn mean_sq_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = a.len().max(1) as f64;
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
}

/// Input width for a stage.
pub fn input_dim(stage: Stage, eq_input: EqInput) -> usize {
    match (stage, eq_input) {
        (Stage::PostSync, EqInput::PilotReferenced | EqInput::RawDmrs) => {
            CODED_BITS + 2 * DMRS_LEN
        }
        _ => CODED_BITS,
    }
}

/// One dataset row before stacking.
#[derive(Debug, Clone)]
pub(crate) struct Example {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    pub mmse: Vec<f64>,
    pub snr_db: f64,
    pub cell_id: u16,
    pub crc_pass: bool,
    pub seed: u64,
}

/// Network input for a receiver output.
pub fn stage_input(out: &RxOutput, stage: Stage, eq_input: EqInput) -> Result<Vec<f64>> {
    match stage {
        Stage::PostMmse => Ok(realify(&out.post_mmse.symbols)),
        Stage::PostSync => {
            let mut v = realify(&out.post_sync);
            match eq_input {
                EqInput::PilotReferenced => v.extend(realify(&out.dmrs_referenced()?)),
                EqInput::RawDmrs => v.extend(realify(&out.grid.dmrs())),
                EqInput::DataOnly => {}
            }
            Ok(v)
        }
        Stage::PostNn => Err(Error::Config("post_nn is not a dataset stage".into())),
    }
}

/// One synthetic burst through channel and receiver.
pub struct SyntheticDraw {
    pub burst: Burst,
    pub rx: Result<RxOutput>,
    pub snr_db: f64,
}

/// Generates burst `seed` at `snr_db` and runs the receiver on it.
pub fn synthetic_draw(seed: u64, snr_db: f64, cfg: &DatasetConfig) -> Result<SyntheticDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mib = MibPayload::random(&mut rng);
    let cell = CellIdentity::new(rng.random_range(0..=MAX_CELL_ID))?;
    let burst = generate_burst(&mib, cell, &cfg.burst)?;
    let range = if cfg.channel.delay {
        cfg.channel.delay_range_s
    } else {
        (0.0, 0.0)
    };
    let mut profile = draw_profile(
        sub_seed(seed, 1),
        SCS_HZ,
        range,
        snr_db,
        burst.frame.sample_rate_hz,
    )?;
    if !cfg.channel.cfo {
        profile.cfo_hz = 0.0;
    }
    let frame = simulate(&burst.frame, &profile)?;
    let rx = receive(&frame, &cfg.rx);
    Ok(SyntheticDraw { burst, rx, snr_db })
}

fn synchronized(draw: &SyntheticDraw) -> Option<&RxOutput> {
    let out = draw.rx.as_ref().ok()?;
    let expected = draw.burst.issb + if draw.burst.mib.half_frame { 4 } else { 0 };
    (out.cell == draw.burst.cell && out.ibar == expected).then_some(out)
}

/// Builds `n_examples` examples; receiver failures (no PSS/SSS, wrong cell
/// or wrong DMRS index) are redrawn and counted.
pub fn build_synthetic_dataset(cfg: &DatasetConfig) -> Result<SymbolDataset> {
    if cfg.n_examples == 0 {
        return Err(Error::Config("n_examples must be > 0".into()));
    }
    if cfg.stage == Stage::PostNn {
        return Err(Error::Config("post_nn is not a dataset stage".into()));
    }
    let mut examples = Vec::with_capacity(cfg.n_examples);
    let mut redraws = 0;
    for i in 0..cfg.n_examples {
        let snr = cfg.snr.for_example(i)?;
        let base = sub_seed(cfg.seed, i as u64);
        let mut accepted = None;
        for attempt in 0..=cfg.max_redraws {
            let seed = sub_seed(base, attempt as u64);
            let draw = synthetic_draw(seed, snr, cfg)?;
            if let Some(out) = synchronized(&draw) {
                accepted = Some(Example {
                    input: stage_input(out, cfg.stage, cfg.eq_input)?,
                    target: realify(&draw.burst.tx.symbols),
                    mmse: realify(&out.post_mmse.symbols),
                    snr_db: snr,
                    cell_id: draw.burst.cell.id(),
                    crc_pass: out.decoded.crc_pass,
                    seed,
                });
                break;
            }
            redraws += 1;
        }
        examples.push(accepted.ok_or_else(|| {
            Error::Config(format!("example {i}: receiver failed {} times", cfg.max_redraws + 1))
        })?);
    }
    SymbolDataset::from_examples(cfg.stage, cfg.eq_input, Origin::Synthetic, examples, redraws)
}
