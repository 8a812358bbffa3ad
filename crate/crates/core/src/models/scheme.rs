//! The three training configurations: one model per SNR, one model over the
//! SNR range, and one model at 20 dB.

use serde::{Deserialize, Serialize};

use super::dataset::{EqInput, SymbolDataset};
use super::layout::BlockLayout;
use super::DEFAULT_SNR_GRID;
use crate::error::{Error, Result};
use crate::nn::{init_mlp, train, LearningCurve, MlpModel, TrainConfig, TrainData, DEFAULT_HIDDEN};
use crate::rng::sub_seed;
use crate::rx::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeMode {
    PerSnr,
    SnrRange,
    #[serde(rename = "fixed_20db")]
    Fixed20db,
}

impl std::str::FromStr for SchemeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_snr" => Ok(Self::PerSnr),
            "snr_range" => Ok(Self::SnrRange),
            "fixed_20db" => Ok(Self::Fixed20db),
            other => Err(Error::field("scheme", format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainScheme {
    pub mode: SchemeMode,
    pub snr_grid: Vec<f64>,
}

impl TrainScheme {
    pub fn new(mode: SchemeMode) -> Self {
        Self {
            mode,
            snr_grid: DEFAULT_SNR_GRID.to_vec(),
        }
    }
}

/// Network shape choices not fixed by the training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub hidden: usize,
    /// `None` picks `Symbol` for Symbol Enhancement and `Prb` for Equalization.
    pub layout: Option<BlockLayout>,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            layout: None,
        }
    }
}

pub fn default_layout(stage: Stage) -> BlockLayout {
    match stage {
        Stage::PostSync => BlockLayout::Prb,
        _ => BlockLayout::Symbol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub stage: Stage,
    pub layout: BlockLayout,
    pub eq_input: EqInput,
    pub hidden: usize,
    pub scheme: SchemeMode,
    #[serde(with = "crate::serde_ext::inf_vec")]
    pub train_snr_db: Vec<f64>,
    pub train: TrainConfig,
    pub init_seed: u64,
    pub train_examples: usize,
    pub curve: LearningCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: MlpModel,
    pub meta: ModelMeta,
}

/// Trains one model on a whole dataset.
pub fn train_on_dataset(
    ds: &SymbolDataset,
    net: &NetConfig,
    cfg: &TrainConfig,
    scheme: SchemeMode,
) -> Result<TrainedModel> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let layout = net.layout.unwrap_or_else(|| default_layout(ds.stage));
    let x = layout.input_rows(&ds.inputs)?;
    let y = layout.target_rows(&ds.targets)?;
    let data = TrainData::new(x, y, layout.rows_per_example())?;
    let init_seed = sub_seed(cfg.seed, 0x1417);
    let mut model = init_mlp(data.x.ncols(), net.hidden, data.y.ncols(), init_seed)?;
    let curve = train(&mut model, &data, cfg)?;
    Ok(TrainedModel {
        model,
        meta: ModelMeta {
            stage: ds.stage,
            layout,
            eq_input: ds.eq_input,
            hidden: net.hidden,
            scheme,
            train_snr_db: ds.distinct_snrs(),
            train: *cfg,
            init_seed,
            train_examples: ds.len(),
            curve,
        },
    })
}

fn single_snr(datasets: &[SymbolDataset], snr: f64) -> Result<&SymbolDataset> {
    datasets
        .iter()
        .find(|d| d.distinct_snrs() == [snr])
        .ok_or_else(|| Error::MissingDataset(format!("no dataset at {snr} dB")))
}

/// Trains the models of a scheme from the datasets available:
/// `per_snr` needs one single-SNR dataset per grid point, `snr_range` a
/// dataset spanning several SNRs, `fixed_20db` a 20 dB dataset.
pub fn train_scheme(
    datasets: &[SymbolDataset],
    scheme: &TrainScheme,
    net: &NetConfig,
    cfg: &TrainConfig,
) -> Result<Vec<TrainedModel>> {
    match scheme.mode {
        SchemeMode::PerSnr => scheme
            .snr_grid
            .iter()
            .map(|&s| train_on_dataset(single_snr(datasets, s)?, net, cfg, scheme.mode))
            .collect(),
        SchemeMode::SnrRange => {
            let ds = datasets
                .iter()
                .find(|d| d.distinct_snrs().len() > 1)
                .ok_or_else(|| Error::MissingDataset("no multi-SNR dataset".into()))?;
            Ok(vec![train_on_dataset(ds, net, cfg, scheme.mode)?])
        }
        SchemeMode::Fixed20db => Ok(vec![train_on_dataset(
            single_snr(datasets, 20.0)?,
            net,
            cfg,
            scheme.mode,
        )?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::dataset::{build_synthetic_dataset, DatasetConfig, SnrSpec};

    fn quick() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 4,
            ..TrainConfig::default()
        }
    }

    fn ds(snr: SnrSpec, seed: u64) -> SymbolDataset {
        build_synthetic_dataset(&DatasetConfig::new(Stage::PostMmse, snr, 6, seed)).unwrap()
    }

    #[test]
    fn per_snr_trains_one_model_per_grid_point() {
        let grid = vec![5.0, 20.0];
        let sets: Vec<SymbolDataset> = grid.iter().map(|&s| ds(SnrSpec::Fixed(s), 1)).collect();
        let scheme = TrainScheme {
            mode: SchemeMode::PerSnr,
            snr_grid: grid.clone(),
        };
        let models = train_scheme(&sets, &scheme, &NetConfig::default(), &quick()).unwrap();
        assert_eq!(models.len(), 2);
        assert_eq!(models[1].meta.train_snr_db, vec![20.0]);
        assert_eq!(models[0].meta.layout, BlockLayout::Symbol);
        let missing = TrainScheme {
            mode: SchemeMode::PerSnr,
            snr_grid: vec![7.0],
        };
        assert!(matches!(
            train_scheme(&sets, &missing, &NetConfig::default(), &quick()),
            Err(Error::MissingDataset(_))
        ));
    }

    #[test]
    fn fixed_and_range_pick_their_datasets() {
        let sets = vec![ds(SnrSpec::Fixed(20.0), 2), ds(SnrSpec::Grid(vec![0.0, 20.0]), 3)];
        let fixed = train_scheme(&sets, &TrainScheme::new(SchemeMode::Fixed20db), &NetConfig::default(), &quick())
            .unwrap();
        assert_eq!(fixed[0].meta.train_snr_db, vec![20.0]);
        assert_eq!(fixed[0].meta.scheme, SchemeMode::Fixed20db);
        let range = train_scheme(&sets, &TrainScheme::new(SchemeMode::SnrRange), &NetConfig::default(), &quick())
            .unwrap();
        assert_eq!(range[0].meta.train_snr_db, vec![0.0, 20.0]);
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!("per_snr".parse::<SchemeMode>().unwrap(), SchemeMode::PerSnr);
        assert_eq!("fixed_20db".parse::<SchemeMode>().unwrap(), SchemeMode::Fixed20db);
        assert!("other".parse::<SchemeMode>().is_err());
        assert_eq!(serde_json::to_string(&SchemeMode::Fixed20db).unwrap(), "\"fixed_20db\"");
    }
}
