//! Command-line surface: `gen`, `decode`, `dataset`, `train`, `eval`,
//! `selftest`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{draw_profile, simulate, ChannelProfile};
use crate::error::{Error, Result};
use crate::frame::IqFrame;
use crate::io::{self, iq};
use crate::models::dataset::{build_synthetic_dataset, stage_input, ChannelSpec, DatasetConfig, EqInput, SnrSpec};
use crate::models::eval::{evaluate, predict, EvalConfig};
use crate::models::labels::{build_captured_dataset, regenerate_labels};
use crate::models::layout::BlockLayout;
use crate::models::scheme::{train_scheme, NetConfig, SchemeMode, TrainScheme, TrainedModel};
use crate::models::{complexify, DEFAULT_SNR_GRID};
use crate::nn::TrainConfig;
use crate::nr::burst::{generate_burst, BurstConfig};
use crate::nr::mib::MibPayload;
use crate::nr::ofdm::SCS_HZ;
use crate::nr::pbch::pbch_transmit;
use crate::nr::{CellIdentity, MAX_CELL_ID};
use crate::rng::{stream_rng, sub_seed};
use crate::rx::{receive, symbol_ber, DecodeReport, RxConfig, RxOutput, Stage};
use crate::selftest::run_selftest;

#[derive(Debug, Parser)]
#[command(name = "ntn-pbch", version, about = "5G NR PBCH link simulator and NN toolkit for GEO links")]
pub struct Cli {
    /// Seed for every random draw of the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize SSB bursts into an IQ file, or into a dataset with --stage.
    Gen(GenArgs),
    /// Run the classical receiver on an IQ capture and write JSON reports.
    Decode(DecodeArgs),
    /// Build the datasets a training scheme needs, or a captured dataset.
    Dataset(DatasetArgs),
    /// Train a scheme on dataset files.
    Train(TrainArgs),
    /// MSE/BER sweep of a model over test SNRs.
    Eval(EvalArgs),
    /// Codec round trip, QPSK BER vs Q-function and gradient check.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum StageArg {
    PostSync,
    PostMmse,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::PostSync => Stage::PostSync,
            StageArg::PostMmse => Stage::PostMmse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SchemeArg {
    PerSnr,
    SnrRange,
    #[value(name = "fixed_20db")]
    Fixed20db,
}

impl From<SchemeArg> for SchemeMode {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::PerSnr => SchemeMode::PerSnr,
            SchemeArg::SnrRange => SchemeMode::SnrRange,
            SchemeArg::Fixed20db => SchemeMode::Fixed20db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum EqInputArg {
    PilotReferenced,
    RawDmrs,
    DataOnly,
}

impl From<EqInputArg> for EqInput {
    fn from(e: EqInputArg) -> Self {
        match e {
            EqInputArg::PilotReferenced => EqInput::PilotReferenced,
            EqInputArg::RawDmrs => EqInput::RawDmrs,
            EqInputArg::DataOnly => EqInput::DataOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum LayoutArg {
    Whole,
    Symbol,
    Prb,
}

impl From<LayoutArg> for BlockLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Whole => BlockLayout::Whole,
            LayoutArg::Symbol => BlockLayout::Symbol,
            LayoutArg::Prb => BlockLayout::Prb,
        }
    }
}

/// `inf` or `noiseless` mean no noise.
pub fn parse_snr(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "noiseless" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("bad SNR {t:?}: {e}")),
    }
}

/// Comma-separated SNR list.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid(pub Vec<f64>);

pub fn parse_snr_grid(s: &str) -> std::result::Result<SnrGrid, String> {
    s.split(',').map(parse_snr).collect::<std::result::Result<_, _>>().map(SnrGrid)
}

fn grid_or_default(g: &Option<SnrGrid>) -> Vec<f64> {
    g.as_ref().map_or_else(|| DEFAULT_SNR_GRID.to_vec(), |g| g.0.clone())
}

fn snr_tag(s: f64) -> String {
    if s.is_infinite() {
        "inf".into()
    } else {
        format!("{s}db")
    }
}

/// Simulation settings accepted by `--config` as JSON or TOML. Missing
/// fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub channel: ChannelSpec,
    pub burst: BurstConfig,
    pub rx: RxConfig,
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
        } else {
            Ok(serde_json::from_str(&text)?)
        }
    }
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// JSON or TOML file with `channel`, `burst` and `rx` sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Disable the carrier frequency offset.
    #[arg(long)]
    pub no_cfo: bool,
    /// Disable the satellite delay.
    #[arg(long)]
    pub no_delay: bool,
}

impl ChannelArgs {
    fn sim(&self) -> Result<SimConfig> {
        let mut sim = match &self.config {
            Some(p) => SimConfig::load(p)?,
            None => SimConfig::default(),
        };
        sim.channel.cfo &= !self.no_cfo;
        sim.channel.delay &= !self.no_delay;
        Ok(sim)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output IQ file (sidecar written next to it), or dataset file with --stage.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// SNR in dB, or `inf`.
    #[arg(long, value_parser = parse_snr, default_value = "20")]
    pub snr: f64,
    /// Comma-separated SNRs cycled over the examples (datasets only).
    #[arg(long, value_parser = parse_snr_grid, conflicts_with = "snr")]
    pub snr_grid: Option<SnrGrid>,
    /// Fixed cell id instead of a random one per burst (IQ only).
    #[arg(long)]
    pub cell: Option<u16>,
    /// Fixed SFN instead of a random one per burst (IQ only).
    #[arg(long)]
    pub sfn: Option<u16>,
    /// Write a dataset of this stage instead of IQ.
    #[arg(long, value_enum)]
    pub stage: Option<StageArg>,
    #[arg(long, value_enum, default_value = "pilot_referenced")]
    pub eq_input: EqInputArg,
    /// Samples per burst in IQ output; defaults to one 20 ms SSB period.
    #[arg(long)]
    pub frame_len: Option<usize>,
    /// JSON file listing cell, MIB and channel of every generated burst.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub iq: PathBuf,
    /// Sidecar path; defaults to `<iq>.json`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Samples per window; defaults to one 20 ms SSB period.
    #[arg(long)]
    pub window: Option<usize>,
    /// Also report BER after this network.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// JSON output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long, value_enum)]
    pub stage: StageArg,
    #[arg(long, value_enum, default_value = "fixed_20db")]
    pub scheme: SchemeArg,
    /// Examples per dataset file.
    #[arg(long, default_value_t = crate::models::PAPER_EXAMPLES)]
    pub count: usize,
    #[arg(long, value_parser = parse_snr_grid)]
    pub snr_grid: Option<SnrGrid>,
    #[arg(long, value_enum, default_value = "pilot_referenced")]
    pub eq_input: EqInputArg,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Build from a capture instead of synthetic bursts.
    #[arg(long)]
    pub iq: Option<PathBuf>,
    #[arg(long, requires = "iq")]
    pub meta: Option<PathBuf>,
    /// SNR recorded for captured examples.
    #[arg(long, value_parser = parse_snr, requires = "iq")]
    pub snr_tag: Option<f64>,
    #[arg(long, requires = "iq")]
    pub window: Option<usize>,
    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset files.
    #[arg(long, num_args = 1.., required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "fixed_20db")]
    pub scheme: SchemeArg,
    #[arg(long, value_parser = parse_snr_grid)]
    pub snr_grid: Option<SnrGrid>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Hidden layer width.
    #[arg(long, default_value_t = crate::nn::DEFAULT_HIDDEN)]
    pub hidden: usize,
    #[arg(long, value_enum)]
    pub layout: Option<LayoutArg>,
    #[arg(long, default_value_t = 40)]
    pub epochs: usize,
    #[arg(long, default_value_t = 50)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = parse_snr_grid)]
    pub snr_grid: Option<SnrGrid>,
    /// Fresh bursts per SNR point.
    #[arg(long, default_value_t = 300)]
    pub bursts: usize,
    /// Report CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub constellation: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub constellation_bursts: usize,
    /// Full report, learning curve included, as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub channel: ChannelArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Smaller sample sizes.
    #[arg(long)]
    pub quick: bool,
}

/// Runs one command. `Ok(false)` means a check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen(a) => gen(&a, seed).map(|()| true),
        Command::Decode(a) => decode(&a).map(|()| true),
        Command::Dataset(a) => dataset(&a, seed).map(|()| true),
        Command::Train(a) => train(&a, seed).map(|()| true),
        Command::Eval(a) => eval(&a, seed).map(|()| true),
        Command::Selftest(a) => selftest(&a, seed),
    }
}

#[derive(Debug, Serialize)]
struct Truth {
    cell_id: u16,
    mib: MibPayload,
    channel: ChannelProfile,
    ssb_start: usize,
}

fn gen(a: &GenArgs, seed: u64) -> Result<()> {
    if a.count == 0 {
        return Err(Error::Config("--count must be > 0".into()));
    }
    let sim = a.channel.sim()?;
    if let Some(stage) = a.stage {
        let snr = match &a.snr_grid {
            Some(g) => SnrSpec::Grid(g.0.clone()),
            None if a.snr.is_infinite() => SnrSpec::Noiseless,
            None => SnrSpec::Fixed(a.snr),
        };
        let cfg = DatasetConfig {
            channel: sim.channel,
            eq_input: a.eq_input.into(),
            burst: sim.burst,
            rx: sim.rx,
            ..DatasetConfig::new(stage.into(), snr, a.count, seed)
        };
        let ds = build_synthetic_dataset(&cfg)?;
        io::save_dataset(&ds, Some(&cfg), &a.out)?;
        println!("{} examples, {} redraws -> {}", ds.len(), ds.redraws, a.out.display());
        return Ok(());
    }
    if a.snr_grid.is_some() {
        return Err(Error::Config("--snr-grid applies to datasets only".into()));
    }
    let mut bc = sim.burst;
    let fs = bc.ofdm.sample_rate_hz();
    bc.frame_len = Some(a.frame_len.or(bc.frame_len).unwrap_or_else(|| iq::period_samples(fs)));
    let range = if sim.channel.delay {
        sim.channel.delay_range_s
    } else {
        (0.0, 0.0)
    };
    let mut samples = Vec::with_capacity(a.count * bc.window_len());
    let mut truth = Vec::with_capacity(a.count);
    for i in 0..a.count {
        let s = sub_seed(seed, i as u64);
        let mut rng = stream_rng(s, 2);
        let mut mib = MibPayload::random(&mut rng);
        if let Some(sfn) = a.sfn {
            mib.sfn = sfn;
        }
        let cell = CellIdentity::new(a.cell.unwrap_or_else(|| rng.random_range(0..=MAX_CELL_ID)))?;
        let burst = generate_burst(&mib, cell, &bc)?;
        let mut profile = draw_profile(s, SCS_HZ, range, a.snr, fs)?;
        if !sim.channel.cfo {
            profile.cfo_hz = 0.0;
        }
        let rx = simulate(&burst.frame, &profile)?;
        samples.extend_from_slice(&rx.samples[..bc.window_len()]);
        truth.push(Truth {
            cell_id: cell.id(),
            mib,
            channel: profile,
            ssb_start: burst.ssb_start,
        });
    }
    let frame = IqFrame::new(samples, fs)?;
    io::write_iq(&frame, &a.out)?;
    if let Some(p) = &a.truth {
        io::write_json(&truth, p)?;
    }
    println!("{} bursts of {} samples -> {}", a.count, bc.window_len(), a.out.display());
    Ok(())
}

fn rx_config(path: Option<&Path>) -> Result<RxConfig> {
    Ok(match path {
        Some(p) => SimConfig::load(p)?.rx,
        None => RxConfig::default(),
    })
}

fn windows(path: &Path, meta: Option<&Path>, window: Option<usize>) -> Result<Vec<IqFrame>> {
    let frame = io::read_iq(path, meta)?;
    let len = window.unwrap_or_else(|| iq::period_samples(frame.sample_rate_hz));
    io::split_windows(&frame, len)
}

fn nn_symbols(tm: &TrainedModel, out: &RxOutput) -> Result<Vec<num_complex::Complex64>> {
    let input = stage_input(out, tm.meta.stage, tm.meta.eq_input)?;
    let x = Array2::from_shape_vec((1, input.len()), input).map_err(|e| Error::Dimension(e.to_string()))?;
    complexify(&predict(tm, &x)?.into_raw_vec_and_offset().0)
}

fn decode_report(out: &RxOutput, model: Option<&TrainedModel>, cfg: &RxConfig) -> Result<DecodeReport> {
    let est = &out.estimate;
    let gain = est.h.iter().map(|h| h.norm_sqr()).sum::<f64>() / est.h.len() as f64;
    let snr_db = (est.noise_var > 0.0).then(|| 10.0 * (gain / est.noise_var).log10());
    let mut report = DecodeReport {
        n_cell_id: Some(out.cell.id()),
        sfn: out.decoded.mib().map(|m| m.sfn),
        crc_pass: out.decoded.crc_pass,
        ber_pre_nn: None,
        ber_post_nn: None,
        snr_db,
    };
    if regenerate_labels(out, cfg.pbch)?.is_some() {
        let coded = pbch_transmit(&out.decoded.payload, out.cell, out.issb(), cfg.pbch)?.coded;
        report.ber_pre_nn = Some(symbol_ber(&coded, &out.post_mmse.symbols)?);
        if let Some(tm) = model {
            report.ber_post_nn = Some(symbol_ber(&coded, &nn_symbols(tm, out)?)?);
        }
    }
    Ok(report)
}

fn decode(a: &DecodeArgs) -> Result<()> {
    let cfg = rx_config(a.config.as_deref())?;
    let model = a.model.as_deref().map(io::load_model).transpose()?;
    let mut reports = Vec::new();
    for w in windows(&a.iq, a.meta.as_deref(), a.window)? {
        reports.push(match receive(&w, &cfg) {
            Ok(out) => decode_report(&out, model.as_ref(), &cfg)?,
            Err(_) => DecodeReport {
                n_cell_id: None,
                sfn: None,
                crc_pass: false,
                ber_pre_nn: None,
                ber_post_nn: None,
                snr_db: None,
            },
        });
    }
    match &a.out {
        Some(p) => io::write_json(&reports, p)?,
        None => println!("{}", serde_json::to_string_pretty(&reports)?),
    }
    let passed = reports.iter().filter(|r| r.crc_pass).count();
    eprintln!("{passed}/{} windows passed CRC", reports.len());
    Ok(())
}

fn dataset(a: &DatasetArgs, seed: u64) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    let sim = a.channel.sim()?;
    if let Some(path) = &a.iq {
        let tag = a.snr_tag.unwrap_or(f64::NAN);
        let ws = windows(path, a.meta.as_deref(), a.window)?;
        let (ds, stats) = build_captured_dataset(&ws, a.stage.into(), a.eq_input.into(), &sim.rx, tag)?;
        let out = a.out_dir.join(format!("captured_{}.bin", snr_tag(tag)));
        io::save_dataset(&ds, None, &out)?;
        println!(
            "{} windows: {} accepted, {} sync failures, {} CRC failures -> {}",
            stats.windows,
            stats.accepted,
            stats.sync_failures,
            stats.crc_failures,
            out.display()
        );
        return Ok(());
    }
    let grid = grid_or_default(&a.snr_grid);
    let specs: Vec<(String, SnrSpec)> = match SchemeMode::from(a.scheme) {
        SchemeMode::PerSnr => grid.iter().map(|&s| (snr_tag(s), SnrSpec::Fixed(s))).collect(),
        SchemeMode::SnrRange => vec![("range".into(), SnrSpec::Grid(grid))],
        SchemeMode::Fixed20db => vec![(snr_tag(20.0), SnrSpec::Fixed(20.0))],
    };
    for (i, (tag, snr)) in specs.into_iter().enumerate() {
        let cfg = DatasetConfig {
            channel: sim.channel,
            eq_input: a.eq_input.into(),
            burst: sim.burst,
            rx: sim.rx,
            ..DatasetConfig::new(a.stage.into(), snr, a.count, sub_seed(seed, i as u64))
        };
        let ds = build_synthetic_dataset(&cfg)?;
        let out = a.out_dir.join(format!("dataset_{tag}.bin"));
        io::save_dataset(&ds, Some(&cfg), &out)?;
        println!("{} examples, {} redraws -> {}", ds.len(), ds.redraws, out.display());
    }
    Ok(())
}

fn train(a: &TrainArgs, seed: u64) -> Result<()> {
    fs::create_dir_all(&a.out_dir)?;
    let datasets = a
        .data
        .iter()
        .map(|p| io::load_dataset(p).map(|(ds, _)| ds))
        .collect::<Result<Vec<_>>>()?;
    let scheme = TrainScheme {
        mode: a.scheme.into(),
        snr_grid: grid_or_default(&a.snr_grid),
    };
    let net = NetConfig {
        hidden: a.hidden,
        layout: a.layout.map(Into::into),
    };
    let cfg = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch_size,
        epochs: a.epochs,
        seed,
        ..TrainConfig::default()
    };
    for tm in train_scheme(&datasets, &scheme, &net, &cfg)? {
        let tag = match tm.meta.scheme {
            SchemeMode::SnrRange => "range".to_string(),
            _ => snr_tag(tm.meta.train_snr_db[0]),
        };
        let name = match tm.meta.stage {
            Stage::PostSync => "eq",
            _ => "se",
        };
        let model_path = a.out_dir.join(format!("model_{name}_{tag}.bin"));
        io::save_model(&tm, &model_path)?;
        io::write_curve_csv(&tm.meta.curve, &a.out_dir.join(format!("curve_{name}_{tag}.csv")))?;
        println!(
            "{}: validation MSE {:.4e} -> {}",
            tag,
            tm.meta.curve.final_validation_mse().unwrap_or(f64::NAN),
            model_path.display()
        );
    }
    Ok(())
}

fn eval(a: &EvalArgs, seed: u64) -> Result<()> {
    let tm = io::load_model(&a.model)?;
    let sim = a.channel.sim()?;
    let cfg = EvalConfig {
        test_snr_grid: grid_or_default(&a.snr_grid),
        n_test_bursts: a.bursts,
        seed,
        channel: sim.channel,
        constellation_bursts: a.constellation_bursts,
    };
    let report = evaluate(&tm, &cfg)?;
    io::write_eval_csv(&report, &a.out)?;
    if let Some(p) = &a.constellation {
        io::write_constellation_csv(&report, p)?;
    }
    if let Some(p) = &a.json {
        io::write_json(&report, p)?;
    }
    for p in &report.points {
        println!(
            "{:>6} dB  mse {:.4e} (mmse {:.4e})  ber {:.4e} -> {:.4e}",
            p.snr_db, p.mse, p.mse_pre, p.ber_pre, p.ber_post
        );
    }
    Ok(())
}

fn selftest(a: &SelftestArgs, seed: u64) -> Result<bool> {
    let checks = run_selftest(seed, a.quick)?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}
