use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ntn_pbch::channel::{apply_cfo, apply_delay};
use ntn_pbch::frame::IqFrame;
use ntn_pbch::io::iq::{read_iq, write_iq};
use ntn_pbch::models::{complexify, realify, BlockLayout};
use ntn_pbch::nn::init_mlp;
use ntn_pbch::nn::train::{train, TrainConfig, TrainData};
use ntn_pbch::nr::burst::{generate_burst, BurstConfig};
use ntn_pbch::nr::grid::{dmrs_flags, pbch_positions, SsbGrid};
use ntn_pbch::nr::mib::MibPayload;
use ntn_pbch::nr::pbch::{pbch_decode_hard, pbch_transmit, PbchConfig};
use ntn_pbch::nr::CellIdentity;
use ntn_pbch::rx::estimate::{mmse_equalize, ChannelEstimate};
use ntn_pbch::rx::{receive, RxConfig};

fn mib_strategy() -> impl Strategy<Value = MibPayload> {
    any::<u64>().prop_map(|s| MibPayload::random(&mut ChaCha8Rng::seed_from_u64(s)))
}

fn cell_strategy() -> impl Strategy<Value = CellIdentity> {
    (0u16..1008).prop_map(|id| CellIdentity::new(id).unwrap())
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), len)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn power(s: &[Complex64]) -> f64 {
    s.iter().map(|z| z.norm_sqr()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mib_pack_unpack(mib in mib_strategy()) {
        let bits = mib.pack().unwrap();
        prop_assert_eq!(bits.len(), 32);
        prop_assert_eq!(MibPayload::unpack(&bits).unwrap(), mib);
    }

    #[test]
    fn cell_id_from_parts(n1 in 0u16..336, n2 in 0u8..3) {
        let c = CellIdentity::from_parts(n1, n2).unwrap();
        prop_assert_eq!(c.id(), 3 * n1 + u16::from(n2));
        prop_assert_eq!(c.n_id_1(), n1);
        prop_assert_eq!(c.n_id_2(), n2);
        prop_assert_eq!(c.v_shift(), usize::from(c.id() % 4));
    }

    #[test]
    fn pbch_round_trip(
        payload in prop::collection::vec(0u8..2, 32),
        cell in cell_strategy(),
        issb in 0u8..8,
        strict in any::<bool>(),
    ) {
        let cfg = PbchConfig { strict_standard: strict };
        let tx = pbch_transmit(&payload, cell, issb, cfg).unwrap();
        prop_assert_eq!(tx.coded.len(), 864);
        prop_assert_eq!(tx.symbols.len(), 432);
        let again = pbch_transmit(&payload, cell, issb, cfg).unwrap();
        prop_assert_eq!(&again, &tx);
        let a = 0.5f64.sqrt();
        for z in &tx.symbols {
            prop_assert!((z.re.abs() - a).abs() < 1e-12 && (z.im.abs() - a).abs() < 1e-12);
        }
        let dec = pbch_decode_hard(&tx.coded, cell, issb, cfg).unwrap();
        prop_assert!(dec.crc_pass);
        prop_assert_eq!(dec.payload, payload);
    }

    #[test]
    fn grid_masks(cell in cell_strategy(), issb in 0u8..8) {
        let g = SsbGrid::new(cell, issb);
        let data = g.data_mask.iter().filter(|&&b| b).count();
        let dmrs = g.dmrs_mask.iter().filter(|&&b| b).count();
        prop_assert_eq!(data, 432);
        prop_assert_eq!(dmrs, 144);
        prop_assert!(g.data_mask.iter().zip(&g.dmrs_mask).all(|(&d, &p)| !(d && p)));
        for (&(k, l), &is_dmrs) in pbch_positions().iter().zip(&dmrs_flags(cell)) {
            prop_assert_eq!(is_dmrs, k % 4 == usize::from(cell.id() % 4));
            prop_assert_eq!(g.dmrs_mask[l * 240 + k], is_dmrs);
            prop_assert_eq!(g.data_mask[l * 240 + k], !is_dmrs);
        }
    }

    #[test]
    fn cfo_preserves_power(samples in complex_vec(256), cfo in -7500.0f64..7500.0) {
        let frame = IqFrame::new(samples, 7.68e6).unwrap();
        let out = apply_cfo(&frame, cfo);
        let (p0, p1) = (power(&frame.samples), power(&out.samples));
        prop_assert!((p1 - p0).abs() <= 1e-9 * p0.max(1.0));
    }

    #[test]
    fn fractional_delay_power(seed in any::<u64>(), integer in 0usize..16, frac in 0.0f64..1.0) {
        // Band-limited test signal: a few tones well inside the band.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tones: Vec<(f64, f64)> = (0..4)
            .map(|_| (rand::Rng::random_range(&mut rng, -0.2..0.2), rand::Rng::random_range(&mut rng, 0.0..6.3)))
            .collect();
        let signal = |t: f64| -> Complex64 {
            tones
                .iter()
                .map(|&(f, ph)| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t + ph))
                .sum()
        };
        let n = 2048;
        let frame = IqFrame::new((0..n).map(|t| signal(t as f64)).collect(), 7.68e6).unwrap();
        let out = apply_delay(&frame, integer, frac).unwrap();
        let mid = 256..n - 256;
        let ideal: Vec<Complex64> = mid.clone().map(|t| signal(t as f64 - integer as f64 - frac)).collect();
        let p0 = power(&ideal);
        let p1 = power(&out.samples[mid]);
        prop_assert!((p1 / p0 - 1.0).abs() < 0.01, "ratio {}", p1 / p0);
    }

    #[test]
    fn mmse_is_zf_without_noise(cell in cell_strategy(), y in complex_vec(576), h in complex_vec(576)) {
        let h: Vec<Complex64> = h.into_iter().map(|z| z + Complex64::new(2.5, 0.0)).collect();
        let mut g = SsbGrid::new(cell, 0);
        for ((k, l), v) in pbch_positions().into_iter().zip(&y) {
            g.set(k, l, *v);
        }
        let eq = mmse_equalize(&g, &ChannelEstimate { h: h.clone(), noise_var: 1e-12 }).unwrap();
        let zf: Vec<Complex64> = dmrs_flags(cell)
            .iter()
            .enumerate()
            .filter(|(_, &p)| !p)
            .map(|(i, _)| y[i] / h[i])
            .collect();
        prop_assert_eq!(eq.symbols.len(), zf.len());
        for (a, b) in eq.symbols.iter().zip(&zf) {
            prop_assert!((a - b).norm() < 1e-9 * b.norm().max(1.0));
        }
    }

    #[test]
    fn realify_complexify(v in complex_vec(50)) {
        let r = realify(&v);
        prop_assert_eq!(r.len(), 100);
        prop_assert_eq!(complexify(&r).unwrap(), v);
    }

    #[test]
    fn layout_rows_round_trip(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = Array2::from_shape_fn((n, 864), |_| rand::Rng::random_range(&mut rng, -1.0..1.0));
        for layout in [BlockLayout::Whole, BlockLayout::Symbol, BlockLayout::Prb] {
            let rows = layout.target_rows(&y).unwrap();
            prop_assert_eq!(rows.nrows(), n * layout.rows_per_example());
            prop_assert_eq!(layout.merge_rows(rows).unwrap(), y.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn iq_file_round_trip(samples in complex_vec(64)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.iq");
        let frame = IqFrame::new(samples, 7.68e6).unwrap();
        write_iq(&frame, &path).unwrap();
        let back = read_iq(&path, None).unwrap();
        prop_assert_eq!(back.len(), frame.len());
        for (a, b) in back.samples.iter().zip(&frame.samples) {
            prop_assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn training_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((32, 2), |_| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let y = x.mapv(|v| 0.5 * v);
        let data = TrainData::new(x, y, 2).unwrap();
        let cfg = TrainConfig { epochs: 3, batch_size: 4, seed, ..TrainConfig::default() };
        let run = || {
            let mut m = init_mlp(2, 8, 2, seed).unwrap();
            let curve = train(&mut m, &data, &cfg).unwrap();
            (m, curve)
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn noiseless_chain(mib in mib_strategy(), cell in cell_strategy()) {
        let burst = generate_burst(&mib, cell, &BurstConfig::default()).unwrap();
        let out = receive(&burst.frame, &RxConfig::default()).unwrap();
        prop_assert_eq!(out.cell, cell);
        prop_assert!(out.decoded.crc_pass);
        prop_assert_eq!(out.decoded.mib(), Some(mib));
    }
}
