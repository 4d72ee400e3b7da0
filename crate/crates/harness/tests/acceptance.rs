//! Acceptance criteria. Run with `cargo test -p convphy-harness --test acceptance`.
//!
//! Prints one PASS/FAIL line per criterion and a summary. A failed criterion makes the
//! process exit non-zero only with `CONVPHY_STRICT=1`; errors inside a criterion count as FAIL.
//! `CONVPHY_CRITERIA=1,2,10` restricts the run to the listed criteria.

use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use convphy::autoenc::{
    build_model, gen_dataset, infer_bits, infer_with, train, ArchConfig, Checkpoint, Stream, TrainConfig,
};
use convphy::baselines::{freq_response, qam_awgn_ber_theory, snr_for_theory_ber, QamSpec};
use convphy::channel::{power, sample_awgn, ChannelSpec, ChannelTaps, Domain, FrozenNoise, NoiseModel};
use convphy::ldpc::default_code;
use convphy::nn::{finite_difference_check, Activation, ConvSpec, LayerSpec, ModelGraph, Objective, Pass};
use convphy::{Result, Tensor3};
use convphy_harness::coded::{ldpc_pipeline, CodedLink};
use convphy_harness::export::{ber_csv, write_file};
use convphy_harness::link::{Equalizer, LearnedLink, QamLink};
use convphy_harness::studies::{robustness_eval, timing_bench};
use convphy_harness::sweep::{ber_point, ber_sweep, snr_at_ber, BerRecord, StoppingRule};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn artifacts() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).expect("artifact dir");
    dir
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fixed_bits(n: u64) -> StoppingRule {
    StoppingRule {
        min_bit_errors: u64::MAX,
        max_bits: n,
    }
}

fn fmt_curve(recs: &[BerRecord]) -> String {
    recs.iter().map(|r| format!("{}:{:.2e}", r.snr_db, r.ber)).collect::<Vec<_>>().join(" ")
}

fn trained(arch: ArchConfig, cfg: TrainConfig, channel: &ChannelSpec) -> Result<Checkpoint> {
    let graph = build_model(&arch, cfg.seed)?;
    Ok(train(graph, &arch, channel, &cfg, &mut |_, _| {})?.checkpoint)
}

// ---------------------------------------------------------------- criterion 1

fn random_tensor(b: usize, l: usize, c: usize, seed: u64) -> Tensor3 {
    let mut r = rng(seed);
    Tensor3::from_vec(b, l, c, (0..b * l * c).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

fn jitter_biases(g: &mut ModelGraph, seed: u64) {
    let mut r = rng(seed);
    for p in g.params.layers.iter_mut().flatten() {
        for b in p.bias.value.iter_mut() {
            *b += r.random_range(-0.2..0.2);
        }
    }
}

fn gradients() -> Result<Verdict> {
    let clock = Instant::now();
    let taps = ChannelTaps::channel_b();
    let time_ch = ChannelSpec::time(taps.clone(), NoiseModel::none());
    let freq_ch = ChannelSpec::frequency(freq_response(&taps, 8)?, NoiseModel::none());
    let single: Vec<(&str, LayerSpec, usize, usize, Option<&ChannelSpec>)> = vec![
        ("conv1d", LayerSpec::Conv1d(ConvSpec::same(2, 3, 5)), 2, 11, None),
        ("conv1d-stride", LayerSpec::Conv1d(ConvSpec::new(1, 4, 3, 3, 0)), 1, 12, None),
        (
            "locally-connected",
            LayerSpec::LocallyConnected1d {
                conv: ConvSpec::same(2, 3, 3),
                input_len: 8,
            },
            2,
            8,
            None,
        ),
        ("dense", LayerSpec::dense(3, 2), 3, 7, None),
        ("relu", LayerSpec::act(Activation::Relu), 2, 9, None),
        ("sigmoid", LayerSpec::act(Activation::Sigmoid), 2, 9, None),
        ("linear", LayerSpec::act(Activation::Linear), 2, 9, None),
        ("power-normalize", LayerSpec::PowerNormalize, 2, 8, None),
        ("channel-time", LayerSpec::ChannelSlot, 2, 8, Some(&time_ch)),
        ("channel-freq", LayerSpec::ChannelSlot, 2, 8, Some(&freq_ch)),
    ];
    let mut worst: Vec<(String, f64)> = Vec::new();
    for (i, (name, layer, c, l, ch)) in single.into_iter().enumerate() {
        let mut g = ModelGraph::new(vec![layer], c, l, &mut rng(i as u64))?;
        jitter_biases(&mut g, 100 + i as u64);
        let x = random_tensor(2, l, c, 200 + i as u64);
        let probe = g.forward(&x, &Pass { channel: ch.map(|c| c as _), power_gain: None }, &mut rng(0))?;
        let (_, ol, oc) = probe.shape();
        let target = random_tensor(2, ol, oc, 300 + i as u64);
        let rep = finite_difference_check(&g, &x, &target, Objective::SquaredError, ch.map(|c| c as _))?;
        worst.push((name.to_string(), rep.max()));
    }
    for domain in [Domain::Time, Domain::Frequency] {
        let arch = ArchConfig {
            k: 2,
            m: 8,
            hidden: 8,
            rx_kernel: 7,
            domain,
            ..Default::default()
        };
        let mut g = build_model(&arch, 3)?;
        jitter_biases(&mut g, 11);
        let x = gen_dataset(2, 2, 8, 5, Stream::Test);
        let target = x.clone().reshape(2, 8, 2)?;
        let ch = if domain == Domain::Time { &time_ch } else { &freq_ch };
        let rep = finite_difference_check(&g, &x, &target, Objective::Bce, Some(ch))?;
        worst.push((format!("full-graph-{domain:?}").to_lowercase(), rep.max()));
    }
    let secs = clock.elapsed().as_secs_f64();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", ");
    Ok(verdict(max <= 1e-4 && secs < 10.0, format!("max rel err {max:.2e} in {secs:.1}s [{detail}]")))
}

// ---------------------------------------------------------------- criterion 2

fn calibration() -> Result<Verdict> {
    let clock = Instant::now();
    let qam = QamSpec::qam64();
    let link = QamLink::new(qam.clone(), Equalizer::Mmse, 64, 12_800);
    let ch = ChannelSpec::awgn(0.0);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (target, bits)) in [(1e-2, 1_000_000u64), (1e-3, 10_000_000u64)].into_iter().enumerate() {
        let snr = snr_for_theory_ber(&qam, target);
        let rec = ber_point(&link, &ch, snr, &fixed_bits(bits), 2, i as u64)?;
        let theory = qam_awgn_ber_theory(&qam, snr);
        let rel = (rec.ber / theory - 1.0).abs();
        ok &= rel <= 0.10 && rec.bits >= bits;
        parts.push(format!("{snr:.2} dB: MC {:.3e} over {} bits vs theory {theory:.3e} (rel {rel:.3})", rec.ber, rec.bits));
    }
    let secs = clock.elapsed().as_secs_f64();
    Ok(verdict(ok && secs < 120.0, format!("{} in {secs:.1}s", parts.join("; "))))
}

// ---------------------------------------------------------------- criterion 3

fn smoke_model() -> Result<Checkpoint> {
    let arch = ArchConfig { k: 2, m: 16, ..Default::default() };
    let cfg = TrainConfig {
        n_train: 10_000,
        epochs: 20,
        snr_db: 30.0,
        patience: 0,
        ..Default::default()
    };
    trained(arch, cfg, &ChannelSpec::time(ChannelTaps::identity(), NoiseModel::awgn(30.0)))
}

fn trainability() -> Result<(Verdict, Checkpoint)> {
    let clock = Instant::now();
    let ckpt = smoke_model()?;
    let bits = gen_dataset(3125, 2, 16, ckpt.train.seed, Stream::Test);
    let ch = ChannelSpec::time(ChannelTaps::identity(), NoiseModel::awgn(30.0));
    let (_, hard) = infer_bits(&ckpt, &bits, &ch, &mut rng(17))?;
    let errors = convphy::autoenc::bit_errors(&hard, &bits);
    let secs = clock.elapsed().as_secs_f64();
    let epochs = ckpt.history.len();
    Ok((
        verdict(
            errors == 0 && epochs <= 20 && secs < 120.0,
            format!("{errors} errors over {} held-out bits after {epochs} epochs, {secs:.1}s", hard.len()),
        ),
        ckpt,
    ))
}

// ---------------------------------------------------------------- criterion 4

fn any_length() -> Result<Verdict> {
    let clock = Instant::now();
    let arch = ArchConfig::default();
    let ch = ChannelSpec::time(ChannelTaps::channel_a(), NoiseModel::awgn(16.0));
    let cfg = TrainConfig {
        n_train: 3000,
        n_test: 300,
        epochs: 4,
        snr_db: 16.0,
        patience: 0,
        ..Default::default()
    };
    let ckpt = trained(arch.clone(), cfg, &ch)?;
    let k = arch.k;

    // Unmodified runs at M = 100 and 1000.
    for m_run in [100, 1000] {
        let bits = gen_dataset(2, k, m_run, 1, Stream::Eval);
        let (p, _) = infer_bits(&ckpt, &bits, &ch, &mut rng(2))?;
        assert_eq!(p.len(), k * m_run);
    }

    // Same bits and noise: a 1000-symbol sequence and a 100-symbol window inside it.
    let (long_m, start, win) = (1000, 450, 100);
    let bits = gen_dataset(1, k, long_m, 3, Stream::Eval);
    let noise = sample_awgn(1, long_m, ch.noise.sigma(), &mut rng(4));
    let pn = ckpt.graph.transmitter().end - 1;
    let pre = ckpt.graph.forward_range(0..pn, &bits, &Pass::default(), &mut rng(0))?;
    let gain = power::gain(&pre)?;
    let long = infer_with(
        &ckpt.graph,
        k,
        &bits,
        &Pass { channel: Some(&FrozenNoise::new(&ch, noise.clone())), power_gain: Some(gain) },
        &mut rng(0),
    )?;
    let short_bits = bits.slice_len(start * k, win * k)?;
    let short_noise = noise.slice_len(start, win)?;
    let short = infer_with(
        &ckpt.graph,
        k,
        &short_bits,
        &Pass { channel: Some(&FrozenNoise::new(&ch, short_noise)), power_gain: Some(gain) },
        &mut rng(0),
    )?;
    // Receptive field: TX 5, channel memory, RX rx_kernel and 5.
    let margin = 2 + ch.taps().map_or(1, ChannelTaps::span) + arch.rx_kernel / 2 + 2 + 2;
    let mut max_diff = 0.0f64;
    for s in margin..win - margin {
        for j in 0..k {
            max_diff = max_diff.max((long.at(0, (start + s) * k + j, 0) - short.at(0, s * k + j, 0)).abs());
        }
    }

    // BER at M_run = 1000 against M_run = 400 under the standard stopping rule.
    let snr = 16.0;
    let rule = StoppingRule::default();
    let r400 = ber_point(&LearnedLink::new(ckpt.clone(), 400, 32), &ch, snr, &rule, 5, 0)?;
    let r1000 = ber_point(&LearnedLink::new(ckpt, 1000, 32), &ch, snr, &rule, 6, 0)?;
    let ci_half = 1.96 * r400.std_error();
    let diff = (r1000.ber - r400.ber).abs();
    let secs = clock.elapsed().as_secs_f64();
    Ok(verdict(
        max_diff <= 1e-9 && diff <= 2.0 * ci_half,
        format!(
            "interior max |dp| {max_diff:.1e} (margin {margin}); BER M=400 {:.3e} ±{ci_half:.1e}, M=1000 {:.3e}; {secs:.0}s",
            r400.ber, r1000.ber
        ),
    ))
}

// ---------------------------------------------------------------- criterion 5

const C5_SNRS: [f64; 9] = [12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 26.0, 28.0];
const C5_SEEDS: [u64; 3] = [0, 1, 2];

/// Training setup for the channel-B comparison; see README for why it differs from the defaults.
fn c5_setup(seed: u64) -> (ArchConfig, TrainConfig) {
    let arch = ArchConfig {
        k: 6,
        m: 200,
        hidden: 32,
        tx_kernel: 21,
        rx_kernel: 81,
        ..Default::default()
    };
    let cfg = TrainConfig {
        n_train: 20_000,
        n_test: 2_000,
        epochs: 30,
        lr: 0.003,
        snr_db: 20.0,
        patience: 5,
        seed,
        ..Default::default()
    };
    (arch, cfg)
}

/// Long sequences keep the zero-padded edges a small fraction of the evaluated symbols.
fn eval_link(ckpt: &Checkpoint) -> LearnedLink {
    LearnedLink::new(ckpt.clone(), 2000, 8)
}

fn channel_b(snr: f64) -> ChannelSpec {
    ChannelSpec::time(ChannelTaps::channel_b(), NoiseModel::awgn(snr))
}

fn fading_gain(models: &mut Vec<Checkpoint>) -> Result<Verdict> {
    let clock = Instant::now();
    let out = artifacts();
    let rule = StoppingRule::default();
    let mmse = QamLink::new(QamSpec::qam64(), Equalizer::Mmse, 64, 12_800);
    let base = ber_sweep(&mmse, &channel_b(18.0), &C5_SNRS, &rule, 7)?;
    write_file(&out, "c5_mmse.csv", &ber_csv(&base))?;
    let mut curves = Vec::new();
    for &seed in &C5_SEEDS {
        let (arch, cfg) = c5_setup(seed);
        let ckpt = trained(arch, cfg.clone(), &channel_b(cfg.snr_db))?;
        let link = eval_link(&ckpt);
        let recs = ber_sweep(&link, &channel_b(18.0), &C5_SNRS, &rule, 7)?;
        println!("    seed {seed}: {}", fmt_curve(&recs));
        write_file(&out, &format!("c5_learned_seed{seed}.csv"), &ber_csv(&recs))?;
        curves.push(recs);
        models.push(ckpt);
    }
    println!("    mmse:   {}", fmt_curve(&base));
    let mean: Vec<f64> = (0..C5_SNRS.len())
        .map(|i| curves.iter().map(|c| c[i].ber).sum::<f64>() / curves.len() as f64)
        .collect();
    let (mut run, mut best) = (0usize, 0usize);
    let mut wins = Vec::new();
    for (i, b) in base.iter().enumerate() {
        if (1e-3..=1e-1).contains(&b.ber) && mean[i] <= b.ber {
            run += 1;
            wins.push(b.snr_db);
        } else {
            run = 0;
        }
        best = best.max(run);
    }
    let secs = clock.elapsed().as_secs_f64();
    Ok(verdict(
        best >= 3 && secs < 7200.0,
        format!(
            "seed-mean learned <= MMSE at {wins:?} dB (longest consecutive run {best}); mean {:?}; {secs:.0}s",
            mean.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
    ))
}

// ---------------------------------------------------------------- criterion 6

const N_SUB: usize = 64;
const ERASED: [usize; 2] = [13, 45];

fn ofdm_gains() -> Result<Vec<Complex64>> {
    let mut g = freq_response(&ChannelTaps::channel_b(), N_SUB)?;
    for &i in &ERASED {
        g[i] = Complex64::new(0.0, 0.0);
    }
    Ok(g)
}

fn ofdm() -> Result<Verdict> {
    let clock = Instant::now();
    let gains = ofdm_gains()?;
    let ch = |snr: f64| ChannelSpec::frequency(gains.clone(), NoiseModel::awgn(snr));
    let arch = ArchConfig {
        k: 6,
        m: N_SUB,
        domain: Domain::Frequency,
        ..Default::default()
    };
    let cfg = TrainConfig {
        n_train: 30_000,
        n_test: 3_000,
        epochs: 40,
        lr: 0.003,
        snr_db: 26.0,
        patience: 5,
        ..Default::default()
    };
    let ckpt = trained(arch, cfg.clone(), &ch(cfg.snr_db))?;
    let snrs = [20.0, 22.0, 24.0, 26.0, 28.0, 30.0];
    let rule = StoppingRule::default();
    let learned = ber_sweep(&LearnedLink::new(ckpt, N_SUB, 200), &ch(0.0), &snrs, &rule, 8)?;
    let zf = QamLink::new(QamSpec::qam64(), Equalizer::Zf, N_SUB, 12_800);
    let zf_recs = ber_sweep(&zf, &ch(0.0), &snrs, &rule, 8)?;
    let out = artifacts();
    write_file(&out, "c6_learned.csv", &ber_csv(&learned))?;
    write_file(&out, "c6_zf.csv", &ber_csv(&zf_recs))?;

    let floor = 0.5 * ERASED.len() as f64 / N_SUB as f64;
    let high = ber_point(&zf, &ch(0.0), 80.0, &fixed_bits(1_000_000), 8, 99)?;
    let floor_rel = (high.ber / floor - 1.0).abs();
    let hit = learned
        .iter()
        .zip(&zf_recs)
        .find(|(l, z)| l.ber <= 1e-3 && z.ber >= 1e-2);
    let min_gain = gains.iter().map(|g| g.norm()).fold(f64::INFINITY, f64::min);
    let secs = clock.elapsed().as_secs_f64();
    Ok(verdict(
        hit.is_some() && floor_rel <= 0.2 && min_gain < 0.05,
        format!(
            "learned {} | ZF {} | first hit {:?} dB; ZF floor predicted {floor:.4} measured {:.4} at 80 dB (rel {floor_rel:.3}); {secs:.0}s",
            fmt_curve(&learned),
            fmt_curve(&zf_recs),
            hit.map(|h| h.0.snr_db),
            high.ber
        ),
    ))
}

// ---------------------------------------------------------------- criterion 7

fn coded_crossing(coded: &CodedLink, ch: &ChannelSpec, coarse: &[f64], seed: u64) -> Result<(Vec<BerRecord>, f64)> {
    let recs = ldpc_pipeline(coded, ch, coarse, &StoppingRule::default(), seed)?;
    refine_crossing(recs, |lo, hi| {
        ldpc_pipeline(coded, ch, &[lo, hi], &fixed_bits(10_000_000), seed + 1)
    })
}

/// Re-measures the two grid points bracketing 1e-4 with at least 10^7 bits each.
fn refine_crossing(
    recs: Vec<BerRecord>,
    rerun: impl FnOnce(f64, f64) -> Result<Vec<BerRecord>>,
) -> Result<(Vec<BerRecord>, f64)> {
    let i = recs
        .iter()
        .position(|r| r.ber <= 1e-4)
        .filter(|&i| i > 0)
        .ok_or_else(|| convphy::Error::InvalidArgument(format!("1e-4 not bracketed: {}", fmt_curve(&recs))))?;
    let fine = rerun(recs[i - 1].snr_db, recs[i].snr_db)?;
    let snr = snr_at_ber(&fine, 1e-4)
        .ok_or_else(|| convphy::Error::InvalidArgument(format!("1e-4 not bracketed after refinement: {}", fmt_curve(&fine))))?;
    Ok((fine, snr))
}

fn ldpc(models: &[Checkpoint]) -> Result<Verdict> {
    let clock = Instant::now();
    let code = default_code();
    let qam = QamLink::new(QamSpec::qam64(), Equalizer::Mmse, 64, 12_800);
    let awgn = ChannelSpec::awgn(10.0);

    let coarse_u: Vec<f64> = (18..=28).map(f64::from).collect();
    let unc = ber_sweep(&qam, &awgn, &coarse_u, &StoppingRule::default(), 21)?;
    let (unc_fine, snr_u) = refine_crossing(unc, |lo, hi| ber_sweep(&qam, &awgn, &[lo, hi], &fixed_bits(10_000_000), 22))?;
    let coded = CodedLink::new(&qam, &code, 50, 0);
    let coarse_c: Vec<f64> = (20..=36).map(|v| f64::from(v) * 0.5).collect();
    let (cod_fine, snr_c) = coded_crossing(&coded, &awgn, &coarse_c, 23)?;
    let min_bits = unc_fine.iter().chain(&cod_fine).map(|r| r.bits).min().unwrap_or(0);
    // Same SNR per channel symbol; Eb/N0 also charges the coded link for its halved info rate.
    let gain_es = snr_u - snr_c;
    let gain_eb = gain_es - 10.0 * 2f64.log10();
    let part_a = gain_eb >= 2.0 && min_bits >= 10_000_000;

    let mut part_b = true;
    let mut rows = Vec::new();
    if let Some(ckpt) = models.first() {
        let learned = eval_link(ckpt);
        let ch = channel_b(18.0);
        let unc = ber_sweep(&learned, &ch, &C5_SNRS, &StoppingRule::default(), 24)?;
        let coded = CodedLink::new(&learned, &code, 50, 0);
        let cod = ldpc_pipeline(&coded, &ch, &C5_SNRS, &StoppingRule::default(), 24)?;
        for (u, c) in unc.iter().zip(&cod) {
            if (1e-3..=1e-1).contains(&u.ber) {
                part_b &= c.ber < u.ber;
                rows.push(format!("{}dB {:.2e}->{:.2e}", u.snr_db, u.ber, c.ber));
            }
        }
        part_b &= !rows.is_empty();
    } else {
        part_b = false;
        rows.push("no learned model available".into());
    }
    let secs = clock.elapsed().as_secs_f64();
    Ok(verdict(
        part_a && part_b,
        format!(
            "BER 1e-4 at Es/N0 uncoded {snr_u:.2} dB, coded {snr_c:.2} dB: gain {gain_es:.2} dB Es/N0, {gain_eb:.2} dB Eb/N0 (min {min_bits} bits at critical points); learned uncoded->coded [{}]; {secs:.0}s",
            rows.join(", ")
        ),
    ))
}

// ---------------------------------------------------------------- criterion 8

fn robustness(models: &[Checkpoint]) -> Result<Verdict> {
    let clock = Instant::now();
    let Some(ckpt) = models.first() else {
        return Ok(verdict(false, "no learned model available"));
    };
    let learned = eval_link(ckpt);
    let mmse = QamLink::new(QamSpec::qam64(), Equalizer::Mmse, 64, 12_800);
    let mid = 20.0;
    let rows = robustness_eval(
        &learned,
        &mmse,
        &ChannelTaps::channel_b(),
        NoiseModel::awgn(mid),
        0.05,
        100,
        &[mid],
        2,
        31,
    )?;
    let r = &rows[0];
    let lower = r.baseline_degradation.lower95(100);
    let secs = clock.elapsed().as_secs_f64();
    Ok(verdict(
        lower > 0.0,
        format!(
            "{mid} dB, 100 trials: MMSE nominal {:.3e}, mean degradation {:.3e} (95% lower bound {lower:.3e}); learned nominal {:.3e}, mean degradation {:.3e} ± {:.1e}; {secs:.0}s",
            r.baseline_nominal, r.baseline_degradation.mean, r.learned_nominal, r.learned_degradation.mean, r.learned_degradation.std
        ),
    ))
}

// ---------------------------------------------------------------- criterion 9

fn scaling(models: &[Checkpoint], fallback: &Checkpoint) -> Result<Verdict> {
    let ckpt = models.first().unwrap_or(fallback);
    let lengths: Vec<usize> = (12..=18).map(|e| 1usize << e).collect();
    let rep = timing_bench(ckpt, &ChannelTaps::channel_b(), &lengths, 5, 0)?;
    let mut csv = String::from("n,learned_seconds,mmse_seconds\n");
    for (i, n) in rep.lengths.iter().enumerate() {
        csv.push_str(&format!("{n},{},{}\n", rep.learned_seconds[i], rep.mmse_seconds[i]));
    }
    let path = write_file(&artifacts(), "c9_timing.csv", &csv)?;
    print!("{}", csv.lines().map(|l| format!("    {l}\n")).collect::<String>());
    let learned_ok = (0.8..=1.2).contains(&rep.learned_slope);
    let z = (rep.mmse_slope - 1.0) / rep.mmse_slope_se.max(1e-12);
    let mmse_note = if z > 2.0 {
        "super-linear"
    } else if z < -2.0 {
        "sub-linear"
    } else {
        "inconclusive (raw data attached)"
    };
    Ok(verdict(
        learned_ok && z >= -2.0,
        format!(
            "learned slope {:.3} ± {:.3}; MMSE slope {:.3} ± {:.3} ({mmse_note}, z = {z:.1}); data {}",
            rep.learned_slope,
            rep.learned_slope_se,
            rep.mmse_slope,
            rep.mmse_slope_se,
            path.display()
        ),
    ))
}

// ---------------------------------------------------------------- criterion 10

fn cli(args: &[&str]) -> Result<()> {
    let o = Process::new(env!("CARGO_BIN_EXE_convphy")).args(args).output()?;
    if !o.status.success() {
        return Err(convphy::Error::InvalidArgument(format!(
            "convphy {args:?} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        )));
    }
    Ok(())
}

fn determinism(smoke: &Checkpoint) -> Result<Verdict> {
    let dir = artifacts().join("c10");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir)?;
    smoke.save(&dir.join("smoke.ckpt"))?;
    let config = r#"
name = "det"
seed = 12
snr_db = [4.0, 8.0, 12.0]

[stopping]
min_bit_errors = 200
max_bits = 400000

[channel]
domain = "time"
preset = "a"

[[system]]
kind = "qam"
name = "qpsk_mmse"
bits_per_symbol = 2
equalizer = "mmse"
frame_symbols = 512

[[system]]
kind = "learned"
name = "learned"
checkpoint = "smoke.ckpt"

[ldpc]
max_iters = 20

[robustness]
n_trials = 5
frames_per_point = 1
"#;
    let cfg = dir.join("det.toml");
    std::fs::write(&cfg, config)?;
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let mut compared = 0;
    for cmd in ["sweep", "coded-sweep", "robustness"] {
        let (a, b) = (dir.join(format!("{cmd}-a")), dir.join(format!("{cmd}-b")));
        cli(&[cmd, "--config", &s(&cfg), "--out", &s(&a)])?;
        cli(&[cmd, "--config", &s(&a.join("det.meta.toml")), "--out", &s(&b)])?;
        for entry in std::fs::read_dir(&a)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e == "csv") {
                let other = b.join(p.file_name().expect("file name"));
                if std::fs::read(&p)? != std::fs::read(&other)? {
                    return Ok(verdict(false, format!("{} differs from {}", p.display(), other.display())));
                }
                compared += 1;
            }
        }
    }
    Ok(verdict(compared == 5, format!("{compared} CSVs reproduced byte-identically from metadata")))
}

// ----------------------------------------------------------------

fn selected() -> Vec<u32> {
    match std::env::var("CONVPHY_CRITERIA") {
        Ok(list) if !list.trim().is_empty() => list.split(',').filter_map(|t| t.trim().parse().ok()).collect(),
        _ => (1..=10).collect(),
    }
}

fn main() {
    let want = selected();
    let on = |id: u32| want.contains(&id);
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |id: u32, name: &'static str, r: Result<Verdict>| {
        let v = r.unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        println!("criterion {id:>2} {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };

    if on(1) {
        record(1, "gradient correctness", gradients());
    }
    if on(2) {
        record(2, "baseline calibration", calibration());
    }
    let mut smoke = None;
    if on(3) || on(9) || on(10) {
        match trainability() {
            Ok((v, ckpt)) => {
                if on(3) {
                    record(3, "trainability smoke test", Ok(v));
                }
                smoke = Some(ckpt);
            }
            Err(e) => record(3, "trainability smoke test", Err(e)),
        }
    }
    if on(4) {
        record(4, "any-length property", any_length());
    }
    let mut models = Vec::new();
    if on(5) || on(7) || on(8) {
        let r = fading_gain(&mut models);
        if on(5) {
            record(5, "fading-channel gain", r);
        }
    }
    if on(6) {
        record(6, "OFDM frequency-domain", ofdm());
    }
    if on(7) {
        record(7, "LDPC pipeline", ldpc(&models));
    }
    if on(8) {
        record(8, "robustness", robustness(&models));
    }
    for (id, name) in [(9, "scaling"), (10, "determinism")] {
        if !on(id) {
            continue;
        }
        let r = match &smoke {
            Some(s) if id == 9 => scaling(&models, s),
            Some(s) => determinism(s),
            None => Ok(verdict(false, "no model available")),
        };
        record(id, name, r);
    }

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") }
    );
    if !failed.is_empty() && std::env::var("CONVPHY_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
