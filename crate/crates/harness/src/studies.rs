//! Robustness, bursty-noise and receiver-scaling studies.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use convphy::autoenc::{receive_chunked, Checkpoint};
use convphy::baselines::{equalize_block, freq_response, EqualizerKind, QamSpec};
use convphy::channel::{perturb_taps, sample_awgn, ChannelResponse, ChannelSpec, ChannelTaps, Domain, NoiseKind, NoiseModel};
use convphy::nn::Pass;
use convphy::{Error, Result};

use crate::link::{Link, QamLink};
use crate::sweep::{ber_sweep, random_bits, task_rng, validate_grid, BerRecord, Purpose, StoppingRule};

/// Errors over a fixed number of frames (no stopping rule), for paired comparisons.
fn fixed_budget_ber(link: &dyn Link, channel: &ChannelSpec, frames: usize, seed: u64, task: u64) -> Result<f64> {
    let mut bit_rng = task_rng(seed, task, Purpose::Bits);
    let mut noise_rng = task_rng(seed, task, Purpose::Noise);
    let (mut bits, mut errors) = (0usize, 0usize);
    for _ in 0..frames {
        let tx = random_bits(&mut bit_rng, link.frame_bits());
        let out = link.run(&tx, channel, &mut noise_rng, false)?;
        errors += tx.iter().zip(&out.hard).filter(|(a, b)| a != b).count();
        bits += tx.len();
    }
    Ok(errors as f64 / bits as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self { mean, std: var.sqrt() }
    }

    /// Lower end of the one-sided 95% normal interval for the mean of `n` samples.
    pub fn lower95(&self, n: usize) -> f64 {
        self.mean - 1.645 * self.std / (n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRow {
    pub snr_db: f64,
    pub learned: Summary,
    pub baseline: Summary,
    pub learned_nominal: f64,
    pub baseline_nominal: f64,
    /// Per-trial `perturbed − nominal` BER, paired on identical bits and noise.
    pub learned_degradation: Summary,
    pub baseline_degradation: Summary,
}

/// Evaluates both systems on `n_trials` independently perturbed copies of `base_taps`.
///
/// The baseline keeps the unperturbed taps as its channel knowledge. Every trial at a given
/// SNR reuses the same bits and noise, so degradations are paired differences.
#[allow(clippy::too_many_arguments)]
pub fn robustness_eval(
    learned: &dyn Link,
    baseline: &QamLink,
    base_taps: &ChannelTaps,
    noise: NoiseModel,
    perturb_std: f64,
    n_trials: usize,
    snrs: &[f64],
    frames_per_point: usize,
    seed: u64,
) -> Result<Vec<RobustnessRow>> {
    validate_grid(snrs)?;
    if !(perturb_std >= 0.0) || n_trials == 0 {
        return Err(Error::InvalidArgument("perturb_std must be >= 0 and n_trials positive".into()));
    }
    let nominal = ChannelSpec::time(base_taps.clone(), noise);
    let mut baseline = baseline.clone();
    baseline.csi = Some(ChannelResponse::Time { taps: base_taps.clone() });
    learned.check(&nominal)?;
    baseline.check(&nominal)?;
    let trials: Vec<ChannelTaps> = (0..n_trials)
        .map(|t| perturb_taps(base_taps, perturb_std, &mut task_rng(seed, t as u64, Purpose::Taps)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(snrs.len());
    for (i, &snr) in snrs.iter().enumerate() {
        let task = i as u64;
        let ch = nominal.with_snr(snr);
        let learned_nominal = fixed_budget_ber(learned, &ch, frames_per_point, seed, task)?;
        let baseline_nominal = fixed_budget_ber(&baseline, &ch, frames_per_point, seed, task)?;
        let (mut l, mut b) = (Vec::with_capacity(n_trials), Vec::with_capacity(n_trials));
        for taps in &trials {
            let pc = ChannelSpec::time(taps.clone(), noise.with_snr(snr));
            l.push(fixed_budget_ber(learned, &pc, frames_per_point, seed, task)?);
            b.push(fixed_budget_ber(&baseline, &pc, frames_per_point, seed, task)?);
        }
        let ld: Vec<f64> = l.iter().map(|v| v - learned_nominal).collect();
        let bd: Vec<f64> = b.iter().map(|v| v - baseline_nominal).collect();
        rows.push(RobustnessRow {
            snr_db: snr,
            learned: Summary::of(&l),
            baseline: Summary::of(&b),
            learned_nominal,
            baseline_nominal,
            learned_degradation: Summary::of(&ld),
            baseline_degradation: Summary::of(&bd),
        });
    }
    Ok(rows)
}

/// Paired BER sweeps of both systems under bursty noise.
pub fn bursty_eval(
    learned: &dyn Link,
    baseline: &dyn Link,
    channel: &ChannelSpec,
    p: f64,
    rho: f64,
    snrs: &[f64],
    rule: &StoppingRule,
    seed: u64,
) -> Result<(Vec<BerRecord>, Vec<BerRecord>)> {
    if !(0.0..=1.0).contains(&p) || !(rho >= 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 <= p <= 1 and rho >= 1, got p = {p}, rho = {rho}")));
    }
    let noise = NoiseModel {
        kind: NoiseKind::Bursty {
            burst_probability: p,
            burst_sigma_multiplier: rho,
        },
        snr_db: channel.noise.snr_db,
    };
    let ch = channel.with_noise(noise);
    Ok((ber_sweep(learned, &ch, snrs, rule, seed)?, ber_sweep(baseline, &ch, snrs, rule, seed)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub lengths: Vec<usize>,
    /// Best-of-`repeats` seconds per length.
    pub learned_seconds: Vec<f64>,
    pub mmse_seconds: Vec<f64>,
    pub learned_slope: f64,
    pub mmse_slope: f64,
    /// Standard error of the MMSE slope estimate.
    pub mmse_slope_se: f64,
    pub learned_slope_se: f64,
}

/// Least-squares slope of `log y` against `log x` and its standard error.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let se = if lx.len() > 2 { (resid / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, se)
}

fn best_of<F: FnMut() -> Result<()>>(repeats: usize, mut f: F) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        let t = Instant::now();
        f()?;
        best = best.min(t.elapsed().as_secs_f64());
    }
    Ok(best)
}

/// Window length for the time-domain learned receiver in [`timing_bench`].
pub const BENCH_CHUNK: usize = 4096;

/// Times the learned receiver and a full-length FFT MMSE receiver with QAM slicing.
///
/// Time-domain receivers run in windows of [`BENCH_CHUNK`] positions (same output as one pass).
pub fn timing_bench(ckpt: &Checkpoint, taps: &ChannelTaps, lengths: &[usize], repeats: usize, seed: u64) -> Result<TimingReport> {
    if lengths.is_empty() || lengths.windows(2).any(|w| w[1] <= w[0]) || lengths.iter().any(|n| !n.is_power_of_two()) {
        return Err(Error::InvalidArgument("lengths must be strictly increasing powers of two".into()));
    }
    let qam = QamSpec::new(ckpt.arch.k as u32).unwrap_or_else(|_| QamSpec::qam64());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut learned, mut mmse) = (Vec::new(), Vec::new());
    let rx = ckpt.graph.receiver();
    for &n in lengths {
        let y = sample_awgn(1, n, std::f64::consts::FRAC_1_SQRT_2, &mut rng);
        learned.push(best_of(repeats, || {
            let out = match ckpt.arch.domain {
                Domain::Time => receive_chunked(&ckpt.graph, &y, BENCH_CHUNK, &mut rng)?,
                Domain::Frequency => ckpt.graph.forward_range(rx.clone(), &y, &Pass::default(), &mut rng)?,
            };
            std::hint::black_box(out);
            Ok(())
        })?);
        let symbols = y.complex_row(0);
        mmse.push(best_of(repeats, || {
            let gains = freq_response(taps, n)?;
            let eq = equalize_block(&symbols, &gains, EqualizerKind::Mmse { n0: 0.01 })?;
            std::hint::black_box(qam.demod_hard(&eq));
            Ok(())
        })?);
    }
    let xs: Vec<f64> = lengths.iter().map(|&n| n as f64).collect();
    let (learned_slope, learned_slope_se) = loglog_slope(&xs, &learned);
    let (mmse_slope, mmse_slope_se) = loglog_slope(&xs, &mmse);
    Ok(TimingReport {
        lengths: lengths.to_vec(),
        learned_seconds: learned,
        mmse_seconds: mmse,
        learned_slope,
        mmse_slope,
        mmse_slope_se,
        learned_slope_se,
    })
}
