//! Executes experiment configs and writes their artifacts.

use std::path::{Path, PathBuf};

use convphy::channel::{ChannelSpec, NoiseKind, NoiseModel};
use convphy::{Error, Result};

use crate::coded::{ldpc_pipeline, CodedLink};
use crate::config::{ExperimentConfig, SystemConfig};
use crate::export::{ber_csv, write_file};
use crate::link::Link;
use crate::studies::robustness_eval;
use crate::sweep::{ber_sweep, common_random_numbers, BerRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sweep,
    CodedSweep,
    Bursty,
    Robustness,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Sweep => "sweep",
            Command::CodedSweep => "coded-sweep",
            Command::Bursty => "bursty",
            Command::Robustness => "robustness",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub records: Vec<(String, Vec<BerRecord>)>,
    pub metadata: PathBuf,
}

pub const SNR_CONVENTION: &str = "Es/N0 per complex channel symbol with Es = 1";

fn links(cfg: &ExperimentConfig, base: &Path) -> Result<Vec<(String, Box<dyn Link>)>> {
    if cfg.system.is_empty() {
        return Err(Error::InvalidArgument("config lists no systems".into()));
    }
    cfg.system.iter().map(|s| Ok((s.name().to_string(), s.build(base)?))).collect()
}

fn finish(cfg: &ExperimentConfig, mut records: Vec<BerRecord>) -> Vec<BerRecord> {
    if !cfg.record_seconds {
        records.iter_mut().for_each(|r| r.seconds = 0.0);
    }
    records
}

/// Runs `cfg` and writes CSVs plus a metadata file from which the run can be repeated.
///
/// Relative paths inside the config resolve against `base`.
pub fn run_experiment(cfg: &ExperimentConfig, command: Command, base: &Path, out: &Path) -> Result<RunOutput> {
    let channel = cfg.channel_spec()?;
    let systems = links(cfg, base)?;
    for (_, l) in &systems {
        l.check(&channel)?;
    }
    let mut output = RunOutput::default();
    let mut run = toml::Table::new();
    let mut timings = toml::Table::new();

    match command {
        Command::Sweep | Command::Bursty | Command::CodedSweep => {
            let ch = match command {
                Command::Bursty => {
                    let b = cfg
                        .bursty
                        .as_ref()
                        .ok_or_else(|| Error::InvalidArgument("bursty run needs a [bursty] table".into()))?;
                    channel.with_noise(NoiseModel {
                        kind: NoiseKind::Bursty {
                            burst_probability: b.p,
                            burst_sigma_multiplier: b.rho,
                        },
                        snr_db: channel.noise.snr_db,
                    })
                }
                _ => channel.clone(),
            };
            let code = match (command, &cfg.ldpc) {
                (Command::CodedSweep, Some(l)) => Some((l.load(base)?, l.clone())),
                (Command::CodedSweep, None) => {
                    return Err(Error::InvalidArgument("coded sweep needs an [ldpc] table".into()))
                }
                _ => None,
            };
            for (name, link) in &systems {
                let recs = match &code {
                    Some((code, l)) => {
                        let coded = CodedLink::new(link.as_ref(), code, l.max_iters, l.interleaver_seed);
                        ldpc_pipeline(&coded, &ch, &cfg.snr_db, &cfg.stopping, cfg.seed)?
                    }
                    None => ber_sweep(link.as_ref(), &ch, &cfg.snr_db, &cfg.stopping, cfg.seed)?,
                };
                timings.insert(name.clone(), recs.iter().map(|r| r.seconds).collect::<Vec<f64>>().into());
                let recs = finish(cfg, recs);
                output
                    .files
                    .push(write_file(out, &format!("{}_{name}.csv", cfg.name), &ber_csv(&recs))?);
                output.records.push((name.clone(), recs));
            }
            run.insert("common_random_numbers".into(), crn(&systems, &ch).into());
        }
        Command::Robustness => {
            let r = cfg.robustness.clone().unwrap_or(crate::config::RobustnessConfig {
                perturb_std: 0.05,
                n_trials: 100,
                frames_per_point: 4,
            });
            let learned = systems
                .iter()
                .zip(&cfg.system)
                .find(|(_, s)| matches!(s, SystemConfig::Learned { .. }))
                .ok_or_else(|| Error::InvalidArgument("robustness needs a learned system".into()))?;
            let qam = cfg
                .system
                .iter()
                .find(|s| matches!(s, SystemConfig::Qam { .. }))
                .ok_or_else(|| Error::InvalidArgument("robustness needs a QAM system".into()))?
                .build_qam()?;
            let taps = channel
                .taps()
                .ok_or_else(|| Error::DomainMismatch("robustness study needs a time-domain channel".into()))?;
            let rows = robustness_eval(
                learned.0 .1.as_ref(),
                &qam,
                taps,
                channel.noise,
                r.perturb_std,
                r.n_trials,
                &cfg.snr_db,
                r.frames_per_point,
                cfg.seed,
            )?;
            let mut csv = String::from(
                "snr_db,system,mean_ber,std_ber,nominal_ber,mean_degradation,std_degradation\n",
            );
            for row in &rows {
                for (name, s, nominal, d) in [
                    (learned.0 .0.as_str(), row.learned, row.learned_nominal, row.learned_degradation),
                    (cfg.system.iter().find(|s| matches!(s, SystemConfig::Qam { .. })).map(|s| s.name()).unwrap_or("qam"), row.baseline, row.baseline_nominal, row.baseline_degradation),
                ] {
                    csv.push_str(&format!("{},{name},{},{},{nominal},{},{}\n", row.snr_db, s.mean, s.std, d.mean, d.std));
                }
            }
            output.files.push(write_file(out, &format!("{}_robustness.csv", cfg.name), &csv)?);
        }
    }

    run.insert("command".into(), command.as_str().into());
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("snr_convention".into(), SNR_CONVENTION.into());
    if !timings.is_empty() {
        run.insert("seconds".into(), timings.into());
    }
    let mut meta = cfg.with_absolute_paths(base)?;
    meta.run = Some(run);
    output.metadata = write_file(out, &format!("{}.meta.toml", cfg.name), &meta.to_toml_string()?)?;
    Ok(output)
}

fn crn(systems: &[(String, Box<dyn Link>)], channel: &ChannelSpec) -> bool {
    systems
        .windows(2)
        .all(|w| common_random_numbers(w[0].1.as_ref(), w[1].1.as_ref(), channel))
}

/// Reads the command recorded in a metadata file.
pub fn recorded_command(cfg: &ExperimentConfig) -> Option<Command> {
    let c = cfg.run.as_ref()?.get("command")?.as_str()?;
    [Command::Sweep, Command::CodedSweep, Command::Bursty, Command::Robustness]
        .into_iter()
        .find(|k| k.as_str() == c)
}
