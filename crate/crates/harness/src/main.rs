use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use convphy::autoenc::{build_model, extract_constellation, train, Checkpoint};
use convphy::channel::ChannelTaps;
use convphy::{Error, Result};
use convphy_harness::config::{ExperimentConfig, TrainRunConfig};
use convphy_harness::export::{constellation_csv, parse_ber_csv, parse_constellation_csv, write_file};
use convphy_harness::plot::{ber_svg, constellation_svg};
use convphy_harness::run::{recorded_command, run_experiment, Command};
use convphy_harness::studies::timing_bench;

#[derive(Parser)]
#[command(name = "convphy", version, about = "Learned and classical physical-layer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment or training config (TOML). A metadata file from an earlier run also works.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train an autoencoder and write a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        /// Checkpoint path (default: <out>/model.ckpt).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Uncoded BER sweep for every configured system.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// LDPC-coded info-bit BER sweep.
    CodedSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Tap-perturbation robustness study.
    Robustness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// BER under bursty noise.
    Bursty {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Receiver runtime scaling.
    Bench {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 12)]
        min_log2: u32,
        #[arg(long, default_value_t = 18)]
        max_log2: u32,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Export transmitter constellation points.
    Constellation {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 40_000)]
        symbols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Render CSV results as SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    BerCurves,
    Constellation,
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn experiment(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    println!("seed {}", cfg.seed);
    Ok(cfg)
}

fn run_and_report(cfg: &ExperimentConfig, command: Command, common: &Common) -> Result<()> {
    if let Some(recorded) = recorded_command(cfg) {
        if recorded != command {
            eprintln!("note: metadata was produced by `{}`", recorded.as_str());
        }
    }
    let out = run_experiment(cfg, command, &base_dir(&common.config), &common.out)?;
    for (name, recs) in &out.records {
        for r in recs {
            println!("{name} snr {} dB: {} errors / {} bits, BER {:.3e}", r.snr_db, r.errors, r.bits, r.ber);
        }
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    println!("wrote {}", out.metadata.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Train { common, checkpoint } => {
            let mut cfg = TrainRunConfig::load(&common.config)?;
            if let Some(s) = common.seed {
                cfg.train.seed = s;
            }
            println!("seed {}", cfg.train.seed);
            let channel = cfg.channel.clone().into_spec()?;
            let graph = build_model(&cfg.arch, cfg.train.seed)?;
            std::fs::create_dir_all(&common.out)?;
            let mut log = String::from("epoch,train_loss,val_loss,wall_seconds\n");
            let outcome = train(graph, &cfg.arch, &channel, &cfg.train, &mut |r, secs| {
                let line = format!("{},{},{},{:.3}", r.epoch, r.train_loss, r.val_loss, secs);
                println!("{line}");
                log.push_str(&line);
                log.push('\n');
            })?;
            let path = checkpoint.unwrap_or_else(|| common.out.join("model.ckpt"));
            outcome.checkpoint.save(&path)?;
            write_file(&common.out, "train_log.csv", &log)?;
            write_file(&common.out, "train.meta.toml", &cfg.to_toml_string()?)?;
            println!("best epoch {}; wrote {}", outcome.best_epoch, path.display());
        }
        Cmd::Sweep { common } => run_and_report(&experiment(&common)?, Command::Sweep, &common)?,
        Cmd::CodedSweep { common } => run_and_report(&experiment(&common)?, Command::CodedSweep, &common)?,
        Cmd::Robustness { common, trials } => {
            let mut cfg = experiment(&common)?;
            if let Some(t) = trials {
                let mut r = cfg.robustness.clone().unwrap_or(convphy_harness::config::RobustnessConfig {
                    perturb_std: 0.05,
                    n_trials: t,
                    frames_per_point: 4,
                });
                r.n_trials = t;
                cfg.robustness = Some(r);
            }
            run_and_report(&cfg, Command::Robustness, &common)?
        }
        Cmd::Bursty { common, p, rho } => {
            let mut cfg = experiment(&common)?;
            let mut b = cfg.bursty.clone().unwrap_or(convphy_harness::config::BurstyConfig { p: 0.05, rho: 5.0 });
            b.p = p.unwrap_or(b.p);
            b.rho = rho.unwrap_or(b.rho);
            cfg.bursty = Some(b);
            run_and_report(&cfg, Command::Bursty, &common)?
        }
        Cmd::Bench {
            checkpoint,
            min_log2,
            max_log2,
            repeats,
            seed,
            out,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let taps = ckpt.channel.taps().cloned().unwrap_or_else(ChannelTaps::channel_a);
            let lengths: Vec<usize> = (min_log2..=max_log2).map(|e| 1usize << e).collect();
            let rep = timing_bench(&ckpt, &taps, &lengths, repeats, seed)?;
            let mut csv = String::from("n,learned_seconds,mmse_seconds\n");
            for (i, n) in rep.lengths.iter().enumerate() {
                csv.push_str(&format!("{n},{},{}\n", rep.learned_seconds[i], rep.mmse_seconds[i]));
            }
            print!("{csv}");
            println!(
                "learned slope {:.3} ± {:.3}; mmse slope {:.3} ± {:.3}",
                rep.learned_slope, rep.learned_slope_se, rep.mmse_slope, rep.mmse_slope_se
            );
            println!("wrote {}", write_file(&out, "timing.csv", &csv)?.display());
        }
        Cmd::Constellation {
            checkpoint,
            symbols,
            seed,
            out,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let c = extract_constellation(&ckpt, symbols, &mut ChaCha8Rng::seed_from_u64(seed))?;
            println!("mean power {:.9}; radial histogram {:?}", c.mean_power, c.radial_histogram);
            println!("wrote {}", write_file(&out, "constellation.csv", &constellation_csv(&c.points))?.display());
        }
        Cmd::Plot { kind, input, output } => {
            let svg = match kind {
                PlotKind::BerCurves => {
                    let series = input
                        .iter()
                        .map(|p| {
                            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                            let recs = parse_ber_csv(&std::fs::read_to_string(p)?)?;
                            if recs.is_empty() {
                                return Err(Error::InvalidArgument(format!("{} has no records", p.display())));
                            }
                            Ok((name, recs))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    ber_svg(&series)?
                }
                PlotKind::Constellation => {
                    let mut pts = Vec::new();
                    for p in &input {
                        pts.extend(parse_constellation_csv(&std::fs::read_to_string(p)?)?);
                    }
                    constellation_svg(&pts)?
                }
            };
            if let Some(dir) = output.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(&output, svg)?;
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
