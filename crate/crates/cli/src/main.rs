use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use grantfree::config::ConfigOverrides;
use grantfree::harness::detect_sim::{run_detection_curve, DetectionTest};
use grantfree::harness::phy_sim::{PhyOptions, PreambleKnowledge};
use grantfree::harness::scenarios::{ber_point, run_scenario, throughput_point, Preset};
use grantfree::harness::{CurveSet, RunManifest};
use grantfree::{Detector, Mode, Rounding, SystemConfig};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Simulator for 2-step grant-free random access with TDMA or CDMA data phases.
#[derive(Parser, Debug)]
#[command(name = "grantfree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Missed-detection and false-alarm curves of the preamble detector.
    Detect {
        #[arg(long, value_enum, default_value_t = TestArg::Noncoherent)]
        test: TestArg,
        /// Threshold grid, comma-separated: τ/N₀ for noncoherent, τ/√P_rx for coherent.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        tau: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Uncoded BER and packet error rate of one PHY configuration.
    Ber {
        /// Detect preambles by energy with this τ/N₀ instead of assuming the active set is known.
        #[arg(long)]
        preamble_tau: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Throughput and spectral efficiency of one configuration.
    Throughput {
        #[command(flatten)]
        common: Common,
    },
    /// All curves of a figure preset.
    Figure {
        #[command(flatten)]
        common: Common,
    },
    /// Reruns the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Scenario preset whose parameters act as defaults.
    #[arg(long)]
    preset: Option<String>,
    /// Config file (flat TOML); flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "D")]
    d: Option<usize>,
    /// Mean number of active devices per slot.
    #[arg(long, conflicts_with = "k")]
    lambda: Option<f64>,
    /// Fixed number of active devices per slot.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long)]
    ebn0_db: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    rounding: Option<RoundingArg>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TestArg {
    Coherent,
    Noncoherent,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DetectorArg {
    Mmse,
    MmseLr,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Abstract,
    Phy,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RoundingArg {
    Round,
    Floor,
    Continuous,
}

impl Common {
    fn flags(&self) -> ConfigOverrides {
        ConfigOverrides {
            l: self.l,
            n: self.n,
            d: self.d,
            lambda: self.lambda,
            k: self.k,
            snr_db: self.snr_db,
            ebn0_db: self.ebn0_db,
            trials: self.trials,
            seed: self.seed,
            detector: self.detector.map(|d| match d {
                DetectorArg::Mmse => Detector::Mmse,
                DetectorArg::MmseLr => Detector::MmseLr,
            }),
            mode: self.mode.map(|m| match m {
                ModeArg::Abstract => Mode::Abstract,
                ModeArg::Phy => Mode::Phy,
            }),
            rounding: self.rounding.map(|r| match r {
                RoundingArg::Round => Rounding::Round,
                RoundingArg::Floor => Rounding::Floor,
                RoundingArg::Continuous => Rounding::Continuous,
            }),
            ..Default::default()
        }
    }

    fn preset(&self) -> Result<Option<Preset>> {
        self.preset.as_deref().map(|p| p.parse::<Preset>().map_err(Into::into)).transpose()
    }

    /// Flags over the config file.
    fn overrides(&self) -> Result<ConfigOverrides> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ConfigOverrides::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ConfigOverrides::default(),
        };
        Ok(self.flags().over(&file))
    }

    /// Flags over file over preset (or `fallback`) defaults.
    fn resolve(&self, fallback: Preset) -> Result<SystemConfig> {
        let preset = self.preset()?.unwrap_or(fallback);
        let cfg = self.overrides()?.over(&preset.defaults()).apply(&SystemConfig::default())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Detect { test, tau, common } => {
            let cfg = common.resolve(Preset::Fig3Detect)?;
            detect(&cfg, test_of(test), tau, common.workers, &common.out)
        }
        Command::Ber { preamble_tau, common } => {
            let cfg = common.resolve(Preset::Fig4Ber)?;
            ber(cfg, preamble_tau, common.workers, &common.out)
        }
        Command::Throughput { common } => {
            let cfg = common.resolve(Preset::Fig8SweepLambda)?;
            throughput(&cfg, common.workers, &common.out)
        }
        Command::Figure { common } => {
            let Some(preset) = common.preset()? else { bail!("figure requires --preset (one of: {})", preset_list()) };
            let cfg = preset.config(&common.overrides()?)?;
            figure(preset, &cfg, common.workers, &common.out)
        }
        Command::Replay { manifest, out } => replay(&manifest, &out),
    }
}

fn test_of(t: TestArg) -> DetectionTest {
    match t {
        TestArg::Coherent => DetectionTest::Coherent,
        TestArg::Noncoherent => DetectionTest::Noncoherent,
    }
}

fn preset_list() -> String {
    Preset::ALL.iter().map(|p| p.id()).collect::<Vec<_>>().join(", ")
}

fn detect(cfg: &SystemConfig, test: DetectionTest, tau: Option<Vec<f64>>, workers: usize, out: &Path) -> Result<()> {
    let start = Instant::now();
    let grid = tau.unwrap_or_else(|| test.default_grid());
    let curve = run_detection_curve(test, cfg.l, cfg.snr_db, &grid, cfg.trials, cfg.seed, workers)?;
    let mut manifest = RunManifest::new("detect", None, cfg, workers);
    manifest.extra.insert("test".into(), json!(test));
    manifest.extra.insert("tau".into(), json!(grid));
    finish(manifest, &[curve], curve_name(test), out, start)
}

fn curve_name(test: DetectionTest) -> &'static str {
    match test {
        DetectionTest::Coherent => "detect-coherent",
        DetectionTest::Noncoherent => "detect-noncoherent",
    }
}

fn ber(mut cfg: SystemConfig, preamble_tau: Option<f64>, workers: usize, out: &Path) -> Result<()> {
    let start = Instant::now();
    if cfg.mode == Mode::Abstract {
        bail!("ber simulates the waveform and needs mode = phy");
    }
    cfg.mode = Mode::Phy;
    let options = PhyOptions {
        preambles: match preamble_tau {
            Some(tau_over_n0) => PreambleKnowledge::Noncoherent { tau_over_n0 },
            None => PreambleKnowledge::Ideal,
        },
    };
    let curve = ber_point(&cfg, options, workers)?;
    let mut manifest = RunManifest::new("ber", None, &cfg, workers);
    if let Some(t) = preamble_tau {
        manifest.extra.insert("preamble_tau".into(), json!(t));
    }
    finish(manifest, &[curve], "ber", out, start)
}

fn throughput(cfg: &SystemConfig, workers: usize, out: &Path) -> Result<()> {
    let start = Instant::now();
    if cfg.mode == Mode::Phy {
        bail!("throughput uses the slot-level model and needs mode = abstract");
    }
    let curves = throughput_point(cfg, workers)?;
    finish(RunManifest::new("throughput", None, cfg, workers), &curves, "throughput", out, start)
}

fn figure(preset: Preset, cfg: &SystemConfig, workers: usize, out: &Path) -> Result<()> {
    let start = Instant::now();
    let curves = run_scenario(preset, cfg, workers)?;
    finish(RunManifest::new("figure", Some(preset.id()), cfg, workers), &curves, preset.id(), out, start)
}

fn replay(path: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = RunManifest::from_json(&text)?;
    let cfg = m.system_config()?;
    match m.command.as_str() {
        "detect" => {
            let test: DetectionTest = serde_json::from_value(m.extra.get("test").cloned().context("manifest lacks `test`")?)?;
            let tau: Vec<f64> = serde_json::from_value(m.extra.get("tau").cloned().context("manifest lacks `tau`")?)?;
            detect(&cfg, test, Some(tau), m.workers, out)
        }
        "ber" => {
            let tau = m.extra.get("preamble_tau").and_then(|v| v.as_f64());
            ber(cfg, tau, m.workers, out)
        }
        "throughput" => throughput(&cfg, m.workers, out),
        "figure" => {
            let preset: Preset = m.preset.as_deref().context("manifest lacks `preset`")?.parse()?;
            figure(preset, &cfg, m.workers, out)
        }
        other => bail!("unknown command `{other}` in manifest"),
    }
}

fn finish(mut manifest: RunManifest, curves: &[CurveSet], name: &str, out: &Path, start: Instant) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for curve in curves {
        let path = out.join(format!("{}.csv", curve.id));
        fs::write(&path, curve.to_csv_string()?).with_context(|| format!("writing {}", path.display()))?;
        manifest.outputs.push(path.display().to_string());
        println!("wrote {}", path.display());
    }
    manifest.wall_clock_secs = start.elapsed().as_secs_f64();
    let path = out.join(format!("{name}.manifest.json"));
    fs::write(&path, manifest.to_json()).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}
