//! Presets reproducing each figure's sweep: analytic curves next to Monte
//! Carlo estimates over the same grid.

use super::abstract_sim::{run_abstract, ThroughputEstimate};
use super::curves::{CurveSet, Series};
use super::detect_sim::{run_detection_curve, DetectionTest};
use super::phy_sim::{run_phy, PhyEstimate, PhyOptions};
use crate::analytics::{self, AnalyticPoint};
use crate::config::{Activity, ConfigOverrides, Mode, SystemConfig};
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig3Detect,
    Fig4Ber,
    Fig5BerPer,
    Fig6SweepN,
    Fig7SweepNLarge,
    Fig8SweepLambda,
    Fig9SweepL,
    Fig10SweepD,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig3Detect,
        Preset::Fig4Ber,
        Preset::Fig5BerPer,
        Preset::Fig6SweepN,
        Preset::Fig7SweepNLarge,
        Preset::Fig8SweepLambda,
        Preset::Fig9SweepL,
        Preset::Fig10SweepD,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::Fig3Detect => "fig3-detect",
            Preset::Fig4Ber => "fig4-ber",
            Preset::Fig5BerPer => "fig5-ber-per",
            Preset::Fig6SweepN => "fig6-sweepN",
            Preset::Fig7SweepNLarge => "fig7-sweepN-large",
            Preset::Fig8SweepLambda => "fig8-sweep-lambda",
            Preset::Fig9SweepL => "fig9-sweepL",
            Preset::Fig10SweepD => "fig10-sweepD",
        }
    }

    /// The preset's fixed parameters; config files and flags layer over them.
    pub fn defaults(self) -> ConfigOverrides {
        let base = ConfigOverrides { trials: Some(100_000), ..Default::default() };
        match self {
            Preset::Fig3Detect => ConfigOverrides { l: Some(20), snr_db: Some(10.0), ..base },
            Preset::Fig4Ber => ConfigOverrides {
                l: Some(20),
                n: Some(11),
                k: Some(10),
                mode: Some(Mode::Phy),
                trials: Some(10_000),
                ..base
            },
            Preset::Fig5BerPer => ConfigOverrides {
                l: Some(20),
                n: Some(11),
                k: Some(10),
                collided_pairs: Some(1),
                ebn0_db: Some(20.0),
                mode: Some(Mode::Phy),
                trials: Some(10_000),
                ..base
            },
            Preset::Fig6SweepN => ConfigOverrides { l: Some(20), lambda: Some(10.0), d: Some(200), ..base },
            Preset::Fig7SweepNLarge => ConfigOverrides { l: Some(100), lambda: Some(50.0), d: Some(2000), ..base },
            Preset::Fig8SweepLambda => ConfigOverrides { l: Some(20), n: Some(10), d: Some(200), ..base },
            Preset::Fig9SweepL => ConfigOverrides { n: Some(20), lambda: Some(15.0), l: Some(100), ..base },
            Preset::Fig10SweepD => ConfigOverrides { l: Some(20), n: Some(10), lambda: Some(10.0), ..base },
        }
    }

    /// Resolves `overrides` (flags over file, already merged) on the preset.
    pub fn config(self, overrides: &ConfigOverrides) -> Result<SystemConfig> {
        let mut cfg = overrides.over(&self.defaults()).apply(&SystemConfig::default())?;
        // sweep presets span grids wider than a single config
        match self {
            Preset::Fig6SweepN | Preset::Fig7SweepNLarge => cfg.n = cfg.l,
            Preset::Fig9SweepL => cfg.l = cfg.l.max(cfg.n),
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

pub const EBN0_GRID_DB: [f64; 11] = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
pub const FIG10_D_GRID: [usize; 12] = [10, 20, 50, 100, 150, 200, 300, 400, 500, 600, 800, 1000];

/// Runs a preset; `cfg` comes from [`Preset::config`].
pub fn run_scenario(preset: Preset, cfg: &SystemConfig, workers: usize) -> Result<Vec<CurveSet>> {
    match preset {
        Preset::Fig3Detect => [DetectionTest::Noncoherent, DetectionTest::Coherent]
            .into_iter()
            .map(|test| {
                let mut c = run_detection_curve(test, cfg.l, cfg.snr_db, &test.default_grid(), cfg.trials, cfg.seed, workers)?;
                c.id = format!("{}-{}", preset.id(), c.id.trim_start_matches("detect-"));
                Ok(c)
            })
            .collect(),
        Preset::Fig4Ber => [(2usize, 8usize), (1, 9)]
            .into_iter()
            .map(|(pairs, q)| {
                let points = EBN0_GRID_DB
                    .iter()
                    .map(|&ebn0_db| {
                        let c = SystemConfig { ebn0_db, collided_pairs: Some(pairs), mode: Mode::Phy, ..cfg.clone() };
                        run_phy(&c, PhyOptions::default(), workers)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(phy_curves(&format!("{}-q{q}", preset.id()), "ebn0_db", EBN0_GRID_DB.to_vec(), &points, cfg.trials))
            })
            .collect(),
        Preset::Fig5BerPer => {
            let ks: Vec<usize> = (3..=14).collect();
            let pairs = cfg.collided_pairs.unwrap_or(1);
            let points = ks
                .iter()
                .map(|&k| {
                    let c = SystemConfig { activity: Activity::Fixed(k), collided_pairs: Some(pairs), mode: Mode::Phy, ..cfg.clone() };
                    run_phy(&c, PhyOptions::default(), workers)
                })
                .collect::<Result<Vec<_>>>()?;
            let x = ks.iter().map(|&k| k as f64).collect();
            Ok(vec![phy_curves(preset.id(), "K", x, &points, cfg.trials)])
        }
        Preset::Fig6SweepN => sweep(preset, "N", cfg, (1..=cfg.l).collect(), |c, n| c.n = n, workers),
        Preset::Fig7SweepNLarge => sweep(preset, "N", cfg, (5..=cfg.l).step_by(5).collect(), |c, n| c.n = n, workers),
        Preset::Fig8SweepLambda => {
            sweep(preset, "lambda", cfg, (1..=20).collect(), |c, x| c.activity = Activity::Poisson(x as f64), workers)
        }
        Preset::Fig9SweepL => {
            let grid = (20..=cfg.l.max(20)).step_by(10).filter(|&l| l >= cfg.n).collect();
            sweep(
                preset,
                "L",
                cfg,
                grid,
                |c, l| {
                    c.l = l;
                    c.d = 10 * l;
                },
                workers,
            )
        }
        Preset::Fig10SweepD => sweep(preset, "D", cfg, FIG10_D_GRID.to_vec(), |c, d| c.d = d, workers),
    }
}

/// Throughput and spectral-efficiency curves at a single configuration.
pub fn throughput_point(cfg: &SystemConfig, workers: usize) -> Result<Vec<CurveSet>> {
    let x = match cfg.activity {
        Activity::Poisson(lambda) => lambda,
        Activity::Fixed(k) => k as f64,
    };
    let est = run_abstract(cfg, workers)?;
    Ok(throughput_curves("throughput", "lambda", vec![x], std::slice::from_ref(cfg), &[est]))
}

/// BER/PER curves at a single configuration.
pub fn ber_point(cfg: &SystemConfig, options: PhyOptions, workers: usize) -> Result<CurveSet> {
    let est = run_phy(cfg, options, workers)?;
    Ok(phy_curves("ber", "ebn0_db", vec![cfg.ebn0_db], &[est], cfg.trials))
}

fn sweep(
    preset: Preset,
    x_name: &str,
    cfg: &SystemConfig,
    grid: Vec<usize>,
    set: impl Fn(&mut SystemConfig, usize),
    workers: usize,
) -> Result<Vec<CurveSet>> {
    let configs: Vec<SystemConfig> = grid
        .iter()
        .map(|&v| {
            let mut c = SystemConfig { mode: Mode::Abstract, ..cfg.clone() };
            set(&mut c, v);
            c
        })
        .collect();
    let estimates = configs.iter().map(|c| run_abstract(c, workers)).collect::<Result<Vec<_>>>()?;
    let x = grid.iter().map(|&v| v as f64).collect();
    Ok(throughput_curves(preset.id(), x_name, x, &configs, &estimates))
}

/// Analytic quantities at `cfg`. A fixed device count uses the conditional
/// singleton mean and the overload probability in place of the Poisson
/// averages.
pub fn analytic_point(cfg: &SystemConfig) -> AnalyticPoint {
    match cfg.activity {
        Activity::Poisson(lambda) => AnalyticPoint::new(lambda, cfg.l, cfg.n, cfg.d, cfg.rounding),
        Activity::Fixed(k) => {
            let kappa_td = analytics::kappa_td_cond(k, cfg.l);
            let kappa_cd = kappa_td * (1.0 - analytics::overload_probability(k, cfg.l, cfg.n));
            let slot = cfg.slot_length();
            let eta_td = kappa_td * cfg.d as f64 / slot;
            let eta_cd = kappa_cd * cfg.d_bar() / slot;
            AnalyticPoint { kappa_td, kappa_cd, eta_td, eta_cd, phi: eta_cd / eta_td }
        }
    }
}

fn throughput_curves(id: &str, x_name: &str, x: Vec<f64>, configs: &[SystemConfig], est: &[ThroughputEstimate]) -> Vec<CurveSet> {
    let analytic: Vec<AnalyticPoint> = configs.iter().map(analytic_point).collect();
    let col = |f: fn(&AnalyticPoint) -> f64| analytic.iter().map(f).collect::<Vec<_>>();
    let mc = |f: fn(&ThroughputEstimate) -> f64| est.iter().map(f).collect::<Vec<_>>();

    let mut kappa = CurveSet::new(&format!("{id}-throughput"), x_name, x.clone());
    kappa
        .push(Series::analytic("kappa_td", col(|a| a.kappa_td)))
        .push(Series::analytic("kappa_cd", col(|a| a.kappa_cd)))
        .push(Series::monte_carlo("kappa_td_mc", mc(|e| e.kappa_td.mean()), Some(("stderr_kappa_td", mc(|e| e.kappa_td.stderr())))))
        .push(Series::monte_carlo("kappa_cd_mc", mc(|e| e.kappa_cd.mean()), Some(("stderr_kappa_cd", mc(|e| e.kappa_cd.stderr())))));

    let mut eta = CurveSet::new(&format!("{id}-spectral-efficiency"), x_name, x);
    eta.push(Series::analytic("eta_td", col(|a| a.eta_td)))
        .push(Series::analytic("eta_cd", col(|a| a.eta_cd)))
        .push(Series::analytic("phi", col(|a| a.phi)))
        .push(Series::monte_carlo("eta_td_mc", mc(|e| e.eta_td.mean()), Some(("stderr_eta_td", mc(|e| e.eta_td.stderr())))))
        .push(Series::monte_carlo("eta_cd_mc", mc(|e| e.eta_cd.mean()), Some(("stderr_eta_cd", mc(|e| e.eta_cd.stderr())))))
        .push(Series::monte_carlo("phi_mc", mc(ThroughputEstimate::phi), None));
    vec![kappa, eta]
}

fn phy_curves(id: &str, x_name: &str, x: Vec<f64>, est: &[PhyEstimate], trials: u64) -> CurveSet {
    let mc = |f: fn(&PhyEstimate) -> f64| est.iter().map(f).collect::<Vec<_>>();
    let mut c = CurveSet::new(id, x_name, x);
    c.push(Series::monte_carlo("ber_uncoded_clean", mc(|e| e.ber_clean.ratio()), Some(("stderr_ber_clean", mc(|e| e.ber_clean.stderr())))))
        .push(Series::monte_carlo(
            "ber_uncoded_collided",
            mc(|e| e.ber_collided.ratio()),
            Some(("stderr_ber_collided", mc(|e| e.ber_collided.stderr()))),
        ))
        .push(Series::monte_carlo("per_clean", mc(|e| e.per_clean.ratio()), Some(("stderr_per_clean", mc(|e| e.per_clean.stderr())))))
        .push(Series::monte_carlo("per_collided", mc(|e| e.per_collided.ratio()), Some(("stderr_per_collided", mc(|e| e.per_collided.stderr())))))
        .push(Series::monte_carlo("trials", vec![trials as f64; est.len()], None))
        .push(Series::monte_carlo("overloaded_slots", mc(|e| e.overloaded_slots as f64), None));
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_ids_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.id().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("fig11".parse::<Preset>(), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn flags_override_preset_defaults() {
        let flags = ConfigOverrides { lambda: Some(5.0), trials: Some(10), ..Default::default() };
        let cfg = Preset::Fig8SweepLambda.config(&flags).unwrap();
        assert_eq!((cfg.l, cfg.n, cfg.d, cfg.trials), (20, 10, 200, 10));
        assert_eq!(cfg.activity, Activity::Poisson(5.0));
    }

    #[test]
    fn fig6_grid_and_columns() {
        let flags = ConfigOverrides { trials: Some(2000), ..Default::default() };
        let cfg = Preset::Fig6SweepN.config(&flags).unwrap();
        let curves = run_scenario(Preset::Fig6SweepN, &cfg, 0).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].x.len(), 20);
        let header = curves[0].to_csv_string().unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, "N,kappa_td,kappa_cd,kappa_td_mc,kappa_cd_mc,stderr_kappa_td,stderr_kappa_cd");
        // identical slots at every N, so TDMA estimates coincide across the sweep
        let td = curves[0].values("kappa_td_mc");
        assert!(td.iter().all(|&v| v == td[0]));
    }

    #[test]
    fn fixed_count_analytics() {
        let cfg = SystemConfig { activity: Activity::Fixed(10), n: 20, ..Default::default() };
        let a = analytic_point(&cfg);
        assert!((a.kappa_td - a.kappa_cd).abs() < 1e-12);
    }
}
