//! Missed-detection and false-alarm curves of the correlator-bank tests.
//!
//! Each trial places one device on a random preamble, so every trial gives
//! one sample under H₁ and `L - 1` independent samples under H₀.

use super::curves::{CurveSet, Series};
use super::parallel::{fold_trials, stream, trial_rng};
use super::stats::binomial_stderr;
use crate::access::{collision_stats, draw_phases};
use crate::config::db_to_linear;
use crate::detection::{analytic_coherent_md_fa, analytic_noncoherent_md_fa, correlate, preamble_signal};
use crate::error::{invalid, Result};
use crate::sequences::gen_preambles;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionTest {
    /// `Re(z) >= τ` with phase compensation; τ given in units of `√P_rx`.
    Coherent,
    /// `|z|² >= τ`; τ given in units of `N₀`.
    Noncoherent,
}

impl DetectionTest {
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            DetectionTest::Coherent => (1..=19).map(|i| i as f64 * 0.05).collect(),
            DetectionTest::Noncoherent => (1..=20).map(f64::from).collect(),
        }
    }

    fn analytic(self, snr: f64, tau: f64) -> (f64, f64) {
        match self {
            DetectionTest::Coherent => analytic_coherent_md_fa(snr, tau),
            DetectionTest::Noncoherent => analytic_noncoherent_md_fa(snr, tau),
        }
    }
}

#[derive(Default)]
struct Counts {
    missed: Vec<u64>,
    false_alarms: Vec<u64>,
}

/// Analytic and Monte Carlo `(P_MD, P_FA)` over the threshold grid `taus`.
pub fn run_detection_curve(
    test: DetectionTest,
    l: usize,
    snr_db: f64,
    taus: &[f64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<CurveSet> {
    if taus.is_empty() {
        return Err(invalid("tau", "threshold grid is empty"));
    }
    if let Some(&bad) = taus.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(invalid("tau", format!("thresholds must be positive, got {bad}")));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    if l < 2 {
        return Err(invalid("L", "need at least two preambles for false alarms"));
    }
    let preambles = gen_preambles(l)?;
    let snr = db_to_linear(snr_db);
    let (p_rx, n0): (f64, f64) = (1.0, 1.0 / snr);
    let compensate = test == DetectionTest::Coherent;
    let thresholds: Vec<f64> = taus
        .iter()
        .map(|&t| match test {
            DetectionTest::Coherent => t * p_rx.sqrt(),
            DetectionTest::Noncoherent => t * n0,
        })
        .collect();

    let counts = fold_trials(
        trials,
        workers,
        || Counts { missed: vec![0; taus.len()], false_alarms: vec![0; taus.len()] },
        |acc, trial| {
            let mut rng = trial_rng(seed, stream::DETECTION, trial);
            let outcome = collision_stats(&[rng.random_range(1..=l)], l);
            let phases = draw_phases(1, p_rx, &mut rng);
            let y = preamble_signal(&outcome, &phases, &preambles, compensate, n0, &mut rng)?;
            let z = correlate(&y, &preambles, p_rx, n0)?;
            let active = outcome.assignment[0] - 1;
            for (i, &tau) in thresholds.iter().enumerate() {
                for (j, v) in z.z.iter().enumerate() {
                    let stat = match test {
                        DetectionTest::Coherent => v.re,
                        DetectionTest::Noncoherent => v.norm_sqr(),
                    };
                    let declared = stat >= tau;
                    if j == active && !declared {
                        acc.missed[i] += 1;
                    } else if j != active && declared {
                        acc.false_alarms[i] += 1;
                    }
                }
            }
            Ok(())
        },
        |a, b| {
            for (x, y) in a.missed.iter_mut().zip(b.missed) {
                *x += y;
            }
            for (x, y) in a.false_alarms.iter_mut().zip(b.false_alarms) {
                *x += y;
            }
        },
    )?;

    let h1 = trials as f64;
    let h0 = trials as f64 * (l - 1) as f64;
    let (md_a, fa_a): (Vec<f64>, Vec<f64>) = taus.iter().map(|&t| test.analytic(snr, t)).unzip();
    let md: Vec<f64> = counts.missed.iter().map(|&c| c as f64 / h1).collect();
    let fa: Vec<f64> = counts.false_alarms.iter().map(|&c| c as f64 / h0).collect();
    let md_se = md.iter().map(|&p| binomial_stderr(p, h1)).collect();
    let fa_se = fa.iter().map(|&p| binomial_stderr(p, h0)).collect();

    let id = match test {
        DetectionTest::Coherent => "detect-coherent",
        DetectionTest::Noncoherent => "detect-noncoherent",
    };
    let mut curves = CurveSet::new(id, "tau", taus.to_vec());
    curves
        .push(Series::analytic("p_md_analytic", md_a))
        .push(Series::analytic("p_fa_analytic", fa_a))
        .push(Series::monte_carlo("p_md_mc", md, Some(("stderr_md", md_se))))
        .push(Series::monte_carlo("p_fa_mc", fa, Some(("stderr_fa", fa_se))));
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_midpoint_is_symmetric() {
        let c = run_detection_curve(DetectionTest::Coherent, 20, 10.0, &[0.5], 20_000, 3, 0).unwrap();
        let (md, fa) = (c.values("p_md_analytic")[0], c.values("p_fa_analytic")[0]);
        assert_eq!(md, fa);
        let mc = c.values("p_md_mc")[0];
        assert!((mc - md).abs() < 4.0 * c.stderr("stderr_md").unwrap()[0]);
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(run_detection_curve(DetectionTest::Noncoherent, 20, 10.0, &[], 10, 1, 0).is_err());
        assert!(run_detection_curve(DetectionTest::Noncoherent, 20, 10.0, &[1.0, -2.0], 10, 1, 0).is_err());
        assert!(run_detection_curve(DetectionTest::Noncoherent, 20, 10.0, &[0.0], 10, 1, 0).is_err());
    }

    #[test]
    fn single_threshold_gives_one_row() {
        let c = run_detection_curve(DetectionTest::Noncoherent, 8, 10.0, &[3.0], 100, 1, 0).unwrap();
        assert_eq!(c.to_csv_string().unwrap().lines().count(), 2);
    }
}
