//! Slot-level simulation of the success rule behind the throughput analysis:
//! a device succeeds iff its preamble is not shared and, for the CDMA data
//! phase, the slot is not overloaded (`Q <= N`).

use super::parallel::{fold_trials, stream, trial_rng};
use super::stats::Tally;
use crate::access::{admit_under_fading, assign_preambles, assign_with_pairs, collision_stats, draw_num_active, SlotOutcome};
use crate::config::{Activity, SystemConfig};
use crate::error::{Error, Result};
use rand::Rng;

/// Attempts allowed when drawing a slot with a forced collision pattern.
pub const MAX_COMPOSITION_ATTEMPTS: usize = 1_000_000;

/// Per-slot counts of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotResult {
    pub k: usize,
    pub u: usize,
    pub w: usize,
    pub q: usize,
    pub success_td: usize,
    pub success_cd: usize,
}

/// Draws the active devices and their preambles for one slot.
pub fn draw_slot<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<SlotOutcome> {
    let drawn = match cfg.activity {
        Activity::Poisson(lambda) => draw_num_active(lambda, rng)?,
        Activity::Fixed(k) => k,
    };
    if let Some(pairs) = cfg.collided_pairs {
        return assign_with_pairs(drawn, cfg.l, pairs, MAX_COMPOSITION_ATTEMPTS, rng);
    }
    let k = match cfg.p_max {
        Some(p_max) => admit_under_fading(drawn, 1.0, p_max, rng),
        None => drawn,
    };
    Ok(collision_stats(&assign_preambles(k, cfg.l, rng), cfg.l))
}

/// Simulates slot `trial` and checks its structural invariants.
pub fn simulate_slot(cfg: &SystemConfig, trial: u64) -> Result<SlotResult> {
    let mut rng = trial_rng(cfg.seed, stream::SLOTS, trial);
    let outcome = draw_slot(cfg, &mut rng)?;
    outcome
        .check_invariants()
        .map_err(|what| Error::InvariantViolation { slot: trial, what })?;
    let q = outcome.q();
    let success_td = outcome.u;
    let success_cd = if q <= cfg.n { outcome.u } else { 0 };
    Ok(SlotResult { k: outcome.k(), u: outcome.u, w: outcome.w, q, success_td, success_cd })
}

/// Monte Carlo throughput (devices per slot) and spectral efficiency
/// (delivered symbols per slot symbol) of both data-phase designs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThroughputEstimate {
    pub kappa_td: Tally,
    pub kappa_cd: Tally,
    pub eta_td: Tally,
    pub eta_cd: Tally,
    pub active: Tally,
    pub overloaded_slots: u64,
}

impl ThroughputEstimate {
    fn merge(&mut self, o: ThroughputEstimate) {
        self.kappa_td.merge(o.kappa_td);
        self.kappa_cd.merge(o.kappa_cd);
        self.eta_td.merge(o.eta_td);
        self.eta_cd.merge(o.eta_cd);
        self.active.merge(o.active);
        self.overloaded_slots += o.overloaded_slots;
    }

    /// Ratio of the mean spectral efficiencies, `NaN` when TDMA delivered nothing.
    pub fn phi(&self) -> f64 {
        let td = self.eta_td.mean();
        if td > 0.0 {
            self.eta_cd.mean() / td
        } else {
            f64::NAN
        }
    }
}

pub fn run_abstract(cfg: &SystemConfig, workers: usize) -> Result<ThroughputEstimate> {
    cfg.validate()?;
    let slot_len = cfg.slot_length();
    let td_symbols = cfg.d as f64;
    let cd_symbols = cfg.d_bar();
    fold_trials(
        cfg.trials,
        workers,
        ThroughputEstimate::default,
        |acc, trial| {
            let s = simulate_slot(cfg, trial)?;
            if s.success_cd > s.u || s.success_td > s.u {
                return Err(Error::InvariantViolation { slot: trial, what: "more successes than singletons".into() });
            }
            acc.kappa_td.push(s.success_td as f64);
            acc.kappa_cd.push(s.success_cd as f64);
            acc.eta_td.push(s.success_td as f64 * td_symbols / slot_len);
            acc.eta_cd.push(s.success_cd as f64 * cd_symbols / slot_len);
            acc.active.push(s.k as f64);
            if s.q > cfg.n {
                acc.overloaded_slots += 1;
            }
            Ok(())
        },
        ThroughputEstimate::merge,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::kappa_td;

    fn cfg(n: usize, lambda: f64, trials: u64) -> SystemConfig {
        SystemConfig { l: 20, n, activity: Activity::Poisson(lambda), trials, ..Default::default() }
    }

    #[test]
    fn tdma_throughput_matches_closed_form() {
        let est = run_abstract(&cfg(10, 10.0, 200_000), 0).unwrap();
        let oracle = kappa_td(10.0, 20);
        assert!((est.kappa_td.mean() - oracle).abs() < 4.0 * est.kappa_td.stderr());
        assert!((est.active.mean() - 10.0).abs() < 4.0 * est.active.stderr());
    }

    #[test]
    fn full_spreading_is_tdma_slot_by_slot() {
        let c = cfg(20, 10.0, 5000);
        for t in 0..c.trials {
            let s = simulate_slot(&c, t).unwrap();
            assert_eq!(s.success_cd, s.success_td);
        }
    }

    #[test]
    fn no_activity_means_no_throughput() {
        let est = run_abstract(&cfg(10, 0.0, 1000), 0).unwrap();
        assert_eq!(est.kappa_td.mean(), 0.0);
        assert_eq!(est.kappa_cd.mean(), 0.0);
        assert!(est.phi().is_nan());
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_abstract(&cfg(10, 10.0, 0), 0).is_err());
    }

    #[test]
    fn forced_pairs_fix_the_composition() {
        let c = SystemConfig { l: 20, n: 11, activity: Activity::Fixed(10), collided_pairs: Some(2), trials: 200, ..Default::default() };
        for t in 0..c.trials {
            let s = simulate_slot(&c, t).unwrap();
            assert_eq!((s.u, s.w, s.q), (6, 2, 8));
        }
    }

    #[test]
    fn fading_truncation_thins_activity() {
        let mut c = cfg(10, 10.0, 20_000);
        c.p_max = Some(1.0);
        let est = run_abstract(&c, 0).unwrap();
        // admitted iff |h|² >= 1, probability e^{-1}
        let expected = 10.0 * (-1.0f64).exp();
        assert!((est.active.mean() - expected).abs() < 4.0 * est.active.stderr());
    }
}
