//! Waveform-level simulation of the data phase: QPSK packets spread with
//! Alltop sequences, multiuser detection, and bounded-distance decoding.

use super::abstract_sim::draw_slot;
use super::parallel::{fold_trials, stream, trial_rng};
use super::stats::RatioTally;
use crate::access::draw_phases;
use crate::config::{Detector, SystemConfig};
use crate::detection::{correlate, detect_noncoherent, preamble_signal};
use crate::error::{Error, Result};
use crate::phy::{build_received, mmse_detect, mmse_lr_detect_masked, packet_success, qpsk_modulate, DataFrame, EffectiveCodebook, BCH_255_191_8};
use crate::sequences::{gen_alltop_family, gen_preambles, select_spreading};
use rand::Rng;

/// How the BS learns the set of transmitted preambles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PreambleKnowledge {
    /// The true active set.
    #[default]
    Ideal,
    /// Energy detection at the preamble SNR with threshold `τ/N₀`.
    Noncoherent { tau_over_n0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhyOptions {
    pub preambles: PreambleKnowledge,
}

/// Error rates per device class. Clean devices are alone on their preamble,
/// collided devices share it.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhyEstimate {
    pub ber_clean: RatioTally,
    pub ber_collided: RatioTally,
    pub per_clean: RatioTally,
    pub per_collided: RatioTally,
    pub slots: u64,
    /// Slots with more believed-active preambles than the spreading factor.
    pub overloaded_slots: u64,
    /// Slots where lattice reduction failed and plain MMSE was used.
    pub fallbacks: u64,
    /// Devices whose preamble the BS missed.
    pub missed_devices: u64,
}

impl PhyEstimate {
    fn merge(&mut self, o: PhyEstimate) {
        self.ber_clean.merge(o.ber_clean);
        self.ber_collided.merge(o.ber_collided);
        self.per_clean.merge(o.per_clean);
        self.per_collided.merge(o.per_collided);
        self.slots += o.slots;
        self.overloaded_slots += o.overloaded_slots;
        self.fallbacks += o.fallbacks;
        self.missed_devices += o.missed_devices;
    }
}

#[derive(Default)]
struct ClassCounts {
    bit_errors: f64,
    bits: f64,
    failures: f64,
    packets: f64,
}

pub fn run_phy(cfg: &SystemConfig, options: PhyOptions, workers: usize) -> Result<PhyEstimate> {
    cfg.validate()?;
    let family = gen_alltop_family(cfg.n)?;
    let preambles = gen_preambles(cfg.l)?;
    let code = BCH_255_191_8;
    let bits_per_packet = 2 * code.symbols_per_packet();
    let n0 = cfg.noise_from_ebn0();
    let n0_preamble = cfg.noise_from_snr();

    fold_trials(
        cfg.trials,
        workers,
        PhyEstimate::default,
        |acc, trial| {
            acc.slots += 1;
            let mut rng = trial_rng(cfg.seed, stream::PHY, trial);
            let outcome = draw_slot(cfg, &mut rng)?;
            outcome
                .check_invariants()
                .map_err(|what| Error::InvariantViolation { slot: trial, what })?;
            let k = outcome.k();
            if k == 0 {
                return Ok(());
            }
            let spreading = select_spreading(&family, cfg.l, &mut rng)?;
            let device_phases = draw_phases(k, 1.0, &mut rng);
            let residual: Vec<f64> = device_phases
                .iter()
                .map(|p| if cfg.phase_compensation { 0.0 } else { p.theta })
                .collect();
            let bits: Vec<Vec<u8>> = (0..k)
                .map(|_| (0..bits_per_packet).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            let symbols = bits.iter().map(|b| qpsk_modulate(b, 1.0)).collect::<Result<Vec<_>>>()?;
            let frames = DataFrame::new(&outcome, symbols)?;

            let columns = match options.preambles {
                PreambleKnowledge::Ideal => outcome.active_set.clone(),
                PreambleKnowledge::Noncoherent { tau_over_n0 } => {
                    let y = preamble_signal(&outcome, &device_phases, &preambles, cfg.phase_compensation, n0_preamble, &mut rng)?;
                    let z = correlate(&y, &preambles, 1.0, n0_preamble)?;
                    detect_noncoherent(&z, tau_over_n0 * n0_preamble)?.detected
                }
            };

            let mut clean = ClassCounts::default();
            let mut collided = ClassCounts::default();
            let overloaded = columns.len() > cfg.n;
            if overloaded {
                acc.overloaded_slots += 1;
            }
            let output = if overloaded || columns.is_empty() {
                None
            } else {
                let r = build_received(&outcome, &frames, &spreading, &residual, n0, &mut rng)?;
                let cbar = EffectiveCodebook::for_columns(columns.clone(), &outcome, &spreading, &residual)?;
                let out = match cfg.detector {
                    Detector::Mmse => mmse_detect(&r, &cbar.matrix, 1.0, n0),
                    Detector::MmseLr => mmse_lr_detect_masked(&r, &cbar.matrix, &cbar.single_device_columns(), 1.0, n0),
                };
                if out.fell_back {
                    acc.fallbacks += 1;
                }
                Some(out)
            };

            for (dev, &l) in outcome.assignment.iter().enumerate() {
                let class = if outcome.collided[dev] { &mut collided } else { &mut clean };
                class.packets += 1.0;
                let q = columns.binary_search(&l);
                let (Some(out), Ok(q)) = (&output, q) else {
                    if !overloaded && q.is_err() {
                        acc.missed_devices += 1;
                    }
                    class.failures += 1.0;
                    continue;
                };
                let decided = out.bits(q);
                let errors = decided[..code.n].iter().zip(&bits[dev][..code.n]).filter(|(a, b)| a != b).count();
                class.bit_errors += errors as f64;
                class.bits += code.n as f64;
                if !packet_success(errors, &code) {
                    class.failures += 1.0;
                }
            }
            acc.ber_clean.push(clean.bit_errors, clean.bits);
            acc.ber_collided.push(collided.bit_errors, collided.bits);
            acc.per_clean.push(clean.failures, clean.packets);
            acc.per_collided.push(collided.failures, collided.packets);
            Ok(())
        },
        PhyEstimate::merge,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Activity, Mode};

    fn phy(k: usize, pairs: Option<usize>, ebn0_db: f64, trials: u64) -> SystemConfig {
        SystemConfig {
            l: 20,
            n: 11,
            activity: Activity::Fixed(k),
            collided_pairs: pairs,
            ebn0_db,
            trials,
            mode: Mode::Phy,
            ..Default::default()
        }
    }

    #[test]
    fn single_user_at_high_snr_is_error_free() {
        let est = run_phy(&phy(1, None, 20.0, 200), PhyOptions::default(), 0).unwrap();
        assert_eq!(est.ber_clean.num, 0.0);
        assert_eq!(est.ber_clean.den, 200.0 * 255.0);
        assert_eq!(est.per_clean.num, 0.0);
        assert_eq!(est.ber_collided.den, 0.0);
    }

    #[test]
    fn overloaded_slots_fail_every_packet() {
        // K = 13 with one pair gives Q = 12 > N = 11
        let est = run_phy(&phy(13, Some(1), 20.0, 50), PhyOptions::default(), 0).unwrap();
        assert_eq!(est.overloaded_slots, 50);
        assert_eq!(est.per_clean.ratio(), 1.0);
        assert_eq!(est.per_collided.ratio(), 1.0);
        assert_eq!(est.ber_clean.den, 0.0);
    }

    #[test]
    fn non_prime_spreading_factor_rejected() {
        let mut c = phy(3, None, 10.0, 10);
        c.n = 10;
        assert!(matches!(run_phy(&c, PhyOptions::default(), 0), Err(Error::NotPrime(10))));
    }

    #[test]
    fn result_independent_of_workers() {
        let c = phy(6, Some(1), 8.0, 300);
        let a = run_phy(&c, PhyOptions::default(), 1).unwrap();
        let b = run_phy(&c, PhyOptions::default(), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reliable_energy_detection_matches_ideal_knowledge() {
        let c = SystemConfig { snr_db: 20.0, phase_compensation: true, ..phy(5, None, 10.0, 200) };
        let ideal = run_phy(&c, PhyOptions::default(), 0).unwrap();
        let detected = run_phy(&c, PhyOptions { preambles: PreambleKnowledge::Noncoherent { tau_over_n0: 10.0 } }, 0).unwrap();
        assert_eq!(detected.missed_devices, 0);
        assert!((detected.ber_clean.ratio() - ideal.ber_clean.ratio()).abs() < 5.0 * ideal.ber_clean.stderr().max(1e-4));
    }
}
