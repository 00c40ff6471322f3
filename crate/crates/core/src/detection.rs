//! Correlator-bank preamble detection and its missed-detection / false-alarm
//! probabilities.
//!
//! Power is normalized so that `snr = P_rx / N₀`. The coherent threshold is
//! expressed relative to `√P_rx`, the noncoherent threshold relative to `N₀`.

use crate::access::{DevicePhase, SlotOutcome};
use crate::error::{invalid, Error, Result};
use crate::sequences::{inner, PreambleSet, VectorSet};
use crate::special::{marcum_q1_pair, qfunc};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorOutput {
    pub z: Vec<Complex64>,
    pub n0: f64,
    pub p_rx: f64,
}

/// Circularly-symmetric complex Gaussian sample with variance `n0`.
pub fn cscg<R: Rng + ?Sized>(n0: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * n0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Received preamble-phase signal `y = Σ_k p_{l(k)} √P_rx e^{jθ_k} + n₁`.
///
/// With phase compensation each device pre-rotates by `-θ_k`, so every
/// device contributes with phase zero.
pub fn preamble_signal<R: Rng + ?Sized>(
    outcome: &SlotOutcome,
    phases: &[DevicePhase],
    preambles: &PreambleSet,
    phase_compensation: bool,
    n0: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if phases.len() != outcome.k() {
        return Err(Error::DimensionMismatch { expected: outcome.k(), actual: phases.len() });
    }
    let dim = preambles.dim();
    let mut y: Vec<Complex64> = (0..dim).map(|_| cscg(n0, rng)).collect();
    for (&l, ph) in outcome.assignment.iter().zip(phases) {
        let gain = if phase_compensation {
            Complex64::new(ph.amplitude, 0.0)
        } else {
            Complex64::from_polar(ph.amplitude, ph.theta)
        };
        for (yi, pi) in y.iter_mut().zip(preambles.preamble(l)) {
            *yi += gain * pi;
        }
    }
    Ok(y)
}

/// Bank of `L` correlators, `z_l = p_lᴴ y`.
pub fn correlate(received: &[Complex64], preambles: &PreambleSet, p_rx: f64, n0: f64) -> Result<CorrelatorOutput> {
    if received.len() != preambles.dim() {
        return Err(Error::DimensionMismatch { expected: preambles.dim(), actual: received.len() });
    }
    let z = preambles.vectors().iter().map(|p| inner(p, received)).collect();
    Ok(CorrelatorOutput { z, n0, p_rx })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionReport {
    /// Detected preambles, ascending and 1-based.
    pub detected: Vec<usize>,
    pub decisions: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorTally {
    pub missed: usize,
    pub false_alarms: usize,
    /// `|A|`
    pub present: usize,
    /// `L - |A|`
    pub absent: usize,
}

impl DetectionReport {
    fn from_decisions(decisions: Vec<bool>) -> Self {
        let detected = decisions.iter().enumerate().filter(|(_, &d)| d).map(|(i, _)| i + 1).collect();
        Self { detected, decisions }
    }

    /// Compares the decisions with the true transmitted set `truth` (1-based).
    pub fn tally(&self, truth: &[usize]) -> ErrorTally {
        let mut present = vec![false; self.decisions.len()];
        for &l in truth {
            present[l - 1] = true;
        }
        let mut t = ErrorTally { present: truth.len(), absent: self.decisions.len() - truth.len(), ..Default::default() };
        for (&d, &p) in self.decisions.iter().zip(&present) {
            match (p, d) {
                (true, false) => t.missed += 1,
                (false, true) => t.false_alarms += 1,
                _ => {}
            }
        }
        t
    }
}

/// Declares preamble `l` present iff `Re(z_l) >= τ`.
pub fn detect_coherent(z: &CorrelatorOutput, tau: f64) -> Result<DetectionReport> {
    check_tau(tau)?;
    Ok(DetectionReport::from_decisions(z.z.iter().map(|v| v.re >= tau).collect()))
}

/// Declares preamble `l` present iff `|z_l|² >= τ`.
pub fn detect_noncoherent(z: &CorrelatorOutput, tau: f64) -> Result<DetectionReport> {
    check_tau(tau)?;
    Ok(DetectionReport::from_decisions(z.z.iter().map(|v| v.norm_sqr() >= tau).collect()))
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(invalid("tau", format!("decision threshold must be positive, got {tau}")))
    }
}

/// `(P_MD, P_FA)` of the coherent test for a singleton preamble, with the
/// threshold given as `τ / √P_rx`.
pub fn analytic_coherent_md_fa(snr: f64, tau_norm: f64) -> (f64, f64) {
    let scale = (2.0 * snr).sqrt();
    (qfunc(scale * (1.0 - tau_norm)), qfunc(scale * tau_norm))
}

/// `(P_MD, P_FA)` of the energy test for a singleton preamble, with the
/// threshold given as `τ / N₀`.
pub fn analytic_noncoherent_md_fa(snr: f64, tau_over_n0: f64) -> (f64, f64) {
    let p_fa = (-tau_over_n0).exp();
    let (_, p_md) = marcum_q1_pair((2.0 * snr).sqrt(), (2.0 * tau_over_n0).sqrt());
    (p_md, p_fa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::collision_stats;
    use crate::sequences::gen_preambles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn noiseless_singleton_correlates_to_unit_vector() {
        let p = gen_preambles(6).unwrap();
        let y: Vec<_> = p.preamble(3).iter().map(|v| v * 2.0).collect();
        let z = correlate(&y, &p, 4.0, 0.0).unwrap();
        for (i, v) in z.z.iter().enumerate() {
            let want = if i == 2 { 2.0 } else { 0.0 };
            assert!((v - c(want)).norm() < 1e-12);
        }
    }

    #[test]
    fn two_compensated_devices() {
        let p = gen_preambles(8).unwrap();
        let outcome = collision_stats(&[1, 4], 8);
        let phases = vec![DevicePhase { theta: 1.1, amplitude: 1.5 }, DevicePhase { theta: 4.0, amplitude: 1.5 }];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = preamble_signal(&outcome, &phases, &p, true, 0.0, &mut rng).unwrap();
        let z = correlate(&y, &p, 2.25, 0.0).unwrap();
        assert!((z.z[0] - c(1.5)).norm() < 1e-12);
        assert!((z.z[3] - c(1.5)).norm() < 1e-12);
        assert!(z.z[1].norm() < 1e-12);
    }

    #[test]
    fn correlate_rejects_bad_dimension() {
        let p = gen_preambles(4).unwrap();
        assert!(matches!(correlate(&[c(1.0); 3], &p, 1.0, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn threshold_decisions() {
        let z = CorrelatorOutput { z: vec![c(1.0), c(0.2), Complex64::new(0.0, 0.0)], n0: 0.1, p_rx: 1.0 };
        let r = detect_coherent(&z, 0.5).unwrap();
        assert_eq!(r.detected, vec![1]);
        assert_eq!(detect_noncoherent(&z, 0.9).unwrap().detected, vec![1]);
        assert!(detect_noncoherent(&z, 1e-9).unwrap().detected.len() == 2);
        assert!(detect_coherent(&z, 0.0).is_err());
        assert!(detect_noncoherent(&z, -1.0).is_err());
        let t = r.tally(&[1, 2]);
        assert_eq!((t.missed, t.false_alarms, t.present, t.absent), (1, 0, 2, 1));
    }

    #[test]
    fn coherent_midpoint_is_symmetric() {
        let (md, fa) = analytic_coherent_md_fa(10.0, 0.5);
        assert_eq!(md, fa);
        assert!((md - 0.0127).abs() < 1e-4);
        assert_eq!(analytic_coherent_md_fa(10.0, 0.0).1, 0.5);
        assert_eq!(analytic_coherent_md_fa(10.0, 1.0).0, 0.5);
    }

    #[test]
    fn noncoherent_limits() {
        let (md, fa) = analytic_noncoherent_md_fa(10.0, 1e-12);
        assert!(fa > 1.0 - 1e-11 && md < 1e-11);
        let (md, fa) = analytic_noncoherent_md_fa(1e-14, 2.0);
        assert!((md - (1.0 - fa)).abs() < 1e-10);
    }

    #[test]
    fn analytic_curves_are_monotone() {
        let mut prev = analytic_noncoherent_md_fa(10.0, 0.1);
        let mut prev_c = analytic_coherent_md_fa(10.0, 0.01);
        for i in 1..100 {
            let cur = analytic_noncoherent_md_fa(10.0, 0.1 + 0.2 * i as f64);
            assert!(cur.0 > prev.0 && cur.1 < prev.1);
            prev = cur;
            let cur_c = analytic_coherent_md_fa(10.0, 0.01 + 0.0098 * i as f64);
            assert!(cur_c.0 > prev_c.0 && cur_c.1 < prev_c.1);
            prev_c = cur_c;
        }
    }
}
