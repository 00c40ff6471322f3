//! Device activity, preamble choice, collisions and power control in one slot.
//!
//! Preamble indices are 1-based throughout.

use crate::error::{invalid, Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::Serialize;
use std::f64::consts::TAU;

/// Number of active devices in a slot, `K ~ Poisson(λ)`.
pub fn draw_num_active<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<usize> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be finite and nonnegative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lambda).map_err(|e| invalid("lambda", e.to_string()))?;
    let k: f64 = dist.sample(rng);
    Ok(k as usize)
}

/// Each of `k` devices picks one of `l` preambles uniformly at random.
pub fn assign_preambles<R: Rng + ?Sized>(k: usize, l: usize, rng: &mut R) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(1..=l)).collect()
}

/// Collision statistics of one slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotOutcome {
    pub l: usize,
    /// Preamble chosen by each active device.
    pub assignment: Vec<usize>,
    /// Transmitted preambles in ascending order.
    pub active_set: Vec<usize>,
    /// Devices on each preamble, indexed by `l - 1`.
    pub occupancy: Vec<usize>,
    /// Singleton preambles.
    pub u: usize,
    /// Preambles chosen by two or more devices.
    pub w: usize,
    /// Per device: shares its preamble with another device.
    pub collided: Vec<bool>,
    /// Per device: packet decoded. Filled in by the simulation harness.
    pub decodable: Vec<bool>,
}

impl SlotOutcome {
    pub fn k(&self) -> usize {
        self.assignment.len()
    }

    /// Number of distinct transmitted preambles, `Q = U + W`.
    pub fn q(&self) -> usize {
        self.u + self.w
    }

    pub fn num_collided_devices(&self) -> usize {
        self.collided.iter().filter(|&&c| c).count()
    }

    /// Checks `Q = U + W`, `U + 2W <= K` and `Q <= min(L, K)`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let (k, q) = (self.k(), self.q());
        if q != self.active_set.len() {
            return Err(format!("Q = {q} but |A| = {}", self.active_set.len()));
        }
        if self.u + 2 * self.w > k {
            return Err(format!("U + 2W = {} exceeds K = {k}", self.u + 2 * self.w));
        }
        if q > self.l.min(k) {
            return Err(format!("Q = {q} exceeds min(L, K) = {}", self.l.min(k)));
        }
        Ok(())
    }
}

pub fn collision_stats(assignment: &[usize], l: usize) -> SlotOutcome {
    let mut occupancy = vec![0usize; l];
    for &p in assignment {
        occupancy[p - 1] += 1;
    }
    let mut u = 0;
    let mut w = 0;
    let mut active_set = Vec::new();
    for (idx, &c) in occupancy.iter().enumerate() {
        match c {
            0 => {}
            1 => {
                u += 1;
                active_set.push(idx + 1);
            }
            _ => {
                w += 1;
                active_set.push(idx + 1);
            }
        }
    }
    let collided: Vec<bool> = assignment.iter().map(|&p| occupancy[p - 1] >= 2).collect();
    SlotOutcome {
        l,
        assignment: assignment.to_vec(),
        active_set,
        occupancy,
        u,
        w,
        decodable: vec![false; collided.len()],
        collided,
    }
}

/// Draws assignments until exactly `pairs` preambles carry two devices each
/// and every other device is alone on its preamble.
pub fn assign_with_pairs<R: Rng + ?Sized>(
    k: usize,
    l: usize,
    pairs: usize,
    max_attempts: usize,
    rng: &mut R,
) -> Result<SlotOutcome> {
    if 2 * pairs > k || k - pairs > l {
        return Err(invalid("collided_pairs", format!("{pairs} pairs impossible with K = {k}, L = {l}")));
    }
    for _ in 0..max_attempts {
        let outcome = collision_stats(&assign_preambles(k, l, rng), l);
        if outcome.w == pairs && outcome.num_collided_devices() == 2 * pairs {
            return Ok(outcome);
        }
    }
    Err(Error::CompositionUnreachable(max_attempts))
}

/// Phase of a device's channel and its receive amplitude after power control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePhase {
    pub theta: f64,
    pub amplitude: f64,
}

/// Ideal power control: every device arrives at `√P_rx` with a uniform phase.
pub fn draw_phases<R: Rng + ?Sized>(k: usize, p_rx: f64, rng: &mut R) -> Vec<DevicePhase> {
    let amplitude = p_rx.sqrt();
    (0..k).map(|_| DevicePhase { theta: rng.random::<f64>() * TAU, amplitude }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerControl {
    Admitted { power: f64 },
    Suppressed,
}

/// Channel inversion `P_k = P_rx / |h_k|²`, suppressed above `P_max`.
pub fn apply_power_control(channel_gain: f64, p_rx: f64, p_max: f64) -> PowerControl {
    if channel_gain <= 0.0 {
        return PowerControl::Suppressed;
    }
    let power = p_rx / channel_gain;
    if power > p_max {
        PowerControl::Suppressed
    } else {
        PowerControl::Admitted { power }
    }
}

/// Rayleigh fading (`|h|² ~ Exp(1)`) with truncated channel inversion;
/// returns how many of `k` devices are allowed to transmit.
pub fn admit_under_fading<R: Rng + ?Sized>(k: usize, p_rx: f64, p_max: f64, rng: &mut R) -> usize {
    (0..k)
        .filter(|_| {
            let gain: f64 = Exp1.sample(rng);
            matches!(apply_power_control(gain, p_rx, p_max), PowerControl::Admitted { .. })
        })
        .count()
}
