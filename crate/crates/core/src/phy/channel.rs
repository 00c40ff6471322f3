//! Spread data-phase signal at the base station.

use super::CMatrix;
use crate::access::SlotOutcome;
use crate::detection::cscg;
use crate::error::{Error, Result};
use crate::sequences::{SpreadingSet, VectorSet};
use num_complex::Complex64;
use rand::Rng;

/// Data symbols of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFrame {
    /// Per device, its symbol stream including the `√P_rx` amplitude.
    pub device_symbols: Vec<Vec<Complex64>>,
    /// `Q × T` superposition per transmitted preamble.
    pub x: CMatrix,
    /// Preamble carried by each row of `x`.
    pub columns: Vec<usize>,
}

impl DataFrame {
    pub fn new(outcome: &SlotOutcome, device_symbols: Vec<Vec<Complex64>>) -> Result<Self> {
        if device_symbols.len() != outcome.k() {
            return Err(Error::DimensionMismatch { expected: outcome.k(), actual: device_symbols.len() });
        }
        let t_len = device_symbols.first().map_or(0, Vec::len);
        if let Some(bad) = device_symbols.iter().find(|s| s.len() != t_len) {
            return Err(Error::DimensionMismatch { expected: t_len, actual: bad.len() });
        }
        let columns = outcome.active_set.clone();
        let mut x = CMatrix::zeros(columns.len(), t_len);
        for (k, &l) in outcome.assignment.iter().enumerate() {
            let q = columns.binary_search(&l).expect("assigned preamble is in the active set");
            for (t, s) in device_symbols[k].iter().enumerate() {
                x[(q, t)] += s;
            }
        }
        Ok(Self { device_symbols, x, columns })
    }

    pub fn num_symbols(&self) -> usize {
        self.x.ncols()
    }
}

/// `C̄`, the spreading sequences of the transmitted preambles with the
/// channel phase each one is observed with.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCodebook {
    pub matrix: CMatrix,
    pub columns: Vec<usize>,
    /// Channel seen on each column's preamble: the sum of its devices'
    /// phasors. Unit magnitude iff exactly one device uses the preamble.
    pub gains: Vec<Complex64>,
}

impl EffectiveCodebook {
    /// `phases[k]` is the residual phase of device `k` (zero under phase
    /// compensation). A collided preamble is observed through the phase of
    /// the sum of its devices' phasors.
    pub fn new(outcome: &SlotOutcome, spreading: &SpreadingSet, phases: &[f64]) -> Result<Self> {
        Self::for_columns(outcome.active_set.clone(), outcome, spreading, phases)
    }

    /// Codebook over the preambles the BS believes active, which may differ
    /// from the true active set after imperfect preamble detection. Columns
    /// without any transmitting device keep phase zero.
    pub fn for_columns(
        columns: Vec<usize>,
        outcome: &SlotOutcome,
        spreading: &SpreadingSet,
        phases: &[f64],
    ) -> Result<Self> {
        if phases.len() != outcome.k() {
            return Err(Error::DimensionMismatch { expected: outcome.k(), actual: phases.len() });
        }
        let mut phasor = vec![Complex64::new(0.0, 0.0); columns.len()];
        for (&l, &theta) in outcome.assignment.iter().zip(phases) {
            if let Ok(q) = columns.binary_search(&l) {
                phasor[q] += Complex64::from_polar(1.0, theta);
            }
        }
        let n = spreading.dim();
        let mut matrix = CMatrix::zeros(n, columns.len());
        for (q, &l) in columns.iter().enumerate() {
            let mag = phasor[q].norm();
            let rot = if mag > 1e-12 { phasor[q] / mag } else { Complex64::new(1.0, 0.0) };
            for (i, c) in spreading.sequence(l).iter().enumerate() {
                matrix[(i, q)] = c * rot;
            }
        }
        Ok(Self { matrix, columns, gains: phasor })
    }

    /// Columns whose channel magnitude identifies a single device.
    pub fn single_device_columns(&self) -> Vec<bool> {
        self.gains.iter().map(|g| (g.norm() - 1.0).abs() < 1e-9).collect()
    }
}

/// `r(t) = Σ_k c_{l(k)} e^{jθ_k} s_k(t) + n₂(t)` for `t = 0..T`, returned as
/// an `N × T` matrix.
pub fn build_received<R: Rng + ?Sized>(
    outcome: &SlotOutcome,
    frames: &DataFrame,
    spreading: &SpreadingSet,
    phases: &[f64],
    n0: f64,
    rng: &mut R,
) -> Result<CMatrix> {
    let k = outcome.k();
    if frames.device_symbols.len() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: frames.device_symbols.len() });
    }
    if phases.len() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: phases.len() });
    }
    let n = spreading.dim();
    let t_len = frames.num_symbols();
    let mut r = CMatrix::from_fn(n, t_len, |_, _| if n0 > 0.0 { cscg(n0, rng) } else { Complex64::new(0.0, 0.0) });
    for (dev, (&l, &theta)) in outcome.assignment.iter().zip(phases).enumerate() {
        let rot = Complex64::from_polar(1.0, theta);
        let code: Vec<Complex64> = spreading.sequence(l).iter().map(|c| c * rot).collect();
        for (t, s) in frames.device_symbols[dev].iter().enumerate() {
            for (i, c) in code.iter().enumerate() {
                r[(i, t)] += c * s;
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::collision_stats;
    use crate::sequences::gen_preambles;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dft_spreading(n: usize) -> SpreadingSet {
        SpreadingSet::from_vectors(gen_preambles(n).unwrap().vectors().to_vec()).unwrap()
    }

    #[test]
    fn single_device_noiseless() {
        let sp = dft_spreading(4);
        let outcome = collision_stats(&[2], 4);
        let sym = vec![vec![Complex64::new(1.0, -1.0), Complex64::new(-0.5, 0.5)]];
        let frames = DataFrame::new(&outcome, sym.clone()).unwrap();
        let r = build_received(&outcome, &frames, &sp, &[0.0], 0.0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for t in 0..2 {
            for i in 0..4 {
                assert!((r[(i, t)] - sp.sequence(2)[i] * sym[0][t]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn collided_rows_superpose() {
        let outcome = collision_stats(&[3, 1, 3], 4);
        let one = Complex64::new(1.0, 0.0);
        let frames = DataFrame::new(&outcome, vec![vec![one], vec![-one], vec![one * 2.0]]).unwrap();
        assert_eq!(frames.columns, vec![1, 3]);
        assert_eq!(frames.x[(0, 0)], -one);
        assert_eq!(frames.x[(1, 0)], one * 3.0);
    }

    #[test]
    fn codebook_absorbs_singleton_phase() {
        let sp = dft_spreading(4);
        let outcome = collision_stats(&[4, 1], 4);
        let cb = EffectiveCodebook::new(&outcome, &sp, &[0.3, 1.2]).unwrap();
        // column 0 is preamble 1, observed with device 2's phase
        let rot = Complex64::from_polar(1.0, 1.2);
        assert!((cb.matrix[(2, 0)] - sp.sequence(1)[2] * rot).norm() < 1e-14);
        assert!(EffectiveCodebook::new(&outcome, &sp, &[0.3]).is_err());
    }
}
