//! Linear multiuser detection of `r(t) = √P_rx C̄ x(t) + n₂(t)`.

use super::lattice::{clll_reduce, round_gaussian};
use super::qpsk::{qpsk_demodulate, quantize};
use super::CMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

#[derive(Debug, Clone, PartialEq)]
pub struct MudOutput {
    /// `Q × T` unbiased-scale estimates of the unit-energy symbols.
    pub soft: CMatrix,
    /// `Q × T` decisions on the unit-energy QPSK alphabet.
    pub hard: CMatrix,
    /// Set when lattice reduction failed and plain MMSE was used instead.
    pub fell_back: bool,
}

impl MudOutput {
    /// Hard bits of row `q` (one transmitted preamble).
    pub fn bits(&self, q: usize) -> Vec<u8> {
        let row: Vec<Complex64> = self.hard.row(q).iter().copied().collect();
        qpsk_demodulate(&row)
    }
}

/// Solves `(AᴴA + ridge·I) X = Aᴴ Y`.
fn regularized_solve(a: &CMatrix, y: &CMatrix, ridge: f64) -> CMatrix {
    let q = a.ncols();
    let gram = a.adjoint() * a + CMatrix::identity(q, q) * Complex64::new(ridge, 0.0);
    let rhs = a.adjoint() * y;
    if let Some(chol) = gram.clone().cholesky() {
        return chol.solve(&rhs);
    }
    // singular only without noise and with more columns than rows
    let pinv = gram.pseudo_inverse(1e-12).expect("pseudo-inverse of a finite matrix");
    pinv * rhs
}

/// `x̂(t) = quantize((C̄ᴴC̄ + (N₀/P_rx) I)⁻¹ C̄ᴴ r(t) / √P_rx)`.
pub fn mmse_detect(r: &CMatrix, cbar: &CMatrix, p_rx: f64, n0: f64) -> MudOutput {
    let scaled = r / Complex64::new(p_rx.sqrt(), 0.0);
    let soft = regularized_solve(cbar, &scaled, n0 / p_rx);
    let hard = soft.map(quantize);
    MudOutput { soft, hard, fell_back: false }
}

/// MMSE detection in a lattice-reduced basis.
///
/// The regularization is folded into the extended channel
/// `[C̄; σI]`, `σ² = N₀/P_rx`, whose columns are reduced with complex LLL.
/// QPSK symbols are shifted and scaled onto the Gaussian integers
/// (`x = √2 u - (1+j)/√2`, `u ∈ {0,1}+j{0,1}`), quantized to integers in the
/// reduced domain, mapped back through `T` and clipped to the alphabet.
/// Per symbol vector, the plain MMSE decision replaces the lattice one when
/// it leaves a smaller residual `‖r(t)/√P_rx - C̄ x̂(t)‖²`.
pub fn mmse_lr_detect(r: &CMatrix, cbar: &CMatrix, p_rx: f64, n0: f64) -> MudOutput {
    mmse_lr_detect_masked(r, cbar, &vec![true; cbar.ncols()], p_rx, n0)
}

/// [`mmse_lr_detect`] where only the columns flagged in `on_lattice` carry
/// QPSK symbols. The others (preambles shared by several devices, whose
/// superposed symbols are not lattice points) are projected out of the
/// extended system before the reduction and get plain MMSE estimates.
pub fn mmse_lr_detect_masked(r: &CMatrix, cbar: &CMatrix, on_lattice: &[bool], p_rx: f64, n0: f64) -> MudOutput {
    let (n, q) = cbar.shape();
    assert_eq!(on_lattice.len(), q, "one lattice flag per column");
    let t_len = r.ncols();
    let sigma = (n0 / p_rx).sqrt();
    let lattice: Vec<usize> = (0..q).filter(|&i| on_lattice[i]).collect();
    let mmse = mmse_detect(r, cbar, p_rx, n0);
    if lattice.is_empty() {
        return mmse;
    }

    let mut ext = CMatrix::zeros(n + q, q);
    ext.view_mut((0, 0), (n, q)).copy_from(cbar);
    for i in 0..q {
        ext[(n + i, i)] = Complex64::new(sigma, 0.0);
    }
    let inv_sqrt_p = 1.0 / p_rx.sqrt();
    let mut y = CMatrix::from_fn(n + q, t_len, |i, t| if i < n { r[(i, t)] * inv_sqrt_p } else { Complex64::new(0.0, 0.0) });
    let mut basis = ext.select_columns(&lattice);

    let off: Vec<usize> = (0..q).filter(|&i| !on_lattice[i]).collect();
    if !off.is_empty() {
        let e_off = ext.select_columns(&off);
        let project = |m: &CMatrix| m - &e_off * regularized_solve(&e_off, m, 0.0);
        y = project(&y);
        basis = project(&basis);
    }

    let red = match clll_reduce(&basis) {
        Ok(red) => red,
        Err(_) => return MudOutput { fell_back: true, ..mmse },
    };

    let offset = Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    let column_sum: Vec<Complex64> = basis.row_iter().map(|row| row.sum() * offset).collect();
    let shifted = CMatrix::from_fn(n + q, t_len, |i, t| (y[(i, t)] + column_sum[i]) / SQRT_2);

    let z = regularized_solve(&red.basis, &shifted, 0.0);
    let u_soft = &red.transform * &z;
    let u_hard = &red.transform * z.map(round_gaussian);

    let mut soft = mmse.soft.clone();
    let mut hard = mmse.hard.clone();
    for (row, &col) in lattice.iter().enumerate() {
        for t in 0..t_len {
            soft[(col, t)] = u_soft[(row, t)] * SQRT_2 - offset;
            let u = u_hard[(row, t)];
            let re = u.re.round().clamp(0.0, 1.0);
            let im = u.im.round().clamp(0.0, 1.0);
            hard[(col, t)] = Complex64::new(re, im) * SQRT_2 - offset;
        }
    }

    // keep, per symbol vector, whichever candidate explains r(t) better
    let mut candidate = mmse.hard.clone();
    let mut reduced = hard.clone();
    for &col in &off {
        for t in 0..t_len {
            candidate[(col, t)] = mmse.soft[(col, t)];
            reduced[(col, t)] = mmse.soft[(col, t)];
        }
    }
    let scaled = r * Complex64::new(inv_sqrt_p, 0.0);
    let miss_lr = residuals(&scaled, cbar, &reduced);
    let miss_mmse = residuals(&scaled, cbar, &candidate);
    for t in 0..t_len {
        if miss_mmse[t] < miss_lr[t] {
            for &col in &lattice {
                hard[(col, t)] = mmse.hard[(col, t)];
            }
        }
    }
    MudOutput { soft, hard, fell_back: false }
}

fn residuals(y: &CMatrix, c: &CMatrix, x: &CMatrix) -> Vec<f64> {
    (y - c * x).column_iter().map(|col| col.norm_squared()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::qpsk::qpsk_modulate;
    use crate::sequences::{gen_preambles, VectorSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormal_codebook(n: usize, q: usize) -> CMatrix {
        let p = gen_preambles(n).unwrap();
        CMatrix::from_fn(n, q, |i, j| p.vectors()[j][i])
    }

    fn random_symbols(q: usize, t: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let bits: Vec<u8> = (0..2 * q * t).map(|_| rng.random_range(0..2)).collect();
        let s = qpsk_modulate(&bits, 1.0).unwrap();
        CMatrix::from_row_slice(q, t, &s)
    }

    #[test]
    fn orthonormal_noiseless_recovers_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = orthonormal_codebook(8, 5);
        let x = random_symbols(5, 40, &mut rng);
        let r = &c * &x * Complex64::new(2.0, 0.0);
        for out in [mmse_detect(&r, &c, 4.0, 1e-12), mmse_lr_detect(&r, &c, 4.0, 1e-12)] {
            assert!((&out.hard - &x).norm() < 1e-9);
            assert!(!out.fell_back);
        }
    }

    #[test]
    fn lr_matches_mmse_for_orthogonal_codes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = orthonormal_codebook(11, 6);
        let x = random_symbols(6, 200, &mut rng);
        let noise = CMatrix::from_fn(11, 200, |_, _| crate::detection::cscg(0.5, &mut rng));
        let r = &c * &x + noise;
        let a = mmse_detect(&r, &c, 1.0, 0.5);
        let b = mmse_lr_detect(&r, &c, 1.0, 0.5);
        assert_eq!(a.hard, b.hard);
        assert!((&a.soft - &b.soft).norm() < 1e-9);
    }

    #[test]
    fn masked_columns_do_not_disturb_lattice_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = CMatrix::from_fn(11, 6, |_, _| crate::detection::cscg(1.0 / 11.0, &mut rng));
        let mut x = random_symbols(6, 300, &mut rng);
        // column 5 carries an off-lattice superposition of two rotated symbols
        let extra = random_symbols(1, 300, &mut rng);
        for t in 0..300 {
            x[(5, t)] = x[(5, t)] * Complex64::from_polar(1.0, 0.3) + extra[(0, t)] * Complex64::from_polar(1.0, 2.1);
        }
        let r = &c * &x;
        let mask = [true, true, true, true, true, false];
        let out = mmse_lr_detect_masked(&r, &c, &mask, 1.0, 1e-6);
        for q in 0..5 {
            for t in 0..300 {
                assert!((out.hard[(q, t)] - x[(q, t)]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn overloaded_system_still_returns_estimates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = CMatrix::from_fn(4, 6, |_, _| crate::detection::cscg(0.25, &mut rng));
        let r = CMatrix::from_fn(4, 10, |_, _| crate::detection::cscg(1.0, &mut rng));
        let out = mmse_detect(&r, &c, 1.0, 0.1);
        assert_eq!(out.hard.shape(), (6, 10));
        let out = mmse_lr_detect(&r, &c, 1.0, 0.1);
        assert_eq!(out.hard.shape(), (6, 10));
    }
}
