//! Complex LLL reduction over the Gaussian integers.

use super::CMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Lovász parameter.
pub const DELTA: f64 = 0.75;

const MAX_ITERATIONS: usize = 100_000;

/// Reduced basis `B̃ = B·T` with the unimodular `T` and its inverse; both
/// transforms hold Gaussian integers.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub basis: CMatrix,
    pub transform: CMatrix,
    pub inverse: CMatrix,
}

/// Rounds both parts to the nearest integer.
pub fn round_gaussian(z: Complex64) -> Complex64 {
    Complex64::new(z.re.round(), z.im.round())
}

/// Gram-Schmidt coefficients `μ[i][j] = ⟨b*_j, b_i⟩ / ‖b*_j‖²` and squared
/// norms `‖b*_i‖²` of the columns of `b`.
pub fn gram_schmidt(b: &CMatrix) -> (Vec<Vec<Complex64>>, Vec<f64>) {
    let m = b.ncols();
    let mut ortho: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut mu = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    let mut sq = vec![0.0; m];
    for i in 0..m {
        let mut v: Vec<Complex64> = b.column(i).iter().copied().collect();
        for j in 0..i {
            let proj: Complex64 = ortho[j].iter().zip(b.column(i).iter()).map(|(x, y)| x.conj() * y).sum();
            mu[i][j] = if sq[j] > 0.0 { proj / sq[j] } else { Complex64::new(0.0, 0.0) };
            for (vi, oj) in v.iter_mut().zip(&ortho[j]) {
                *vi -= mu[i][j] * oj;
            }
        }
        mu[i][i] = Complex64::new(1.0, 0.0);
        sq[i] = v.iter().map(|x| x.norm_sqr()).sum();
        ortho.push(v);
    }
    (mu, sq)
}

/// Reduces the columns of `b` so that every `|Re μ|, |Im μ| <= 1/2` and the
/// Lovász condition `‖b*_k‖² >= (δ - |μ_{k,k-1}|²) ‖b*_{k-1}‖²` holds.
pub fn clll_reduce(b: &CMatrix) -> Result<Reduction> {
    let m = b.ncols();
    let mut basis = b.clone();
    let mut transform = CMatrix::identity(m, m);
    let mut inverse = CMatrix::identity(m, m);
    let scale = b.column_iter().map(|c| c.norm_squared()).fold(0.0, f64::max);

    let (mut mu, mut sq) = gram_schmidt(&basis);
    check_rank(&sq, scale)?;

    let mut k = 1;
    let mut iterations = 0;
    while k < m {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(Error::NoConvergence(MAX_ITERATIONS));
        }
        for j in (0..k).rev() {
            let r = round_gaussian(mu[k][j]);
            if r.re == 0.0 && r.im == 0.0 {
                continue;
            }
            let (col_j, col_tj) = (basis.column(j).clone_owned(), transform.column(j).clone_owned());
            basis.column_mut(k).axpy(-r, &col_j, Complex64::new(1.0, 0.0));
            transform.column_mut(k).axpy(-r, &col_tj, Complex64::new(1.0, 0.0));
            for c in 0..m {
                let add = r * inverse[(k, c)];
                inverse[(j, c)] += add;
            }
            for i in 0..j {
                let sub = r * mu[j][i];
                mu[k][i] -= sub;
            }
            mu[k][j] -= r;
        }
        if sq[k] >= (DELTA - mu[k][k - 1].norm_sqr()) * sq[k - 1] {
            k += 1;
        } else {
            basis.swap_columns(k, k - 1);
            transform.swap_columns(k, k - 1);
            inverse.swap_rows(k, k - 1);
            (mu, sq) = gram_schmidt(&basis);
            check_rank(&sq, scale)?;
            k = (k - 1).max(1);
        }
    }
    Ok(Reduction { basis, transform, inverse })
}

fn check_rank(sq: &[f64], scale: f64) -> Result<()> {
    match sq.iter().position(|&s| !(s > 1e-24 * scale)) {
        Some(i) => Err(Error::RankDeficient(i)),
        None => Ok(()),
    }
}

/// `Π ‖b_i‖ / Π ‖b*_i‖`, equal to one exactly for orthogonal columns.
pub fn orthogonality_defect(b: &CMatrix) -> f64 {
    let (_, sq) = gram_schmidt(b);
    b.column_iter().zip(&sq).map(|(c, s)| c.norm() / s.sqrt()).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn orthonormal_basis_is_left_alone() {
        let b = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let red = clll_reduce(&b).unwrap();
        assert_eq!(red.transform, CMatrix::identity(2, 2));
        assert_eq!(red.basis, b);
    }

    #[test]
    fn ill_conditioned_pair_gets_reduced() {
        // second column almost (3+2j) times the first
        let b = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(3.0, 2.0), c(0.0, 0.0), c(0.01, 0.02)]);
        let before = orthogonality_defect(&b);
        let red = clll_reduce(&b).unwrap();
        let after = orthogonality_defect(&red.basis);
        assert!(after < before, "{after} !< {before}");
        assert!((&b * &red.transform - &red.basis).norm() < 1e-12);
    }

    #[test]
    fn output_satisfies_reduction_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let (n, m) = (rng.random_range(3..8), rng.random_range(2..4));
            let b = CMatrix::from_fn(n.max(m), m, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 10.0);
            let red = clll_reduce(&b).unwrap();
            let (mu, sq) = gram_schmidt(&red.basis);
            for k in 1..m {
                for j in 0..k {
                    assert!(mu[k][j].re.abs() <= 0.5 + 1e-9 && mu[k][j].im.abs() <= 0.5 + 1e-9);
                }
                assert!(sq[k] >= (DELTA - mu[k][k - 1].norm_sqr()) * sq[k - 1] - 1e-9);
            }
        }
    }

    #[test]
    fn rank_deficient_input_is_rejected() {
        let b = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 1.0), c(2.0, 2.0)]);
        assert!(matches!(clll_reduce(&b), Err(Error::RankDeficient(_))));
    }
}
