use grantfree::phy::lattice::{gram_schmidt, DELTA};
use grantfree::phy::{clll_reduce, CMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn thousand_random_bases_reduce_unimodularly() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let m = rng.random_range(1..=8);
        let n = rng.random_range(m..=12);
        let b = CMatrix::from_fn(n, m, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let red = clll_reduce(&b).unwrap();
        assert!((red.transform.determinant().norm() - 1.0).abs() < 1e-9);
        assert!((&b * &red.transform - &red.basis).norm() < 1e-9 * b.norm().max(1.0));
        assert!((&red.basis * &red.inverse - &b).norm() < 1e-9 * b.norm().max(1.0));
        for t in red.transform.iter().chain(red.inverse.iter()) {
            assert_eq!(t.re, t.re.round());
            assert_eq!(t.im, t.im.round());
        }
        let (mu, sq) = gram_schmidt(&red.basis);
        for k in 1..m {
            assert!(sq[k] >= (DELTA - mu[k][k - 1].norm_sqr()) * sq[k - 1] * (1.0 - 1e-9));
        }
    }
}
