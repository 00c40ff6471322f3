use grantfree::sequences::{coherence, gen_alltop_family, gen_preambles, inner, select_spreading, VectorSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn alltop_pairwise_coherence_is_zero_or_inverse_root() {
    for n in [5, 7, 11, 13] {
        let fam = gen_alltop_family(n).unwrap();
        let v = fam.vectors();
        assert_eq!(v.len(), n * n);
        let target = 1.0 / (n as f64).sqrt();
        for i in 0..v.len() {
            assert!((inner(&v[i], &v[i]).norm() - 1.0).abs() < 1e-12);
            for j in i + 1..v.len() {
                let c = inner(&v[i], &v[j]).norm();
                assert!(c < 1e-12 || (c - target).abs() < 1e-12, "N={n} ({i},{j}) -> {c}");
            }
        }
    }
}

#[test]
fn preambles_are_orthonormal() {
    for l in [1, 2, 7, 20, 64] {
        let p = gen_preambles(l).unwrap();
        for i in 0..l {
            for j in 0..l {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&p.vectors()[i], &p.vectors()[j]).norm() - expect).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn selected_spreading_inherits_family_coherence() {
    let fam = gen_alltop_family(11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let set = select_spreading(&fam, 20, &mut rng).unwrap();
    assert_eq!(set.len(), 20);
    assert!(coherence(&set) <= 1.0 / 11f64.sqrt() + 1e-12);
    let mut idx = set.source_indices().to_vec();
    idx.sort_unstable();
    idx.dedup();
    assert_eq!(idx.len(), 20);
    assert!(select_spreading(&gen_alltop_family(5).unwrap(), 26, &mut rng).is_err());
}
