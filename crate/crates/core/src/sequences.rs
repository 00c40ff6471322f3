//! Preamble sets and Alltop spreading sequences.

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;
use std::io::Write;

/// Inner product `⟨a, b⟩ = aᴴ b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Any finite collection of equal-length complex vectors.
pub trait VectorSet {
    fn vectors(&self) -> &[Vec<Complex64>];

    fn len(&self) -> usize {
        self.vectors().len()
    }

    fn is_empty(&self) -> bool {
        self.vectors().is_empty()
    }

    fn dim(&self) -> usize {
        self.vectors().first().map_or(0, Vec::len)
    }
}

/// `L` orthonormal preambles of dimension `L`, built from normalized DFT
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PreambleSet {
    vectors: Vec<Vec<Complex64>>,
}

impl PreambleSet {
    /// Preamble `l`, with `l` 1-based.
    pub fn preamble(&self, l: usize) -> &[Complex64] {
        &self.vectors[l - 1]
    }
}

impl VectorSet for PreambleSet {
    fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }
}

pub fn gen_preambles(l: usize) -> Result<PreambleSet> {
    if l == 0 {
        return Err(invalid("L", "preamble count must be at least 1"));
    }
    let scale = 1.0 / (l as f64).sqrt();
    let vectors = (0..l)
        .map(|col| {
            (0..l)
                .map(|n| {
                    // reduce the phase index exactly before converting to an angle
                    let idx = (col * n) % l;
                    Complex64::from_polar(scale, TAU * idx as f64 / l as f64)
                })
                .collect()
        })
        .collect();
    Ok(PreambleSet { vectors })
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The `N²` Alltop sequences `s_{k,m}(n) = N^{-1/2} exp(j2π((n+k)³ + m n)/N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlltopFamily {
    modulus: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl AlltopFamily {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Sequence `(k, m)`; stored at flat index `k·N + m`.
    pub fn sequence(&self, k: usize, m: usize) -> &[Complex64] {
        &self.vectors[k * self.modulus + m]
    }
}

impl VectorSet for AlltopFamily {
    fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }
}

pub fn gen_alltop_family(n: usize) -> Result<AlltopFamily> {
    if n < 5 || !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    let modulus = n as u64;
    let scale = 1.0 / (n as f64).sqrt();
    let mut vectors = Vec::with_capacity(n * n);
    for k in 0..modulus {
        for m in 0..modulus {
            let seq = (0..modulus)
                .map(|t| {
                    let shifted = (t + k) % modulus;
                    let phase = (shifted * shifted % modulus * shifted + m * t) % modulus;
                    Complex64::from_polar(scale, TAU * phase as f64 / n as f64)
                })
                .collect();
            vectors.push(seq);
        }
    }
    Ok(AlltopFamily { modulus: n, vectors })
}

/// `L` spreading sequences drawn without replacement from an Alltop family.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingSet {
    vectors: Vec<Vec<Complex64>>,
    source: Vec<usize>,
}

impl SpreadingSet {
    /// Spreading sequence paired with preamble `l` (1-based).
    pub fn sequence(&self, l: usize) -> &[Complex64] {
        &self.vectors[l - 1]
    }

    /// Flat family indices the sequences were drawn from.
    pub fn source_indices(&self) -> &[usize] {
        &self.source
    }

    /// Builds a set from explicit vectors, e.g. orthonormal test codes.
    pub fn from_vectors(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
        }
        let source = (0..vectors.len()).collect();
        Ok(Self { vectors, source })
    }
}

impl VectorSet for SpreadingSet {
    fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }
}

pub fn select_spreading<R: Rng + ?Sized>(
    family: &AlltopFamily,
    l: usize,
    rng: &mut R,
) -> Result<SpreadingSet> {
    let pool = family.len();
    if l > pool {
        return Err(invalid("L", format!("cannot select {l} sequences from a family of {pool}")));
    }
    let source: Vec<usize> = rand::seq::index::sample(rng, pool, l).into_vec();
    let vectors = source.iter().map(|&i| family.vectors()[i].clone()).collect();
    Ok(SpreadingSet { vectors, source })
}

/// Largest pairwise inner-product magnitude; zero for a single vector.
pub fn coherence<S: VectorSet + ?Sized>(set: &S) -> f64 {
    let v = set.vectors();
    let mut worst = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            worst = worst.max(inner(&v[i], &v[j]).norm());
        }
    }
    worst
}

/// One row per vector with real and imaginary parts interleaved.
pub fn write_csv<S: VectorSet + ?Sized, W: Write>(set: &S, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (0..set.dim()).flat_map(|n| [format!("re{n}"), format!("im{n}")]).collect();
    writeln!(out, "{}", header.join(","))?;
    for v in set.vectors() {
        let row: Vec<String> = v.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
