//! Closed-form throughput and spectral efficiency of the TDMA-based and
//! CDMA-based data phases.
//!
//! Notation: `L` preambles, spreading factor `N <= L`, `D` data symbols per
//! TDMA block, `D̄ = L·D/N` symbols per CDMA packet and slot length
//! `T_slot = L + L·D = L + N·D̄`. Active devices per slot are
//! `K ~ Poisson(λ)`.

use crate::config::Rounding;
use crate::special::{poisson_cdf, regularized_upper_gamma};
use statrs::function::gamma::ln_gamma;

fn miss(l: usize) -> f64 {
    1.0 - 1.0 / l as f64
}

/// `α = Pr(U_l = 1) = (K/L)(1 - 1/L)^{K-1}`.
pub fn alpha(k: usize, l: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    k as f64 / l as f64 * miss(l).powi(k as i32 - 1)
}

/// `β = Pr(W_l = 1) = 1 - α - (1 - 1/L)^K`.
pub fn beta(k: usize, l: usize) -> f64 {
    (1.0 - alpha(k, l) - miss(l).powi(k as i32)).max(0.0)
}

/// Expected singleton count for a fixed number of devices, `K (1 - 1/L)^{K-1}`.
pub fn kappa_td_cond(k: usize, l: usize) -> f64 {
    alpha(k, l) * l as f64
}

/// TDMA throughput `λ e^{-λ/L}`.
pub fn kappa_td(lambda: f64, l: usize) -> f64 {
    lambda * (-lambda / l as f64).exp()
}

pub fn eta_td(lambda: f64, l: usize, d: usize) -> f64 {
    d as f64 * kappa_td(lambda, l) / (l + l * d) as f64
}

/// `lim_{D→∞} η_td = (λ/L) e^{-λ/L}`, at most `e^{-1}`.
pub fn eta_td_limit(lambda: f64, l: usize) -> f64 {
    kappa_td(lambda, l) / l as f64
}

/// `ν̄ = L - (N+1)(1 - 1/L)^N - L(1 - 1/L)^{N+1}`, i.e. `L·β` at `K = N + 1`.
pub fn nu_bar(l: usize, n: usize) -> f64 {
    let p = miss(l);
    (l as f64 - (n + 1) as f64 * p.powi(n as i32) - l as f64 * p.powi(n as i32 + 1)).max(0.0)
}

/// `Q̄ = E[Q | K > N]`, approximated by `ν̄`.
pub fn q_bar(l: usize, n: usize) -> f64 {
    nu_bar(l, n)
}

/// The Poisson-cdf factor `Γ(N + Q̄, λ̄) / (N + Q̄ - 1)!` with
/// `λ̄ = λ(1 - 1/L)`.
pub fn cdf_term(lambda: f64, l: usize, n: usize, rounding: Rounding) -> f64 {
    let lambda_bar = lambda * miss(l);
    let index = n as f64 + q_bar(l, n);
    match rounding {
        Rounding::Round => integer_cdf(index.round(), lambda_bar),
        Rounding::Floor => integer_cdf(index.floor(), lambda_bar),
        Rounding::Continuous => regularized_upper_gamma(index, lambda_bar),
    }
}

fn integer_cdf(order: f64, mean: f64) -> f64 {
    if order < 1.0 {
        0.0
    } else {
        poisson_cdf(order as u64 - 1, mean)
    }
}

/// CDMA throughput `κ_cd ≈ κ_td · Γ(N + Q̄, λ̄) / (N + Q̄ - 1)!`.
pub fn kappa_cd(lambda: f64, l: usize, n: usize, rounding: Rounding) -> f64 {
    kappa_td(lambda, l) * cdf_term(lambda, l, n, rounding)
}

pub fn d_bar(l: usize, n: usize, d: usize) -> f64 {
    (l * d) as f64 / n as f64
}

pub fn eta_cd(lambda: f64, l: usize, n: usize, d: usize, rounding: Rounding) -> f64 {
    let db = d_bar(l, n, d);
    db * kappa_cd(lambda, l, n, rounding) / (l as f64 + n as f64 * db)
}

/// `lim_{D̄→∞} η_cd = κ_cd / N`, at most `(L/N) e^{-1}`.
pub fn eta_cd_limit(lambda: f64, l: usize, n: usize, rounding: Rounding) -> f64 {
    kappa_cd(lambda, l, n, rounding) / n as f64
}

/// Spectral-efficiency gain `φ = η_cd / η_td = (L/N) · cdf-term`.
pub fn gain_ratio(lambda: f64, l: usize, n: usize, rounding: Rounding) -> f64 {
    l as f64 / n as f64 * cdf_term(lambda, l, n, rounding)
}

/// Approximate `Pr(Q > N | K)` treating the collided-preamble indicators as
/// independent: `Σ_{i<K-N} C(L,i) β^i (1-β)^{L-i}`, zero for `K <= N`.
pub fn overload_probability(k: usize, l: usize, n: usize) -> f64 {
    if k <= n {
        return 0.0;
    }
    let b = beta(k, l);
    let upper = (k - n - 1).min(l);
    let sum: f64 = (0..=upper).map(|i| binomial_pmf(l, i, b)).sum();
    sum.min(1.0)
}

/// Poisson form of [`overload_probability`] with `ν = L·β`.
pub fn overload_probability_poisson(k: usize, l: usize, n: usize) -> f64 {
    if k <= n {
        return 0.0;
    }
    poisson_cdf((k - n - 1) as u64, l as f64 * beta(k, l))
}

fn binomial_pmf(n: usize, i: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if i == n { 1.0 } else { 0.0 };
    }
    let (nf, fi) = (n as f64, i as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(fi + 1.0) - ln_gamma(nf - fi + 1.0);
    (ln_choose + fi * p.ln() + (nf - fi) * (1.0 - p).ln()).exp()
}

/// All analytic quantities at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub kappa_td: f64,
    pub kappa_cd: f64,
    pub eta_td: f64,
    pub eta_cd: f64,
    pub phi: f64,
}

impl AnalyticPoint {
    pub fn new(lambda: f64, l: usize, n: usize, d: usize, rounding: Rounding) -> Self {
        Self {
            kappa_td: kappa_td(lambda, l),
            kappa_cd: kappa_cd(lambda, l, n, rounding),
            eta_td: eta_td(lambda, l, d),
            eta_cd: eta_cd(lambda, l, n, d, rounding),
            phi: gain_ratio(lambda, l, n, rounding),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_beta_small_cases() {
        assert_eq!(alpha(0, 5), 0.0);
        assert_eq!(beta(0, 5), 0.0);
        assert_relative_eq!(alpha(1, 7), 1.0 / 7.0);
        assert!(beta(1, 7).abs() < 1e-15);
        // enumerating the four assignments of two devices to two preambles:
        // preamble 1 is shared in exactly one of them
        assert_relative_eq!(beta(2, 2), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn tdma_reference_values() {
        assert_eq!(kappa_td(0.0, 20), 0.0);
        assert_relative_eq!(kappa_td(10.0, 20), 10.0 * (-0.5f64).exp());
        assert!((kappa_td(10.0, 20) - 6.0653).abs() < 1e-4);
        assert!((kappa_td_cond(10, 20) - 6.3025).abs() < 1e-4);
        assert!((eta_td(10.0, 20, 200) - 0.30175).abs() < 1e-5);
    }

    #[test]
    fn tdma_limit_bound() {
        assert_relative_eq!(eta_td_limit(20.0, 20), (-1.0f64).exp());
        for lambda in [1.0, 5.0, 19.0, 21.0, 40.0] {
            assert!(eta_td_limit(lambda, 20) < (-1.0f64).exp());
        }
    }

    #[test]
    fn nu_bar_values() {
        assert!((nu_bar(20, 10) - 2.0379).abs() < 1e-4, "{}", nu_bar(20, 10));
        assert!(nu_bar(20, 0).abs() < 1e-12);
        assert!(nu_bar(100_000, 5) < 1e-3);
    }

    #[test]
    fn cdma_reduces_to_tdma_at_full_spreading() {
        let phi = gain_ratio(10.0, 20, 20, Rounding::Round);
        assert!(phi <= 1.0 && phi > 0.9999);
        assert!((kappa_cd(10.0, 20, 20, Rounding::Round) - kappa_td(10.0, 20)).abs() < 1e-3);
        assert_eq!(kappa_cd(0.0, 20, 5, Rounding::Round), 0.0);
    }

    #[test]
    fn reference_operating_point() {
        // N + Q̄ = 12.04 → Pr(Pois(9.5) <= 11)
        let expected = kappa_td(10.0, 20) * poisson_cdf(11, 9.5);
        assert_relative_eq!(kappa_cd(10.0, 20, 10, Rounding::Round), expected, max_relative = 1e-14);
        let eta = eta_cd(10.0, 20, 10, 200, Rounding::Round);
        assert_relative_eq!(eta, 400.0 * expected / 4020.0, max_relative = 1e-14);
        assert_relative_eq!(gain_ratio(10.0, 20, 10, Rounding::Round), 2.0 * poisson_cdf(11, 9.5), max_relative = 1e-14);
        assert!(gain_ratio(50.0, 100, 50, Rounding::Round) > 1.0);
    }

    #[test]
    fn cdma_limit_bound() {
        for n in 1..=20 {
            for lambda in [1.0, 10.0, 20.0, 35.0] {
                let limit = eta_cd_limit(lambda, 20, n, Rounding::Round);
                assert!(limit <= 20.0 / n as f64 * (-1.0f64).exp() + 1e-15);
            }
        }
    }

    #[test]
    fn overload_probability_shape() {
        assert_eq!(overload_probability(5, 20, 10), 0.0);
        for k in 11..40 {
            let mut prev = 1.0;
            for n in 1..=20 {
                let p = overload_probability(k, 20, n);
                assert!(p <= 1.0 && p <= prev + 1e-15);
                prev = p;
            }
        }
    }
}
