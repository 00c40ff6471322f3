//! Special functions used by the detection and throughput models: the
//! Gaussian tail, Poisson distribution sums (equivalently the regularized
//! upper incomplete gamma function at integer order) and the first-order
//! Marcum Q function.

use statrs::function::gamma::{gamma_ur, ln_gamma};
use std::f64::consts::SQRT_2;

/// Largest mean for which `exp(-mu)` stays comfortably inside the normal range.
const LINEAR_SPACE_MAX_MEAN: f64 = 700.0;

/// Gaussian tail probability `Q(x) = Pr(Z > x)` for a standard normal `Z`.
pub fn qfunc(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Poisson probability mass `e^{-mu} mu^k / k!`, evaluated in log space.
pub fn poisson_pmf(k: u64, mu: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (-mu + kf * mu.ln() - ln_gamma(kf + 1.0)).exp()
}

/// Poisson cumulative distribution `Pr(X <= k)` for `X ~ Poisson(mu)`.
///
/// Equal to `Γ(k+1, mu) / k!`. Uses the forward term recurrence
/// `t_i = t_{i-1} mu / i`; for means large enough that `e^{-mu}` underflows
/// the same recurrence is carried out on logarithms.
pub fn poisson_cdf(k: u64, mu: f64) -> f64 {
    if mu <= 0.0 {
        return 1.0;
    }
    if mu <= LINEAR_SPACE_MAX_MEAN {
        let mut term = (-mu).exp();
        let mut sum = term;
        for i in 1..=k {
            term *= mu / i as f64;
            sum += term;
            // past the mode the remaining terms cannot change the sum
            if i as f64 > mu && term < sum * 1e-17 {
                break;
            }
        }
        return sum.min(1.0);
    }

    let ln_mu = mu.ln();
    let mut ln_term = -mu;
    let mut ln_sum = ln_term;
    for i in 1..=k {
        ln_term += ln_mu - (i as f64).ln();
        ln_sum = log_add_exp(ln_sum, ln_term);
        if i as f64 > mu && ln_term < ln_sum - 40.0 {
            break;
        }
    }
    ln_sum.exp().min(1.0)
}

/// Poisson survival function `Pr(X > k)`, accurate when it is small.
pub fn poisson_sf(k: u64, mu: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if (k as f64) < mu {
        return (1.0 - poisson_cdf(k, mu)).max(0.0);
    }
    // terms decrease monotonically beyond the mode, sum them directly
    let mut i = k + 1;
    let mut term = poisson_pmf(i, mu);
    let mut sum = 0.0;
    while term > 0.0 {
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        i += 1;
        term *= mu / i as f64;
    }
    sum
}

/// Regularized upper incomplete gamma `Γ(s, x) / Γ(s)` for real `s > 0`.
///
/// Continuous extension of [`poisson_cdf`]: for integer `s` it equals
/// `poisson_cdf(s - 1, x)`.
pub fn regularized_upper_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(s, x)
}

/// First-order Marcum Q function `Q₁(a, b)`.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    marcum_q1_pair(a, b).0
}

/// Returns `(Q₁(a, b), 1 - Q₁(a, b))`, each accurate in the relative sense
/// even when the other is close to one.
///
/// Uses the Poisson-mixture form
/// `Q₁(a, b) = Σ_k Pois(k; a²/2) · Pr(Pois(b²/2) <= k)`, with the
/// complementary sum built from Poisson survival probabilities.
pub fn marcum_q1_pair(a: f64, b: f64) -> (f64, f64) {
    let a = a.abs();
    let b = b.abs();
    if b == 0.0 {
        return (1.0, 0.0);
    }
    let mix_mean = 0.5 * a * a;
    let x = 0.5 * b * b;

    // truncation point: the mixing weights beyond it are below 1e-18 in total
    let k_max = (mix_mean + 12.0 * mix_mean.sqrt() + 40.0).ceil() as u64;
    let len = k_max as usize + 1;

    let mut cdf = Vec::with_capacity(len);
    let mut acc = 0.0;
    for k in 0..=k_max {
        acc += poisson_pmf(k, x);
        cdf.push(acc.min(1.0));
    }
    let mut sf = vec![0.0; len];
    sf[len - 1] = poisson_sf(k_max, x);
    for k in (0..len - 1).rev() {
        sf[k] = sf[k + 1] + poisson_pmf(k as u64 + 1, x);
    }
    // keep the upward cdf where it is the accurate side
    for k in 0..len {
        if (k as f64) >= x {
            cdf[k] = 1.0 - sf[k];
        }
    }

    let mut q = 0.0;
    let mut q_comp = 0.0;
    for k in 0..len {
        let w = poisson_pmf(k as u64, mix_mean);
        q += w * cdf[k];
        q_comp += w * sf[k];
    }
    (q.clamp(0.0, 1.0), q_comp.clamp(0.0, 1.0))
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
