//! Gray-mapped QPSK: bit pair `(b0, b1)` maps to
//! `√P_rx ((1 - 2 b0) + j (1 - 2 b1)) / √2`.

use crate::error::{invalid, Result};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub fn qpsk_modulate(bits: &[u8], p_rx: f64) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(invalid("bits", format!("QPSK needs an even bit count, got {}", bits.len())));
    }
    let a = p_rx.sqrt() * FRAC_1_SQRT_2;
    Ok(bits.chunks_exact(2).map(|b| Complex64::new(level(b[0]) * a, level(b[1]) * a)).collect())
}

fn level(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Hard decisions; a symbol at zero on either axis decides bit 0.
pub fn qpsk_demodulate(symbols: &[Complex64]) -> Vec<u8> {
    symbols.iter().flat_map(|s| [u8::from(s.re < 0.0), u8::from(s.im < 0.0)]).collect()
}

/// Nearest unit-energy QPSK point.
pub fn quantize(s: Complex64) -> Complex64 {
    let re = if s.re < 0.0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let im = if s.im < 0.0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}
