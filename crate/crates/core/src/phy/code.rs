//! Bounded-distance model of a binary BCH code: a codeword decodes iff it
//! carries at most `t` bit errors.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketCodeModel {
    /// Code length in bits.
    pub n: usize,
    /// Message bits.
    pub k: usize,
    /// Correctable bit errors.
    pub t: usize,
}

pub const BCH_255_191_8: PacketCodeModel = PacketCodeModel { n: 255, k: 191, t: 8 };

impl PacketCodeModel {
    /// QPSK symbols carrying one codeword; an odd `n` leaves one padding bit.
    pub fn symbols_per_packet(&self) -> usize {
        self.n.div_ceil(2)
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

pub fn packet_success(bit_errors: usize, model: &PacketCodeModel) -> bool {
    debug_assert!(bit_errors <= model.n);
    bit_errors <= model.t
}
