//! Data-phase physical layer: QPSK, the spread received signal, MMSE and
//! lattice-reduction-aided MMSE multiuser detection, and the coded packet
//! success rule.

pub mod channel;
pub mod code;
pub mod lattice;
pub mod mud;
pub mod qpsk;

pub use channel::{build_received, DataFrame, EffectiveCodebook};
pub use code::{packet_success, PacketCodeModel, BCH_255_191_8};
pub use lattice::{clll_reduce, Reduction};
pub use mud::{mmse_detect, mmse_lr_detect, mmse_lr_detect_masked, MudOutput};
pub use qpsk::{qpsk_demodulate, qpsk_modulate};

/// Complex matrix type used by the detectors.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
