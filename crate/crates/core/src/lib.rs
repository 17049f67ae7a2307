//! Scale-invariant MERA networks studied as approximate quantum
//! error-correcting codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`], [`haar`], [`linalg`], [`schmidt`]: dense complex tensors,
//!   seeded Haar sampling and matrix utilities.
//! * [`mera`]: network construction, causal cones, operator ascent, state
//!   encoding and cone-restricted contractions.
//! * [`channel`]: the elementary-block transfer channel and its spectrum.
//! * [`qec`]: decoupling defects, Petz recovery and correctability bounds.
//! * [`dynamics`]: exact evolution, Lieb-Robinson truncation and the
//!   scale-separation commutator bound.

pub mod channel;
pub mod dynamics;
pub mod haar;
pub mod linalg;
pub mod mera;
pub mod qec;
pub mod schmidt;
pub mod tensor;

pub use num_complex::Complex64 as C64;
pub use tensor::{contract, Tensor, TensorError};
