//! Scale-invariant binary MERA: construction, causal cones, operator
//! ascent, state encoding and cone-restricted contractions.

pub mod ascend;
pub mod cone_state;
pub mod encode;
pub mod io;
pub mod network;
pub mod region;

use thiserror::Error;

pub use ascend::{ascend_operator, LocalOperator};
pub use cone_state::{cone_state, ConeLeg, ConeState, Labelling, LegGroup, TopInput};
pub use encode::{descend, encode_state, purified_top, purify_code_state, PurifiedCodeState, ScaleState};
pub use network::{causal_cone, MeraNetwork, Provenance};
pub use region::Region;

use crate::tensor::TensorError;

#[derive(Debug, Error)]
pub enum MeraError {
    /// Tensors fail the unitarity/isometry contract or sizes are invalid.
    #[error("invalid network: {0}")]
    Construction(String),

    /// A site index outside the chain at its scale.
    #[error("site {site} is outside the {modulus}-site chain at scale {scale}")]
    SiteRange { site: usize, modulus: usize, scale: usize },

    /// A scale beyond the network's depth or in the wrong order.
    #[error("scale {scale} is not available (network depth {max})")]
    Scale { scale: usize, max: usize },

    /// Operator support or shape does not fit.
    #[error("support mismatch: {0}")]
    Support(String),

    /// Vector dimension mismatch.
    #[error("expected dimension {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Input is not a valid density matrix.
    #[error("invalid state: {0}")]
    State(String),

    /// Dense representation would exceed the supported size.
    #[error("{sites} sites of dimension {site_dim} exceed the dense size limit")]
    TooLarge { sites: usize, site_dim: usize },

    /// Malformed network document.
    #[error("network document: {0}")]
    Format(String),

    #[error(transparent)]
    Tensor(#[from] TensorError),
}
