//! The code family `C_s` as an approximate error-correcting code: distances,
//! decoupling, Petz recovery, correctability bounds and the nested
//! partitions behind the code-distance exponent.

pub mod bounds;
pub mod decoupling;
pub mod distance;
pub mod holography;
pub mod identities;
pub mod petz;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{build_transfer_operator, check_rg_regular, spectral_decomposition, ChannelError};
use crate::haar::{derive_seed, random_pure_state};
use crate::linalg::CMat;
use crate::mera::{causal_cone, MeraError, MeraNetwork, Region};

pub use bounds::{
    union_correctability, verify_decoupling_bound, verify_decoupling_recoverability, verify_local_correctability,
    verify_simply_connected_correctability, BoundReport, Constants,
};
pub use decoupling::{decoupling_bures, decoupling_defect, DecouplingResult, DefectOperator};
pub use distance::{bures_distance, fidelity, trace_distance, Distances};
pub use holography::{distance_exponent, uberholography_partition, Partition};
pub use identities::{clustering_identity, evaluation_identity, product_identity, IdentityCheck};
pub use petz::{petz_recovery, recovery_error, union_errors, PetzRecovery, RecoveryErrors, RecoveryKind, RecoveryMap, UnionErrors};

#[derive(Debug, Error)]
pub enum QecError {
    /// Input matrix is not a density operator.
    #[error("not a state: {0}")]
    NotAState(String),
    /// The two states live on different spaces.
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    /// A computed pair violates `2 B^2 <= T <= 2 sqrt(2) B`.
    #[error("distance sandwich violated: bures {bures:.6e}, trace {trace:.6e}")]
    Sandwich { bures: f64, trace: f64 },
    /// Region is not an interval; the shielded path applies instead.
    #[error("region {0:?} is not simply connected; use the shielded (local) path")]
    NotSimplyConnected(Vec<usize>),
    /// Regions that must be disjoint overlap.
    #[error("regions overlap: {0}")]
    Overlap(String),
    /// `|AB| >= 2^s`, outside the local-correctability hypothesis.
    #[error("hypothesis violated: |AB| = {ab} is not below 2^s = {limit}")]
    Hypothesis { ab: usize, limit: usize },
    /// Bad code parameters.
    #[error("invalid code: {0}")]
    Code(String),
    /// The transfer operator is not RG-regular, so no `nu` is available.
    #[error("transfer operator is not RG-regular: {0}")]
    NotRegular(String),
    /// Invalid argument to the partition arithmetic.
    #[error("domain error: {0}")]
    Domain(String),
    /// Partition depth exceeds what the region supports.
    #[error("depth {requested} infeasible; largest feasible depth is {max_feasible}")]
    Depth { requested: usize, max_feasible: usize },
    #[error(transparent)]
    Mera(#[from] MeraError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
}

pub type QecResult<T> = Result<T, QecError>;

/// Which codewords stand in for the supremum over the code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodewordSampler {
    /// Include the maximally entangled (Choi) purification.
    pub maximally_entangled: bool,
    /// Number of seeded Haar-random pure top states.
    pub random_pure: usize,
    pub seed: u64,
}

impl Default for CodewordSampler {
    fn default() -> Self {
        Self { maximally_entangled: true, random_pure: 32, seed: 0 }
    }
}

/// A codeword as a map on the reference copy of the Choi purification:
/// `psi = (I (x) M) |Choi>`. `None` stands for `M = I`.
#[derive(Clone, Debug)]
pub struct Codeword {
    pub label: String,
    pub reference_map: Option<CMat>,
}

impl Codeword {
    pub fn is_choi(&self) -> bool {
        self.reference_map.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    net: MeraNetwork,
    scale: usize,
    sampler: CodewordSampler,
}

impl CodeSpec {
    pub fn new(net: MeraNetwork, scale: usize, sampler: CodewordSampler) -> QecResult<Self> {
        if scale > net.num_layers() {
            return Err(QecError::Code(format!("scale {scale} exceeds {} layers", net.num_layers())));
        }
        if !sampler.maximally_entangled && sampler.random_pure == 0 {
            return Err(QecError::Code("codeword sampler is empty".into()));
        }
        Ok(Self { net, scale, sampler })
    }

    pub fn net(&self) -> &MeraNetwork {
        &self.net
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn sampler(&self) -> &CodewordSampler {
        &self.sampler
    }

    pub fn n_phys(&self) -> usize {
        self.net.n_phys()
    }

    /// Dimension `D` of the logical space `H_s`.
    pub fn logical_dim(&self) -> QecResult<usize> {
        Ok(self.net.dense_dim(self.scale)?)
    }

    /// Sampled codewords: the Choi state first, then pure states
    /// `M = sqrt(D) phi^T`.
    pub fn codewords(&self) -> QecResult<Vec<Codeword>> {
        let dim = self.logical_dim()?;
        let mut out = Vec::new();
        if self.sampler.maximally_entangled {
            out.push(Codeword { label: "choi".into(), reference_map: None });
        }
        let root = C64::new((dim as f64).sqrt(), 0.0);
        for k in 0..self.sampler.random_pure {
            let seed = derive_seed(self.sampler.seed, 100 + k as u64);
            let phi = random_pure_state(dim, seed);
            let m = CMat::from_row_slice(1, dim, &phi) * root;
            out.push(Codeword { label: format!("pure-{k}"), reference_map: Some(m) });
        }
        Ok(out)
    }

    /// Scaling dimension of the transfer operator; errors unless regular.
    pub fn nu(&self) -> QecResult<f64> {
        let sd = spectral_decomposition(&build_transfer_operator(&self.net)?)?;
        let rg = check_rg_regular(&sd, 1e-10);
        if !rg.is_regular {
            return Err(QecError::NotRegular(rg.reasons.join("; ")));
        }
        rg.nu.ok_or_else(|| QecError::NotRegular("nu undefined".into()))
    }

    /// Top-scale sites of the past causal cone of a physical region.
    pub fn top_cone(&self, a: &Region) -> QecResult<Vec<usize>> {
        let cone = causal_cone(&self.net, a, self.scale)?;
        Ok(cone.last().expect("cone includes the start").sites().to_vec())
    }

    pub(crate) fn check_physical(&self, r: &Region) -> QecResult<()> {
        if r.scale() != 0 || r.modulus() != self.n_phys() {
            return Err(QecError::Mera(MeraError::SiteRange { site: r.modulus(), modulus: self.n_phys(), scale: r.scale() }));
        }
        Ok(())
    }
}

/// Apply `m` (r' x D) to the trailing reference factor of the column index
/// `(c, r)` of `z`, giving columns `(c, r')`.
pub(crate) fn right_reference(z: &CMat, c_dim: usize, m: &CMat) -> CMat {
    let d = m.ncols();
    let rp = m.nrows();
    assert_eq!(z.ncols(), c_dim * d, "column index does not factor as (c, r)");
    let mt = m.transpose();
    let mut out = CMat::zeros(z.nrows(), c_dim * rp);
    for ci in 0..c_dim {
        let block = z.columns(ci * d, d) * &mt;
        out.columns_mut(ci * rp, rp).copy_from(&block);
    }
    out
}
