//! Petz recovery of an erased region from its shield.
//!
//! For the Choi state `Psi` on `A B F` (with `F = C R`) the reference
//! marginal is `sigma_AB = Psi Psi^dag`. The map
//! `X -> sigma_AB^{1/2} (I_A (x) sigma_B^{-1/2} X sigma_B^{-1/2}) sigma_AB^{1/2}`
//! has Kraus operators `K_a = sigma_AB^{1/2} (|a> (x) sigma_B^{-1/2})`,
//! completed by `|0>_A (x) Pi_perp` on the kernel of `sigma_B`.
//!
//! Errors are evaluated without forming `K_a`: with the thin SVD
//! `Psi = U S V^dag` and `sigma_B = U_b Lambda U_b^dag`, every recovered
//! vector `K_a psi_a'` lies in the span of `U`, where its coordinates are
//! `V^dag Psi_a^dag U_b Lambda^{-1/2} U_b^dag Psi_a' M^T` for a codeword
//! `psi = (I (x) M) Psi`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{right_reference, CodeSpec, Codeword, QecError, QecResult};
use crate::channel::Channel;
use crate::linalg::{adjoint_mul, c, eigh, matmul, max_abs, signed_trace_norm, CMat};
use crate::mera::{cone_state, Labelling, LegGroup, Region, TopInput};
use crate::tensor::Tensor;

/// Eigenvalues of `sigma_B` below this are treated as zero.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-10;
/// Relative cutoff on singular values of the Choi matrix.
const SVD_CUTOFF: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecoveryKind {
    Petz,
    /// `X_B -> omega_A (x) X_B`, exact when `rho^{ACR} = omega^A (x) rho^{CR}`.
    ExactDecoupling,
}

/// Recovery channel `B -> AB` in Kraus form; each Kraus operator is
/// `(a_dim * b_dim) x b_dim` with the `A` index major.
#[derive(Clone, Debug)]
pub struct RecoveryMap {
    kind: RecoveryKind,
    a_dim: usize,
    b_dim: usize,
    kraus: Vec<CMat>,
}

impl RecoveryMap {
    pub fn exact_decoupling(omega_a: &CMat, b_dim: usize) -> Self {
        let a_dim = omega_a.nrows();
        let (vals, vecs) = eigh(omega_a);
        let id = CMat::identity(b_dim, b_dim);
        let kraus = vals
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| {
                let v = vecs.column(k).clone_owned() * c(p.sqrt());
                v.kronecker(&id)
            })
            .collect();
        Self { kind: RecoveryKind::ExactDecoupling, a_dim, b_dim, kraus }
    }

    pub fn kind(&self) -> RecoveryKind {
        self.kind
    }

    pub fn a_dim(&self) -> usize {
        self.a_dim
    }

    pub fn b_dim(&self) -> usize {
        self.b_dim
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `|| sum_k K_k^dag K_k - I ||_max`.
    pub fn tp_defect(&self) -> f64 {
        let mut sum = CMat::zeros(self.b_dim, self.b_dim);
        for k in &self.kraus {
            sum += adjoint_mul(k, k);
        }
        max_abs(&(sum - CMat::identity(self.b_dim, self.b_dim)))
    }

    /// The map as a (Heisenberg) [`Channel`]; only for small dimensions.
    pub fn to_channel(&self) -> QecResult<Channel> {
        Ok(Channel::from_kraus(self.kraus.clone())?)
    }

    /// `|| R(tr_A psi psi^dag) - psi psi^dag ||_1` for `psi` given as an
    /// `(a_dim * b_dim) x f` matrix.
    pub fn error_on(&self, psi: &CMat) -> f64 {
        let (a, b) = (self.a_dim, self.b_dim);
        assert_eq!(psi.nrows(), a * b, "state does not match the recovery dimensions");
        let f = psi.ncols();
        let n_vec = self.kraus.len() * a + 1;
        let mut cols = CMat::zeros(a * b * f, n_vec);
        let mut col = 0;
        for ap in 0..a {
            let slice = psi.rows(ap * b, b);
            for k in &self.kraus {
                let y = k * slice;
                cols.column_mut(col).copy_from_slice(y.as_slice());
                col += 1;
            }
        }
        cols.column_mut(col).copy_from_slice(psi.as_slice());
        let mut signs = vec![1.0; n_vec];
        signs[n_vec - 1] = -1.0;
        signed_trace_norm(&cols, &signs)
    }
}

/// Petz recovery for one `(A, B)` split, built on the Choi state.
#[derive(Clone, Debug)]
pub struct PetzRecovery {
    a_dim: usize,
    b_dim: usize,
    c_dim: usize,
    ref_dim: usize,
    u_ab: CMat,
    u_b: CMat,
    inv_sqrt: Vec<f64>,
    /// `V^dag Psi_a^dag U_b Lambda^{-1/2}` per `a`.
    q: Vec<CMat>,
    /// `U_b^dag Psi_a` per `a`.
    p: Vec<CMat>,
    /// `(I - U_b U_b^dag) Psi_a` per `a`.
    resid: Vec<CMat>,
    /// `S V^dag`.
    psi_coords: CMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryErrors {
    pub max: f64,
    pub per_codeword: Vec<f64>,
    pub labels: Vec<String>,
}

impl PetzRecovery {
    /// `psi` is the normalised Choi state as an `(a b) x (c r)` matrix.
    pub fn from_choi(psi: &CMat, a_dim: usize, b_dim: usize, c_dim: usize, ref_dim: usize) -> QecResult<Self> {
        if psi.shape() != (a_dim * b_dim, c_dim * ref_dim) {
            return Err(QecError::Dimension(psi.nrows(), a_dim * b_dim));
        }
        let svd = psi.clone().svd(true, true);
        let s_max = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > SVD_CUTOFF * s_max.max(f64::MIN_POSITIVE))
            .collect();
        let u_full = svd.u.expect("requested U");
        let vt_full = svd.v_t.expect("requested V^T");
        let u_ab = CMat::from_fn(psi.nrows(), keep.len(), |i, j| u_full[(i, keep[j])]);
        let vt = CMat::from_fn(keep.len(), psi.ncols(), |i, j| vt_full[(keep[i], j)]);
        let psi_coords = CMat::from_fn(keep.len(), psi.ncols(), |i, j| vt[(i, j)] * svd.singular_values[keep[i]]);

        let blocks: Vec<CMat> = (0..a_dim).map(|a| psi.rows(a * b_dim, b_dim).clone_owned()).collect();
        // support of sigma_B = Z Z^dag from the thin SVD of Z = [Psi_0 .. Psi_{a-1}]
        let mut z = CMat::zeros(b_dim, a_dim * psi.ncols());
        for (k, blk) in blocks.iter().enumerate() {
            z.columns_mut(k * psi.ncols(), psi.ncols()).copy_from(blk);
        }
        let zsvd = z.svd(true, false);
        let zu = zsvd.u.expect("requested U");
        let kept: Vec<usize> = (0..zsvd.singular_values.len())
            .filter(|&k| zsvd.singular_values[k].powi(2) >= PSEUDO_INVERSE_CUTOFF)
            .collect();
        let u_b = CMat::from_fn(b_dim, kept.len(), |i, j| zu[(i, kept[j])]);
        let inv_sqrt: Vec<f64> = kept.iter().map(|&k| 1.0 / zsvd.singular_values[k]).collect();
        let scale = CMat::from_diagonal(&DVector::from_iterator(inv_sqrt.len(), inv_sqrt.iter().map(|&x| c(x))));

        let p: Vec<CMat> = blocks.iter().map(|blk| adjoint_mul(&u_b, blk)).collect();
        let resid: Vec<CMat> = blocks.iter().zip(&p).map(|(blk, pk)| blk - matmul(&u_b, pk)).collect();
        let q: Vec<CMat> = blocks
            .iter()
            .map(|blk| matmul(&(&vt * blk.adjoint()), &u_b) * &scale)
            .collect();
        Ok(Self { a_dim, b_dim, c_dim, ref_dim, u_ab, u_b, inv_sqrt, q, p, resid, psi_coords })
    }

    pub fn a_dim(&self) -> usize {
        self.a_dim
    }

    pub fn b_dim(&self) -> usize {
        self.b_dim
    }

    /// Rank of the retained support of `sigma_B`.
    pub fn support_rank(&self) -> usize {
        self.inv_sqrt.len()
    }

    /// Trace-preservation defect on the support of `sigma_B`:
    /// `Lambda^{-1/2} (sum_a U_b^dag Psi_a V V^dag Psi_a^dag U_b) Lambda^{-1/2} = I`.
    pub fn tp_defect(&self) -> f64 {
        let r = self.support_rank();
        let mut sum = CMat::zeros(r, r);
        for q in &self.q {
            sum += adjoint_mul(q, q);
        }
        max_abs(&(sum - CMat::identity(r, r)))
    }

    /// Explicit Kraus operators, including the kernel completion.
    pub fn to_map(&self) -> RecoveryMap {
        let (a, b) = (self.a_dim, self.b_dim);
        let mut kraus: Vec<CMat> = self.q.iter().map(|q| matmul(&matmul(&self.u_ab, q), &self.u_b.adjoint())).collect();
        let mut completion = CMat::zeros(a * b, b);
        let perp = CMat::identity(b, b) - matmul(&self.u_b, &self.u_b.adjoint());
        completion.rows_mut(0, b).copy_from(&perp);
        kraus.push(completion);
        RecoveryMap { kind: RecoveryKind::Petz, a_dim: a, b_dim: b, kraus }
    }

    /// Error on the codeword `(I (x) M) Psi`; `None` is the Choi state.
    pub fn error(&self, reference_map: Option<&CMat>) -> f64 {
        let apply = |z: &CMat| match reference_map {
            None => z.clone(),
            Some(m) => right_reference(z, self.c_dim, m),
        };
        let a = self.a_dim;
        let psi = apply(&self.psi_coords);
        let len = psi.len();
        let n_vec = a * a + 1;
        let mut cols = CMat::zeros(len, n_vec);
        let mut col = 0;
        for qa in &self.q {
            for pk in &self.p {
                let y = apply(&matmul(qa, pk));
                cols.column_mut(col).copy_from_slice(y.as_slice());
                col += 1;
            }
        }
        cols.column_mut(col).copy_from_slice(psi.as_slice());
        let mut signs = vec![1.0; n_vec];
        signs[n_vec - 1] = -1.0;
        let completion: f64 = self.resid.iter().map(|r| apply(r).norm_squared()).sum();
        signed_trace_norm(&cols, &signs) + completion
    }

    pub fn errors(&self, words: &[Codeword]) -> RecoveryErrors {
        let per_codeword: Vec<f64> = words.iter().map(|w| self.error(w.reference_map.as_ref())).collect();
        RecoveryErrors {
            max: per_codeword.iter().copied().fold(0.0, f64::max),
            labels: words.iter().map(|w| w.label.clone()).collect(),
            per_codeword,
        }
    }

    pub fn reference_dim(&self) -> usize {
        self.ref_dim
    }
}

const LABEL_A: u8 = 0;
const LABEL_B: u8 = 1;
const LABEL_C: u8 = 2;

/// Petz map recovering `A` from `B` for the code's Choi state.
pub fn petz_recovery(code: &CodeSpec, a: &Region, b: &Region) -> QecResult<PetzRecovery> {
    code.check_physical(a)?;
    code.check_physical(b)?;
    if a.intersects(b) {
        return Err(QecError::Overlap("erased region and shield".into()));
    }
    let labels = Labelling::from_regions(code.n_phys(), &[(a, LABEL_A), (b, LABEL_B)], LABEL_C, &[LABEL_A])?;
    let cs = cone_state(code.net(), code.scale(), &labels, &TopInput::Choi)?;
    let t = cs.fuse(&[LegGroup::Physical(LABEL_A), LegGroup::Label(LABEL_B), LegGroup::Label(LABEL_C), LegGroup::Reference])?;
    let sh = t.shape().to_vec();
    let psi = t.reshape(vec![sh[0] * sh[1], sh[2] * sh[3]])?.matrix(1);
    PetzRecovery::from_choi(&psi, sh[0], sh[1], sh[2], sh[3])
}

/// Errors of `petz` over the code's sampled codewords.
pub fn recovery_error(code: &CodeSpec, petz: &PetzRecovery) -> QecResult<RecoveryErrors> {
    let words = code.codewords()?;
    if petz.reference_dim() != code.logical_dim()? {
        return Err(QecError::Dimension(petz.reference_dim(), code.logical_dim()?));
    }
    Ok(petz.errors(&words))
}

/// Individual and joint errors for two erased regions with their own
/// shields, all evaluated on the same codewords.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnionErrors {
    pub first: RecoveryErrors,
    pub second: RecoveryErrors,
    pub joint: Vec<f64>,
}

pub fn union_errors(code: &CodeSpec, a1: &Region, b1: &Region, a2: &Region, b2: &Region) -> QecResult<UnionErrors> {
    for r in [a1, b1, a2, b2] {
        code.check_physical(r)?;
    }
    let (ab1, ab2) = (a1.union(b1), a2.union(b2));
    if a1.intersects(b1) || a2.intersects(b2) {
        return Err(QecError::Overlap("erased region and its shield".into()));
    }
    if ab1.intersects(&ab2) {
        return Err(QecError::Overlap("the two recovery supports".into()));
    }
    let labels = Labelling::from_regions(code.n_phys(), &[(a1, 0), (b1, 1), (a2, 2), (b2, 3)], 4, &[0, 2])?;
    let cs = cone_state(code.net(), code.scale(), &labels, &TopInput::Choi)?;
    let t = cs.fuse(&[
        LegGroup::Physical(0),
        LegGroup::Label(1),
        LegGroup::Physical(2),
        LegGroup::Label(3),
        LegGroup::Label(4),
        LegGroup::Reference,
    ])?;
    let sh = t.shape().to_vec();
    let (da1, db1, da2, db2, dc, dr) = (sh[0], sh[1], sh[2], sh[3], sh[4], sh[5]);
    let petz1 = PetzRecovery::from_choi(&t.matrix(2), da1, db1, da2 * db2 * dc, dr)?;
    let t2 = t.permute(&[2, 3, 0, 1, 4, 5])?;
    let petz2 = PetzRecovery::from_choi(&t2.matrix(2), da2, db2, da1 * db1 * dc, dr)?;
    let (map1, map2) = (petz1.to_map(), petz2.to_map());

    let words = code.codewords()?;
    let mut joint = Vec::with_capacity(words.len());
    for w in &words {
        let psi = match &w.reference_map {
            None => t.clone(),
            Some(m) => t.apply(&[5], m, &[m.nrows()])?.permute(&[1, 2, 3, 4, 5, 0])?,
        };
        joint.push(joint_error(&psi, &map1, &map2)?);
    }
    Ok(UnionErrors { first: petz1.errors(&words), second: petz2.errors(&words), joint })
}

/// `|| (R_1 (x) R_2)(tr_{A1 A2} psi psi^dag) - psi psi^dag ||_1` for `psi`
/// with legs `[A1, B1, A2, B2, C, R]`.
fn joint_error(psi: &Tensor, map1: &RecoveryMap, map2: &RecoveryMap) -> QecResult<f64> {
    let sh = psi.shape().to_vec();
    let (da1, db1, da2, db2) = (sh[0], sh[1], sh[2], sh[3]);
    let n_vec = map1.kraus().len() * map2.kraus().len() * da1 * da2 + 1;
    let mut cols = CMat::zeros(psi.len(), n_vec);
    let mut col = 0;
    let rest: Vec<usize> = sh[1..].to_vec();
    let rest_len: usize = rest.iter().product();
    for x1 in 0..da1 {
        // slice A1 = x1, then A2 = x2 (legs B1, A2, B2, C, R)
        let s1 = Tensor::new(rest.clone(), psi.data()[x1 * rest_len..(x1 + 1) * rest_len].to_vec())?;
        let s1 = s1.permute(&[1, 0, 2, 3, 4])?; // (A2, B1, B2, C, R)
        let inner: Vec<usize> = s1.shape()[1..].to_vec();
        let inner_len: usize = inner.iter().product();
        for x2 in 0..da2 {
            let s2 = Tensor::new(inner.clone(), s1.data()[x2 * inner_len..(x2 + 1) * inner_len].to_vec())?;
            for k1 in map1.kraus() {
                let y1 = s2.apply(&[0], k1, &[da1, db1])?; // (A1, B1, B2, C, R)
                for k2 in map2.kraus() {
                    let y = y1.apply(&[2], k2, &[da2, db2])?; // (A2, B2, A1, B1, C, R)
                    let y = y.permute(&[2, 3, 0, 1, 4, 5])?;
                    cols.column_mut(col).copy_from_slice(y.data());
                    col += 1;
                }
            }
        }
    }
    cols.column_mut(col).copy_from_slice(psi.data());
    let mut signs = vec![1.0; n_vec];
    signs[n_vec - 1] = -1.0;
    Ok(signed_trace_norm(&cols, &signs))
}
