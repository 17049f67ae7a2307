//! Superoperator view of the elementary-block transfer operator: natural
//! representation, Choi matrix, spectrum and RG-regularity.
//!
//! A [`Channel`] is stored in the Heisenberg direction `O -> sum_k E_k^dag O E_k`
//! with Kraus operators `E_k : H_out -> H_in`. With row-major vectorisation
//! `vec(A O B) = (A (x) B^T) vec(O)`, so the natural matrix is
//! `sum_k E_k^dag (x) E_k^T`; its adjoint `sum_k E_k (x) conj(E_k)` is the
//! trace-preserving Schrodinger matrix.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, c, condition_number, eig, eigh, kron, matmul, max_abs, unvec_row_major, vec_row_major, CMat};
use crate::mera::{MeraError, MeraNetwork, Region};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum ChannelError {
    /// Kraus operators disagree in shape.
    #[error("Kraus operator {index} has shape {found:?}, expected {expected:?}")]
    KrausShape { index: usize, expected: (usize, usize), found: (usize, usize) },
    /// The map is not unital in the Heisenberg picture.
    #[error("channel is not unital: deviation {0:.3e}")]
    NotUnital(f64),
    /// The Choi matrix has a negative eigenvalue.
    #[error("channel is not completely positive: minimum Choi eigenvalue {0:.3e}")]
    NotCompletelyPositive(f64),
    /// Natural matrix does not match the stated dimensions.
    #[error("natural matrix of shape {found:?} does not match dimensions {in_dim} -> {out_dim}")]
    Shape { in_dim: usize, out_dim: usize, found: (usize, usize) },
    /// Spectral analysis needs equal input and output spaces.
    #[error("channel is not square ({in_dim} -> {out_dim})")]
    NotSquare { in_dim: usize, out_dim: usize },
    /// The leading eigenvalue is not unique.
    #[error("leading eigenvalue is degenerate: the channel is not mixing")]
    NotMixing,
    /// `Re lambda_1 <= 0`, so `-log2 Re lambda_1` is undefined.
    #[error("Re lambda_1 = {0:.3e} is not positive: scaling dimension undefined")]
    Branch(f64),
    #[error(transparent)]
    Mera(#[from] MeraError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
}

#[derive(Clone, Debug)]
pub struct Channel {
    in_dim: usize,
    out_dim: usize,
    natural: CMat,
    kraus: Option<Vec<CMat>>,
}

impl Channel {
    /// Heisenberg channel `O -> sum_k E_k^dag O E_k` from Kraus operators of
    /// shape `in_dim x out_dim`. Requires `sum_k E_k^dag E_k = I`.
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self, ChannelError> {
        let shape = kraus.first().map(|k| k.shape()).unwrap_or((0, 0));
        for (index, k) in kraus.iter().enumerate() {
            if k.shape() != shape {
                return Err(ChannelError::KrausShape { index, expected: shape, found: k.shape() });
            }
        }
        let (in_dim, out_dim) = shape;
        let mut natural = CMat::zeros(out_dim * out_dim, in_dim * in_dim);
        let mut sum = CMat::zeros(out_dim, out_dim);
        for k in &kraus {
            natural += kron(&k.adjoint(), &k.transpose());
            sum += k.adjoint() * k;
        }
        let dev = max_abs(&(sum - linalg::identity(out_dim)));
        if dev > 1e-10 {
            return Err(ChannelError::NotUnital(dev));
        }
        Ok(Self { in_dim, out_dim, natural, kraus: Some(kraus) })
    }

    /// Channel given only by its natural matrix; complete positivity and
    /// unitality are checked.
    pub fn from_natural(natural: CMat, in_dim: usize, out_dim: usize) -> Result<Self, ChannelError> {
        if natural.shape() != (out_dim * out_dim, in_dim * in_dim) {
            return Err(ChannelError::Shape { in_dim, out_dim, found: natural.shape() });
        }
        let ch = Self { in_dim, out_dim, natural, kraus: None };
        let dev = ch.unitality_defect();
        if dev > 1e-10 {
            return Err(ChannelError::NotUnital(dev));
        }
        let min = ch.choi_min_eigenvalue();
        if min < -1e-8 {
            return Err(ChannelError::NotCompletelyPositive(min));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![linalg::identity(d)]).expect("identity is a channel")
    }

    /// `O -> tr(O) I / d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let scale = 1.0 / (d as f64).sqrt();
        let kraus = (0..d * d)
            .map(|k| {
                let mut m = CMat::zeros(d, d);
                m[(k / d, k % d)] = c(scale);
                m
            })
            .collect();
        Self::from_kraus(kraus).expect("depolarizing is a channel")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn natural_matrix(&self) -> &CMat {
        &self.natural
    }

    /// Natural matrix of the trace-preserving adjoint map.
    pub fn schrodinger_matrix(&self) -> CMat {
        self.natural.adjoint()
    }

    pub fn kraus(&self) -> Option<&[CMat]> {
        self.kraus.as_deref()
    }

    pub fn apply(&self, o: &CMat) -> CMat {
        let v = &self.natural * vec_row_major(o);
        unvec_row_major(v.as_slice(), self.out_dim, self.out_dim)
    }

    pub fn compose(&self, next: &Channel) -> CMat {
        matmul(&next.natural, &self.natural)
    }

    pub fn unitality_defect(&self) -> f64 {
        max_abs(&(self.apply(&linalg::identity(self.in_dim)) - linalg::identity(self.out_dim)))
    }

    /// `J = sum_ij |i><j| (x) Phi(|i><j|)`, positive iff the map is CP.
    pub fn choi(&self) -> CMat {
        let (n, m) = (self.in_dim, self.out_dim);
        let mut j = CMat::zeros(n * m, n * m);
        for a in 0..n {
            for b in 0..n {
                let col = self.natural.column(a * n + b);
                for x in 0..m {
                    for y in 0..m {
                        j[(a * m + x, b * m + y)] = col[x * m + y];
                    }
                }
            }
        }
        j
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        eigh(&self.choi()).0.first().copied().unwrap_or(0.0)
    }
}

/// Width-3 block `{n-1, 0, 1}` at `scale`, in ascending site order.
pub fn elementary_block(scale: usize, modulus: usize) -> Result<Region, MeraError> {
    Region::interval(scale, modulus, -1, 3)
}

/// Transfer operator on the centred block `(n-1, 0, 1)` (tensor-factor
/// order left, centre, right).
///
/// One layer maps the coarse block through the three isometries onto six
/// sites `(n-2, n-1, 0, 1, 2, 3)`, then the disentanglers on `(n-1, 0)` and
/// `(1, 2)`. The outer sites `n-2, 2, 3` are traced out, giving eight
/// Kraus operators `E_e = (I_block (x) <e|_env) W_loc`.
pub fn build_transfer_operator(net: &MeraNetwork) -> Result<Channel, ChannelError> {
    let d = net.site_dim();
    let v = net.isometry();
    let vvv = v.outer(&v).outer(&v);
    // legs (o0, o1, a, o2, o3, b, o4, o5, c) -> (o0..o5, a, b, c)
    let w = vvv.permute(&[0, 1, 3, 4, 6, 7, 2, 5, 8])?;
    let u = net.u_matrix();
    let w = w.apply(&[1, 2], u, &[d, d])?; // (p1, p2, o0, o3, o4, o5, a, b, c)
    let w = w.apply(&[3, 4], u, &[d, d])?; // (p3, p4, p1, p2, o0, o5, a, b, c)
    let w = w.permute(&[2, 3, 0, 4, 1, 5, 6, 7, 8])?; // block (p1, p2, p3), env (o0, p4, o5)
    let block = d * d * d;
    let m = w.matrix(6);
    let kraus = (0..block).map(|e| CMat::from_fn(block, block, |i, j| m[(i * block + e, j)])).collect();
    Channel::from_kraus(kraus)
}

/// Permutation of a 3-site operator from centred order `(n-1, 0, 1)` to the
/// ascending order `(0, 1, n-1)` used by [`crate::mera::LocalOperator`].
pub fn centred_to_ascending(o: &CMat, d: usize) -> CMat {
    let t = Tensor::from_matrix(o, vec![d; 6]).expect("3-site operator");
    t.permute(&[1, 2, 0, 4, 5, 3]).expect("permutation").matrix(3)
}

pub fn ascending_to_centred(o: &CMat, d: usize) -> CMat {
    let t = Tensor::from_matrix(o, vec![d; 6]).expect("3-site operator");
    t.permute(&[2, 0, 1, 5, 3, 4]).expect("permutation").matrix(3)
}

/// Spectrum of a square channel with bi-orthonormal eigen-operators.
///
/// `left_ops[k]` are the Heisenberg eigen-operators (`Phi(L_k) = lambda_k L_k`)
/// and `right_ops` satisfy `tr[L_k R_l] = delta_kl`, so
/// `Phi(O) = sum_k lambda_k tr[O R_k] L_k`. When the eigenvector matrix is
/// ill-conditioned (`defective`), only the leading pair is kept.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub dim: usize,
    pub eigenvalues: Vec<C64>,
    pub left_ops: Vec<CMat>,
    pub right_ops: Vec<CMat>,
    pub nu: Option<f64>,
    pub defective: bool,
    pub condition: f64,
}

pub const DEFECTIVE_CONDITION: f64 = 1e8;

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

pub fn spectral_decomposition(ch: &Channel) -> Result<SpectralData, ChannelError> {
    if ch.in_dim != ch.out_dim {
        return Err(ChannelError::NotSquare { in_dim: ch.in_dim, out_dim: ch.out_dim });
    }
    let n = ch.in_dim;
    let (vals, vecs) = eig(&ch.natural);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| sort_key(&vals[a], &vals[b]));
    let eigenvalues: Vec<C64> = order.iter().map(|&k| vals[k]).collect();
    let x = CMat::from_fn(n * n, n * n, |i, j| vecs[(i, order[j])]);
    let condition = condition_number(&x);
    let defective = condition > DEFECTIVE_CONDITION;

    let (left_ops, right_ops) = if defective {
        let l0 = x.column(0).clone_owned();
        // left eigenvector for lambda_0 from the transposed problem
        let (tv, tx) = eig(&ch.natural.transpose());
        let k = (0..tv.len())
            .min_by(|&a, &b| (tv[a] - eigenvalues[0]).norm().total_cmp(&(tv[b] - eigenvalues[0]).norm()))
            .expect("nonempty spectrum");
        let y = tx.column(k).clone_owned();
        let overlap = (y.transpose() * &l0)[(0, 0)];
        let (l, r) = normalise_pair(l0, y / overlap, n, true);
        (vec![l], vec![r])
    } else {
        let y = x.clone().try_inverse().expect("well-conditioned eigenvectors");
        let degenerate = eigenvalues.len() > 1 && (eigenvalues[1] - eigenvalues[0]).norm() < 1e-8;
        (0..n * n)
            .map(|k| {
                let r = y.row(k).transpose();
                normalise_pair(x.column(k).clone_owned(), r, n, k == 0 && !degenerate)
            })
            .unzip()
    };
    let mut sd = SpectralData { dim: n, eigenvalues, left_ops, right_ops, nu: None, defective, condition };
    sd.nu = scaling_dimension(&sd).ok();
    Ok(sd)
}

/// Rescale an eigen-pair: the leading pair so that `L_0 = I`, the others so
/// that `L_k` has unit Hilbert-Schmidt norm and its largest entry is real
/// positive. `r` is the row of `X^{-1}`, so `R = unvec(r)^T`.
fn normalise_pair(l: DVector<C64>, r: DVector<C64>, n: usize, leading: bool) -> (CMat, CMat) {
    let lm = unvec_row_major(l.as_slice(), n, n);
    let rm = unvec_row_major(r.as_slice(), n, n).transpose();
    let z = if leading {
        lm.trace() / c(n as f64)
    } else {
        let big = lm.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(c(1.0));
        let phase = if big.norm() > 0.0 { big / big.norm() } else { c(1.0) };
        phase * c(lm.norm())
    };
    (lm.map(|v| v / z), rm.map(|v| v * z))
}

impl SpectralData {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `-log2 max_{k >= 1} |lambda_k|`, the rate at which iterates approach
    /// the fixed point. It can be smaller than `nu`, which orders by real
    /// part, when a negative or complex eigenvalue dominates in modulus.
    pub fn modulus_exponent(&self) -> Option<f64> {
        let m = self.eigenvalues.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
        if self.eigenvalues.len() < 2 {
            return None;
        }
        Some(if m > 0.0 { -m.log2() } else { f64::INFINITY })
    }

    /// `|| sum_k lambda_k |L_k>><<R_k| - T ||_max`; `None` when defective.
    pub fn reconstruction_residual(&self, ch: &Channel) -> Option<f64> {
        if self.defective {
            return None;
        }
        let n2 = self.dim * self.dim;
        let mut t = CMat::zeros(n2, n2);
        for ((lam, l), r) in self.eigenvalues.iter().zip(&self.left_ops).zip(&self.right_ops) {
            let lv = vec_row_major(l);
            let rv = vec_row_major(&r.transpose());
            t += (lv * rv.transpose()) * *lam;
        }
        Some(max_abs(&(t - ch.natural_matrix())))
    }

    /// `max_kl |tr[L_k R_l] - delta_kl|` over the retained pairs.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, l) in self.left_ops.iter().enumerate() {
            for (j, r) in self.right_ops.iter().enumerate() {
                let target = if k == j { 1.0 } else { 0.0 };
                worst = worst.max(((l * r).trace() - c(target)).norm());
            }
        }
        worst
    }

    /// `Phi^m(O)` approximated by the fixed-point projection `tr[O R_0] L_0`.
    pub fn fixed_point_projection(&self, o: &CMat) -> CMat {
        &self.left_ops[0] * (o * &self.right_ops[0]).trace()
    }
}

/// `nu = -log2 Re lambda_1`.
pub fn scaling_dimension(sd: &SpectralData) -> Result<f64, ChannelError> {
    let (l0, l1) = match sd.eigenvalues.as_slice() {
        [l0, l1, ..] => (*l0, *l1),
        _ => return Err(ChannelError::NotMixing),
    };
    if (l0 - l1).norm() < 1e-10 || l1.re >= 1.0 - 1e-10 {
        return Err(ChannelError::NotMixing);
    }
    if l1.re <= 0.0 {
        return Err(ChannelError::Branch(l1.re));
    }
    Ok(-l1.re.log2())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgReport {
    pub is_regular: bool,
    /// `1 - |lambda_1|` with `lambda_1` the largest subleading magnitude.
    pub gap: f64,
    pub lambda1_abs: f64,
    pub nu: Option<f64>,
    pub reasons: Vec<String>,
}

/// Regular iff exactly one eigenvalue has magnitude 1 (within `tol`) and
/// `nu > 0`. A vanishing subleading spectrum counts as `nu = infinity`.
pub fn check_rg_regular(sd: &SpectralData, tol: f64) -> RgReport {
    let mut reasons = Vec::new();
    let unit = sd.eigenvalues.iter().filter(|z| z.norm() >= 1.0 - tol).count();
    if unit != 1 {
        reasons.push(format!("{unit} eigenvalues of magnitude 1"));
    }
    if sd.eigenvalues.first().is_none_or(|l0| (l0 - c(1.0)).norm() > tol) {
        reasons.push("leading eigenvalue is not 1".into());
    }
    let lambda1_abs = sd.eigenvalues.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
    let nu = scaling_dimension(sd).ok();
    match nu {
        Some(nu) if nu > tol => {}
        Some(nu) => reasons.push(format!("nu = {nu:.3e} is not positive")),
        None if unit == 1 && lambda1_abs <= tol => {}
        None => reasons.push("nu undefined".into()),
    }
    RgReport { is_regular: reasons.is_empty(), gap: 1.0 - lambda1_abs, lambda1_abs, nu, reasons }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<[f64; 2]>,
    pub nu: Option<f64>,
    pub gap: f64,
    pub is_regular: bool,
    pub defective: bool,
}

impl SpectrumReport {
    pub fn new(sd: &SpectralData, tol: f64) -> Self {
        let rg = check_rg_regular(sd, tol);
        Self {
            eigenvalues: sd.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            nu: sd.nu,
            gap: rg.gap,
            is_regular: rg.is_regular,
            defective: sd.defective,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable report")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re,im,abs\n");
        for (k, [re, im]) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{k},{re:e},{im:e},{:e}\n", re.hypot(*im)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{random_density, GaussianSource};
    use crate::mera::{ascend_operator, LocalOperator};

    /// Independent eigenvalues: real Schur of `[[Re, -Im], [Im, Re]]`, whose
    /// spectrum is that of `M` together with its conjugate.
    fn realified_eigenvalues(m: &CMat) -> Vec<C64> {
        let n = m.nrows();
        let r = nalgebra::DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
            let z = m[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        r.complex_eigenvalues().iter().copied().collect()
    }

    fn matches_oracle(ours: &[C64], m: &CMat, tol: f64) -> bool {
        let mut oracle = realified_eigenvalues(m);
        // each eigenvalue of M (and of its conjugate) appears once in oracle
        for z in ours {
            let k = (0..oracle.len()).min_by(|&a, &b| (oracle[a] - z).norm().total_cmp(&(oracle[b] - z).norm())).unwrap();
            if (oracle[k] - z).norm() > tol {
                return false;
            }
            oracle.swap_remove(k);
        }
        true
    }

    #[test]
    fn trivial_network_transfer_is_unital() {
        let net = MeraNetwork::trivial(2, 3, 1).unwrap();
        let ch = build_transfer_operator(&net).unwrap();
        assert!(ch.unitality_defect() < 1e-12);
        assert_eq!(ch.natural_matrix().shape(), (64, 64));
    }

    #[test]
    fn transfer_matches_two_layer_ascent() {
        let net = MeraNetwork::haar(2, 3, 2, 11).unwrap();
        let ch = build_transfer_operator(&net).unwrap();
        let mut g = GaussianSource::new(4);
        let o = g.matrix(8, 8);
        let two = ch.apply(&ch.apply(&o));
        let block = elementary_block(0, net.n_phys()).unwrap();
        let op = LocalOperator::new(block, 2, 1, centred_to_ascending(&o, 2)).unwrap();
        let up = ascend_operator(&net, &op, 2).unwrap();
        assert_eq!(up.region(), &elementary_block(2, net.n_sites(2)).unwrap());
        let up = ascending_to_centred(up.matrix(), 2);
        assert!(max_abs(&(up - two)) < 1e-10);
    }

    #[test]
    fn choi_positive_for_many_seeds() {
        for seed in 0..100 {
            let ch = build_transfer_operator(&MeraNetwork::haar(2, 3, 1, seed).unwrap()).unwrap();
            assert!(ch.choi_min_eigenvalue() > -1e-8, "seed {seed}");
            assert!(ch.unitality_defect() < 1e-10);
        }
    }

    #[test]
    fn schrodinger_map_preserves_trace() {
        let ch = build_transfer_operator(&MeraNetwork::haar(2, 3, 1, 5).unwrap()).unwrap();
        let rho = random_density(8, 3);
        let out = ch.schrodinger_matrix() * vec_row_major(&rho);
        let out = unvec_row_major(out.as_slice(), 8, 8);
        assert!((out.trace() - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_channel_is_not_mixing() {
        let sd = spectral_decomposition(&Channel::identity(2)).unwrap();
        assert!(sd.eigenvalues.iter().all(|z| (z - c(1.0)).norm() < 1e-12));
        assert!(matches!(scaling_dimension(&sd), Err(ChannelError::NotMixing)));
        let rg = check_rg_regular(&sd, 1e-10);
        assert!(!rg.is_regular);
    }

    #[test]
    fn depolarizing_spectrum() {
        let ch = Channel::completely_depolarizing(2);
        let sd = spectral_decomposition(&ch).unwrap();
        assert!((sd.eigenvalues[0] - c(1.0)).norm() < 1e-12);
        assert!(sd.eigenvalues[1..].iter().all(|z| z.norm() < 1e-12));
        assert!(max_abs(&(&sd.left_ops[0] - linalg::identity(2))) < 1e-12);
        assert!(max_abs(&(&sd.right_ops[0] - linalg::identity(2) * c(0.5))) < 1e-12);
        let rg = check_rg_regular(&sd, 1e-10);
        assert!(rg.is_regular, "{:?}", rg.reasons);
        assert!((rg.gap - 1.0).abs() < 1e-12);
    }

    fn with_eigenvalues(vals: Vec<C64>) -> SpectralData {
        SpectralData { dim: 2, eigenvalues: vals, left_ops: vec![], right_ops: vec![], nu: None, defective: false, condition: 1.0 }
    }

    #[test]
    fn scaling_dimension_closed_forms() {
        let sd = with_eigenvalues(vec![c(1.0), c(0.5), c(0.1)]);
        assert!((scaling_dimension(&sd).unwrap() - 1.0).abs() < 1e-15);
        let sd = with_eigenvalues(vec![c(1.0), c(0.5f64.sqrt())]);
        assert!((scaling_dimension(&sd).unwrap() - 0.5).abs() < 1e-15);
        let sd = with_eigenvalues(vec![c(1.0), C64::new(-0.2, 0.3)]);
        assert!(matches!(scaling_dimension(&sd), Err(ChannelError::Branch(_))));
    }

    #[test]
    fn haar_spectrum_contract() {
        let mut nondefective = 0;
        for seed in 0..20 {
            let ch = build_transfer_operator(&MeraNetwork::haar(2, 3, 1, seed).unwrap()).unwrap();
            let sd = spectral_decomposition(&ch).unwrap();
            assert!(sd.spectral_radius() <= 1.0 + 1e-10);
            assert!((sd.eigenvalues[0] - c(1.0)).norm() < 1e-10);
            assert!(max_abs(&(&sd.left_ops[0] - linalg::identity(8))) < 1e-8);
            assert!(linalg::state_violation(&sd.right_ops[0], 1e-8).is_none(), "seed {seed}");
            if let Some(res) = sd.reconstruction_residual(&ch) {
                nondefective += 1;
                assert!(res < 1e-8, "seed {seed}: {res:e}");
                assert!(sd.biorthogonality_defect() < 1e-8);
            }
            assert!(matches_oracle(&sd.eigenvalues, ch.natural_matrix(), 1e-8), "seed {seed}");
        }
        assert!(nondefective >= 19);
    }

    #[test]
    fn nu_matches_oracle_seed_42() {
        let ch = build_transfer_operator(&MeraNetwork::haar(2, 3, 1, 42).unwrap()).unwrap();
        let sd = spectral_decomposition(&ch).unwrap();
        let mut oracle = realified_eigenvalues(ch.natural_matrix());
        oracle.sort_by(sort_key);
        // oracle holds every eigenvalue twice; the second distinct real part
        let first = oracle[0].re;
        let re1 = oracle.iter().map(|z| z.re).find(|&r| (r - first).abs() > 1e-9).unwrap();
        assert!((sd.nu.unwrap() + re1.log2()).abs() < 1e-8);
    }

    #[test]
    fn iteration_approaches_fixed_point() {
        let ch = build_transfer_operator(&MeraNetwork::haar(2, 3, 1, 8).unwrap()).unwrap();
        let sd = spectral_decomposition(&ch).unwrap();
        let o = GaussianSource::new(2).matrix(8, 8);
        let fixed = sd.fixed_point_projection(&o);
        let mut cur = o.clone();
        for m in 1..=20 {
            cur = ch.apply(&cur);
            let bound: f64 = (1..64)
                .map(|k| {
                    let coef = (&o * &sd.right_ops[k]).trace();
                    sd.eigenvalues[k].norm().powi(m) * (coef * sd.left_ops[k].norm()).norm()
                })
                .sum();
            assert!((&cur - &fixed).norm() <= bound + 1e-9, "m = {m}");
        }
    }

    #[test]
    fn report_round_trips_and_has_csv_header() {
        let sd = spectral_decomposition(&Channel::completely_depolarizing(2)).unwrap();
        let rep = SpectrumReport::new(&sd, 1e-10);
        let back: SpectrumReport = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert!(rep.to_csv().starts_with("k,re,im,abs\n"));
        assert_eq!(rep.to_csv().lines().count(), 5);
    }

    #[test]
    fn natural_constructor_rejects_non_cp() {
        // transpose map is positive, unital, but not completely positive
        let mut t = CMat::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                t[(j * 2 + i, i * 2 + j)] = c(1.0);
            }
        }
        assert!(matches!(Channel::from_natural(t, 2, 2), Err(ChannelError::NotCompletelyPositive(_))));
    }
}
