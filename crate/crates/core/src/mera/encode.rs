//! Schrödinger-picture encoding `W_1 ... W_s` of dense states.

use num_complex::Complex64 as C64;

use super::ascend::LocalOperator;
use super::network::{disentangler_pairs, MeraNetwork};
use super::MeraError;
use crate::linalg::{self, CMat};
use crate::tensor::Tensor;

/// Dense vector on `H_scale (x) aux`, sites in order then the aux leg.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleState {
    pub scale: usize,
    pub site_dim: usize,
    pub n_sites: usize,
    pub aux_dim: usize,
    pub amplitudes: Vec<C64>,
}

impl ScaleState {
    pub fn new(net: &MeraNetwork, scale: usize, aux_dim: usize, amplitudes: Vec<C64>) -> Result<Self, MeraError> {
        net.check_scale(scale)?;
        let dim = net.dense_dim(scale)? * aux_dim;
        if amplitudes.len() != dim {
            return Err(MeraError::Dimension { expected: dim, found: amplitudes.len() });
        }
        Ok(Self { scale, site_dim: net.site_dim(), n_sites: net.n_sites(scale), aux_dim, amplitudes })
    }

    fn shape(&self) -> Vec<usize> {
        let mut shape = vec![self.site_dim; self.n_sites];
        shape.push(self.aux_dim);
        shape
    }

    pub fn tensor(&self) -> Tensor {
        Tensor::new(self.shape(), self.amplitudes.clone()).expect("state shape")
    }

    pub fn inner(&self, other: &ScaleState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    /// `(O (x) I) |self>`. An operator without reference factor acts as
    /// identity on the aux leg.
    pub fn apply(&self, op: &LocalOperator) -> Result<ScaleState, MeraError> {
        if op.region().scale() != self.scale || op.region().modulus() != self.n_sites {
            return Err(MeraError::Support("operator and state live at different scales".into()));
        }
        let with_aux = op.aux_dim() > 1;
        if with_aux && op.aux_dim() != self.aux_dim {
            return Err(MeraError::Dimension { expected: self.aux_dim, found: op.aux_dim() });
        }
        let mut legs: Vec<usize> = op.region().sites().to_vec();
        let mut dims = vec![self.site_dim; legs.len()];
        if with_aux {
            legs.push(self.n_sites);
            dims.push(self.aux_dim);
        }
        let t = self.tensor().apply(&legs, op.matrix(), &dims)?;
        // new legs are in front; restore the site order
        let rank = t.rank();
        let mut labels: Vec<usize> = legs.clone();
        labels.extend((0..rank).filter(|x| !legs.contains(x)));
        let mut perm = vec![0; rank];
        for (pos, &l) in labels.iter().enumerate() {
            perm[l] = pos;
        }
        let t = t.permute(&perm)?;
        Ok(ScaleState { amplitudes: t.into_data(), ..self.clone() })
    }

    /// `<self| O |other>`.
    pub fn expectation(&self, op: &LocalOperator, other: &ScaleState) -> Result<C64, MeraError> {
        Ok(self.inner(&other.apply(op)?))
    }

    /// Reduced density matrix on the listed sites, optionally with the aux leg.
    pub fn reduced(&self, sites: &[usize], with_aux: bool) -> CMat {
        let mut keep = sites.to_vec();
        if with_aux {
            keep.push(self.n_sites);
        }
        linalg::reduced_state(&self.amplitudes, &self.shape(), &keep)
    }
}

/// Apply `W_{k} ... W_{to+1}` to a state at scale `k`.
pub fn descend(net: &MeraNetwork, state: &ScaleState, to_scale: usize) -> Result<ScaleState, MeraError> {
    if to_scale > state.scale {
        return Err(MeraError::Scale { scale: to_scale, max: state.scale });
    }
    net.dense_dim(to_scale)?;
    let d = net.site_dim();
    let mut t = state.tensor();
    // labels: Some(site) or None for the aux leg
    let mut labels: Vec<Option<usize>> = (0..state.n_sites).map(Some).collect();
    labels.push(None);
    let pos = |labels: &[Option<usize>], x: usize| labels.iter().position(|&l| l == Some(x)).expect("leg");
    for k in (to_scale + 1..=state.scale).rev() {
        let n_hi = net.n_sites(k);
        let n_lo = net.n_sites(k - 1);
        // isometries write fine legs 2j, 2j+1 labelled with offset n_hi to
        // avoid clashes with unprocessed coarse legs
        for j in 0..n_hi {
            let p = pos(&labels, j);
            t = t.apply(&[p], net.v_matrix(), &[d, d])?;
            let mut next = vec![Some(n_hi + 2 * j), Some(n_hi + 2 * j + 1)];
            next.extend(labels.iter().enumerate().filter(|&(q, _)| q != p).map(|(_, &l)| l));
            labels = next;
        }
        for l in labels.iter_mut() {
            if let Some(x) = l {
                *x -= n_hi;
            }
        }
        for (a, b) in disentangler_pairs(n_lo) {
            let (pa, pb) = (pos(&labels, a), pos(&labels, b));
            t = t.apply(&[pa, pb], net.u_matrix(), &[d, d])?;
            let mut next = vec![Some(a), Some(b)];
            next.extend(labels.iter().enumerate().filter(|&(q, _)| q != pa && q != pb).map(|(_, &l)| l));
            labels = next;
        }
    }
    let n = net.n_sites(to_scale);
    let mut perm: Vec<usize> = (0..n).map(|x| pos(&labels, x)).collect();
    perm.push(labels.iter().position(|l| l.is_none()).expect("aux leg"));
    let t = t.permute(&perm)?;
    Ok(ScaleState { scale: to_scale, site_dim: d, n_sites: n, aux_dim: state.aux_dim, amplitudes: t.into_data() })
}

/// `W_1 ... W_s |phi>` for `phi` on `H_s`.
pub fn encode_state(net: &MeraNetwork, phi: &[C64], s: usize) -> Result<Vec<C64>, MeraError> {
    let top = ScaleState::new(net, s, 1, phi.to_vec())?;
    Ok(descend(net, &top, 0)?.amplitudes)
}

/// Purification `(W_1..W_s (x) U_R)(rho_s^{1/2} (x) I) sum_i |i>|i>` of a
/// codeword, with the reference copy `R_s` as the aux leg.
#[derive(Clone, Debug)]
pub struct PurifiedCodeState {
    pub scale: usize,
    pub top_state: CMat,
    pub reference_unitary: CMat,
    pub amplitudes: Tensor,
}

const STATE_TOL: f64 = 1e-10;

/// The purified top state `(rho^{1/2} (x) U_R) sum_i |i>|i>` at scale `s`.
pub fn purified_top(net: &MeraNetwork, rho: &CMat, u_r: Option<&CMat>, s: usize) -> Result<ScaleState, MeraError> {
    let dim = net.dense_dim(s)?;
    if rho.shape() != (dim, dim) {
        return Err(MeraError::Dimension { expected: dim, found: rho.nrows() });
    }
    if let Some(why) = linalg::state_violation(rho, STATE_TOL) {
        return Err(MeraError::State(why));
    }
    let sqrt = linalg::psd_sqrt(rho);
    let m = match u_r {
        Some(u) => {
            if u.shape() != (dim, dim) || linalg::isometry_defect(u) > 1e-8 {
                return Err(MeraError::State("reference map is not a unitary on the reference copy".into()));
            }
            linalg::matmul(&sqrt, &u.transpose())
        }
        None => sqrt,
    };
    ScaleState::new(net, s, dim, m.transpose().as_slice().to_vec())
}

pub fn purify_code_state(
    net: &MeraNetwork,
    rho: &CMat,
    u_r: Option<&CMat>,
    s: usize,
) -> Result<PurifiedCodeState, MeraError> {
    let top = purified_top(net, rho, u_r, s)?;
    let dim = top.aux_dim;
    let phys = descend(net, &top, 0)?;
    let mut shape = vec![net.site_dim(); net.n_phys()];
    shape.push(dim);
    Ok(PurifiedCodeState {
        scale: s,
        top_state: linalg::psd_sqrt(rho),
        reference_unitary: u_r.cloned().unwrap_or_else(|| CMat::identity(dim, dim)),
        amplitudes: Tensor::new(shape, phys.amplitudes)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{random_density, random_pure_state};
    use crate::linalg::max_abs;
    use crate::mera::Region;

    #[test]
    fn scale_zero_is_identity() {
        let net = MeraNetwork::haar(2, 3, 1, 0).unwrap();
        let phi = random_pure_state(256, 1);
        assert_eq!(encode_state(&net, &phi, 0).unwrap(), phi);
    }

    #[test]
    fn encoding_is_isometric() {
        let net = MeraNetwork::haar(2, 4, 1, 2).unwrap();
        let a = random_pure_state(4, 3);
        let b = random_pure_state(4, 4);
        let ea = encode_state(&net, &a, 3).unwrap();
        let eb = encode_state(&net, &b, 3).unwrap();
        let ov = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(p, q)| p.conj() * q).sum() };
        assert!((ov(&ea, &eb) - ov(&a, &b)).norm() < 1e-10);
        assert!((ov(&ea, &ea).re - 1.0).abs() < 1e-10);
        let orth = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let mut zero = vec![C64::new(0.0, 0.0); 4];
        zero[0] = C64::new(1.0, 0.0);
        let o = ov(&encode_state(&net, &orth, 3).unwrap(), &encode_state(&net, &zero, 3).unwrap());
        assert!(o.norm() < 1e-10);
    }

    #[test]
    fn trivial_network_encodes_product_state() {
        let net = MeraNetwork::trivial(2, 3, 1).unwrap();
        let phi = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let out = encode_state(&net, &phi, 3).unwrap();
        assert!((out[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(out[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn purification_marginals() {
        let net = MeraNetwork::haar(2, 3, 1, 5).unwrap();
        let s = 2;
        let rho = random_density(4, 6);
        let p = purify_code_state(&net, &rho, None, s).unwrap();
        assert!((p.amplitudes.norm() - 1.0).abs() < 1e-10);
        let data = p.amplitudes.data();
        let phys = CMat::from_row_slice(256, 4, data);
        let rho0 = &phys * phys.adjoint();
        let w = net.encoder_matrix(s).unwrap();
        assert!(max_abs(&(rho0 - &w * &rho * w.adjoint())) < 1e-10);
        // reference marginal is rho transposed
        let rho_r = phys.transpose() * phys.map(|z| z.conj());
        assert!(max_abs(&(rho_r - rho.transpose())) < 1e-10);
    }

    #[test]
    fn maximally_mixed_reference() {
        let net = MeraNetwork::haar(2, 3, 1, 7).unwrap();
        let rho = CMat::identity(4, 4) / C64::new(4.0, 0.0);
        let top = purified_top(&net, &rho, None, 2).unwrap();
        let phys = descend(&net, &top, 0).unwrap();
        let r = phys.reduced(&[], true);
        assert!(max_abs(&(r - CMat::identity(4, 4) / C64::new(4.0, 0.0))) < 1e-10);
    }

    #[test]
    fn pure_purification_factorises() {
        let net = MeraNetwork::haar(2, 3, 1, 8).unwrap();
        let phi = nalgebra::DVector::from_vec(random_pure_state(4, 9));
        let rho = &phi * phi.adjoint();
        let top = purified_top(&net, &rho, None, 2).unwrap();
        let r = descend(&net, &top, 0).unwrap().reduced(&[], true);
        let purity = (&r * &r).trace().re;
        assert!((purity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_state_rejected() {
        let net = MeraNetwork::haar(2, 3, 1, 8).unwrap();
        let rho = CMat::identity(4, 4);
        assert!(matches!(purified_top(&net, &rho, None, 2), Err(MeraError::State(_))));
    }

    #[test]
    fn local_operator_application_matches_dense() {
        let net = MeraNetwork::haar(2, 2, 1, 1).unwrap();
        let psi = ScaleState::new(&net, 0, 1, random_pure_state(16, 2)).unwrap();
        let z = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
        let op = LocalOperator::new(Region::new(0, 4, vec![2]).unwrap(), 2, 1, z.clone()).unwrap();
        let got = psi.apply(&op).unwrap();
        let id = CMat::identity(2, 2);
        let dense = linalg::kron(&linalg::kron(&linalg::kron(&id, &id), &z), &id);
        let want = dense * nalgebra::DVector::from_vec(psi.amplitudes.clone());
        for (a, b) in got.amplitudes.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
