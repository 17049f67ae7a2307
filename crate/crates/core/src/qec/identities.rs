//! Renormalization identities checked against dense physical states.
//!
//! Each check evaluates one side on the descended state at scale 0 and the
//! other on the coarse state with the ascended operator, so agreement tests
//! the causal-cone truncation of `Phi` and the isometric structure together.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{QecError, QecResult};
use crate::linalg::kron;
use crate::mera::{ascend_operator, causal_cone, descend, LocalOperator, MeraNetwork, Region, ScaleState};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Physical-scale value.
    pub fine: C64,
    /// Coarse-scale value with the ascended operator.
    pub coarse: C64,
    pub residual: f64,
}

impl IdentityCheck {
    fn new(name: &str, fine: C64, coarse: C64) -> Self {
        Self { name: name.into(), fine, coarse, residual: (fine - coarse).norm() }
    }
}

/// `<rho_s| Phi(O) |sigma_s>` against `<rho_0| O |sigma_0>` for top states at
/// scale `top.scale` and `O` at scale 0.
pub fn evaluation_identity(net: &MeraNetwork, rho: &ScaleState, sigma: &ScaleState, op: &LocalOperator) -> QecResult<IdentityCheck> {
    let s = rho.scale;
    let fine = descend(net, rho, 0)?.expectation(op, &descend(net, sigma, 0)?)?;
    let coarse = rho.expectation(&ascend_operator(net, op, s)?, sigma)?;
    Ok(IdentityCheck::new("evaluation", fine, coarse))
}

/// `tr[(rho^X (x) rho^{Y}) O]` where `X` and `Y` partition the support of
/// `op`; a reference factor of `op` belongs to `Y`.
fn product_expectation(state: &ScaleState, x: &[usize], y: &[usize], op: &LocalOperator) -> QecResult<C64> {
    let with_aux = op.aux_dim() > 1;
    let rho_x = state.reduced(x, false);
    let rho_y = state.reduced(y, with_aux);
    let product = kron(&rho_x, &rho_y);
    // legs of the product: x (sorted), y (sorted), aux; reorder to the
    // operator's ascending site order
    let mut order: Vec<usize> = x.to_vec();
    order.sort_unstable();
    let mut ys = y.to_vec();
    ys.sort_unstable();
    order.extend(ys);
    let support = op.region().sites();
    let mut perm: Vec<usize> = support.iter().map(|s| order.iter().position(|o| o == s).expect("support split")).collect();
    let d = state.site_dim;
    let mut dims = vec![d; order.len()];
    if with_aux {
        perm.push(order.len());
        dims.push(state.aux_dim);
    }
    let k = dims.len();
    let mut full_perm = perm.clone();
    full_perm.extend(perm.iter().map(|p| p + k));
    let mut shape = dims.clone();
    shape.extend(dims);
    let t = Tensor::from_matrix(&product, shape)?.permute(&full_perm)?;
    let m = t.matrix(k);
    Ok((m * op.matrix()).trace())
}

fn split_support(op: &LocalOperator, x: &Region) -> QecResult<(Vec<usize>, Vec<usize>)> {
    let inside: Vec<usize> = op.region().sites().iter().copied().filter(|s| x.contains(*s)).collect();
    let outside: Vec<usize> = op.region().sites().iter().copied().filter(|s| !x.contains(*s)).collect();
    if inside.len() != x.len() {
        return Err(QecError::Overlap("first region is not inside the operator support".into()));
    }
    Ok((inside, outside))
}

/// `tr[rho^A (x) rho^R O_{AR}]` at scale 0 against the same product of
/// marginals at the top scale with `Phi(O)`. `top` carries the reference
/// as its aux leg and `op` is supported on exactly `A` plus the reference.
pub fn product_identity(net: &MeraNetwork, top: &ScaleState, a: &Region, op: &LocalOperator) -> QecResult<IdentityCheck> {
    if op.region() != a {
        return Err(QecError::Overlap("operator support must equal A".into()));
    }
    let fine_state = descend(net, top, 0)?;
    let fine = product_expectation(&fine_state, a.sites(), &[], op)?;
    let lifted = ascend_operator(net, op, top.scale)?;
    let coarse = product_expectation(top, lifted.region().sites(), &[], &lifted)?;
    Ok(IdentityCheck::new("product-marginals", fine, coarse))
}

/// `tr[rho^A (x) rho^{CR} O_{ACR}]` at scale 0 against scale `s_mid` while
/// the causal cones of `A` and `C` stay disjoint. `top` lives at the code
/// scale with the reference as aux.
pub fn clustering_identity(
    net: &MeraNetwork,
    top: &ScaleState,
    a: &Region,
    c: &Region,
    s_mid: usize,
    op: &LocalOperator,
) -> QecResult<IdentityCheck> {
    if a.intersects(c) || op.region() != &a.union(c) {
        return Err(QecError::Overlap("operator must act on the disjoint union of A and C".into()));
    }
    let cone_a = causal_cone(net, a, s_mid)?;
    let cone_c = causal_cone(net, c, s_mid)?;
    if cone_a.iter().zip(&cone_c).any(|(x, y)| x.intersects(y)) {
        return Err(QecError::Overlap(format!("causal cones of A and C meet below scale {s_mid}")));
    }
    let fine_state = descend(net, top, 0)?;
    let (xs, ys) = split_support(op, a)?;
    let fine = product_expectation(&fine_state, &xs, &ys, op)?;
    let mid_state = descend(net, top, s_mid)?;
    let lifted = ascend_operator(net, op, s_mid)?;
    let a_mid = cone_a.last().expect("cone");
    let (xs, ys) = split_support(&lifted, a_mid)?;
    let coarse = product_expectation(&mid_state, &xs, &ys, &lifted)?;
    Ok(IdentityCheck::new("clustering", fine, coarse))
}

/// Random operator with entries of unit scale on `region` plus an aux factor.
pub fn random_local_operator(region: Region, site_dim: usize, aux_dim: usize, seed: u64) -> LocalOperator {
    let dim = site_dim.pow(region.len() as u32) * aux_dim;
    let m = crate::haar::GaussianSource::new(seed).matrix(dim, dim);
    LocalOperator::new(region, site_dim, aux_dim, m).expect("dimension matches")
}
