//! Heisenberg-picture coarse-graining `O -> W^dag O W` restricted to the
//! past causal cone.

use super::network::{cone_step, disentangler_pairs, MeraNetwork};
use super::{MeraError, Region};
use crate::linalg::CMat;
use crate::tensor::Tensor;

/// Operator on the sites of `region` (ascending order) tensored with an
/// optional reference factor of dimension `aux_dim` placed last.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    region: Region,
    site_dim: usize,
    aux_dim: usize,
    matrix: CMat,
}

impl LocalOperator {
    pub fn new(region: Region, site_dim: usize, aux_dim: usize, matrix: CMat) -> Result<Self, MeraError> {
        let dim = site_dim.pow(region.len() as u32) * aux_dim;
        if matrix.shape() != (dim, dim) {
            return Err(MeraError::Support(format!(
                "operator of shape {:?} does not act on {} sites of dimension {site_dim} with reference {aux_dim}",
                matrix.shape(),
                region.len()
            )));
        }
        Ok(Self { region, site_dim, aux_dim, matrix })
    }

    pub fn identity(region: Region, site_dim: usize, aux_dim: usize) -> Self {
        let dim = site_dim.pow(region.len() as u32) * aux_dim;
        Self { region, site_dim, aux_dim, matrix: CMat::identity(dim, dim) }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Legs `[sites.., aux, sites.., aux]`.
    pub fn tensor(&self) -> Tensor {
        let mut shape = vec![self.site_dim; self.region.len()];
        shape.push(self.aux_dim);
        let half = shape.clone();
        shape.extend(half);
        Tensor::from_matrix(&self.matrix, shape).expect("operator shape")
    }

    /// Tensor with identities on the sites of `target` outside the support.
    pub fn extend_to(&self, target: &Region) -> Result<LocalOperator, MeraError> {
        if self.region.sites().iter().any(|&x| !target.contains(x)) {
            return Err(MeraError::Support("target region does not contain the support".into()));
        }
        let extra = target.difference(&self.region);
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let mut t = Labelled::from_operator(self);
        t.add_identity(extra.sites(), self.site_dim);
        Ok(t.into_operator(target.clone(), self.site_dim, self.aux_dim))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Leg {
    Out(usize),
    In(usize),
    UpOut(usize),
    UpIn(usize),
    AuxOut,
    AuxIn,
}

/// A tensor together with a label per leg.
pub(crate) struct Labelled {
    pub tensor: Tensor,
    pub legs: Vec<Leg>,
}

impl Labelled {
    pub fn from_operator(op: &LocalOperator) -> Self {
        let mut legs: Vec<Leg> = op.region.sites().iter().map(|&x| Leg::Out(x)).collect();
        legs.push(Leg::AuxOut);
        legs.extend(op.region.sites().iter().map(|&x| Leg::In(x)));
        legs.push(Leg::AuxIn);
        Self { tensor: op.tensor(), legs }
    }

    fn position(&self, leg: Leg) -> usize {
        self.legs.iter().position(|&l| l == leg).expect("leg present")
    }

    pub fn apply(&mut self, on: &[Leg], m: &CMat, new: &[Leg], dim: usize) {
        let pos: Vec<usize> = on.iter().map(|&l| self.position(l)).collect();
        let dims = vec![dim; new.len()];
        self.tensor = self.tensor.apply(&pos, m, &dims).expect("leg dimensions");
        let mut legs = new.to_vec();
        legs.extend(self.legs.iter().enumerate().filter(|(k, _)| !pos.contains(k)).map(|(_, &l)| l));
        self.legs = legs;
    }

    fn add_identity(&mut self, sites: &[usize], d: usize) {
        let id = Tensor::identity(&vec![d; sites.len()]);
        self.tensor = self.tensor.outer(&id);
        self.legs.extend(sites.iter().map(|&x| Leg::Out(x)));
        self.legs.extend(sites.iter().map(|&x| Leg::In(x)));
    }

    fn arrange(&mut self, order: &[Leg]) {
        let perm: Vec<usize> = order.iter().map(|&l| self.position(l)).collect();
        self.tensor = self.tensor.permute(&perm).expect("complete leg order");
        self.legs = order.to_vec();
    }

    fn into_operator(mut self, region: Region, d: usize, aux: usize) -> LocalOperator {
        let mut order: Vec<Leg> = region.sites().iter().map(|&x| Leg::Out(x)).collect();
        order.push(Leg::AuxOut);
        order.extend(region.sites().iter().map(|&x| Leg::In(x)));
        order.push(Leg::AuxIn);
        self.arrange(&order);
        let half = self.tensor.rank() / 2;
        let matrix = self.tensor.matrix(half);
        LocalOperator { region, site_dim: d, aux_dim: aux, matrix }
    }
}

/// One layer of `W^dag (.) W` from scale `k` to `k + 1`.
fn ascend_step(net: &MeraNetwork, op: &LocalOperator) -> Result<LocalOperator, MeraError> {
    let k = op.region.scale();
    if k >= net.num_layers() {
        return Err(MeraError::Scale { scale: k + 1, max: net.num_layers() });
    }
    let n = net.n_sites(k);
    let d = net.site_dim();
    let (expanded, upper) = cone_step(op.region.sites(), n);
    let cover: Vec<usize> = upper.iter().flat_map(|&j| [2 * j, 2 * j + 1]).collect();
    let cover = Region::new(k, n, cover)?;
    let mut t = Labelled::from_operator(&op.extend_to(&cover)?);
    let u = net.u_matrix();
    let (u_dag, u_t) = (u.adjoint(), u.transpose());
    for (a, b) in disentangler_pairs(n) {
        if !(op.region.contains(a) || op.region.contains(b)) {
            continue;
        }
        debug_assert!(expanded.contains(&a) && expanded.contains(&b));
        t.apply(&[Leg::Out(a), Leg::Out(b)], &u_dag, &[Leg::Out(a), Leg::Out(b)], d);
        t.apply(&[Leg::In(a), Leg::In(b)], &u_t, &[Leg::In(a), Leg::In(b)], d);
    }
    let v = net.v_matrix();
    let (v_dag, v_t) = (v.adjoint(), v.transpose());
    for &j in &upper {
        t.apply(&[Leg::Out(2 * j), Leg::Out(2 * j + 1)], &v_dag, &[Leg::UpOut(j)], d);
        t.apply(&[Leg::In(2 * j), Leg::In(2 * j + 1)], &v_t, &[Leg::UpIn(j)], d);
    }
    for leg in t.legs.iter_mut() {
        *leg = match *leg {
            Leg::UpOut(j) => Leg::Out(j),
            Leg::UpIn(j) => Leg::In(j),
            other => other,
        };
    }
    let region = Region::new(k + 1, net.n_sites(k + 1), upper)?;
    Ok(t.into_operator(region, d, op.aux_dim))
}

/// `Phi_s^{s_to}(O)`: coarse-grain an operator from its scale to `s_to`.
pub fn ascend_operator(net: &MeraNetwork, op: &LocalOperator, s_to: usize) -> Result<LocalOperator, MeraError> {
    let s = op.region.scale();
    net.check_scale(s_to)?;
    if s_to < s {
        return Err(MeraError::Scale { scale: s_to, max: net.num_layers() });
    }
    if op.region.modulus() != net.n_sites(s) || op.site_dim != net.site_dim() {
        return Err(MeraError::Support("operator region does not live on this network".into()));
    }
    let mut cur = op.clone();
    for _ in s..s_to {
        cur = ascend_step(net, &cur)?;
    }
    Ok(cur)
}
