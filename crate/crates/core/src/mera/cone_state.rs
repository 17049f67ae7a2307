//! Code states contracted only as far as a site labelling requires.
//!
//! Every physical site carries a label. Walking the network upwards, each
//! leg collects the set of labels below it. Descending from the top, a
//! tensor whose input legs see a single label that is not "kept" is left
//! unapplied: its input leg stays in the state as a frozen leg standing for
//! the whole subtree. Frozen legs differ from the fully contracted state by
//! an isometry acting on sites of one label only, so anything invariant
//! under such isometries (reduced states of kept sites with the reference,
//! fidelities and trace distances after erasing kept sites, recovery maps
//! built on one label) is computed exactly on a much smaller vector.

use num_complex::Complex64 as C64;

use super::network::{disentangler_pairs, MeraNetwork};
use super::{MeraError, Region};
use crate::linalg::{self, CMat};
use crate::tensor::Tensor;

/// Largest number of legs a cone state may carry.
const MAX_LEGS: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelling {
    labels: Vec<u8>,
    kept: u16,
}

impl Labelling {
    /// `labels[i] < 16` is the label of physical site `i`.
    pub fn new(labels: Vec<u8>, kept: &[u8]) -> Result<Self, MeraError> {
        if labels.iter().chain(kept).any(|&l| l >= 16) {
            return Err(MeraError::Support("labels must be below 16".into()));
        }
        let kept = kept.iter().fold(0u16, |m, &l| m | (1 << l));
        Ok(Self { labels, kept })
    }

    /// Label `regions[k].1` on the sites of `regions[k].0`, `rest` elsewhere.
    pub fn from_regions(n: usize, regions: &[(&Region, u8)], rest: u8, kept: &[u8]) -> Result<Self, MeraError> {
        let mut labels = vec![rest; n];
        for (r, l) in regions {
            if r.modulus() != n || r.scale() != 0 {
                return Err(MeraError::Support("labelling regions must be physical".into()));
            }
            for &x in r.sites() {
                labels[x] = *l;
            }
        }
        Self::new(labels, kept)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    fn frozen(&self, mask: u16) -> bool {
        mask.count_ones() == 1 && mask & self.kept == 0
    }
}

/// The state placed on the top scale.
#[derive(Clone, Debug)]
pub enum TopInput {
    /// `D^{-1/2} sum_i |i>|i>` with the reference copy.
    Choi,
    /// Pure top state, no reference.
    Pure(Vec<C64>),
    /// `(rho^{1/2} (x) U_R) sum_i |i>|i>`.
    Purified { rho: CMat, u_r: Option<CMat> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConeLeg {
    Physical { site: usize, label: u8 },
    /// Unexpanded leg at `scale`; `mid` marks an isometry output that never
    /// reached its disentangler.
    Frozen { label: u8, scale: usize, index: usize, mid: bool },
    Reference(usize),
}

/// Selection of legs for [`ConeState::fuse`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegGroup {
    Physical(u8),
    Frozen(u8),
    /// Physical and frozen legs of one label.
    Label(u8),
    Reference,
}

impl LegGroup {
    fn matches(&self, leg: &ConeLeg) -> bool {
        match (*self, *leg) {
            (LegGroup::Physical(l), ConeLeg::Physical { label, .. }) => l == label,
            (LegGroup::Frozen(l), ConeLeg::Frozen { label, .. }) => l == label,
            (LegGroup::Label(l), ConeLeg::Physical { label, .. }) => l == label,
            (LegGroup::Label(l), ConeLeg::Frozen { label, .. }) => l == label,
            (LegGroup::Reference, ConeLeg::Reference(_)) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConeState {
    tensor: Tensor,
    legs: Vec<ConeLeg>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Live {
    Site(usize),
    Mid(usize),
    Done(ConeLeg),
}

/// Contract the code state of `input` at scale `s` down to the physical
/// layer, skipping tensors that only feed non-kept single-label subtrees.
pub fn cone_state(net: &MeraNetwork, s: usize, labelling: &Labelling, input: &TopInput) -> Result<ConeState, MeraError> {
    net.check_scale(s)?;
    let n0 = net.n_phys();
    if labelling.labels.len() != n0 {
        return Err(MeraError::Dimension { expected: n0, found: labelling.labels.len() });
    }
    let d = net.site_dim();
    // label masks of scale sites and of intermediate legs, per layer
    let mut site_masks: Vec<Vec<u16>> = vec![labelling.labels.iter().map(|&l| 1u16 << l).collect()];
    let mut mid_masks: Vec<Vec<u16>> = vec![Vec::new()];
    for k in 1..=s {
        let lo = &site_masks[k - 1];
        let mut mid = vec![0u16; lo.len()];
        for (a, b) in disentangler_pairs(lo.len()) {
            let m = lo[a] | lo[b];
            mid[a] = m;
            mid[b] = m;
        }
        let hi: Vec<u16> = (0..lo.len() / 2).map(|j| mid[2 * j] | mid[2 * j + 1]).collect();
        mid_masks.push(mid);
        site_masks.push(hi);
    }
    let label_of = |mask: u16| mask.trailing_zeros() as u8;

    let n_s = net.n_sites(s);
    let top_dim = d.pow(n_s as u32);
    let (mut tensor, mut legs) = top_tensor(input, d, n_s, top_dim)?;
    let freeze = |legs: &mut Vec<Live>, scale: usize, masks: &[u16]| {
        for leg in legs.iter_mut() {
            if let Live::Site(j) = *leg {
                if labelling.frozen(masks[j]) {
                    *leg = Live::Done(ConeLeg::Frozen { label: label_of(masks[j]), scale, index: j, mid: false });
                }
            }
        }
    };
    freeze(&mut legs, s, &site_masks[s]);
    check_size(legs.len())?;

    for k in (1..=s).rev() {
        let n_hi = net.n_sites(k);
        for j in 0..n_hi {
            let Some(p) = legs.iter().position(|&l| l == Live::Site(j)) else { continue };
            tensor = tensor.apply(&[p], net.v_matrix(), &[d, d])?;
            legs.remove(p);
            legs.splice(0..0, [Live::Mid(2 * j), Live::Mid(2 * j + 1)]);
            check_size(legs.len())?;
        }
        let mids = &mid_masks[k];
        for (a, b) in disentangler_pairs(net.n_sites(k - 1)) {
            if labelling.frozen(mids[a]) {
                for x in [a, b] {
                    if let Some(p) = legs.iter().position(|&l| l == Live::Mid(x)) {
                        legs[p] = Live::Done(ConeLeg::Frozen { label: label_of(mids[x]), scale: k - 1, index: x, mid: true });
                    }
                }
                continue;
            }
            let pa = legs.iter().position(|&l| l == Live::Mid(a)).expect("mixed leg is live");
            let pb = legs.iter().position(|&l| l == Live::Mid(b)).expect("mixed leg is live");
            tensor = tensor.apply(&[pa, pb], net.u_matrix(), &[d, d])?;
            legs.retain(|&l| l != Live::Mid(a) && l != Live::Mid(b));
            legs.splice(0..0, [Live::Site(a), Live::Site(b)]);
        }
        for leg in legs.iter_mut() {
            if let Live::Mid(x) = *leg {
                *leg = Live::Site(x);
            }
        }
        freeze(&mut legs, k - 1, &site_masks[k - 1]);
    }
    let legs = legs
        .into_iter()
        .map(|l| match l {
            Live::Site(x) => ConeLeg::Physical { site: x, label: labelling.labels[x] },
            Live::Done(c) => c,
            Live::Mid(_) => unreachable!("all intermediate legs resolved"),
        })
        .collect();
    Ok(ConeState { tensor, legs })
}

fn check_size(n_legs: usize) -> Result<(), MeraError> {
    if n_legs > MAX_LEGS {
        return Err(MeraError::TooLarge { sites: n_legs, site_dim: 2 });
    }
    Ok(())
}

fn top_tensor(input: &TopInput, d: usize, n_s: usize, top_dim: usize) -> Result<(Tensor, Vec<Live>), MeraError> {
    let sites: Vec<Live> = (0..n_s).map(Live::Site).collect();
    let with_reference = |m: CMat| -> Result<(Tensor, Vec<Live>), MeraError> {
        let mut shape = vec![d; 2 * n_s];
        if n_s == 0 {
            shape.clear();
        }
        let t = Tensor::from_matrix(&m, shape)?;
        let mut legs = sites.clone();
        legs.extend((0..n_s).map(|j| Live::Done(ConeLeg::Reference(j))));
        Ok((t, legs))
    };
    match input {
        TopInput::Choi => {
            let m = CMat::identity(top_dim, top_dim) * C64::new(1.0 / (top_dim as f64).sqrt(), 0.0);
            with_reference(m)
        }
        TopInput::Pure(phi) => {
            if phi.len() != top_dim {
                return Err(MeraError::Dimension { expected: top_dim, found: phi.len() });
            }
            Ok((Tensor::new(vec![d; n_s], phi.clone())?, sites))
        }
        TopInput::Purified { rho, u_r } => {
            if rho.shape() != (top_dim, top_dim) {
                return Err(MeraError::Dimension { expected: top_dim, found: rho.nrows() });
            }
            if let Some(why) = linalg::state_violation(rho, 1e-10) {
                return Err(MeraError::State(why));
            }
            let sqrt = linalg::psd_sqrt(rho);
            let m = match u_r {
                Some(u) => linalg::matmul(&sqrt, &u.transpose()),
                None => sqrt,
            };
            with_reference(m)
        }
    }
}

impl ConeState {
    pub fn legs(&self) -> &[ConeLeg] {
        &self.legs
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn norm(&self) -> f64 {
        self.tensor.norm()
    }

    /// Legs selected by `group`, in canonical order.
    pub fn group_legs(&self, group: LegGroup) -> Vec<ConeLeg> {
        let mut v: Vec<ConeLeg> = self.legs.iter().copied().filter(|l| group.matches(l)).collect();
        v.sort();
        v
    }

    pub fn group_dim(&self, group: LegGroup) -> usize {
        self.legs
            .iter()
            .enumerate()
            .filter(|(_, l)| group.matches(l))
            .map(|(k, _)| self.tensor.shape()[k])
            .product()
    }

    /// Permute and fuse the legs into one index per group. Each leg must be
    /// selected by exactly one group.
    pub fn fuse(&self, groups: &[LegGroup]) -> Result<Tensor, MeraError> {
        let mut perm = Vec::with_capacity(self.legs.len());
        let mut dims = Vec::with_capacity(groups.len());
        for g in groups {
            let legs = self.group_legs(*g);
            let mut dim = 1;
            for leg in legs {
                let p = self.legs.iter().position(|&l| l == leg).expect("leg present");
                if perm.contains(&p) {
                    return Err(MeraError::Support(format!("leg {leg:?} selected twice")));
                }
                dim *= self.tensor.shape()[p];
                perm.push(p);
            }
            dims.push(dim);
        }
        if perm.len() != self.legs.len() {
            return Err(MeraError::Support("leg groups do not cover the state".into()));
        }
        Ok(self.tensor.permute(&perm)?.reshape(dims)?)
    }

    /// Matrix with the listed legs (in that order) as rows and the remaining
    /// legs, in their stored order, as columns.
    pub fn matrix_of(&self, rows: &[ConeLeg]) -> Result<CMat, MeraError> {
        let mut perm = Vec::with_capacity(self.legs.len());
        for leg in rows {
            let p = self
                .legs
                .iter()
                .position(|l| l == leg)
                .ok_or_else(|| MeraError::Support(format!("leg {leg:?} not in the state")))?;
            if perm.contains(&p) {
                return Err(MeraError::Support(format!("leg {leg:?} selected twice")));
            }
            perm.push(p);
        }
        perm.extend((0..self.legs.len()).filter(|k| !perm.contains(k)).collect::<Vec<_>>());
        Ok(self.tensor.permute(&perm)?.matrix(rows.len()))
    }

    /// Act with `m` on the fused reference legs, leaving a single reference
    /// leg of dimension `m.nrows()`.
    pub fn apply_reference(&self, m: &CMat) -> Result<ConeState, MeraError> {
        let refs = self.group_legs(LegGroup::Reference);
        let pos: Vec<usize> = refs.iter().map(|r| self.legs.iter().position(|l| l == r).expect("leg")).collect();
        let tensor = self.tensor.apply(&pos, m, &[m.nrows()])?;
        let mut legs = vec![ConeLeg::Reference(0)];
        legs.extend(self.legs.iter().enumerate().filter(|(k, _)| !pos.contains(k)).map(|(_, &l)| l));
        Ok(ConeState { tensor, legs })
    }
}
