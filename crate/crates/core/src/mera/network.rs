//! Scale-invariant binary MERA on a periodic chain.
//!
//! Scale `k` has `n_k = base_sites * 2^(num_layers - k)` sites; scale 0 is
//! physical. The layer map `W_k : H_k -> H_{k-1}` acts in two steps:
//!
//! ```text
//!  scale k      j                 j+1
//!               |                  |
//!             [ V ]              [ V ]          V: site j -> legs (2j, 2j+1)
//!             /    \             /    \
//!  legs     2j    2j+1        2j+2    2j+3
//!                   \         /
//!                   [    U    ]                 U: legs (2j+1, 2j+2 mod n)
//!                   /         \
//!  scale k-1     2j+1        2j+2
//! ```
//!
//! As matrices, `U` is `d^2 x d^2` with row index `out_left * d + out_right`
//! and column index `in_left * d + in_right`, where "left" is leg `2j+1`;
//! `V` is `d^2 x d` with row index `out_left * d + out_right` for legs
//! `(2j, 2j+1)`. When `n_{k-1} = 2` the single disentangler acts on the
//! ordered pair `(1, 0)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{MeraError, Region};
use crate::haar::{derive_seed, haar_isometry_matrix};
use crate::linalg::{self, CMat};
use crate::tensor::Tensor;

const CONSTRUCTION_TOL: f64 = 1e-8;

/// Where the tensors of a network came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeraNetwork {
    site_dim: usize,
    u: CMat,
    v: CMat,
    num_layers: usize,
    base_sites: usize,
    provenance: Option<Provenance>,
}

impl MeraNetwork {
    /// Validate and assemble a network from a disentangler and an isometry.
    ///
    /// `u` holds `d^4` amplitudes (the `d^2 x d^2` matrix row-major) and `v`
    /// holds `d^3` (the `d^2 x d` matrix row-major); any leg shape works.
    pub fn build(
        site_dim: usize,
        u: &Tensor,
        v: &Tensor,
        num_layers: usize,
        base_sites: usize,
    ) -> Result<Self, MeraError> {
        let d = site_dim;
        if d < 2 {
            return Err(MeraError::Construction(format!("site_dim must be at least 2, got {d}")));
        }
        if num_layers < 1 || base_sites < 1 {
            return Err(MeraError::Construction("need at least one layer and one top site".into()));
        }
        if u.len() != d.pow(4) || v.len() != d.pow(3) {
            return Err(MeraError::Construction(format!(
                "tensor sizes {} and {} do not fit site_dim {d}",
                u.len(),
                v.len()
            )));
        }
        let um = CMat::from_row_slice(d * d, d * d, u.data());
        let vm = CMat::from_row_slice(d * d, d, v.data());
        Self::from_matrices(d, um, vm, num_layers, base_sites, None)
    }

    pub fn from_matrices(
        site_dim: usize,
        u: CMat,
        v: CMat,
        num_layers: usize,
        base_sites: usize,
        provenance: Option<Provenance>,
    ) -> Result<Self, MeraError> {
        let d = site_dim;
        if u.shape() != (d * d, d * d) || v.shape() != (d * d, d) {
            return Err(MeraError::Construction("matrix shapes do not fit site_dim".into()));
        }
        let du = linalg::isometry_defect(&u).max(linalg::isometry_defect(&u.adjoint()));
        if du > CONSTRUCTION_TOL {
            return Err(MeraError::Construction(format!("disentangler is not unitary (defect {du:e})")));
        }
        let dv = linalg::isometry_defect(&v);
        if dv > CONSTRUCTION_TOL {
            return Err(MeraError::Construction(format!("isometry fails V^dag V = I (defect {dv:e})")));
        }
        if num_layers < 1 || base_sites < 1 {
            return Err(MeraError::Construction("need at least one layer and one top site".into()));
        }
        if num_layers > 24 {
            return Err(MeraError::Construction(format!("{num_layers} layers is beyond supported sizes")));
        }
        Ok(Self { site_dim, u, v, num_layers, base_sites, provenance })
    }

    /// Network with Haar-random `U` and `V` derived from one seed.
    pub fn haar(site_dim: usize, num_layers: usize, base_sites: usize, seed: u64) -> Result<Self, MeraError> {
        let d2 = site_dim * site_dim;
        let u = haar_isometry_matrix(d2, d2, derive_seed(seed, 1))?;
        let v = haar_isometry_matrix(d2, site_dim, derive_seed(seed, 2))?;
        let prov = Provenance { kind: "haar".into(), seed: Some(seed) };
        Self::from_matrices(site_dim, u, v, num_layers, base_sites, Some(prov))
    }

    /// `U = I`, `V|i> = |i>|0>`: the logical state rides on one site per
    /// layer and every other site is `|0>`.
    pub fn trivial(site_dim: usize, num_layers: usize, base_sites: usize) -> Result<Self, MeraError> {
        let d = site_dim;
        let u = CMat::identity(d * d, d * d);
        let mut v = CMat::zeros(d * d, d);
        for i in 0..d {
            v[(i * d, i)] = C64::new(1.0, 0.0);
        }
        let prov = Provenance { kind: "trivial".into(), seed: None };
        Self::from_matrices(d, u, v, num_layers, base_sites, Some(prov))
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn base_sites(&self) -> usize {
        self.base_sites
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn u_matrix(&self) -> &CMat {
        &self.u
    }

    pub fn v_matrix(&self) -> &CMat {
        &self.v
    }

    /// `U` with legs `[out_left, out_right, in_left, in_right]`.
    pub fn disentangler(&self) -> Tensor {
        let d = self.site_dim;
        Tensor::from_matrix(&self.u, vec![d, d, d, d]).expect("shape")
    }

    /// `V` with legs `[out_left, out_right, in]`.
    pub fn isometry(&self) -> Tensor {
        let d = self.site_dim;
        Tensor::from_matrix(&self.v, vec![d, d, d]).expect("shape")
    }

    pub fn n_phys(&self) -> usize {
        self.n_sites(0)
    }

    /// Number of sites at `scale`.
    pub fn n_sites(&self, scale: usize) -> usize {
        self.base_sites << (self.num_layers - scale)
    }

    pub(crate) fn check_scale(&self, scale: usize) -> Result<(), MeraError> {
        if scale > self.num_layers {
            return Err(MeraError::Scale { scale, max: self.num_layers });
        }
        Ok(())
    }

    /// Layer map `W_1 ... W_s` as a dense `d^{n_0} x d^{n_s}` matrix.
    pub fn encoder_matrix(&self, s: usize) -> Result<CMat, MeraError> {
        self.check_scale(s)?;
        let top = self.site_dim.pow(self.n_sites(s) as u32);
        let phys = self.dense_dim(0)?;
        let mut w = CMat::zeros(phys, top);
        for i in 0..top {
            let mut e = vec![C64::new(0.0, 0.0); top];
            e[i] = C64::new(1.0, 0.0);
            let col = super::encode::encode_state(self, &e, s)?;
            w.column_mut(i).copy_from_slice(&col);
        }
        Ok(w)
    }

    /// Hilbert-space dimension at `scale`, refusing sizes beyond `2^22`.
    pub fn dense_dim(&self, scale: usize) -> Result<usize, MeraError> {
        let n = self.n_sites(scale);
        let bits = (self.site_dim as f64).log2() * n as f64;
        if bits > 22.0 + 1e-9 {
            return Err(MeraError::TooLarge { sites: n, site_dim: self.site_dim });
        }
        Ok(self.site_dim.pow(n as u32))
    }
}

/// Partner of `site` under the disentangler layer on an `n`-site chain,
/// returned as the ordered pair `(left, right)` the disentangler acts on.
pub fn disentangler_pair(site: usize, n: usize) -> (usize, usize) {
    if n == 1 {
        return (0, 0);
    }
    if site % 2 == 1 {
        (site, (site + 1) % n)
    } else {
        ((site + n - 1) % n, site)
    }
}

/// All disentangler pairs `(2j+1, 2j+2 mod n)` on an `n`-site chain.
pub fn disentangler_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|j| (2 * j + 1, (2 * j + 2) % n)).collect()
}

/// One step of the past causal cone from scale `k` (with `n` sites) to
/// scale `k + 1`. Returns the sites touched by disentanglers at scale `k`
/// and the coarse sites whose isometries feed them.
pub fn cone_step(sites: &[usize], n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut expanded: Vec<usize> = Vec::with_capacity(2 * sites.len());
    for &x in sites {
        let (a, b) = disentangler_pair(x, n);
        expanded.push(a);
        expanded.push(b);
    }
    expanded.sort_unstable();
    expanded.dedup();
    let mut upper: Vec<usize> = expanded.iter().map(|&x| x / 2).collect();
    upper.dedup();
    (expanded, upper)
}

/// Past causal cone of `a` from its scale up to `s_to`, one region per
/// scale (the starting region first).
pub fn causal_cone(net: &MeraNetwork, a: &Region, s_to: usize) -> Result<Vec<Region>, MeraError> {
    let s = a.scale();
    net.check_scale(s_to)?;
    if s_to < s {
        return Err(MeraError::Scale { scale: s_to, max: net.num_layers() });
    }
    if a.modulus() != net.n_sites(s) {
        return Err(MeraError::SiteRange { site: a.modulus(), modulus: net.n_sites(s), scale: s });
    }
    let mut out = vec![a.clone()];
    for k in s..s_to {
        let (_, upper) = cone_step(out.last().expect("nonempty").sites(), net.n_sites(k));
        out.push(Region::new(k + 1, net.n_sites(k + 1), upper)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashMap};

    #[test]
    fn haar_network_is_valid() {
        let net = MeraNetwork::haar(2, 4, 1, 0).unwrap();
        assert_eq!(net.n_phys(), 16);
        for s in 0..=4 {
            assert_eq!(net.n_sites(s), 16 >> s);
        }
        assert!(linalg::isometry_defect(net.u_matrix()) < 1e-10);
        assert!(linalg::isometry_defect(net.v_matrix()) < 1e-10);
    }

    #[test]
    fn non_isometric_v_rejected() {
        let mut v = Tensor::zeros(vec![4, 2]);
        v.data_mut()[0] = C64::new(2.0, 0.0);
        let u = Tensor::identity(&[4]);
        assert!(matches!(MeraNetwork::build(2, &u, &v, 2, 1), Err(MeraError::Construction(_))));
    }

    #[test]
    fn single_site_cone_stays_narrow() {
        let net = MeraNetwork::haar(2, 4, 1, 1).unwrap();
        for x in 0..16 {
            let a = Region::new(0, 16, vec![x]).unwrap();
            for r in causal_cone(&net, &a, 4).unwrap() {
                assert!(r.len() <= 3, "site {x}: cone {r:?}");
            }
        }
    }

    #[test]
    fn full_chain_cone_is_full() {
        let net = MeraNetwork::haar(2, 4, 1, 1).unwrap();
        for r in causal_cone(&net, &Region::full(0, 16), 4).unwrap() {
            assert_eq!(r.len(), net.n_sites(r.scale()));
        }
    }

    /// Reachability over an explicitly drawn graph of the network. Nodes are
    /// tensors; a tensor is in the cone if one of its output legs is.
    fn graph_cone(base: usize, layers: usize, start: &[usize]) -> Vec<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
        enum Leg {
            Site(usize, usize),
            Mid(usize, usize),
        }
        // edges from a tensor's outputs to its inputs
        let mut feeds: HashMap<Leg, Vec<Leg>> = HashMap::new();
        for k in 1..=layers {
            let n_lo = base << (layers - k + 1);
            for j in 0..n_lo / 2 {
                let (l, r) = (2 * j + 1, (2 * j + 2) % n_lo);
                for out in [l, r] {
                    feeds.entry(Leg::Site(k - 1, out)).or_default().extend([Leg::Mid(k, l), Leg::Mid(k, r)]);
                }
            }
            for j in 0..n_lo / 2 {
                for out in [2 * j, 2 * j + 1] {
                    feeds.entry(Leg::Mid(k, out)).or_default().push(Leg::Site(k, j));
                }
            }
        }
        let mut frontier: BTreeSet<Leg> = start.iter().map(|&x| Leg::Site(0, x)).collect();
        let mut out = vec![start.to_vec()];
        for k in 1..=layers {
            let mids: BTreeSet<Leg> = frontier.iter().flat_map(|l| feeds[l].clone()).collect();
            frontier = mids.iter().flat_map(|l| feeds[l].clone()).collect();
            out.push(
                frontier
                    .iter()
                    .map(|l| match l {
                        Leg::Site(kk, x) if *kk == k => *x,
                        _ => unreachable!(),
                    })
                    .collect(),
            );
        }
        out
    }

    #[test]
    fn interval_cone_matches_graph_search() {
        let net = MeraNetwork::haar(2, 5, 1, 2).unwrap();
        for start in [0isize, 3, 13, 27] {
            let a = Region::interval(0, 32, start, 8).unwrap();
            let cone = causal_cone(&net, &a, 5).unwrap();
            let oracle = graph_cone(1, 5, a.sites());
            let widths: Vec<usize> = cone.iter().map(|r| r.len()).collect();
            for (r, want) in cone.iter().zip(&oracle) {
                assert_eq!(r.sites(), want.as_slice());
            }
            for w in widths.windows(2) {
                assert!(w[1] <= w[0].div_ceil(2) + 2);
            }
            assert!(widths.iter().any(|&w| w <= 3));
        }
    }
}
