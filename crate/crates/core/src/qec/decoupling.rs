//! Correlations between an erased region and the purifying space.
//!
//! For the Choi codeword the reference sites outside the top of the past
//! causal cone of `A` only carry a maximally mixed factor:
//! `rho^{AR} = rho^{A R_in} (x) I / d_out`, and `rho^A (x) rho^R` factors the
//! same way, so the trace norm of the difference is computed on `A R_in`.

use serde::{Deserialize, Serialize};

use super::distance::{state_factor, Distances};
use super::{CodeSpec, QecError, QecResult};
use crate::haar::{derive_seed, GaussianSource};
use crate::linalg::{eigvalsh, kron, operator_norm, partial_trace, CMat};
use crate::mera::{cone_state, ConeLeg, ConeState, Labelling, LegGroup, Region, TopInput};

const LABEL_A: u8 = 0;
const LABEL_B: u8 = 1;
const LABEL_C: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum DefectOperator {
    /// Maximum over `samples` seeded unit-norm product operators
    /// `O_A (x) O_R` together with the polar unitary of the difference,
    /// which attains the trace norm.
    WorstSampled { samples: usize, seed: u64 },
    /// A fixed operator on `A (x) R` with `R` the full logical reference;
    /// evaluated on the maximally entangled codeword only.
    Given(CMat),
}

impl Default for DefectOperator {
    fn default() -> Self {
        DefectOperator::WorstSampled { samples: 64, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecouplingResult {
    /// Maximum over codewords.
    pub defect: f64,
    /// `|| rho^{AR} - rho^A (x) rho^R ||_1` of the worst codeword.
    pub trace_norm: f64,
    /// Largest value over the sampled product operators.
    pub sampled_max: f64,
    pub per_codeword: Vec<f64>,
}

/// `rho^{AR} - rho^A (x) rho^R` for a state on `a_dim x r_dim`.
pub fn correlation_matrix(rho_ar: &CMat, a_dim: usize, r_dim: usize) -> CMat {
    let dims = [a_dim, r_dim];
    let rho_a = partial_trace(rho_ar, &dims, &[0]);
    let rho_r = partial_trace(rho_ar, &dims, &[1]);
    rho_ar - kron(&rho_a, &rho_r)
}

fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

fn unit_norm_operator(g: &mut GaussianSource, n: usize) -> CMat {
    let m = g.matrix(n, n);
    let nrm = operator_norm(&m);
    m.unscale(nrm)
}

/// Largest `|tr[Delta (O_A (x) O_R)]|` over seeded unit-norm factors.
pub fn sampled_correlation(delta: &CMat, a_dim: usize, r_dim: usize, samples: usize, seed: u64) -> f64 {
    let mut best: f64 = 0.0;
    for k in 0..samples as u64 {
        let mut g = GaussianSource::new(derive_seed(seed, k));
        let o = kron(&unit_norm_operator(&mut g, a_dim), &unit_norm_operator(&mut g, r_dim));
        best = best.max((delta * o).trace().norm());
    }
    best
}

fn check_region(code: &CodeSpec, a: &Region) -> QecResult<()> {
    code.check_physical(a)?;
    if !a.is_simply_connected() {
        return Err(QecError::NotSimplyConnected(a.sites().to_vec()));
    }
    Ok(())
}

fn reference_legs(cs: &ConeState, only: Option<&[usize]>) -> Vec<ConeLeg> {
    cs.group_legs(LegGroup::Reference)
        .into_iter()
        .filter(|l| match (only, l) {
            (Some(sites), ConeLeg::Reference(j)) => sites.contains(j),
            _ => true,
        })
        .collect()
}

/// `rho^{A R'}` and the reference dimension, with `R'` the listed
/// reference legs.
fn reduced_ar(cs: &ConeState, refs: &[ConeLeg]) -> QecResult<(CMat, usize, usize)> {
    let phys = cs.group_legs(LegGroup::Physical(LABEL_A));
    let a_dim = cs.group_dim(LegGroup::Physical(LABEL_A));
    let mut rows = phys;
    rows.extend_from_slice(refs);
    let m = cs.matrix_of(&rows)?;
    let r_dim = m.nrows() / a_dim;
    Ok((&m * m.adjoint(), a_dim, r_dim))
}

pub fn decoupling_defect(code: &CodeSpec, a: &Region, op: &DefectOperator) -> QecResult<DecouplingResult> {
    check_region(code, a)?;
    let net = code.net();
    let labels = Labelling::from_regions(code.n_phys(), &[(a, LABEL_A)], LABEL_B, &[LABEL_A])?;
    let choi = cone_state(net, code.scale(), &labels, &TopInput::Choi)?;
    let top_cone = code.top_cone(a)?;
    let mut per_codeword = Vec::new();
    let (mut worst_trace, mut worst_sampled): (f64, f64) = (0.0, 0.0);
    for word in code.codewords()? {
        let value = match (&word.reference_map, op) {
            (None, DefectOperator::Given(o)) => {
                let (rho, a_dim, r_dim) = reduced_ar(&choi, &reference_legs(&choi, None))?;
                if o.shape() != rho.shape() {
                    return Err(QecError::Dimension(o.nrows(), rho.nrows()));
                }
                let delta = correlation_matrix(&rho, a_dim, r_dim);
                (&delta * o).trace().norm()
            }
            (Some(_), DefectOperator::Given(_)) => continue,
            (map, DefectOperator::WorstSampled { samples, seed }) => {
                let (rho, a_dim, r_dim) = match map {
                    None => reduced_ar(&choi, &reference_legs(&choi, Some(&top_cone)))?,
                    Some(m) => {
                        let cs = choi.apply_reference(m)?;
                        reduced_ar(&cs, &reference_legs(&cs, None))?
                    }
                };
                let delta = correlation_matrix(&rho, a_dim, r_dim);
                let tn = trace_norm_hermitian(&delta);
                let sampled = sampled_correlation(&delta, a_dim, r_dim, *samples, *seed);
                worst_trace = worst_trace.max(tn);
                worst_sampled = worst_sampled.max(sampled);
                tn.max(sampled)
            }
        };
        per_codeword.push(value);
    }
    let defect = per_codeword.iter().copied().fold(0.0, f64::max);
    if matches!(op, DefectOperator::Given(_)) {
        worst_trace = defect;
    }
    Ok(DecouplingResult { defect, trace_norm: worst_trace, sampled_max: worst_sampled, per_codeword })
}

/// `B(rho^A (x) rho^{CR}, rho^{ACR})` per codeword, with `C` the complement
/// of `A B`.
pub fn decoupling_bures(code: &CodeSpec, a: &Region, b: &Region) -> QecResult<Vec<f64>> {
    code.check_physical(a)?;
    code.check_physical(b)?;
    if a.intersects(b) {
        return Err(QecError::Overlap("A and B".into()));
    }
    let labels = Labelling::from_regions(code.n_phys(), &[(a, LABEL_A), (b, LABEL_B)], LABEL_C, &[LABEL_A])?;
    let choi = cone_state(code.net(), code.scale(), &labels, &TopInput::Choi)?;
    let mut out = Vec::new();
    for word in code.codewords()? {
        let cs = match &word.reference_map {
            None => choi.clone(),
            Some(m) => choi.apply_reference(m)?,
        };
        out.push(bures_acr(&cs)?);
    }
    Ok(out)
}

fn bures_acr(cs: &ConeState) -> QecResult<f64> {
    let phys = cs.group_legs(LegGroup::Physical(LABEL_A));
    let mut cr = cs.group_legs(LegGroup::Label(LABEL_C));
    cr.extend(cs.group_legs(LegGroup::Reference));
    let mut acr = phys.clone();
    acr.extend_from_slice(&cr);
    let x = cs.matrix_of(&acr)?;
    let y = cs.matrix_of(&cr)?;
    let m_a = cs.matrix_of(&phys)?;
    let f_a = state_factor(&(&m_a * m_a.adjoint()));
    let product = kron(&f_a, &y);
    Ok(Distances::between_factors(&product, &x)?.bures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, reduced_state};
    use crate::mera::{descend, purified_top, MeraNetwork};
    use crate::qec::CodewordSampler;

    fn choi_only() -> CodewordSampler {
        CodewordSampler { maximally_entangled: true, random_pure: 0, seed: 0 }
    }

    /// Dense Choi purification on all physical sites plus the reference.
    fn dense_choi(net: &MeraNetwork, s: usize) -> (Vec<num_complex::Complex64>, Vec<usize>) {
        let dim = net.dense_dim(s).unwrap();
        let rho = CMat::identity(dim, dim).unscale(dim as f64);
        let phys = descend(net, &purified_top(net, &rho, None, s).unwrap(), 0).unwrap();
        let mut dims = vec![net.site_dim(); net.n_phys()];
        dims.push(dim);
        (phys.amplitudes, dims)
    }

    #[test]
    fn trivial_network_has_no_correlations() {
        let net = MeraNetwork::trivial(2, 4, 1).unwrap();
        let code = CodeSpec::new(net, 4, CodewordSampler::default()).unwrap();
        for start in [3isize, 6, 11] {
            let a = Region::interval(0, 16, start, 2).unwrap();
            let r = decoupling_defect(&code, &a, &DefectOperator::default()).unwrap();
            assert!(r.defect < 1e-10, "start {start}: {}", r.defect);
        }
    }

    #[test]
    fn cone_reduction_matches_dense_trace_norm() {
        let net = MeraNetwork::haar(2, 4, 1, 21).unwrap();
        let s = 2;
        let code = CodeSpec::new(net.clone(), s, choi_only()).unwrap();
        let a = Region::interval(0, 16, 5, 2).unwrap();
        let r = decoupling_defect(&code, &a, &DefectOperator::default()).unwrap();
        let (psi, dims) = dense_choi(&net, s);
        let rho = reduced_state(&psi, &dims, &[5, 6, 16]);
        let dense = trace_norm_hermitian(&correlation_matrix(&rho, 4, dims[16]));
        assert!((r.trace_norm - dense).abs() < 1e-10, "{} vs {dense}", r.trace_norm);
        assert!(r.sampled_max <= r.trace_norm + 1e-12);
    }

    #[test]
    fn identity_code_given_operator_matches_direct() {
        // s = 0: the code is the whole physical space, A one site.
        let net = MeraNetwork::haar(2, 2, 1, 3).unwrap();
        let code = CodeSpec::new(net.clone(), 0, choi_only()).unwrap();
        let a = Region::new(0, 4, vec![1]).unwrap();
        let (psi, dims) = dense_choi(&net, 0);
        let rho = reduced_state(&psi, &dims, &[1, 4]);
        let delta = correlation_matrix(&rho, 2, 16);
        let (vals, vecs) = eigh(&delta);
        let signs = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| crate::linalg::c(v.signum())),
        ));
        let polar = &vecs * signs * vecs.adjoint();
        let direct = (&delta * &polar).trace().norm();
        let r = decoupling_defect(&code, &a, &DefectOperator::Given(polar)).unwrap();
        assert!((r.defect - direct).abs() < 1e-12);
        // one site maximally entangled with its reference copy: 2 - 2/4
        assert!((direct - 1.5).abs() < 1e-10);
    }

    #[test]
    fn pure_codewords_carry_no_reference_correlation() {
        let net = MeraNetwork::haar(2, 3, 1, 5).unwrap();
        let sampler = CodewordSampler { maximally_entangled: false, random_pure: 4, seed: 9 };
        let code = CodeSpec::new(net, 3, sampler).unwrap();
        let a = Region::new(0, 8, vec![2]).unwrap();
        let r = decoupling_defect(&code, &a, &DefectOperator::default()).unwrap();
        assert!(r.defect < 1e-12);
    }

    #[test]
    fn disconnected_region_flagged() {
        let code = CodeSpec::new(MeraNetwork::haar(2, 3, 1, 5).unwrap(), 3, choi_only()).unwrap();
        let a = Region::new(0, 8, vec![1, 4]).unwrap();
        assert!(matches!(
            decoupling_defect(&code, &a, &DefectOperator::default()),
            Err(QecError::NotSimplyConnected(_))
        ));
    }

    #[test]
    fn bures_matches_dense() {
        let net = MeraNetwork::haar(2, 3, 1, 23).unwrap();
        let s = 2;
        let code = CodeSpec::new(net.clone(), s, CodewordSampler { maximally_entangled: true, random_pure: 2, seed: 1 })
            .unwrap();
        let a = Region::new(0, 8, vec![0]).unwrap();
        let b = Region::new(0, 8, vec![7, 1]).unwrap();
        let got = decoupling_bures(&code, &a, &b).unwrap();
        let (psi, dims) = dense_choi(&net, s);
        // C = 2..=6, reference = leg 8
        let keep_cr: Vec<usize> = (2..=6).chain([8]).collect();
        let mut keep_acr = vec![0];
        keep_acr.extend(&keep_cr);
        let rho_acr = reduced_state(&psi, &dims, &keep_acr);
        let rho_a = reduced_state(&psi, &dims, &[0]);
        let rho_cr = reduced_state(&psi, &dims, &keep_cr);
        let dense = Distances::between(&kron(&rho_a, &rho_cr), &rho_acr).unwrap();
        // the dense oracle takes square roots of rank-deficient marginals,
        // which limits it to about 1e-8
        assert!((got[0] - dense.bures).abs() < 1e-7, "{} vs {}", got[0], dense.bures);
        assert!(got.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}
