//! Exact dynamics of small chains, Lieb-Robinson truncation, logical
//! operators of the code family and the scale-separation commutator bound.
//!
//! Everything is dense: chains are limited to `site_dim^n <= 2^14`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{adjoint_mul, c, eigh, eigvalsh, hermitian_defect, matmul, operator_norm, CMat};
use crate::mera::{LocalOperator, MeraError, MeraNetwork, Region};
use crate::qec::{BoundReport, CodeSpec, Constants, QecError};

/// Largest Hilbert-space dimension evolved densely.
pub const DENSE_LIMIT: usize = 1 << 14;

/// Truncation errors below this are treated as exact and left out of fits.
pub const FIT_FLOOR: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum DynamicsError {
    /// Dense exponentiation beyond [`DENSE_LIMIT`].
    #[error("dimension {dim} exceeds the dense limit {limit}; use truncated_evolution on a smaller neighbourhood")]
    TooLarge { dim: usize, limit: usize },
    /// A Hamiltonian term is not Hermitian or has an invalid support.
    #[error("invalid Hamiltonian term: {0}")]
    Term(String),
    /// Operator and chain disagree on sites or dimensions.
    #[error("support mismatch: {0}")]
    Support(String),
    /// Not enough usable samples, or the samples do not decay.
    #[error("Lieb-Robinson fit failed: {0}")]
    Fit(String),
    #[error(transparent)]
    Mera(#[from] MeraError),
    #[error(transparent)]
    Qec(#[from] QecError),
}

pub type DynResult<T> = Result<T, DynamicsError>;

fn pauli(k: usize) -> CMat {
    let (o, i) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match k {
        0 => CMat::from_row_slice(2, 2, &[o, c(1.0), c(1.0), o]),
        1 => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        _ => CMat::from_row_slice(2, 2, &[c(1.0), o, o, c(-1.0)]),
    }
}

/// Pauli `X`, `Y` or `Z` on one qubit of an `n`-site chain.
pub fn pauli_operator(axis: char, site: usize, n: usize) -> DynResult<LocalOperator> {
    let k = match axis {
        'X' | 'x' => 0,
        'Y' | 'y' => 1,
        'Z' | 'z' => 2,
        _ => return Err(DynamicsError::Support(format!("unknown Pauli axis {axis}"))),
    };
    Ok(LocalOperator::new(Region::new(0, n, vec![site])?, 2, 1, pauli(k))?)
}

/// Sum of terms on at most two sites of an `n`-site chain.
#[derive(Clone, Debug)]
pub struct LocalHamiltonian {
    n_sites: usize,
    site_dim: usize,
    terms: Vec<LocalOperator>,
}

impl LocalHamiltonian {
    /// Terms are given on sites listed in the order their matrix uses.
    pub fn new(n_sites: usize, site_dim: usize, terms: Vec<(Vec<usize>, CMat)>) -> DynResult<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (sites, m) in terms {
            if sites.is_empty() || sites.len() > 2 {
                return Err(DynamicsError::Term(format!("support {sites:?} must have one or two sites")));
            }
            if sites.len() == 2 && sites[0] == sites[1] {
                return Err(DynamicsError::Term(format!("repeated site in {sites:?}")));
            }
            let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
            if hermitian_defect(&m) > 1e-10 * scale {
                return Err(DynamicsError::Term(format!("term on {sites:?} is not Hermitian")));
            }
            let region = Region::new(0, n_sites, sites.clone())?;
            // the region stores sites ascending; swap the factors if needed
            let m = if sites.len() == 2 && sites[0] > sites[1] { swap_two_sites(&m, site_dim) } else { m };
            out.push(LocalOperator::new(region, site_dim, 1, m)?);
        }
        Ok(Self { n_sites, site_dim, terms: out })
    }

    /// `sum_i X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}` with unit couplings.
    pub fn heisenberg(n: usize, periodic: bool) -> DynResult<Self> {
        let bond: CMat = (0..3).map(|k| pauli(k).kronecker(&pauli(k))).fold(CMat::zeros(4, 4), |acc, m| acc + m);
        let last = if periodic && n > 2 { n } else { n - 1 };
        let terms = (0..last).map(|i| (vec![i, (i + 1) % n], bond.clone())).collect();
        Self::new(n, 2, terms)
    }

    /// `h sum_i Z_i`.
    pub fn z_field(n: usize, h: f64) -> DynResult<Self> {
        let terms = (0..n).map(|i| (vec![i], pauli(2) * c(h))).collect();
        Self::new(n, 2, terms)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn terms(&self) -> &[LocalOperator] {
        &self.terms
    }

    /// Largest operator norm among the terms.
    pub fn coupling_norm(&self) -> f64 {
        self.terms.iter().map(|t| operator_norm(t.matrix())).fold(0.0, f64::max)
    }

    pub fn full_region(&self) -> Region {
        Region::full(0, self.n_sites)
    }

    fn dense_size(&self, region: &Region) -> DynResult<usize> {
        let bits = (self.site_dim as f64).log2() * region.len() as f64;
        if bits > DENSE_LIMIT.ilog2() as f64 + 1e-9 {
            return Err(DynamicsError::TooLarge { dim: self.site_dim.saturating_pow(region.len() as u32), limit: DENSE_LIMIT });
        }
        Ok(self.site_dim.pow(region.len() as u32))
    }

    /// Sum of the terms supported inside `region`, on its sites in ascending order.
    pub fn dense_on(&self, region: &Region) -> DynResult<CMat> {
        if region.modulus() != self.n_sites || region.scale() != 0 {
            return Err(DynamicsError::Support("region does not belong to the chain".into()));
        }
        let dim = self.dense_size(region)?;
        let mut h = CMat::zeros(dim, dim);
        for t in self.terms.iter().filter(|t| t.region().sites().iter().all(|&x| region.contains(x))) {
            h += t.extend_to(region)?.matrix();
        }
        Ok(h)
    }

    pub fn dense(&self) -> DynResult<CMat> {
        self.dense_on(&self.full_region())
    }
}

fn swap_two_sites(m: &CMat, d: usize) -> CMat {
    let idx = |k: usize| (k % d) * d + k / d;
    CMat::from_fn(d * d, d * d, |i, j| m[(idx(i), idx(j))])
}

/// Spectral decomposition of `H` restricted to a region, reused across times.
#[derive(Clone, Debug)]
pub struct Evolver {
    region: Region,
    site_dim: usize,
    energies: Vec<f64>,
    basis: CMat,
}

impl Evolver {
    pub fn new(h: &LocalHamiltonian, region: &Region) -> DynResult<Self> {
        let (energies, basis) = eigh(&h.dense_on(region)?);
        Ok(Self { region: region.clone(), site_dim: h.site_dim, energies, basis })
    }

    pub fn full(h: &LocalHamiltonian) -> DynResult<Self> {
        Self::new(h, &h.full_region())
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvector `k` (ascending energy).
    pub fn eigenstate(&self, k: usize) -> Vec<C64> {
        self.basis.column(k).iter().copied().collect()
    }

    /// `e^{iHt} m e^{-iHt}` for a matrix on the evolver's region.
    pub fn evolve_matrix(&self, m: &CMat, t: f64) -> CMat {
        let mut inner = matmul(&adjoint_mul(&self.basis, m), &self.basis);
        for j in 0..inner.nrows() {
            for k in 0..inner.ncols() {
                inner[(j, k)] *= C64::from_polar(1.0, (self.energies[j] - self.energies[k]) * t);
            }
        }
        matmul(&matmul(&self.basis, &inner), &self.basis.adjoint())
    }

    /// Heisenberg evolution of `op`, extended to the evolver's region.
    pub fn evolve(&self, op: &LocalOperator, t: f64) -> DynResult<LocalOperator> {
        if op.aux_dim() != 1 || op.site_dim() != self.site_dim || op.region().modulus() != self.region.modulus() {
            return Err(DynamicsError::Support("operator does not live on the chain".into()));
        }
        let m = op.extend_to(&self.region)?.into_matrix();
        Ok(LocalOperator::new(self.region.clone(), self.site_dim, 1, self.evolve_matrix(&m, t))?)
    }

    /// Schrodinger evolution `e^{-iHt} psi`.
    pub fn propagate(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let v = DVector::from_column_slice(psi);
        let mut coeff = self.basis.adjoint() * v;
        for (k, z) in coeff.iter_mut().enumerate() {
            *z *= C64::from_polar(1.0, -self.energies[k] * t);
        }
        (&self.basis * coeff).iter().copied().collect()
    }
}

/// `O(t) = e^{iHt} O e^{-iHt}` on the whole chain.
pub fn evolve_operator(h: &LocalHamiltonian, op: &LocalOperator, t: f64) -> DynResult<LocalOperator> {
    Evolver::full(h)?.evolve(op, t)
}

/// `O^l(t)`: evolution under the terms inside the radius-`l` neighbourhood
/// of the support of `op`.
pub fn truncated_evolution(h: &LocalHamiltonian, op: &LocalOperator, t: f64, l: usize) -> DynResult<LocalOperator> {
    Evolver::new(h, &op.region().neighborhood(l))?.evolve(op, t)
}

fn difference_norm(x: &CMat, y: &CMat) -> f64 {
    let d = x - y;
    let scale = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if hermitian_defect(&d) <= 1e-12 * scale.max(1e-300) {
        eigvalsh(&d).iter().map(|v| v.abs()).fold(0.0, f64::max)
    } else {
        operator_norm(&d)
    }
}

/// `|| O(t) - O^l(t) ||` in operator norm, both on the whole chain.
pub fn truncation_error(full: &Evolver, h: &LocalHamiltonian, op: &LocalOperator, t: f64, l: usize) -> DynResult<f64> {
    let exact = full.evolve(op, t)?;
    let trunc = truncated_evolution(h, op, t, l)?.extend_to(full.region())?;
    Ok(difference_norm(exact.matrix(), trunc.matrix()))
}

/// Envelope `c ||O|| exp(-(l - v|t|) / xi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LRParameters {
    pub v: f64,
    pub xi: f64,
    pub c: f64,
}

impl LRParameters {
    pub fn new(v: f64, xi: f64, c: f64) -> DynResult<Self> {
        if !(v > 0.0 && xi > 0.0 && c > 0.0) || !(v.is_finite() && xi.is_finite() && c.is_finite()) {
            return Err(DynamicsError::Fit(format!("parameters must be positive: v={v}, xi={xi}, c={c}")));
        }
        Ok(Self { v, xi, c })
    }

    /// Envelope for a unit-norm operator.
    pub fn envelope(&self, l: f64, t: f64) -> f64 {
        self.c * (-(l - self.v * t.abs()) / self.xi).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LRSample {
    pub l: usize,
    pub t: f64,
    /// `|| O(t) - O^l(t) || / ||O||`.
    pub error: f64,
}

/// Truncation errors over an `(l, t)` grid.
pub fn lr_samples(h: &LocalHamiltonian, op: &LocalOperator, ls: &[usize], ts: &[f64]) -> DynResult<Vec<LRSample>> {
    let full = Evolver::full(h)?;
    let norm = operator_norm(op.matrix());
    let mut out = Vec::with_capacity(ls.len() * ts.len());
    for &l in ls {
        let local = Evolver::new(h, &op.region().neighborhood(l))?;
        for &t in ts {
            let exact = full.evolve(op, t)?;
            let trunc = local.evolve(op, t)?.extend_to(full.region())?;
            out.push(LRSample { l, t, error: difference_norm(exact.matrix(), trunc.matrix()) / norm });
        }
    }
    Ok(out)
}

/// Least squares of `log err = a + b l + e |t|` over samples above
/// [`FIT_FLOOR`]; `xi = -1/b`, `v = e xi`, and the prefactor starts at
/// `exp(a)` and is raised until the envelope covers every sample.
pub fn fit_lieb_robinson(samples: &[LRSample]) -> DynResult<LRParameters> {
    let used: Vec<&LRSample> = samples.iter().filter(|s| s.error > FIT_FLOOR).collect();
    if used.len() < 3 {
        return Err(DynamicsError::Fit(format!("{} usable samples, need 3", used.len())));
    }
    let design = DMatrix::from_fn(used.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => used[i].l as f64,
        _ => used[i].t.abs(),
    });
    let rhs = DVector::from_iterator(used.len(), used.iter().map(|s| s.error.ln()));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| DynamicsError::Fit(e.to_string()))?;
    let (a, b, e) = (coef[0], coef[1], coef[2]);
    if b >= 0.0 {
        return Err(DynamicsError::Fit(format!("error does not decay with l (slope {b})")));
    }
    let xi = -1.0 / b;
    let v = e * xi;
    let trial = LRParameters::new(v, xi, 1.0)?;
    let cover = used.iter().map(|s| s.error / trial.envelope(s.l as f64, s.t)).fold(0.0, f64::max);
    LRParameters::new(v, xi, a.exp().max(cover))
}

/// Image `W O W^dag` of a scale-`s` operator on the physical chain.
#[derive(Clone, Debug)]
pub struct LogicalOperator {
    pub scale: usize,
    pub matrix: CMat,
    /// Set when the input was the identity, whose image is the code projector.
    pub is_code_projector: bool,
}

/// `W_1 ... W_s O W_s^dag ... W_1^dag` with `O` extended by identities to
/// the whole scale-`s` chain.
pub fn logical_operator(net: &MeraNetwork, s: usize, op: &LocalOperator) -> DynResult<LogicalOperator> {
    let region = op.region();
    if region.scale() != s || region.modulus() != net.n_sites(s) || op.site_dim() != net.site_dim() || op.aux_dim() != 1 {
        return Err(DynamicsError::Support(format!("operator does not act on the scale-{s} chain")));
    }
    let full = op.extend_to(&Region::full(s, net.n_sites(s)))?.into_matrix();
    net.dense_dim(0)?;
    let w = net.encoder_matrix(s)?;
    let is_code_projector = (&full - CMat::identity(full.nrows(), full.ncols())).iter().all(|z| z.norm() == 0.0);
    let matrix = matmul(&matmul(&w, &full), &w.adjoint());
    Ok(LogicalOperator { scale: s, matrix, is_code_projector })
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn apply(m: &CMat, v: &[C64]) -> Vec<C64> {
    (m * DVector::from_column_slice(v)).iter().copied().collect()
}

/// `<x| [A, B] |y>` from matrix-vector products.
fn commutator_element(x: &[C64], a: &CMat, b: &CMat, y: &[C64]) -> C64 {
    dot(x, &apply(a, &apply(b, y))) - dot(x, &apply(b, &apply(a, y)))
}

/// Dense ingredients shared by the commutator sweep.
struct Lightcone {
    encoder: CMat,
    o2: CMat,
    rho0: Vec<C64>,
    sigma0: Vec<C64>,
    evolver: Evolver,
}

impl Lightcone {
    fn new(code: &CodeSpec, h: &LocalHamiltonian, o2_s: &LocalOperator, rho_top: &[C64], sigma_top: &[C64]) -> DynResult<Self> {
        let net = code.net();
        if h.n_sites() != net.n_phys() || h.site_dim() != net.site_dim() {
            return Err(DynamicsError::Support("Hamiltonian and code live on different chains".into()));
        }
        let dim = code.logical_dim()?;
        for v in [rho_top, sigma_top] {
            if v.len() != dim {
                return Err(DynamicsError::Support(format!("top state of length {} on a {dim}-dimensional code", v.len())));
            }
        }
        let o2 = logical_operator(net, code.scale(), o2_s)?.matrix;
        let encoder = net.encoder_matrix(code.scale())?;
        let rho0 = apply(&encoder, rho_top);
        let sigma0 = apply(&encoder, sigma_top);
        Ok(Self { encoder, o2, rho0, sigma0, evolver: Evolver::full(h)? })
    }

    fn value(&self, o1: &LocalOperator, t: f64) -> DynResult<f64> {
        let o1t = self.evolver.evolve(o1, t)?;
        Ok(commutator_element(&self.rho0, o1t.matrix(), &self.o2, &self.sigma0).norm())
    }

    fn delta(&self) -> DeltaIdentity {
        let pull = |v: &[C64]| -> Vec<C64> { (self.encoder.adjoint() * DVector::from_column_slice(v)).iter().copied().collect() };
        let rho_s = pull(&self.rho0);
        let sigma_s = pull(&self.sigma0);
        let sigma_s_prime = pull(&apply(&self.o2, &self.sigma0));
        let rho_s_prime = pull(&apply(&self.o2, &self.rho0));
        DeltaIdentity::new(
            dot(&rho_s, &sigma_s_prime),
            dot(&rho_s_prime, &sigma_s),
            dot(&self.rho0, &apply(&self.o2, &self.sigma0)),
        )
    }
}

/// `|<rho_0| [O_1(t), O_2] |sigma_0>|` with `O_2` the logical image of
/// `o2_s` and `rho_0`, `sigma_0` the encoded top states.
pub fn lightcone_commutator(
    code: &CodeSpec,
    o1: &LocalOperator,
    o2_s: &LocalOperator,
    t: f64,
    h: &LocalHamiltonian,
    rho_top: &[C64],
    sigma_top: &[C64],
) -> DynResult<f64> {
    Lightcone::new(code, h, o2_s, rho_top, sigma_top)?.value(o1, t)
}

/// `<rho_s|sigma_s'>` and `<rho_s'|sigma_s>` with `sigma_0' = O_2 sigma_0`,
/// `rho_0' = O_2 rho_0`, against `<rho_0|O_2|sigma_0>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaIdentity {
    pub rho_sigma_prime: C64,
    pub rho_prime_sigma: C64,
    pub physical: C64,
    pub residual: f64,
}

impl DeltaIdentity {
    fn new(rho_sigma_prime: C64, rho_prime_sigma: C64, physical: C64) -> Self {
        let residual = (rho_sigma_prime - physical).norm().max((rho_prime_sigma - physical).norm());
        Self { rho_sigma_prime, rho_prime_sigma, physical, residual }
    }
}

pub fn delta_identity(code: &CodeSpec, h: &LocalHamiltonian, o2_s: &LocalOperator, rho_top: &[C64], sigma_top: &[C64]) -> DynResult<DeltaIdentity> {
    Ok(Lightcone::new(code, h, o2_s, rho_top, sigma_top)?.delta())
}

/// `c' = 2 d^2 e^nu max(1, c)` with `d` the three-site block dimension.
pub fn lightcone_constant(nu: f64, lr: &LRParameters, site_dim: usize) -> f64 {
    let d = site_dim.pow(3) as f64;
    2.0 * d * d * nu.exp() * lr.c.max(1.0)
}

/// `c' (v|t| + xi nu s)^nu 2^{-nu s}` for unit-norm operators.
pub fn lightcone_rhs(c_prime: f64, lr: &LRParameters, nu: f64, s: usize, t: f64) -> f64 {
    let s = s as f64;
    c_prime * (lr.v * t.abs() + lr.xi * nu * s).powf(nu) * 2f64.powf(-nu * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightconeRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightconeReport {
    pub rows: Vec<LightconeRow>,
    pub lr: LRParameters,
    pub nu: f64,
    pub c_prime: f64,
    pub delta: DeltaIdentity,
    /// Row with the smallest margin.
    pub report: BoundReport,
}

impl LightconeReport {
    pub const CSV_HEADER: &'static str = "t,lhs,rhs,nu,v,xi,c_prime,satisfied";

    pub fn satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
                    r.t, r.lhs, r.rhs, self.nu, self.lr.v, self.lr.xi, self.c_prime, r.satisfied
                )
            })
            .collect()
    }
}

/// Sweeps `t`, comparing the commutator against the scale-separation bound.
/// Both operators are normalised to unit operator norm first; the report
/// also carries the δ-cancellation identity of the encoded states.
#[allow(clippy::too_many_arguments)]
pub fn verify_lightcone_bound(
    code: &CodeSpec,
    h: &LocalHamiltonian,
    o1: &LocalOperator,
    o2_s: &LocalOperator,
    t_grid: &[f64],
    lr: &LRParameters,
    rho_top: &[C64],
    sigma_top: &[C64],
) -> DynResult<LightconeReport> {
    let nu = code.nu()?;
    let o1 = normalised(o1)?;
    let o2_s = normalised(o2_s)?;
    let setup = Lightcone::new(code, h, &o2_s, rho_top, sigma_top)?;
    let c_prime = lightcone_constant(nu, lr, code.net().site_dim());
    let tol = crate::qec::bounds::BOUND_TOL;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let lhs = setup.value(&o1, t)?;
        let rhs = lightcone_rhs(c_prime, lr, nu, code.scale(), t);
        rows.push(LightconeRow { t, lhs, rhs, satisfied: rhs - lhs >= -tol });
    }
    let worst = rows.iter().min_by(|a, b| (a.rhs - a.lhs).total_cmp(&(b.rhs - b.lhs))).copied();
    let (lhs, rhs) = worst.map(|r| (r.lhs, r.rhs)).unwrap_or((0.0, 0.0));
    let mut seeds: Vec<u64> = code.net().provenance().and_then(|p| p.seed).into_iter().collect();
    seeds.push(code.sampler().seed);
    let report = BoundReport::new("lightcone", lhs, rhs, Constants::new(Some(nu), code.net().site_dim().pow(3)), seeds);
    Ok(LightconeReport { rows, lr: *lr, nu, c_prime, delta: setup.delta(), report })
}

fn normalised(op: &LocalOperator) -> DynResult<LocalOperator> {
    let n = operator_norm(op.matrix());
    if n == 0.0 {
        return Ok(op.clone());
    }
    Ok(LocalOperator::new(op.region().clone(), op.site_dim(), op.aux_dim(), op.matrix() * c(1.0 / n))?)
}

/// Commutators in an energy eigenstate `psi`: `forward = <[O_1(t), O_2]>`,
/// `swapped = <[O_1, O_2(t)]>` and `reversed = <[O_1, O_2(-t)]>`.
/// Time-translation invariance of `psi` makes `forward == reversed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenstateCheck {
    pub t: f64,
    pub forward: C64,
    pub swapped: C64,
    pub reversed: C64,
    /// `|| H psi - E psi ||`.
    pub eigen_residual: f64,
}

impl EigenstateCheck {
    pub fn swapped_residual(&self) -> f64 {
        (self.forward - self.swapped).norm()
    }

    pub fn reversed_residual(&self) -> f64 {
        (self.forward - self.reversed).norm()
    }
}

/// `o1` and `o2` are full-chain matrices.
pub fn eigenstate_commutators(evolver: &Evolver, h: &CMat, o1: &CMat, o2: &CMat, psi: &[C64], t: f64) -> EigenstateCheck {
    let hpsi = apply(h, psi);
    let e = dot(psi, &hpsi).re / dot(psi, psi).re;
    let eigen_residual = hpsi.iter().zip(psi).map(|(a, b)| (a - b * e).norm_sqr()).sum::<f64>().sqrt();
    let forward = commutator_element(psi, &evolver.evolve_matrix(o1, t), o2, psi);
    let swapped = commutator_element(psi, o1, &evolver.evolve_matrix(o2, t), psi);
    let reversed = commutator_element(psi, o1, &evolver.evolve_matrix(o2, -t), psi);
    EigenstateCheck { t, forward, swapped, reversed, eigen_residual }
}
