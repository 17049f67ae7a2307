//! Bound checks reported as value objects.
//!
//! Constants: `C = 2 d^2` for the decoupling bound with `d` the dimension of
//! the three-site elementary block, and `c = 2 sqrt(2) sqrt(2 d^2)` for the
//! recovery bounds, obtained by chaining the decoupling bound through the
//! Bures sandwich. The recovery constant is a calibrated choice.

use serde::{Deserialize, Serialize};

use super::decoupling::{decoupling_bures, decoupling_defect, DefectOperator};
use super::petz::{petz_recovery, recovery_error, union_errors};
use super::{CodeSpec, QecError, QecResult};
use crate::mera::Region;

/// `satisfied` iff `margin >= -BOUND_TOL`.
pub const BOUND_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    #[serde(rename = "C")]
    pub big_c: f64,
    pub c: f64,
    /// Absent when the transfer operator is not RG-regular.
    pub nu: Option<f64>,
    pub d: usize,
}

impl Constants {
    /// Constants for a given scaling dimension and block dimension `d`.
    pub fn new(nu: Option<f64>, d: usize) -> Self {
        let big_c = 2.0 * (d * d) as f64;
        Self { big_c, c: 2.0 * std::f64::consts::SQRT_2 * big_c.sqrt(), nu, d }
    }

    pub fn for_code(code: &CodeSpec) -> QecResult<Self> {
        Ok(Self::new(Some(code.nu()?), code.net().site_dim().pow(3)))
    }

    /// Constants with `nu` recorded only if available.
    pub fn lenient(code: &CodeSpec) -> Self {
        Self::new(code.nu().ok(), code.net().site_dim().pow(3))
    }

    fn nu_value(&self) -> f64 {
        self.nu.expect("bound needs nu")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constants: Constants,
    pub satisfied: bool,
    pub margin: f64,
    pub seeds: Vec<u64>,
}

impl BoundReport {
    pub fn new(claim: impl Into<String>, lhs: f64, rhs: f64, constants: Constants, seeds: Vec<u64>) -> Self {
        let margin = rhs - lhs;
        Self { claim: claim.into(), lhs, rhs, constants, satisfied: margin >= -BOUND_TOL, margin, seeds }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "claim,lhs,rhs,margin,satisfied,C,c,nu,d,seeds";

    pub fn csv_row(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "{},{:.12e},{:.12e},{:.12e},{},{},{},{},{},{}",
            self.claim,
            self.lhs,
            self.rhs,
            self.margin,
            self.satisfied,
            self.constants.big_c,
            self.constants.c,
            self.constants.nu.map(|x| format!("{x:.12e}")).unwrap_or_default(),
            self.constants.d,
            seeds.join(";")
        )
    }
}

fn seeds_of(code: &CodeSpec) -> Vec<u64> {
    let mut seeds = Vec::new();
    if let Some(s) = code.net().provenance().and_then(|p| p.seed) {
        seeds.push(s);
    }
    seeds.push(code.sampler().seed);
    seeds
}

/// `2^{-nu (s - log2 |A|)}`.
fn scale_factor(code: &CodeSpec, a: &Region, nu: f64) -> f64 {
    2f64.powf(-nu * (code.scale() as f64 - (a.len() as f64).log2()))
}

/// `defect <= C 2^{-nu (s - log2 |A|)}`.
pub fn verify_decoupling_bound(code: &CodeSpec, a: &Region, op: &DefectOperator) -> QecResult<BoundReport> {
    let k = Constants::for_code(code)?;
    let lhs = decoupling_defect(code, a, op)?.defect;
    let rhs = k.big_c * scale_factor(code, a, k.nu_value());
    Ok(BoundReport::new("decoupling", lhs, rhs, k, seeds_of(code)))
}

/// Petz recovery of a simply connected `A` from its complement against
/// `c 2^{-nu (s - log2 |A|) / 2}`.
pub fn verify_simply_connected_correctability(code: &CodeSpec, a: &Region) -> QecResult<BoundReport> {
    code.check_physical(a)?;
    if !a.is_simply_connected() {
        return Err(QecError::NotSimplyConnected(a.sites().to_vec()));
    }
    let k = Constants::for_code(code)?;
    let petz = petz_recovery(code, a, &a.complement())?;
    let lhs = recovery_error(code, &petz)?.max;
    let rhs = k.c * scale_factor(code, a, k.nu_value()).sqrt();
    Ok(BoundReport::new("simply-connected-correctability", lhs, rhs, k, seeds_of(code)))
}

/// Shield of radius `x` around `A`.
pub fn shield(a: &Region, x: usize) -> Region {
    a.neighborhood(x).difference(a)
}

/// Petz recovery of `A` from its radius-`x` shield against `c (|A|/x)^{nu/2}`.
pub fn verify_local_correctability(code: &CodeSpec, a: &Region, x: usize) -> QecResult<BoundReport> {
    code.check_physical(a)?;
    if x == 0 {
        return Err(QecError::Domain("shield radius must be positive".into()));
    }
    let b = shield(a, x);
    let limit = 1usize << code.scale();
    let ab = a.len() + b.len();
    if ab >= limit {
        return Err(QecError::Hypothesis { ab, limit });
    }
    let k = Constants::for_code(code)?;
    let petz = petz_recovery(code, a, &b)?;
    let lhs = recovery_error(code, &petz)?.max;
    let rhs = k.c * (a.len() as f64 / x as f64).powf(k.nu_value() / 2.0);
    Ok(BoundReport::new(format!("local-correctability x={x}"), lhs, rhs, k, seeds_of(code)))
}

/// Petz error against `2 sqrt(2) B(rho^A (x) rho^{CR}, rho^{ACR})` on the
/// maximally entangled codeword, the state the Petz map is built from.
pub fn verify_decoupling_recoverability(code: &CodeSpec, a: &Region, b: &Region) -> QecResult<BoundReport> {
    if !code.sampler().maximally_entangled {
        return Err(QecError::Code("recoverability needs the maximally entangled codeword".into()));
    }
    let k = Constants::lenient(code);
    let errs = recovery_error(code, &petz_recovery(code, a, b)?)?;
    let bures = decoupling_bures(code, a, b)?;
    let rhs = 2.0 * std::f64::consts::SQRT_2 * bures[0];
    Ok(BoundReport::new("decoupling-implies-recovery", errs.per_codeword[0], rhs, k, seeds_of(code)))
}

/// Composed recovery of two regions against the sum of the individual
/// errors, per codeword; the report carries the smallest margin.
pub fn union_correctability(code: &CodeSpec, a1: &Region, b1: &Region, a2: &Region, b2: &Region) -> QecResult<BoundReport> {
    let k = Constants::lenient(code);
    let u = union_errors(code, a1, b1, a2, b2)?;
    let sums = u.first.per_codeword.iter().zip(&u.second.per_codeword).map(|(x, y)| x + y);
    let (lhs, rhs) = worst_pair(&u.joint, sums);
    Ok(BoundReport::new("union", lhs, rhs, k, seeds_of(code)))
}

fn worst_pair(lhs: &[f64], rhs: impl Iterator<Item = f64>) -> (f64, f64) {
    lhs.iter()
        .copied()
        .zip(rhs)
        .min_by(|p, q| (p.1 - p.0).total_cmp(&(q.1 - q.0)))
        .unwrap_or((0.0, 0.0))
}
