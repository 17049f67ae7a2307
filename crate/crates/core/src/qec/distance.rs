//! Fidelity, Bures and trace distances.
//!
//! Bures convention: `B(rho, sigma) = sqrt(1 - F)` with root fidelity
//! `F = tr sqrt(sqrt(rho) sigma sqrt(rho))`, so orthogonal pure states sit at
//! distance 1 and `2 B^2 <= ||rho - sigma||_1 <= 2 sqrt(2) B` holds. Every
//! pair computed here is checked against that sandwich.

use serde::{Deserialize, Serialize};

use super::{QecError, QecResult};
use crate::linalg::{factored_fidelity, factored_trace_distance, psd_factor, psd_sqrt, state_violation, trace_norm, CMat};

const STATE_TOL: f64 = 1e-8;
const SANDWICH_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub fidelity: f64,
    pub bures: f64,
    pub trace: f64,
}

fn check_pair(rho: &CMat, sigma: &CMat) -> QecResult<()> {
    if rho.nrows() != sigma.nrows() {
        return Err(QecError::Dimension(rho.nrows(), sigma.nrows()));
    }
    for m in [rho, sigma] {
        if let Some(why) = state_violation(m, STATE_TOL) {
            return Err(QecError::NotAState(why));
        }
    }
    Ok(())
}

pub(crate) fn bures_from_fidelity(f: f64) -> f64 {
    (1.0 - f.min(1.0)).max(0.0).sqrt()
}

/// Enforce `2 B^2 <= T <= 2 sqrt(2) B`.
pub(crate) fn sandwich(bures: f64, trace: f64) -> QecResult<()> {
    let lower = 2.0 * bures * bures;
    let upper = 2.0 * std::f64::consts::SQRT_2 * bures;
    if lower > trace + SANDWICH_TOL || trace > upper + SANDWICH_TOL {
        return Err(QecError::Sandwich { bures, trace });
    }
    Ok(())
}

impl Distances {
    pub fn between(rho: &CMat, sigma: &CMat) -> QecResult<Self> {
        check_pair(rho, sigma)?;
        let root = psd_sqrt(rho);
        let fidelity = trace_norm(&(&root * psd_sqrt(sigma)));
        let trace = trace_norm(&(rho - sigma));
        let bures = bures_from_fidelity(fidelity);
        sandwich(bures, trace)?;
        Ok(Self { fidelity, bures, trace })
    }

    /// Same quantities from factors `rho = X X^dag`, `sigma = Y Y^dag`.
    pub fn between_factors(x: &CMat, y: &CMat) -> QecResult<Self> {
        if x.nrows() != y.nrows() {
            return Err(QecError::Dimension(x.nrows(), y.nrows()));
        }
        let (x, y) = (&compress_factor(x), &compress_factor(y));
        let fidelity = factored_fidelity(x, y);
        let trace = factored_trace_distance(x, y);
        let bures = bures_from_fidelity(fidelity);
        sandwich(bures, trace)?;
        Ok(Self { fidelity, bures, trace })
    }
}

pub fn fidelity(rho: &CMat, sigma: &CMat) -> QecResult<f64> {
    Ok(Distances::between(rho, sigma)?.fidelity)
}

pub fn bures_distance(rho: &CMat, sigma: &CMat) -> QecResult<f64> {
    Ok(Distances::between(rho, sigma)?.bures)
}

pub fn trace_distance(rho: &CMat, sigma: &CMat) -> QecResult<f64> {
    Ok(Distances::between(rho, sigma)?.trace)
}

/// `X'` with `X' X'^dag = X X^dag` and as many columns as the numerical
/// rank of `X`: with the pivoted `X P = Q R`, rows of `R` below `1e-13`
/// relative are dropped and the rest is folded into a square factor.
pub(crate) fn compress_factor(x: &CMat) -> CMat {
    if x.ncols() <= 1 || x.nrows() == 0 {
        return x.clone();
    }
    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let top = r[(0, 0)].norm();
    let rank = (0..r.nrows().min(r.ncols())).take_while(|&k| r[(k, k)].norm() > 1e-13 * top).count().max(1);
    if rank == x.ncols() {
        return x.clone();
    }
    let rk = r.rows(0, rank).clone_owned();
    let gram = &rk * rk.adjoint();
    let l = match gram.clone().cholesky() {
        Some(ch) => ch.l(),
        None => return x.clone(),
    };
    let q = qr.q();
    q.columns(0, rank) * l
}

/// Factor of a density matrix with eigenvalues above `1e-14` kept.
pub(crate) fn state_factor(rho: &CMat) -> CMat {
    psd_factor(rho, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::random_density;
    use crate::linalg::c;

    fn pure(v: &[f64]) -> CMat {
        let x = CMat::from_column_slice(v.len(), 1, &v.iter().map(|&a| c(a)).collect::<Vec<_>>());
        &x * x.adjoint()
    }

    #[test]
    fn equal_states_at_zero() {
        let rho = random_density(4, 1);
        let d = Distances::between(&rho, &rho).unwrap();
        assert!(d.bures < 1e-6 && d.trace < 1e-12);
    }

    #[test]
    fn orthogonal_pure_states() {
        let d = Distances::between(&pure(&[1.0, 0.0]), &pure(&[0.0, 1.0])).unwrap();
        assert!((d.trace - 2.0).abs() < 1e-12);
        assert!(d.fidelity.abs() < 1e-12);
        assert!((d.bures - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_closed_form() {
        let mixed = CMat::identity(2, 2) * c(0.5);
        let d = Distances::between(&mixed, &pure(&[1.0, 0.0])).unwrap();
        assert!((d.trace - 1.0).abs() < 1e-12);
        assert!((d.fidelity - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((d.bures - (1.0 - 0.5f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!((d.bures - 0.541).abs() < 1e-3);
    }

    #[test]
    fn factored_route_agrees() {
        for seed in 0..10 {
            let (rho, sigma) = (random_density(6, seed), random_density(6, seed + 50));
            let dense = Distances::between(&rho, &sigma).unwrap();
            let fact = Distances::between_factors(&state_factor(&rho), &state_factor(&sigma)).unwrap();
            assert!((dense.fidelity - fact.fidelity).abs() < 1e-10);
            assert!((dense.trace - fact.trace).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_states() {
        let bad = CMat::identity(2, 2);
        assert!(matches!(bures_distance(&bad, &bad), Err(QecError::NotAState(_))));
        assert!(matches!(trace_distance(&bad, &CMat::identity(3, 3)), Err(QecError::Dimension(2, 3))));
    }
}
