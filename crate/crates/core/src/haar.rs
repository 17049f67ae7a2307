//! Seeded Haar sampling.
//!
//! Randomness comes from ChaCha20 (20 rounds, 64-bit seed expanded by
//! `seed_from_u64`). Uniform doubles take the top 53 bits of a 64-bit word;
//! normal deviates use the Box-Muller transform, consuming two words per
//! pair. Complex Gaussians have unit variance (`E|z|^2 = 1`) and are drawn
//! real part first. Matrices are filled row-major.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::tensor::{Tensor, TensorError, TensorResult};

/// Derive an independent stream seed from a base seed and a stream label.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct GaussianSource {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on (0, 1].
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * th.sin());
        r * th.cos()
    }

    pub fn complex(&mut self) -> C64 {
        let re = self.normal();
        let im = self.normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> DMatrix<C64> {
        let data: Vec<C64> = (0..rows * cols).map(|_| self.complex()).collect();
        DMatrix::from_row_slice(rows, cols, &data)
    }
}

/// Haar-distributed isometry as an `out_dim x in_dim` matrix.
///
/// QR of a complex Ginibre matrix with the phases of `diag(R)` moved into Q,
/// which makes the distribution exactly Haar.
pub fn haar_isometry_matrix(out_dim: usize, in_dim: usize, seed: u64) -> TensorResult<DMatrix<C64>> {
    if out_dim < in_dim || in_dim == 0 {
        return Err(TensorError::IsometryShape { out_dim, in_dim });
    }
    let z = GaussianSource::new(seed).matrix(out_dim, in_dim);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..in_dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    Ok(q)
}

/// Haar isometry `W` with `W^dag W = I`, as a rank-2 tensor `[out_dim, in_dim]`.
pub fn random_isometry(out_dim: usize, in_dim: usize, seed: u64) -> TensorResult<Tensor> {
    let q = haar_isometry_matrix(out_dim, in_dim, seed)?;
    Tensor::from_matrix(&q, vec![out_dim, in_dim])
}

pub fn random_unitary(dim: usize, seed: u64) -> DMatrix<C64> {
    haar_isometry_matrix(dim, dim, seed).expect("square isometry")
}

/// Haar-random unit vector.
pub fn random_pure_state(dim: usize, seed: u64) -> Vec<C64> {
    let mut g = GaussianSource::new(seed);
    let v: Vec<C64> = (0..dim).map(|_| g.complex()).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Random full-rank density matrix `G G^dag / tr`, G Ginibre.
pub fn random_density(dim: usize, seed: u64) -> DMatrix<C64> {
    let g = GaussianSource::new(seed).matrix(dim, dim);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev_from_identity(m: &DMatrix<C64>) -> f64 {
        let n = m.nrows();
        (m - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn one_by_one_is_a_phase() {
        for seed in [0, 1, 99] {
            let w = random_isometry(1, 1, seed).unwrap();
            assert!((w.data()[0].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn square_case_is_unitary() {
        let w = random_isometry(4, 4, 7).unwrap().matrix(1);
        assert!(max_dev_from_identity(&(w.adjoint() * &w)) < 1e-12);
        assert!(max_dev_from_identity(&(&w * w.adjoint())) < 1e-12);
    }

    #[test]
    fn tall_case_projector_spectrum() {
        let w = random_isometry(4, 2, 7).unwrap().matrix(1);
        assert!(max_dev_from_identity(&(w.adjoint() * &w)) < 1e-12);
        let p = &w * w.adjoint();
        let mut ev: Vec<f64> = p.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, want) in ev.iter().zip([0.0, 0.0, 1.0, 1.0]) {
            assert!((e - want).abs() < 1e-10);
        }
    }

    #[test]
    fn wide_request_rejected() {
        assert_eq!(random_isometry(2, 4, 0), Err(TensorError::IsometryShape { out_dim: 2, in_dim: 4 }));
    }

    #[test]
    fn seeds_reproduce_bit_for_bit() {
        let a = random_isometry(8, 3, 123).unwrap();
        let b = random_isometry(8, 3, 123).unwrap();
        let c = random_isometry(8, 3, 124).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_moments() {
        let mut g = GaussianSource::new(5);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| g.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn density_is_a_state() {
        let rho = random_density(5, 3);
        assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((&rho - rho.adjoint()).norm() < 1e-12);
        assert!(rho.symmetric_eigen().eigenvalues.iter().all(|&e| e > 0.0));
    }
}
