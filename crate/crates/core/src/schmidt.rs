//! Operator Schmidt decomposition across a bipartition.

use num_complex::Complex64 as C64;

use crate::linalg::CMat;
use crate::tensor::{Tensor, TensorError, TensorResult};

/// One term `weight * left (x) right` with unit Hilbert-Schmidt factors.
#[derive(Clone, Debug)]
pub struct OperatorSchmidtTerm {
    pub left_factor: Tensor,
    pub right_factor: Tensor,
    pub weight: f64,
}

/// Relative threshold below which singular values count as zero.
const RELATIVE_CUTOFF: f64 = 1e-12;

/// Decompose an operator on `H1 (x) H2` (dims `d1`, `d2`) as
/// `sum_j w_j L_j (x) R_j`, weights non-increasing.
///
/// `o` may have any shape whose amplitude count is `(d1 d2)^2`; it is read
/// as the row-major `(d1 d2) x (d1 d2)` matrix.
pub fn operator_schmidt_decompose(o: &Tensor, d1: usize, d2: usize) -> TensorResult<Vec<OperatorSchmidtTerm>> {
    let dim = d1 * d2;
    if o.len() != dim * dim || d1 == 0 || d2 == 0 {
        let found = (o.len() as f64).sqrt() as usize;
        return Err(TensorError::Split { d1, d2, dim: found });
    }
    // realigned[(i1 j1), (i2 j2)] = O[(i1 i2), (j1 j2)]
    let data = o.data();
    let realigned = CMat::from_fn(d1 * d1, d2 * d2, |r, col| {
        let (i1, j1) = (r / d1, r % d1);
        let (i2, j2) = (col / d2, col % d2);
        data[(i1 * d2 + i2) * dim + j1 * d2 + j2]
    });
    let svd = realigned.svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let v_t = svd.v_t.expect("right singular vectors");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut terms = Vec::new();
    for k in order {
        let w = svd.singular_values[k];
        if w <= RELATIVE_CUTOFF * top || w == 0.0 {
            continue;
        }
        let left: Vec<C64> = u.column(k).iter().copied().collect();
        let right: Vec<C64> = v_t.row(k).iter().copied().collect();
        terms.push(OperatorSchmidtTerm {
            left_factor: Tensor::new(vec![d1, d1], left)?,
            right_factor: Tensor::new(vec![d2, d2], right)?,
            weight: w,
        });
    }
    Ok(terms)
}
