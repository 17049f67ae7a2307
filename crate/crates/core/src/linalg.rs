//! Matrix helpers on top of nalgebra: Hermitian functions, norms, partial
//! traces and a Schur-based non-Hermitian eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Matrix product. Large products are split into four real products so
/// they go through the blocked real kernel.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (m, k) = a.shape();
    let n = b.ncols();
    assert_eq!(k, b.nrows(), "matmul: inner dimensions differ");
    if m * k * n < (1 << 18) {
        return a * b;
    }
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let br = b.map(|z| z.re);
    let bi = b.map(|z| z.im);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMat::from_fn(m, n, |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

/// `a^dag b`.
pub fn adjoint_mul(a: &CMat, b: &CMat) -> CMat {
    matmul(&a.adjoint(), b)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `|| W^dag W - I ||_max`.
pub fn isometry_defect(w: &CMat) -> f64 {
    let n = w.ncols();
    max_abs(&(adjoint_mul(w, w) - identity(n)))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Real symmetric input is diagonalised in real arithmetic.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let herm = (m + m.adjoint()) * c(0.5);
    let (vals, vecs) = if herm.iter().all(|z| z.im == 0.0) {
        let e = herm.map(|z| z.re).symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors.map(c))
    } else {
        let e = herm.symmetric_eigen();
        (e.eigenvalues.iter().copied().collect::<Vec<_>>(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let mut out = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        out.set_column(dst, &vecs.column(src));
    }
    (sorted, out)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let herm = (m + m.adjoint()) * c(0.5);
    let mut vals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let fv = f(v);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= fv);
    }
    matmul(&scaled, &vecs.adjoint())
}

pub fn psd_sqrt(m: &CMat) -> CMat {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Factor `X` (n x r) with `X X^dag = m`, dropping eigenvalues below `cutoff`.
pub fn psd_factor(m: &CMat, cutoff: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cutoff).collect();
    let mut x = CMat::zeros(m.nrows(), keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let s = vals[k].sqrt();
        x.set_column(dst, &(vecs.column(k) * c(s)));
    }
    x
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    singular_values(m).iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `|| sum_i s_i v_i v_i^dag ||_1` for the columns `v_i` of `cols` and signs
/// `s_i = +-1`. With `cols = Q R` the operator is `Q (R S R^dag) Q^dag`, so
/// the norm comes from a small Hermitian matrix without squaring the
/// conditioning.
pub fn signed_trace_norm(cols: &CMat, signs: &[f64]) -> f64 {
    assert_eq!(cols.ncols(), signs.len(), "one sign per column");
    if cols.is_empty() {
        return 0.0;
    }
    let r = cols.clone().qr().r();
    let s = CMat::from_diagonal(&nalgebra::DVector::from_iterator(signs.len(), signs.iter().map(|&x| c(x))));
    let m = matmul(&matmul(&r, &s), &r.adjoint());
    eigvalsh(&m).iter().map(|x| x.abs()).sum()
}

/// `|| X X^dag - Y Y^dag ||_1` for factor matrices with equal row counts.
pub fn factored_trace_distance(x: &CMat, y: &CMat) -> f64 {
    let mut cols = x.clone().resize_horizontally(x.ncols() + y.ncols(), ZERO);
    cols.columns_mut(x.ncols(), y.ncols()).copy_from(y);
    let mut signs = vec![1.0; x.ncols()];
    signs.extend(std::iter::repeat(-1.0).take(y.ncols()));
    signed_trace_norm(&cols, &signs)
}

/// Root fidelity `tr sqrt(sqrt(rho) sigma sqrt(rho))` for `rho = X X^dag`,
/// `sigma = Y Y^dag`: the nuclear norm of `X^dag Y`.
pub fn factored_fidelity(x: &CMat, y: &CMat) -> f64 {
    trace_norm(&adjoint_mul(x, y))
}

/// Partial trace of an operator on `dims[0] x dims[1] x ...`, keeping the
/// listed subsystems in increasing order.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let n: usize = dims.iter().product();
    assert_eq!(m.nrows(), n, "partial_trace: operator dimension");
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    let strides = crate::tensor::strides_of(dims);
    let offset = |sub: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &k in sub.iter().rev() {
            off += (idx % dims[k]) * strides[k];
            idx /= dims[k];
        }
        off
    };
    let kept_off: Vec<usize> = (0..dk).map(|i| offset(&keep, i)).collect();
    let tr_off: Vec<usize> = (0..dt).map(|i| offset(&traced, i)).collect();
    CMat::from_fn(dk, dk, |i, j| {
        tr_off.iter().map(|&t| m[(kept_off[i] + t, kept_off[j] + t)]).sum()
    })
}

/// Reduced density matrix of a vector on `dims`, keeping `keep`.
pub fn reduced_state(psi: &[C64], dims: &[usize], keep: &[usize]) -> CMat {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let t = crate::tensor::Tensor::new(dims.to_vec(), psi.to_vec()).expect("vector shape");
    let mut perm = keep.clone();
    perm.extend((0..dims.len()).filter(|k| !keep.contains(k)));
    let m = t.permute(&perm).expect("permutation").matrix(keep.len());
    matmul(&m, &m.adjoint())
}

/// Check that `m` is a density matrix within `tol`.
pub fn state_violation(m: &CMat, tol: f64) -> Option<String> {
    if m.nrows() != m.ncols() {
        return Some(format!("not square: {}x{}", m.nrows(), m.ncols()));
    }
    let h = hermitian_defect(m);
    if h > tol {
        return Some(format!("not Hermitian (defect {h:e})"));
    }
    let tr = m.trace();
    if (tr - ONE).norm() > tol {
        return Some(format!("trace {tr} differs from 1"));
    }
    let min = eigh(m).0.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Some(format!("negative eigenvalue {min:e}"));
    }
    None
}

/// Eigenvalues and unit right eigenvectors of a general square matrix.
///
/// Complex Schur form followed by back-substitution on the triangular
/// factor; near-equal diagonal entries are separated by a small
/// perturbation as in LAPACK's `ztrevc`, so defective matrices still yield
/// (nearly parallel) vectors whose conditioning exposes the defect.
pub fn eig(m: &CMat) -> (Vec<C64>, CMat) {
    let n = m.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let smin_floor = tnorm * f64::EPSILON;
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let smin = (f64::EPSILON * lam.norm()).max(smin_floor);
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lam;
            if den.norm() < smin {
                den = c(smin);
            }
            y[(i, k)] = -s / den;
        }
    }
    let mut x = matmul(&q, &y);
    for k in 0..n {
        let nrm = x.column(k).norm();
        x.column_mut(k).iter_mut().for_each(|z| *z /= nrm);
    }
    ((0..n).map(|k| t[(k, k)]).collect(), x)
}

/// 2-norm condition number.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Row-major vectorisation `vec(A)[i*n + j] = A[i, j]`.
pub fn vec_row_major(a: &CMat) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(a.transpose().as_slice())
}

pub fn unvec_row_major(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_row_slice(rows, cols, v)
}
