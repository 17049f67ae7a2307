//! Dense complex tensors.
//!
//! Amplitudes are stored row-major over the shape list: for shape
//! `[n0, n1, ..., nk]` the entry at `(i0, ..., ik)` lives at offset
//! `((i0 * n1 + i1) * n2 + i2) ...`. An operator on a multi-leg space is a
//! tensor whose output legs come first and whose input legs follow in the
//! same order, so its row-major flattening is the usual matrix.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    /// The amplitude count does not match the shape.
    #[error("shape {shape:?} holds {expected} amplitudes but {found} were supplied")]
    DataLength {
        shape: Vec<usize>,
        expected: usize,
        found: usize,
    },

    /// A shape entry is zero.
    #[error("shape {0:?} has a zero-sized index")]
    ZeroDim(Vec<usize>),

    /// A contraction pair joins indices of different dimension.
    #[error("contraction pair ({a}, {b}) joins dimensions {da} and {db}")]
    PairDimension { a: usize, b: usize, da: usize, db: usize },

    /// An index refers past the rank of its tensor.
    #[error("index {index} out of range for a rank-{rank} tensor")]
    IndexRange { index: usize, rank: usize },

    /// The same index appears in two pairs.
    #[error("index {0} is paired more than once")]
    RepeatedIndex(usize),

    /// A permutation is not a bijection of the legs.
    #[error("{0:?} is not a permutation of the tensor legs")]
    Permutation(Vec<usize>),

    /// A reshape changes the amplitude count.
    #[error("cannot reshape {from:?} into {to:?}")]
    Reshape { from: Vec<usize>, to: Vec<usize> },

    /// Requested isometry has fewer outputs than inputs.
    #[error("an isometry needs out_dim >= in_dim, got {out_dim}x{in_dim}")]
    IsometryShape { out_dim: usize, in_dim: usize },

    /// Subsystem split inconsistent with an operator.
    #[error("split {d1}x{d2} does not factor an operator of dimension {dim}")]
    Split { d1: usize, d2: usize, dim: usize },

    /// A matrix does not fit the legs it is applied to.
    #[error("matrix of shape {rows}x{cols} cannot act on legs of total dimension {legs}")]
    MatrixShape { rows: usize, cols: usize, legs: usize },
}

pub type TensorResult<T> = Result<T, TensorError>;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> TensorResult<Self> {
        if shape.contains(&0) {
            return Err(TensorError::ZeroDim(shape));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::DataLength { shape, expected, found: data.len() });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![ZERO; n] }
    }

    pub fn scalar(z: C64) -> Self {
        Self { shape: Vec::new(), data: vec![z] }
    }

    /// Column vector `[n]`.
    pub fn vector(data: Vec<C64>) -> Self {
        Self { shape: vec![data.len()], data }
    }

    /// Identity operator on the product space `dims`, legs `[dims.., dims..]`.
    pub fn identity(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = ONE;
        }
        let mut shape = dims.to_vec();
        shape.extend_from_slice(dims);
        Self { shape, data }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Self {
        let n: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Self { shape, data }
    }

    /// Interpret a matrix as a tensor whose row index splits into the first
    /// legs of `shape` and whose column index splits into the rest.
    pub fn from_matrix(m: &DMatrix<C64>, shape: Vec<usize>) -> TensorResult<Self> {
        let expected: usize = shape.iter().product();
        if expected != m.len() {
            return Err(TensorError::DataLength { shape, expected, found: m.len() });
        }
        let data = m.transpose().as_slice().to_vec();
        Self::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        let off: usize = idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum();
        self.data[off]
    }

    /// Group the first `row_legs` legs into rows and the rest into columns.
    pub fn matrix(&self, row_legs: usize) -> DMatrix<C64> {
        let rows: usize = self.shape[..row_legs].iter().product();
        let cols = self.data.len() / rows;
        DMatrix::from_row_slice(rows, cols, &self.data)
    }

    pub fn reshape(self, shape: Vec<usize>) -> TensorResult<Self> {
        let n: usize = shape.iter().product();
        if n != self.data.len() || shape.contains(&0) {
            return Err(TensorError::Reshape { from: self.shape, to: shape });
        }
        Ok(Self { shape, data: self.data })
    }

    /// Reorder legs: leg `k` of the result is leg `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> TensorResult<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r {
            return Err(TensorError::Permutation(perm.to_vec()));
        }
        for &p in perm {
            if p >= r || seen[p] {
                return Err(TensorError::Permutation(perm.to_vec()));
            }
            seen[p] = true;
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let src_strides = self.strides();
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        Ok(Self { data: gather(&self.data, &shape, &strides), shape })
    }

    pub fn conj(&self) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(mut self, z: C64) -> Self {
        self.data.iter_mut().for_each(|x| *x *= z);
        self
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sum conj(self) * other` over all entries.
    pub fn inner(&self, other: &Tensor) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        assert_eq!(self.shape, other.shape, "shape mismatch in max_abs_diff");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Tensor product; legs of `self` first.
    pub fn outer(&self, other: &Tensor) -> Self {
        let mut data = Vec::with_capacity(self.len() * other.len());
        for a in &self.data {
            data.extend(other.data.iter().map(|b| a * b));
        }
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&other.shape);
        Self { shape, data }
    }

    /// Apply `m` to the legs `legs` (taken in the given order as its input).
    ///
    /// `m` has `prod(out_dims)` rows and `prod(dims of legs)` columns. The
    /// result carries the new legs `out_dims` first, then the untouched legs
    /// in their original order.
    pub fn apply(&self, legs: &[usize], m: &DMatrix<C64>, out_dims: &[usize]) -> TensorResult<Self> {
        let r = self.rank();
        let mut used = vec![false; r];
        for &l in legs {
            if l >= r {
                return Err(TensorError::IndexRange { index: l, rank: r });
            }
            if used[l] {
                return Err(TensorError::RepeatedIndex(l));
            }
            used[l] = true;
        }
        let in_dim: usize = legs.iter().map(|&l| self.shape[l]).product();
        let out_dim: usize = out_dims.iter().product();
        if m.ncols() != in_dim || m.nrows() != out_dim {
            return Err(TensorError::MatrixShape { rows: m.nrows(), cols: m.ncols(), legs: in_dim });
        }
        let mut perm = legs.to_vec();
        perm.extend((0..r).filter(|&k| !used[k]));
        let moved = self.permute(&perm)?;
        let rest = moved.len() / in_dim;
        let data = left_multiply(m, &moved.data, rest);
        let mut shape = out_dims.to_vec();
        shape.extend(perm[legs.len()..].iter().map(|&k| self.shape[k]));
        Ok(Self { shape, data })
    }
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Strided gather: result is row-major over `shape`, reading `src` at
/// `sum idx[k] * strides[k]`.
fn gather(src: &[C64], shape: &[usize], strides: &[usize]) -> Vec<C64> {
    let n: usize = shape.iter().product();
    let mut out = Vec::with_capacity(n);
    if shape.is_empty() {
        out.push(src[0]);
        return out;
    }
    let last = shape.len() - 1;
    let (inner_n, inner_s) = (shape[last], strides[last]);
    let mut idx = vec![0usize; last];
    let mut base = 0usize;
    for _ in 0..n / inner_n {
        if inner_s == 1 {
            out.extend_from_slice(&src[base..base + inner_n]);
        } else {
            out.extend((0..inner_n).map(|i| src[base + i * inner_s]));
        }
        for ax in (0..last).rev() {
            idx[ax] += 1;
            base += strides[ax];
            if idx[ax] < shape[ax] {
                break;
            }
            base -= strides[ax] * shape[ax];
            idx[ax] = 0;
        }
    }
    out
}

/// `m * X` where `X` is row-major with `rest` columns.
fn left_multiply(m: &DMatrix<C64>, x: &[C64], rest: usize) -> Vec<C64> {
    let (rows, cols) = m.shape();
    let mut out = vec![ZERO; rows * rest];
    for o in 0..rows {
        let dst = &mut out[o * rest..(o + 1) * rest];
        for i in 0..cols {
            let c = m[(o, i)];
            if c == ZERO {
                continue;
            }
            let src = &x[i * rest..(i + 1) * rest];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
    }
    out
}

/// Contract `a` with `b` over `pairs = [(leg of a, leg of b), ..]`.
///
/// The result carries the unpaired legs of `a` followed by those of `b`.
pub fn contract(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> TensorResult<Tensor> {
    let (ra, rb) = (a.rank(), b.rank());
    let mut used_a = vec![false; ra];
    let mut used_b = vec![false; rb];
    for &(i, j) in pairs {
        if i >= ra {
            return Err(TensorError::IndexRange { index: i, rank: ra });
        }
        if j >= rb {
            return Err(TensorError::IndexRange { index: j, rank: rb });
        }
        if used_a[i] {
            return Err(TensorError::RepeatedIndex(i));
        }
        if used_b[j] {
            return Err(TensorError::RepeatedIndex(j));
        }
        if a.shape[i] != b.shape[j] {
            return Err(TensorError::PairDimension { a: i, b: j, da: a.shape[i], db: b.shape[j] });
        }
        used_a[i] = true;
        used_b[j] = true;
    }
    let free_a: Vec<usize> = (0..ra).filter(|&k| !used_a[k]).collect();
    let free_b: Vec<usize> = (0..rb).filter(|&k| !used_b[k]).collect();
    let mut perm_a = free_a.clone();
    perm_a.extend(pairs.iter().map(|p| p.0));
    let mut perm_b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    perm_b.extend(&free_b);
    let pa = a.permute(&perm_a)?;
    let pb = b.permute(&perm_b)?;
    let k: usize = pairs.iter().map(|p| a.shape[p.0]).product();
    let m = pa.len() / k;
    let n = pb.len() / k;
    let mut data = vec![ZERO; m * n];
    for i in 0..m {
        let dst = &mut data[i * n..(i + 1) * n];
        for p in 0..k {
            let c = pa.data[i * k + p];
            if c == ZERO {
                continue;
            }
            for (d, s) in dst.iter_mut().zip(&pb.data[p * n..(p + 1) * n]) {
                *d += c * s;
            }
        }
    }
    let mut shape: Vec<usize> = free_a.iter().map(|&x| a.shape[x]).collect();
    shape.extend(free_b.iter().map(|&x| b.shape[x]));
    Ok(Tensor { shape, data })
}
