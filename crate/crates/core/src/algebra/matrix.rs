//! Dense row-major matrices over a [`Field`], column-stacking
//! vectorization and the left/right multiplication superoperators.

use std::fmt;

use super::scalar::{Field, C64};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<T: Field> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: T) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn map<U: Field>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_c64(&self) -> Matrix<C64> {
        self.map(|x| x.to_c64())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> T {
        let n = self.rows.min(self.cols);
        let mut acc = T::zero();
        for i in 0..n {
            acc = acc.add_ref(self.get(i, i));
        }
        acc
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.mul_ref(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add_ref(b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub_ref(b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    /// Matrix product; zero entries of `self` are skipped.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    if !b.is_zero() {
                        *o = o.add_ref(&a.mul_ref(b));
                    }
                }
            }
        }
        out
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.matmul(other))
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matvec");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// Row vector times matrix: `vᵀ A`.
    pub fn vecmat(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "shape mismatch in vecmat");
        let mut out = vec![T::zero(); self.cols];
        for (r, vr) in v.iter().enumerate() {
            if vr.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                if !a.is_zero() {
                    *o = o.add_ref(&vr.mul_ref(a));
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (br, bc) = (other.rows, other.cols);
        let mut out = Self::zeros(self.rows * br, self.cols * bc);
        let ocols = out.cols;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..br {
                    for l in 0..bc {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.data[(i * br + k) * ocols + j * bc + l] = a.mul_ref(b);
                        }
                    }
                }
            }
        }
        out
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Field::is_zero)
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub_ref(b).to_c64().norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.to_c64().norm()).fold(0.0, f64::max)
    }

    /// `A = A†` exactly, or within `tol` per entry for floats.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let adj = self.adjoint();
        if T::EXACT {
            return &adj == self;
        }
        self.max_abs_diff(&adj) <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let two = T::from_i64(2);
        self.add(&self.adjoint()).map(|x| x.div_ref(&two))
    }
}

pub fn dot<T: Field>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc.add_ref(&x.mul_ref(y));
        }
    }
    acc
}

/// An operator on a `dim`-dimensional Hilbert space stored as a length
/// `dim²` column: entry `(i, j)` sits at index `j·dim + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedOperator<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Field> VectorizedOperator<T> {
    pub fn new(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "vectorized operator of length {} cannot have dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// `tr A = ⟨⟨𝟙|A⟩⟩`.
    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.dim {
            acc = acc.add_ref(&self.data[i * self.dim + i]);
        }
        acc
    }

    pub fn scale(&self, s: &T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x.mul_ref(s)).collect() }
    }

    pub fn to_c64(&self) -> VectorizedOperator<C64> {
        VectorizedOperator { dim: self.dim, data: self.data.iter().map(Field::to_c64).collect() }
    }

    pub fn unvectorize(&self) -> Matrix<T> {
        let d = self.dim;
        Matrix::from_fn(d, d, |i, j| self.data[j * d + i].clone())
    }
}

/// Column-stacks a square matrix.
pub fn vectorize<T: Field>(a: &Matrix<T>) -> Result<VectorizedOperator<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "cannot vectorize a non-square {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let d = a.rows();
    let mut data = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            data.push(a.get(i, j).clone());
        }
    }
    Ok(VectorizedOperator { dim: d, data })
}

pub fn unvectorize<T: Field>(v: &VectorizedOperator<T>) -> Matrix<T> {
    v.unvectorize()
}

/// The vectorized identity `⟨⟨𝟙|`, i.e. the trace functional.
pub fn trace_functional<T: Field>(dim: usize) -> Vec<T> {
    let mut v = vec![T::zero(); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = T::one();
    }
    v
}

fn require_square<T: Field>(a: &Matrix<T>) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    Ok(a.rows())
}

/// `vec(Aρ) = (I ⊗ A) vec(ρ)`.
pub fn superop_left<T: Field>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let d = require_square(a)?;
    Ok(Matrix::identity(d).kron(a))
}

/// `vec(ρA) = (Aᵀ ⊗ I) vec(ρ)`.
pub fn superop_right<T: Field>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let d = require_square(a)?;
    Ok(a.transpose().kron(&Matrix::identity(d)))
}

/// `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.
pub fn superop_sandwich<T: Field>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    require_square(a)?;
    require_square(b)?;
    if a.rows() != b.rows() {
        return Err(Error::Dimension("sandwich factors differ in dimension".into()));
    }
    Ok(b.transpose().kron(a))
}
