//! Floating-point spectral routines: non-Hermitian eigendecomposition with
//! bi-orthonormal left/right eigenvectors, Hermitian spectra, singular
//! values, and steady-state kernels.
//!
//! The Schur form and SVD come from `nalgebra`; eigenvectors are recovered
//! from the triangular factor by back substitution and the left vectors as
//! the rows of the inverse of the right-eigenvector matrix.

use nalgebra::DMatrix;

use super::linsolve::{null_space, Lu};
use super::matrix::{Matrix, VectorizedOperator};
use super::scalar::{Field, C64};
use crate::error::{Error, Result};

/// Defaults for rank, diagonalizability and positivity decisions.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub tol_rank: f64,
    pub cond_max: f64,
    pub tol_psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_rank: 1e-10, cond_max: 1e12, tol_psd: 1e-10 }
    }
}

pub fn to_nalgebra(m: &Matrix<C64>) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

pub fn from_nalgebra(m: &DMatrix<C64>) -> Matrix<C64> {
    Matrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Eigenvalues with right eigenvectors (columns of `right`) and left
/// eigenvectors (rows of `left`, so `left.row(j)·x = ⟨⟨v_j|x⟩⟩`),
/// normalized so that `left · right = I`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    pub right: Option<Matrix<C64>>,
    pub left: Option<Matrix<C64>>,
    pub diagonalizable: bool,
    /// 1-norm condition number of the eigenvector matrix.
    pub condition: f64,
    /// `max_j ‖A u_j − λ_j u_j‖`.
    pub residual: f64,
}

/// Total QR sweeps allowed per Schur attempt, scaled with the dimension.
fn schur_budget(n: usize) -> usize {
    10_000.max(60 * n)
}

fn try_schur(a: DMatrix<C64>) -> Option<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    nalgebra::linalg::Schur::try_new(a, f64::EPSILON, schur_budget(n)).map(|s| s.unpack())
}

/// Complex single-shift QR on the Hessenberg form with Wilkinson shifts
/// and periodic exceptional shifts. Slower than nalgebra's double-shift
/// sweep but does not cycle on the structured Liouvillians of long chains.
fn single_shift_schur(a: DMatrix<C64>) -> Option<(DMatrix<C64>, DMatrix<C64>)> {
    let n = a.nrows();
    let (mut q, mut h) = nalgebra::linalg::Hessenberg::new(a).unpack();
    let zero = C64::new(0.0, 0.0);
    let eps = f64::EPSILON;
    let tiny = f64::MIN_POSITIVE / eps;
    let budget = 30 * n.max(10);
    let mut ihi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    while ihi > 0 {
        let mut l = ihi;
        while l > 0 {
            let off = h[(l, l - 1)].norm();
            if off <= tiny || off <= eps * (h[(l - 1, l - 1)].norm() + h[(l, l)].norm()) {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == ihi {
            ihi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > budget {
            return None;
        }
        let mu = if its.is_multiple_of(10) {
            h[(ihi, ihi)] + 0.75 * h[(ihi, ihi - 1)].norm()
        } else {
            let (p, r, s, t) = (h[(ihi - 1, ihi - 1)], h[(ihi - 1, ihi)], h[(ihi, ihi - 1)], h[(ihi, ihi)]);
            let half = (p - t) * 0.5;
            let root = (half * half + r * s).sqrt();
            let (e1, e2) = (t + half + root, t + half - root);
            if (e1 - t).norm() <= (e2 - t).norm() { e1 } else { e2 }
        };
        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..ihi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            if r == 0.0 {
                continue;
            }
            let (c, sn) = if x.norm() == 0.0 {
                (0.0, C64::new(1.0, 0.0))
            } else {
                let phase = x / x.norm();
                (x.norm() / r, phase * y.conj() / r)
            };
            let first = if k > l { k - 1 } else { k };
            for col in first..n {
                let (u, v) = (h[(k, col)], h[(k + 1, col)]);
                h[(k, col)] = u * c + sn * v;
                h[(k + 1, col)] = -sn.conj() * u + v * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero;
            }
            for row in 0..=(k + 2).min(ihi) {
                let (u, v) = (h[(row, k)], h[(row, k + 1)]);
                h[(row, k)] = u * c + v * sn.conj();
                h[(row, k + 1)] = -u * sn + v * c;
            }
            for row in 0..n {
                let (u, v) = (q[(row, k)], q[(row, k + 1)]);
                q[(row, k)] = u * c + v * sn.conj();
                q[(row, k + 1)] = -u * sn + v * c;
            }
        }
    }
    for c in 0..n {
        for r in (c + 1)..n {
            h[(r, c)] = zero;
        }
    }
    Some((q, h))
}

fn schur(m: &Matrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let a = to_nalgebra(m);
    if let Some(qt) = try_schur(a.clone()) {
        return Ok(qt);
    }
    single_shift_schur(a).ok_or_else(|| {
        Error::NonConvergence(format!("Schur iteration on a {}x{} matrix did not converge", m.rows(), m.cols()))
    })
}

pub fn eigenvalues(m: &Matrix<C64>) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

fn one_norm(m: &Matrix<C64>) -> f64 {
    (0..m.cols()).map(|c| (0..m.rows()).map(|r| m.get(r, c).norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn eig(m: &Matrix<C64>, cond_max: f64) -> Result<SpectralData> {
    if !m.is_square() {
        return Err(Error::Dimension("eigendecomposition of a non-square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(SpectralData {
            eigenvalues: Vec::new(),
            right: Some(Matrix::zeros(0, 0)),
            left: Some(Matrix::zeros(0, 0)),
            diagonalizable: true,
            condition: 1.0,
            residual: 0.0,
        });
    }
    let (q, t) = schur(m)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;

    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        let mut y = vec![C64::new(0.0, 0.0); n];
        y[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, yj) in y.iter().enumerate().take(k + 1).skip(i + 1) {
                acc += t[(i, j)] * yj;
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < small {
                denom = C64::new(small, 0.0);
            }
            y[i] = -acc / denom;
        }
        let x = &q * nalgebra::DVector::from_vec(y);
        let norm = x.norm();
        for r in 0..n {
            vectors[(r, k)] = x[r] / norm;
        }
    }
    let right = from_nalgebra(&vectors);
    let residual = (0..n)
        .map(|k| {
            let u = right.column(k);
            let mu = m.matvec(&u);
            mu.iter().zip(&u).map(|(a, b)| (a - values[k] * b).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > 1e-6 * m.max_abs().max(1.0) {
        return Err(Error::NonConvergence(format!("eigenvector residual {residual:.3e}")));
    }

    let left = Lu::new(&right, 1e-300).ok().map(|lu| lu.inverse());
    let condition = match &left {
        Some(inv) => one_norm(&right) * one_norm(inv),
        None => f64::INFINITY,
    };
    let diagonalizable = condition.is_finite() && condition <= cond_max;
    Ok(SpectralData {
        eigenvalues: values,
        right: diagonalizable.then_some(right),
        left: if diagonalizable { left } else { None },
        diagonalizable,
        condition,
        residual,
    })
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &Matrix<C64>) -> Vec<f64> {
    let h = to_nalgebra(&m.hermitian_part());
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_eigenvalue(m: &Matrix<C64>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Half the sum of singular values of `a − b`; for Hermitian arguments this
/// is half the sum of absolute eigenvalues.
pub fn trace_distance(a: &Matrix<C64>, b: &Matrix<C64>) -> f64 {
    0.5 * hermitian_eigenvalues(&a.sub(b)).iter().map(|x| x.abs()).sum::<f64>()
}

pub fn singular_values(m: &Matrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = to_nalgebra(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of the column space (columns of the result), rank
/// decided by `tol_rank` relative to the largest singular value.
pub fn range_basis(m: &Matrix<C64>, tol_rank: f64) -> Matrix<C64> {
    let svd = to_nalgebra(m).svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol_rank * smax).collect();
    Matrix::from_fn(m.rows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Kernel vector of a superoperator, returned as a trace-one Hermitian
/// operator. Fails unless the kernel is one-dimensional.
pub fn null_vector<T: Field>(superop: &Matrix<T>, dim: usize, tol_rank: f64) -> Result<VectorizedOperator<T>> {
    if superop.rows() != dim * dim || superop.cols() != dim * dim {
        return Err(Error::Dimension(format!("superoperator is not {0}x{0}", dim * dim)));
    }
    let raw: Vec<T> = if T::EXACT {
        let kernel = null_space(superop, 0.0);
        if kernel.len() != 1 {
            return Err(Error::Degenerate { kernel_dim: kernel.len() });
        }
        kernel.into_iter().next().expect("one kernel vector")
    } else {
        let a = to_nalgebra(&superop.to_c64());
        let svd = a.svd(false, true);
        let s = &svd.singular_values;
        let smax = s.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let kernel_dim = s.iter().filter(|&&x| x <= tol_rank * smax).count();
        if kernel_dim != 1 {
            return Err(Error::Degenerate { kernel_dim });
        }
        let idx = (0..s.len()).min_by(|&i, &j| s[i].total_cmp(&s[j])).expect("nonempty");
        let v_t = svd.v_t.expect("requested V^T");
        (0..dim * dim).map(|c| T::from_c64(v_t[(idx, c)].conj()).expect("float field")).collect()
    };
    let v = VectorizedOperator::new(dim, raw)?;
    let tr = v.trace();
    if tr.is_negligible(1e-300) || tr.to_c64().norm() < 1e-14 {
        return Err(Error::Precondition("kernel vector is traceless".into()));
    }
    let normalized = v.unvectorize().map(|x| x.div_ref(&tr)).hermitian_part();
    super::matrix::vectorize(&normalized)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn schur_residual(a: &DMatrix<C64>, q: &DMatrix<C64>, t: &DMatrix<C64>) -> f64 {
        (q * t * q.adjoint() - a).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_shift_schur_reconstructs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::<C64>::from_fn(40, 40, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (q, t) = single_shift_schur(a.clone()).unwrap();
        assert!(schur_residual(&a, &q, &t) < 1e-11);
        assert!((q.adjoint() * &q - DMatrix::<C64>::identity(40, 40)).iter().all(|z| z.norm() < 1e-12));
        // Cyclic shift: eigenvalues are the 12th roots of unity, a classic QR stall.
        let p = DMatrix::<C64>::from_fn(12, 12, |i, j| if (i + 1) % 12 == j { c(1.0) } else { c(0.0) });
        let (q, t) = single_shift_schur(p.clone()).unwrap();
        assert!(schur_residual(&p, &q, &t) < 1e-12);
        for i in 0..12 {
            assert!((t[(i, i)].norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_matrix_spectrum() {
        let m = Matrix::diagonal(&[c(1.0), c(0.5)]);
        let s = eig(&m, 1e12).unwrap();
        assert!(s.diagonalizable);
        let mut vals: Vec<f64> = s.eigenvalues.iter().map(|z| z.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![0.5, 1.0]);
        let right = s.right.unwrap();
        for k in 0..2 {
            let u = right.column(k);
            let nonzero: Vec<usize> = (0..2).filter(|&i| u[i].norm() > 1e-12).collect();
            assert_eq!(nonzero.len(), 1, "eigenvectors are standard basis vectors");
            assert!((u[nonzero[0]].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_block_is_flagged_defective() {
        let m = Matrix::new(2, 2, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).unwrap();
        let s = eig(&m, 1e12).unwrap();
        assert!(!s.diagonalizable);
        assert!(s.right.is_none() && s.left.is_none());
        assert!(s.eigenvalues.iter().all(|z| (z - c(1.0)).norm() < 1e-12));
    }

    #[test]
    fn left_and_right_vectors_are_biorthonormal() {
        let m = Matrix::new(
            3,
            3,
            vec![
                C64::new(0.2, 0.1),
                C64::new(1.0, 0.0),
                C64::new(0.0, -0.3),
                C64::new(0.0, 0.5),
                C64::new(-0.7, 0.0),
                C64::new(0.4, 0.0),
                C64::new(1.1, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.3, 0.9),
            ],
        )
        .unwrap();
        let s = eig(&m, 1e12).unwrap();
        assert!(s.diagonalizable);
        let prod = s.left.as_ref().unwrap().matmul(s.right.as_ref().unwrap());
        assert!(prod.max_abs_diff(&Matrix::identity(3)) <= 1e-10);
        for k in 0..3 {
            let v = s.left.as_ref().unwrap().row(k).to_vec();
            let vm = m.vecmat(&v);
            let err = vm.iter().zip(&v).map(|(a, b)| (a - s.eigenvalues[k] * b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states_is_one() {
        let a = Matrix::diagonal(&[c(1.0), c(0.0)]);
        let b = Matrix::diagonal(&[c(0.0), c(1.0)]);
        assert!((trace_distance(&a, &b) - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a) < 1e-15);
    }
}
