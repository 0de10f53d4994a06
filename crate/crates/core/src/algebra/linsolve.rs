//! Gaussian elimination over any [`Field`]: LU factorization, inverses,
//! reduced row echelon form, rank and kernels.
//!
//! Over the exact field a pivot is "zero" only when it is exactly zero;
//! over floats the threshold is `tol` relative to the largest entry.

use rayon::prelude::*;

use super::matrix::Matrix;
use super::scalar::{ExactComplex, Field};
use crate::error::{Error, Result};

/// A row-pivoted LU factorization `P A = L U`, kept so that repeated
/// solves reuse one factorization.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

fn pick_pivot<T: Field>(col: impl Iterator<Item = (usize, T)>, threshold: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (row, value) in col {
        if value.is_negligible(threshold) {
            continue;
        }
        let score = value.pivot_score();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((row, score));
        }
    }
    best.map(|(row, _)| row)
}

impl<T: Field> Lu<T> {
    pub fn new(a: &Matrix<T>, tol: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU of a non-square {}x{} matrix", a.rows(), a.cols())));
        }
        let n = a.rows();
        let threshold = tol * a.max_abs().max(1.0);
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = pick_pivot((k..n).map(|r| (r, lu[r * n + k].clone())), threshold)
                .ok_or_else(|| Error::Singular(format!("no usable pivot in column {k}")))?;
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k].clone();
            let pivot_row: Vec<(usize, T)> = ((k + 1)..n)
                .filter(|&c| !lu[k * n + c].is_zero())
                .map(|c| (c, lu[k * n + c].clone()))
                .collect();
            for r in (k + 1)..n {
                if lu[r * n + k].is_zero() {
                    continue;
                }
                let factor = lu[r * n + k].div_ref(&pivot);
                for (c, u) in &pivot_row {
                    let idx = r * n + c;
                    lu[idx] = lu[idx].sub_ref(&factor.mul_ref(u));
                }
                lu[r * n + k] = factor;
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side has the wrong length");
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for r in 0..n {
            let mut acc = x[r].clone();
            for c in 0..r {
                let l = &self.lu[r * n + c];
                if !l.is_zero() && !x[c].is_zero() {
                    acc = acc.sub_ref(&l.mul_ref(&x[c]));
                }
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r].clone();
            for c in (r + 1)..n {
                let u = &self.lu[r * n + c];
                if !u.is_zero() && !x[c].is_zero() {
                    acc = acc.sub_ref(&u.mul_ref(&x[c]));
                }
            }
            x[r] = acc.div_ref(&self.lu[r * n + r]);
        }
        x
    }

    pub fn inverse(&self) -> Matrix<T> {
        let n = self.n;
        let columns: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![T::zero(); n];
                e[j] = T::one();
                self.solve(&e)
            })
            .collect();
        Matrix::from_fn(n, n, |r, c| columns[c][r].clone())
    }
}

pub fn inverse<T: Field>(a: &Matrix<T>, tol: f64) -> Result<Matrix<T>> {
    Ok(Lu::new(a, tol)?.inverse())
}

/// Exact inverse over the Gaussian rationals; `a · a⁻¹` is exactly the
/// identity.
pub fn exact_inverse(a: &Matrix<ExactComplex>) -> Result<Matrix<ExactComplex>> {
    inverse(a, 0.0)
}

/// Reduced row echelon form together with the pivot columns.
pub fn rref<T: Field>(a: &Matrix<T>, tol: f64) -> (Matrix<T>, Vec<usize>) {
    let (rows, cols) = (a.rows(), a.cols());
    let threshold = tol * a.max_abs().max(1.0);
    let mut m = a.data().to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pick_pivot((r..rows).map(|i| (i, m[i * cols + c].clone())), threshold) else {
            for i in r..rows {
                m[i * cols + c] = T::zero();
            }
            continue;
        };
        if p != r {
            for j in 0..cols {
                m.swap(r * cols + j, p * cols + j);
            }
        }
        let pivot = m[r * cols + c].clone();
        for j in c..cols {
            m[r * cols + j] = m[r * cols + j].div_ref(&pivot);
        }
        let pivot_row: Vec<(usize, T)> =
            (c..cols).filter(|&j| !m[r * cols + j].is_zero()).map(|j| (j, m[r * cols + j].clone())).collect();
        for i in 0..rows {
            if i == r || m[i * cols + c].is_zero() {
                continue;
            }
            let factor = m[i * cols + c].clone();
            for (j, u) in &pivot_row {
                let idx = i * cols + j;
                m[idx] = m[idx].sub_ref(&factor.mul_ref(u));
            }
            m[i * cols + c] = T::zero();
        }
        pivots.push(c);
        r += 1;
    }
    (Matrix::new(rows, cols, m).expect("shape preserved"), pivots)
}

pub fn rank<T: Field>(a: &Matrix<T>, tol: f64) -> usize {
    rref(a, tol).1.len()
}

/// A basis of the right kernel, read off the reduced row echelon form.
pub fn null_space<T: Field>(a: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let (r, pivots) = rref(a, tol);
    let cols = a.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, f).clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::C64;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn ec(re: BigRational, im: BigRational) -> ExactComplex {
        ExactComplex::new(re, im)
    }

    fn real(p: i64, d: i64) -> ExactComplex {
        ec(q(p, d), q(0, 1))
    }

    #[test]
    fn exact_inverse_of_diagonal() {
        let a = Matrix::diagonal(&[real(2, 1), real(3, 1)]);
        let inv = exact_inverse(&a).unwrap();
        assert_eq!(inv, Matrix::diagonal(&[real(1, 2), real(1, 3)]));
    }

    #[test]
    fn exact_inverse_matches_adjugate() {
        // [[1, i], [-i, 2]] has determinant 1, so the inverse is the adjugate.
        let i = ExactComplex::imag_unit();
        let a = Matrix::new(2, 2, vec![real(1, 1), i.clone(), -i.clone(), real(2, 1)]).unwrap();
        let det = a.get(0, 0).mul_ref(a.get(1, 1)).sub_ref(&a.get(0, 1).mul_ref(a.get(1, 0)));
        assert_eq!(det, real(1, 1));
        let adjugate = Matrix::new(
            2,
            2,
            vec![a.get(1, 1).clone(), -a.get(0, 1).clone(), -a.get(1, 0).clone(), a.get(0, 0).clone()],
        )
        .unwrap();
        let expected = adjugate.map(|x| x.div_ref(&det));
        assert_eq!(expected, Matrix::new(2, 2, vec![real(2, 1), -i.clone(), i.clone(), real(1, 1)]).unwrap());
        assert_eq!(exact_inverse(&a).unwrap(), expected);
    }

    #[test]
    fn exact_singular_matrix_is_reported() {
        let a = Matrix::new(2, 2, vec![real(1, 1), real(2, 1), real(2, 1), real(4, 1)]).unwrap();
        assert!(matches!(exact_inverse(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn float_inverse_and_rank() {
        let a = Matrix::new(
            3,
            3,
            vec![
                C64::new(2., 0.),
                C64::new(0., 1.),
                C64::new(0., 0.),
                C64::new(1., 0.),
                C64::new(3., 0.),
                C64::new(1., -1.),
                C64::new(0., 0.),
                C64::new(1., 0.),
                C64::new(4., 0.),
            ],
        )
        .unwrap();
        let inv = inverse(&a, 1e-12).unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&Matrix::identity(3)) < 1e-14);
        assert_eq!(rank(&a, 1e-10), 3);
        let singular = Matrix::new(2, 2, vec![C64::new(1., 0.), C64::new(2., 0.), C64::new(2., 0.), C64::new(4., 0.)])
            .unwrap();
        assert_eq!(rank(&singular, 1e-10), 1);
        let kernel = null_space(&singular, 1e-10);
        assert_eq!(kernel.len(), 1);
        assert!(singular.matvec(&kernel[0]).iter().all(|x| x.norm() < 1e-14));
    }

    fn arb_exact() -> impl Strategy<Value = ExactComplex> {
        (-5i64..6, 1i64..5, -5i64..6, 1i64..5).prop_map(|(a, b, c, d)| ec(q(a, b), q(c, d)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn exact_inverse_is_exact(entries in proptest::collection::vec(arb_exact(), 16)) {
            let a = Matrix::new(4, 4, entries).unwrap();
            if let Ok(inv) = exact_inverse(&a) {
                prop_assert_eq!(a.matmul(&inv), Matrix::identity(4));
                prop_assert_eq!(inv.matmul(&a), Matrix::identity(4));
            } else {
                prop_assert!(rank(&a, 0.0) < 4);
            }
        }

        #[test]
        fn exact_kernel_vectors_are_annihilated(entries in proptest::collection::vec(arb_exact(), 12)) {
            let a = Matrix::new(3, 4, entries).unwrap();
            let kernel = null_space(&a, 0.0);
            prop_assert_eq!(kernel.len() + rank(&a, 0.0), 4);
            for v in kernel {
                prop_assert!(a.matvec(&v).iter().all(Field::is_zero));
            }
        }
    }
}
