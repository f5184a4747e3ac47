//! Small dense matrices and LU factorization with partial pivoting.
//!
//! Network matrices here are at most a few tens of rows, so everything is
//! stored row-major in a single `Vec` and factored directly.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_traits::{Float, Zero};

use crate::error::{Error, Inversion, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                actual: data.len(),
                context: "row-major matrix data",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[S]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension {
                    expected: cols,
                    actual: r.len(),
                    context: "matrix row length",
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.finite())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                actual: rhs.rows,
                context: "matrix product inner dimension",
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                actual: v.len(),
                context: "matrix-vector product",
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(S::zero(), |acc, (&a, &x)| acc + a * x))
            .collect())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                actual: rhs.rows * rhs.cols,
                context: "elementwise operands",
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// Largest entrywise modulus of `self - rhs`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, rhs: &Self) -> S::Real {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(S::Real::zero(), Float::max)
    }

    pub fn max_abs(&self) -> S::Real {
        self.data.iter().map(|x| x.modulus()).fold(S::Real::zero(), Float::max)
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> S::Real {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self[(i, j)].modulus())
                    .fold(S::Real::zero(), |a, b| a + b)
            })
            .fold(S::Real::zero(), Float::max)
    }

    /// Copies out the sub-matrix picked by `rows` x `cols` index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Inverse with a 1-norm condition check.
    pub fn inverse(&self, which: Inversion) -> Result<Self> {
        let lu = Lu::factor(self, which)?;
        let inv = lu.inverse();
        check_condition(self, &inv, which)?;
        Ok(inv)
    }
}

fn check_condition<S: Scalar>(a: &DenseMatrix<S>, inv: &DenseMatrix<S>, which: Inversion) -> Result<()> {
    let cond = a.norm1() * inv.norm1();
    if !inv.all_finite() || !cond.is_finite() || cond > S::Real::condition_limit() {
        return Err(Error::Singular {
            which,
            condition: cond.as_f64(),
        });
    }
    Ok(())
}

impl<S> Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for DenseMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> Mul for &DenseMatrix<S> {
    type Output = DenseMatrix<S>;

    fn mul(self, rhs: Self) -> DenseMatrix<S> {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<S: Scalar> Add for &DenseMatrix<S> {
    type Output = DenseMatrix<S>;

    fn add(self, rhs: Self) -> DenseMatrix<S> {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<S: Scalar> Sub for &DenseMatrix<S> {
    type Output = DenseMatrix<S>;

    fn sub(self, rhs: Self) -> DenseMatrix<S> {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

/// LU factorization `P A = L U` with partial (row) pivoting.
#[derive(Debug, Clone)]
pub struct Lu<S> {
    n: usize,
    // Unit-lower L below the diagonal, U on and above it.
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn factor(a: &DenseMatrix<S>, which: Inversion) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension {
                expected: a.rows,
                actual: a.cols,
                context: "LU of non-square matrix",
            });
        }
        if !a.all_finite() {
            return Err(Error::NonFinite("matrix to factor"));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();

        for k in 0..n {
            let (p, pivot_mag) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].modulus()))
                    .fold(
                        (k, S::Real::zero()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot_mag <= scale * <S::Real as Float>::epsilon() || pivot_mag.is_zero() {
                return Err(Error::Singular {
                    which,
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= factor * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_vec(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: b.len(),
                context: "LU right-hand side",
            });
        }
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let (l, xk) = (self.lu[i * n + k], x[k]);
                x[i] -= l * xk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let (u, xk) = (self.lu[i * n + k], x[k]);
                x[i] -= u * xk;
            }
            x[i] /= self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
        if b.rows != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                actual: b.rows,
                context: "LU right-hand side rows",
            });
        }
        let mut out = DenseMatrix::zeros(b.rows, b.cols);
        let mut col = vec![S::zero(); b.rows];
        for j in 0..b.cols {
            for (i, c) in col.iter_mut().enumerate() {
                *c = b[(i, j)];
            }
            let x = self.solve_vec(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> DenseMatrix<S> {
        self.solve(&DenseMatrix::identity(self.n))
            .expect("identity has matching dimension")
    }
}
