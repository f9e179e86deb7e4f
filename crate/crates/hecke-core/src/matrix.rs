//! Dense matrices over an exact scalar.
//!
//! The entry type is generic so the elimination code works over any exact
//! division ring; in this crate it is only instantiated at [`crate::Rational`]
//! (see the [`crate::QMatrix`] alias). Determinants and ranks use
//! fraction-free Bareiss elimination: every division in the update step is by
//! a previous pivot and is exact, which keeps intermediate entries as
//! quotients of minors instead of letting them blow up.

use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Div, Mul, Neg, Sub};

/// Entry bounds for the elimination routines.
pub trait Scalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
{
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    elems: Vec<T>,
}

impl<T> Matrix<T> {
    pub fn from_rows(rows: usize, cols: usize, elems: Vec<T>) -> Self {
        assert_eq!(rows * cols, elems.len(), "element count mismatch");
        Matrix { rows, cols, elems }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.elems[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.elems[i * self.cols + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.elems
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.elems.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.elems.swap(r * self.cols + i, r * self.cols + j);
        }
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            elems: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = T::one();
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a.clone() * other.at(k, j).clone();
                    *out.at_mut(i, j) = out.at(i, j).clone() + t;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            elems,
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        let elems = self.elems.iter().map(|a| a.clone() * c.clone()).collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            elems,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut m = self.clone();
        let mut prev = T::one();
        let mut sign_flip = false;
        for k in 0..n - 1 {
            if m.at(k, k).is_zero() {
                match (k + 1..n).find(|&r| !m.at(r, k).is_zero()) {
                    Some(r) => {
                        m.swap_rows(k, r);
                        sign_flip = !sign_flip;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m.at(k, k).clone() * m.at(i, j).clone()
                        - m.at(i, k).clone() * m.at(k, j).clone();
                    *m.at_mut(i, j) = num / prev.clone();
                }
                *m.at_mut(i, k) = T::zero();
            }
            prev = m.at(k, k).clone();
        }
        let d = m.at(n - 1, n - 1).clone();
        if sign_flip {
            -d
        } else {
            d
        }
    }

    /// Rank by fraction-free forward elimination (column pivoting skips
    /// columns that vanish below the current row).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut prev = T::one();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(pivot) = (rank..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            for i in rank + 1..m.rows {
                for j in col + 1..m.cols {
                    let num = m.at(rank, col).clone() * m.at(i, j).clone()
                        - m.at(i, col).clone() * m.at(rank, j).clone();
                    *m.at_mut(i, j) = num / prev.clone();
                }
                *m.at_mut(i, col) = T::zero();
            }
            prev = m.at(rank, col).clone();
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        !self.det().is_zero()
    }

    /// Inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.at(r, col).is_zero())?;
            m.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = m.at(col, col).clone();
            for j in 0..n {
                *m.at_mut(col, j) = m.at(col, j).clone() / p.clone();
                *inv.at_mut(col, j) = inv.at(col, j).clone() / p.clone();
            }
            for i in 0..n {
                if i == col || m.at(i, col).is_zero() {
                    continue;
                }
                let f = m.at(i, col).clone();
                for j in 0..n {
                    let a = m.at(col, j).clone() * f.clone();
                    *m.at_mut(i, j) = m.at(i, j).clone() - a;
                    let b = inv.at(col, j).clone() * f.clone();
                    *inv.at_mut(i, j) = inv.at(i, j).clone() - b;
                }
            }
        }
        Some(inv)
    }

    /// Solve `self * x = rhs` for a single column; `None` when singular.
    pub fn solve(&self, rhs: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.len(), self.rows);
        let inv = self.inverse()?;
        let mut out = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = T::zero();
            for j in 0..self.cols {
                acc = acc + inv.at(i, j).clone() * rhs[j].clone();
            }
            out[i] = acc;
        }
        Some(out)
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.elems[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
