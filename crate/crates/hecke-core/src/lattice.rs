//! Full-rank lattices in Q^n: Hermite normal form, intersection, and
//! reduction modulo a lattice.
//!
//! A lattice is given by a square basis matrix whose *columns* span it over
//! Z. The column-style Hermite normal form used here is upper triangular
//! with positive diagonal and entries to the right of each pivot reduced
//! into `[0, pivot)`; it is the unique such basis of the lattice, which makes
//! it usable as a canonical label for cosets of matrix groups that stabilize
//! a lattice.

use crate::matrix::Matrix;
use crate::{Int, QMatrix, Rational};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

type ZMatrix = Matrix<Int>;

/// Column Hermite normal form of a full-rank square integer matrix.
///
/// Returns `None` when the matrix is singular. Only unimodular column
/// operations are applied, so the result is a basis of the same column
/// lattice.
fn hnf_integer(m: &ZMatrix) -> Option<ZMatrix> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a = m.clone();
    // Pivot rows from the bottom up; pivot for row `r` lands in column `r`.
    for row in (0..n).rev() {
        // Clear columns 0..=row down to a single nonzero entry in this row
        // by repeated gcd steps, keeping the survivor in column `row`.
        loop {
            let mut best: Option<usize> = None;
            for c in 0..=row {
                if !a.at(row, c).is_zero() {
                    best = match best {
                        Some(b) if a.at(row, b).abs() <= a.at(row, c).abs() => Some(b),
                        _ => Some(c),
                    };
                }
            }
            let b = best?;
            let mut reduced_any = false;
            for c in 0..=row {
                if c == b || a.at(row, c).is_zero() {
                    continue;
                }
                let q = a.at(row, c).div_floor(a.at(row, b));
                if !q.is_zero() {
                    for r in 0..n {
                        let t = a.at(r, b).clone() * &q;
                        *a.at_mut(r, c) = a.at(r, c).clone() - t;
                    }
                }
                reduced_any = true;
            }
            if !reduced_any {
                a.swap_cols(b, row);
                break;
            }
        }
        if a.at(row, row).is_negative() {
            for r in 0..n {
                let v = -a.at(r, row).clone();
                *a.at_mut(r, row) = v;
            }
        }
        if a.at(row, row).is_zero() {
            return None;
        }
        // Reduce entries of this row to the right of the pivot.
        for c in row + 1..n {
            let q = a.at(row, c).div_floor(a.at(row, row));
            if q.is_zero() {
                continue;
            }
            for r in 0..n {
                let t = a.at(r, row).clone() * &q;
                *a.at_mut(r, c) = a.at(r, c).clone() - t;
            }
        }
    }
    Some(a)
}

fn common_denominator(m: &QMatrix) -> Int {
    let mut d = Int::one();
    for e in m.entries() {
        d = d.lcm(e.denom());
    }
    d
}

fn scale_to_integer(m: &QMatrix, d: &Int) -> ZMatrix {
    let elems = m
        .entries()
        .iter()
        .map(|q| {
            let scaled = q * Rational::from(d.clone());
            debug_assert!(scaled.denom().is_one());
            scaled.numer().clone()
        })
        .collect();
    Matrix::from_rows(m.rows(), m.cols(), elems)
}

fn unscale(m: &ZMatrix, d: &Int) -> QMatrix {
    let elems = m
        .entries()
        .iter()
        .map(|z| Rational::new(z.clone(), d.clone()))
        .collect();
    Matrix::from_rows(m.rows(), m.cols(), elems)
}

/// Canonical (HNF) basis of the lattice spanned by the columns of a
/// full-rank rational matrix. `None` when singular.
pub fn hnf_basis(basis: &QMatrix) -> Option<QMatrix> {
    let d = common_denominator(basis);
    let h = hnf_integer(&scale_to_integer(basis, &d))?;
    Some(unscale(&h, &d))
}

/// Basis of the intersection of two full-rank lattices in Q^n, in HNF.
///
/// Solves `b1 x = b2 y` over Z: the integer kernel of `[s1 | -s2]` (after
/// clearing denominators) projects onto the `x` coordinates, and `s1 x`
/// spans the intersection.
pub fn intersect(b1: &QMatrix, b2: &QMatrix) -> Option<QMatrix> {
    let n = b1.rows();
    assert_eq!((n, n), (b1.cols(), b2.rows()));
    assert_eq!(n, b2.cols());
    let d = common_denominator(b1).lcm(&common_denominator(b2));
    let s1 = scale_to_integer(b1, &d);
    let s2 = scale_to_integer(b2, &d);

    // Stacked system [s1 | -s2] with a 2n x 2n identity underneath tracking
    // the column operations; zero columns of the top block reveal the kernel.
    let two_n = 2 * n;
    let mut work = Matrix::from_rows(n + two_n, two_n, vec![Int::zero(); (n + two_n) * two_n]);
    for i in 0..n {
        for j in 0..n {
            *work.at_mut(i, j) = s1.at(i, j).clone();
            *work.at_mut(i, n + j) = -s2.at(i, j).clone();
        }
    }
    for j in 0..two_n {
        *work.at_mut(n + j, j) = Int::one();
    }

    // Column elimination on the top block, bottom-up, as in hnf_integer but
    // rectangular: after processing, columns whose top block is zero form a
    // kernel basis.
    let mut high = two_n; // columns >= high hold finished pivots
    for row in (0..n).rev() {
        loop {
            let mut best: Option<usize> = None;
            for c in 0..high {
                if !work.at(row, c).is_zero() {
                    best = match best {
                        Some(b) if work.at(row, b).abs() <= work.at(row, c).abs() => Some(b),
                        _ => Some(c),
                    };
                }
            }
            let Some(b) = best else { break };
            let mut reduced_any = false;
            for c in 0..high {
                if c == b || work.at(row, c).is_zero() {
                    continue;
                }
                let q = work.at(row, c).div_floor(work.at(row, b));
                if !q.is_zero() {
                    for r in 0..n + two_n {
                        let t = work.at(r, b).clone() * &q;
                        *work.at_mut(r, c) = work.at(r, c).clone() - t;
                    }
                }
                reduced_any = true;
            }
            if !reduced_any {
                high -= 1;
                work.swap_cols(b, high);
                break;
            }
        }
    }

    // Kernel columns: top block zero. Both lattices are full rank, so the
    // kernel has rank n.
    let mut kernel_x: Vec<Vec<Int>> = Vec::new();
    for c in 0..two_n {
        if (0..n).all(|r| work.at(r, c).is_zero()) {
            kernel_x.push((0..n).map(|r| work.at(n + r, c).clone()).collect());
        }
    }
    if kernel_x.len() != n {
        return None;
    }
    let mut inter = Matrix::from_rows(n, n, vec![Int::zero(); n * n]);
    for (j, x) in kernel_x.iter().enumerate() {
        for i in 0..n {
            let mut acc = Int::zero();
            for (k, xk) in x.iter().enumerate() {
                acc += s1.at(i, k).clone() * xk;
            }
            *inter.at_mut(i, j) = acc;
        }
    }
    let h = hnf_integer(&inter)?;
    Some(unscale(&h, &d))
}

/// Intersection of several full-rank lattices.
pub fn intersect_all(bases: &[QMatrix]) -> Option<QMatrix> {
    let mut acc = hnf_basis(bases.first()?)?;
    for b in &bases[1..] {
        acc = intersect(&acc, b)?;
    }
    Some(acc)
}

/// Canonical representative of `v` modulo the lattice spanned by `basis`:
/// the unique point of `v + L` inside the fundamental parallelepiped of the
/// HNF basis.
pub fn reduce_mod(basis: &QMatrix, v: &[Rational]) -> Option<Vec<Rational>> {
    let h = hnf_basis(basis)?;
    let coords = h.solve(&v.to_vec())?;
    let frac: Vec<Rational> = coords.iter().map(|c| c - c.floor()).collect();
    let n = h.rows();
    let mut out = vec![Rational::zero(); n];
    for i in 0..n {
        for (j, fj) in frac.iter().enumerate() {
            out[i] += h.at(i, j) * fj;
        }
    }
    Some(out)
}
