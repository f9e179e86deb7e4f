//! Finite-group linear algebra around the averaging projection.
//!
//! For a finite pair the group algebra is realized concretely through the
//! left regular representation by permutation matrices over exact
//! rationals. The projection `p` is the average of `H`; its corner spans
//! the bi-invariant functions, so the rank of `{p M(x) p}` must equal the
//! number of double cosets. Fullness of `p` is decided by invertibility of
//! `S = Σ_x M(x) p M(x)^-1`, and cross-checked in the semidirect abelian
//! case against the dual-group criterion: the saturation Ω of the
//! annihilator of `H` under the transpose action must exhaust the dual.

use crate::coset::HeckePair;
use crate::error::{HeckeError, Result};
use crate::group::{FiniteGroup, GroupElement};
use crate::matrix::Matrix;
use crate::{QMatrix, Rational};
use num_integer::Integer;
use num_traits::Zero;
use std::collections::HashSet;
use std::sync::Arc;

/// Dense exact matrices get unwieldy beyond this order.
pub const MAX_REGULAR_ORDER: usize = 4096;

/// The left regular representation of a finite pair, together with the
/// element list of its subgroup.
pub struct RegularRep {
    group: Arc<FiniteGroup>,
    h_elements: Vec<usize>,
}

impl RegularRep {
    pub fn from_pair(pair: &HeckePair) -> Result<RegularRep> {
        let fg = pair.group().finite()?.clone();
        if fg.order() > MAX_REGULAR_ORDER {
            return Err(HeckeError::IndexOverflow {
                cap: MAX_REGULAR_ORDER,
            });
        }
        let h_elements: Vec<usize> = (0..fg.order())
            .filter(|&h| pair.is_in_subgroup(&GroupElement::Finite(h)))
            .collect();
        Ok(RegularRep {
            group: fg,
            h_elements,
        })
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn h_order(&self) -> usize {
        self.h_elements.len()
    }

    /// Permutation matrix of left translation: `M(g)[i][j] = 1` iff `i = g j`.
    pub fn matrix_of(&self, g: usize) -> QMatrix {
        let n = self.group.order();
        let mut m = Matrix::zero(n, n);
        for j in 0..n {
            *m.at_mut(self.group.mul(g, j), j) = Rational::from_integer(1.into());
        }
        m
    }

    /// `p = |H|^-1 Σ_{h∈H} M(h)`: idempotent, symmetric, trace `|G|/|H|`.
    pub fn projection(&self) -> QMatrix {
        let n = self.group.order();
        let inv_h = Rational::new(1.into(), (self.h_elements.len() as i64).into());
        let mut p = Matrix::zero(n, n);
        for &h in &self.h_elements {
            for j in 0..n {
                *p.at_mut(self.group.mul(h, j), j) += &inv_h;
            }
        }
        p
    }

    /// Decides whether `Σ_{x∈G} M(x) p M(x)^-1` is invertible (exact
    /// elimination). Conjugating a matrix by a permutation is an index
    /// relabeling, so the sum is assembled entry-wise.
    pub fn fullness_test(&self) -> bool {
        let n = self.group.order();
        let p = self.projection();
        let mut s: QMatrix = Matrix::zero(n, n);
        for x in 0..n {
            let xi = self.group.inv(x);
            for i in 0..n {
                let pi = self.group.mul(xi, i);
                for j in 0..n {
                    let pj = self.group.mul(xi, j);
                    *s.at_mut(i, j) += p.at(pi, pj);
                }
            }
        }
        !s.det().is_zero()
    }

    /// Rank of the span of `{p M(x) p : x in G}`; equals the number of
    /// double cosets `|H\G/H|`.
    pub fn corner_dimension(&self) -> usize {
        let n = self.group.order();
        let p = self.projection();
        let mut rows = Vec::with_capacity(n * n * n);
        for x in 0..n {
            let pxp = p.mul(&self.matrix_of(x)).mul(&p);
            rows.extend(pxp.entries().iter().cloned());
        }
        Matrix::from_rows(n, n * n, rows).rank()
    }
}

pub fn projection_p(pair: &HeckePair) -> Result<QMatrix> {
    Ok(RegularRep::from_pair(pair)?.projection())
}

pub fn fullness_test(pair: &HeckePair) -> Result<bool> {
    Ok(RegularRep::from_pair(pair)?.fullness_test())
}

pub fn corner_dimension(pair: &HeckePair) -> Result<usize> {
    Ok(RegularRep::from_pair(pair)?.corner_dimension())
}

/// A character of a finite abelian group, stored exactly as exponents:
/// `value(n) = exp(2·pi·i·exponents[n] / modulus)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DualCharacter {
    pub modulus: u64,
    pub exponents: Vec<u64>,
}

impl DualCharacter {
    pub fn is_trivial_on(&self, subset: &[usize]) -> bool {
        subset.iter().all(|&h| self.exponents[h] == 0)
    }
}

fn element_order(fg: &FiniteGroup, g: usize) -> u64 {
    let mut acc = g;
    let mut ord = 1u64;
    while acc != fg.identity_index() {
        acc = fg.mul(acc, g);
        ord += 1;
    }
    ord
}

/// All characters of a finite abelian group, by extending exponent
/// assignments on a greedy generating set and keeping the consistent ones.
pub fn dual_characters(fg: &FiniteGroup) -> Result<Vec<DualCharacter>> {
    if !fg.is_abelian() {
        return Err(HeckeError::NotAbelian);
    }
    let n = fg.order();
    // Greedy generating set: take any element not yet generated. In an
    // abelian group <S, g> = S * <g>, so one pass over powers closes it.
    let mut generated: HashSet<usize> = HashSet::from([fg.identity_index()]);
    let mut gens: Vec<usize> = Vec::new();
    for g in 0..n {
        if generated.contains(&g) {
            continue;
        }
        gens.push(g);
        let old: Vec<usize> = generated.iter().copied().collect();
        let mut g_pow = g;
        while g_pow != fg.identity_index() {
            for &s in &old {
                generated.insert(fg.mul(s, g_pow));
            }
            g_pow = fg.mul(g_pow, g);
        }
        if generated.len() == n {
            break;
        }
    }

    let orders: Vec<u64> = gens.iter().map(|&g| element_order(fg, g)).collect();
    let modulus = orders.iter().fold(1u64, |m, &o| m.lcm(&o));

    // Candidate exponent tuples on the generators; a candidate survives when
    // the induced values on all products are consistent.
    let mut characters: Vec<DualCharacter> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut tuple = vec![0u64; gens.len()];
    loop {
        if let Some(exponents) = extend_character(fg, &gens, &orders, &tuple, modulus) {
            if seen.insert(exponents.clone()) {
                characters.push(DualCharacter { modulus, exponents });
            }
        }
        // Advance the mixed-radix counter.
        let mut pos = 0;
        loop {
            if pos == gens.len() {
                debug_assert_eq!(characters.len(), n, "character count must equal |N|");
                return Ok(characters);
            }
            tuple[pos] += 1;
            if tuple[pos] < orders[pos] {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

fn extend_character(
    fg: &FiniteGroup,
    gens: &[usize],
    orders: &[u64],
    tuple: &[u64],
    modulus: u64,
) -> Option<Vec<u64>> {
    let n = fg.order();
    let mut value: Vec<Option<u64>> = vec![None; n];
    value[fg.identity_index()] = Some(0);
    let mut queue = vec![fg.identity_index()];
    while let Some(x) = queue.pop() {
        let vx = value[x].unwrap();
        for (i, &g) in gens.iter().enumerate() {
            let y = fg.mul(x, g);
            let vy = (vx + tuple[i] * (modulus / orders[i])) % modulus;
            match value[y] {
                None => {
                    value[y] = Some(vy);
                    queue.push(y);
                }
                Some(existing) if existing != vy => return None,
                Some(_) => {}
            }
        }
    }
    value.into_iter().collect::<Option<Vec<u64>>>()
}

/// Dual-side fullness criterion for a semidirect pair with `H` inside a
/// finite abelian `N`: saturate `H^⊥` under the transpose action of `Q` and
/// compare with the full dual. `action[q]` is the permutation `n -> α_q(n)`.
pub fn omega_is_full_dual(
    n_group: &FiniteGroup,
    h_elements: &[usize],
    action: &[Vec<usize>],
) -> Result<bool> {
    let n = n_group.order();
    for row in action {
        if row.len() != n {
            return Err(HeckeError::SpecInvalid("action row has wrong length".into()));
        }
        let mut seen = vec![false; n];
        for &img in row {
            if img >= n || std::mem::replace(&mut seen[img], true) {
                return Err(HeckeError::SpecInvalid(
                    "action row is not a permutation".into(),
                ));
            }
        }
    }
    let characters = dual_characters(n_group)?;
    let h_perp: Vec<&DualCharacter> = characters
        .iter()
        .filter(|c| c.is_trivial_on(h_elements))
        .collect();
    // As q ranges over all of Q so does q^-1, so composing with each row
    // directly yields the same union as the transpose action.
    let mut omega: HashSet<Vec<u64>> = HashSet::new();
    for chi in &h_perp {
        for row in action {
            let composed: Vec<u64> = (0..n).map(|x| chi.exponents[row[x]]).collect();
            omega.insert(composed);
        }
    }
    Ok(omega.len() == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: usize) -> FiniteGroup {
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        FiniteGroup::from_table(&rows).unwrap()
    }

    #[test]
    fn characters_of_cyclic_group() {
        let z6 = cyclic(6);
        let chars = dual_characters(&z6).unwrap();
        assert_eq!(chars.len(), 6);
        // Each character is multiplicative.
        for c in &chars {
            for a in 0..6 {
                for b in 0..6 {
                    let lhs = c.exponents[z6.mul(a, b)];
                    let rhs = (c.exponents[a] + c.exponents[b]) % c.modulus;
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn characters_of_klein_four() {
        // Z2 x Z2 as a table: indices (a, b) -> 2a + b.
        let rows = vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 3, 2],
            vec![2, 3, 0, 1],
            vec![3, 2, 1, 0],
        ];
        let v4 = FiniteGroup::from_table(&rows).unwrap();
        let chars = dual_characters(&v4).unwrap();
        assert_eq!(chars.len(), 4);
        let distinct: HashSet<_> = chars.iter().map(|c| c.exponents.clone()).collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn trivial_action_on_proper_subgroup_is_not_full() {
        let z4 = cyclic(4);
        let id_action = vec![(0..4).collect::<Vec<_>>()];
        // H = {0, 2}: H^perp has 2 of the 4 characters; trivial Q cannot
        // saturate.
        assert!(!omega_is_full_dual(&z4, &[0, 2], &id_action).unwrap());
        // H = {0}: H^perp is everything.
        assert!(omega_is_full_dual(&z4, &[0], &id_action).unwrap());
        // H = N: only the trivial character annihilates H.
        assert!(!omega_is_full_dual(&z4, &[0, 1, 2, 3], &id_action).unwrap());
        // ... except when N itself is trivial.
        assert!(omega_is_full_dual(&cyclic(1), &[0], &vec![vec![0]]).unwrap());
    }
}
