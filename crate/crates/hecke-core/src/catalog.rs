//! Built-in pair constructors, character evaluators, and the JSON pair-spec
//! format consumed by the CLI.

use crate::coset::{
    finite_intersection_hook, finite_subgroup_descriptor, HeckePair, IntersectionHook, PairMeta,
    DEFAULT_MAX_INDEX,
};
use crate::error::{HeckeError, Result};
use crate::group::{psl2_coset_canonical, FiniteGroup, Group, GroupElement, SubgroupDescriptor};
use crate::matrix::Matrix;
use crate::rat::{is_integer, mod_one};
use crate::{lattice, Complex, Int, QMatrix, Rational};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::sync::Arc;

/// Validated construction parameters for one of the built-in families.
#[derive(Clone, Debug)]
pub enum PairSpec {
    Dihedral {
        max_index: Option<usize>,
    },
    FiniteSemidirect {
        n_table: Vec<Vec<usize>>,
        q_table: Vec<Vec<usize>>,
        action: Vec<Vec<usize>>,
        h: Vec<usize>,
        max_index: Option<usize>,
    },
    AxB {
        max_index: Option<usize>,
    },
    Heisenberg {
        max_index: Option<usize>,
    },
    Psl2 {
        q: u32,
        max_index: Option<usize>,
    },
    Brenken {
        dim: usize,
        q_generators: Vec<QMatrix>,
        assume_reduced: bool,
        max_index: Option<usize>,
    },
}

fn is_prime(q: u32) -> bool {
    q >= 2 && (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

impl PairSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            PairSpec::Dihedral { .. } => "dihedral",
            PairSpec::FiniteSemidirect { .. } => "finite_semidirect",
            PairSpec::AxB { .. } => "axb",
            PairSpec::Heisenberg { .. } => "heisenberg",
            PairSpec::Psl2 { .. } => "psl2",
            PairSpec::Brenken { .. } => "brenken",
        }
    }
}

/// Parse and validate a pair-spec JSON document.
pub fn parse_pair_spec(v: &Value) -> Result<PairSpec> {
    let family = v
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| HeckeError::SpecInvalid("missing \"family\"".into()))?;
    let max_index = match v.get("max_index") {
        None => None,
        Some(m) => Some(
            m.as_u64()
                .filter(|&m| m >= 1)
                .ok_or_else(|| HeckeError::SpecInvalid("max_index must be a positive integer".into()))?
                as usize,
        ),
    };
    let spec = match family {
        "dihedral" => PairSpec::Dihedral { max_index },
        "axb" => PairSpec::AxB { max_index },
        "heisenberg" => PairSpec::Heisenberg { max_index },
        "psl2" => {
            let q = v
                .get("q")
                .and_then(Value::as_u64)
                .ok_or_else(|| HeckeError::SpecInvalid("psl2 requires \"q\"".into()))?
                as u32;
            if !is_prime(q) {
                return Err(HeckeError::SpecInvalid(format!("q = {q} is not prime")));
            }
            PairSpec::Psl2 { q, max_index }
        }
        "finite_semidirect" => {
            let table = |key: &str| -> Result<Vec<Vec<usize>>> {
                let rows = v
                    .get(key)
                    .and_then(Value::as_array)
                    .ok_or_else(|| HeckeError::SpecInvalid(format!("missing table \"{key}\"")))?;
                rows.iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| {
                                HeckeError::SpecInvalid(format!("\"{key}\" rows must be arrays"))
                            })?
                            .iter()
                            .map(|e| {
                                e.as_u64().map(|x| x as usize).ok_or_else(|| {
                                    HeckeError::SpecInvalid(format!(
                                        "\"{key}\" entries must be indices"
                                    ))
                                })
                            })
                            .collect()
                    })
                    .collect()
            };
            let h = v
                .get("h")
                .and_then(Value::as_array)
                .ok_or_else(|| HeckeError::SpecInvalid("missing \"h\" element list".into()))?
                .iter()
                .map(|e| {
                    e.as_u64().map(|x| x as usize).ok_or_else(|| {
                        HeckeError::SpecInvalid("\"h\" entries must be indices".into())
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            let spec = PairSpec::FiniteSemidirect {
                n_table: table("n_table")?,
                q_table: table("q_table")?,
                action: table("action")?,
                h,
                max_index,
            };
            validate_semidirect(&spec)?;
            spec
        }
        "brenken" => {
            let dim = v
                .get("n")
                .and_then(Value::as_u64)
                .ok_or_else(|| HeckeError::SpecInvalid("brenken requires \"n\"".into()))?
                as usize;
            if dim == 0 {
                return Err(HeckeError::SpecInvalid("brenken dimension must be >= 1".into()));
            }
            let gens_v = v
                .get("q_generators")
                .and_then(Value::as_array)
                .ok_or_else(|| HeckeError::SpecInvalid("brenken requires \"q_generators\"".into()))?;
            let mut q_generators = Vec::with_capacity(gens_v.len());
            for gv in gens_v {
                let entries = matrix_entries_json(gv, dim)?;
                let m = Matrix::from_rows(dim, dim, entries);
                if !m.is_invertible() {
                    return Err(HeckeError::SpecInvalid(
                        "brenken generator is not invertible".into(),
                    ));
                }
                q_generators.push(m);
            }
            let assume_reduced = v
                .get("assume_reduced")
                .and_then(Value::as_bool)
                .unwrap_or(false);
            if !assume_reduced {
                return Err(HeckeError::SpecInvalid(
                    "brenken requires \"assume_reduced\": true (the caller asserts the pair is reduced)"
                        .into(),
                ));
            }
            PairSpec::Brenken {
                dim,
                q_generators,
                assume_reduced,
                max_index,
            }
        }
        other => {
            return Err(HeckeError::SpecInvalid(format!("unknown family {other:?}")));
        }
    };
    Ok(spec)
}

fn matrix_entries_json(v: &Value, dim: usize) -> Result<Vec<Rational>> {
    crate::group::matrix_entries(v, dim)
        .map_err(|e| HeckeError::SpecInvalid(format!("bad generator matrix: {e}")))
}

fn validate_semidirect(spec: &PairSpec) -> Result<()> {
    let PairSpec::FiniteSemidirect {
        n_table,
        q_table,
        action,
        h,
        ..
    } = spec
    else {
        unreachable!()
    };
    let ng = FiniteGroup::from_table(n_table)?;
    let qg = FiniteGroup::from_table(q_table)?;
    let n = ng.order();
    if action.len() != qg.order() {
        return Err(HeckeError::SpecInvalid(
            "action must have one row per Q element".into(),
        ));
    }
    for (qi, row) in action.iter().enumerate() {
        if row.len() != n {
            return Err(HeckeError::SpecInvalid(format!(
                "action row {qi} has wrong length"
            )));
        }
        let mut seen = vec![false; n];
        for &img in row {
            if img >= n || std::mem::replace(&mut seen[img], true) {
                return Err(HeckeError::SpecInvalid(format!(
                    "action row {qi} is not a permutation"
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if row[ng.mul(a, b)] != ng.mul(row[a], row[b]) {
                    return Err(HeckeError::SpecInvalid(format!(
                        "action row {qi} is not an automorphism"
                    )));
                }
            }
        }
    }
    for x in 0..n {
        if action[qg.identity_index()][x] != x {
            return Err(HeckeError::SpecInvalid(
                "identity of Q must act trivially".into(),
            ));
        }
    }
    for q1 in 0..qg.order() {
        for q2 in 0..qg.order() {
            for x in 0..n {
                if action[qg.mul(q1, q2)][x] != action[q1][action[q2][x]] {
                    return Err(HeckeError::SpecInvalid(
                        "action is not compatible with the Q table".into(),
                    ));
                }
            }
        }
    }
    if !h.contains(&ng.identity_index()) {
        return Err(HeckeError::SpecInvalid("h must contain the identity".into()));
    }
    for &a in h {
        if a >= n {
            return Err(HeckeError::SpecInvalid(format!("h element {a} out of range")));
        }
        for &b in h {
            if !h.contains(&ng.mul(a, b)) {
                return Err(HeckeError::SpecInvalid(
                    "h is not closed under the table".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Build the flat multiplication table of `N ⋊ Q` with element `(n, q)`
/// at index `n + |N| q`, and the indices of `H x {e}`.
pub fn semidirect_tables(
    n_table: &[Vec<usize>],
    q_table: &[Vec<usize>],
    action: &[Vec<usize>],
    h: &[usize],
) -> Result<(Vec<Vec<usize>>, Vec<usize>)> {
    let ng = FiniteGroup::from_table(n_table)?;
    let qg = FiniteGroup::from_table(q_table)?;
    let n = ng.order();
    let order = n * qg.order();
    let idx = |nn: usize, qq: usize| nn + n * qq;
    let mut table = vec![vec![0usize; order]; order];
    for q1 in 0..qg.order() {
        for n1 in 0..n {
            for q2 in 0..qg.order() {
                for n2 in 0..n {
                    // (n1, q1)(n2, q2) = (n1 · α_{q1}(n2), q1 q2)
                    let prod = idx(ng.mul(n1, action[q1][n2]), qg.mul(q1, q2));
                    table[idx(n1, q1)][idx(n2, q2)] = prod;
                }
            }
        }
    }
    let h_indices: Vec<usize> = h.iter().map(|&hh| idx(hh, qg.identity_index())).collect();
    Ok((table, h_indices))
}

/// Instantiate a pair from a validated spec. The subgroup generators and
/// coset normal forms are fixed per family.
pub fn build_pair(spec: &PairSpec) -> Result<Arc<HeckePair>> {
    let max_index = match spec {
        PairSpec::Dihedral { max_index }
        | PairSpec::FiniteSemidirect { max_index, .. }
        | PairSpec::AxB { max_index }
        | PairSpec::Heisenberg { max_index }
        | PairSpec::Psl2 { max_index, .. }
        | PairSpec::Brenken { max_index, .. } => max_index.unwrap_or(DEFAULT_MAX_INDEX),
    };
    let mut meta = PairMeta {
        family: spec.family_name().to_string(),
        q: None,
        assumed_reduced: None,
    };
    let pair = match spec {
        PairSpec::Dihedral { .. } => {
            let sub = SubgroupDescriptor::new(
                |g| matches!(g, GroupElement::Dihedral { exp: 0, .. }),
                vec![GroupElement::dihedral(0, true)],
            )
            .with_canonicalizer(|g| match g {
                GroupElement::Dihedral { exp, .. } => GroupElement::dihedral(*exp, false),
                other => other.clone(),
            });
            HeckePair::new(Group::Dihedral, sub, max_index)
                .with_intersection_hook(dihedral_intersection_hook())
        }
        PairSpec::AxB { .. } => {
            let one = Rational::one();
            let sub = SubgroupDescriptor::new(
                move |g| match g {
                    GroupElement::AxB { scale, shift } => *scale == one && is_integer(shift),
                    _ => false,
                },
                vec![GroupElement::AxB {
                    scale: Rational::one(),
                    shift: Rational::one(),
                }],
            )
            .with_canonicalizer(|g| match g {
                GroupElement::AxB { scale, shift } => {
                    // gH = {(a, b + a m)}: reduce the shift mod |a|.
                    let step = scale.abs();
                    let reduced = shift - (shift / &step).floor() * &step;
                    GroupElement::AxB {
                        scale: scale.clone(),
                        shift: reduced,
                    }
                }
                other => other.clone(),
            });
            HeckePair::new(Group::AxB, sub, max_index)
                .with_intersection_hook(axb_intersection_hook())
        }
        PairSpec::Heisenberg { .. } => {
            let sub = SubgroupDescriptor::new(
                |g| match g {
                    GroupElement::Heisenberg { u, v, w } => {
                        is_integer(u) && is_integer(v) && w.is_zero()
                    }
                    _ => false,
                },
                vec![
                    GroupElement::heisenberg(Rational::one(), Rational::zero(), Rational::zero()),
                    GroupElement::heisenberg(Rational::zero(), Rational::one(), Rational::zero()),
                ],
            )
            .with_canonicalizer(|g| match g {
                GroupElement::Heisenberg { u, v, w } => {
                    // Unique coset member with both translation parts in
                    // [0,1): right-multiply by [-floor(u), -floor(v), 0];
                    // the center picks up v * (-floor(u)) from the group law.
                    let m = u.floor();
                    GroupElement::heisenberg(u - &m, v - v.floor(), w - v * m)
                }
                other => other.clone(),
            });
            HeckePair::new(Group::Heisenberg, sub, max_index)
                .with_intersection_hook(heisenberg_intersection_hook())
        }
        PairSpec::Psl2 { q, .. } => {
            meta.q = Some(*q);
            let sub = SubgroupDescriptor::new(
                |g| match g {
                    GroupElement::Psl2(m) => m.entries().iter().all(is_integer),
                    _ => false,
                },
                vec![psl2_s(), psl2_t()],
            )
            .with_canonicalizer(psl2_coset_canonical);
            HeckePair::new(Group::Psl2, sub, max_index)
        }
        PairSpec::FiniteSemidirect {
            n_table,
            q_table,
            action,
            h,
            ..
        } => {
            let (table, h_indices) = semidirect_tables(n_table, q_table, action, h)?;
            let fg = Arc::new(FiniteGroup::from_table(&table)?);
            let sub = finite_subgroup_descriptor(&fg, &h_indices);
            let hook = finite_intersection_hook(&fg, &sub);
            HeckePair::new(Group::Finite(fg), sub, max_index).with_intersection_hook(hook)
        }
        PairSpec::Brenken {
            dim,
            assume_reduced,
            ..
        } => {
            meta.assumed_reduced = Some(*assume_reduced);
            let n = *dim;
            let sub = SubgroupDescriptor::new(
                move |g| match g {
                    GroupElement::MatrixQ(m) if m.rows() == n + 1 => {
                        affine_parts(m).is_some_and(|(a, b)| {
                            a == Matrix::identity(n) && b.iter().all(is_integer)
                        })
                    }
                    _ => false,
                },
                (0..n)
                    .map(|i| {
                        let mut m = Matrix::identity(n + 1);
                        *m.at_mut(i, n) = Rational::one();
                        GroupElement::MatrixQ(m)
                    })
                    .collect(),
            )
            .with_canonicalizer(brenken_coset_canonical);
            HeckePair::new(Group::MatrixQ { dim: n + 1 }, sub, max_index)
                .with_intersection_hook(brenken_intersection_hook(n))
        }
    };
    Ok(Arc::new(pair.with_meta(meta)))
}

/// The classical generators of the integer projective subgroup.
pub fn psl2_s() -> GroupElement {
    GroupElement::psl2([
        Rational::zero(),
        -Rational::one(),
        Rational::one(),
        Rational::zero(),
    ])
    .expect("det 1")
}

pub fn psl2_t() -> GroupElement {
    GroupElement::psl2([
        Rational::one(),
        Rational::one(),
        Rational::zero(),
        Rational::one(),
    ])
    .expect("det 1")
}

/// `diag(q^n, q^-n)`, the standard degree-`n` class representative.
pub fn psl2_diag(q: u32, n: u32) -> GroupElement {
    let qn = Int::from(q).pow(n);
    GroupElement::psl2([
        Rational::from_integer(qn.clone()),
        Rational::zero(),
        Rational::zero(),
        Rational::new(Int::one(), qn),
    ])
    .expect("det 1")
}

/// Splits an affine matrix `[[A, b], [0, 1]]`; `None` when the bottom row is
/// not `(0, ..., 0, 1)`.
fn affine_parts(m: &QMatrix) -> Option<(QMatrix, Vec<Rational>)> {
    let n = m.rows() - 1;
    for j in 0..n {
        if !m.at(n, j).is_zero() {
            return None;
        }
    }
    if !m.at(n, n).is_one() {
        return None;
    }
    let mut a = Matrix::zero(n, n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        for j in 0..n {
            *a.at_mut(i, j) = m.at(i, j).clone();
        }
        b.push(m.at(i, n).clone());
    }
    Some((a, b))
}

fn assemble_affine(a: &QMatrix, b: &[Rational]) -> QMatrix {
    let n = a.rows();
    let mut m = Matrix::identity(n + 1);
    for i in 0..n {
        for j in 0..n {
            *m.at_mut(i, j) = a.at(i, j).clone();
        }
        *m.at_mut(i, n) = b[i].clone();
    }
    m
}

/// Coset normal form for the affine family: `gH = {[[A, b + A m]] : m ∈ Z^n}`,
/// so reduce the translation modulo the lattice `A Z^n`.
fn brenken_coset_canonical(g: &GroupElement) -> GroupElement {
    let GroupElement::MatrixQ(m) = g else {
        return g.clone();
    };
    let (a, b) = affine_parts(m).unwrap_or_else(|| {
        panic!("affine-family coset normal form applied to a non-affine matrix")
    });
    let reduced = lattice::reduce_mod(&a, &b).expect("affine block is invertible");
    GroupElement::MatrixQ(assemble_affine(&a, &reduced))
}

fn dihedral_intersection_hook() -> IntersectionHook {
    Arc::new(|window: &[GroupElement]| {
        // y H y^-1 = {e, a^{2k} b} for y in the coset a^k H.
        let mut ks = window.iter().map(|y| match y {
            GroupElement::Dihedral { exp, .. } => Some(*exp),
            _ => None,
        });
        let first = ks.next()??;
        if ks.all(|k| k == Some(first)) {
            Some(vec![GroupElement::dihedral(2 * first, true)])
        } else {
            Some(vec![])
        }
    })
}

fn axb_intersection_hook() -> IntersectionHook {
    Arc::new(|window: &[GroupElement]| {
        // y H y^-1 is the translation subgroup a Z for y = (a, b); the
        // intersection over the window is a 1-dimensional lattice.
        let mut bases = Vec::with_capacity(window.len());
        for y in window {
            let GroupElement::AxB { scale, .. } = y else {
                return None;
            };
            bases.push(Matrix::from_rows(1, 1, vec![scale.abs()]));
        }
        let inter = lattice::intersect_all(&bases)?;
        Some(vec![GroupElement::AxB {
            scale: Rational::one(),
            shift: inter.at(0, 0).clone(),
        }])
    })
}

fn heisenberg_intersection_hook() -> IntersectionHook {
    Arc::new(|window: &[GroupElement]| {
        // Members of every conjugate have integer translation parts (u, v)
        // and center forced to y_i u - x_i v mod 1, so the window imposes
        // the congruences (y_i - y_1) u - (x_i - x_1) v ∈ Z on (u, v) ∈ Z².
        let mut coords = Vec::with_capacity(window.len());
        for y in window {
            let GroupElement::Heisenberg { u, v, .. } = y else {
                return None;
            };
            coords.push((u.clone(), v.clone()));
        }
        let (x1, y1) = coords[0].clone();
        let mut basis: Vec<(Int, Int)> = vec![(Int::one(), Int::zero()), (Int::zero(), Int::one())];
        for (xi, yi) in &coords[1..] {
            let alpha = yi - &y1;
            let beta = xi - &x1;
            basis = refine_congruence(&basis, &alpha, &beta)?;
        }
        let gens = basis
            .into_iter()
            .map(|(u, v)| {
                let u = Rational::from_integer(u);
                let v = Rational::from_integer(v);
                let w = mod_one(&(&y1 * &u - &x1 * &v));
                GroupElement::heisenberg(u, v, w)
            })
            .collect();
        Some(gens)
    })
}

/// Restrict an integer 2-lattice to the solutions of `α u - β v ∈ Z`.
///
/// Writing the constraint on the current basis as `m c1 + n c2 ≡ 0 (mod d)`
/// in coefficient space, the solution lattice has the explicit Hermite basis
/// `(d/g1, 0), (q, g1/gcd(c2, g1))` with `g1 = gcd(c1, d)` and `q` solving
/// the matching congruence.
fn refine_congruence(
    basis: &[(Int, Int)],
    alpha: &Rational,
    beta: &Rational,
) -> Option<Vec<(Int, Int)>> {
    use num_integer::Integer;
    let d = alpha.denom().lcm(beta.denom());
    if d.is_one() {
        return Some(basis.to_vec());
    }
    let an = (alpha * Rational::from_integer(d.clone())).numer().clone();
    let bn = (beta * Rational::from_integer(d.clone())).numer().clone();
    let d = d.to_i64()?;
    let c1 = (&an * &basis[0].0 - &bn * &basis[0].1).mod_floor(&Int::from(d)).to_i64()?;
    let c2 = (&an * &basis[1].0 - &bn * &basis[1].1).mod_floor(&Int::from(d)).to_i64()?;

    let g1 = gcd_i64(c1, d);
    let p = d / g1;
    let r = g1 / gcd_i64(c2, g1);
    // Solve q c1 ≡ -r c2 (mod d); g1 divides r c2 by construction.
    let rhs = (-r * c2).rem_euclid(d);
    debug_assert_eq!(rhs % g1, 0);
    let q = if c1 % d == 0 {
        0
    } else {
        let (inv, modulus) = (mod_inverse(c1 / g1, d / g1)?, d / g1);
        ((rhs / g1) % modulus * inv) % modulus
    };
    debug_assert_eq!((q * c1 + r * c2).rem_euclid(d), 0);
    let coeffs = [(Int::from(p), Int::zero()), (Int::from(q), Int::from(r))];
    // Map back through the current basis.
    let combine = |m: &Int, n: &Int| {
        (
            m * &basis[0].0 + n * &basis[1].0,
            m * &basis[0].1 + n * &basis[1].1,
        )
    };
    Some(vec![
        combine(&coeffs[0].0, &coeffs[0].1),
        combine(&coeffs[1].0, &coeffs[1].1),
    ])
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m))
}

fn brenken_intersection_hook(n: usize) -> IntersectionHook {
    Arc::new(move |window: &[GroupElement]| {
        let mut blocks = Vec::with_capacity(window.len());
        for y in window {
            let GroupElement::MatrixQ(m) = y else {
                return None;
            };
            let (a, _) = affine_parts(m)?;
            blocks.push(a);
        }
        let inter = lattice::intersect_all(&blocks)?;
        let gens = (0..n)
            .map(|j| {
                let mut m = Matrix::identity(n + 1);
                for i in 0..n {
                    *m.at_mut(i, n) = inter.at(i, j).clone();
                }
                GroupElement::MatrixQ(m)
            })
            .collect();
        Some(gens)
    })
}

/// The transitive permutation group of the integer-pairs example that is
/// closed but not Hecke: `Z² ⋊ Z₂` with the swap action, stabilizing the
/// point lattice line `0 x Z` as its subgroup. Orbits of cosets under the
/// stabilizer are infinite, which the orbit check reports as overflow.
pub fn closed_not_hecke_pair(max_index: usize) -> Arc<HeckePair> {
    let sub = SubgroupDescriptor::new(
        |g| match g {
            GroupElement::MatrixQ(m) if m.rows() == 3 => affine_parts(m).is_some_and(|(a, b)| {
                a == Matrix::identity(2) && b[0].is_zero() && is_integer(&b[1])
            }),
            _ => false,
        },
        vec![GroupElement::MatrixQ(assemble_affine(
            &Matrix::identity(2),
            &[Rational::zero(), Rational::one()],
        ))],
    )
    .with_canonicalizer(|g| {
        let GroupElement::MatrixQ(m) = g else {
            return g.clone();
        };
        let (a, b) = affine_parts(m)
            .unwrap_or_else(|| panic!("stabilizer normal form applied to a non-affine matrix"));
        // gH translates b along the line A·e2; reduce the pivot coordinate.
        let dir = [a.at(0, 1).clone(), a.at(1, 1).clone()];
        let k = if dir[0].is_zero() { 1 } else { 0 };
        let t = (&b[k] / &dir[k]).floor();
        let reduced = vec![&b[0] - &dir[0] * &t, &b[1] - &dir[1] * &t];
        GroupElement::MatrixQ(assemble_affine(&a, &reduced))
    });
    Arc::new(
        HeckePair::new(Group::MatrixQ { dim: 3 }, sub, max_index).with_meta(PairMeta {
            family: "closed-not-hecke".into(),
            q: None,
            assumed_reduced: Some(true),
        }),
    )
}

/// Pair-spec JSON for a plain finite pair, encoded as a semidirect product
/// with trivial Q so it round-trips through `parse_pair_spec`.
pub fn finite_pair_spec_json(table: &[Vec<usize>], h: &[usize]) -> Value {
    let n = table.len();
    json!({
        "family": "finite_semidirect",
        "n_table": table,
        "q_table": [[0]],
        "action": [(0..n).collect::<Vec<usize>>()],
        "h": h,
    })
}

/// A closed-form character to evaluate against engine convolutions.
#[derive(Clone, Debug)]
pub enum CharacterSpec {
    /// `π_c(φ_n) = (c^n + c^-n)/2` on the dihedral pair; `c != 0`.
    DihedralPiC { c: Complex },
    /// Hall's family on the projective pair, `z ∉ {0, 1}`.
    Psl2HallZ { q: u32, z: Complex },
    /// The `z = 1` limit of Hall's family.
    Psl2HallZ1 { q: u32 },
}

impl CharacterSpec {
    fn validate(&self) -> Result<()> {
        match self {
            CharacterSpec::DihedralPiC { c } => {
                if c.norm_sqr() == 0.0 {
                    return Err(HeckeError::DegenerateParameter("c must be nonzero".into()));
                }
            }
            CharacterSpec::Psl2HallZ { q, z } => {
                if !is_prime(*q) {
                    return Err(HeckeError::SpecInvalid(format!("q = {q} is not prime")));
                }
                if z.norm_sqr() == 0.0 || (z - Complex::new(1.0, 0.0)).norm_sqr() == 0.0 {
                    return Err(HeckeError::DegenerateParameter(
                        "z must avoid 0 and 1 (use the z = 1 branch)".into(),
                    ));
                }
            }
            CharacterSpec::Psl2HallZ1 { q } => {
                if !is_prime(*q) {
                    return Err(HeckeError::SpecInvalid(format!("q = {q} is not prime")));
                }
            }
        }
        Ok(())
    }
}

/// Evaluate the closed form at degree `m`.
pub fn char_eval(spec: &CharacterSpec, m: u32) -> Result<Complex> {
    spec.validate()?;
    let value = match spec {
        CharacterSpec::DihedralPiC { c } => {
            let cm = c.powi(m as i32);
            (cm + cm.inv()) / 2.0
        }
        CharacterSpec::Psl2HallZ { q, z } => {
            let qf = Complex::new(*q as f64, 0.0);
            let one = Complex::new(1.0, 0.0);
            let a = (one - qf * z) / ((qf + one) * (one - z));
            let b = (qf - z) / ((qf + one) * (one - z));
            a * (z / qf).powi(m as i32) + b * (one / (qf * z)).powi(m as i32)
        }
        CharacterSpec::Psl2HallZ1 { q } => {
            let qf = *q as f64;
            let num = 2.0 * (m as f64) * (qf - 1.0) + qf + 1.0;
            Complex::new(num / ((qf + 1.0) * qf.powi(m as i32)), 0.0)
        }
    };
    Ok(value)
}

#[derive(Clone, Debug)]
pub struct CharacterReport {
    pub cases: usize,
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

fn rational_to_f64(q: &Rational) -> f64 {
    q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
}

/// Checks multiplicativity `π(φ_m * φ_n) = π(φ_m) π(φ_n)` for all
/// `0 <= n <= m <= max_degree`: the convolution is exact, the character
/// evaluation floating. Reports the maximum absolute deviation.
pub fn verify_character(
    pair: &Arc<HeckePair>,
    spec: &CharacterSpec,
    max_degree: u32,
    tol: f64,
) -> Result<CharacterReport> {
    spec.validate()?;
    let family_ok = match spec {
        CharacterSpec::DihedralPiC { .. } => pair.meta().family == "dihedral",
        CharacterSpec::Psl2HallZ { q, .. } | CharacterSpec::Psl2HallZ1 { q } => {
            pair.meta().family == "psl2" && pair.meta().q == Some(*q)
        }
    };
    if !family_ok {
        return Err(HeckeError::PairMismatch);
    }
    let rep_of_degree = |k: u32| -> GroupElement {
        match spec {
            CharacterSpec::DihedralPiC { .. } => GroupElement::dihedral(k as i64, false),
            CharacterSpec::Psl2HallZ { q, .. } | CharacterSpec::Psl2HallZ1 { q } => {
                psl2_diag(*q, k)
            }
        }
    };
    let top = 2 * max_degree;
    let mut degree_of = std::collections::HashMap::new();
    for k in 0..=top {
        let id = pair.double_coset_of(&rep_of_degree(k))?;
        if degree_of.insert(id, k).is_some() {
            return Err(HeckeError::SpecInvalid(
                "degree representatives are not in distinct classes".into(),
            ));
        }
    }
    let values: Vec<Complex> = (0..=top)
        .map(|k| char_eval(spec, k))
        .collect::<Result<_>>()?;

    let mut max_deviation: f64 = 0.0;
    let mut cases = 0;
    for m in 0..=max_degree {
        let phi_m = crate::HeckeElement::phi_of(pair, &rep_of_degree(m))?;
        for n in 0..=m {
            let phi_n = crate::HeckeElement::phi_of(pair, &rep_of_degree(n))?;
            let product = phi_m.convolve(&phi_n)?;
            let mut rhs = Complex::new(0.0, 0.0);
            for (&id, coeff) in product.to_phi().terms() {
                let deg = degree_of.get(&id).ok_or_else(|| {
                    HeckeError::SpecInvalid("product leaves the graded classes".into())
                })?;
                rhs += Complex::new(rational_to_f64(coeff), 0.0) * values[*deg as usize];
            }
            let lhs = values[m as usize] * values[n as usize];
            max_deviation = max_deviation.max((lhs - rhs).norm());
            cases += 1;
        }
    }
    Ok(CharacterReport {
        cases,
        max_deviation,
        tol,
        pass: max_deviation <= tol,
    })
}
