//! Group backends and exact element arithmetic.
//!
//! Every element is stored in a canonical form whose structural equality
//! coincides with equality in the group: rationals fully reduced with
//! positive denominator, the Heisenberg center coordinate in `[0, 1)`, and
//! projective 2x2 matrices sign-normalized so the first nonzero entry in
//! row-major order is positive. The canonical JSON rendering of an element
//! (rationals as `"num/den"` strings) is the deterministic tiebreaker
//! wherever an ordering is needed.

use crate::error::{HeckeError, Result};
use crate::lattice;
use crate::matrix::Matrix;
use crate::rat::{format_rational, mod_one, parse_rational};
use crate::{Int, QMatrix, Rational};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BackendTag {
    Finite,
    Dihedral,
    AxB,
    Heisenberg,
    Psl2,
    MatrixQ,
}

impl fmt::Display for BackendTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BackendTag::Finite => "finite",
            BackendTag::Dihedral => "dihedral",
            BackendTag::AxB => "axb",
            BackendTag::Heisenberg => "heisenberg",
            BackendTag::Psl2 => "psl2",
            BackendTag::MatrixQ => "matrixq",
        };
        f.write_str(s)
    }
}

/// An element of one of the concrete group backends.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum GroupElement {
    /// Index into a finite multiplication table.
    Finite(usize),
    /// `a^n b^e` in the infinite dihedral group `<a, b | b^2, bab = a^-1>`.
    Dihedral { exp: i64, flip: bool },
    /// The affine map `x -> a x + b` with `a` a nonzero rational.
    AxB { scale: Rational, shift: Rational },
    /// Upper unitriangular 3x3 matrix `[u, v, w]` with `w` taken mod 1.
    Heisenberg {
        u: Rational,
        v: Rational,
        w: Rational,
    },
    /// Determinant-1 2x2 rational matrix modulo sign.
    Psl2(QMatrix),
    /// Invertible square rational matrix.
    MatrixQ(QMatrix),
}

impl GroupElement {
    pub fn tag(&self) -> BackendTag {
        match self {
            GroupElement::Finite(_) => BackendTag::Finite,
            GroupElement::Dihedral { .. } => BackendTag::Dihedral,
            GroupElement::AxB { .. } => BackendTag::AxB,
            GroupElement::Heisenberg { .. } => BackendTag::Heisenberg,
            GroupElement::Psl2(_) => BackendTag::Psl2,
            GroupElement::MatrixQ(_) => BackendTag::MatrixQ,
        }
    }

    pub fn dihedral(exp: i64, flip: bool) -> Self {
        GroupElement::Dihedral { exp, flip }
    }

    pub fn axb(scale: Rational, shift: Rational) -> Result<Self> {
        if scale.is_zero() {
            return Err(HeckeError::Parse("ax+b scale must be nonzero".into()));
        }
        Ok(GroupElement::AxB { scale, shift })
    }

    pub fn heisenberg(u: Rational, v: Rational, w: Rational) -> Self {
        GroupElement::Heisenberg {
            u,
            v,
            w: mod_one(&w),
        }
    }

    /// Builds a projective element from a 2x2 matrix, enforcing determinant 1
    /// and the sign canonicalization.
    pub fn psl2(entries: [Rational; 4]) -> Result<Self> {
        let m = Matrix::from_rows(2, 2, entries.to_vec());
        if m.det() != Rational::one() {
            return Err(HeckeError::Parse(
                "projective 2x2 element must have determinant 1".into(),
            ));
        }
        Ok(GroupElement::Psl2(sign_canonical(m)))
    }

    pub fn matrix_q(m: QMatrix) -> Result<Self> {
        if m.rows() != m.cols() || !m.is_invertible() {
            return Err(HeckeError::Parse(
                "matrix element must be square and invertible".into(),
            ));
        }
        Ok(GroupElement::MatrixQ(m))
    }

    /// Canonical payload rendered as a compact string: the hash and
    /// ordering key used throughout the engine. Injective on canonical
    /// forms (tag prefix plus every payload field).
    pub fn key(&self) -> String {
        use std::fmt::Write;
        let mut s = String::with_capacity(48);
        match self {
            GroupElement::Finite(i) => {
                let _ = write!(s, "f{i}");
            }
            GroupElement::Dihedral { exp, flip } => {
                let _ = write!(s, "d{exp},{}", u8::from(*flip));
            }
            GroupElement::AxB { scale, shift } => {
                let _ = write!(
                    s,
                    "a{}/{},{}/{}",
                    scale.numer(),
                    scale.denom(),
                    shift.numer(),
                    shift.denom()
                );
            }
            GroupElement::Heisenberg { u, v, w } => {
                let _ = write!(
                    s,
                    "h{}/{},{}/{},{}/{}",
                    u.numer(),
                    u.denom(),
                    v.numer(),
                    v.denom(),
                    w.numer(),
                    w.denom()
                );
            }
            GroupElement::Psl2(m) | GroupElement::MatrixQ(m) => {
                let _ = write!(s, "m{}:", m.rows());
                for e in m.entries() {
                    let _ = write!(s, "{}/{},", e.numer(), e.denom());
                }
            }
        }
        s
    }

    /// Bit-exact JSON encoding.
    pub fn to_json(&self) -> Value {
        match self {
            GroupElement::Finite(i) => json!(i),
            GroupElement::Dihedral { exp, flip } => json!([exp, if *flip { 1 } else { 0 }]),
            GroupElement::AxB { scale, shift } => {
                json!([format_rational(scale), format_rational(shift)])
            }
            GroupElement::Heisenberg { u, v, w } => json!([
                format_rational(u),
                format_rational(v),
                format_rational(w)
            ]),
            GroupElement::Psl2(m) | GroupElement::MatrixQ(m) => Value::Array(
                m.entries()
                    .iter()
                    .map(|q| Value::String(format_rational(q)))
                    .collect(),
            ),
        }
    }
}

fn sign_canonical(m: QMatrix) -> QMatrix {
    match m.entries().iter().find(|e| !e.is_zero()) {
        Some(first) if first.is_negative() => m.scale(&(-Rational::one())),
        _ => m,
    }
}

/// A finite group presented by its multiplication table.
#[derive(Debug)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates that the table describes a group: square, latin, with an
    /// identity and inverses. Associativity is checked exhaustively for
    /// small orders and on a fixed sample above that.
    pub fn from_table(rows: &[Vec<usize>]) -> Result<FiniteGroup> {
        let n = rows.len();
        if n == 0 {
            return Err(HeckeError::SpecInvalid("empty multiplication table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(HeckeError::SpecInvalid("table is not square".into()));
            }
            for &v in row {
                if v >= n {
                    return Err(HeckeError::SpecInvalid(format!(
                        "table entry {v} out of range (order {n})"
                    )));
                }
                table.push(v);
            }
        }
        let latin = |get: &dyn Fn(usize, usize) -> usize| {
            (0..n).all(|i| {
                let mut seen = vec![false; n];
                (0..n).all(|j| !std::mem::replace(&mut seen[get(i, j)], true))
            })
        };
        if !latin(&|i, j| table[i * n + j]) || !latin(&|i, j| table[j * n + i]) {
            return Err(HeckeError::SpecInvalid(
                "table rows/columns are not permutations".into(),
            ));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|j| table[e * n + j] == j && table[j * n + e] == j))
            .ok_or_else(|| HeckeError::SpecInvalid("table has no identity".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for i in 0..n {
            let inv = (0..n)
                .find(|&j| table[i * n + j] == identity && table[j * n + i] == identity)
                .ok_or_else(|| {
                    HeckeError::SpecInvalid(format!("element {i} has no two-sided inverse"))
                })?;
            inverse[i] = inv;
        }
        let assoc_ok = if n <= 64 {
            let mut ok = true;
            'outer: for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if table[table[a * n + b] * n + c] != table[a * n + table[b * n + c]] {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
            }
            ok
        } else {
            // Deterministic sample for large tables.
            let mut state = 0x9e3779b97f4a7c15u64;
            (0..20_000).all(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = (state >> 33) as usize % n;
                let b = (state >> 17) as usize % n;
                let c = state as usize % n;
                table[table[a * n + b] * n + c] == table[a * n + table[b * n + c]]
            })
        };
        if !assoc_ok {
            return Err(HeckeError::SpecInvalid("table is not associative".into()));
        }
        Ok(FiniteGroup {
            order: n,
            table,
            inverse,
            identity,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i * self.order + j]
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.mul(i, j) == self.mul(j, i)))
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|i| self.table[i * self.order..(i + 1) * self.order].to_vec())
            .collect()
    }
}

/// A group backend: the data needed to multiply, invert, and validate
/// elements of one concrete group.
#[derive(Clone, Debug)]
pub enum Group {
    Finite(Arc<FiniteGroup>),
    Dihedral,
    AxB,
    Heisenberg,
    Psl2,
    MatrixQ { dim: usize },
}

impl Group {
    pub fn tag(&self) -> BackendTag {
        match self {
            Group::Finite(_) => BackendTag::Finite,
            Group::Dihedral => BackendTag::Dihedral,
            Group::AxB => BackendTag::AxB,
            Group::Heisenberg => BackendTag::Heisenberg,
            Group::Psl2 => BackendTag::Psl2,
            Group::MatrixQ { .. } => BackendTag::MatrixQ,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            Group::Finite(fg) => GroupElement::Finite(fg.identity_index()),
            Group::Dihedral => GroupElement::Dihedral {
                exp: 0,
                flip: false,
            },
            Group::AxB => GroupElement::AxB {
                scale: Rational::one(),
                shift: Rational::zero(),
            },
            Group::Heisenberg => GroupElement::Heisenberg {
                u: Rational::zero(),
                v: Rational::zero(),
                w: Rational::zero(),
            },
            Group::Psl2 => GroupElement::Psl2(Matrix::identity(2)),
            Group::MatrixQ { dim } => GroupElement::MatrixQ(Matrix::identity(*dim)),
        }
    }

    /// Checks that an element belongs to this backend and is a valid payload.
    pub fn check_element(&self, g: &GroupElement) -> Result<()> {
        let fail = |msg: String| Err(HeckeError::BackendMismatch(msg));
        match (self, g) {
            (Group::Finite(fg), GroupElement::Finite(i)) => {
                if *i < fg.order() {
                    Ok(())
                } else {
                    fail(format!("index {i} out of range for group of order {}", fg.order()))
                }
            }
            (Group::Dihedral, GroupElement::Dihedral { .. }) => Ok(()),
            (Group::AxB, GroupElement::AxB { scale, .. }) => {
                if scale.is_zero() {
                    fail("ax+b element with zero scale".into())
                } else {
                    Ok(())
                }
            }
            (Group::Heisenberg, GroupElement::Heisenberg { w, .. }) => {
                if w.is_negative() || *w >= Rational::one() {
                    fail("Heisenberg center coordinate outside [0,1)".into())
                } else {
                    Ok(())
                }
            }
            (Group::Psl2, GroupElement::Psl2(m)) => {
                if m.det() == Rational::one() {
                    Ok(())
                } else {
                    fail("projective element with determinant != 1".into())
                }
            }
            (Group::MatrixQ { dim }, GroupElement::MatrixQ(m)) => {
                if m.rows() == *dim && m.cols() == *dim {
                    Ok(())
                } else {
                    fail(format!("matrix dimension {}x{} != {dim}", m.rows(), m.cols()))
                }
            }
            _ => fail(format!("element tag {} vs group tag {}", g.tag(), self.tag())),
        }
    }

    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        if a.tag() != b.tag() {
            return Err(HeckeError::BackendMismatch(format!(
                "cannot multiply {} by {}",
                a.tag(),
                b.tag()
            )));
        }
        self.check_element(a)?;
        match (self, a, b) {
            (Group::Finite(fg), GroupElement::Finite(i), GroupElement::Finite(j)) => {
                self.check_element(b)?;
                Ok(GroupElement::Finite(fg.mul(*i, *j)))
            }
            (
                _,
                GroupElement::Dihedral { exp: n1, flip: e1 },
                GroupElement::Dihedral { exp: n2, flip: e2 },
            ) => {
                let n2s = if *e1 { -n2 } else { *n2 };
                let exp = n1.checked_add(n2s).expect("dihedral exponent overflow");
                Ok(GroupElement::Dihedral {
                    exp,
                    flip: e1 ^ e2,
                })
            }
            (
                _,
                GroupElement::AxB { scale: a1, shift: b1 },
                GroupElement::AxB { scale: a2, shift: b2 },
            ) => Ok(GroupElement::AxB {
                scale: a1 * a2,
                shift: b1 + a1 * b2,
            }),
            (
                _,
                GroupElement::Heisenberg { u: x, v: y, w: z },
                GroupElement::Heisenberg { u, v, w },
            ) => Ok(GroupElement::Heisenberg {
                u: x + u,
                v: y + v,
                w: mod_one(&(z + w + y * u)),
            }),
            (_, GroupElement::Psl2(m1), GroupElement::Psl2(m2)) => {
                let prod = mul_2x2_fast(m1, m2).unwrap_or_else(|| m1.mul(m2));
                Ok(GroupElement::Psl2(sign_canonical(prod)))
            }
            (_, GroupElement::MatrixQ(m1), GroupElement::MatrixQ(m2)) => {
                self.check_element(b)?;
                Ok(GroupElement::MatrixQ(m1.mul(m2)))
            }
            _ => unreachable!("tags already matched"),
        }
    }

    pub fn invert(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check_element(g)?;
        Ok(match (self, g) {
            (Group::Finite(fg), GroupElement::Finite(i)) => GroupElement::Finite(fg.inv(*i)),
            (_, GroupElement::Dihedral { exp, flip }) => GroupElement::Dihedral {
                exp: if *flip { *exp } else { -exp },
                flip: *flip,
            },
            (_, GroupElement::AxB { scale, shift }) => GroupElement::AxB {
                scale: scale.recip(),
                shift: -(shift / scale),
            },
            (_, GroupElement::Heisenberg { u, v, w }) => GroupElement::Heisenberg {
                u: -u,
                v: -v,
                w: mod_one(&(v * u - w)),
            },
            (_, GroupElement::Psl2(m)) => {
                // det = 1, so the inverse is the adjugate.
                let inv = Matrix::from_rows(
                    2,
                    2,
                    vec![
                        m.at(1, 1).clone(),
                        -m.at(0, 1).clone(),
                        -m.at(1, 0).clone(),
                        m.at(0, 0).clone(),
                    ],
                );
                GroupElement::Psl2(sign_canonical(inv))
            }
            (_, GroupElement::MatrixQ(m)) => {
                GroupElement::MatrixQ(m.inverse().expect("validated invertible"))
            }
            _ => unreachable!("check_element already rejected mismatches"),
        })
    }

    /// `t^-1 g t`.
    pub fn conjugate(&self, g: &GroupElement, t: &GroupElement) -> Result<GroupElement> {
        let ti = self.invert(t)?;
        self.multiply(&self.multiply(&ti, g)?, t)
    }

    pub fn finite(&self) -> Result<&Arc<FiniteGroup>> {
        match self {
            Group::Finite(fg) => Ok(fg),
            _ => Err(HeckeError::NotFinite),
        }
    }

    /// Decode an element from its JSON encoding. Rational slots accept both
    /// `"num/den"` strings and bare JSON integers.
    pub fn element_from_json(&self, v: &Value) -> Result<GroupElement> {
        let el = match self {
            Group::Finite(fg) => {
                let i = v
                    .as_u64()
                    .ok_or_else(|| HeckeError::Parse("finite element must be an index".into()))?;
                let i = i as usize;
                if i >= fg.order() {
                    return Err(HeckeError::Parse(format!(
                        "finite element index {i} out of range"
                    )));
                }
                GroupElement::Finite(i)
            }
            Group::Dihedral => {
                let arr = expect_array(v, 2, "dihedral element [n, e]")?;
                let exp = arr[0]
                    .as_i64()
                    .ok_or_else(|| HeckeError::Parse("dihedral exponent must be an integer".into()))?;
                let flip = match arr[1].as_i64() {
                    Some(0) => false,
                    Some(1) => true,
                    _ => return Err(HeckeError::Parse("dihedral flip must be 0 or 1".into())),
                };
                GroupElement::Dihedral { exp, flip }
            }
            Group::AxB => {
                let arr = expect_array(v, 2, "ax+b element [a, b]")?;
                GroupElement::axb(json_rational(&arr[0])?, json_rational(&arr[1])?)?
            }
            Group::Heisenberg => {
                let arr = expect_array(v, 3, "Heisenberg element [u, v, w]")?;
                GroupElement::heisenberg(
                    json_rational(&arr[0])?,
                    json_rational(&arr[1])?,
                    json_rational(&arr[2])?,
                )
            }
            Group::Psl2 => GroupElement::psl2(
                matrix_entries(v, 2)?
                    .try_into()
                    .expect("length checked"),
            )?,
            Group::MatrixQ { dim } => {
                let entries = matrix_entries(v, *dim)?;
                GroupElement::matrix_q(Matrix::from_rows(*dim, *dim, entries))?
            }
        };
        Ok(el)
    }

    /// Parse an element from CLI text: strict JSON, with bare `p/q` tokens
    /// tolerated inside brackets (`[1/2,0,0]`).
    pub fn element_from_str(&self, s: &str) -> Result<GroupElement> {
        self.element_from_json(&parse_lenient_json(s)?)
    }

    /// Parse a JSON array of elements from CLI text.
    pub fn elements_from_str(&self, s: &str) -> Result<Vec<GroupElement>> {
        let v = parse_lenient_json(s)?;
        let arr = v
            .as_array()
            .ok_or_else(|| HeckeError::Parse("expected a JSON array of elements".into()))?;
        arr.iter().map(|e| self.element_from_json(e)).collect()
    }
}

/// Strict JSON with a fallback pass that quotes bare `p/q` tokens.
pub fn parse_lenient_json(s: &str) -> Result<Value> {
    serde_json::from_str(s)
        .or_else(|_| serde_json::from_str(&quote_fraction_tokens(s)))
        .map_err(|e| HeckeError::Parse(format!("bad JSON {s:?}: {e}")))
}

fn expect_array<'v>(v: &'v Value, len: usize, what: &str) -> Result<&'v [Value]> {
    match v.as_array() {
        Some(a) if a.len() == len => Ok(a.as_slice()),
        _ => Err(HeckeError::Parse(format!("expected {what}"))),
    }
}

fn json_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(i.into()))
            .ok_or_else(|| HeckeError::Parse(format!("non-integer numeric literal {n}"))),
        _ => Err(HeckeError::Parse(format!("expected rational, got {v}"))),
    }
}

/// Accepts a flat row-major array of `dim^2` rationals or a nested array of
/// `dim` rows.
pub(crate) fn matrix_entries(v: &Value, dim: usize) -> Result<Vec<Rational>> {
    let arr = v
        .as_array()
        .ok_or_else(|| HeckeError::Parse("expected matrix array".into()))?;
    let mut out = Vec::with_capacity(dim * dim);
    if arr.len() == dim * dim && !arr.iter().any(Value::is_array) {
        for e in arr {
            out.push(json_rational(e)?);
        }
    } else if arr.len() == dim && arr.iter().all(Value::is_array) {
        for row in arr {
            let row = expect_array(row, dim, "matrix row")?;
            for e in row {
                out.push(json_rational(e)?);
            }
        }
    } else {
        return Err(HeckeError::Parse(format!(
            "expected {dim}x{dim} matrix entries"
        )));
    }
    Ok(out)
}

/// Quote bare `p/q` tokens so `[1/2,0,0]` becomes valid JSON.
fn quote_fraction_tokens(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 8);
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        if !token.is_empty() {
            if token.contains('/') {
                out.push('"');
                out.push_str(token);
                out.push('"');
            } else {
                out.push_str(token);
            }
            token.clear();
        }
    };
    for ch in s.chars() {
        if ch.is_ascii_digit() || ch == '/' || ch == '-' {
            token.push(ch);
        } else {
            flush(&mut token, &mut out);
            out.push(ch);
        }
    }
    flush(&mut token, &mut out);
    out
}

type MemberFn = Arc<dyn Fn(&GroupElement) -> bool + Send + Sync>;
type CanonFn = Arc<dyn Fn(&GroupElement) -> GroupElement + Send + Sync>;

/// A subgroup given by a membership predicate and a finite generating set,
/// with an optional left-coset normal form. A descriptor may also be
/// predicate-only: membership is decidable but no generating set is known
/// (an empty known set, by contrast, generates the trivial group).
#[derive(Clone)]
pub struct SubgroupDescriptor {
    member: MemberFn,
    generators: Option<Vec<GroupElement>>,
    canonicalize_coset: Option<CanonFn>,
}

impl SubgroupDescriptor {
    pub fn new(
        member: impl Fn(&GroupElement) -> bool + Send + Sync + 'static,
        generators: Vec<GroupElement>,
    ) -> Self {
        SubgroupDescriptor {
            member: Arc::new(member),
            generators: Some(generators),
            canonicalize_coset: None,
        }
    }

    /// Membership predicate only; enumerations over this subgroup cannot
    /// start.
    pub fn predicate_only(
        member: impl Fn(&GroupElement) -> bool + Send + Sync + 'static,
    ) -> Self {
        SubgroupDescriptor {
            member: Arc::new(member),
            generators: None,
            canonicalize_coset: None,
        }
    }

    /// Attach a left-coset normal form: `canon(x) == canon(y)` iff
    /// `x^-1 y` lies in the subgroup. Upgrades coset searches from linear
    /// scans to hashed lookups.
    pub fn with_canonicalizer(
        mut self,
        canon: impl Fn(&GroupElement) -> GroupElement + Send + Sync + 'static,
    ) -> Self {
        self.canonicalize_coset = Some(Arc::new(canon));
        self
    }

    pub fn is_member(&self, g: &GroupElement) -> bool {
        (self.member)(g)
    }

    pub fn generators(&self) -> &[GroupElement] {
        self.generators.as_deref().unwrap_or(&[])
    }

    /// Whether a generating set is known (possibly empty, for the trivial
    /// subgroup).
    pub fn has_generating_set(&self) -> bool {
        self.generators.is_some()
    }

    pub fn has_canonicalizer(&self) -> bool {
        self.canonicalize_coset.is_some()
    }

    /// Canonical representative of the left coset `gH`, when a normal form
    /// exists. Canonical representatives are hashable labels: two elements
    /// share a coset exactly when their labels are equal.
    pub fn coset_canonical(&self, g: &GroupElement) -> Option<GroupElement> {
        self.canonicalize_coset.as_ref().map(|f| f(g))
    }
}

impl fmt::Debug for SubgroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubgroupDescriptor")
            .field("generators", &self.generators)
            .field("has_canonicalizer", &self.canonicalize_coset.is_some())
            .finish()
    }
}

/// Left-coset normal form for the modular group inside projective 2x2
/// matrices: the Hermite basis of the lattice spanned by the columns of any
/// representative. Two determinant-1 matrices generate the same column
/// lattice exactly when they differ by a right factor in the integer
/// subgroup.
pub fn psl2_coset_canonical(g: &GroupElement) -> GroupElement {
    match g {
        GroupElement::Psl2(m) => {
            let h = hnf_2x2_fast(m)
                .unwrap_or_else(|| lattice::hnf_basis(m).expect("full rank"));
            GroupElement::Psl2(sign_canonical(h))
        }
        _ => g.clone(),
    }
}

/// Machine-integer 2x2 product; `None` on i128 overflow (the generic path
/// handles those).
fn mul_2x2_fast(m1: &QMatrix, m2: &QMatrix) -> Option<QMatrix> {
    use num_traits::ToPrimitive;
    let take = |m: &QMatrix| -> Option<([i128; 4], i128)> {
        let mut scale: i128 = 1;
        let mut dens = [0i128; 4];
        for (i, q) in m.entries().iter().enumerate() {
            dens[i] = q.denom().to_i128()?;
            scale = (scale / gcd_i128(scale, dens[i])).checked_mul(dens[i])?;
        }
        let mut out = [0i128; 4];
        for (i, q) in m.entries().iter().enumerate() {
            out[i] = q.numer().to_i128()?.checked_mul(scale / dens[i])?;
        }
        Some((out, scale))
    };
    let (a, sa) = take(m1)?;
    let (b, sb) = take(m2)?;
    let scale = sa.checked_mul(sb)?;
    let c = [
        a[0].checked_mul(b[0])?.checked_add(a[1].checked_mul(b[2])?)?,
        a[0].checked_mul(b[1])?.checked_add(a[1].checked_mul(b[3])?)?,
        a[2].checked_mul(b[0])?.checked_add(a[3].checked_mul(b[2])?)?,
        a[2].checked_mul(b[1])?.checked_add(a[3].checked_mul(b[3])?)?,
    ];
    Some(Matrix::from_rows(
        2,
        2,
        c.iter()
            .map(|&n| Rational::new(Int::from(n), Int::from(scale)))
            .collect(),
    ))
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Machine-integer Hermite form of a full-rank 2x2 rational matrix; `None`
/// when any intermediate value leaves i128 range (the generic lattice code
/// handles those). Column HNF is unique, so both paths agree.
fn hnf_2x2_fast(m: &QMatrix) -> Option<QMatrix> {
    use num_traits::ToPrimitive;
    let ent: Vec<(i128, i128)> = m
        .entries()
        .iter()
        .map(|q| Some((q.numer().to_i128()?, q.denom().to_i128()?)))
        .collect::<Option<_>>()?;
    let mut scale: i128 = 1;
    for &(_, d) in &ent {
        scale = (scale / gcd_i128(scale, d)).checked_mul(d)?;
    }
    // Columns (a, c) and (b, d), scaled to integers.
    let at = |i: usize| -> Option<i128> { ent[i].0.checked_mul(scale / ent[i].1) };
    let (mut a, mut b, mut c, mut d) = (at(0)?, at(1)?, at(2)?, at(3)?);
    // Clear the bottom-left entry by column gcd steps.
    while c != 0 {
        let q = d.div_euclid(c);
        b = b.checked_sub(q.checked_mul(a)?)?;
        d = d.checked_sub(q.checked_mul(c)?)?;
        (a, b) = (b, a);
        (c, d) = (d, c);
    }
    if d == 0 {
        return None; // singular
    }
    if d < 0 {
        b = -b;
        d = -d;
    }
    if a < 0 {
        a = -a;
        // c is already zero in this column... the first column is (a, 0).
    }
    // Reduce the top-right entry into [0, a).
    let q = b.div_euclid(a);
    b = b.checked_sub(q.checked_mul(a)?)?;
    let rat = |n: i128| Rational::new(Int::from(n), Int::from(scale));
    Some(Matrix::from_rows(
        2,
        2,
        vec![rat(a), rat(b), Rational::zero(), rat(d)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{integer, rational};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        rational(n, d)
    }

    fn psl2_of(v: [i64; 4]) -> GroupElement {
        GroupElement::psl2([integer(v[0]), integer(v[1]), integer(v[2]), integer(v[3])]).unwrap()
    }

    #[test]
    fn dihedral_relations() {
        let g = Group::Dihedral;
        let ab = GroupElement::dihedral(1, true);
        // (ab)^2 = e because bab = a^-1.
        assert_eq!(g.multiply(&ab, &ab).unwrap(), g.identity());
        let a = GroupElement::dihedral(1, false);
        let b = GroupElement::dihedral(0, true);
        // b a b = a^-1
        let bab = g
            .multiply(&g.multiply(&b, &a).unwrap(), &b)
            .unwrap();
        assert_eq!(bab, g.invert(&a).unwrap());
    }

    #[test]
    fn axb_inverse_formula() {
        // Solving (a,b)(a',b') = (1,0) gives (1/a, -b/a).
        let g = Group::AxB;
        let x = GroupElement::axb(q(2, 3), q(5, 7)).unwrap();
        let inv = g.invert(&x).unwrap();
        assert_eq!(
            inv,
            GroupElement::AxB {
                scale: q(3, 2),
                shift: q(-15, 14)
            }
        );
        assert_eq!(g.multiply(&x, &inv).unwrap(), g.identity());
    }

    #[test]
    fn heisenberg_product_and_center() {
        let g = Group::Heisenberg;
        let x = GroupElement::heisenberg(integer(1), integer(0), integer(0));
        let y = GroupElement::heisenberg(integer(0), integer(1), integer(0));
        // [1,0,0][0,1,0] = [1,1,0]: the commutator term y*u vanishes here.
        assert_eq!(
            g.multiply(&x, &y).unwrap(),
            GroupElement::heisenberg(integer(1), integer(1), integer(0))
        );
        // Reversed order picks up u=1, y=1: third coordinate 1 mod 1 = 0.
        assert_eq!(
            g.multiply(&y, &x).unwrap(),
            GroupElement::heisenberg(integer(1), integer(1), integer(0))
        );
    }

    #[test]
    fn psl2_sign_canonical_form() {
        let m = GroupElement::psl2([integer(-1), integer(-1), integer(0), integer(-1)]).unwrap();
        assert_eq!(m, psl2_of([1, 1, 0, 1]));
        let t = psl2_of([1, 1, 0, 1]);
        let g = Group::Psl2;
        assert_eq!(g.invert(&t).unwrap(), psl2_of([1, -1, 0, 1]));
        assert!(GroupElement::psl2([integer(2), integer(0), integer(0), integer(1)]).is_err());
    }

    #[test]
    fn finite_table_validation() {
        // Z_3.
        let z3 = FiniteGroup::from_table(&[vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(z3.identity_index(), 0);
        assert_eq!(z3.inv(1), 2);
        assert!(z3.is_abelian());
        // Not latin.
        assert!(FiniteGroup::from_table(&[vec![0, 0], vec![1, 1]]).is_err());
    }

    #[test]
    fn json_round_trip_and_lenient_parse() {
        let g = Group::Heisenberg;
        let x = GroupElement::heisenberg(q(1, 2), integer(0), q(3, 4));
        let back = g.element_from_json(&x.to_json()).unwrap();
        assert_eq!(x, back);
        let lenient = g.element_from_str("[1/2, 0, 3/4]").unwrap();
        assert_eq!(x, lenient);

        let psl = Group::Psl2;
        let t = psl.element_from_str("[[1,1],[0,1]]").unwrap();
        assert_eq!(t, psl2_of([1, 1, 0, 1]));
    }

    #[test]
    fn psl2_coset_canonical_separates_cosets() {
        let g = Group::Psl2;
        let x1 = GroupElement::psl2([integer(2), integer(0), integer(0), q(1, 2)]).unwrap();
        let t = psl2_of([1, 1, 0, 1]);
        let s = psl2_of([0, -1, 1, 0]);
        // x1 * (integer element) stays in the coset.
        let same = g.multiply(&x1, &g.multiply(&t, &s).unwrap()).unwrap();
        assert_eq!(psl2_coset_canonical(&x1), psl2_coset_canonical(&same));
        // t * x1 is a different coset.
        let other = g.multiply(&t, &x1).unwrap();
        assert_ne!(psl2_coset_canonical(&x1), psl2_coset_canonical(&other));
    }

    proptest! {
        #[test]
        fn axb_group_axioms(
            an in -8i64..8, ad in 1i64..8, bn in -8i64..8, bd in 1i64..8,
            cn in -8i64..8, cd in 1i64..8, dn in -8i64..8, dd in 1i64..8,
            en in -8i64..8, ed in 1i64..8, fn_ in -8i64..8, fd in 1i64..8,
        ) {
            prop_assume!(an != 0 && cn != 0 && en != 0);
            let g = Group::AxB;
            let x = GroupElement::axb(q(an, ad), q(bn, bd)).unwrap();
            let y = GroupElement::axb(q(cn, cd), q(dn, dd)).unwrap();
            let z = GroupElement::axb(q(en, ed), q(fn_, fd)).unwrap();
            let xy_z = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
            let x_yz = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(xy_z, x_yz);
            prop_assert_eq!(g.multiply(&x, &g.identity()).unwrap(), x.clone());
            prop_assert_eq!(
                g.multiply(&g.invert(&x).unwrap(), &x).unwrap(),
                g.identity()
            );
        }

        #[test]
        fn heisenberg_conjugation_identity(
            xn in -6i64..6, xd in 1i64..4, yn in -6i64..6, yd in 1i64..4,
            un in -6i64..6, ud in 1i64..4, vn in -6i64..6, vd in 1i64..4,
            wn in -6i64..6, wd in 1i64..4, zn in -6i64..6, zd in 1i64..4,
        ) {
            let g = Group::Heisenberg;
            let t = GroupElement::heisenberg(q(xn, xd), q(yn, yd), q(zn, zd));
            let n = GroupElement::heisenberg(q(un, ud), q(vn, vd), q(wn, wd));
            // t n t^-1 = [u, v, w + y u - x v]
            let lhs = g
                .multiply(&g.multiply(&t, &n).unwrap(), &g.invert(&t).unwrap())
                .unwrap();
            let expected = GroupElement::heisenberg(
                q(un, ud),
                q(vn, vd),
                q(wn, wd) + q(yn, yd) * q(un, ud) - q(xn, xd) * q(vn, vd),
            );
            prop_assert_eq!(lhs, expected);
        }

        #[test]
        fn heisenberg_canonical_idempotent(
            un in -20i64..20, ud in 1i64..8,
            vn in -20i64..20, vd in 1i64..8,
            wn in -20i64..20, wd in 1i64..8,
        ) {
            let x = GroupElement::heisenberg(q(un, ud), q(vn, vd), q(wn, wd));
            if let GroupElement::Heisenberg { u, v, w } = x.clone() {
                let again = GroupElement::heisenberg(u, v, w);
                prop_assert_eq!(x, again);
            }
        }

        #[test]
        fn dihedral_group_axioms(
            n1 in -50i64..50, e1 in any::<bool>(),
            n2 in -50i64..50, e2 in any::<bool>(),
            n3 in -50i64..50, e3 in any::<bool>(),
        ) {
            let g = Group::Dihedral;
            let x = GroupElement::dihedral(n1, e1);
            let y = GroupElement::dihedral(n2, e2);
            let z = GroupElement::dihedral(n3, e3);
            let xy_z = g.multiply(&g.multiply(&x, &y).unwrap(), &z).unwrap();
            let x_yz = g.multiply(&x, &g.multiply(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(xy_z, x_yz);
            prop_assert_eq!(
                g.multiply(&x, &g.invert(&x).unwrap()).unwrap(),
                g.identity()
            );
        }
    }
}
