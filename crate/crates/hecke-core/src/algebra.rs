//! The convolution *-algebra of a Hecke pair.
//!
//! Elements are finite formal sums over interned double cosets with exact
//! rational coefficients, in one of two bases: the indicator basis
//! `chi_{HxH}` or the normalized basis `phi_x = L(x)^-1 chi_{HxH}`.
//! Convolution follows the generator formula
//!
//! ```text
//! chi_{HxH} * chi_{HyH} = sum over wH in HyH/H of (L(x)/L(xw)) chi_{HxwH}
//! ```
//!
//! extended bilinearly, the involution is `chi_{HxH}^* = Δ(x) chi_{Hx^-1H}`,
//! and the l1 norm of `chi_{HxH}` is `L(x)`. Phi-basis arithmetic converts
//! to chi, computes there, and converts back, so the generator formula is
//! the single source of truth for the structure constants.

use crate::coset::{CosetId, HeckePair};
use crate::error::{HeckeError, Result};
use crate::group::GroupElement;
use crate::rat::{format_rational, parse_rational};
use crate::Rational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Basis {
    Chi,
    Phi,
}

/// A finite formal sum over double cosets. No zero coefficient is stored.
#[derive(Clone, Debug)]
pub struct HeckeElement {
    pair: Arc<HeckePair>,
    basis: Basis,
    terms: BTreeMap<CosetId, Rational>,
}

impl HeckeElement {
    pub fn zero(pair: &Arc<HeckePair>, basis: Basis) -> Self {
        HeckeElement {
            pair: pair.clone(),
            basis,
            terms: BTreeMap::new(),
        }
    }

    /// The indicator `chi_{HxH}`.
    pub fn chi_of(pair: &Arc<HeckePair>, x: &GroupElement) -> Result<Self> {
        Self::from_terms(pair, Basis::Chi, vec![(x.clone(), Rational::from_integer(1.into()))])
    }

    /// The normalized generator `phi_x`.
    pub fn phi_of(pair: &Arc<HeckePair>, x: &GroupElement) -> Result<Self> {
        Self::from_terms(pair, Basis::Phi, vec![(x.clone(), Rational::from_integer(1.into()))])
    }

    /// The unit `chi_H`.
    pub fn unit(pair: &Arc<HeckePair>) -> Result<Self> {
        Self::chi_of(pair, &pair.group().identity())
    }

    /// Interns each representative and aggregates coefficients landing in
    /// the same class.
    pub fn from_terms(
        pair: &Arc<HeckePair>,
        basis: Basis,
        terms: Vec<(GroupElement, Rational)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<CosetId, Rational> = BTreeMap::new();
        for (x, c) in terms {
            let id = pair.double_coset_of(&x)?;
            *map.entry(id).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(HeckeElement {
            pair: pair.clone(),
            basis,
            terms: map,
        })
    }

    pub fn pair(&self) -> &Arc<HeckePair> {
        &self.pair
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn terms(&self) -> &BTreeMap<CosetId, Rational> {
        &self.terms
    }

    pub fn coeff(&self, id: CosetId) -> Rational {
        self.terms.get(&id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_same_pair(&self, other: &HeckeElement) -> Result<()> {
        if Arc::ptr_eq(&self.pair, &other.pair) {
            Ok(())
        } else {
            Err(HeckeError::PairMismatch)
        }
    }

    /// Coefficients in the chi basis (identity when already there).
    fn chi_terms(&self) -> BTreeMap<CosetId, Rational> {
        match self.basis {
            Basis::Chi => self.terms.clone(),
            Basis::Phi => self
                .terms
                .iter()
                .map(|(&id, c)| {
                    let l = Rational::from_integer(self.pair.coset(id).l.into());
                    (id, c / l)
                })
                .collect(),
        }
    }

    fn with_basis(pair: &Arc<HeckePair>, basis: Basis, chi: BTreeMap<CosetId, Rational>) -> Self {
        let mut terms = match basis {
            Basis::Chi => chi,
            Basis::Phi => chi
                .into_iter()
                .map(|(id, c)| {
                    let l = Rational::from_integer(pair.coset(id).l.into());
                    (id, c * l)
                })
                .collect(),
        };
        terms.retain(|_, c| !c.is_zero());
        HeckeElement {
            pair: pair.clone(),
            basis,
            terms,
        }
    }

    /// Rescales into the phi basis: `chi_{HxH} = L(x) phi_x`.
    pub fn to_phi(&self) -> Self {
        Self::with_basis(&self.pair, Basis::Phi, self.chi_terms())
    }

    /// Rescales into the chi basis: `phi_x = L(x)^-1 chi_{HxH}`.
    pub fn to_chi(&self) -> Self {
        Self::with_basis(&self.pair, Basis::Chi, self.chi_terms())
    }

    /// Convolution. Mixed-basis inputs are converted internally; the result
    /// carries the left operand's basis.
    pub fn convolve(&self, other: &HeckeElement) -> Result<HeckeElement> {
        self.check_same_pair(other)?;
        let pair = &self.pair;
        let group = pair.group();
        let a = self.chi_terms();
        let b = other.chi_terms();
        let mut out: BTreeMap<CosetId, Rational> = BTreeMap::new();
        for (&ci, ca) in &a {
            let class_x = pair.coset(ci);
            let lx = Rational::from_integer(class_x.l.into());
            for (&cj, cb) in &b {
                let class_y = pair.coset(cj);
                let scale = ca * cb;
                for w in &class_y.transversal {
                    let xw = group.multiply(&class_x.rep, w)?;
                    let ck = pair.double_coset_of(&xw)?;
                    let lxw = Rational::from_integer(pair.coset(ck).l.into());
                    let contribution = &scale * &lx / lxw;
                    *out.entry(ck).or_insert_with(Rational::zero) += contribution;
                }
            }
        }
        Ok(Self::with_basis(pair, self.basis, out))
    }

    /// The involution `f^*`: term-wise class inversion scaled by `Δ`.
    /// Rational coefficients are their own conjugates.
    pub fn involute(&self) -> Result<HeckeElement> {
        let pair = &self.pair;
        let group = pair.group();
        let mut out: BTreeMap<CosetId, Rational> = BTreeMap::new();
        for (&id, c) in &self.chi_terms() {
            let rec = pair.coset(id);
            let rep_inv = group.invert(&rec.rep)?;
            let inv_id = pair.double_coset_of(&rep_inv)?;
            *out.entry(inv_id).or_insert_with(Rational::zero) += c * rec.delta();
        }
        Ok(Self::with_basis(pair, self.basis, out))
    }

    /// `‖f‖₁ = Σ |f(x)|` over left cosets, i.e. `Σ |c| L(class)` in the chi
    /// basis. Exact.
    pub fn l1_norm(&self) -> Rational {
        self.chi_terms()
            .iter()
            .map(|(&id, c)| c.abs() * Rational::from_integer(self.pair.coset(id).l.into()))
            .sum()
    }

    pub fn add(&self, other: &HeckeElement) -> Result<HeckeElement> {
        self.check_same_pair(other)?;
        let mut out = self.chi_terms();
        for (&id, c) in &other.chi_terms() {
            *out.entry(id).or_insert_with(Rational::zero) += c;
        }
        Ok(Self::with_basis(&self.pair, self.basis, out))
    }

    pub fn scaled(&self, c: &Rational) -> HeckeElement {
        let mut terms: BTreeMap<CosetId, Rational> =
            self.terms.iter().map(|(&id, v)| (id, v * c)).collect();
        terms.retain(|_, v| !v.is_zero());
        HeckeElement {
            pair: self.pair.clone(),
            basis: self.basis,
            terms,
        }
    }

    /// Bit-exact JSON: terms sorted by the serialization string of the
    /// interned representative.
    pub fn to_json(&self) -> Value {
        let mut items: Vec<(String, Value)> = self
            .terms
            .iter()
            .map(|(&id, c)| {
                let rep = &self.pair.coset(id).rep;
                let rep_json = rep.to_json();
                let sort_key = rep_json.to_string();
                (
                    sort_key,
                    json!({"rep": rep_json, "coeff": format_rational(c)}),
                )
            })
            .collect();
        items.sort_by(|a, b| a.0.cmp(&b.0));
        json!({
            "basis": match self.basis { Basis::Chi => "chi", Basis::Phi => "phi" },
            "terms": items.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(pair: &Arc<HeckePair>, v: &Value) -> Result<HeckeElement> {
        let basis = match v.get("basis").and_then(Value::as_str) {
            Some("chi") => Basis::Chi,
            Some("phi") => Basis::Phi,
            _ => return Err(HeckeError::Parse("basis must be \"chi\" or \"phi\"".into())),
        };
        let arr = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| HeckeError::Parse("missing terms array".into()))?;
        let mut terms = Vec::with_capacity(arr.len());
        for t in arr {
            let rep = t
                .get("rep")
                .ok_or_else(|| HeckeError::Parse("term missing rep".into()))?;
            let coeff = t
                .get("coeff")
                .and_then(Value::as_str)
                .ok_or_else(|| HeckeError::Parse("term missing coeff string".into()))?;
            terms.push((pair.group().element_from_json(rep)?, parse_rational(coeff)?));
        }
        Self::from_terms(pair, basis, terms)
    }
}

impl PartialEq for HeckeElement {
    /// Equality as algebra elements: same pair and equal chi coefficients,
    /// regardless of the basis either side is stored in.
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.pair, &other.pair) && self.chi_terms() == other.chi_terms()
    }
}

impl Eq for HeckeElement {}

/// The averaging projection from left-coset sums onto bi-invariant sums:
/// `chi_{xH} -> L(x)^-1 chi_{HxH}`, extended linearly. Idempotent on
/// bi-invariant inputs.
pub fn project_p(
    pair: &Arc<HeckePair>,
    left_coset_sum: &[(GroupElement, Rational)],
) -> Result<HeckeElement> {
    let mut out: BTreeMap<CosetId, Rational> = BTreeMap::new();
    for (x, c) in left_coset_sum {
        let id = pair.double_coset_of(x)?;
        let l = Rational::from_integer(pair.coset(id).l.into());
        *out.entry(id).or_insert_with(Rational::zero) += c / l;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(HeckeElement {
        pair: pair.clone(),
        basis: Basis::Chi,
        terms: out,
    })
}
