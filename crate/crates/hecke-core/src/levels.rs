//! Finite truncations of the completion of G acting on G/H.
//!
//! The left-translation action `θ(x)(yH) = xyH` is recorded on finite
//! windows of cosets. Saturating a window under `H` makes the stabilizer
//! `H ∩ G_F` normal in `H`, so the set of distinct restrictions of `H` to
//! the saturated window is a genuine finite quotient group; its size is the
//! level index `[H : H ∩ G_F]`. The Haar weight of a basic compact open set
//! is the exact ratio `[G_F : H ∩ G_F] / [H : H ∩ G_F]`, normalized so the
//! closure of `H` has measure 1.

use crate::coset::{enumerate_cosets, step_generators, HeckePair};
use crate::error::{HeckeError, Result};
use crate::group::GroupElement;
use crate::Rational;
use std::collections::{HashMap, HashSet, VecDeque};

/// A growable registry of left-coset labels. Labels are assigned in
/// discovery order; lookups use the subgroup's normal form when one exists
/// and fall back to pairwise coset-equality scans.
pub struct CosetRegistry<'p> {
    pair: &'p HeckePair,
    reps: Vec<GroupElement>,
    keys: Option<HashMap<GroupElement, usize>>,
}

impl<'p> CosetRegistry<'p> {
    pub fn new(pair: &'p HeckePair, initial: &[GroupElement]) -> Result<CosetRegistry<'p>> {
        let mut reg = CosetRegistry {
            pair,
            reps: Vec::new(),
            keys: pair.subgroup().has_canonicalizer().then(HashMap::new),
        };
        for y in initial {
            pair.group().check_element(y)?;
            reg.resolve(y)?;
        }
        Ok(reg)
    }

    pub fn reps(&self) -> &[GroupElement] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn find(&self, g: &GroupElement) -> Option<usize> {
        match &self.keys {
            Some(map) => map
                .get(&self.pair.subgroup().coset_canonical(g).expect("keyed"))
                .copied(),
            None => self.reps.iter().position(|r| self.pair.left_coset_eq(r, g)),
        }
    }

    /// Label of `gH`, extending the registry with a fresh label on first
    /// sight.
    pub fn resolve(&mut self, g: &GroupElement) -> Result<usize> {
        if let Some(i) = self.find(g) {
            return Ok(i);
        }
        let idx = self.reps.len();
        if let Some(map) = &mut self.keys {
            map.insert(
                self.pair.subgroup().coset_canonical(g).expect("keyed"),
                idx,
            );
        }
        self.reps.push(g.clone());
        Ok(idx)
    }
}

/// Distinct restrictions of a group of left translations to a finite
/// window of cosets.
#[derive(Clone, Debug)]
pub struct RestrictionTable {
    /// Representatives of the (saturated) window, in label order.
    pub window: Vec<GroupElement>,
    /// Each row maps window positions to window positions; rows are
    /// deduplicated and, for a group action, injective.
    pub rows: Vec<Vec<usize>>,
}

/// The action of one element on a window: position `i` of the result is the
/// label of `x * window[i] * H`. Labels outside the input window extend the
/// registry in discovery order; the extended representative list is
/// returned alongside.
pub fn theta_restrict(
    pair: &HeckePair,
    x: &GroupElement,
    window: &[GroupElement],
) -> Result<(Vec<usize>, Vec<GroupElement>)> {
    pair.group().check_element(x)?;
    let mut reg = CosetRegistry::new(pair, window)?;
    let in_window = reg.len();
    let mut labels = Vec::with_capacity(in_window);
    for i in 0..in_window {
        let moved = pair.group().multiply(x, &reg.reps()[i].clone())?;
        labels.push(reg.resolve(&moved)?);
    }
    Ok((labels, reg.reps))
}

/// Saturates the window under `H`: the union of the `H`-orbits of its
/// cosets (finite for a Hecke pair, since each orbit lies in one double
/// coset).
pub fn saturate_window<'p>(
    pair: &'p HeckePair,
    window: &[GroupElement],
) -> Result<CosetRegistry<'p>> {
    let mut reg = CosetRegistry::new(pair, window)?;
    let step_gens = step_generators(pair.group(), pair.subgroup().generators())?;
    let mut queue: VecDeque<usize> = (0..reg.len()).collect();
    while let Some(i) = queue.pop_front() {
        let base = reg.reps()[i].clone();
        for g in &step_gens {
            let moved = pair.group().multiply(g, &base)?;
            let before = reg.len();
            let label = reg.resolve(&moved)?;
            if label == before {
                if reg.len() > pair.max_index() {
                    return Err(HeckeError::IndexOverflow {
                        cap: pair.max_index(),
                    });
                }
                queue.push_back(label);
            }
        }
    }
    Ok(reg)
}

/// The finite level attached to a window: the group of restrictions of `H`
/// to the H-saturated window, of order `[H : H ∩ G_{F'}]`.
pub fn h_level_quotient(
    pair: &HeckePair,
    window: &[GroupElement],
) -> Result<(u64, RestrictionTable)> {
    let reg = saturate_window(pair, window)?;
    let size = reg.len();
    let step_gens = step_generators(pair.group(), pair.subgroup().generators())?;
    // Precompute each generator's permutation of the saturated window.
    let mut gen_perms: Vec<Vec<usize>> = Vec::with_capacity(step_gens.len());
    for g in &step_gens {
        let mut perm = Vec::with_capacity(size);
        for rep in reg.reps() {
            let moved = pair.group().multiply(g, rep)?;
            let label = reg.find(&moved).ok_or_else(|| {
                HeckeError::Parse("saturated window not closed under H".into())
            })?;
            perm.push(label);
        }
        gen_perms.push(perm);
    }
    let identity_row: Vec<usize> = (0..size).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([identity_row.clone()]);
    let mut rows = vec![identity_row];
    let mut queue: VecDeque<usize> = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let base = rows[i].clone();
        for perm in &gen_perms {
            // Row of (g h): position j holds perm applied to h's image.
            let next: Vec<usize> = base.iter().map(|&l| perm[l]).collect();
            if seen.insert(next.clone()) {
                if rows.len() >= pair.max_index() {
                    return Err(HeckeError::IndexOverflow {
                        cap: pair.max_index(),
                    });
                }
                rows.push(next);
                queue.push_back(rows.len() - 1);
            }
        }
    }
    let table = RestrictionTable {
        window: reg.reps,
        rows,
    };
    Ok((table.rows.len() as u64, table))
}

/// Haar weight `μ(x G_F) = [G_F : H ∩ G_F] · [H : H ∩ G_F]^-1`, exact,
/// normalized so the closure of H has measure 1. Translation invariance
/// makes the result independent of `x`, which is validated and ignored.
pub fn haar_index(
    pair: &HeckePair,
    x: &GroupElement,
    window: &[GroupElement],
) -> Result<Rational> {
    pair.group().check_element(x)?;
    let gf = pair.conjugate_intersection(window)?;
    let group = pair.group();
    let sub = pair.subgroup();
    let gf_member = {
        let gf = gf.clone();
        move |g: &GroupElement| gf.is_member(g)
    };
    // k ∈ H ∩ G_F.
    let in_k = |k: &GroupElement| sub.is_member(k) && gf_member(k);
    // Coset label of g(H∩G_F): the tuple of left-coset labels of g and of
    // every g·y over the window, valid because g1^-1 g2 ∈ H ∩ ⋂ yHy^-1 iff
    // all those cosets match.
    let window_vec: Vec<GroupElement> = window.to_vec();
    let key = |g: &GroupElement| -> Option<Vec<GroupElement>> {
        let mut parts = Vec::with_capacity(window_vec.len() + 1);
        parts.push(sub.coset_canonical(g)?);
        for y in &window_vec {
            let gy = group.multiply(g, y).expect("validated");
            parts.push(sub.coset_canonical(&gy)?);
        }
        Some(parts)
    };

    let h_over_k = enumerate_cosets(
        group,
        group.identity(),
        sub.generators(),
        &in_k,
        &key,
        pair.max_index(),
    )?
    .0
    .len();

    if !gf.has_generating_set() {
        return Err(HeckeError::MissingGenerators);
    }
    let gf_over_k = enumerate_cosets(
        group,
        group.identity(),
        gf.generators(),
        &in_k,
        &key,
        pair.max_index(),
    )?
    .0
    .len();

    Ok(Rational::new(
        (gf_over_k as i64).into(),
        (h_over_k as i64).into(),
    ))
}

/// Orbit report for one (s, t) sample of the stabilizer-orbit test.
#[derive(Clone, Debug)]
pub struct OrbitReport {
    pub s: GroupElement,
    pub t: GroupElement,
    /// `None` means the enumeration overflowed the cap: the sample is
    /// inconclusive and the acting group is not certified Hecke.
    pub orbit_size: Option<u64>,
}

/// For each sample `(s, t)`, enumerates the orbit of the coset `tH` under
/// the conjugate stabilizer `sHs^-1` up to the pair's cap. Finite orbits
/// everywhere is evidence (not proof) of the Hecke property.
pub fn hecke_group_check(
    pair: &HeckePair,
    samples: &[(GroupElement, GroupElement)],
) -> Result<Vec<OrbitReport>> {
    let group = pair.group();
    let mut reports = Vec::with_capacity(samples.len());
    for (s, t) in samples {
        group.check_element(s)?;
        group.check_element(t)?;
        let s_inv = group.invert(s)?;
        let mut conj_gens = Vec::new();
        for g in pair.subgroup().generators() {
            conj_gens.push(group.multiply(&group.multiply(s, g)?, &s_inv)?);
        }
        let orbit_size = match orbit_of_coset(pair, t, &conj_gens) {
            Ok(n) => Some(n),
            Err(HeckeError::IndexOverflow { .. }) => None,
            Err(e) => return Err(e),
        };
        reports.push(OrbitReport {
            s: s.clone(),
            t: t.clone(),
            orbit_size,
        });
    }
    Ok(reports)
}

fn orbit_of_coset(
    pair: &HeckePair,
    start: &GroupElement,
    acting_gens: &[GroupElement],
) -> Result<u64> {
    let step_gens = step_generators(pair.group(), acting_gens)?;
    let mut reg = CosetRegistry::new(pair, std::slice::from_ref(start))?;
    let mut queue: VecDeque<usize> = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let base = reg.reps()[i].clone();
        for g in &step_gens {
            let moved = pair.group().multiply(g, &base)?;
            let before = reg.len();
            let label = reg.resolve(&moved)?;
            if label == before {
                if reg.len() > pair.max_index() {
                    return Err(HeckeError::IndexOverflow {
                        cap: pair.max_index(),
                    });
                }
                queue.push_back(label);
            }
        }
    }
    Ok(reg.len() as u64)
}
