//! Double-coset enumeration and the directing semigroup.
//!
//! For a pair (G, H) the engine decides the finiteness condition
//! constructively: the left cosets of `H_x = H ∩ xHx^-1` inside `H` are
//! enumerated by breadth-first search over words in the generators of `H`,
//! with two words identified exactly when their quotient lies in `H_x`. The
//! count is `L(x) = [H : H_x] = |HxH/H|`, and right-translating the
//! representatives by `x` yields a transversal of `HxH/H`. Every enumeration
//! is capped so that a non-Hecke (or merely huge) configuration surfaces as
//! a recoverable `IndexOverflow`, never a hang.
//!
//! Enumerated double cosets are interned: each class gets a stable id for
//! the lifetime of the pair, and the class data (representative,
//! transversal, L, R) is shared behind an `Arc`.

use crate::error::{HeckeError, Result};
use crate::group::{Group, GroupElement, SubgroupDescriptor};
use crate::Rational;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

/// Stable identifier of an interned double coset within one pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CosetId(pub usize);

/// An interned double coset `HxH`.
#[derive(Clone, Debug)]
pub struct DoubleCoset {
    /// First element presented for this class.
    pub rep: GroupElement,
    /// Elements `z_i` with `HxH` the disjoint union of the `z_i H`.
    pub transversal: Vec<GroupElement>,
    /// `L(x) = |HxH/H|`.
    pub l: u64,
    /// `R(x) = L(x^-1)`.
    pub r: u64,
}

impl DoubleCoset {
    /// Modular function value `Δ(x) = L(x)/R(x)`, exact.
    pub fn delta(&self) -> Rational {
        Rational::new(self.l.into(), self.r.into())
    }
}

struct Record {
    coset: Arc<DoubleCoset>,
    /// Canonical coset labels of the transversal, when the subgroup has a
    /// normal form; turns class membership into a hash lookup.
    keys: Option<HashSet<GroupElement>>,
}

#[derive(Default)]
struct InternState {
    records: Vec<Record>,
    memo: HashMap<GroupElement, CosetId>,
}

/// Descriptive metadata carried by catalog-built pairs.
#[derive(Clone, Debug, Default)]
pub struct PairMeta {
    pub family: String,
    pub q: Option<u32>,
    pub assumed_reduced: Option<bool>,
}

pub type IntersectionHook =
    Arc<dyn Fn(&[GroupElement]) -> Option<Vec<GroupElement>> + Send + Sync>;

/// A Hecke pair: a group backend, a subgroup descriptor, and the intern
/// table of double cosets discovered so far.
///
/// Interning is internally synchronized; reads of already-interned data and
/// concurrent interning from several threads are both safe, though the
/// engine is typically driven single-threaded.
pub struct HeckePair {
    group: Group,
    subgroup: SubgroupDescriptor,
    max_index: usize,
    meta: PairMeta,
    intersection_gens: Option<IntersectionHook>,
    state: Mutex<InternState>,
}

impl fmt::Debug for HeckePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeckePair")
            .field("group", &self.group)
            .field("subgroup", &self.subgroup)
            .field("max_index", &self.max_index)
            .field("family", &self.meta.family)
            .finish()
    }
}

/// Default BFS cap.
pub const DEFAULT_MAX_INDEX: usize = 1_000_000;

impl HeckePair {
    pub fn new(group: Group, subgroup: SubgroupDescriptor, max_index: usize) -> HeckePair {
        assert!(max_index >= 1, "max_index must be at least 1");
        HeckePair {
            group,
            subgroup,
            max_index,
            meta: PairMeta::default(),
            intersection_gens: None,
            state: Mutex::new(InternState::default()),
        }
    }

    pub fn with_meta(mut self, meta: PairMeta) -> Self {
        self.meta = meta;
        self
    }

    /// Install a backend hook producing generators of `⋂ y H y^-1` over a
    /// finite window; enables index computations over these intersections.
    pub fn with_intersection_hook(mut self, hook: IntersectionHook) -> Self {
        self.intersection_gens = Some(hook);
        self
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn subgroup(&self) -> &SubgroupDescriptor {
        &self.subgroup
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn meta(&self) -> &PairMeta {
        &self.meta
    }

    pub fn is_in_subgroup(&self, g: &GroupElement) -> bool {
        self.subgroup.is_member(g)
    }

    /// `aH == bH`.
    pub fn left_coset_eq(&self, a: &GroupElement, b: &GroupElement) -> bool {
        let ai = self.group.invert(a).expect("validated element");
        let d = self.group.multiply(&ai, b).expect("validated element");
        self.subgroup.is_member(&d)
    }

    /// Number of classes interned so far.
    pub fn interned_count(&self) -> usize {
        self.state.lock().unwrap().records.len()
    }

    /// Snapshot of an interned class.
    pub fn coset(&self, id: CosetId) -> Arc<DoubleCoset> {
        self.state.lock().unwrap().records[id.0].coset.clone()
    }

    /// Enumerates `H/H_x` by BFS over the subgroup generators. Returns the
    /// coset count `L = [H : H_x]` together with representatives `h_i`; the
    /// transversal of `HxH/H` is then `{h_i x}`. Deterministic: generators
    /// are applied in a fixed order and the first element discovered in a
    /// coset is its representative.
    ///
    /// Internally the orbit of the coset `xH` under left translation by `H`
    /// is enumerated directly (the map `h H_x -> h x H` is a bijection onto
    /// `HxH/H`), and the `h_i` are recovered as `z_i x^-1`; two words lie in
    /// the same `H_x`-coset exactly when their pushforwards agree as left
    /// cosets, so the dedup tests coincide.
    pub fn index_and_transversal(
        &self,
        x: &GroupElement,
    ) -> Result<(u64, Vec<GroupElement>)> {
        let (transversal, _) = self.enumerate_class(x)?;
        let xinv = self.group.invert(x)?;
        let hreps = transversal
            .iter()
            .map(|z| self.group.multiply(z, &xinv))
            .collect::<Result<Vec<_>>>()?;
        Ok((hreps.len() as u64, hreps))
    }

    /// Transversal of `HxH/H` (first entry in the coset of `x` itself) plus
    /// the canonical coset labels when the subgroup has a normal form.
    fn enumerate_class(
        &self,
        x: &GroupElement,
    ) -> Result<(Vec<GroupElement>, Option<HashSet<GroupElement>>)> {
        self.group.check_element(x)?;
        let sub = &self.subgroup;
        let in_h = |d: &GroupElement| sub.is_member(d);
        let key = |z: &GroupElement| sub.coset_canonical(z);
        let (reps, keys) = enumerate_cosets(
            &self.group,
            x.clone(),
            sub.generators(),
            &in_h,
            &key,
            self.max_index,
        )?;
        Ok((reps, keys.map(|m| m.into_keys().collect())))
    }

    /// `L(x) = |HxH/H|`, memoized through the intern table.
    pub fn hecke_l(&self, x: &GroupElement) -> Result<u64> {
        Ok(self.coset(self.double_coset_of(x)?).l)
    }

    /// `R(x) = L(x^-1)`.
    pub fn hecke_r(&self, x: &GroupElement) -> Result<u64> {
        Ok(self.coset(self.double_coset_of(x)?).r)
    }

    /// Modular function `Δ(x) = L(x)/R(x)`, exact.
    pub fn delta(&self, x: &GroupElement) -> Result<Rational> {
        Ok(self.coset(self.double_coset_of(x)?).delta())
    }

    /// Interns (or finds) the class `HxH`. Ids are stable for the pair's
    /// lifetime and no class is ever stored twice.
    pub fn double_coset_of(&self, x: &GroupElement) -> Result<CosetId> {
        self.group.check_element(x)?;
        let memo_key = x.clone();
        {
            let state = self.state.lock().unwrap();
            if let Some(&id) = state.memo.get(&memo_key) {
                return Ok(id);
            }
            if let Some(id) = self.scan_records(&state, x) {
                drop(state);
                self.state.lock().unwrap().memo.insert(memo_key, id);
                return Ok(id);
            }
        }

        // Not interned: build the class record outside the lock.
        let (transversal, keys) = self.enumerate_class(x)?;
        let l = transversal.len() as u64;
        // R = L(x^-1); when x^-1 lies in HxH the class is self-adjoint and
        // the second enumeration is unnecessary.
        let xinv = self.group.invert(x)?;
        let self_inverse = match &keys {
            Some(set) => set.contains(&self.subgroup.coset_canonical(&xinv).expect("present")),
            None => transversal.iter().any(|z| self.left_coset_eq(z, &xinv)),
        };
        let r = if self_inverse {
            l
        } else {
            self.enumerate_class(&xinv)?.0.len() as u64
        };

        let mut state = self.state.lock().unwrap();
        // Another caller may have interned the class while we enumerated.
        if let Some(id) = self.scan_records(&state, x) {
            state.memo.insert(memo_key, id);
            return Ok(id);
        }
        let id = CosetId(state.records.len());
        state.records.push(Record {
            coset: Arc::new(DoubleCoset {
                rep: x.clone(),
                transversal,
                l,
                r,
            }),
            keys,
        });
        state.memo.insert(memo_key, id);
        Ok(id)
    }

    fn scan_records(&self, state: &InternState, x: &GroupElement) -> Option<CosetId> {
        let key = self.subgroup.coset_canonical(x);
        for (i, rec) in state.records.iter().enumerate() {
            let hit = match (&rec.keys, &key) {
                (Some(set), Some(k)) => set.contains(k),
                _ => rec
                    .coset
                    .transversal
                    .iter()
                    .any(|z| self.left_coset_eq(z, x)),
            };
            if hit {
                return Some(CosetId(i));
            }
        }
        None
    }

    /// Membership in the directing semigroup `T = {t | tHt^-1 ⊇ H}`,
    /// decided on the generators of `H` (conjugation by `t^-1` is a
    /// homomorphism, so the generator test suffices).
    pub fn in_t(&self, t: &GroupElement) -> Result<bool> {
        self.group.check_element(t)?;
        for g in self.subgroup.generators() {
            let conj = self.group.conjugate(g, t)?;
            if !self.subgroup.is_member(&conj) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Semidecision for `x ∈ T^-1 T`: searches products of the candidate
    /// elements, up to the given word length, for `s` with both `s` and
    /// `s·x` in `T`; then `(s, s·x)` witnesses `x = s^-1 (s x)`. A `None`
    /// is not a proof of non-directedness.
    pub fn directed_witness(
        &self,
        x: &GroupElement,
        candidates: &[GroupElement],
        search_bound: usize,
    ) -> Result<Option<(GroupElement, GroupElement)>> {
        self.group.check_element(x)?;
        for c in candidates {
            self.group.check_element(c)?;
        }
        let mut seen: HashSet<GroupElement> = HashSet::new();
        let mut frontier = vec![self.group.identity()];
        seen.insert(self.group.identity());
        for _len in 0..=search_bound {
            for s in &frontier {
                if self.in_t(s)? {
                    let t = self.group.multiply(s, x)?;
                    if self.in_t(&t)? {
                        return Ok(Some((s.clone(), t)));
                    }
                }
            }
            let mut next = Vec::new();
            for s in &frontier {
                for c in candidates {
                    let w = self.group.multiply(s, c)?;
                    if seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        Ok(None)
    }

    /// Descriptor for `G_F = ⋂_{yH ∈ F} y H y^-1`. The membership predicate
    /// is always available; generators are present when every window member
    /// lies in `H` (then `G_F = H`) or when the backend hook can produce
    /// them, and are omitted otherwise (predicate-only descriptor).
    pub fn conjugate_intersection(&self, window: &[GroupElement]) -> Result<SubgroupDescriptor> {
        if window.is_empty() {
            return Err(HeckeError::Parse("window must be nonempty".into()));
        }
        for y in window {
            self.group.check_element(y)?;
        }
        let group = self.group.clone();
        let sub = self.subgroup.clone();
        let reps: Vec<GroupElement> = window.to_vec();
        let member_reps = reps.clone();
        let member = move |g: &GroupElement| {
            member_reps.iter().all(|y| {
                // g ∈ yHy^-1  ⟺  y^-1 g y ∈ H
                match group.conjugate(g, y) {
                    Ok(conj) => sub.is_member(&conj),
                    Err(_) => false,
                }
            })
        };
        let generators: Option<Vec<GroupElement>> =
            if window.iter().all(|y| self.subgroup.is_member(y)) {
                Some(self.subgroup.generators().to_vec())
            } else if let Some(hook) = &self.intersection_gens {
                hook(&reps)
            } else {
                None
            };
        let descriptor = match generators {
            Some(gens) => SubgroupDescriptor::new(member, gens),
            None => SubgroupDescriptor::predicate_only(member),
        };
        for g in descriptor.generators() {
            debug_assert!(descriptor.is_member(g), "intersection hook produced a non-member");
        }
        Ok(descriptor)
    }
}

/// Generic coset-orbit BFS: enumerates the orbit of the coset `start·K`
/// under left translation by `⟨generators⟩`, i.e. representatives of the
/// cosets `w·start·K`. Two candidates coincide when the quotient
/// `r^-1 c` satisfies `in_subgroup`, or, when a coset normal form exists,
/// when their `coset_key` labels agree (the returned map holds those
/// labels). `start` itself is always the first representative.
pub(crate) fn enumerate_cosets<K: std::hash::Hash + Eq>(
    group: &Group,
    start: GroupElement,
    generators: &[GroupElement],
    in_subgroup: &dyn Fn(&GroupElement) -> bool,
    coset_key: &dyn Fn(&GroupElement) -> Option<K>,
    cap: usize,
) -> Result<(Vec<GroupElement>, Option<HashMap<K, usize>>)> {
    let step_gens = step_generators(group, generators)?;
    let mut keyed: Option<HashMap<K, usize>> =
        coset_key(&start).map(|k| HashMap::from([(k, 0usize)]));
    // Cached inverses back the pairwise scans; the keyed path never needs
    // them.
    let mut reps_inv: Vec<GroupElement> = if keyed.is_none() {
        vec![group.invert(&start)?]
    } else {
        Vec::new()
    };
    let mut reps = vec![start];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &step_gens {
            let cand = group.multiply(g, &reps[i])?;
            match &mut keyed {
                Some(map) => {
                    let k = coset_key(&cand).expect("keyed enumeration stays keyed");
                    if map.contains_key(&k) {
                        continue;
                    }
                    if reps.len() >= cap {
                        return Err(HeckeError::IndexOverflow { cap });
                    }
                    map.insert(k, reps.len());
                }
                None => {
                    let known = reps_inv.iter().any(|ri| {
                        let d = group.multiply(ri, &cand).expect("validated");
                        in_subgroup(&d)
                    });
                    if known {
                        continue;
                    }
                    if reps.len() >= cap {
                        return Err(HeckeError::IndexOverflow { cap });
                    }
                    reps_inv.push(group.invert(&cand)?);
                }
            }
            reps.push(cand);
            queue.push_back(reps.len() - 1);
        }
    }
    Ok((reps, keyed))
}

/// Generators followed by their inverses, deduplicated, in a fixed order.
pub(crate) fn step_generators(
    group: &Group,
    generators: &[GroupElement],
) -> Result<Vec<GroupElement>> {
    let mut out: Vec<GroupElement> = Vec::with_capacity(generators.len() * 2);
    for g in generators {
        group.check_element(g)?;
        if !out.contains(g) {
            out.push(g.clone());
        }
        let gi = group.invert(g)?;
        if !out.contains(&gi) {
            out.push(gi);
        }
    }
    Ok(out)
}

/// Subgroup of a finite backend given by an explicit element list: bitset
/// membership, the listed elements as generators, and the minimum-index
/// coset representative as normal form.
pub fn finite_subgroup_descriptor(
    fg: &Arc<crate::group::FiniteGroup>,
    elements: &[usize],
) -> SubgroupDescriptor {
    let mut mask = vec![false; fg.order()];
    for &h in elements {
        mask[h] = true;
    }
    let member_mask = mask.clone();
    let member = move |g: &GroupElement| match g {
        GroupElement::Finite(i) => member_mask.get(*i).copied().unwrap_or(false),
        _ => false,
    };
    let generators: Vec<GroupElement> = elements
        .iter()
        .filter(|&&h| h != fg.identity_index())
        .map(|&h| GroupElement::Finite(h))
        .collect();
    let canon_fg = fg.clone();
    let canon_mask = mask;
    let canon = move |g: &GroupElement| match g {
        GroupElement::Finite(i) => {
            let best = (0..canon_fg.order())
                .filter(|&h| canon_mask[h])
                .map(|h| canon_fg.mul(*i, h))
                .min()
                .expect("subgroup contains the identity");
            GroupElement::Finite(best)
        }
        other => other.clone(),
    };
    SubgroupDescriptor::new(member, generators).with_canonicalizer(canon)
}

/// Exhaustive intersection-generator hook for finite backends.
pub fn finite_intersection_hook(
    fg: &Arc<crate::group::FiniteGroup>,
    sub: &SubgroupDescriptor,
) -> IntersectionHook {
    let fg = fg.clone();
    let sub = sub.clone();
    Arc::new(move |window: &[GroupElement]| {
        let group = Group::Finite(fg.clone());
        let mut gens = Vec::new();
        for i in 0..fg.order() {
            let g = GroupElement::Finite(i);
            let inside = window.iter().all(|y| {
                group
                    .conjugate(&g, y)
                    .map(|c| sub.is_member(&c))
                    .unwrap_or(false)
            });
            if inside && i != fg.identity_index() {
                gens.push(g);
            }
        }
        Some(gens)
    })
}

/// Result of reducing a finite pair by the kernel `⋂_{x∈G} xHx^-1`.
pub struct Reduction {
    pub pair: Arc<HeckePair>,
    pub kernel_size: usize,
    pub already_reduced: bool,
    /// Quotient multiplication table (trivial kernel: the original table).
    pub table: Vec<Vec<usize>>,
    /// Indices of the image of H in the quotient.
    pub h_image: Vec<usize>,
}

/// Computes the kernel of the left-translation action on `G/H` by exhaustive
/// enumeration and returns the quotient pair. Finite backends only.
pub fn core_reduce(pair: &HeckePair) -> Result<Reduction> {
    let fg = pair.group().finite()?.clone();
    let n = fg.order();
    let group = pair.group().clone();
    let kernel: Vec<usize> = (0..n)
        .filter(|&k| {
            let gk = GroupElement::Finite(k);
            (0..n).all(|x| {
                let conj = group
                    .conjugate(&gk, &GroupElement::Finite(x))
                    .expect("finite");
                pair.is_in_subgroup(&conj)
            })
        })
        .collect();
    let h_all: Vec<usize> = (0..n)
        .filter(|&h| pair.is_in_subgroup(&GroupElement::Finite(h)))
        .collect();

    if kernel.len() == 1 {
        let sub = finite_subgroup_descriptor(&fg, &h_all);
        let hook = finite_intersection_hook(&fg, &sub);
        let pair = Arc::new(
            HeckePair::new(Group::Finite(fg.clone()), sub, pair.max_index())
                .with_meta(pair.meta().clone())
                .with_intersection_hook(hook),
        );
        return Ok(Reduction {
            pair,
            kernel_size: 1,
            already_reduced: true,
            table: fg.table_rows(),
            h_image: h_all,
        });
    }

    // The kernel is normal (it is an intersection of conjugates over all of
    // G), so cosets partition G; label each coset by its minimum element.
    let mut coset_min = vec![usize::MAX; n];
    for g in 0..n {
        let m = kernel.iter().map(|&k| fg.mul(g, k)).min().unwrap();
        coset_min[g] = m;
    }
    let mut reps: Vec<usize> = coset_min.clone();
    reps.sort_unstable();
    reps.dedup();
    let index_of: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let m = reps.len();
    let mut table = vec![vec![0usize; m]; m];
    for i in 0..m {
        for j in 0..m {
            table[i][j] = index_of[&coset_min[fg.mul(reps[i], reps[j])]];
        }
    }
    let h_image: Vec<usize> = {
        let mut hs: Vec<usize> = h_all.iter().map(|&h| index_of[&coset_min[h]]).collect();
        hs.sort_unstable();
        hs.dedup();
        hs
    };
    let qg = Arc::new(crate::group::FiniteGroup::from_table(&table)?);
    let sub = finite_subgroup_descriptor(&qg, &h_image);
    let hook = finite_intersection_hook(&qg, &sub);
    let mut meta = pair.meta().clone();
    meta.family = format!("{}-reduced", meta.family);
    let new_pair = Arc::new(
        HeckePair::new(Group::Finite(qg), sub, pair.max_index())
            .with_meta(meta)
            .with_intersection_hook(hook),
    );
    Ok(Reduction {
        pair: new_pair,
        kernel_size: kernel.len(),
        already_reduced: false,
        table,
        h_image,
    })
}
