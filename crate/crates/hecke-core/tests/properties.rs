//! Property tests of the engine invariants on the catalog pairs.

mod common;

use common::*;
use hecke_core::rat::{integer, rational};
use hecke_core::{Basis, GroupElement, HeckeElement, HeckePair};
use num_traits::Signed;
use proptest::prelude::*;
use std::sync::Arc;

fn dihedral_strategy() -> impl Strategy<Value = GroupElement> {
    (-10i64..10, any::<bool>()).prop_map(|(n, e)| dih(n, e))
}

fn axb_strategy() -> impl Strategy<Value = GroupElement> {
    (-6i64..6, 1i64..6, -6i64..6, 1i64..6)
        .prop_filter("nonzero scale", |(an, _, _, _)| *an != 0)
        .prop_map(|(an, ad, bn, bd)| axb_el(an, ad, bn, bd))
}

fn heisenberg_strategy() -> impl Strategy<Value = GroupElement> {
    (
        -6i64..6,
        1i64..4,
        -6i64..6,
        1i64..4,
        -6i64..6,
        1i64..4,
    )
        .prop_map(|(un, ud, vn, vd, wn, wd)| heis(q(un, ud), q(vn, vd), q(wn, wd)))
}

/// Short words over the modular generators and the degree-one scaling.
fn psl2_strategy() -> impl Strategy<Value = GroupElement> {
    proptest::collection::vec(0u8..4, 0..4).prop_map(|word| {
        let group = hecke_core::Group::Psl2;
        let letters = [
            hecke_core::catalog::psl2_s(),
            hecke_core::catalog::psl2_t(),
            hecke_core::catalog::psl2_diag(2, 1),
            group.invert(&hecke_core::catalog::psl2_diag(2, 1)).unwrap(),
        ];
        word.iter().fold(group.identity(), |acc, &i| {
            group.multiply(&acc, &letters[i as usize]).unwrap()
        })
    })
}

/// Random subgroup members per family.
fn h_member_strategy(family: &str) -> BoxedStrategy<GroupElement> {
    match family {
        "dihedral" => any::<bool>().prop_map(|e| dih(0, e)).boxed(),
        "axb" => (-8i64..8).prop_map(|m| axb_el(1, 1, m, 1)).boxed(),
        "heisenberg" => (-5i64..5, -5i64..5)
            .prop_map(|(m, n)| heis(integer(m), integer(n), integer(0)))
            .boxed(),
        other => panic!("no member strategy for {other}"),
    }
}

fn delta_is_multiplicative(pair: &Arc<HeckePair>, x: &GroupElement, y: &GroupElement) {
    let xy = pair.group().multiply(x, y).unwrap();
    assert_eq!(
        pair.delta(&xy).unwrap(),
        pair.delta(x).unwrap() * pair.delta(y).unwrap()
    );
}

fn transversal_is_disjoint(pair: &Arc<HeckePair>, x: &GroupElement) {
    let rec = pair.coset(pair.double_coset_of(x).unwrap());
    assert_eq!(rec.transversal.len() as u64, rec.l);
    for (i, zi) in rec.transversal.iter().enumerate() {
        for (j, zj) in rec.transversal.iter().enumerate() {
            assert_eq!(pair.left_coset_eq(zi, zj), i == j);
        }
    }
}

fn class_is_constant_on_double_coset(
    pair: &Arc<HeckePair>,
    x: &GroupElement,
    h1: &GroupElement,
    h2: &GroupElement,
) {
    let g = pair.group();
    let moved = g.multiply(&g.multiply(h1, x).unwrap(), h2).unwrap();
    assert_eq!(
        pair.double_coset_of(x).unwrap(),
        pair.double_coset_of(&moved).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dihedral_delta_homomorphism(x in dihedral_strategy(), y in dihedral_strategy()) {
        delta_is_multiplicative(&dihedral_pair(), &x, &y);
    }

    #[test]
    fn axb_delta_homomorphism(x in axb_strategy(), y in axb_strategy()) {
        delta_is_multiplicative(&axb_pair(), &x, &y);
    }

    #[test]
    fn heisenberg_delta_homomorphism(x in heisenberg_strategy(), y in heisenberg_strategy()) {
        delta_is_multiplicative(&heisenberg_pair(), &x, &y);
    }

    #[test]
    fn axb_transversals_disjoint(x in axb_strategy()) {
        transversal_is_disjoint(&axb_pair(), &x);
    }

    #[test]
    fn heisenberg_transversals_disjoint(x in heisenberg_strategy()) {
        transversal_is_disjoint(&heisenberg_pair(), &x);
    }

    #[test]
    fn psl2_transversals_disjoint(x in psl2_strategy()) {
        transversal_is_disjoint(&psl2_pair(2), &x);
    }

    #[test]
    fn axb_class_constant_on_double_coset(
        x in axb_strategy(),
        h1 in h_member_strategy("axb"),
        h2 in h_member_strategy("axb"),
    ) {
        class_is_constant_on_double_coset(&axb_pair(), &x, &h1, &h2);
    }

    #[test]
    fn heisenberg_class_constant_on_double_coset(
        x in heisenberg_strategy(),
        h1 in h_member_strategy("heisenberg"),
        h2 in h_member_strategy("heisenberg"),
    ) {
        class_is_constant_on_double_coset(&heisenberg_pair(), &x, &h1, &h2);
    }

    #[test]
    fn axb_t_is_a_semigroup(s in axb_strategy(), t in axb_strategy()) {
        let pair = axb_pair();
        if pair.in_t(&s).unwrap() && pair.in_t(&t).unwrap() {
            let st = pair.group().multiply(&s, &t).unwrap();
            prop_assert!(pair.in_t(&st).unwrap());
        }
    }

    #[test]
    fn heisenberg_t_is_a_semigroup(s in heisenberg_strategy(), t in heisenberg_strategy()) {
        let pair = heisenberg_pair();
        if pair.in_t(&s).unwrap() && pair.in_t(&t).unwrap() {
            let st = pair.group().multiply(&s, &t).unwrap();
            prop_assert!(pair.in_t(&st).unwrap());
        }
    }

    #[test]
    fn subgroup_closed_under_quotients(
        h1 in h_member_strategy("heisenberg"),
        h2 in h_member_strategy("heisenberg"),
    ) {
        let pair = heisenberg_pair();
        prop_assert!(pair.is_in_subgroup(&h1));
        let g = pair.group();
        let d = g.multiply(&h1, &g.invert(&h2).unwrap()).unwrap();
        prop_assert!(pair.is_in_subgroup(&d));
    }

    #[test]
    fn heisenberg_t_equals_normalizer(x in heisenberg_strategy()) {
        // in_T([u,v,w]) holds exactly when both translation parts are
        // integers.
        let pair = heisenberg_pair();
        let GroupElement::Heisenberg { u, v, .. } = x.clone() else { unreachable!() };
        let expected = u.denom() == &hecke_core::Int::from(1) && v.denom() == &hecke_core::Int::from(1);
        prop_assert_eq!(pair.in_t(&x).unwrap(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dihedral_algebra_axioms(
        xs in proptest::collection::vec((dihedral_strategy(), -5i64..5, 1i64..5), 1..3),
        ys in proptest::collection::vec((dihedral_strategy(), -5i64..5, 1i64..5), 1..3),
        zs in proptest::collection::vec((dihedral_strategy(), -5i64..5, 1i64..5), 1..3),
    ) {
        algebra_axioms(&dihedral_pair(), &xs, &ys, &zs)?;
    }

    #[test]
    fn axb_algebra_axioms(
        xs in proptest::collection::vec((axb_strategy(), -5i64..5, 1i64..5), 1..3),
        ys in proptest::collection::vec((axb_strategy(), -5i64..5, 1i64..5), 1..3),
        zs in proptest::collection::vec((axb_strategy(), -5i64..5, 1i64..5), 1..3),
    ) {
        algebra_axioms(&axb_pair(), &xs, &ys, &zs)?;
    }

    #[test]
    fn psl2_algebra_axioms(
        xs in proptest::collection::vec((psl2_strategy(), -3i64..4, 1i64..4), 1..3),
        ys in proptest::collection::vec((psl2_strategy(), -3i64..4, 1i64..4), 1..3),
    ) {
        let pair = psl2_pair(2);
        let f = element_of(&pair, &xs)?;
        let g = element_of(&pair, &ys)?;
        let fg = f.convolve(&g).unwrap();
        // Involution is an isometric anti-homomorphism.
        let lhs = fg.involute().unwrap();
        let rhs = g.involute().unwrap().convolve(&f.involute().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(f.involute().unwrap().l1_norm(), f.l1_norm());
        prop_assert!(fg.l1_norm() <= f.l1_norm() * g.l1_norm());
    }
}

fn element_of(
    pair: &Arc<HeckePair>,
    terms: &[(GroupElement, i64, i64)],
) -> Result<HeckeElement, TestCaseError> {
    let data: Vec<(GroupElement, hecke_core::Rational)> = terms
        .iter()
        .map(|(x, n, d)| (x.clone(), rational(*n, *d)))
        .collect();
    Ok(HeckeElement::from_terms(pair, Basis::Chi, data).unwrap())
}

fn algebra_axioms(
    pair: &Arc<HeckePair>,
    xs: &[(GroupElement, i64, i64)],
    ys: &[(GroupElement, i64, i64)],
    zs: &[(GroupElement, i64, i64)],
) -> Result<(), TestCaseError> {
    let f = element_of(pair, xs)?;
    let g = element_of(pair, ys)?;
    let h = element_of(pair, zs)?;
    // Associativity, exactly.
    let lhs = f.convolve(&g).unwrap().convolve(&h).unwrap();
    let rhs = f.convolve(&g.convolve(&h).unwrap()).unwrap();
    prop_assert_eq!(&lhs, &rhs);
    // Unit.
    let unit = HeckeElement::unit(pair).unwrap();
    prop_assert_eq!(&unit.convolve(&f).unwrap(), &f);
    prop_assert_eq!(&f.convolve(&unit).unwrap(), &f);
    // Anti-homomorphism of the involution.
    let anti = f.convolve(&g).unwrap().involute().unwrap();
    let anti_rhs = g.involute().unwrap().convolve(&f.involute().unwrap()).unwrap();
    prop_assert_eq!(&anti, &anti_rhs);
    // Isometry of the involution and submultiplicativity, exact rationals.
    prop_assert_eq!(f.involute().unwrap().l1_norm(), f.l1_norm());
    let prod_norm = f.convolve(&g).unwrap().l1_norm();
    prop_assert!(prod_norm <= f.l1_norm() * g.l1_norm());
    prop_assert!(!f.l1_norm().is_negative());
    Ok(())
}

#[test]
fn phi_classes_have_unit_norm_across_backends() {
    let pairs: Vec<(Arc<HeckePair>, Vec<GroupElement>)> = vec![
        (
            dihedral_pair(),
            vec![dih(0, false), dih(1, false), dih(4, true)],
        ),
        (
            axb_pair(),
            vec![axb_el(2, 1, 0, 1), axb_el(5, 3, 1, 2), axb_el(1, 4, 0, 1)],
        ),
        (
            heisenberg_pair(),
            vec![
                heis(q(1, 2), q(0, 1), q(0, 1)),
                heis(q(2, 3), q(1, 2), q(1, 5)),
            ],
        ),
        (
            psl2_pair(2),
            vec![
                hecke_core::catalog::psl2_diag(2, 1),
                hecke_core::catalog::psl2_diag(2, 2),
            ],
        ),
    ];
    for (pair, samples) in &pairs {
        for x in samples {
            let phi = HeckeElement::phi_of(pair, x).unwrap();
            assert_eq!(phi.l1_norm(), integer(1), "family {}", pair.meta().family);
        }
    }
}
