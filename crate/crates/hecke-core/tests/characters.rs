//! Catalog constructors and the closed-form characters, verified against
//! exact engine convolutions.

mod common;

use common::*;
use hecke_core::catalog::{
    build_pair, char_eval, parse_pair_spec, psl2_diag, verify_character, CharacterSpec, PairSpec,
};
use hecke_core::{Complex, HeckeError};
use serde_json::json;

#[test]
fn build_pair_from_json_specs() {
    let dihedral = build_pair(&parse_pair_spec(&json!({"family": "dihedral"})).unwrap()).unwrap();
    assert_eq!(dihedral.hecke_l(&dih(1, false)).unwrap(), 2);

    let tetra = build_pair(&parse_pair_spec(&tetrahedral_spec_json()).unwrap()).unwrap();
    assert_eq!(tetra.group().finite().unwrap().order(), 12);

    let psl2 = build_pair(&parse_pair_spec(&json!({"family": "psl2", "q": 2})).unwrap()).unwrap();
    assert_eq!(psl2.meta().q, Some(2));
    // L(x_1) = q(q+1), as forced by the phi_1 * phi_1 unit coefficient.
    assert_eq!(psl2.hecke_l(&psl2_diag(2, 1)).unwrap(), 6);

    let brenken = build_pair(
        &parse_pair_spec(&json!({
            "family": "brenken",
            "n": 1,
            "q_generators": [["2/1"]],
            "assume_reduced": true,
        }))
        .unwrap(),
    )
    .unwrap();
    assert_eq!(brenken.meta().assumed_reduced, Some(true));
    // The affine matrix [[2,0],[0,1]] behaves like (2,0) in the ax+b pair.
    let scaling = brenken
        .group()
        .element_from_str("[[2,0],[0,1]]")
        .unwrap();
    assert_eq!(brenken.hecke_l(&scaling).unwrap(), 2);
    assert_eq!(brenken.delta(&scaling).unwrap(), hecke_core::rat::integer(2));
}

#[test]
fn spec_validation_failures() {
    for bad in [
        json!({"family": "psl2", "q": 6}),
        json!({"family": "psl2"}),
        json!({"family": "brenken", "n": 1, "q_generators": [["2/1"]]}),
        json!({"family": "brenken", "n": 1, "q_generators": [["0/1"]], "assume_reduced": true}),
        json!({"family": "unknown"}),
        json!({"family": "dihedral", "max_index": 0}),
    ] {
        assert!(
            matches!(parse_pair_spec(&bad), Err(HeckeError::SpecInvalid(_))),
            "accepted {bad}"
        );
    }
}

#[test]
fn brenken_two_dimensional_scaling() {
    // Q generated by diag(2, 3): conjugates of Z^2 are the lattices
    // 2^a 3^b-scaled; L(diag(2,3) affine) = [Z^2 : 2Z x 3Z] = 6.
    let pair = build_pair(
        &parse_pair_spec(&json!({
            "family": "brenken",
            "n": 2,
            "q_generators": [["2/1", "0/1", "0/1", "3/1"]],
            "assume_reduced": true,
        }))
        .unwrap(),
    )
    .unwrap();
    let g = pair
        .group()
        .element_from_str("[[2,0,0],[0,3,0],[0,0,1]]")
        .unwrap();
    assert_eq!(pair.hecke_l(&g).unwrap(), 6);
    assert_eq!(pair.hecke_r(&g).unwrap(), 1);
    // Haar weight of the window {H, gH}: G_F = 2Z x 3Z inside H.
    let mu = hecke_core::levels::haar_index(
        &pair,
        &pair.group().identity(),
        &[pair.group().identity(), g],
    )
    .unwrap();
    assert_eq!(mu, hecke_core::rat::rational(1, 6));
}

#[test]
fn character_closed_forms() {
    // The trivial dihedral character.
    let one = CharacterSpec::DihedralPiC {
        c: Complex::new(1.0, 0.0),
    };
    for m in 0..6 {
        assert_eq!(char_eval(&one, m).unwrap(), Complex::new(1.0, 0.0));
    }
    // Unit value of the z-family at degree 0, for any admissible z.
    for z in [Complex::new(0.5, 0.0), Complex::from_polar(1.0, 1.1)] {
        let spec = CharacterSpec::Psl2HallZ { q: 3, z };
        assert!((char_eval(&spec, 0).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }
    // z = 1 branch at q = 2, m = 1: (2(q-1) + q + 1)/((q+1)q) = 5/6.
    let z1 = CharacterSpec::Psl2HallZ1 { q: 2 };
    let v = char_eval(&z1, 1).unwrap();
    assert!((v - Complex::new(5.0 / 6.0, 0.0)).norm() < 1e-15);

    // Degenerate parameters are rejected.
    assert!(matches!(
        char_eval(
            &CharacterSpec::DihedralPiC {
                c: Complex::new(0.0, 0.0)
            },
            1
        ),
        Err(HeckeError::DegenerateParameter(_))
    ));
    assert!(matches!(
        char_eval(
            &CharacterSpec::Psl2HallZ {
                q: 2,
                z: Complex::new(1.0, 0.0)
            },
            1
        ),
        Err(HeckeError::DegenerateParameter(_))
    ));
}

#[test]
fn z_and_reciprocal_give_the_same_character() {
    for z in [
        Complex::new(0.7, 0.0),
        Complex::from_polar(1.0, std::f64::consts::PI / 7.0),
        Complex::new(0.3, 0.4),
    ] {
        let a = CharacterSpec::Psl2HallZ { q: 2, z };
        let b = CharacterSpec::Psl2HallZ { q: 2, z: 1.0 / z };
        for m in 0..=6 {
            let va = char_eval(&a, m).unwrap();
            let vb = char_eval(&b, m).unwrap();
            assert!((va - vb).norm() < 1e-9, "z = {z}, m = {m}");
        }
    }
}

#[test]
fn dihedral_character_boundedness_dichotomy() {
    // |c| = 1: the values stay in the unit disc.
    let unit = CharacterSpec::DihedralPiC {
        c: Complex::from_polar(1.0, 0.9),
    };
    for m in 0..=50 {
        assert!(char_eval(&unit, m).unwrap().norm() <= 1.0 + 1e-12);
    }
    // |c| = 2: unbounded growth.
    let two = CharacterSpec::DihedralPiC {
        c: Complex::new(2.0, 0.0),
    };
    assert!(char_eval(&two, 50).unwrap().norm() > 1e6);
}

#[test]
fn verify_character_multiplicativity() {
    let dihedral = dihedral_pair();
    // Exact identity plus cosine addition: deviations are float noise.
    let spec = CharacterSpec::DihedralPiC {
        c: Complex::new(0.0, 1.0),
    };
    let report = verify_character(&dihedral, &spec, 6, 1e-9).unwrap();
    assert!(report.pass, "max deviation {}", report.max_deviation);
    assert_eq!(report.cases, 28);

    let exact = CharacterSpec::DihedralPiC {
        c: Complex::new(1.0, 0.0),
    };
    let report = verify_character(&dihedral, &exact, 5, 1e-15).unwrap();
    assert!(report.pass);

    let psl2 = psl2_pair(2);
    let spec = CharacterSpec::Psl2HallZ {
        q: 2,
        z: Complex::new(0.5, 0.0),
    };
    let report = verify_character(&psl2, &spec, 3, 1e-9).unwrap();
    assert!(report.pass, "max deviation {}", report.max_deviation);

    // Family mismatch is an error.
    assert!(matches!(
        verify_character(&dihedral, &CharacterSpec::Psl2HallZ1 { q: 2 }, 2, 1e-9),
        Err(HeckeError::PairMismatch)
    ));
}

#[test]
fn default_cap_is_a_million() {
    let pair = build_pair(&PairSpec::AxB { max_index: None }).unwrap();
    assert_eq!(pair.max_index(), 1_000_000);
}
