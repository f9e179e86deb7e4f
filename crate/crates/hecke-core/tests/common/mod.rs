//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use hecke_core::catalog::{build_pair, parse_pair_spec, PairSpec};
use hecke_core::rat::rational;
use hecke_core::{GroupElement, HeckePair, Rational};
use serde_json::{json, Value};
use std::sync::Arc;

pub fn q(n: i64, d: i64) -> Rational {
    rational(n, d)
}

pub fn dihedral_pair() -> Arc<HeckePair> {
    build_pair(&PairSpec::Dihedral { max_index: None }).unwrap()
}

pub fn axb_pair() -> Arc<HeckePair> {
    build_pair(&PairSpec::AxB { max_index: None }).unwrap()
}

pub fn heisenberg_pair() -> Arc<HeckePair> {
    build_pair(&PairSpec::Heisenberg { max_index: None }).unwrap()
}

pub fn psl2_pair(qp: u32) -> Arc<HeckePair> {
    build_pair(&PairSpec::Psl2 {
        q: qp,
        max_index: None,
    })
    .unwrap()
}

pub fn dih(exp: i64, flip: bool) -> GroupElement {
    GroupElement::dihedral(exp, flip)
}

pub fn axb_el(an: i64, ad: i64, bn: i64, bd: i64) -> GroupElement {
    GroupElement::axb(q(an, ad), q(bn, bd)).unwrap()
}

pub fn heis(u: Rational, v: Rational, w: Rational) -> GroupElement {
    GroupElement::heisenberg(u, v, w)
}

/// Multiplication table of Z_n.
pub fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect()
}

/// The order-12 rotation-group pair: N = Z2 x Z2 (indices a + 2b), Q = Z3
/// cycling the three involutions, H = Z2 x {0}.
pub fn tetrahedral_spec_json() -> Value {
    json!({
        "family": "finite_semidirect",
        "n_table": [[0,1,2,3],[1,0,3,2],[2,3,0,1],[3,2,1,0]],
        "q_table": [[0,1,2],[1,2,0],[2,0,1]],
        "action": [[0,1,2,3],[0,3,1,2],[0,2,3,1]],
        "h": [0,1],
    })
}

pub fn tetrahedral_pair() -> Arc<HeckePair> {
    build_pair(&parse_pair_spec(&tetrahedral_spec_json()).unwrap()).unwrap()
}

/// Semidirect pairs (N abelian, H ≤ N) with |N||Q| <= 24, used by the
/// fullness cross-validation sweep.
pub fn sweep_corpus() -> Vec<Value> {
    let mut out = vec![tetrahedral_spec_json()];
    // Cyclic N with Q generated by a unit.
    for n in 2..=12usize {
        for u in 1..n {
            if gcd(u, n) != 1 {
                continue;
            }
            let mut k = 1usize;
            let mut acc = u % n;
            while acc != 1 {
                acc = acc * u % n;
                k += 1;
            }
            if n * k > 24 || k > 4 {
                continue;
            }
            for d in divisors(n) {
                out.push(cyclic_semidirect_spec(n, d, u));
            }
        }
    }
    // Klein four-group with the coordinate swap.
    out.push(json!({
        "family": "finite_semidirect",
        "n_table": [[0,1,2,3],[1,0,3,2],[2,3,0,1],[3,2,1,0]],
        "q_table": [[0,1],[1,0]],
        "action": [[0,1,2,3],[0,2,1,3]],
        "h": [0,1],
    }));
    out
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

pub fn table_of(spec: &Value, key: &str) -> Vec<Vec<usize>> {
    spec[key]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_u64().unwrap() as usize)
                .collect()
        })
        .collect()
}

/// Cyclic pair Z_n with subgroup dZ_n and Q = <u> acting by multiplication.
pub fn cyclic_semidirect_spec(n: usize, d: usize, u: usize) -> Value {
    // Order of u in (Z/n)*.
    let mut k = 1usize;
    let mut acc = u % n;
    while acc != 1 {
        acc = acc * u % n;
        k += 1;
    }
    let q_table: Vec<Vec<usize>> = (0..k).map(|i| (0..k).map(|j| (i + j) % k).collect()).collect();
    let mut action = Vec::with_capacity(k);
    let mut mult = 1usize;
    for _ in 0..k {
        action.push((0..n).map(|x| x * mult % n).collect::<Vec<usize>>());
        mult = mult * u % n;
    }
    let h: Vec<usize> = (0..n).filter(|x| x % d == 0).collect();
    json!({
        "family": "finite_semidirect",
        "n_table": cyclic_table(n),
        "q_table": q_table,
        "action": action,
        "h": h,
    })
}
