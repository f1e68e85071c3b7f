//! Integration checks on the unrolled dynamic screening model: trajectory
//! counts, the structure of the polynomial restricted to a persistence
//! event, the block-restricted monomial set driving the general CD
//! procedure, and the cubic one-way sensitivity function.

use std::collections::BTreeSet;

use polysens::compile::event_from_predicate;
use polysens::covariation::CovariationScheme;
use polysens::divergence::{
    block_monomial_set, cd_atomic, cd_general, cd_general_proportional_closed, distributions,
};
use polysens::fixtures::screening_dbn_unrolled;
use polysens::sensitivity::{covaried_assignment, sensitivity_function, VariationRequest};

const VARIED: &str = "that_Y2_1|Y2_1,Y3_0";

fn persistence_event() -> Vec<(String, usize)> {
    // test positive every year, severity one for the first three, never
    // vaccinated; the final severity is unconstrained
    let mut constraints = Vec::new();
    for t in 1..=4 {
        constraints.push((format!("Y1@{t}"), 1));
        constraints.push((format!("Y3@{t}"), 0));
    }
    for t in 1..=3 {
        constraints.push((format!("Y2@{t}"), 1));
    }
    constraints
}

#[test]
fn unrolled_model_has_the_expected_size() {
    let model = screening_dbn_unrolled();
    assert_eq!(model.atom_count(), 20736); // 2^8 * 3^4
    assert_eq!(model.poly.len(), 20736);
    assert!(model.poly.is_homogeneous());
    assert_eq!(model.poly.degree(), 12);
    assert!(!model.poly.is_multilinear());
    assert_eq!(model.space.len(), 50);
    let total = model.poly.evaluate(model.space.base()).unwrap();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn persistence_event_restricts_to_three_shared_factor_terms() {
    let model = screening_dbn_unrolled();
    let event = event_from_predicate(&model, &persistence_event()).unwrap();
    assert_eq!(event.len(), 3);
    let restricted = model.poly.restrict(&event).unwrap();
    assert_eq!(restricted.len(), 3);
    assert!(restricted.terms.iter().all(|t| t.monomial.degree() == 12));

    // shared factor outside the varied block
    let shared = [
        ("theta_Y1_1", 1u32),
        ("theta_Y2_1|Y1_1", 1),
        ("theta_Y3_0|Y1_1,Y2_1", 1),
        ("that_Y1_1|Y2_1", 3),
        ("that_Y3_0|Y2_1", 3),
    ];
    for (label, exp) in shared {
        let id = model.space.by_label(label).unwrap();
        for term in &restricted.terms {
            assert_eq!(term.monomial.exponent(id), exp, "{label}");
        }
    }

    // severity transition exponents across the three trajectories
    let varied = model.space.by_label(VARIED).unwrap();
    let mut varied_exps: Vec<u32> = restricted
        .terms
        .iter()
        .map(|t| t.monomial.exponent(varied))
        .collect();
    varied_exps.sort_unstable();
    assert_eq!(varied_exps, vec![2, 2, 3]);

    // each remaining trajectory carries exactly one sibling transition
    let sibling_0 = model.space.by_label("that_Y2_0|Y2_1,Y3_0").unwrap();
    let sibling_2 = model.space.by_label("that_Y2_2|Y2_1,Y3_0").unwrap();
    let mut siblings = BTreeSet::new();
    for term in &restricted.terms {
        match (
            term.monomial.exponent(sibling_0),
            term.monomial.exponent(sibling_2),
        ) {
            (0, 0) => assert_eq!(term.monomial.exponent(varied), 3),
            (1, 0) => {
                siblings.insert(0);
                assert_eq!(term.monomial.exponent(varied), 2);
            }
            (0, 1) => {
                siblings.insert(2);
                assert_eq!(term.monomial.exponent(varied), 2);
            }
            other => panic!("unexpected sibling exponents {other:?}"),
        }
    }
    assert_eq!(siblings.len(), 2);

    // the degree profile of the factored form: shared-factor exponents plus
    // the varied transition's per-term exponents
    let mut profile: Vec<u32> = shared.iter().map(|&(_, e)| e).collect();
    profile.extend(varied_exps);
    profile.sort_unstable_by(|a, b| b.cmp(a));
    assert_eq!(profile, vec![3, 3, 3, 2, 2, 1, 1, 1]);

    // the polynomial-level common factor adds the varied transition at its
    // minimum exponent
    let gcd = restricted.common_factor();
    assert_eq!(gcd.exponent(varied), 2);
    assert_eq!(gcd.degree(), 1 + 1 + 1 + 3 + 3 + 2);
}

#[test]
fn block_monomial_set_collapses_to_twelve_patterns() {
    let model = screening_dbn_unrolled();
    let varied = model.space.by_label(VARIED).unwrap();
    let set = block_monomial_set(&model, varied).unwrap();
    assert_eq!(set.len(), 12);

    let m0 = model.space.by_label("that_Y2_0|Y2_1,Y3_0").unwrap();
    let m1 = varied;
    let m2 = model.space.by_label("that_Y2_2|Y2_1,Y3_0").unwrap();
    let exps = |mono: &Vec<(usize, u32)>| {
        let exp = |id: usize| {
            mono.iter()
                .find(|&&(i, _)| i == id)
                .map(|&(_, e)| e)
                .unwrap_or(0)
        };
        (exp(m0), exp(m1), exp(m2))
    };
    let patterns: BTreeSet<(u32, u32, u32)> = set.iter().map(exps).collect();
    let expected: BTreeSet<(u32, u32, u32)> = [
        // cubic: only runs through the varied transition can reach degree 3
        (0, 3, 0),
        (1, 2, 0),
        (0, 2, 1),
        // quadratic: all six patterns occur
        (0, 2, 0),
        (1, 1, 0),
        (0, 1, 1),
        (2, 0, 0),
        (1, 0, 1),
        (0, 0, 2),
        // linear
        (1, 0, 0),
        (0, 1, 0),
        (0, 0, 1),
    ]
    .into_iter()
    .collect();
    assert_eq!(patterns, expected);
}

#[test]
fn proportional_ratio_set_has_seven_distinct_values() {
    let model = screening_dbn_unrolled();
    let varied = model.space.by_label(VARIED).unwrap();
    let set = block_monomial_set(&model, varied).unwrap();
    let base = model.space.base();
    let old = base.value(varied).unwrap();
    let x = 0.45;
    let t = x / old;
    let k = (1.0 - x) / (1.0 - old);

    let mut ratios: Vec<f64> = set
        .iter()
        .map(|mono| {
            let varied_exp: u32 = mono
                .iter()
                .filter(|&&(id, _)| id == varied)
                .map(|&(_, e)| e)
                .sum();
            let rest: u32 = mono.iter().map(|&(_, e)| e).sum::<u32>() - varied_exp;
            t.powi(varied_exp as i32) * k.powi(rest as i32)
        })
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ratios.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut expected = vec![t * t * t, t * t, t, t * t * k, t * k, k * k, k];
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(ratios.len(), 7);
    for (r, e) in ratios.iter().zip(&expected) {
        assert!((r - e).abs() < 1e-12);
    }

    // the procedure agrees with the atomic definition on full distributions
    let req = VariationRequest::single(varied, "x");
    let general = cd_general(&model, &req, &[x], &CovariationScheme::Proportional)
        .unwrap()
        .value;
    let spread = expected.last().unwrap().ln() - expected[0].ln();
    assert!((general - spread).abs() < 1e-12);
    let (p, q) = distributions(&model, &req, &[x], &CovariationScheme::Proportional).unwrap();
    let atomic = cd_atomic(&p, &q).unwrap().value;
    assert!((general - atomic).abs() < 1e-12);
}

#[test]
fn general_closed_form_matches_the_procedure_on_the_dbn() {
    let model = screening_dbn_unrolled();
    let varied = model.space.by_label(VARIED).unwrap();
    let req = VariationRequest::single(varied, "x");
    for &x in &[0.05, 0.2, 0.3, 0.45, 0.6] {
        let general = cd_general(&model, &req, &[x], &CovariationScheme::Proportional)
            .unwrap()
            .value;
        let closed = cd_general_proportional_closed(&model, &req, &[x])
            .unwrap()
            .value;
        assert!((general - closed).abs() < 1e-12, "x={x}");
    }
}

#[test]
fn one_way_sensitivity_is_cubic_and_matches_reevaluation() {
    let model = screening_dbn_unrolled();
    // positive tests and no vaccination throughout, severity one in the
    // first and last year, free in between
    let mut constraints = vec![("Y2@1".to_string(), 1usize), ("Y2@4".to_string(), 1usize)];
    for t in 1..=4 {
        constraints.push((format!("Y1@{t}"), 1));
        constraints.push((format!("Y3@{t}"), 0));
    }
    let event = event_from_predicate(&model, &constraints).unwrap();
    assert_eq!(event.len(), 9);

    let varied = model.space.by_label(VARIED).unwrap();
    let req = VariationRequest::single(varied, "x");
    let restricted = model.poly.restrict(&event).unwrap();
    for scheme in [
        CovariationScheme::Proportional,
        CovariationScheme::Uniform,
        CovariationScheme::OrderPreserving,
    ] {
        let f = sensitivity_function(&model, &event, &req, &scheme).unwrap();
        assert_eq!(f.degree_of(0, 1e-9), 3, "{scheme:?}");
        let (lo, hi) = f.admissible_box()[0];
        for i in 0..=20 {
            let x = lo + (hi - lo) * i as f64 / 20.0;
            let symbolic = f.eval(&[x]).unwrap();
            let assignment = covaried_assignment(&model, &req, &[x], &scheme).unwrap();
            let direct = restricted.evaluate(&assignment).unwrap();
            assert!(
                (symbolic - direct).abs() < 1e-10,
                "{scheme:?} at {x}: {symbolic} vs {direct}"
            );
        }
    }

    // the cubic coefficient is carried by the all-ones trajectory alone
    let f = sensitivity_function(&model, &event, &req, &CovariationScheme::Proportional).unwrap();
    let cubic = f.segments[0].poly.terms.get(&vec![3u32]).copied().unwrap();
    assert!(cubic != 0.0);
}

#[test]
fn proportional_has_the_smallest_cd_distance_on_this_instance() {
    let model = screening_dbn_unrolled();
    let varied = model.space.by_label(VARIED).unwrap();
    let req = VariationRequest::single(varied, "x");
    for i in 1..=9 {
        let x = 0.05 * i as f64;
        let prop = cd_general(&model, &req, &[x], &CovariationScheme::Proportional)
            .unwrap()
            .value;
        let uni = cd_general(&model, &req, &[x], &CovariationScheme::Uniform)
            .unwrap()
            .value;
        assert!(prop <= uni + 1e-12, "x={x}: {prop} vs uniform {uni}");
        if x <= 0.5 {
            let ord = cd_general(&model, &req, &[x], &CovariationScheme::OrderPreserving)
                .unwrap()
                .value;
            assert!(prop <= ord + 1e-12, "x={x}: {prop} vs order {ord}");
        }
    }
}
