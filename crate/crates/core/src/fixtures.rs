//! Canonical worked models used across the test suites and shipped as JSON
//! fixtures by the CLI: a small medical-screening network (screening test,
//! disease severity, vaccination choice), its context-specific variant, the
//! dynamic version unrolled over a few years, and a bare monomial model on a
//! single ternary block.

use crate::compile::{
    apply_merges, compile_bn, compile_monomial_model, unroll_dbn, BnSpec, BnVariable, CptColumn,
    DbnSpec, MergeGroup, MergeSpec, TransitionVariable,
};
use crate::model::Model;

fn col(parents: Vec<usize>, probs: Vec<f64>) -> CptColumn {
    CptColumn { parents, probs }
}

/// Three-variable screening network: Y1 test result (binary), Y2 disease
/// severity (ternary), Y3 vaccination choice (binary), with Y1 -> Y2 -> Y3
/// and Y1 -> Y3.
pub fn screening_bn() -> BnSpec {
    BnSpec {
        variables: vec![
            BnVariable {
                name: "Y1".into(),
                cardinality: 2,
                parents: vec![],
                cpt: vec![col(vec![], vec![0.6, 0.4])],
            },
            BnVariable {
                name: "Y2".into(),
                cardinality: 3,
                parents: vec![0],
                cpt: vec![
                    col(vec![0], vec![0.4, 0.3, 0.3]),
                    col(vec![1], vec![0.2, 0.5, 0.3]),
                ],
            },
            BnVariable {
                name: "Y3".into(),
                cardinality: 2,
                parents: vec![0, 1],
                cpt: vec![
                    col(vec![0, 0], vec![0.8, 0.2]),
                    col(vec![0, 1], vec![0.3, 0.7]),
                    col(vec![0, 2], vec![0.1, 0.9]),
                    col(vec![1, 0], vec![0.7, 0.3]),
                    col(vec![1, 1], vec![0.3, 0.7]),
                    col(vec![1, 2], vec![0.1, 0.9]),
                ],
            },
        ],
    }
}

/// Context-specific substitutions for [`screening_bn`]: the vaccination
/// choice ignores the test result once the disease severity is 1 or 2, and
/// the two sick severities are equally likely after a negative test.
pub fn screening_merges() -> MergeSpec {
    MergeSpec {
        groups: vec![
            MergeGroup {
                label: "theta_Y3_0|Y2_1".into(),
                members: vec!["theta_Y3_0|Y1_0,Y2_1".into(), "theta_Y3_0|Y1_1,Y2_1".into()],
            },
            MergeGroup {
                label: "theta_Y3_1|Y2_1".into(),
                members: vec!["theta_Y3_1|Y1_0,Y2_1".into(), "theta_Y3_1|Y1_1,Y2_1".into()],
            },
            MergeGroup {
                label: "theta_Y3_0|Y2_2".into(),
                members: vec!["theta_Y3_0|Y1_0,Y2_2".into(), "theta_Y3_0|Y1_1,Y2_2".into()],
            },
            MergeGroup {
                label: "theta_Y3_1|Y2_2".into(),
                members: vec!["theta_Y3_1|Y1_0,Y2_2".into(), "theta_Y3_1|Y1_1,Y2_2".into()],
            },
            MergeGroup {
                label: "theta_Y2_12|Y1_0".into(),
                members: vec!["theta_Y2_1|Y1_0".into(), "theta_Y2_2|Y1_0".into()],
            },
        ],
    }
}

/// The context-specific screening model (merges applied).
pub fn screening_csbn() -> Model {
    let bn = compile_bn(&screening_bn()).expect("screening BN compiles");
    apply_merges(&bn, &screening_merges()).expect("screening merges apply")
}

/// Dynamic screening model: slice 1 is [`screening_bn`]; afterwards the test,
/// severity and vaccination each depend on the previous year's severity, and
/// severity additionally on the previous vaccination choice.
pub fn screening_dbn() -> DbnSpec {
    DbnSpec {
        initial: screening_bn(),
        transitions: vec![
            // Y1(t) | Y2(t-1)
            TransitionVariable {
                parents: vec![1],
                cpt: vec![
                    col(vec![0], vec![0.6, 0.4]),
                    col(vec![1], vec![0.4, 0.6]),
                    col(vec![2], vec![0.3, 0.7]),
                ],
            },
            // Y2(t) | Y2(t-1), Y3(t-1)
            TransitionVariable {
                parents: vec![1, 2],
                cpt: vec![
                    col(vec![0, 0], vec![0.5, 0.3, 0.2]),
                    col(vec![0, 1], vec![0.7, 0.2, 0.1]),
                    col(vec![1, 0], vec![0.2, 0.3, 0.5]),
                    col(vec![1, 1], vec![0.4, 0.3, 0.3]),
                    col(vec![2, 0], vec![0.2, 0.5, 0.3]),
                    col(vec![2, 1], vec![0.4, 0.4, 0.2]),
                ],
            },
            // Y3(t) | Y2(t-1)
            TransitionVariable {
                parents: vec![1],
                cpt: vec![
                    col(vec![0], vec![0.9, 0.1]),
                    col(vec![1], vec![0.6, 0.4]),
                    col(vec![2], vec![0.2, 0.8]),
                ],
            },
        ],
    }
}

/// The dynamic screening model unrolled to four years.
pub fn screening_dbn_unrolled() -> Model {
    unroll_dbn(&screening_dbn(), 4).expect("screening DBN unrolls")
}

/// A single ternary block with a hand-picked degree-two monomial set, the
/// standing example of a non-multilinear one-block model where proportional
/// covariation is not CD-optimal.
pub fn ternary_monomial_model() -> Model {
    compile_monomial_model(
        &[
            "theta_1_1".to_string(),
            "theta_1_2".to_string(),
            "theta_1_3".to_string(),
        ],
        &[0.33, 0.33, 0.34],
        &[
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![0, 0, 1],
            vec![0, 2, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
        ],
    )
    .expect("monomial model compiles")
}
