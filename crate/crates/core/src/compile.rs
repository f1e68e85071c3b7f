//! Compilers from declarative model specs to sparse interpolating
//! polynomials: plain Bayesian networks, context-specific substitutions
//! (merges) and stationary feed-forward first-order dynamic networks
//! unrolled to a finite horizon.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Model, Variable};
use crate::poly::{EventSet, Monomial, Polynomial, Term};
use crate::space::{ParameterSpace, SUM_TOLERANCE};

/// One conditional distribution column: the probabilities of a variable's
/// values for a fixed configuration of its parents.
#[derive(Debug, Clone, PartialEq)]
pub struct CptColumn {
    /// Parent values aligned with the variable's declared parent list.
    pub parents: Vec<usize>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnVariable {
    pub name: String,
    pub cardinality: usize,
    /// Indices of earlier variables; acyclicity holds by construction.
    pub parents: Vec<usize>,
    pub cpt: Vec<CptColumn>,
}

/// Declarative Bayesian-network spec.
#[derive(Debug, Clone, PartialEq)]
pub struct BnSpec {
    pub variables: Vec<BnVariable>,
}

/// Parameters declared equal, replaced by one fresh shared indeterminate.
/// Members are referenced by canonical label.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeGroup {
    pub label: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MergeSpec {
    pub groups: Vec<MergeGroup>,
}

/// Per-variable transition model of a 2-TBN: parents live in the previous
/// slice only, so there are no intra-slice edges by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionVariable {
    /// Indices into the previous slice's variable list.
    pub parents: Vec<usize>,
    pub cpt: Vec<CptColumn>,
}

/// Stationary feed-forward first-order DBN: an initial network for slice 1
/// and one shared transition model for every later slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DbnSpec {
    pub initial: BnSpec,
    pub transitions: Vec<TransitionVariable>,
}

pub fn theta_label(var: &str, value: usize, parents: &[(&str, usize)]) -> String {
    base_label("theta", var, value, parents)
}

pub fn transition_label(var: &str, value: usize, parents: &[(&str, usize)]) -> String {
    base_label("that", var, value, parents)
}

fn base_label(prefix: &str, var: &str, value: usize, parents: &[(&str, usize)]) -> String {
    if parents.is_empty() {
        format!("{prefix}_{var}_{value}")
    } else {
        let given: Vec<String> = parents.iter().map(|(p, v)| format!("{p}_{v}")).collect();
        format!("{prefix}_{var}_{value}|{}", given.join(","))
    }
}

/// Parent configurations in lexicographic order, first parent most
/// significant.
fn parent_configs(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut configs = vec![Vec::new()];
    for &card in cards {
        let mut next = Vec::with_capacity(configs.len() * card);
        for config in &configs {
            for v in 0..card {
                let mut c = config.clone();
                c.push(v);
                next.push(c);
            }
        }
        configs = next;
    }
    configs
}

fn check_columns(
    var_name: &str,
    cardinality: usize,
    parent_cards: &[usize],
    cpt: &[CptColumn],
) -> Result<HashMap<Vec<usize>, usize>> {
    let expected = parent_configs(parent_cards);
    if cpt.len() != expected.len() {
        return Err(Error::InvalidSpec(format!(
            "variable `{var_name}` has {} CPT columns, expected {}",
            cpt.len(),
            expected.len()
        )));
    }
    let mut by_config = HashMap::new();
    for (idx, column) in cpt.iter().enumerate() {
        if column.parents.len() != parent_cards.len() {
            return Err(Error::InvalidSpec(format!(
                "column {idx} of `{var_name}` fixes {} parents, expected {}",
                column.parents.len(),
                parent_cards.len()
            )));
        }
        for (pos, (&v, &card)) in column.parents.iter().zip(parent_cards).enumerate() {
            if v >= card {
                return Err(Error::InvalidSpec(format!(
                    "column {idx} of `{var_name}` sets parent {pos} to {v}, cardinality {card}"
                )));
            }
        }
        if column.probs.len() != cardinality {
            return Err(Error::InvalidSpec(format!(
                "column {idx} of `{var_name}` lists {} probabilities, expected {cardinality}",
                column.probs.len()
            )));
        }
        let sum: f64 = column.probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::CptColumnSum {
                variable: var_name.to_string(),
                column: idx,
                sum,
            });
        }
        if by_config.insert(column.parents.clone(), idx).is_some() {
            return Err(Error::InvalidSpec(format!(
                "duplicate column for parents {:?} of `{var_name}`",
                column.parents
            )));
        }
    }
    Ok(by_config)
}

impl BnSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, var) in self.variables.iter().enumerate() {
            if var.cardinality == 0 {
                return Err(Error::InvalidSpec(format!(
                    "variable `{}` has cardinality 0",
                    var.name
                )));
            }
            for &p in &var.parents {
                if p >= i {
                    return Err(Error::InvalidSpec(format!(
                        "variable `{}` references parent index {p}, which is not an earlier variable",
                        var.name
                    )));
                }
            }
            let parent_cards: Vec<usize> = var
                .parents
                .iter()
                .map(|&p| self.variables[p].cardinality)
                .collect();
            check_columns(&var.name, var.cardinality, &parent_cards, &var.cpt)?;
        }
        Ok(())
    }
}

/// Compiles a BN spec into its interpolating polynomial: one atom per joint
/// outcome, each monomial the product of the compatible conditional
/// probabilities. The result is homogeneous of degree m and multilinear.
pub fn compile_bn(spec: &BnSpec) -> Result<Model> {
    spec.validate()?;
    let m = spec.variables.len();

    // Indeterminates and blocks, one block per (variable, parent config).
    let mut block_slots: Vec<Vec<(String, f64)>> = Vec::new();
    let mut block_variable: Vec<Option<usize>> = Vec::new();
    // (variable, column index in declared order) -> (block id, label per value)
    let mut column_block: Vec<Vec<usize>> = Vec::new();
    let mut column_by_config: Vec<HashMap<Vec<usize>, usize>> = Vec::new();

    for (i, var) in spec.variables.iter().enumerate() {
        let parent_cards: Vec<usize> = var.parents.iter().map(|&p| self_card(spec, p)).collect();
        let by_config = check_columns(&var.name, var.cardinality, &parent_cards, &var.cpt)?;
        let mut blocks_for_var = Vec::with_capacity(var.cpt.len());
        for column in &var.cpt {
            let named: Vec<(&str, usize)> = var
                .parents
                .iter()
                .zip(&column.parents)
                .map(|(&p, &v)| (spec.variables[p].name.as_str(), v))
                .collect();
            let slots: Vec<(String, f64)> = column
                .probs
                .iter()
                .enumerate()
                .map(|(value, &prob)| (theta_label(&var.name, value, &named), prob))
                .collect();
            blocks_for_var.push(block_slots.len());
            block_slots.push(slots);
            block_variable.push(Some(i));
        }
        column_block.push(blocks_for_var);
        column_by_config.push(by_config);
    }

    let space = ParameterSpace::new(block_slots)?;

    // Atoms in lexicographic outcome order, first variable most significant.
    let cards: Vec<usize> = spec.variables.iter().map(|v| v.cardinality).collect();
    let atoms = parent_configs(&cards);
    let mut terms = Vec::with_capacity(atoms.len());
    for (atom_id, outcome) in atoms.iter().enumerate() {
        let mut monomial = Monomial::one();
        for (i, var) in spec.variables.iter().enumerate() {
            let parent_values: Vec<usize> = var.parents.iter().map(|&p| outcome[p]).collect();
            let column = column_by_config[i][&parent_values];
            let block = space.block(column_block[i][column]);
            monomial.push_factor(block.slots[outcome[i]]);
        }
        terms.push(Term {
            atom: atom_id,
            monomial,
        });
    }

    let model = Model {
        space,
        variables: spec
            .variables
            .iter()
            .map(|v| Variable {
                name: v.name.clone(),
                cardinality: v.cardinality,
            })
            .collect(),
        atoms,
        poly: Polynomial { terms },
        block_variable,
    };
    model.validate()?;
    debug_assert_eq!(model.poly.degree(), m as u32);
    Ok(model)
}

fn self_card(spec: &BnSpec, var: usize) -> usize {
    spec.variables[var].cardinality
}

/// Substitutes each merge group by one shared indeterminate. Columns that
/// become identical collapse into a single block; a merge leaving a shared
/// indeterminate across two *different* blocks is rejected.
pub fn apply_merges(model: &Model, merges: &MergeSpec) -> Result<Model> {
    if merges.groups.is_empty() {
        return Ok(model.clone());
    }

    let n = model.space.len();
    // representative (group index) per old id
    let mut group_of: Vec<Option<usize>> = vec![None; n];
    for (g, group) in merges.groups.iter().enumerate() {
        if group.members.len() < 2 {
            return Err(Error::MergeConflict(format!(
                "group `{}` lists fewer than two members",
                group.label
            )));
        }
        let mut var_of_group: Option<Option<usize>> = None;
        let mut value: Option<f64> = None;
        for label in &group.members {
            let id = model.space.by_label(label)?;
            if group_of[id].is_some() {
                return Err(Error::MergeConflict(format!(
                    "`{label}` appears in more than one merge group"
                )));
            }
            group_of[id] = Some(g);
            let var = model.block_variable[model.space.indeterminate(id).block];
            match var_of_group {
                None => var_of_group = Some(var),
                Some(v) if v == var => {}
                Some(_) => {
                    return Err(Error::MergeConflict(format!(
                        "group `{}` spans different variables",
                        group.label
                    )));
                }
            }
            let v = model.space.base().value(id)?;
            match value {
                None => value = Some(v),
                Some(prev) if (prev - v).abs() <= SUM_TOLERANCE => {}
                Some(prev) => {
                    return Err(Error::MergeConflict(format!(
                        "group `{}` merges values {prev} and {v}",
                        group.label
                    )));
                }
            }
        }
    }

    // New label/value per old id.
    let old_label = |id: usize| -> (String, f64) {
        match group_of[id] {
            Some(g) => {
                let rep = model.space.by_label(&merges.groups[g].members[0]).unwrap();
                (
                    merges.groups[g].label.clone(),
                    model.space.base().values()[rep],
                )
            }
            None => (
                model.space.label(id).to_string(),
                model.space.base().values()[id],
            ),
        }
    };

    // Map blocks through the substitution, collapsing identical columns.
    let mut new_block_slots: Vec<Vec<(String, f64)>> = Vec::new();
    let mut new_block_variable: Vec<Option<usize>> = Vec::new();
    let mut seen: HashMap<Vec<String>, usize> = HashMap::new();
    let mut label_home: HashMap<String, usize> = HashMap::new();
    for block in model.space.blocks() {
        let slots: Vec<(String, f64)> = block.slots.iter().map(|&id| old_label(id)).collect();
        let key: Vec<String> = slots.iter().map(|(l, _)| l.clone()).collect();
        let new_id = match seen.get(&key) {
            Some(&existing) => existing,
            None => {
                let id = new_block_slots.len();
                seen.insert(key.clone(), id);
                new_block_slots.push(slots);
                new_block_variable.push(model.block_variable[block.id]);
                id
            }
        };
        for label in key {
            match label_home.get(&label) {
                Some(&home) if home != new_id => {
                    return Err(Error::MergeConflict(format!(
                        "`{label}` would belong to two incompatible blocks after merging"
                    )));
                }
                _ => {
                    label_home.insert(label, new_id);
                }
            }
        }
    }

    let space = ParameterSpace::new(new_block_slots)?;
    let id_map: Vec<usize> = (0..n)
        .map(|id| space.by_label(&old_label(id).0).unwrap())
        .collect();

    let terms = model
        .poly
        .terms
        .iter()
        .map(|t| Term {
            atom: t.atom,
            monomial: Monomial::from_pairs(
                t.monomial.iter().map(|(id, e)| (id_map[id], e)).collect(),
            ),
        })
        .collect();

    let merged = Model {
        space,
        variables: model.variables.clone(),
        atoms: model.atoms.clone(),
        poly: Polynomial { terms },
        block_variable: new_block_variable,
    };
    merged.validate()?;
    Ok(merged)
}

impl DbnSpec {
    pub fn validate(&self) -> Result<()> {
        self.initial.validate()?;
        let m = self.initial.variables.len();
        if self.transitions.len() != m {
            return Err(Error::InvalidSpec(format!(
                "{} transition models for {} variables",
                self.transitions.len(),
                m
            )));
        }
        for (i, tr) in self.transitions.iter().enumerate() {
            let name = &self.initial.variables[i].name;
            for &p in &tr.parents {
                if p >= m {
                    return Err(Error::InvalidSpec(format!(
                        "transition of `{name}` references parent index {p}"
                    )));
                }
            }
            let parent_cards: Vec<usize> = tr
                .parents
                .iter()
                .map(|&p| self.initial.variables[p].cardinality)
                .collect();
            check_columns(
                name,
                self.initial.variables[i].cardinality,
                &parent_cards,
                &tr.cpt,
            )?;
        }
        Ok(())
    }
}

/// Unrolls a stationary 2-TBN to horizon `t_max`. Transition indeterminates
/// are shared across slices 2..=t_max, so exponents accumulate (up to
/// t_max - 1) and the polynomial is generally not multilinear. The atoms are
/// joint trajectories; every term has total degree m * t_max.
pub fn unroll_dbn(spec: &DbnSpec, t_max: usize) -> Result<Model> {
    if t_max < 1 {
        return Err(Error::BadHorizon(t_max));
    }
    spec.validate()?;
    let m = spec.initial.variables.len();

    // Slice-1 blocks reuse the plain BN labels; transition blocks are shared
    // by all later slices.
    let mut block_slots: Vec<Vec<(String, f64)>> = Vec::new();
    let mut block_variable: Vec<Option<usize>> = Vec::new();
    let mut initial_column_block: Vec<Vec<usize>> = Vec::new();
    let mut initial_by_config: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
    for (i, var) in spec.initial.variables.iter().enumerate() {
        let parent_cards: Vec<usize> = var
            .parents
            .iter()
            .map(|&p| spec.initial.variables[p].cardinality)
            .collect();
        let by_config = check_columns(&var.name, var.cardinality, &parent_cards, &var.cpt)?;
        let mut blocks_for_var = Vec::new();
        for column in &var.cpt {
            let named: Vec<(&str, usize)> = var
                .parents
                .iter()
                .zip(&column.parents)
                .map(|(&p, &v)| (spec.initial.variables[p].name.as_str(), v))
                .collect();
            blocks_for_var.push(block_slots.len());
            block_slots.push(
                column
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(value, &prob)| (theta_label(&var.name, value, &named), prob))
                    .collect(),
            );
            block_variable.push(Some(i));
        }
        initial_column_block.push(blocks_for_var);
        initial_by_config.push(by_config);
    }

    let mut transition_column_block: Vec<Vec<usize>> = Vec::new();
    let mut transition_by_config: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
    if t_max > 1 {
        for (i, tr) in spec.transitions.iter().enumerate() {
            let name = &spec.initial.variables[i].name;
            let parent_cards: Vec<usize> = tr
                .parents
                .iter()
                .map(|&p| spec.initial.variables[p].cardinality)
                .collect();
            let by_config = check_columns(
                name,
                spec.initial.variables[i].cardinality,
                &parent_cards,
                &tr.cpt,
            )?;
            let mut blocks_for_var = Vec::new();
            for column in &tr.cpt {
                let named: Vec<(&str, usize)> = tr
                    .parents
                    .iter()
                    .zip(&column.parents)
                    .map(|(&p, &v)| (spec.initial.variables[p].name.as_str(), v))
                    .collect();
                blocks_for_var.push(block_slots.len());
                block_slots.push(
                    column
                        .probs
                        .iter()
                        .enumerate()
                        .map(|(value, &prob)| (transition_label(name, value, &named), prob))
                        .collect(),
                );
                block_variable.push(Some(i));
            }
            transition_column_block.push(blocks_for_var);
            transition_by_config.push(by_config);
        }
    }

    let space = ParameterSpace::new(block_slots)?;

    // Unrolled positions ordered by (variable index, slice); slices are
    // 1-based in names.
    let variables: Vec<Variable> = spec
        .initial
        .variables
        .iter()
        .flat_map(|v| {
            (1..=t_max).map(move |t| Variable {
                name: format!("{}@{t}", v.name),
                cardinality: v.cardinality,
            })
        })
        .collect();
    let position = |var: usize, t: usize| var * t_max + (t - 1);

    let cards: Vec<usize> = variables.iter().map(|v| v.cardinality).collect();
    let atoms = parent_configs(&cards);
    let mut terms = Vec::with_capacity(atoms.len());
    for (atom_id, outcome) in atoms.iter().enumerate() {
        let mut monomial = Monomial::one();
        for (i, var) in spec.initial.variables.iter().enumerate() {
            let parent_values: Vec<usize> = var
                .parents
                .iter()
                .map(|&p| outcome[position(p, 1)])
                .collect();
            let column = initial_by_config[i][&parent_values];
            let block = space.block(initial_column_block[i][column]);
            monomial.push_factor(block.slots[outcome[position(i, 1)]]);
        }
        for t in 2..=t_max {
            for (i, tr) in spec.transitions.iter().enumerate() {
                let parent_values: Vec<usize> = tr
                    .parents
                    .iter()
                    .map(|&p| outcome[position(p, t - 1)])
                    .collect();
                let column = transition_by_config[i][&parent_values];
                let block = space.block(transition_column_block[i][column]);
                monomial.push_factor(block.slots[outcome[position(i, t)]]);
            }
        }
        terms.push(Term {
            atom: atom_id,
            monomial,
        });
    }

    let model = Model {
        space,
        variables,
        atoms,
        poly: Polynomial { terms },
        block_variable,
    };
    model.validate()?;
    debug_assert_eq!(model.poly.degree(), (m * t_max) as u32);
    Ok(model)
}

/// A model given directly by a labelled monomial set over one sum-to-one
/// block, the shape the general CD procedure operates on.
pub fn compile_monomial_model(
    labels: &[String],
    values: &[f64],
    monomials: &[Vec<u32>],
) -> Result<Model> {
    if labels.len() != values.len() {
        return Err(Error::LengthMismatch(labels.len(), values.len()));
    }
    let slots: Vec<(String, f64)> = labels.iter().cloned().zip(values.iter().copied()).collect();
    let space = ParameterSpace::new(vec![slots])?;
    space.check_assignment(space.base())?;
    let mut terms = Vec::with_capacity(monomials.len());
    for (atom, exps) in monomials.iter().enumerate() {
        if exps.len() != labels.len() {
            return Err(Error::LengthMismatch(exps.len(), labels.len()));
        }
        terms.push(Term {
            atom,
            monomial: Monomial::from_pairs(
                exps.iter().enumerate().map(|(id, &e)| (id, e)).collect(),
            ),
        });
    }
    Ok(Model {
        space,
        variables: Vec::new(),
        atoms: vec![Vec::new(); monomials.len()],
        poly: Polynomial { terms },
        block_variable: vec![None],
    })
}

/// Atoms satisfying every `(variable, value)` constraint. Constraints are a
/// conjunction; an empty list selects every atom.
pub fn event_from_predicate(model: &Model, constraints: &[(String, usize)]) -> Result<EventSet> {
    let mut resolved = Vec::with_capacity(constraints.len());
    for (name, value) in constraints {
        let idx = model.variable_index(name)?;
        let card = model.variables[idx].cardinality;
        if *value >= card {
            return Err(Error::BadVariableValue {
                variable: name.clone(),
                value: *value,
                cardinality: card,
            });
        }
        resolved.push((idx, *value));
    }
    Ok(EventSet::new(
        model
            .atoms
            .iter()
            .enumerate()
            .filter(|(_, outcome)| resolved.iter().all(|&(idx, v)| outcome[idx] == v))
            .map(|(atom, _)| atom),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{screening_bn, screening_csbn, screening_dbn, screening_merges};

    #[test]
    fn screening_bn_compiles_to_twelve_cubic_terms() {
        let model = compile_bn(&screening_bn()).unwrap();
        assert_eq!(model.atom_count(), 12);
        assert_eq!(model.space.len(), 20);
        assert_eq!(model.space.blocks().len(), 9);
        assert!(model.poly.is_homogeneous());
        assert_eq!(model.poly.degree(), 3);
        assert!(model.poly.is_multilinear());
        let total = model.poly.evaluate(model.space.base()).unwrap();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_binary_variable_compiles_to_two_linear_terms() {
        let spec = BnSpec {
            variables: vec![BnVariable {
                name: "Y".into(),
                cardinality: 2,
                parents: vec![],
                cpt: vec![CptColumn {
                    parents: vec![],
                    probs: vec![0.25, 0.75],
                }],
            }],
        };
        let model = compile_bn(&spec).unwrap();
        assert_eq!(model.atom_count(), 2);
        assert_eq!(model.poly.degree(), 1);
    }

    #[test]
    fn binary_chain_has_two_to_the_m_terms_of_degree_m() {
        for m in 1..=4usize {
            let variables = (0..m)
                .map(|i| BnVariable {
                    name: format!("C{i}"),
                    cardinality: 2,
                    parents: if i == 0 { vec![] } else { vec![i - 1] },
                    cpt: if i == 0 {
                        vec![CptColumn {
                            parents: vec![],
                            probs: vec![0.3, 0.7],
                        }]
                    } else {
                        vec![
                            CptColumn {
                                parents: vec![0],
                                probs: vec![0.6, 0.4],
                            },
                            CptColumn {
                                parents: vec![1],
                                probs: vec![0.2, 0.8],
                            },
                        ]
                    },
                })
                .collect();
            let model = compile_bn(&BnSpec { variables }).unwrap();
            assert_eq!(model.atom_count(), 1 << m);
            assert!(model.poly.is_homogeneous());
            assert_eq!(model.poly.degree(), m as u32);
        }
    }

    #[test]
    fn bad_cpt_sum_is_rejected() {
        let mut spec = screening_bn();
        spec.variables[1].cpt[0].probs = vec![0.5, 0.3, 0.3];
        let err = compile_bn(&spec).unwrap_err();
        assert!(matches!(err, Error::CptColumnSum { .. }));
    }

    #[test]
    fn dangling_parent_is_rejected() {
        let mut spec = screening_bn();
        spec.variables[1].parents = vec![1];
        assert!(matches!(
            compile_bn(&spec).unwrap_err(),
            Error::InvalidSpec(_)
        ));
    }

    #[test]
    fn merges_shrink_the_space_but_not_the_polynomial() {
        let bn = compile_bn(&screening_bn()).unwrap();
        let merged = apply_merges(&bn, &screening_merges()).unwrap();
        assert_eq!(bn.space.len(), 20);
        assert_eq!(merged.space.len(), 15);
        assert_eq!(merged.atom_count(), 12);
        assert!(merged.poly.is_multilinear());
        assert!(merged.poly.is_homogeneous());
        assert_eq!(merged.poly.degree(), 3);
        // the two severity-context columns collapsed into shared blocks
        assert_eq!(merged.space.blocks().len(), 7);
    }

    #[test]
    fn empty_merge_spec_is_the_identity() {
        let bn = compile_bn(&screening_bn()).unwrap();
        let same = apply_merges(&bn, &MergeSpec::default()).unwrap();
        assert_eq!(same.space.len(), bn.space.len());
        assert_eq!(same.poly, bn.poly);
    }

    #[test]
    fn merges_preserve_evaluation_on_consistent_assignments() {
        let bn = compile_bn(&screening_bn()).unwrap();
        let merged = apply_merges(&bn, &screening_merges()).unwrap();
        let before = bn.poly.evaluate(bn.space.base()).unwrap();
        let after = merged.poly.evaluate(merged.space.base()).unwrap();
        assert!((before - after).abs() < 1e-12);
        // and on a restricted event, atom by atom
        let p_before = bn.atom_distribution(bn.space.base()).unwrap();
        let p_after = merged.atom_distribution(merged.space.base()).unwrap();
        for (a, b) in p_before.iter().zip(&p_after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_merge_of_a_column_pair_is_rejected() {
        // merging only the value-0 entries of two columns strands the
        // value-1 entries in incompatible blocks
        let bn = compile_bn(&screening_bn()).unwrap();
        let merges = MergeSpec {
            groups: vec![MergeGroup {
                label: "theta_Y3_0|Y2_1".into(),
                members: vec!["theta_Y3_0|Y1_0,Y2_1".into(), "theta_Y3_0|Y1_1,Y2_1".into()],
            }],
        };
        let err = apply_merges(&bn, &merges).unwrap_err();
        assert!(matches!(err, Error::MergeConflict(_)));
    }

    #[test]
    fn merge_of_unequal_values_is_rejected() {
        let bn = compile_bn(&screening_bn()).unwrap();
        let merges = MergeSpec {
            groups: vec![MergeGroup {
                label: "bad".into(),
                members: vec!["theta_Y2_0|Y1_0".into(), "theta_Y2_1|Y1_0".into()],
            }],
        };
        // 0.4 vs 0.3 cannot be one indeterminate
        let err = apply_merges(&bn, &merges).unwrap_err();
        assert!(matches!(err, Error::MergeConflict(_)));
    }

    #[test]
    fn horizon_one_unrolling_matches_the_initial_network() {
        let spec = screening_dbn();
        let unrolled = unroll_dbn(&spec, 1).unwrap();
        let initial = compile_bn(&spec.initial).unwrap();
        assert_eq!(unrolled.atom_count(), initial.atom_count());
        assert_eq!(unrolled.space.len(), initial.space.len());
        assert_eq!(
            unrolled.poly.evaluate(unrolled.space.base()).unwrap(),
            initial.poly.evaluate(initial.space.base()).unwrap()
        );
        assert_eq!(unrolled.variables[0].name, "Y1@1");
    }

    #[test]
    fn unrolled_terms_are_homogeneous_of_degree_m_times_t() {
        let spec = screening_dbn();
        for t in 1..=3usize {
            let model = unroll_dbn(&spec, t).unwrap();
            assert_eq!(model.atom_count(), 12usize.pow(t as u32));
            assert!(model.poly.is_homogeneous());
            assert_eq!(model.poly.degree(), (3 * t) as u32);
            let total = model.poly.evaluate(model.space.base()).unwrap();
            assert!((total - 1.0).abs() < 1e-9, "t={t}: {total}");
            // transition indeterminates never exceed degree t - 1
            for block in model.space.blocks() {
                if model.space.label(block.slots[0]).starts_with("that_") {
                    assert!(model.poly.max_indeterminate_degree(block) <= (t - 1) as u32);
                }
            }
        }
    }

    #[test]
    fn zero_horizon_is_rejected() {
        assert!(matches!(
            unroll_dbn(&screening_dbn(), 0).unwrap_err(),
            Error::BadHorizon(0)
        ));
    }

    #[test]
    fn restriction_to_all_atoms_is_the_identity_and_to_none_is_zero() {
        let model = compile_bn(&screening_bn()).unwrap();
        let all = model.poly.restrict(&model.all_atoms()).unwrap();
        assert_eq!(all, model.poly);
        let none = model
            .poly
            .restrict(&crate::poly::EventSet::empty())
            .unwrap();
        assert!(none.is_empty());
        assert_eq!(none.evaluate(model.space.base()).unwrap(), 0.0);
    }

    #[test]
    fn predicates_select_the_expected_atoms() {
        let model = compile_bn(&screening_bn()).unwrap();
        assert_eq!(event_from_predicate(&model, &[]).unwrap().len(), 12);
        let no_vaccine = event_from_predicate(&model, &[("Y3".into(), 0)]).unwrap();
        assert_eq!(no_vaccine.len(), 6);
        let restricted = model.poly.restrict(&no_vaccine).unwrap();
        assert_eq!(restricted.len(), 6);
        assert!(restricted.terms.iter().all(|t| t.monomial.degree() == 3));
        assert!(matches!(
            event_from_predicate(&model, &[("Y9".into(), 0)]).unwrap_err(),
            Error::UnknownVariable(_)
        ));
        assert!(matches!(
            event_from_predicate(&model, &[("Y2".into(), 7)]).unwrap_err(),
            Error::BadVariableValue { .. }
        ));
    }

    #[test]
    fn csbn_atom_probability_is_the_product_of_merged_parameters() {
        let model = screening_csbn();
        // positive test, severity 1, no vaccination: 0.4 * 0.5 * 0.3
        let event = event_from_predicate(
            &model,
            &[("Y1".into(), 1), ("Y2".into(), 1), ("Y3".into(), 0)],
        )
        .unwrap();
        assert_eq!(event.len(), 1);
        let restricted = model.poly.restrict(&event).unwrap();
        let value = restricted.evaluate(model.space.base()).unwrap();
        assert!((value - 0.06).abs() < 1e-12);
    }
}
