//! Brute-force verification: enumerate every valid covariation of the varied
//! blocks on a simplex grid, evaluate the divergence between the original
//! and each candidate distribution atom by atom, and compare the grid
//! minimum against the proportional scheme. Also hosts the seeded random
//! model generator the verification suites run on.

use crate::compile::{compile_bn, BnSpec, BnVariable, CptColumn};
use crate::covariation::{covary, CovariationScheme};
use crate::divergence::{cd_atomic, phi_divergence, PhiFunction};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::rng::SplitMix64;
use crate::sensitivity::{covaried_assignment, VariationRequest};
use crate::space::IndetId;

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Simplex grid step for the covaried mass.
    pub grid_step: f64,
    /// Hard cap on the number of candidate covariations.
    pub point_cap: u64,
    /// Slack allowed when comparing the scheme value to the grid minimum.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.05,
            point_cap: 1_000_000,
            tolerance: 1e-9,
        }
    }
}

impl OracleConfig {
    pub fn with_step(grid_step: f64) -> Self {
        Self {
            grid_step,
            ..Self::default()
        }
    }
}

/// All ways of splitting `steps` grid units over `parts` cells.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    pub parts: usize,
    pub steps: u32,
    /// Mass being distributed; cell values are `count / steps * total`.
    pub total: f64,
}

impl SimplexGrid {
    pub fn point_count(&self) -> u128 {
        // C(steps + parts - 1, parts - 1)
        let n = self.steps as u128 + self.parts as u128 - 1;
        let k = self.parts as u128 - 1;
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) / (i + 1);
        }
        c
    }

    /// Enumerates the grid; counts are exact so every point sums to `total`
    /// up to one multiplication per cell.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut counts = vec![0u32; self.parts];
        self.fill(0, self.steps, &mut counts, &mut out);
        out
    }

    fn fill(&self, cell: usize, remaining: u32, counts: &mut Vec<u32>, out: &mut Vec<Vec<f64>>) {
        if cell + 1 == self.parts {
            counts[cell] = remaining;
            let scale = if self.steps == 0 {
                0.0
            } else {
                self.total / self.steps as f64
            };
            out.push(counts.iter().map(|&c| c as f64 * scale).collect());
            return;
        }
        for c in 0..=remaining {
            counts[cell] = c;
            self.fill(cell + 1, remaining - c, counts, out);
        }
    }
}

/// Outcome of one optimality check: the scheme's divergence, the best value
/// the grid found, and whether the scheme is within tolerance of it.
#[derive(Debug, Clone)]
pub struct OptimalityVerdict {
    pub scheme_value: f64,
    pub grid_min: f64,
    /// Member values per varied block at the grid minimizer.
    pub minimizer: Vec<Vec<(IndetId, f64)>>,
    pub margin: f64,
    pub pass: bool,
    pub points_evaluated: u64,
}

/// Candidate covariations of one block: the varied member pinned, the rest
/// split over a weighted simplex grid, with the three named schemes injected
/// so comparisons never suffer off-grid bias.
fn entry_candidates(
    model: &Model,
    varied: IndetId,
    value: f64,
    cfg: &OracleConfig,
) -> Result<Vec<Vec<(IndetId, f64)>>> {
    let block = model.space.block_of(varied);
    let members = block.members();
    let base = model.space.base();
    let varied_mult = block.multiplicity(varied);
    let residual = 1.0 - varied_mult as f64 * value;
    if residual < -1e-9 {
        return Err(Error::InvalidVariation(format!(
            "new value {value} leaves negative residual mass"
        )));
    }
    let residual = residual.max(0.0);
    let covaried: Vec<IndetId> = members.iter().copied().filter(|&id| id != varied).collect();
    if covaried.is_empty() {
        return Err(Error::UnsupportedCovariation(
            "no covarying members in the block".to_string(),
        ));
    }

    let steps = ((residual / cfg.grid_step).round() as u32).max(1);
    let grid = SimplexGrid {
        parts: covaried.len(),
        steps,
        total: residual,
    };
    let mut candidates = Vec::new();
    for point in grid.points() {
        let mut updates = vec![(varied, value)];
        for (&id, &mass) in covaried.iter().zip(&point) {
            updates.push((id, mass / block.multiplicity(id) as f64));
        }
        candidates.push(updates);
    }
    for scheme in [
        CovariationScheme::Proportional,
        CovariationScheme::Uniform,
        CovariationScheme::OrderPreserving,
    ] {
        if let Ok(updates) = covary(&model.space, &scheme, varied, value, base) {
            candidates.push(updates);
        }
    }
    Ok(candidates)
}

fn optimize<F>(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    cfg: &OracleConfig,
    objective: F,
    scheme_value: f64,
) -> Result<OptimalityVerdict>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    if values.len() != req.entries.len() {
        return Err(Error::LengthMismatch(values.len(), req.entries.len()));
    }
    let per_entry: Vec<Vec<Vec<(IndetId, f64)>>> = req
        .entries
        .iter()
        .zip(values)
        .map(|(entry, &value)| entry_candidates(model, entry.varied, value, cfg))
        .collect::<Result<_>>()?;

    let total: u128 = per_entry.iter().map(|c| c.len() as u128).product();
    if total > cfg.point_cap as u128 {
        return Err(Error::GridTooLarge {
            points: total,
            cap: cfg.point_cap,
        });
    }

    let base = model.space.base();
    let p = model.atom_distribution(base)?;
    let mut grid_min = f64::INFINITY;
    let mut minimizer: Vec<Vec<(IndetId, f64)>> = Vec::new();
    let mut evaluated = 0u64;

    let n = per_entry.len();
    let mut choice = vec![0usize; n];
    loop {
        let mut updates = Vec::new();
        for (v, candidates) in per_entry.iter().enumerate() {
            updates.extend(candidates[choice[v]].iter().copied());
        }
        let assignment = base.with(&updates);
        let q = model.atom_distribution(&assignment)?;
        let obj = objective(&p, &q);
        evaluated += 1;
        if obj < grid_min {
            grid_min = obj;
            minimizer = per_entry
                .iter()
                .enumerate()
                .map(|(v, candidates)| candidates[choice[v]].clone())
                .collect();
        }

        let mut v = 0;
        loop {
            if v == n {
                let margin = scheme_value - grid_min;
                return Ok(OptimalityVerdict {
                    scheme_value,
                    grid_min,
                    minimizer,
                    margin,
                    pass: margin <= cfg.tolerance,
                    points_evaluated: evaluated,
                });
            }
            choice[v] += 1;
            if choice[v] < per_entry[v].len() {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

fn proportional_objective<F>(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    objective: &F,
) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let varied = covaried_assignment(model, req, values, &CovariationScheme::Proportional)?;
    let p = model.atom_distribution(model.space.base())?;
    let q = model.atom_distribution(&varied)?;
    Ok(objective(&p, &q))
}

/// Checks that proportional covariation minimizes the CD distance over every
/// grid covariation of a multilinear single-full-CPT variation.
pub fn verify_cd_optimality(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    cfg: &OracleConfig,
) -> Result<OptimalityVerdict> {
    req.validate(model)?;
    if !model.poly.is_multilinear() {
        return Err(Error::NonMultilinear);
    }
    req.assert_no_co_occurrence(model)?;
    let objective = |p: &[f64], q: &[f64]| cd_atomic(p, q).expect("aligned").value;
    let scheme_value = proportional_objective(model, req, values, &objective)?;
    optimize(model, req, values, cfg, objective, scheme_value)
}

/// Same check with a phi-divergence objective.
pub fn verify_phi_optimality(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    phi: &PhiFunction,
    cfg: &OracleConfig,
) -> Result<OptimalityVerdict> {
    req.validate(model)?;
    if !model.poly.is_multilinear() {
        return Err(Error::NonMultilinear);
    }
    req.assert_no_co_occurrence(model)?;
    let objective = |p: &[f64], q: &[f64]| phi_divergence(p, q, phi).expect("aligned").value;
    let scheme_value = proportional_objective(model, req, values, &objective)?;
    optimize(model, req, values, cfg, objective, scheme_value)
}

/// One-way grid search on an arbitrary monomial model. A failing verdict
/// (margin above tolerance) is a genuine counterexample to proportional
/// optimality, the expected outcome for non-multilinear models.
pub fn find_cd_counterexample(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    cfg: &OracleConfig,
) -> Result<OptimalityVerdict> {
    req.validate(model)?;
    if req.entries.len() != 1 {
        return Err(Error::BadRequest(
            "counterexample search is one-way: exactly one varied block".to_string(),
        ));
    }
    let objective = |p: &[f64], q: &[f64]| cd_atomic(p, q).expect("aligned").value;
    let scheme_value = proportional_objective(model, req, values, &objective)?;
    optimize(model, req, values, cfg, objective, scheme_value)
}

// ---------------------------------------------------------------------------
// seeded random models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RandomModelConfig {
    pub max_variables: usize,
    pub max_cardinality: usize,
    pub max_parents: usize,
    pub edge_probability: f64,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        Self {
            max_variables: 4,
            max_cardinality: 3,
            max_parents: 2,
            edge_probability: 0.5,
        }
    }
}

/// A random BN spec with Dirichlet(1, ..., 1) columns.
pub fn random_bn_spec(rng: &mut SplitMix64, cfg: &RandomModelConfig) -> BnSpec {
    let m = 2 + rng.next_below(cfg.max_variables - 1);
    let mut variables = Vec::with_capacity(m);
    for i in 0..m {
        let cardinality = 2 + rng.next_below(cfg.max_cardinality - 1);
        let mut parents = Vec::new();
        for j in 0..i {
            if parents.len() < cfg.max_parents && rng.next_f64() < cfg.edge_probability {
                parents.push(j);
            }
        }
        let parent_cards: Vec<usize> = parents
            .iter()
            .map(|&p| {
                let parent: &BnVariable = &variables[p];
                parent.cardinality
            })
            .collect();
        let mut configs = vec![Vec::new()];
        for &card in &parent_cards {
            let mut next = Vec::new();
            for config in &configs {
                for v in 0..card {
                    let mut c: Vec<usize> = config.clone();
                    c.push(v);
                    next.push(c);
                }
            }
            configs = next;
        }
        let cpt = configs
            .into_iter()
            .map(|config| CptColumn {
                parents: config,
                probs: rng.dirichlet(cardinality),
            })
            .collect();
        variables.push(BnVariable {
            name: format!("V{i}"),
            cardinality,
            parents,
            cpt,
        });
    }
    BnSpec { variables }
}

/// A random compiled multilinear model.
pub fn random_multilinear_model(seed: u64) -> Model {
    let mut rng = SplitMix64::new(seed);
    compile_bn(&random_bn_spec(&mut rng, &RandomModelConfig::default()))
        .expect("random spec compiles")
}

/// A random single-full-CPT variation over one variable's columns (capped at
/// `max_blocks` of them). The varied member is never the block's largest, and
/// the new value stays under the order-preserving cap, so the variation is
/// admissible for all three named schemes.
pub fn random_variation(
    rng: &mut SplitMix64,
    model: &Model,
    max_blocks: usize,
) -> (VariationRequest, Vec<f64>) {
    let variable_count = model
        .block_variable
        .iter()
        .filter_map(|v| *v)
        .max()
        .map_or(0, |v| v + 1);
    let target = rng.next_below(variable_count.max(1));
    let mut blocks: Vec<usize> = model
        .block_variable
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == Some(target))
        .map(|(b, _)| b)
        .collect();
    while blocks.len() > max_blocks {
        let drop = rng.next_below(blocks.len());
        blocks.remove(drop);
    }

    let mut ids = Vec::new();
    let mut values = Vec::new();
    for &b in &blocks {
        let block = model.space.block(b);
        let order = block
            .ascending_order(model.space.base())
            .expect("base assignment is total");
        let r = order.len();
        let position = rng.next_below(r - 1);
        let varied = block.slots[order[position]];
        let cap = 1.0 / (1.0 + (r - 1 - position) as f64);
        ids.push(varied);
        values.push(rng.next_f64() * cap);
    }
    (VariationRequest::from_ids(&ids, model), values)
}
