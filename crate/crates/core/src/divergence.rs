//! Global dissimilarity between the original and the covaried distribution:
//! the Chan-Darwiche distance (log max ratio minus log min ratio over atoms,
//! with 0/0 read as 1) and the phi-divergence family (sum of p * phi(q/p) for
//! convex phi with phi(1) = 0). For multilinear models under single-full-CPT
//! variations both reduce to block-level quantities; for general monomial
//! parametrisations the CD distance comes from the block-restricted monomial
//! set of the interpolating polynomial.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::covariation::{covary, CovariationScheme};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::AtomId;
use crate::sensitivity::{covaried_assignment, VariationRequest};
use crate::space::IndetId;

/// 0/0 reads as 1; a positive numerator over zero is infinite.
fn ratio(q: f64, p: f64) -> f64 {
    if p == 0.0 {
        if q == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        q / p
    }
}

fn log_spread(max: f64, min: f64) -> f64 {
    if max == min {
        0.0
    } else {
        max.ln() - min.ln()
    }
}

/// An extremal ratio and where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub atom: Option<AtomId>,
    pub description: String,
    pub ratio: f64,
}

/// One varied block's part of a decomposed divergence: the block-level
/// divergence and the context mass multiplying it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockContribution {
    pub block: usize,
    pub divergence: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DivergenceResult {
    pub value: f64,
    pub witness_max: Option<Witness>,
    pub witness_min: Option<Witness>,
    pub per_block: Option<Vec<BlockContribution>>,
}

impl DivergenceResult {
    fn plain(value: f64) -> Self {
        Self {
            value,
            ..Self::default()
        }
    }
}

// ---------------------------------------------------------------------------
// phi functions
// ---------------------------------------------------------------------------

/// A convex function with phi(1) = 0 defining a phi-divergence
/// `sum_y p(y) phi(q(y)/p(y))`, with 0 phi(0/0) = 0 and
/// 0 phi(x/0) = x lim phi(u)/u.
#[derive(Clone)]
pub enum PhiFunction {
    /// phi(x) = -ln x: the divergence of the original from the varied
    /// distribution, KL(p || q).
    KlPq,
    /// phi(x) = x ln x: KL(q || p).
    KlQp,
    /// phi(x) = |x - 1| / 2: total variation, normalized into [0, 1].
    TotalVariation,
    /// phi(x) = (x - 1) ln x: the J divergence, KL(p||q) + KL(q||p).
    JDivergence,
    Custom {
        name: String,
        apply: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        /// lim_{u -> inf} phi(u)/u, the mass put on q where p vanishes.
        limit_slope: f64,
    },
}

impl std::fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PhiFunction({})", self.name())
    }
}

impl PhiFunction {
    pub fn name(&self) -> &str {
        match self {
            PhiFunction::KlPq => "kl_pq",
            PhiFunction::KlQp => "kl_qp",
            PhiFunction::TotalVariation => "tv",
            PhiFunction::JDivergence => "j",
            PhiFunction::Custom { name, .. } => name,
        }
    }

    pub fn presets() -> [PhiFunction; 4] {
        [
            PhiFunction::KlPq,
            PhiFunction::KlQp,
            PhiFunction::TotalVariation,
            PhiFunction::JDivergence,
        ]
    }

    pub fn apply(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match self {
            PhiFunction::KlPq => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    -x.ln()
                }
            }
            PhiFunction::KlQp => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            PhiFunction::TotalVariation => (x - 1.0).abs() / 2.0,
            PhiFunction::JDivergence => {
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    (x - 1.0) * x.ln()
                }
            }
            PhiFunction::Custom { apply, .. } => apply(x),
        }
    }

    pub fn limit_slope(&self) -> f64 {
        match self {
            PhiFunction::KlPq => 0.0,
            PhiFunction::KlQp => f64::INFINITY,
            PhiFunction::TotalVariation => 0.5,
            PhiFunction::JDivergence => f64::INFINITY,
            PhiFunction::Custom { limit_slope, .. } => *limit_slope,
        }
    }

    /// Midpoint convexity spot-check on a positive grid, plus phi(1) = 0.
    pub fn looks_convex(&self, points: usize) -> bool {
        if self.apply(1.0).abs() > 1e-9 {
            return false;
        }
        let grid: Vec<f64> = (1..=points)
            .map(|i| 4.0 * i as f64 / points as f64)
            .collect();
        for (i, &x) in grid.iter().enumerate() {
            for &y in &grid[i..] {
                let mid = self.apply((x + y) / 2.0);
                let avg = (self.apply(x) + self.apply(y)) / 2.0;
                if mid > avg + 1e-9 {
                    return false;
                }
            }
        }
        true
    }

    /// One summand p phi(q/p) with the zero-mass conventions applied.
    fn term(&self, p: f64, q: f64) -> f64 {
        if p > 0.0 {
            p * self.apply(q / p)
        } else if q == 0.0 {
            0.0
        } else {
            let slope = self.limit_slope();
            if slope == 0.0 {
                0.0
            } else {
                q * slope
            }
        }
    }
}

// ---------------------------------------------------------------------------
// atomic definitions
// ---------------------------------------------------------------------------

/// CD distance between two aligned atom-probability vectors:
/// `ln max_y q(y)/p(y) - ln min_y q(y)/p(y)`. Infinite as soon as one ratio
/// vanishes or blows up while another differs; ties pick the lowest atom id.
pub fn cd_atomic(p: &[f64], q: &[f64]) -> Result<DivergenceResult> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    if p.is_empty() {
        return Ok(DivergenceResult::plain(0.0));
    }
    let mut max = (f64::NEG_INFINITY, 0usize);
    let mut min = (f64::INFINITY, 0usize);
    for (atom, (&pv, &qv)) in p.iter().zip(q).enumerate() {
        let r = ratio(qv, pv);
        if r > max.0 {
            max = (r, atom);
        }
        if r < min.0 {
            min = (r, atom);
        }
    }
    Ok(DivergenceResult {
        value: log_spread(max.0, min.0),
        witness_max: Some(Witness {
            atom: Some(max.1),
            description: format!("atom {}", max.1),
            ratio: max.0,
        }),
        witness_min: Some(Witness {
            atom: Some(min.1),
            description: format!("atom {}", min.1),
            ratio: min.0,
        }),
        per_block: None,
    })
}

/// phi-divergence `sum_y p(y) phi(q(y)/p(y))` between aligned vectors.
pub fn phi_divergence(p: &[f64], q: &[f64], phi: &PhiFunction) -> Result<DivergenceResult> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let mut total = 0.0;
    for (&pv, &qv) in p.iter().zip(q) {
        total += phi.term(pv, qv);
    }
    Ok(DivergenceResult::plain(total))
}

/// Original and covaried atom distributions for a variation.
pub fn distributions(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let varied = covaried_assignment(model, req, values, scheme)?;
    Ok((
        model.atom_distribution(model.space.base())?,
        model.atom_distribution(&varied)?,
    ))
}

// ---------------------------------------------------------------------------
// multilinear block forms
// ---------------------------------------------------------------------------

fn member_ratios(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
) -> Result<Vec<(IndetId, f64)>> {
    if values.len() != req.entries.len() {
        return Err(Error::LengthMismatch(values.len(), req.entries.len()));
    }
    let base = model.space.base();
    let mut out = Vec::new();
    for (entry, &value) in req.entries.iter().zip(values) {
        for (id, new) in covary(&model.space, scheme, entry.varied, value, base)? {
            out.push((id, ratio(new, base.value(id)?)));
        }
    }
    Ok(out)
}

/// CD distance of a single-full-CPT variation in a multilinear model,
/// computed from the varied and covaried members alone: every touched atom's
/// ratio is a member ratio, and validity keeps the spread around one.
pub fn cd_block(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
) -> Result<DivergenceResult> {
    req.validate(model)?;
    if !model.poly.is_multilinear() {
        return Err(Error::NonMultilinear);
    }
    req.assert_no_co_occurrence(model)?;
    let ratios = member_ratios(model, req, values, scheme)?;
    let mut max = (f64::NEG_INFINITY, 0usize);
    let mut min = (f64::INFINITY, 0usize);
    for (i, &(_, r)) in ratios.iter().enumerate() {
        if r > max.0 {
            max = (r, i);
        }
        if r < min.0 {
            min = (r, i);
        }
    }
    let describe = |i: usize| {
        let (id, r) = ratios[i];
        Witness {
            atom: None,
            description: model.space.label(id).to_string(),
            ratio: r,
        }
    };
    Ok(DivergenceResult {
        value: log_spread(max.0, min.0),
        witness_max: Some(describe(max.1)),
        witness_min: Some(describe(min.1)),
        per_block: None,
    })
}

/// Closed-form CD distance under proportional covariation: per block only
/// the varied ratio and the residual ratio can be extremal.
pub fn cd_proportional_closed(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
) -> Result<DivergenceResult> {
    req.validate(model)?;
    if !model.poly.is_multilinear() {
        return Err(Error::NonMultilinear);
    }
    req.assert_no_co_occurrence(model)?;
    if values.len() != req.entries.len() {
        return Err(Error::LengthMismatch(values.len(), req.entries.len()));
    }
    let base = model.space.base();
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (entry, &new_value) in req.entries.iter().zip(values) {
        let old = base.value(entry.varied)?;
        let mult = model
            .space
            .block_of(entry.varied)
            .multiplicity(entry.varied) as f64;
        if old <= 0.0 || old * mult >= 1.0 {
            return Err(Error::UndefinedCovariation(format!(
                "`{}` must lie strictly inside its simplex",
                model.space.label(entry.varied)
            )));
        }
        let varied_ratio = new_value / old;
        let residual_ratio = (1.0 - mult * new_value) / (1.0 - mult * old);
        max = max.max(varied_ratio.max(residual_ratio));
        min = min.min(varied_ratio.min(residual_ratio));
    }
    Ok(DivergenceResult::plain(log_spread(max, min)))
}

/// Decomposed phi-divergence for a multilinear single-full-CPT variation:
/// `sum_j D_phi(block j) * K_j`, where `K_j` is the context mass of block j.
/// The context mass, computed per member as the sum of the member's atom
/// monomials with the member set to one, must agree across members.
pub fn phi_decomposition(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
    phi: &PhiFunction,
) -> Result<DivergenceResult> {
    req.validate(model)?;
    if !model.poly.is_multilinear() {
        return Err(Error::NonMultilinear);
    }
    req.assert_no_co_occurrence(model)?;
    if values.len() != req.entries.len() {
        return Err(Error::LengthMismatch(values.len(), req.entries.len()));
    }
    let base = model.space.base();
    let mut per_block = Vec::new();
    let mut total = 0.0;
    for (entry, &value) in req.entries.iter().zip(values) {
        let block = model.space.block_of(entry.varied);
        let updated = covary(&model.space, scheme, entry.varied, value, base)?;

        let mut divergence = 0.0;
        for &(id, new) in &updated {
            let mult = block.multiplicity(id) as f64;
            divergence += mult * phi.term(base.value(id)?, new);
        }

        let mut constant: Option<f64> = None;
        for &(id, _) in &updated {
            let mult = block.multiplicity(id) as f64;
            let mut mass = 0.0;
            for term in &model.poly.terms {
                if term.monomial.exponent(id) > 0 {
                    mass += term.monomial.eval_with_override(base, id, 1.0)?;
                }
            }
            let candidate = mass / mult;
            match constant {
                None => constant = Some(candidate),
                Some(k) if (k - candidate).abs() <= 1e-9 * k.abs().max(1.0) => {}
                Some(k) => return Err(Error::DecompositionUndefined(k, candidate)),
            }
        }
        let constant = constant.expect("block has members");
        total += divergence * constant;
        per_block.push(BlockContribution {
            block: block.id,
            divergence,
            constant,
        });
    }
    Ok(DivergenceResult {
        value: total,
        witness_max: None,
        witness_min: None,
        per_block: Some(per_block),
    })
}

// ---------------------------------------------------------------------------
// general (non-multilinear) one-way forms
// ---------------------------------------------------------------------------

/// The block-restricted monomial set of the interpolating polynomial for the
/// block owning `varied`: drop terms free of the block, set every other
/// indeterminate to one, keep the distinct remaining monomials.
pub fn block_monomial_set(model: &Model, varied: IndetId) -> Result<Vec<Vec<(IndetId, u32)>>> {
    if varied >= model.space.len() {
        return Err(Error::MissingIndeterminate(model.space.len(), varied));
    }
    let block = model.space.block_of(varied);
    let mut set: BTreeSet<Vec<(IndetId, u32)>> = BTreeSet::new();
    for term in &model.poly.terms {
        let restricted = term.monomial.restrict_to_block(block);
        if !restricted.is_empty() {
            set.insert(restricted);
        }
    }
    Ok(set.into_iter().collect())
}

fn render_block_monomial(model: &Model, monomial: &[(IndetId, u32)]) -> String {
    monomial
        .iter()
        .map(|&(id, e)| {
            if e == 1 {
                model.space.label(id).to_string()
            } else {
                format!("{}^{}", model.space.label(id), e)
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// One-way CD distance for any monomial parametrisation: extremal ratios of
/// the block-restricted monomial set under the covaried block values.
pub fn cd_general(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
) -> Result<DivergenceResult> {
    req.validate(model)?;
    if req.entries.len() != 1 {
        return Err(Error::BadRequest(
            "the general CD procedure is one-way: exactly one varied block".to_string(),
        ));
    }
    if values.len() != 1 {
        return Err(Error::LengthMismatch(values.len(), 1));
    }
    let entry = &req.entries[0];
    let base = model.space.base();
    let updated = covary(&model.space, scheme, entry.varied, values[0], base)?;
    let new_value = |id: IndetId| -> f64 {
        updated
            .iter()
            .find(|&&(i, _)| i == id)
            .map(|&(_, v)| v)
            .expect("member of the varied block")
    };

    let monomials = block_monomial_set(model, entry.varied)?;
    let mut max: (f64, Option<usize>) = (f64::NEG_INFINITY, None);
    let mut min: (f64, Option<usize>) = (f64::INFINITY, None);
    for (idx, monomial) in monomials.iter().enumerate() {
        let mut old_val = 1.0;
        let mut new_val = 1.0;
        for &(id, e) in monomial {
            old_val *= base.value(id)?.powi(e as i32);
            new_val *= new_value(id).powi(e as i32);
        }
        let r = ratio(new_val, old_val);
        if r > max.0 {
            max = (r, Some(idx));
        }
        if r < min.0 {
            min = (r, Some(idx));
        }
    }
    let witness = |(r, idx): (f64, Option<usize>)| {
        idx.map(|i| Witness {
            atom: None,
            description: render_block_monomial(model, &monomials[i]),
            ratio: r,
        })
    };
    let value = if monomials.is_empty() {
        0.0
    } else {
        log_spread(max.0, min.0)
    };
    Ok(DivergenceResult {
        value,
        witness_max: witness(max),
        witness_min: witness(min),
        per_block: None,
    })
}

/// Closed form of [`cd_general`] under proportional covariation: the ratio of
/// a monomial with varied exponent `a` and covaried total degree `d` is
/// `(new/old)^a * ((1 - m new)/(1 - m old))^d`.
pub fn cd_general_proportional_closed(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
) -> Result<DivergenceResult> {
    req.validate(model)?;
    if req.entries.len() != 1 {
        return Err(Error::BadRequest(
            "the general CD procedure is one-way: exactly one varied block".to_string(),
        ));
    }
    if values.len() != 1 {
        return Err(Error::LengthMismatch(values.len(), 1));
    }
    let entry = &req.entries[0];
    let base = model.space.base();
    let old = base.value(entry.varied)?;
    let mult = model
        .space
        .block_of(entry.varied)
        .multiplicity(entry.varied) as f64;
    if old <= 0.0 || old * mult >= 1.0 {
        return Err(Error::UndefinedCovariation(format!(
            "`{}` must lie strictly inside its simplex",
            model.space.label(entry.varied)
        )));
    }
    let varied_ratio = values[0] / old;
    let residual_ratio = (1.0 - mult * values[0]) / (1.0 - mult * old);

    let monomials = block_monomial_set(model, entry.varied)?;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for monomial in &monomials {
        let varied_exp: u32 = monomial
            .iter()
            .filter(|&&(id, _)| id == entry.varied)
            .map(|&(_, e)| e)
            .sum();
        let covaried_exp: u32 = monomial.iter().map(|&(_, e)| e).sum::<u32>() - varied_exp;
        let r = varied_ratio.powi(varied_exp as i32) * residual_ratio.powi(covaried_exp as i32);
        max = max.max(r);
        min = min.min(r);
    }
    let value = if monomials.is_empty() {
        0.0
    } else {
        log_spread(max, min)
    };
    Ok(DivergenceResult::plain(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile_bn;
    use crate::fixtures::{screening_bn, screening_csbn, ternary_monomial_model};
    use crate::sensitivity::VariationRequest;

    fn single_block_model(values: &[f64]) -> Model {
        let labels: Vec<String> = (0..values.len()).map(|j| format!("p{j}")).collect();
        let monomials: Vec<Vec<u32>> = (0..values.len())
            .map(|j| {
                (0..values.len())
                    .map(|k| if j == k { 1 } else { 0 })
                    .collect()
            })
            .collect();
        crate::compile::compile_monomial_model(&labels, values, &monomials).unwrap()
    }

    #[test]
    fn cd_atomic_of_identical_vectors_is_exactly_zero() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(cd_atomic(&p, &p).unwrap().value, 0.0);
    }

    #[test]
    fn cd_atomic_matches_the_hand_computation() {
        let r = cd_atomic(&[0.5, 0.5], &[0.6, 0.4]).unwrap();
        assert!((r.value - 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(r.witness_max.unwrap().atom, Some(0));
        assert_eq!(r.witness_min.unwrap().atom, Some(1));
    }

    #[test]
    fn cd_atomic_blows_up_on_new_zeros() {
        let r = cd_atomic(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn cd_atomic_breaks_ties_at_the_lowest_atom() {
        let r = cd_atomic(&[0.25, 0.25, 0.25, 0.25], &[0.3, 0.3, 0.2, 0.2]).unwrap();
        assert_eq!(r.witness_max.unwrap().atom, Some(0));
        assert_eq!(r.witness_min.unwrap().atom, Some(2));
    }

    #[test]
    fn phi_presets_at_the_spot_values() {
        let p = [0.5, 0.5];
        let q = [0.6, 0.4];
        let tv = phi_divergence(&p, &q, &PhiFunction::TotalVariation).unwrap();
        assert!((tv.value - 0.1).abs() < 1e-12);
        let kl = phi_divergence(&p, &q, &PhiFunction::KlPq).unwrap();
        let expected = 0.5 * (0.5f64 / 0.6).ln() + 0.5 * (0.5f64 / 0.4).ln();
        assert!((kl.value - expected).abs() < 1e-12);
        for phi in PhiFunction::presets() {
            assert_eq!(phi_divergence(&p, &p, &phi).unwrap().value, 0.0);
        }
    }

    #[test]
    fn j_divergence_is_the_sum_of_both_kls() {
        let p = [0.2, 0.3, 0.5];
        let q = [0.4, 0.35, 0.25];
        let j = phi_divergence(&p, &q, &PhiFunction::JDivergence)
            .unwrap()
            .value;
        let pq = phi_divergence(&p, &q, &PhiFunction::KlPq).unwrap().value;
        let qp = phi_divergence(&p, &q, &PhiFunction::KlQp).unwrap().value;
        assert!((j - (pq + qp)).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_conventions() {
        // p = 0, q > 0 contributes q * lim phi(u)/u
        let p = [0.0, 1.0];
        let q = [0.3, 0.7];
        assert_eq!(
            phi_divergence(&p, &q, &PhiFunction::KlQp).unwrap().value,
            f64::INFINITY
        );
        let tv = phi_divergence(&p, &q, &PhiFunction::TotalVariation)
            .unwrap()
            .value;
        assert!((tv - 0.3).abs() < 1e-12);
        // KL(p||q) ignores atoms with p = 0
        let kl = phi_divergence(&p, &q, &PhiFunction::KlPq).unwrap().value;
        assert!((kl - 1.0 * (1.0f64 / 0.7).ln()).abs() < 1e-12);
    }

    #[test]
    fn presets_pass_the_convexity_spot_check_and_a_concave_custom_fails() {
        for phi in PhiFunction::presets() {
            assert!(phi.looks_convex(40), "{}", phi.name());
        }
        let bad = PhiFunction::Custom {
            name: "sqrt-gap".to_string(),
            apply: Arc::new(|x: f64| x.sqrt() - 1.0),
            limit_slope: 0.0,
        };
        assert!(!bad.looks_convex(40));
    }

    #[test]
    fn cd_block_single_block_example() {
        let model = single_block_model(&[0.5, 0.3, 0.2]);
        let req = VariationRequest::single(0, "x");
        let r = cd_block(&model, &req, &[0.6], &CovariationScheme::Proportional).unwrap();
        assert!((r.value - 1.5f64.ln()).abs() < 1e-12);
        let closed = cd_proportional_closed(&model, &req, &[0.6]).unwrap();
        assert!((closed.value - r.value).abs() < 1e-15);
    }

    #[test]
    fn identity_variation_gives_exactly_zero_everywhere() {
        let model = screening_csbn();
        let varied = model.space.by_label("theta_Y2_1|Y1_1").unwrap();
        let req = VariationRequest::single(varied, "x");
        let r = cd_block(&model, &req, &[0.5], &CovariationScheme::Proportional).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(
            cd_proportional_closed(&model, &req, &[0.5]).unwrap().value,
            0.0
        );
        assert_eq!(
            cd_general(&model, &req, &[0.5], &CovariationScheme::Proportional)
                .unwrap()
                .value,
            0.0
        );
        // order-preserving needs a non-maximal member
        let middle = model.space.by_label("theta_Y2_2|Y1_1").unwrap();
        let req = VariationRequest::single(middle, "x");
        let r = cd_block(&model, &req, &[0.3], &CovariationScheme::OrderPreserving).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn two_block_closed_form_spreads_across_blocks() {
        // block (0.8, 0.2) varied 0.8 -> 0.4 gives ratios {0.5, 3.0};
        // block (0.1, 0.9) varied 0.9 -> 0.99 gives ratios {1.1, 0.1};
        // the distance is the overall spread ln(3.0) - ln(0.1).
        let model = compile_bn(&screening_bn()).unwrap();
        let a = model.space.by_label("theta_Y3_0|Y1_0,Y2_0").unwrap();
        let b = model.space.by_label("theta_Y3_1|Y1_0,Y2_2").unwrap();
        let req = VariationRequest::from_ids(&[a, b], &model);
        let r = cd_block(&model, &req, &[0.4, 0.99], &CovariationScheme::Proportional).unwrap();
        let expected = (3.0f64).ln() - (0.1f64).ln();
        assert!((r.value - expected).abs() < 1e-12);
        let closed = cd_proportional_closed(&model, &req, &[0.4, 0.99]).unwrap();
        assert!((closed.value - r.value).abs() < 1e-12);
    }

    #[test]
    fn decomposition_constant_of_a_root_block_is_one() {
        let model = compile_bn(&screening_bn()).unwrap();
        let varied = model.space.by_label("theta_Y1_1").unwrap();
        let req = VariationRequest::single(varied, "x");
        let r = phi_decomposition(
            &model,
            &req,
            &[0.7],
            &CovariationScheme::Proportional,
            &PhiFunction::KlQp,
        )
        .unwrap();
        let blocks = r.per_block.unwrap();
        assert_eq!(blocks.len(), 1);
        assert!((blocks[0].constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition_at_the_identity_is_zero_blockwise() {
        let model = screening_csbn();
        let varied = model.space.by_label("theta_Y2_1|Y1_1").unwrap();
        let req = VariationRequest::single(varied, "x");
        let r = phi_decomposition(
            &model,
            &req,
            &[0.5],
            &CovariationScheme::Proportional,
            &PhiFunction::TotalVariation,
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.per_block.unwrap().iter().all(|b| b.divergence == 0.0));
    }

    #[test]
    fn general_closed_form_reduces_to_the_block_closed_form_when_multilinear() {
        let model = screening_csbn();
        let varied = model.space.by_label("theta_Y2_1|Y1_1").unwrap();
        let req = VariationRequest::single(varied, "x");
        for &x in &[0.2, 0.65, 0.9] {
            let general = cd_general_proportional_closed(&model, &req, &[x])
                .unwrap()
                .value;
            let block = cd_proportional_closed(&model, &req, &[x]).unwrap().value;
            assert!((general - block).abs() < 1e-15, "x={x}");
        }
    }

    #[test]
    fn decomposition_matches_the_atomic_divergence() {
        let model = screening_csbn();
        let varied = model.space.by_label("theta_Y2_1|Y1_1").unwrap();
        let req = VariationRequest::single(varied, "x");
        let scheme = CovariationScheme::Proportional;
        let (p, q) = distributions(&model, &req, &[0.7], &scheme).unwrap();
        for phi in PhiFunction::presets() {
            let direct = phi_divergence(&p, &q, &phi).unwrap().value;
            let decomposed = phi_decomposition(&model, &req, &[0.7], &scheme, &phi)
                .unwrap()
                .value;
            assert!(
                (direct - decomposed).abs() < 1e-10,
                "{}: {direct} vs {decomposed}",
                phi.name()
            );
        }
    }

    #[test]
    fn general_cd_agrees_with_the_block_form_on_multilinear_models() {
        let model = screening_csbn();
        let varied = model.space.by_label("theta_Y2_1|Y1_1").unwrap();
        let req = VariationRequest::single(varied, "x");
        for scheme in [CovariationScheme::Proportional, CovariationScheme::Uniform] {
            let block = cd_block(&model, &req, &[0.75], &scheme).unwrap().value;
            let general = cd_general(&model, &req, &[0.75], &scheme).unwrap().value;
            assert!((block - general).abs() < 1e-12, "{scheme:?}");
        }
    }

    #[test]
    fn general_closed_form_agrees_with_the_procedure() {
        let model = ternary_monomial_model();
        let req = VariationRequest::single(0, "x");
        for &x in &[0.2, 0.4, 0.11, 0.6] {
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
    fn monomial_block_set_of_the_ternary_model() {
        let model = ternary_monomial_model();
        let set = block_monomial_set(&model, 0).unwrap();
        assert_eq!(set.len(), 6);
        assert!(set.contains(&vec![(0usize, 2u32)]));
        assert!(set.contains(&vec![(0, 1), (2, 1)]));
    }
}
