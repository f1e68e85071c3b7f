//! Sensitivity functions: the probability of a target event as a symbolic
//! (piecewise) polynomial in the varied parameters, once the rest of each
//! block is covaried by a scheme. For multilinear models under a linear
//! scheme the function collapses to an affine form whose coefficients come
//! straight from exponent-set sums; the symbolic substitution route works for
//! any monomial parametrisation and any per-segment-linear scheme.

use std::collections::{BTreeMap, HashMap};

use crate::covariation::{covary, linear_coefficients, CovariationScheme, PiecewiseLinear};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::EventSet;
use crate::space::{Assignment, IndetId};

/// One varied parameter: the member that moves freely and the symbol its new
/// value is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationEntry {
    pub varied: IndetId,
    pub symbol: String,
}

/// A single-full-CPT variation: one freely varied member in each of several
/// pairwise-distinct blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VariationRequest {
    pub entries: Vec<VariationEntry>,
}

impl VariationRequest {
    pub fn single(varied: IndetId, symbol: impl Into<String>) -> Self {
        Self {
            entries: vec![VariationEntry {
                varied,
                symbol: symbol.into(),
            }],
        }
    }

    pub fn from_ids(ids: &[IndetId], model: &Model) -> Self {
        Self {
            entries: ids
                .iter()
                .map(|&varied| VariationEntry {
                    varied,
                    symbol: model.space.label(varied).to_string(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn validate(&self, model: &Model) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::BadRequest("no varied parameters".to_string()));
        }
        let mut blocks = Vec::new();
        for entry in &self.entries {
            if entry.varied >= model.space.len() {
                return Err(Error::MissingIndeterminate(model.space.len(), entry.varied));
            }
            let block = model.space.indeterminate(entry.varied).block;
            if blocks.contains(&block) {
                return Err(Error::BadRequest(format!(
                    "two varied parameters share block {block}"
                )));
            }
            blocks.push(block);
        }
        Ok(())
    }

    /// Single-full-CPT analyses assume varied blocks never meet inside one
    /// monomial; the closed forms for coefficients, CD distance and the
    /// divergence decomposition all lean on this.
    pub fn assert_no_co_occurrence(&self, model: &Model) -> Result<()> {
        let blocks: Vec<usize> = self
            .entries
            .iter()
            .map(|e| model.space.indeterminate(e.varied).block)
            .collect();
        for term in &model.poly.terms {
            let mut hit = 0usize;
            for (id, _) in term.monomial.iter() {
                if blocks.contains(&model.space.indeterminate(id).block) {
                    hit += 1;
                    if hit > 1 {
                        return Err(Error::CoOccurringBlocks(term.atom));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sparse multivariate polynomial with real coefficients over the varied
/// symbols; exponent vectors are dense over the request's entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiPoly {
    pub vars: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut poly = Self::zero(vars);
        if c != 0.0 {
            poly.terms.insert(vec![0; vars], c);
        }
        poly
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coeff: f64) {
        debug_assert_eq!(exps.len(), self.vars);
        *self.terms.entry(exps).or_insert(0.0) += coeff;
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (exps, &c) in &other.terms {
            self.add_term(exps.clone(), c);
        }
    }

    /// Multiplies by `(gamma * x_var + delta)^e`, expanded binomially.
    pub fn mul_affine_power(&self, var: usize, gamma: f64, delta: f64, e: u32) -> Self {
        let mut out = Self::zero(self.vars);
        // binomial coefficients C(e, k)
        let mut binom = 1.0;
        for k in 0..=e {
            if k > 0 {
                binom *= (e - k + 1) as f64 / k as f64;
            }
            let factor = binom * gamma.powi(k as i32) * delta.powi((e - k) as i32);
            if factor == 0.0 {
                continue;
            }
            for (exps, &c) in &self.terms {
                let mut ne = exps.clone();
                ne[var] += k;
                *out.terms.entry(ne).or_insert(0.0) += c * factor;
            }
        }
        out
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut total = 0.0;
        for (exps, &c) in &self.terms {
            let mut term = c;
            for (v, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term *= point[v].powi(e as i32);
                }
            }
            total += term;
        }
        total
    }

    /// Largest exponent of `var` among terms with |coeff| above `tol`.
    pub fn degree_of(&self, var: usize, tol: f64) -> u32 {
        self.terms
            .iter()
            .filter(|(_, &c)| c.abs() > tol)
            .map(|(exps, _)| exps[var])
            .max()
            .unwrap_or(0)
    }
}

/// One piece of a piecewise polynomial: an axis-aligned box of admissible
/// variation values and the polynomial valid there.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySegment {
    pub bounds: Vec<(f64, f64)>,
    pub poly: MultiPoly,
}

/// A sensitivity function: per-variable segment boxes (schemes act blockwise,
/// so segments form a cross product) each carrying a polynomial in the varied
/// symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    pub symbols: Vec<String>,
    pub segments: Vec<PolySegment>,
}

impl PiecewisePolynomial {
    /// The admissible box: envelope of all segment boxes.
    pub fn admissible_box(&self) -> Vec<(f64, f64)> {
        let n = self.symbols.len();
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
        for segment in &self.segments {
            for (v, &(lo, hi)) in segment.bounds.iter().enumerate() {
                bounds[v].0 = bounds[v].0.min(lo);
                bounds[v].1 = bounds[v].1.max(hi);
            }
        }
        bounds
    }

    pub fn segment_index(&self, point: &[f64]) -> Option<usize> {
        self.segments.iter().position(|s| {
            s.bounds
                .iter()
                .zip(point)
                .all(|(&(lo, hi), &x)| x >= lo - 1e-12 && x <= hi + 1e-12)
        })
    }

    /// Evaluates at an admissible point; outside the box is an error, not an
    /// extrapolation.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.symbols.len() {
            return Err(Error::LengthMismatch(point.len(), self.symbols.len()));
        }
        match self.segment_index(point) {
            Some(idx) => Ok(self.segments[idx].poly.eval(point)),
            None => Err(Error::OutsideAdmissibleBox(point.to_vec())),
        }
    }

    /// Largest per-variable degree over segments.
    pub fn degree_of(&self, var: usize, tol: f64) -> u32 {
        self.segments
            .iter()
            .map(|s| s.poly.degree_of(var, tol))
            .max()
            .unwrap_or(0)
    }
}

/// A posterior sensitivity function: the ratio of the joint target-and-
/// observation polynomial to the observation polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSensitivity {
    pub numerator: PiecewisePolynomial,
    pub denominator: PiecewisePolynomial,
}

impl RationalSensitivity {
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.numerator.eval(point)? / self.denominator.eval(point)?)
    }
}

fn scheme_rules(
    model: &Model,
    req: &VariationRequest,
    scheme: &CovariationScheme,
) -> Result<Vec<PiecewiseLinear>> {
    req.entries
        .iter()
        .map(|entry| linear_coefficients(&model.space, scheme, entry.varied, model.space.base()))
        .collect()
}

/// The symbolic substitution route: in every event monomial, replace each
/// varied member by its symbol and every covaried member by its per-segment
/// affine rule, then expand and collect. Works for any monomial
/// parametrisation; on multilinear models under a linear scheme the result is
/// the affine form of [`linear_form`].
pub fn sensitivity_function(
    model: &Model,
    event: &EventSet,
    req: &VariationRequest,
    scheme: &CovariationScheme,
) -> Result<PiecewisePolynomial> {
    req.validate(model)?;
    let rules = scheme_rules(model, req, scheme)?;
    let restricted = model.poly.restrict(event)?;
    let n = req.entries.len();
    let base = model.space.base();

    let segment_counts: Vec<usize> = rules.iter().map(|r| r.segments.len()).collect();
    let mut segments = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        // affine rule per indeterminate for this segment combination
        let mut affine: HashMap<IndetId, (usize, f64, f64)> = HashMap::new();
        let mut bounds = Vec::with_capacity(n);
        for (v, rule) in rules.iter().enumerate() {
            let segment = &rule.segments[choice[v]];
            bounds.push((segment.lo, segment.hi));
            for (j, &member) in rule.members.iter().enumerate() {
                let (gamma, delta) = segment.member_coeffs[j];
                affine.insert(member, (v, gamma, delta));
            }
        }

        let mut total = MultiPoly::zero(n);
        for term in &restricted.terms {
            let mut constant = 1.0;
            let mut symbolic: Vec<(usize, f64, f64, u32)> = Vec::new();
            for (id, e) in term.monomial.iter() {
                match affine.get(&id) {
                    Some(&(v, gamma, delta)) => symbolic.push((v, gamma, delta, e)),
                    None => constant *= base.value(id)?.powi(e as i32),
                }
            }
            let mut poly = MultiPoly::constant(n, constant);
            for (v, gamma, delta, e) in symbolic {
                poly = poly.mul_affine_power(v, gamma, delta, e);
            }
            total.add_assign(&poly);
        }
        segments.push(PolySegment {
            bounds,
            poly: total,
        });

        // next segment combination
        let mut v = 0;
        loop {
            if v == n {
                let symbols = req.entries.iter().map(|e| e.symbol.clone()).collect();
                return Ok(PiecewisePolynomial { symbols, segments });
            }
            choice[v] += 1;
            if choice[v] < segment_counts[v] {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

/// The affine form of a multilinear sensitivity function under a (piecewise)
/// linear scheme, `f = sum_j a_j x_j + b` per segment box. Coefficients are
/// computed from exponent-set sums over the event, an independent route from
/// the symbolic expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub symbols: Vec<String>,
    pub segments: Vec<LinearFormSegment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormSegment {
    pub bounds: Vec<(f64, f64)>,
    pub slopes: Vec<f64>,
    pub intercept: f64,
}

impl LinearForm {
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let segment = self
            .segments
            .iter()
            .find(|s| {
                s.bounds
                    .iter()
                    .zip(point)
                    .all(|(&(lo, hi), &x)| x >= lo - 1e-12 && x <= hi + 1e-12)
            })
            .ok_or_else(|| Error::OutsideAdmissibleBox(point.to_vec()))?;
        Ok(segment
            .slopes
            .iter()
            .zip(point)
            .map(|(a, x)| a * x)
            .sum::<f64>()
            + segment.intercept)
    }
}

pub fn linear_form(
    model: &Model,
    event: &EventSet,
    req: &VariationRequest,
    scheme: &CovariationScheme,
) -> Result<LinearForm> {
    req.validate(model)?;
    if !model.poly.is_multilinear() {
        return Err(Error::NonMultilinear);
    }
    req.assert_no_co_occurrence(model)?;
    let rules = scheme_rules(model, req, scheme)?;
    let restricted = model.poly.restrict(event)?;
    let n = req.entries.len();
    let base = model.space.base();

    // entry index and affine rule per member of a varied block
    let mut member_entry: HashMap<IndetId, usize> = HashMap::new();
    for (v, rule) in rules.iter().enumerate() {
        for &member in &rule.members {
            member_entry.insert(member, v);
        }
    }

    let segment_counts: Vec<usize> = rules.iter().map(|r| r.segments.len()).collect();
    let mut segments = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        let mut bounds = Vec::with_capacity(n);
        let mut coeff_of: HashMap<IndetId, (usize, f64, f64)> = HashMap::new();
        for (v, rule) in rules.iter().enumerate() {
            let segment = &rule.segments[choice[v]];
            bounds.push((segment.lo, segment.hi));
            for (j, &member) in rule.members.iter().enumerate() {
                let (gamma, delta) = segment.member_coeffs[j];
                coeff_of.insert(member, (v, gamma, delta));
            }
        }

        let mut slopes = vec![0.0; n];
        let mut intercept = 0.0;
        for term in &restricted.terms {
            let touched = term
                .monomial
                .iter()
                .find(|(id, _)| member_entry.contains_key(id));
            match touched {
                None => intercept += term.monomial.eval(base)?,
                Some((member, _)) => {
                    let context = term.monomial.eval_with_override(base, member, 1.0)?;
                    let (v, gamma, delta) = coeff_of[&member];
                    slopes[v] += gamma * context;
                    intercept += delta * context;
                }
            }
        }
        segments.push(LinearFormSegment {
            bounds,
            slopes,
            intercept,
        });

        let mut v = 0;
        loop {
            if v == n {
                let symbols = req.entries.iter().map(|e| e.symbol.clone()).collect();
                return Ok(LinearForm { symbols, segments });
            }
            choice[v] += 1;
            if choice[v] < segment_counts[v] {
                break;
            }
            choice[v] = 0;
            v += 1;
        }
    }
}

/// Posterior sensitivity: numerator for the joint target-and-observation
/// event, denominator for the observation.
pub fn posterior_sensitivity(
    model: &Model,
    target: &EventSet,
    observed: &EventSet,
    req: &VariationRequest,
    scheme: &CovariationScheme,
) -> Result<RationalSensitivity> {
    let p_observed = model
        .poly
        .restrict(observed)?
        .evaluate(model.space.base())?;
    if p_observed <= 0.0 {
        return Err(Error::ZeroProbabilityObserved(p_observed));
    }
    let joint = target.intersection(observed);
    Ok(RationalSensitivity {
        numerator: sensitivity_function(model, &joint, req, scheme)?,
        denominator: sensitivity_function(model, observed, req, scheme)?,
    })
}

/// The numeric counterpart of the symbolic route: covaries every requested
/// block at the given values and returns the full varied assignment. The
/// sensitivity function evaluated at a point must match re-evaluating the
/// restricted polynomial under this assignment.
pub fn covaried_assignment(
    model: &Model,
    req: &VariationRequest,
    values: &[f64],
    scheme: &CovariationScheme,
) -> Result<Assignment> {
    if values.len() != req.entries.len() {
        return Err(Error::LengthMismatch(values.len(), req.entries.len()));
    }
    let mut updates = Vec::new();
    for (entry, &value) in req.entries.iter().zip(values) {
        updates.extend(covary(
            &model.space,
            scheme,
            entry.varied,
            value,
            model.space.base(),
        )?);
    }
    Ok(model.space.base().with(&updates))
}
