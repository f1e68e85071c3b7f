//! Covariation schemes: when one parameter of a sum-to-one block is varied,
//! the rest must move to keep the block a distribution. Implements the
//! proportional, uniform and order-preserving rules plus user-supplied linear
//! rules, their piecewise-linear coefficient form, and a sampling-based
//! checker for the five scheme properties (valid, impossibility preserving,
//! order preserving, identity preserving, linear).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::space::{Assignment, IndetId, ParameterSpace};

const TOL: f64 = 1e-9;

/// User-supplied linear rule `theta_j -> gamma_j * x + delta_j` per covaried
/// member, keyed by indeterminate label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CustomLinear {
    pub coefficients: HashMap<String, (f64, f64)>,
}

impl CustomLinear {
    /// Coefficients are restricted to gamma in [-1, 1] and delta in (-1, 1).
    /// Negative slopes are what valid schemes need: the named schemes all
    /// shrink the covarying members as the varied one grows.
    pub fn new(coefficients: HashMap<String, (f64, f64)>) -> Result<Self> {
        for (label, &(gamma, delta)) in &coefficients {
            if !(-1.0..=1.0).contains(&gamma) {
                return Err(Error::InvalidSpec(format!(
                    "gamma for `{label}` is {gamma}, outside [-1, 1]"
                )));
            }
            if delta <= -1.0 || delta >= 1.0 {
                return Err(Error::InvalidSpec(format!(
                    "delta for `{label}` is {delta}, outside (-1, 1)"
                )));
            }
        }
        Ok(Self { coefficients })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovariationScheme {
    /// Covarying parameters keep their share of the residual mass.
    Proportional,
    /// The residual mass is split evenly over the covarying slots.
    Uniform,
    /// Keeps the ascending order of the block; piecewise linear with a
    /// breakpoint at the original value and varied values capped at
    /// 1/(1 + r - i).
    OrderPreserving,
    CustomLinear(CustomLinear),
}

impl CovariationScheme {
    pub fn name(&self) -> &'static str {
        match self {
            CovariationScheme::Proportional => "proportional",
            CovariationScheme::Uniform => "uniform",
            CovariationScheme::OrderPreserving => "order-preserving",
            CovariationScheme::CustomLinear(_) => "linear",
        }
    }
}

/// Member-level view of a block: distinct values with slot multiplicities.
/// Multiplicities above one arise from partial-independence merges, where
/// one indeterminate fills several slots of the same column.
#[derive(Debug, Clone)]
struct MemberBlock {
    values: Vec<f64>,
    mults: Vec<usize>,
    varied: usize,
}

impl MemberBlock {
    fn slot_count(&self) -> usize {
        self.mults.iter().sum()
    }

    fn varied_mult(&self) -> usize {
        self.mults[self.varied]
    }

    fn residual(&self, varied_value: f64) -> f64 {
        1.0 - self.varied_mult() as f64 * varied_value
    }
}

/// One linear piece of a covariation rule: on `[lo, hi]` member `j` moves as
/// `gamma_j * x + delta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSegment {
    pub lo: f64,
    pub hi: f64,
    /// Aligned with the block's distinct members; the varied member carries
    /// (1, 0).
    pub member_coeffs: Vec<(f64, f64)>,
}

/// Piecewise-linear form of a covariation rule for one block and one varied
/// member.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub members: Vec<IndetId>,
    pub varied_index: usize,
    pub segments: Vec<LinearSegment>,
}

impl PiecewiseLinear {
    pub fn admissible(&self) -> (f64, f64) {
        (
            self.segments.first().map_or(0.0, |s| s.lo),
            self.segments.last().map_or(1.0, |s| s.hi),
        )
    }

    pub fn segment_for(&self, x: f64) -> Option<&LinearSegment> {
        self.segments
            .iter()
            .find(|s| x >= s.lo - 1e-12 && x <= s.hi + 1e-12)
    }

    /// Member values at `x`.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let segment = self
            .segment_for(x)
            .ok_or_else(|| Error::OutsideAdmissibleBox(vec![x]))?;
        Ok(segment
            .member_coeffs
            .iter()
            .map(|&(g, d)| g * x + d)
            .collect())
    }
}

fn member_block(
    space: &ParameterSpace,
    varied: IndetId,
    a: &Assignment,
) -> Result<(Vec<IndetId>, MemberBlock)> {
    let block = space.block_of(varied);
    let members = block.members();
    let varied_index = members
        .iter()
        .position(|&id| id == varied)
        .expect("varied indeterminate is in its own block");
    let mut sum = 0.0;
    let mut values = Vec::with_capacity(members.len());
    let mut mults = Vec::with_capacity(members.len());
    for &id in &members {
        let v = a.value(id)?;
        let m = block.multiplicity(id);
        sum += v * m as f64;
        values.push(v);
        mults.push(m);
    }
    if (sum - 1.0).abs() > TOL {
        return Err(Error::BlockNotNormalized {
            block: block.id,
            sum,
        });
    }
    Ok((
        members,
        MemberBlock {
            values,
            mults,
            varied: varied_index,
        },
    ))
}

fn check_new_value(mb: &MemberBlock, new_value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&new_value) {
        return Err(Error::InvalidVariation(format!(
            "new value {new_value} outside [0, 1]"
        )));
    }
    if mb.residual(new_value) < -TOL {
        return Err(Error::InvalidVariation(format!(
            "new value {new_value} exceeds 1/{} available to a member filling {} slots",
            mb.varied_mult(),
            mb.varied_mult()
        )));
    }
    Ok(())
}

/// Applies `scheme` to the block owning `varied`, returning the full list of
/// `(member, updated value)` pairs. For the three domain-independent schemes
/// the output slots sum to one and stay in [0, 1] whenever the variation is
/// admissible.
pub fn covary(
    space: &ParameterSpace,
    scheme: &CovariationScheme,
    varied: IndetId,
    new_value: f64,
    a: &Assignment,
) -> Result<Vec<(IndetId, f64)>> {
    let (members, mb) = member_block(space, varied, a)?;
    check_new_value(&mb, new_value)?;
    let updated = match scheme {
        CovariationScheme::Proportional => covary_proportional(&mb, new_value)?,
        CovariationScheme::Uniform => covary_uniform(&mb, new_value)?,
        CovariationScheme::OrderPreserving => covary_order_preserving(&mb, new_value)?,
        CovariationScheme::CustomLinear(custom) => {
            covary_custom(space, &members, &mb, new_value, custom)?
        }
    };
    Ok(members.into_iter().zip(updated).collect())
}

fn covary_proportional(mb: &MemberBlock, new_value: f64) -> Result<Vec<f64>> {
    let r_old = mb.residual(mb.values[mb.varied]);
    if r_old <= 0.0 {
        return Err(Error::UndefinedCovariation(format!(
            "varied member already holds the whole block mass ({})",
            mb.values[mb.varied]
        )));
    }
    let factor = mb.residual(new_value).max(0.0) / r_old;
    Ok(mb
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            if j == mb.varied {
                new_value
            } else {
                v * factor
            }
        })
        .collect())
}

fn covary_uniform(mb: &MemberBlock, new_value: f64) -> Result<Vec<f64>> {
    let free_slots = mb.slot_count() - mb.varied_mult();
    if free_slots == 0 {
        return Err(Error::UnsupportedCovariation(
            "no covarying members in the block".to_string(),
        ));
    }
    let share = mb.residual(new_value).max(0.0) / free_slots as f64;
    Ok((0..mb.values.len())
        .map(|j| if j == mb.varied { new_value } else { share })
        .collect())
}

fn covary_order_preserving(mb: &MemberBlock, new_value: f64) -> Result<Vec<f64>> {
    if mb.mults.iter().any(|&m| m > 1) {
        // With merged slots the scheme only applies when the covariation is
        // forced, i.e. a single covarying member remains.
        let covarying: Vec<usize> = (0..mb.values.len()).filter(|&j| j != mb.varied).collect();
        if covarying.len() != 1 {
            return Err(Error::UnsupportedCovariation(
                "order-preserving covariation of a merged block with more than one free member"
                    .to_string(),
            ));
        }
        let j = covarying[0];
        let mut out = mb.values.clone();
        out[mb.varied] = new_value;
        out[j] = mb.residual(new_value).max(0.0) / mb.mults[j] as f64;
        return Ok(out);
    }

    let r = mb.values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| {
        mb.values[i]
            .partial_cmp(&mb.values[j])
            .unwrap()
            .then(i.cmp(&j))
    });
    let p = order
        .iter()
        .position(|&j| j == mb.varied)
        .expect("varied member present");
    if p == r - 1 {
        return Err(Error::UnsupportedCovariation(
            "order-preserving scheme cannot vary the largest member".to_string(),
        ));
    }
    let v: Vec<f64> = order.iter().map(|&j| mb.values[j]).collect();
    let v_p = v[p];
    let v_max = 1.0 / (1.0 + (r - 1 - p) as f64);
    if new_value > v_max + TOL {
        return Err(Error::InvalidVariation(format!(
            "new value {new_value} exceeds the order-preserving cap {v_max}"
        )));
    }
    let v_suc: f64 = v[p + 1..].iter().sum();
    let x = new_value.min(v_max);
    let mut sorted_out = vec![0.0; r];
    for q in 0..r {
        sorted_out[q] = if q == p {
            x
        } else if x <= v_p {
            if q < p {
                v[q] / v_p * x
            } else {
                -v[q] * (1.0 - v_suc) / (v_suc * v_p) * x + v[q] / v_suc
            }
        } else if q < p {
            v[q] * (v_max - x) / (v_max - v_p)
        } else {
            (v[q] - v_max) * (v_max - x) / (v_max - v_p) + v_max
        };
    }
    let mut out = vec![0.0; r];
    for (q, &j) in order.iter().enumerate() {
        out[j] = sorted_out[q];
    }
    Ok(out)
}

fn covary_custom(
    space: &ParameterSpace,
    members: &[IndetId],
    mb: &MemberBlock,
    new_value: f64,
    custom: &CustomLinear,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(members.len());
    for (j, &id) in members.iter().enumerate() {
        if j == mb.varied {
            out.push(new_value);
        } else {
            let label = space.label(id);
            let &(gamma, delta) = custom.coefficients.get(label).ok_or_else(|| {
                Error::UnsupportedCovariation(format!("no linear coefficients for `{label}`"))
            })?;
            out.push(gamma * new_value + delta);
        }
    }
    Ok(out)
}

/// Piecewise-linear coefficient form of a scheme on the block owning
/// `varied`: per segment, `theta_j = gamma_j * x + delta_j`. The
/// order-preserving scheme splits exactly at the original value; the other
/// schemes are a single segment over the admissible range.
pub fn linear_coefficients(
    space: &ParameterSpace,
    scheme: &CovariationScheme,
    varied: IndetId,
    a: &Assignment,
) -> Result<PiecewiseLinear> {
    let (members, mb) = member_block(space, varied, a)?;
    let n = members.len();
    let m_i = mb.varied_mult() as f64;
    let hi = 1.0 / m_i;

    let single = |coeffs: Vec<(f64, f64)>| PiecewiseLinear {
        members: members.clone(),
        varied_index: mb.varied,
        segments: vec![LinearSegment {
            lo: 0.0,
            hi,
            member_coeffs: coeffs,
        }],
    };

    match scheme {
        CovariationScheme::Proportional => {
            let r_old = mb.residual(mb.values[mb.varied]);
            if r_old <= 0.0 {
                return Err(Error::UndefinedCovariation(format!(
                    "varied member already holds the whole block mass ({})",
                    mb.values[mb.varied]
                )));
            }
            let coeffs = (0..n)
                .map(|j| {
                    if j == mb.varied {
                        (1.0, 0.0)
                    } else {
                        (-m_i * mb.values[j] / r_old, mb.values[j] / r_old)
                    }
                })
                .collect();
            Ok(single(coeffs))
        }
        CovariationScheme::Uniform => {
            let free_slots = mb.slot_count() - mb.varied_mult();
            if free_slots == 0 {
                return Err(Error::UnsupportedCovariation(
                    "no covarying members in the block".to_string(),
                ));
            }
            let coeffs = (0..n)
                .map(|j| {
                    if j == mb.varied {
                        (1.0, 0.0)
                    } else {
                        (-m_i / free_slots as f64, 1.0 / free_slots as f64)
                    }
                })
                .collect();
            Ok(single(coeffs))
        }
        CovariationScheme::CustomLinear(custom) => {
            let mut coeffs = Vec::with_capacity(n);
            for (j, &id) in members.iter().enumerate() {
                if j == mb.varied {
                    coeffs.push((1.0, 0.0));
                } else {
                    let label = space.label(id);
                    let &pair = custom.coefficients.get(label).ok_or_else(|| {
                        Error::UnsupportedCovariation(format!(
                            "no linear coefficients for `{label}`"
                        ))
                    })?;
                    coeffs.push(pair);
                }
            }
            Ok(single(coeffs))
        }
        CovariationScheme::OrderPreserving => order_preserving_coefficients(&members, &mb),
    }
}

fn order_preserving_coefficients(members: &[IndetId], mb: &MemberBlock) -> Result<PiecewiseLinear> {
    if mb.mults.iter().any(|&m| m > 1) {
        let covarying: Vec<usize> = (0..mb.values.len()).filter(|&j| j != mb.varied).collect();
        if covarying.len() != 1 {
            return Err(Error::UnsupportedCovariation(
                "order-preserving covariation of a merged block with more than one free member"
                    .to_string(),
            ));
        }
        let j = covarying[0];
        let m_i = mb.varied_mult() as f64;
        let m_j = mb.mults[j] as f64;
        let mut coeffs = vec![(0.0, 0.0); mb.values.len()];
        coeffs[mb.varied] = (1.0, 0.0);
        coeffs[j] = (-m_i / m_j, 1.0 / m_j);
        return Ok(PiecewiseLinear {
            members: members.to_vec(),
            varied_index: mb.varied,
            segments: vec![LinearSegment {
                lo: 0.0,
                hi: 1.0 / m_i,
                member_coeffs: coeffs,
            }],
        });
    }

    let r = mb.values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| {
        mb.values[i]
            .partial_cmp(&mb.values[j])
            .unwrap()
            .then(i.cmp(&j))
    });
    let p = order.iter().position(|&j| j == mb.varied).unwrap();
    if p == r - 1 {
        return Err(Error::UnsupportedCovariation(
            "order-preserving scheme cannot vary the largest member".to_string(),
        ));
    }
    let v: Vec<f64> = order.iter().map(|&j| mb.values[j]).collect();
    let v_p = v[p];
    let v_max = 1.0 / (1.0 + (r - 1 - p) as f64);
    let v_suc: f64 = v[p + 1..].iter().sum();

    let to_member_order = |sorted: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); r];
        for (q, &j) in order.iter().enumerate() {
            out[j] = sorted[q];
        }
        out
    };

    let mut segments = Vec::new();
    if v_p > 0.0 {
        let sorted: Vec<(f64, f64)> = (0..r)
            .map(|q| {
                if q == p {
                    (1.0, 0.0)
                } else if q < p {
                    (v[q] / v_p, 0.0)
                } else {
                    (-v[q] * (1.0 - v_suc) / (v_suc * v_p), v[q] / v_suc)
                }
            })
            .collect();
        segments.push(LinearSegment {
            lo: 0.0,
            hi: v_p,
            member_coeffs: to_member_order(sorted),
        });
    }
    if v_max - v_p > 1e-15 {
        let span = v_max - v_p;
        let sorted: Vec<(f64, f64)> = (0..r)
            .map(|q| {
                if q == p {
                    (1.0, 0.0)
                } else if q < p {
                    (-v[q] / span, v[q] * v_max / span)
                } else {
                    (
                        -(v[q] - v_max) / span,
                        (v[q] - v_max) * v_max / span + v_max,
                    )
                }
            })
            .collect();
        segments.push(LinearSegment {
            lo: v_p,
            hi: v_max,
            member_coeffs: to_member_order(sorted),
        });
    }
    Ok(PiecewiseLinear {
        members: members.to_vec(),
        varied_index: mb.varied,
        segments,
    })
}

// ---------------------------------------------------------------------------
// Property checking
// ---------------------------------------------------------------------------

/// One block variation probe for [`check_properties`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySample {
    pub values: Vec<f64>,
    pub varied: usize,
    pub new_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyFlag {
    pub holds: bool,
    pub witness: Option<PropertySample>,
}

impl PropertyFlag {
    fn pass() -> Self {
        Self {
            holds: true,
            witness: None,
        }
    }

    fn record(&mut self, sample: &PropertySample) {
        if self.holds {
            self.holds = false;
            self.witness = Some(sample.clone());
        }
    }
}

/// The five scheme properties, each with a concrete counterexample when
/// false.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub valid: PropertyFlag,
    pub impossibility_preserving: PropertyFlag,
    pub order_preserving: PropertyFlag,
    pub identity_preserving: PropertyFlag,
    pub linear: PropertyFlag,
}

impl PropertyReport {
    /// (valid, imp-pres, ord-pres, ident-pres, linear)
    pub fn flags(&self) -> [bool; 5] {
        [
            self.valid.holds,
            self.impossibility_preserving.holds,
            self.order_preserving.holds,
            self.identity_preserving.holds,
            self.linear.holds,
        ]
    }
}

/// Deterministic sample battery: a crafted set that pins the known
/// counterexamples plus `count` seeded random blocks, some carrying an exact
/// zero. Values are ascending so the order property is meaningful.
pub fn property_samples(seed: u64, count: usize) -> Vec<PropertySample> {
    let mut samples = vec![
        // varied member overtakes its successors
        PropertySample {
            values: vec![0.1, 0.2, 0.7],
            varied: 0,
            new_value: 0.9,
        },
        // uniform shuffles an already ascending block
        PropertySample {
            values: vec![0.05, 0.15, 0.8],
            varied: 1,
            new_value: 0.1,
        },
        // identity probe on an uneven block
        PropertySample {
            values: vec![0.2, 0.3, 0.5],
            varied: 0,
            new_value: 0.2,
        },
        // zero that must stay impossible
        PropertySample {
            values: vec![0.0, 0.45, 0.55],
            varied: 1,
            new_value: 0.3,
        },
        // binary block, forced covariation
        PropertySample {
            values: vec![0.35, 0.65],
            varied: 0,
            new_value: 0.6,
        },
    ];
    let mut rng = SplitMix64::new(seed);
    while samples.len() < count.max(samples.len()) {
        let r = 2 + rng.next_below(4);
        let mut values = rng.dirichlet(r);
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if samples.len() % 5 == 0 && r > 2 {
            let dropped = values.remove(0);
            let rest: f64 = 1.0 - dropped;
            for v in &mut values {
                *v /= rest;
            }
            values.insert(0, 0.0);
        }
        let varied = 1 + rng.next_below(r - 1);
        let new_value = rng.next_f64();
        samples.push(PropertySample {
            values,
            varied,
            new_value,
        });
    }
    samples
}

fn sample_space(sample: &PropertySample) -> ParameterSpace {
    let slots: Vec<(String, f64)> = sample
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| (format!("p{j}"), v))
        .collect();
    ParameterSpace::new(vec![slots]).expect("sample block is a valid space")
}

/// Adapts a sample to the scheme's admissible inputs: the order-preserving
/// scheme never varies the largest member and caps the new value.
fn adapt(scheme: &CovariationScheme, sample: &PropertySample) -> Option<PropertySample> {
    let mut s = sample.clone();
    if let CovariationScheme::OrderPreserving = scheme {
        let r = s.values.len();
        if s.varied == r - 1 {
            if r < 2 {
                return None;
            }
            s.varied = r - 2;
        }
        let v_max = 1.0 / (1.0 + (r - 1 - s.varied) as f64);
        s.new_value = s.new_value.min(v_max);
    }
    if matches!(scheme, CovariationScheme::Proportional) && s.values[s.varied] >= 1.0 {
        return None;
    }
    Some(s)
}

fn run_sample(
    scheme: &CovariationScheme,
    sample: &PropertySample,
    new_value: f64,
) -> Result<Vec<f64>> {
    let space = sample_space(sample);
    let out = covary(&space, scheme, sample.varied, new_value, space.base())?;
    Ok(out.into_iter().map(|(_, v)| v).collect())
}

/// Evaluates the five properties of `scheme` over a sample battery. The
/// matrix for the three named schemes is exact; every false flag carries a
/// concrete witness.
pub fn check_properties(scheme: &CovariationScheme, samples: &[PropertySample]) -> PropertyReport {
    let mut report = PropertyReport {
        valid: PropertyFlag::pass(),
        impossibility_preserving: PropertyFlag::pass(),
        order_preserving: PropertyFlag::pass(),
        identity_preserving: PropertyFlag::pass(),
        linear: PropertyFlag::pass(),
    };

    for raw in samples {
        let Some(sample) = adapt(scheme, raw) else {
            continue;
        };
        let Ok(out) = run_sample(scheme, &sample, sample.new_value) else {
            continue;
        };

        // valid: sum to one
        if (out.iter().sum::<f64>() - 1.0).abs() > TOL {
            report.valid.record(&sample);
        }
        // impossibility preserving: covaried zeros stay exactly zero
        for (j, &v) in out.iter().enumerate() {
            if j != sample.varied && sample.values[j] == 0.0 && v != 0.0 {
                report.impossibility_preserving.record(&sample);
            }
        }
        // order preserving: ascending input stays ascending
        let ascending_in = sample.values.windows(2).all(|w| w[0] <= w[1]);
        if ascending_in && out.windows(2).any(|w| w[0] > w[1] + 1e-12) {
            report.order_preserving.record(&sample);
        }
        // identity preserving: varying to the original value changes nothing
        if let Ok(id_out) = run_sample(scheme, &sample, sample.values[sample.varied]) {
            if id_out
                .iter()
                .zip(&sample.values)
                .any(|(&a, &b)| (a - b).abs() > 1e-12)
            {
                report.identity_preserving.record(&sample);
            }
        }
        // linear: covary agrees with the per-segment affine coefficients
        let space = sample_space(&sample);
        if let Ok(pl) = linear_coefficients(&space, scheme, sample.varied, space.base()) {
            'segments: for segment in &pl.segments {
                for frac in [0.25, 0.5, 0.75] {
                    let x = segment.lo + frac * (segment.hi - segment.lo);
                    let Ok(direct) = run_sample(scheme, &sample, x) else {
                        continue;
                    };
                    let affine: Vec<f64> = segment
                        .member_coeffs
                        .iter()
                        .map(|&(g, d)| g * x + d)
                        .collect();
                    if direct
                        .iter()
                        .zip(&affine)
                        .any(|(&a, &b)| (a - b).abs() > TOL)
                    {
                        report.linear.record(&sample);
                        break 'segments;
                    }
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_space(values: &[f64]) -> ParameterSpace {
        ParameterSpace::new(vec![values
            .iter()
            .enumerate()
            .map(|(j, &v)| (format!("p{j}"), v))
            .collect()])
        .unwrap()
    }

    fn values(out: Vec<(IndetId, f64)>) -> Vec<f64> {
        out.into_iter().map(|(_, v)| v).collect()
    }

    #[test]
    fn proportional_scales_the_residual() {
        let space = block_space(&[0.5, 0.3, 0.2]);
        let out = values(
            covary(
                &space,
                &CovariationScheme::Proportional,
                0,
                0.6,
                space.base(),
            )
            .unwrap(),
        );
        // factor (1 - 0.6) / (1 - 0.5) = 0.8
        assert!((out[0] - 0.6).abs() < 1e-12);
        assert!((out[1] - 0.24).abs() < 1e-12);
        assert!((out[2] - 0.16).abs() < 1e-12);
    }

    #[test]
    fn uniform_splits_the_residual_evenly() {
        let space = block_space(&[0.5, 0.3, 0.2]);
        let out =
            values(covary(&space, &CovariationScheme::Uniform, 0, 0.6, space.base()).unwrap());
        assert!((out[1] - 0.2).abs() < 1e-12);
        assert!((out[2] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn proportional_rejects_a_saturated_member() {
        let space = block_space(&[1.0, 0.0]);
        let err = covary(
            &space,
            &CovariationScheme::Proportional,
            0,
            0.5,
            space.base(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UndefinedCovariation(_)));
    }

    #[test]
    fn proportional_keeps_zeros_exactly() {
        let space = block_space(&[0.6, 0.0, 0.4]);
        let out = values(
            covary(
                &space,
                &CovariationScheme::Proportional,
                0,
                0.2,
                space.base(),
            )
            .unwrap(),
        );
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn order_preserving_rejects_the_largest_member() {
        let space = block_space(&[0.2, 0.3, 0.5]);
        let err = covary(
            &space,
            &CovariationScheme::OrderPreserving,
            2,
            0.4,
            space.base(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnsupportedCovariation(_)));
    }

    #[test]
    fn order_preserving_caps_the_new_value() {
        let space = block_space(&[0.2, 0.3, 0.5]);
        // varying the smallest member: cap is 1/(1+2) = 1/3
        let err = covary(
            &space,
            &CovariationScheme::OrderPreserving,
            0,
            0.5,
            space.base(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidVariation(_)));
    }

    #[test]
    fn order_preserving_keeps_ascending_order_on_both_segments() {
        let space = block_space(&[0.2, 0.3, 0.5]);
        for &x in &[0.05, 0.15, 0.2, 0.25, 1.0 / 3.0] {
            let out = values(
                covary(
                    &space,
                    &CovariationScheme::OrderPreserving,
                    0,
                    x,
                    space.base(),
                )
                .unwrap(),
            );
            assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12, "x={x}");
            assert!(
                out.windows(2).all(|w| w[0] <= w[1] + 1e-12),
                "x={x}: {out:?}"
            );
        }
    }

    #[test]
    fn order_preserving_handles_unsorted_blocks() {
        // stored order is not ascending; the scheme sorts internally
        let space = block_space(&[0.5, 0.2, 0.3]);
        let out = values(
            covary(
                &space,
                &CovariationScheme::OrderPreserving,
                1,
                0.25,
                space.base(),
            )
            .unwrap(),
        );
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((out[1] - 0.25).abs() < 1e-12);
        // ascending in value order: out[1] <= out[2] <= out[0]
        assert!(out[1] <= out[2] + 1e-12 && out[2] <= out[0] + 1e-12);
    }

    #[test]
    fn merged_block_covariation_is_forced() {
        // one member fills two slots: (0.4, 0.3, 0.3) with the tied pair varied
        let space = ParameterSpace::new(vec![vec![
            ("p0".into(), 0.4),
            ("p12".into(), 0.3),
            ("p12".into(), 0.3),
        ]])
        .unwrap();
        for scheme in [
            CovariationScheme::Proportional,
            CovariationScheme::Uniform,
            CovariationScheme::OrderPreserving,
        ] {
            let out = covary(&space, &scheme, 1, 0.25, space.base()).unwrap();
            assert!((out[0].1 - 0.5).abs() < 1e-12, "{scheme:?}");
            assert!((out[1].1 - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn proportional_coefficients_match_the_closed_form() {
        let space = block_space(&[0.5, 0.3, 0.2]);
        let pl =
            linear_coefficients(&space, &CovariationScheme::Proportional, 0, space.base()).unwrap();
        let (gamma, delta) = pl.segments[0].member_coeffs[1];
        assert!((gamma + 0.6).abs() < 1e-12);
        assert!((delta - 0.6).abs() < 1e-12);
    }

    #[test]
    fn uniform_coefficients_for_a_ternary_block() {
        let space = block_space(&[0.5, 0.3, 0.2]);
        let pl = linear_coefficients(&space, &CovariationScheme::Uniform, 0, space.base()).unwrap();
        let (gamma, delta) = pl.segments[0].member_coeffs[2];
        assert!((gamma + 0.5).abs() < 1e-12);
        assert!((delta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn order_preserving_breakpoint_sits_at_the_original_value() {
        let space = block_space(&[0.2, 0.3, 0.5]);
        let pl = linear_coefficients(&space, &CovariationScheme::OrderPreserving, 0, space.base())
            .unwrap();
        assert_eq!(pl.segments.len(), 2);
        assert!((pl.segments[0].hi - 0.2).abs() < 1e-15);
        assert!((pl.segments[1].lo - 0.2).abs() < 1e-15);
        assert!((pl.segments[1].hi - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn named_schemes_reproduce_the_property_matrix() {
        let samples = property_samples(11, 100);
        let prop = check_properties(&CovariationScheme::Proportional, &samples);
        assert_eq!(prop.flags(), [true, true, false, true, true]);
        let uni = check_properties(&CovariationScheme::Uniform, &samples);
        assert_eq!(uni.flags(), [true, false, false, false, true]);
        let ord = check_properties(&CovariationScheme::OrderPreserving, &samples);
        assert_eq!(ord.flags(), [true, true, true, true, true]);
        assert!(prop.order_preserving.witness.is_some());
        assert!(uni.identity_preserving.witness.is_some());
    }

    #[test]
    fn custom_linear_rejects_out_of_range_coefficients() {
        let mut coeffs = HashMap::new();
        coeffs.insert("p1".to_string(), (1.5, 0.0));
        assert!(CustomLinear::new(coeffs).is_err());
    }
}
