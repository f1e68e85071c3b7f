//! Parsing of sweep axes ("label=lo:hi:step" or "label=value"), event
//! predicates ("Y3=0,Y1@*=1"), scheme and measure selections.

use std::collections::HashMap;
use std::fs;

use polysens::covariation::{CovariationScheme, CustomLinear};
use polysens::divergence::PhiFunction;
use polysens::poly::EventSet;
use polysens::Model;

use crate::AppError;

#[derive(Debug, Clone)]
pub struct SweepAxis {
    pub label: String,
    pub points: Vec<f64>,
}

/// "label=lo:hi:step" becomes an inclusive range; "label=v" a single point.
pub fn parse_sweeps(specs: &[String]) -> Result<Vec<SweepAxis>, AppError> {
    specs.iter().map(|s| parse_sweep(s)).collect()
}

fn parse_sweep(spec: &str) -> Result<SweepAxis, AppError> {
    let (label, range) = spec
        .rsplit_once('=')
        .ok_or_else(|| AppError::Usage(format!("`{spec}` is not label=lo:hi:step")))?;
    if label.is_empty() {
        return Err(AppError::Usage(format!("`{spec}` has an empty label")));
    }
    let parts: Vec<&str> = range.split(':').collect();
    let number = |s: &str| -> Result<f64, AppError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| AppError::Usage(format!("`{s}` is not a number in `{spec}`")))
    };
    let points = match parts.as_slice() {
        [single] => vec![number(single)?],
        [lo, hi, step] => {
            let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
            if step <= 0.0 || hi < lo {
                return Err(AppError::Usage(format!(
                    "`{spec}` needs lo <= hi and a positive step"
                )));
            }
            let count = ((hi - lo) / step).round() as usize;
            let mut points: Vec<f64> = (0..=count).map(|i| lo + step * i as f64).collect();
            if let Some(last) = points.last_mut() {
                if (*last - hi).abs() < step * 1e-9 {
                    *last = hi;
                }
            }
            points.retain(|&x| x <= hi + step * 1e-9);
            points
        }
        _ => {
            return Err(AppError::Usage(format!(
                "`{spec}` is not label=lo:hi:step or label=value"
            )))
        }
    };
    Ok(SweepAxis {
        label: label.to_string(),
        points,
    })
}

/// Cross product of the axes' point lists, first axis slowest.
pub fn grid(axes: &[SweepAxis]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.points.len());
        for prefix in &out {
            for &x in &axis.points {
                let mut point = prefix.clone();
                point.push(x);
                next.push(point);
            }
        }
        out = next;
    }
    out
}

/// "Y3=0,Y2@1=1"; "Y1@*=v" expands over every slice of Y1. An empty string
/// selects every atom.
pub fn parse_event(model: &Model, text: &str) -> Result<EventSet, AppError> {
    let mut constraints: Vec<(String, usize)> = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| AppError::Usage(format!("`{part}` is not variable=value")))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| AppError::Usage(format!("`{part}` has a non-integer value")))?;
        let name = name.trim();
        if let Some(prefix) = name.strip_suffix("@*") {
            let matches: Vec<String> = model
                .variables
                .iter()
                .filter(|v| {
                    v.name
                        .strip_prefix(prefix)
                        .and_then(|rest| rest.strip_prefix('@'))
                        .map(|t| t.chars().all(|c| c.is_ascii_digit()))
                        .unwrap_or(false)
                })
                .map(|v| v.name.clone())
                .collect();
            if matches.is_empty() {
                return Err(AppError::Usage(format!(
                    "`{name}` matches no sliced variables"
                )));
            }
            for m in matches {
                constraints.push((m, value));
            }
        } else {
            constraints.push((name.to_string(), value));
        }
    }
    Ok(polysens::compile::event_from_predicate(
        model,
        &constraints,
    )?)
}

/// "all", one name, or a comma list; "linear:<file>" loads per-member
/// gamma/delta coefficients from JSON.
pub fn parse_schemes(text: &str) -> Result<Vec<CovariationScheme>, AppError> {
    if text.trim() == "all" {
        return Ok(vec![
            CovariationScheme::Proportional,
            CovariationScheme::Uniform,
            CovariationScheme::OrderPreserving,
        ]);
    }
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_scheme)
        .collect()
}

fn parse_scheme(name: &str) -> Result<CovariationScheme, AppError> {
    match name {
        "proportional" => Ok(CovariationScheme::Proportional),
        "uniform" => Ok(CovariationScheme::Uniform),
        "order-preserving" => Ok(CovariationScheme::OrderPreserving),
        other => {
            if let Some(path) = other.strip_prefix("linear:") {
                let text = fs::read_to_string(path)
                    .map_err(|e| AppError::Parse(format!("cannot read {path}: {e}")))?;
                let table: HashMap<String, (f64, f64)> = serde_json::from_str(&text)
                    .map_err(|e| AppError::Parse(format!("{path}: {e}")))?;
                Ok(CovariationScheme::CustomLinear(CustomLinear::new(table)?))
            } else {
                Err(AppError::Usage(format!(
                    "unknown scheme `{other}` (expected proportional, uniform, order-preserving or linear:<file>)"
                )))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Measure {
    Cd,
    Phi(PhiFunction),
}

impl Measure {
    pub fn name(&self) -> &str {
        match self {
            Measure::Cd => "cd",
            Measure::Phi(phi) => phi.name(),
        }
    }
}

pub fn parse_measures(text: &str) -> Result<Vec<Measure>, AppError> {
    if text.trim() == "all" {
        let mut out = vec![Measure::Cd];
        out.extend(PhiFunction::presets().into_iter().map(Measure::Phi));
        return Ok(out);
    }
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|name| match name {
            "cd" => Ok(Measure::Cd),
            "kl_pq" => Ok(Measure::Phi(PhiFunction::KlPq)),
            "kl_qp" => Ok(Measure::Phi(PhiFunction::KlQp)),
            "tv" => Ok(Measure::Phi(PhiFunction::TotalVariation)),
            "j" => Ok(Measure::Phi(PhiFunction::JDivergence)),
            other => Err(AppError::Usage(format!(
                "unknown measure `{other}` (expected cd, kl_pq, kl_qp, tv or j)"
            ))),
        })
        .collect()
}
