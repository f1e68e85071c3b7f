//! Sparse monomials and the interpolating polynomial: one monomial of
//! atomic-probability parameters per atom, all coefficients one.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::space::{Assignment, Block, IndetId};

pub type AtomId = usize;

/// Sparse exponent vector, sorted by indeterminate id, no zero entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    exps: Vec<(IndetId, u32)>,
}

impl Monomial {
    /// The constant monomial 1.
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_pairs(mut exps: Vec<(IndetId, u32)>) -> Self {
        exps.retain(|&(_, e)| e > 0);
        exps.sort_by_key(|&(id, _)| id);
        let mut merged: Vec<(IndetId, u32)> = Vec::with_capacity(exps.len());
        for (id, e) in exps {
            match merged.last_mut() {
                Some((last, acc)) if *last == id => *acc += e,
                _ => merged.push((id, e)),
            }
        }
        Self { exps: merged }
    }

    /// Multiplies by one factor of `id`.
    pub fn push_factor(&mut self, id: IndetId) {
        match self.exps.binary_search_by_key(&id, |&(i, _)| i) {
            Ok(pos) => self.exps[pos].1 += 1,
            Err(pos) => self.exps.insert(pos, (id, 1)),
        }
    }

    pub fn exponent(&self, id: IndetId) -> u32 {
        self.exps
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|pos| self.exps[pos].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndetId, u32)> + '_ {
        self.exps.iter().copied()
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn eval(&self, a: &Assignment) -> Result<f64> {
        let mut product = 1.0;
        for &(id, e) in &self.exps {
            product *= a.value(id)?.powi(e as i32);
        }
        Ok(product)
    }

    /// Evaluates with one indeterminate's value overridden (used to form the
    /// context masses theta^alpha with a block member deleted).
    pub fn eval_with_override(&self, a: &Assignment, id: IndetId, value: f64) -> Result<f64> {
        let mut product = 1.0;
        for &(i, e) in &self.exps {
            let v = if i == id { value } else { a.value(i)? };
            product *= v.powi(e as i32);
        }
        Ok(product)
    }

    /// Componentwise minimum of exponents, the GCD of two monomials.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut exps = Vec::new();
        for &(id, e) in &self.exps {
            let o = other.exponent(id);
            if o > 0 {
                exps.push((id, e.min(o)));
            }
        }
        Self { exps }
    }

    /// Exact quotient; `divisor` must divide `self`.
    pub fn div(&self, divisor: &Self) -> Self {
        let mut exps = Vec::new();
        for &(id, e) in &self.exps {
            let d = divisor.exponent(id);
            debug_assert!(d <= e, "divisor does not divide monomial");
            if e - d > 0 {
                exps.push((id, e - d));
            }
        }
        Self { exps }
    }

    /// Exponents restricted to the ids in `block`.
    pub fn restrict_to_block(&self, block: &Block) -> Vec<(IndetId, u32)> {
        self.exps
            .iter()
            .copied()
            .filter(|&(id, _)| block.contains(id))
            .collect()
    }

    pub fn render(&self, label: impl Fn(IndetId) -> String) -> String {
        if self.exps.is_empty() {
            return "1".to_string();
        }
        self.exps
            .iter()
            .map(|&(id, e)| {
                if e == 1 {
                    label(id)
                } else {
                    format!("{}^{}", label(id), e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// One term of the interpolating polynomial: the atom it belongs to and its
/// monomial. Coefficients are implicitly one; duplicate monomials across
/// atoms are kept as separate terms so atom-level ratios stay addressable.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub atom: AtomId,
    pub monomial: Monomial,
}

/// Sum of atomic-probability monomials, one per atom.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum over terms of the monomial value.
    pub fn evaluate(&self, a: &Assignment) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.terms {
            total += term.monomial.eval(a)?;
        }
        Ok(total)
    }

    /// Sub-polynomial with exactly the terms whose atom lies in `event`.
    pub fn restrict(&self, event: &EventSet) -> Result<Self> {
        if let Some(&max) = event.atoms().iter().max() {
            let known = self.terms.iter().map(|t| t.atom).max().unwrap_or(0);
            if max > known {
                return Err(Error::AtomOutOfRange(max, known + 1));
            }
        }
        Ok(Self {
            terms: self
                .terms
                .iter()
                .filter(|t| event.contains(t.atom))
                .cloned()
                .collect(),
        })
    }

    /// True iff every exponent of every term is at most one.
    pub fn is_multilinear(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.monomial.iter().all(|(_, e)| e <= 1))
    }

    /// Largest exponent any member of `block` takes in any term; 0 if the
    /// block never appears.
    pub fn max_indeterminate_degree(&self, block: &Block) -> u32 {
        self.terms
            .iter()
            .flat_map(|t| t.monomial.iter())
            .filter(|&(id, _)| block.contains(id))
            .map(|(_, e)| e)
            .max()
            .unwrap_or(0)
    }

    /// Largest total degree over terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.monomial.degree())
            .max()
            .unwrap_or(0)
    }

    /// True iff all terms share the same total degree.
    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(first) => {
                let d = first.monomial.degree();
                self.terms.iter().all(|t| t.monomial.degree() == d)
            }
        }
    }

    /// GCD of all term monomials; 1 for the zero polynomial.
    pub fn common_factor(&self) -> Monomial {
        let mut terms = self.terms.iter();
        let mut acc = match terms.next() {
            None => return Monomial::one(),
            Some(t) => t.monomial.clone(),
        };
        for t in terms {
            acc = acc.gcd(&t.monomial);
        }
        acc
    }
}

/// A set of atoms: the indicator functions set to one when restricting the
/// network polynomial to an event.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventSet {
    atoms: BTreeSet<AtomId>,
}

impl EventSet {
    pub fn new(atoms: impl IntoIterator<Item = AtomId>) -> Self {
        Self {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.atoms.contains(&atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> Vec<AtomId> {
        self.atoms.iter().copied().collect()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            atoms: self.atoms.intersection(&other.atoms).copied().collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            atoms: self.atoms.union(&other.atoms).copied().collect(),
        }
    }

    pub fn is_superset(&self, other: &Self) -> bool {
        self.atoms.is_superset(&other.atoms)
    }
}
