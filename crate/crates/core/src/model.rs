//! A compiled model: parameter space, atoms and the interpolating polynomial.

use crate::error::{Error, Result};
use crate::poly::{AtomId, EventSet, Polynomial};
use crate::space::{Assignment, ParameterSpace, SUM_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
}

/// A discrete parametric model in monomial form. Atoms are joint outcomes of
/// `variables` (one value per variable); for models given directly by a
/// monomial set, `variables` is empty and atoms are bare term indices.
#[derive(Debug, Clone)]
pub struct Model {
    pub space: ParameterSpace,
    pub variables: Vec<Variable>,
    /// Outcome tuple per atom, aligned with `variables`.
    pub atoms: Vec<Vec<usize>>,
    pub poly: Polynomial,
    /// Which variable each block conditions, when compiled from one; merges
    /// must stay within a single variable.
    pub block_variable: Vec<Option<usize>>,
}

impl Model {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// All atoms as an event.
    pub fn all_atoms(&self) -> EventSet {
        EventSet::new(0..self.atoms.len())
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Atom probabilities under `a`, in atom order.
    pub fn atom_distribution(&self, a: &Assignment) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.atoms.len()];
        for term in &self.poly.terms {
            out[term.atom] = term.monomial.eval(a)?;
        }
        Ok(out)
    }

    /// Human-readable atom description.
    pub fn atom_label(&self, atom: AtomId) -> String {
        if self.variables.is_empty() {
            let term = self
                .poly
                .terms
                .iter()
                .find(|t| t.atom == atom)
                .expect("atom without term");
            return format!(
                "atom {} [{}]",
                atom,
                term.monomial.render(|id| self.space.label(id).to_string())
            );
        }
        let parts: Vec<String> = self
            .variables
            .iter()
            .zip(&self.atoms[atom])
            .map(|(v, &val)| format!("{}={}", v.name, val))
            .collect();
        format!("atom {} ({})", atom, parts.join(","))
    }

    /// Sanity checks: one term per atom, exponents reference the space, and
    /// the base assignment is a probability parametrisation (total mass one)
    /// when the model was compiled from variables.
    pub fn validate(&self) -> Result<()> {
        if self.poly.len() != self.atoms.len() {
            return Err(Error::InvalidSpec(format!(
                "{} terms for {} atoms",
                self.poly.len(),
                self.atoms.len()
            )));
        }
        if self.block_variable.len() != self.space.blocks().len() {
            return Err(Error::InvalidSpec(
                "block ownership table out of step with blocks".to_string(),
            ));
        }
        for term in &self.poly.terms {
            if term.atom >= self.atoms.len() {
                return Err(Error::AtomOutOfRange(term.atom, self.atoms.len()));
            }
            for (id, _) in term.monomial.iter() {
                if id >= self.space.len() {
                    return Err(Error::MissingIndeterminate(self.space.len(), id));
                }
            }
        }
        self.space.check_assignment(self.space.base())?;
        if !self.variables.is_empty() {
            let total = self.poly.evaluate(self.space.base())?;
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidSpec(format!(
                    "interpolating polynomial evaluates to {total} at the base assignment"
                )));
            }
        }
        Ok(())
    }
}
