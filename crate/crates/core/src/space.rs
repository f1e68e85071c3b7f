//! Parameter space: indeterminates partitioned into sum-to-one blocks, plus
//! the numeric assignment they carry.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type IndetId = usize;
pub type BlockId = usize;

/// Tolerance for sum-to-one and total-probability checks.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A single probability parameter of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Indeterminate {
    pub id: IndetId,
    /// Canonical label, e.g. `theta_Y3_0|Y1_1,Y2_1` or `that_Y2_1|Y2_1,Y3_0`
    /// for stationary transition parameters.
    pub label: String,
    pub block: BlockId,
}

/// A sum-to-one constrained group of parameters (a CPT column, or a merged
/// column after context-specific substitutions).
///
/// `slots` holds one entry per value of the governed conditional variable, in
/// value order. After a partial-independence merge the same indeterminate may
/// occupy several slots, so validity reads: the slot values sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub id: BlockId,
    pub slots: Vec<IndetId>,
}

impl Block {
    /// Distinct indeterminates in first-slot order.
    pub fn members(&self) -> Vec<IndetId> {
        let mut seen = Vec::new();
        for &id in &self.slots {
            if !seen.contains(&id) {
                seen.push(id);
            }
        }
        seen
    }

    /// Number of slots occupied by `id`.
    pub fn multiplicity(&self, id: IndetId) -> usize {
        self.slots.iter().filter(|&&s| s == id).count()
    }

    pub fn contains(&self, id: IndetId) -> bool {
        self.slots.contains(&id)
    }

    /// Slot values under `a`, in slot order.
    pub fn slot_values(&self, a: &Assignment) -> Result<Vec<f64>> {
        self.slots.iter().map(|&id| a.value(id)).collect()
    }

    /// Permutation of slot indices sorted ascending by assigned value
    /// (ties keep slot order). The order-preserving scheme works in this
    /// ordering.
    pub fn ascending_order(&self, a: &Assignment) -> Result<Vec<usize>> {
        let values = self.slot_values(a)?;
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
        Ok(idx)
    }
}

/// Indeterminates, their block partition and the base (elicited) assignment.
#[derive(Debug, Clone)]
pub struct ParameterSpace {
    indets: Vec<Indeterminate>,
    blocks: Vec<Block>,
    by_label: HashMap<String, IndetId>,
    base: Assignment,
}

impl ParameterSpace {
    /// Builds a space from per-block labelled values. Labels must be unique;
    /// a label may appear in several slots of the *same* block (merged
    /// parameters) but never across blocks.
    pub fn new(block_slots: Vec<Vec<(String, f64)>>) -> Result<Self> {
        let mut indets: Vec<Indeterminate> = Vec::new();
        let mut blocks = Vec::new();
        let mut by_label: HashMap<String, IndetId> = HashMap::new();
        let mut values: Vec<f64> = Vec::new();

        for (block_id, slots) in block_slots.into_iter().enumerate() {
            if slots.is_empty() {
                return Err(Error::InvalidSpec(format!("block {block_id} is empty")));
            }
            let mut slot_ids = Vec::with_capacity(slots.len());
            for (label, value) in slots {
                let id = match by_label.get(&label) {
                    Some(&id) => {
                        if indets[id].block != block_id {
                            return Err(Error::InvalidSpec(format!(
                                "label `{label}` appears in blocks {} and {block_id}",
                                indets[id].block
                            )));
                        }
                        if (values[id] - value).abs() > SUM_TOLERANCE {
                            return Err(Error::InvalidSpec(format!(
                                "label `{label}` assigned inconsistent values {} and {value}",
                                values[id]
                            )));
                        }
                        id
                    }
                    None => {
                        if !(0.0..=1.0).contains(&value) {
                            return Err(Error::ValueOutOfRange { label, value });
                        }
                        let id = indets.len();
                        indets.push(Indeterminate {
                            id,
                            label: label.clone(),
                            block: block_id,
                        });
                        by_label.insert(label, id);
                        values.push(value);
                        id
                    }
                };
                slot_ids.push(id);
            }
            blocks.push(Block {
                id: block_id,
                slots: slot_ids,
            });
        }

        Ok(Self {
            indets,
            blocks,
            by_label,
            base: Assignment::new(values),
        })
    }

    pub fn len(&self) -> usize {
        self.indets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indets.is_empty()
    }

    pub fn indeterminates(&self) -> &[Indeterminate] {
        &self.indets
    }

    pub fn indeterminate(&self, id: IndetId) -> &Indeterminate {
        &self.indets[id]
    }

    pub fn label(&self, id: IndetId) -> &str {
        &self.indets[id].label
    }

    pub fn by_label(&self, label: &str) -> Result<IndetId> {
        self.by_label
            .get(label)
            .copied()
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id]
    }

    pub fn block_of(&self, id: IndetId) -> &Block {
        &self.blocks[self.indets[id].block]
    }

    /// The elicited values the model was built with.
    pub fn base(&self) -> &Assignment {
        &self.base
    }

    /// Checks every block of `a` sums to one within [`SUM_TOLERANCE`].
    pub fn check_assignment(&self, a: &Assignment) -> Result<()> {
        for block in &self.blocks {
            let mut sum = 0.0;
            for &id in &block.slots {
                let v = a.value(id)?;
                if !(-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&v) {
                    return Err(Error::ValueOutOfRange {
                        label: self.label(id).to_string(),
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::BlockNotNormalized {
                    block: block.id,
                    sum,
                });
            }
        }
        Ok(())
    }
}

/// A total map indeterminate id -> value, dense over a space.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    values: Vec<f64>,
}

impl Assignment {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, id: IndetId) -> Result<f64> {
        self.values
            .get(id)
            .copied()
            .ok_or(Error::MissingIndeterminate(self.values.len(), id))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copy of `self` with the listed ids overridden.
    pub fn with(&self, updates: &[(IndetId, f64)]) -> Self {
        let mut values = self.values.clone();
        for &(id, v) in updates {
            values[id] = v;
        }
        Self { values }
    }
}
