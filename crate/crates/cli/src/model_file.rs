//! The JSON model schema the CLI consumes: plain networks (`bn`), networks
//! with context-specific merges (`csbn`), stationary dynamic networks with a
//! horizon (`dbn`), and bare one-block monomial models (`monomials`).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use polysens::compile::{
    apply_merges, compile_bn, compile_monomial_model, unroll_dbn, BnSpec, BnVariable, CptColumn,
    DbnSpec, MergeGroup, MergeSpec, TransitionVariable,
};
use polysens::Model;

use crate::AppError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub cardinality: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnFile {
    /// Parent values this column conditions on; empty for root variables.
    #[serde(default)]
    pub given: BTreeMap<String, usize>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeFile {
    pub label: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub variables: Vec<VariableDecl>,
    #[serde(default)]
    pub parents: BTreeMap<String, Vec<String>>,
    pub cpts: BTreeMap<String, Vec<ColumnFile>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionFile {
    /// Previous-slice parents per variable.
    #[serde(default)]
    pub parents: BTreeMap<String, Vec<String>>,
    pub cpts: BTreeMap<String, Vec<ColumnFile>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockFile {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
}

/// Reference CD values a monomial fixture may carry; `verify` and the
/// acceptance suite check against them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectedCd {
    pub varied: String,
    pub new_value: f64,
    pub proportional: f64,
    pub uniform: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum ModelFile {
    Bn(NetworkFile),
    Csbn {
        #[serde(flatten)]
        network: NetworkFile,
        merges: Vec<MergeFile>,
    },
    Dbn {
        initial: NetworkFile,
        transition: TransitionFile,
        horizon: usize,
    },
    Monomials {
        block: BlockFile,
        monomials: Vec<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        expected_cd: Vec<ExpectedCd>,
    },
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = fs::read_to_string(path)
            .map_err(|e| AppError::Parse(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| AppError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn to_canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("model file serializes");
        text.push('\n');
        text
    }

    /// Compiles the file; construction failures (bad CPT sums, dangling
    /// parents, merge conflicts) count as invalid input, not analysis
    /// errors.
    pub fn compile(&self) -> Result<Model, AppError> {
        let invalid = |e: polysens::Error| AppError::Parse(format!("invalid model: {e}"));
        match self {
            ModelFile::Bn(network) => compile_bn(&network.to_spec()?).map_err(invalid),
            ModelFile::Csbn { network, merges } => {
                let model = compile_bn(&network.to_spec()?).map_err(invalid)?;
                let spec = MergeSpec {
                    groups: merges
                        .iter()
                        .map(|m| MergeGroup {
                            label: m.label.clone(),
                            members: m.members.clone(),
                        })
                        .collect(),
                };
                apply_merges(&model, &spec).map_err(invalid)
            }
            ModelFile::Dbn {
                initial,
                transition,
                horizon,
            } => {
                let spec = DbnSpec {
                    initial: initial.to_spec()?,
                    transitions: transition.to_specs(initial)?,
                };
                unroll_dbn(&spec, *horizon).map_err(invalid)
            }
            ModelFile::Monomials {
                block, monomials, ..
            } => compile_monomial_model(&block.labels, &block.values, monomials).map_err(invalid),
        }
    }

    pub fn expected_cd(&self) -> &[ExpectedCd] {
        match self {
            ModelFile::Monomials { expected_cd, .. } => expected_cd,
            _ => &[],
        }
    }
}

impl NetworkFile {
    fn to_spec(&self) -> Result<BnSpec, AppError> {
        let index_of = |name: &str| -> Result<usize, AppError> {
            self.variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| AppError::Parse(format!("unknown variable `{name}`")))
        };
        let mut variables = Vec::with_capacity(self.variables.len());
        for decl in &self.variables {
            let parent_names = self.parents.get(&decl.name).cloned().unwrap_or_default();
            let parents: Vec<usize> = parent_names
                .iter()
                .map(|n| index_of(n))
                .collect::<Result<_, _>>()?;
            let columns = self
                .cpts
                .get(&decl.name)
                .ok_or_else(|| AppError::Parse(format!("no CPT for variable `{}`", decl.name)))?;
            let cpt = columns
                .iter()
                .map(|column| column_to_spec(column, &parent_names, &decl.name))
                .collect::<Result<_, _>>()?;
            variables.push(BnVariable {
                name: decl.name.clone(),
                cardinality: decl.cardinality,
                parents,
                cpt,
            });
        }
        Ok(BnSpec { variables })
    }
}

impl TransitionFile {
    fn to_specs(&self, initial: &NetworkFile) -> Result<Vec<TransitionVariable>, AppError> {
        let index_of = |name: &str| -> Result<usize, AppError> {
            initial
                .variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| AppError::Parse(format!("unknown variable `{name}`")))
        };
        initial
            .variables
            .iter()
            .map(|decl| {
                let parent_names = self.parents.get(&decl.name).cloned().unwrap_or_default();
                let parents: Vec<usize> = parent_names
                    .iter()
                    .map(|n| index_of(n))
                    .collect::<Result<_, _>>()?;
                let columns = self.cpts.get(&decl.name).ok_or_else(|| {
                    AppError::Parse(format!("no transition CPT for `{}`", decl.name))
                })?;
                let cpt = columns
                    .iter()
                    .map(|column| column_to_spec(column, &parent_names, &decl.name))
                    .collect::<Result<_, _>>()?;
                Ok(TransitionVariable { parents, cpt })
            })
            .collect()
    }
}

fn column_to_spec(
    column: &ColumnFile,
    parent_names: &[String],
    variable: &str,
) -> Result<CptColumn, AppError> {
    if column.given.len() != parent_names.len() {
        return Err(AppError::Parse(format!(
            "a column of `{variable}` fixes {} parents, expected {}",
            column.given.len(),
            parent_names.len()
        )));
    }
    let parents = parent_names
        .iter()
        .map(|name| {
            column.given.get(name).copied().ok_or_else(|| {
                AppError::Parse(format!("column of `{variable}` misses parent `{name}`"))
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(CptColumn {
        parents,
        probs: column.probs.clone(),
    })
}
