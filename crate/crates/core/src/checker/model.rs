use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{ActionLattice, LatticeError, LatticeSpec, LatticeValue};
use crate::matrix::{GdlModel, LatticeMatrix};
use crate::mrel::{FuzzyMultirelation, FuzzySet, State};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("proposition `{0}` is valued but not declared")]
    UndeclaredProposition(String),
    #[error("matrix for `{name}` must be {states}×{states}")]
    MatrixShape { name: String, states: usize },
}

impl ModelError {
    /// Whether the failure is syntactic (as opposed to a naming or typing problem).
    pub fn is_parse_error(&self) -> bool {
        matches!(self, ModelError::Json(_))
    }
}

/// Lattice-value literal: a string (`"1/2"`, a table label) or a level index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueLiteral {
    Index(usize),
    Text(String),
}

impl ValueLiteral {
    pub fn resolve(&self, lattice: &ActionLattice) -> Result<LatticeValue, LatticeError> {
        match self {
            ValueLiteral::Index(i) => lattice.value(*i),
            ValueLiteral::Text(t) => lattice.parse_literal(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeField {
    Name(String),
    Spec(LatticeSpec),
}

impl LatticeField {
    pub fn build(&self) -> Result<ActionLattice, LatticeError> {
        match self {
            LatticeField::Name(n) => ActionLattice::from_name(n),
            LatticeField::Spec(s) => s.build(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetField {
    Weighted(BTreeMap<String, ValueLiteral>),
    Crisp(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairField {
    pub from: String,
    pub to: TargetField,
}

/// On-disk model description. Valuation entries that are omitted are `0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub lattice: LatticeField,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propositions: Option<Vec<String>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, BTreeMap<String, ValueLiteral>>,
    #[serde(default)]
    pub programs: BTreeMap<String, Vec<PairField>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub matrices: BTreeMap<String, Vec<Vec<ValueLiteral>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<String>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Declared proposition and atomic program names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    pub propositions: BTreeSet<String>,
    pub programs: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgdlModel {
    pub lattice: ActionLattice,
    pub states: Vec<String>,
    /// Total valuation: one value per state for every declared proposition.
    pub valuation: BTreeMap<String, Vec<LatticeValue>>,
    pub programs: BTreeMap<String, FuzzyMultirelation>,
    /// Optional explicit matrices for the matrix semantics.
    pub matrices: BTreeMap<String, LatticeMatrix>,
    pub queries: Vec<String>,
}

/// Default state names `w1, w2, ..`.
pub fn state_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("w{i}")).collect()
}

impl CgdlModel {
    pub fn new(
        lattice: ActionLattice,
        states: Vec<String>,
        valuation: BTreeMap<String, Vec<LatticeValue>>,
        programs: BTreeMap<String, FuzzyMultirelation>,
    ) -> Self {
        CgdlModel {
            lattice,
            states,
            valuation,
            programs,
            matrices: BTreeMap::new(),
            queries: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Self::from_file(&ModelFile::from_json(text)?)
    }

    pub fn from_file(file: &ModelFile) -> Result<Self, ModelError> {
        let lattice = file.lattice.build()?;
        let mut index = BTreeMap::new();
        for (i, s) in file.states.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(ModelError::Duplicate(s.clone()));
            }
        }
        let state = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(name.to_string()))
        };
        let n = file.states.len();

        let mut props: BTreeSet<String> = BTreeSet::new();
        match &file.propositions {
            Some(declared) => {
                for p in declared {
                    if !props.insert(p.clone()) {
                        return Err(ModelError::Duplicate(p.clone()));
                    }
                }
                if let Some(p) = file.valuation.keys().find(|p| !props.contains(*p)) {
                    return Err(ModelError::UndeclaredProposition(p.clone()));
                }
            }
            None => props.extend(file.valuation.keys().cloned()),
        }
        let mut valuation = BTreeMap::new();
        for p in &props {
            let mut row = vec![lattice.zero(); n];
            if let Some(entries) = file.valuation.get(p) {
                for (s, v) in entries {
                    row[state(s)?] = v.resolve(&lattice)?;
                }
            }
            valuation.insert(p.clone(), row);
        }

        let mut programs = BTreeMap::new();
        for (name, pairs) in &file.programs {
            let mut r = FuzzyMultirelation::new(lattice.clone(), n);
            for pair in pairs {
                let from = State(state(&pair.from)?);
                let fs = match &pair.to {
                    TargetField::Crisp(ts) => {
                        let ids = ts.iter().map(|t| state(t).map(State)).collect::<Result<Vec<_>, _>>()?;
                        FuzzySet::crisp(&lattice, ids)
                    }
                    TargetField::Weighted(m) => {
                        let mut entries = Vec::new();
                        for (t, v) in m {
                            entries.push((State(state(t)?), v.resolve(&lattice)?));
                        }
                        FuzzySet::from_entries(&lattice, entries)
                    }
                };
                r.insert(from, fs);
            }
            programs.insert(name.clone(), r);
        }

        let mut matrices = BTreeMap::new();
        for (name, rows) in &file.matrices {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(ModelError::MatrixShape { name: name.clone(), states: n });
            }
            let vals = rows
                .iter()
                .map(|r| r.iter().map(|v| v.resolve(&lattice)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let m = LatticeMatrix::from_rows(&lattice, vals).expect("shape checked");
            matrices.insert(name.clone(), m);
        }

        Ok(CgdlModel {
            lattice,
            states: file.states.clone(),
            valuation,
            programs,
            matrices,
            queries: file.queries.clone(),
        })
    }

    /// Canonical file form; values are written as string literals.
    pub fn to_file(&self) -> ModelFile {
        let l = &self.lattice;
        let name = |s: State| self.states[s.0].clone();
        let lit = |v: LatticeValue| ValueLiteral::Text(l.literal(v));
        let valuation = self
            .valuation
            .iter()
            .map(|(p, row)| {
                let entries = row
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !l.is_zero(**v))
                    .map(|(i, &v)| (self.states[i].clone(), lit(v)))
                    .collect();
                (p.clone(), entries)
            })
            .collect();
        let programs = self
            .programs
            .iter()
            .map(|(p, r)| {
                let pairs = r
                    .pairs()
                    .map(|(s, fs)| PairField {
                        from: name(s),
                        to: TargetField::Weighted(fs.entries().iter().map(|&(t, v)| (name(t), lit(v))).collect()),
                    })
                    .collect();
                (p.clone(), pairs)
            })
            .collect();
        let matrices = self
            .matrices
            .iter()
            .map(|(p, m)| (p.clone(), m.rows().into_iter().map(|r| r.into_iter().map(lit).collect()).collect()))
            .collect();
        let lattice = match l.spec() {
            LatticeSpec::Table { .. } => LatticeField::Spec(l.spec()),
            _ => LatticeField::Name(l.name()),
        };
        ModelFile {
            lattice,
            states: self.states.clone(),
            propositions: Some(self.valuation.keys().cloned().collect()),
            valuation,
            programs,
            matrices,
            queries: self.queries.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }

    pub fn signature(&self) -> Signature {
        Signature {
            propositions: self.valuation.keys().cloned().collect(),
            programs: self.programs.keys().chain(self.matrices.keys()).cloned().collect(),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Matrix view for the concurrency-free semantics: explicit matrices
    /// where given, flattened multirelations otherwise.
    pub fn gdl_model(&self) -> GdlModel {
        let mut programs: BTreeMap<String, LatticeMatrix> = self
            .programs
            .iter()
            .map(|(n, r)| (n.clone(), LatticeMatrix::from_multirelation(r)))
            .collect();
        programs.extend(self.matrices.iter().map(|(n, m)| (n.clone(), m.clone())));
        GdlModel {
            lattice: self.lattice.clone(),
            states: self.size(),
            valuation: self.valuation.clone(),
            programs,
        }
    }
}
