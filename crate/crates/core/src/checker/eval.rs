use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CgdlModel;
use crate::lattice::{ActionLattice, LatticeValue};
use crate::mrel::{FuzzyMultirelation, SeqMode};
use crate::syntax::{Formula, Program};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("undeclared program `{0}`")]
    UnknownProgram(String),
    #[error("undeclared proposition `{0}`")]
    UnknownProposition(String),
    #[error("state `{0}` is not in the model")]
    UnknownState(String),
}

/// How diamond modalities aggregate over the states of a fuzzy set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiamondMode {
    /// `Σ_φ Π_{u ∈ supp φ} φ(u);(u ⊨ ρ)`
    #[default]
    Definition,
    /// `Σ_φ Σ_{u ∈ supp φ} φ(u);(u ⊨ ρ)`
    ProofForm,
}

impl DiamondMode {
    pub const ALL: [DiamondMode; 2] = [DiamondMode::Definition, DiamondMode::ProofForm];
}

impl fmt::Display for DiamondMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiamondMode::Definition => "definition",
            DiamondMode::ProofForm => "proof-form",
        })
    }
}

impl FromStr for DiamondMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "definition" => Ok(DiamondMode::Definition),
            "proof-form" => Ok(DiamondMode::ProofForm),
            _ => Err(format!("unknown diamond mode `{s}` (definition | proof-form)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalModes {
    pub seq: SeqMode,
    pub diamond: DiamondMode,
    /// Star iteration bound; `None` means `|W|² + 2`.
    pub star_limit: Option<usize>,
}

impl EvalModes {
    pub fn new(seq: SeqMode, diamond: DiamondMode) -> Self {
        EvalModes {
            seq,
            diamond,
            star_limit: None,
        }
    }

    /// The four seq × diamond combinations.
    pub fn all() -> Vec<EvalModes> {
        SeqMode::ALL
            .iter()
            .flat_map(|&s| DiamondMode::ALL.iter().map(move |&d| EvalModes::new(s, d)))
            .collect()
    }

    pub fn with_star_limit(self, limit: usize) -> Self {
        EvalModes {
            star_limit: Some(limit),
            ..self
        }
    }
}

impl fmt::Display for EvalModes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq={} diamond={}", self.seq, self.diamond)
    }
}

/// A program's denotation and whether every star inside it converged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    pub relation: FuzzyMultirelation,
    pub converged: bool,
}

/// One row of an evaluation trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub formula: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub value: LatticeValue,
    pub trace: Option<Vec<TraceRow>>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validity {
    pub values: Vec<LatticeValue>,
    pub valid: bool,
    pub converged: bool,
}

/// Evaluates formulas over a fixed set of program interpretations.
///
/// Program denotations are cached, so one evaluator can be reused across
/// many valuations over the same programs.
pub struct Evaluator<'a> {
    lattice: &'a ActionLattice,
    universe: usize,
    programs: &'a BTreeMap<String, FuzzyMultirelation>,
    modes: EvalModes,
    cache: HashMap<Program, Rc<Interpretation>>,
}

type Valuation = BTreeMap<String, Vec<LatticeValue>>;

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a CgdlModel, modes: EvalModes) -> Self {
        Self::from_parts(&model.lattice, model.size(), &model.programs, modes)
    }

    pub fn from_parts(
        lattice: &'a ActionLattice,
        universe: usize,
        programs: &'a BTreeMap<String, FuzzyMultirelation>,
        modes: EvalModes,
    ) -> Self {
        Evaluator {
            lattice,
            universe,
            programs,
            modes,
            cache: HashMap::new(),
        }
    }

    pub fn modes(&self) -> EvalModes {
        self.modes
    }

    fn star_limit(&self) -> usize {
        self.modes
            .star_limit
            .unwrap_or_else(|| FuzzyMultirelation::default_star_limit(self.universe))
    }

    pub fn program(&mut self, p: &Program) -> Result<Rc<Interpretation>, EvalError> {
        if let Some(hit) = self.cache.get(p) {
            return Ok(Rc::clone(hit));
        }
        let out = match p {
            Program::Atomic(n) => Interpretation {
                relation: self
                    .programs
                    .get(n)
                    .cloned()
                    .ok_or_else(|| EvalError::UnknownProgram(n.clone()))?,
                converged: true,
            },
            Program::Seq(a, b) | Program::Par(a, b) | Program::Choice(a, b) => {
                let (x, y) = (self.program(a)?, self.program(b)?);
                let relation = match p {
                    Program::Seq(..) => x.relation.seq(&y.relation, self.modes.seq),
                    Program::Par(..) => x.relation.parallel(&y.relation),
                    _ => x.relation.union(&y.relation),
                };
                Interpretation {
                    relation,
                    converged: x.converged && y.converged,
                }
            }
            Program::Star(a) => {
                let x = self.program(a)?;
                let st = x.relation.star(self.modes.seq, self.star_limit());
                Interpretation {
                    relation: st.relation,
                    converged: x.converged && st.converged,
                }
            }
        };
        let out = Rc::new(out);
        self.cache.insert(p.clone(), Rc::clone(&out));
        Ok(out)
    }

    /// Values at every state, plus the convergence flag.
    pub fn eval(&mut self, valuation: &Valuation, f: &Formula) -> Result<(Vec<LatticeValue>, bool), EvalError> {
        let mut converged = true;
        let v = self.eval_inner(valuation, f, &mut converged, &mut None)?;
        Ok((v, converged))
    }

    pub fn eval_traced(
        &mut self,
        valuation: &Valuation,
        f: &Formula,
    ) -> Result<(Vec<LatticeValue>, bool, Vec<TraceRow>), EvalError> {
        let mut converged = true;
        let mut rows = Some(Vec::new());
        let v = self.eval_inner(valuation, f, &mut converged, &mut rows)?;
        Ok((v, converged, rows.unwrap_or_default()))
    }

    fn eval_inner(
        &mut self,
        valuation: &Valuation,
        f: &Formula,
        converged: &mut bool,
        trace: &mut Option<Vec<TraceRow>>,
    ) -> Result<Vec<LatticeValue>, EvalError> {
        let l = self.lattice;
        let n = self.universe;
        let out: Vec<LatticeValue> = match f {
            Formula::Top => vec![l.top(); n],
            Formula::Bot => vec![l.bottom(); n],
            Formula::Prop(p) => valuation
                .get(p)
                .cloned()
                .ok_or_else(|| EvalError::UnknownProposition(p.clone()))?,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                let x = self.eval_inner(valuation, a, converged, trace)?;
                let y = self.eval_inner(valuation, b, converged, trace)?;
                x.into_iter()
                    .zip(y)
                    .map(|(x, y)| match f {
                        Formula::And(..) => l.meet(x, y),
                        Formula::Or(..) => l.join(x, y),
                        Formula::Implies(..) => l.residuum(x, y),
                        _ => l.seq(l.residuum(x, y), l.residuum(y, x)),
                    })
                    .collect()
            }
            Formula::Diamond(p, a) | Formula::Box(p, a) => {
                let interp = self.program(p)?;
                *converged &= interp.converged;
                let v = self.eval_inner(valuation, a, converged, trace)?;
                let r = &interp.relation;
                (0..n)
                    .map(|w| {
                        let phis = r.targets(crate::mrel::State(w));
                        match (f, self.modes.diamond) {
                            (Formula::Box(..), _) => l.product(phis.iter().flat_map(|phi| {
                                phi.entries().iter().map(|&(u, x)| l.residuum(x, v[u.0]))
                            })),
                            (_, DiamondMode::Definition) => l.sum(phis.iter().map(|phi| {
                                l.product(phi.entries().iter().map(|&(u, x)| l.seq(x, v[u.0])))
                            })),
                            (_, DiamondMode::ProofForm) => l.sum(phis.iter().flat_map(|phi| {
                                phi.entries().iter().map(|&(u, x)| l.seq(x, v[u.0]))
                            })),
                        }
                    })
                    .collect()
            }
        };
        if let Some(rows) = trace {
            let formula = f.render();
            if !rows.iter().any(|r| r.formula == formula) {
                rows.push(TraceRow {
                    formula,
                    values: out.iter().map(|&v| l.literal(v)).collect(),
                });
            }
        }
        Ok(out)
    }
}

pub fn interpret_program(model: &CgdlModel, p: &Program, modes: EvalModes) -> Result<Interpretation, EvalError> {
    let mut ev = Evaluator::new(model, modes);
    Ok((*ev.program(p)?).clone())
}

/// Satisfaction degree at state index `w`, with an evaluation trace if asked.
pub fn sat(model: &CgdlModel, w: usize, f: &Formula, modes: EvalModes, trace: bool) -> Result<SatResult, EvalError> {
    if w >= model.size() {
        return Err(EvalError::UnknownState(w.to_string()));
    }
    let mut ev = Evaluator::new(model, modes);
    if trace {
        let (v, converged, rows) = ev.eval_traced(&model.valuation, f)?;
        Ok(SatResult {
            value: v[w],
            trace: Some(rows),
            converged,
        })
    } else {
        let (v, converged) = ev.eval(&model.valuation, f)?;
        Ok(SatResult {
            value: v[w],
            trace: None,
            converged,
        })
    }
}

pub fn sat_all(model: &CgdlModel, f: &Formula, modes: EvalModes) -> Result<(Vec<LatticeValue>, bool), EvalError> {
    Evaluator::new(model, modes).eval(&model.valuation, f)
}

/// Validity in one model: the value is `⊤` at every state.
pub fn validity(model: &CgdlModel, f: &Formula, modes: EvalModes) -> Result<Validity, EvalError> {
    let (values, converged) = sat_all(model, f, modes)?;
    let top = model.lattice.top();
    Ok(Validity {
        valid: values.iter().all(|&v| v == top),
        values,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_program};

    fn model() -> CgdlModel {
        CgdlModel::from_json(
            r#"{
                "lattice": "godel:3",
                "states": ["w1", "w2"],
                "valuation": {"p": {"w1": "1/2", "w2": "1"}},
                "programs": {"a": [{"from": "w1", "to": {"w1": "1/2", "w2": "1"}}]}
            }"#,
        )
        .unwrap()
    }

    fn value(m: &CgdlModel, f: &str, modes: EvalModes) -> String {
        let r = sat(m, 0, &parse_formula(f).unwrap(), modes, false).unwrap();
        m.lattice.literal(r.value)
    }

    #[test]
    fn graded_modalities() {
        let m = model();
        let def = EvalModes::default();
        assert_eq!(value(&m, "<a>p", def), "1/2");
        assert_eq!(value(&m, "[a]p", def), "1");
        let proof = EvalModes::new(SeqMode::SupportGuarded, DiamondMode::ProofForm);
        assert_eq!(value(&m, "<a>p", proof), "1");
    }

    #[test]
    fn constants_and_units() {
        let m = model();
        let def = EvalModes::default();
        assert_eq!(value(&m, "true", def), "1");
        assert_eq!(value(&m, "p | false", def), value(&m, "p", def));
        assert_eq!(value(&m, "<a>false", def), "0");
        // w2 has no executions: empty sum and empty product.
        let f = parse_formula("<a>true").unwrap();
        assert_eq!(sat(&m, 1, &f, def, false).unwrap().value, m.lattice.bottom());
        let f = parse_formula("[a]false").unwrap();
        assert_eq!(sat(&m, 1, &f, def, false).unwrap().value, m.lattice.top());
    }

    #[test]
    fn connectives() {
        let m = model();
        let def = EvalModes::default();
        assert_eq!(value(&m, "p & true", def), "1/2");
        assert_eq!(value(&m, "p -> false", def), "0");
        assert_eq!(value(&m, "p <-> p", def), "1");
        assert_eq!(value(&m, "p <-> true", def), "1/2");
    }

    #[test]
    fn validity_examples() {
        let m = model();
        let def = EvalModes::default();
        assert!(validity(&m, &Formula::Top, def).unwrap().valid);
        assert!(!validity(&m, &Formula::Bot, def).unwrap().valid);
        assert!(validity(&m, &parse_formula("<a>false <-> false").unwrap(), def).unwrap().valid);
    }

    #[test]
    fn interpretation() {
        let m = model();
        let def = EvalModes::default();
        let a = interpret_program(&m, &parse_program("a").unwrap(), def).unwrap();
        assert_eq!(a.relation, m.programs["a"]);
        let aa = interpret_program(&m, &parse_program("a + a").unwrap(), def).unwrap();
        assert_eq!(aa.relation, m.programs["a"]);
        let st = interpret_program(&m, &parse_program("a*").unwrap(), def).unwrap();
        assert!(st.converged);
        assert!(m.programs["a"].is_subset(&st.relation));
    }

    #[test]
    fn unknown_names() {
        let m = model();
        let def = EvalModes::default();
        let f = parse_formula("<b>p").unwrap();
        assert_eq!(sat(&m, 0, &f, def, false), Err(EvalError::UnknownProgram("b".into())));
        let f = parse_formula("q").unwrap();
        assert_eq!(sat(&m, 0, &f, def, false), Err(EvalError::UnknownProposition("q".into())));
    }

    #[test]
    fn trace_lists_subformulas() {
        let m = model();
        let f = parse_formula("<a>p & p").unwrap();
        let r = sat(&m, 0, &f, EvalModes::default(), true).unwrap();
        let rows = r.trace.unwrap();
        let names: Vec<&str> = rows.iter().map(|r| r.formula.as_str()).collect();
        assert_eq!(names, ["p", "<a>p", "<a>p & p"]);
        assert_eq!(rows[1].values, ["1/2", "0"]);
    }
}
