//! Axiom schemes, single-model checks and counterexample search.

mod search;

pub use crate::lattice::{lattice_property_check, lattice_property_check_sampled};
pub use search::{search_counterexamples, Budget, Coverage, SearchConfig, SearchReport, SearchRow};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::checker::{CgdlModel, EvalError, EvalModes, Evaluator, ModelError, ModelFile};
use crate::lattice::{ActionLattice, LatticeValue};
use crate::syntax::{parse_formula, parse_program, Formula, ParseError, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomId {
    /// Diamond over a disjunction, atomic program, any interpretation.
    A21,
    /// As `A21`, restricted to atomic programs with singleton supports.
    A21s,
    A22,
    A23,
    A24,
    A25,
    A26,
    A27,
    /// `(ρ → ρ′) = ⊤` iff `ρ ≤ ρ′`.
    L11,
    /// `(ρ ↔ ρ′) = ⊤` iff `ρ = ρ′`.
    L12,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Both sides must agree at every state.
    Equivalence,
    /// The left side must lie below the right side at every state.
    Implication,
    /// Top value of `ρ → ρ′` must coincide with `ρ ≤ ρ′`.
    OrderLemma,
    /// Top value of `ρ ↔ ρ′` must coincide with `ρ = ρ′`.
    EqualityLemma,
}

impl AxiomId {
    pub const ALL: [AxiomId; 10] = [
        AxiomId::A21,
        AxiomId::A21s,
        AxiomId::A22,
        AxiomId::A23,
        AxiomId::A24,
        AxiomId::A25,
        AxiomId::A26,
        AxiomId::A27,
        AxiomId::L11,
        AxiomId::L12,
    ];

    /// The modal schemes, both readings of the first one included.
    pub const SCHEMES: [AxiomId; 8] = [
        AxiomId::A21,
        AxiomId::A21s,
        AxiomId::A22,
        AxiomId::A23,
        AxiomId::A24,
        AxiomId::A25,
        AxiomId::A26,
        AxiomId::A27,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxiomId::A21 => "2.1",
            AxiomId::A21s => "2.1s",
            AxiomId::A22 => "2.2",
            AxiomId::A23 => "2.3",
            AxiomId::A24 => "2.4",
            AxiomId::A25 => "2.5",
            AxiomId::A26 => "2.6",
            AxiomId::A27 => "2.7",
            AxiomId::L11 => "L1.1",
            AxiomId::L12 => "L1.2",
        }
    }

    /// Unrestricted `2.1` is reported for information only; it is not
    /// expected to hold beyond singleton supports.
    pub fn is_claimed(self) -> bool {
        self != AxiomId::A21
    }

    /// Number of program and formula metavariables.
    pub fn arity(self) -> (usize, usize) {
        match self {
            AxiomId::A21 | AxiomId::A21s | AxiomId::A22 | AxiomId::A27 => (1, 2),
            AxiomId::A23 | AxiomId::A25 | AxiomId::A26 => (2, 1),
            AxiomId::A24 => (1, 0),
            AxiomId::L11 | AxiomId::L12 => (0, 2),
        }
    }

    pub fn atomic_only(self) -> bool {
        matches!(self, AxiomId::A21 | AxiomId::A21s)
    }

    pub fn singleton_only(self) -> bool {
        self == AxiomId::A21s
    }

    pub fn polarity(self) -> Polarity {
        match self {
            AxiomId::A22 | AxiomId::A27 => Polarity::Implication,
            AxiomId::L11 => Polarity::OrderLemma,
            AxiomId::L12 => Polarity::EqualityLemma,
            _ => Polarity::Equivalence,
        }
    }

    /// Left side, right side and the whole formula.
    pub fn instantiate(self, b: &Binding) -> Result<(Formula, Formula, Formula), AxiomError> {
        let (np, nf) = self.arity();
        let need = |ok: bool| if ok { Ok(()) } else { Err(AxiomError::Binding(self, b.to_string())) };
        need(b.pi.is_some() == (np >= 1) && b.pi2.is_some() == (np >= 2))?;
        need(b.rho.is_some() == (nf >= 1) && b.rho2.is_some() == (nf >= 2))?;
        if self.atomic_only() && !b.pi.as_ref().is_some_and(Program::is_atomic) {
            return Err(AxiomError::NotAtomic(self));
        }
        let pi = || b.pi.clone().expect("checked");
        let pi2 = || b.pi2.clone().expect("checked");
        let rho = || b.rho.clone().expect("checked");
        let rho2 = || b.rho2.clone().expect("checked");
        use Formula as F;
        let (lhs, rhs) = match self {
            AxiomId::A21 | AxiomId::A21s => (
                F::diamond(pi(), F::or(rho(), rho2())),
                F::or(F::diamond(pi(), rho()), F::diamond(pi(), rho2())),
            ),
            AxiomId::A22 => (
                F::diamond(pi(), F::and(rho(), rho2())),
                F::and(F::diamond(pi(), rho()), F::diamond(pi(), rho2())),
            ),
            AxiomId::A23 => (
                F::diamond(Program::choice(pi(), pi2()), rho()),
                F::or(F::diamond(pi(), rho()), F::diamond(pi2(), rho())),
            ),
            AxiomId::A24 => (F::diamond(pi(), F::Bot), F::Bot),
            AxiomId::A25 => (
                F::diamond(Program::par(pi(), pi2()), rho()),
                F::and(F::diamond(pi(), rho()), F::diamond(pi2(), rho())),
            ),
            AxiomId::A26 => (
                F::boxed(Program::choice(pi(), pi2()), rho()),
                F::and(F::boxed(pi(), rho()), F::boxed(pi2(), rho())),
            ),
            AxiomId::A27 => (
                F::boxed(pi(), F::and(rho(), rho2())),
                F::and(F::boxed(pi(), rho()), F::boxed(pi(), rho2())),
            ),
            AxiomId::L11 | AxiomId::L12 => (rho(), rho2()),
        };
        let whole = match self.polarity() {
            Polarity::Implication | Polarity::OrderLemma => F::implies(lhs.clone(), rhs.clone()),
            _ => F::iff(lhs.clone(), rhs.clone()),
        };
        Ok((lhs, rhs, whole))
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxiomId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown axiom `{s}`"))
    }
}

impl Serialize for AxiomId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for AxiomId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum AxiomError {
    #[error("binding {1} does not fit the metavariables of {0}")]
    Binding(AxiomId, String),
    #[error("{0} needs an atomic program")]
    NotAtomic(AxiomId),
    #[error("{0} needs singleton supports, but `{1}` relates a state to a wider fuzzy set")]
    NotSingleton(AxiomId, String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Instantiation of the metavariables `π, π′, ρ, ρ′`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Binding {
    pub pi: Option<Program>,
    pub pi2: Option<Program>,
    pub rho: Option<Formula>,
    pub rho2: Option<Formula>,
}

/// Textual form of a [`Binding`], as stored in reports.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BindingText {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<String>,
}

impl Binding {
    pub fn text(&self) -> BindingText {
        BindingText {
            pi: self.pi.as_ref().map(Program::render),
            pi2: self.pi2.as_ref().map(Program::render),
            rho: self.rho.as_ref().map(Formula::render),
            rho2: self.rho2.as_ref().map(Formula::render),
        }
    }

    pub fn parse(t: &BindingText) -> Result<Self, ParseError> {
        Ok(Binding {
            pi: t.pi.as_deref().map(parse_program).transpose()?,
            pi2: t.pi2.as_deref().map(parse_program).transpose()?,
            rho: t.rho.as_deref().map(parse_formula).transpose()?,
            rho2: t.rho2.as_deref().map(parse_formula).transpose()?,
        })
    }

    /// Atomic program names, in order of first occurrence.
    pub fn atoms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |n: &str| {
            if !out.iter().any(|x| x == n) {
                out.push(n.to_string());
            }
        };
        for p in [&self.pi, &self.pi2].into_iter().flatten() {
            visit_program(p, &mut push);
        }
        for f in [&self.rho, &self.rho2].into_iter().flatten() {
            visit_formula_programs(f, &mut push);
        }
        out
    }

    /// Proposition names, in order of first occurrence.
    pub fn propositions(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for f in [&self.rho, &self.rho2].into_iter().flatten() {
            visit_formula_props(f, &mut |n: &str| {
                if !out.iter().any(|x| x == n) {
                    out.push(n.to_string());
                }
            });
        }
        out
    }

    /// Renames atomic programs and propositions.
    pub fn rename(&self, progs: &BTreeMap<String, String>, props: &BTreeMap<String, String>) -> Binding {
        let rp = |p: &Program| p.substitute(&|n| Program::atomic(progs.get(n).cloned().unwrap_or_else(|| n.to_string())));
        Binding {
            pi: self.pi.as_ref().map(rp),
            pi2: self.pi2.as_ref().map(rp),
            rho: self.rho.as_ref().map(|f| rename_formula(f, progs, props)),
            rho2: self.rho2.as_ref().map(|f| rename_formula(f, progs, props)),
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(p) = &self.pi {
            parts.push(format!("π={p}"));
        }
        if let Some(p) = &self.pi2 {
            parts.push(format!("π′={p}"));
        }
        if let Some(r) = &self.rho {
            parts.push(format!("ρ={r}"));
        }
        if let Some(r) = &self.rho2 {
            parts.push(format!("ρ′={r}"));
        }
        write!(f, "[{}]", parts.join(", "))
    }
}

fn visit_program(p: &Program, f: &mut dyn FnMut(&str)) {
    match p {
        Program::Atomic(n) => f(n),
        Program::Seq(a, b) | Program::Par(a, b) | Program::Choice(a, b) => {
            visit_program(a, f);
            visit_program(b, f);
        }
        Program::Star(a) => visit_program(a, f),
    }
}

fn visit_formula_programs(x: &Formula, f: &mut dyn FnMut(&str)) {
    match x {
        Formula::Top | Formula::Bot | Formula::Prop(_) => {}
        Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            visit_formula_programs(a, f);
            visit_formula_programs(b, f);
        }
        Formula::Diamond(p, a) | Formula::Box(p, a) => {
            visit_program(p, f);
            visit_formula_programs(a, f);
        }
    }
}

fn visit_formula_props(x: &Formula, f: &mut dyn FnMut(&str)) {
    match x {
        Formula::Top | Formula::Bot => {}
        Formula::Prop(n) => f(n),
        Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            visit_formula_props(a, f);
            visit_formula_props(b, f);
        }
        Formula::Diamond(_, a) | Formula::Box(_, a) => visit_formula_props(a, f),
    }
}

fn rename_formula(x: &Formula, progs: &BTreeMap<String, String>, props: &BTreeMap<String, String>) -> Formula {
    let rp = |p: &Program| p.substitute(&|n| Program::atomic(progs.get(n).cloned().unwrap_or_else(|| n.to_string())));
    let r = |y: &Formula| rename_formula(y, progs, props);
    match x {
        Formula::Top => Formula::Top,
        Formula::Bot => Formula::Bot,
        Formula::Prop(n) => Formula::Prop(props.get(n).cloned().unwrap_or_else(|| n.clone())),
        Formula::Or(a, b) => Formula::or(r(a), r(b)),
        Formula::And(a, b) => Formula::and(r(a), r(b)),
        Formula::Implies(a, b) => Formula::implies(r(a), r(b)),
        Formula::Iff(a, b) => Formula::iff(r(a), r(b)),
        Formula::Diamond(p, a) => Formula::diamond(rp(p), r(a)),
        Formula::Box(p, a) => Formula::boxed(rp(p), r(a)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateOutcome {
    pub state: String,
    pub lhs: String,
    pub rhs: String,
    /// Value of the whole instance.
    pub value: String,
    pub ok: bool,
}

/// Outcome of one axiom instance in one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub axiom: AxiomId,
    pub instance: String,
    pub binding: BindingText,
    pub modes: EvalModes,
    pub passed: bool,
    pub converged: bool,
    pub witness_state: Option<String>,
    pub states: Vec<StateOutcome>,
    pub model: ModelFile,
}

/// Per-state judgement for already evaluated sides.
pub(crate) fn judge(
    l: &ActionLattice,
    polarity: Polarity,
    lhs: &[LatticeValue],
    rhs: &[LatticeValue],
    whole: &[LatticeValue],
) -> Vec<bool> {
    let top = l.top();
    (0..lhs.len())
        .map(|i| match polarity {
            Polarity::Equivalence => lhs[i] == rhs[i],
            Polarity::Implication => l.leq(lhs[i], rhs[i]),
            Polarity::OrderLemma => (whole[i] == top) == l.leq(lhs[i], rhs[i]),
            Polarity::EqualityLemma => (whole[i] == top) == (lhs[i] == rhs[i]),
        })
        .collect()
}

pub(crate) struct Sides {
    pub lhs: Vec<LatticeValue>,
    pub rhs: Vec<LatticeValue>,
    pub whole: Vec<LatticeValue>,
    pub ok: Vec<bool>,
    pub converged: bool,
}

pub(crate) fn evaluate_sides(
    ev: &mut Evaluator<'_>,
    valuation: &BTreeMap<String, Vec<LatticeValue>>,
    lattice: &ActionLattice,
    polarity: Polarity,
    instance: &(Formula, Formula, Formula),
) -> Result<Sides, EvalError> {
    let (lhs, c1) = ev.eval(valuation, &instance.0)?;
    let (rhs, c2) = ev.eval(valuation, &instance.1)?;
    let (whole, c3) = ev.eval(valuation, &instance.2)?;
    let ok = judge(lattice, polarity, &lhs, &rhs, &whole);
    Ok(Sides {
        lhs,
        rhs,
        whole,
        ok,
        converged: c1 && c2 && c3,
    })
}

pub(crate) fn verdict_from(
    model: &CgdlModel,
    id: AxiomId,
    binding: &Binding,
    modes: EvalModes,
    instance: &Formula,
    sides: &Sides,
) -> Verdict {
    let l = &model.lattice;
    let states: Vec<StateOutcome> = (0..model.size())
        .map(|i| StateOutcome {
            state: model.states[i].clone(),
            lhs: l.literal(sides.lhs[i]),
            rhs: l.literal(sides.rhs[i]),
            value: l.literal(sides.whole[i]),
            ok: sides.ok[i],
        })
        .collect();
    let witness_state = states.iter().find(|s| !s.ok).map(|s| s.state.clone());
    Verdict {
        axiom: id,
        instance: instance.render(),
        binding: binding.text(),
        modes,
        passed: witness_state.is_none(),
        converged: sides.converged,
        witness_state,
        states,
        model: model.to_file(),
    }
}

pub fn check_axiom(model: &CgdlModel, id: AxiomId, binding: &Binding, modes: EvalModes) -> Result<Verdict, AxiomError> {
    let instance = id.instantiate(binding)?;
    if id.singleton_only() {
        for a in binding.atoms() {
            let r = model.programs.get(&a).ok_or_else(|| EvalError::UnknownProgram(a.clone()))?;
            if !r.has_singleton_supports() {
                return Err(AxiomError::NotSingleton(id, a));
            }
        }
    }
    let mut ev = Evaluator::new(model, modes);
    let sides = evaluate_sides(&mut ev, &model.valuation, &model.lattice, id.polarity(), &instance)?;
    Ok(verdict_from(model, id, binding, modes, &instance.2, &sides))
}

/// Re-runs a verdict from its stored model, binding and modes.
pub fn replay(v: &Verdict) -> Result<Verdict, AxiomError> {
    let model = CgdlModel::from_file(&v.model)?;
    let binding = Binding::parse(&v.binding)?;
    check_axiom(&model, v.axiom, &binding, v.modes)
}
