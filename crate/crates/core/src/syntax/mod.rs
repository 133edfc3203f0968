//! Programs and formulas: abstract syntax, parser and printer.
//!
//! Surface syntax, loosest binding first:
//!
//! | programs        | formulas                 |
//! |-----------------|--------------------------|
//! | `a + b` choice  | `p <-> q` (left)         |
//! | `a & b` parallel| `p -> q` (right)         |
//! | `a ; b` seq     | `p \| q`                 |
//! | `a*` star       | `p & q`                  |
//! |                 | `<a>p`, `[a]p`           |
//!
//! Binary program operators associate to the left. The parser also accepts
//! `∩ ∧ ∨ → ↔ ⟨ ⟩ ⊤ ⊥`; the printer emits ASCII only.

mod parse;

pub use parse::{parse_formula, parse_program, ParseError};

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Program {
    Atomic(String),
    Seq(Box<Program>, Box<Program>),
    Par(Box<Program>, Box<Program>),
    Choice(Box<Program>, Box<Program>),
    Star(Box<Program>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bot,
    Prop(String),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Diamond(Program, Box<Formula>),
    Box(Program, Box<Formula>),
}

impl Program {
    pub fn atomic(name: impl Into<String>) -> Self {
        Program::Atomic(name.into())
    }

    pub fn seq(a: Program, b: Program) -> Self {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Program, b: Program) -> Self {
        Program::Par(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Program, b: Program) -> Self {
        Program::Choice(Box::new(a), Box::new(b))
    }

    pub fn star(a: Program) -> Self {
        Program::Star(Box::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Program::Atomic(_))
    }

    pub fn has_parallel(&self) -> bool {
        match self {
            Program::Atomic(_) => false,
            Program::Par(..) => true,
            Program::Seq(a, b) | Program::Choice(a, b) => a.has_parallel() || b.has_parallel(),
            Program::Star(a) => a.has_parallel(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Program::Atomic(n) => {
                out.insert(n);
            }
            Program::Seq(a, b) | Program::Par(a, b) | Program::Choice(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Program::Star(a) => a.collect_atoms(out),
        }
    }

    /// Replaces atomic names via `f`.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Program) -> Program {
        match self {
            Program::Atomic(n) => f(n),
            Program::Seq(a, b) => Program::seq(a.substitute(f), b.substitute(f)),
            Program::Par(a, b) => Program::par(a.substitute(f), b.substitute(f)),
            Program::Choice(a, b) => Program::choice(a.substitute(f), b.substitute(f)),
            Program::Star(a) => Program::star(a.substitute(f)),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Program::Choice(..) => 1,
            Program::Par(..) => 2,
            Program::Seq(..) => 3,
            Program::Star(_) => 4,
            Program::Atomic(_) => 5,
        }
    }

    fn write_at(&self, out: &mut String, min: u8) {
        let paren = self.prec() < min;
        if paren {
            out.push('(');
        }
        match self {
            Program::Atomic(n) => out.push_str(n),
            Program::Star(a) => {
                a.write_at(out, 4);
                out.push('*');
            }
            Program::Seq(a, b) | Program::Par(a, b) | Program::Choice(a, b) => {
                let p = self.prec();
                let op = match self {
                    Program::Seq(..) => " ; ",
                    Program::Par(..) => " & ",
                    _ => " + ",
                };
                a.write_at(out, p);
                out.push_str(op);
                b.write_at(out, p + 1);
            }
        }
        if paren {
            out.push(')');
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write_at(&mut s, 0);
        s
    }
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn diamond(p: Program, a: Formula) -> Self {
        Formula::Diamond(p, Box::new(a))
    }

    pub fn boxed(p: Program, a: Formula) -> Self {
        Formula::Box(p, Box::new(a))
    }

    pub fn propositions(&self) -> BTreeSet<&str> {
        let mut props = BTreeSet::new();
        let mut progs = BTreeSet::new();
        self.collect(&mut props, &mut progs);
        props
    }

    /// Atomic program names occurring in modalities.
    pub fn programs(&self) -> BTreeSet<&str> {
        let mut props = BTreeSet::new();
        let mut progs = BTreeSet::new();
        self.collect(&mut props, &mut progs);
        progs
    }

    fn collect<'a>(&'a self, props: &mut BTreeSet<&'a str>, progs: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Prop(n) => {
                props.insert(n);
            }
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect(props, progs);
                b.collect(props, progs);
            }
            Formula::Diamond(p, a) | Formula::Box(p, a) => {
                p.collect_atoms(progs);
                a.collect(props, progs);
            }
        }
    }

    pub fn has_parallel(&self) -> bool {
        match self {
            Formula::Top | Formula::Bot | Formula::Prop(_) => false,
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_parallel() || b.has_parallel()
            }
            Formula::Diamond(p, a) | Formula::Box(p, a) => p.has_parallel() || a.has_parallel(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Prop(_) => 1,
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Diamond(_, a) | Formula::Box(_, a) => 1 + a.size(),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Diamond(..) | Formula::Box(..) => 5,
            Formula::Top | Formula::Bot | Formula::Prop(_) => 6,
        }
    }

    fn write_at(&self, out: &mut String, min: u8) {
        let paren = self.prec() < min;
        if paren {
            out.push('(');
        }
        match self {
            Formula::Top => out.push_str("true"),
            Formula::Bot => out.push_str("false"),
            Formula::Prop(n) => out.push_str(n),
            Formula::Diamond(p, a) => {
                out.push('<');
                p.write_at(out, 0);
                out.push('>');
                a.write_at(out, 5);
            }
            Formula::Box(p, a) => {
                out.push('[');
                p.write_at(out, 0);
                out.push(']');
                a.write_at(out, 5);
            }
            Formula::Implies(a, b) => {
                a.write_at(out, 3);
                out.push_str(" -> ");
                b.write_at(out, 2);
            }
            Formula::Iff(a, b) | Formula::Or(a, b) | Formula::And(a, b) => {
                let p = self.prec();
                let op = match self {
                    Formula::Iff(..) => " <-> ",
                    Formula::Or(..) => " | ",
                    _ => " & ",
                };
                a.write_at(out, p);
                out.push_str(op);
                b.write_at(out, p + 1);
            }
        }
        if paren {
            out.push(')');
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write_at(&mut s, 0);
        s
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
