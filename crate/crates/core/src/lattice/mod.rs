//! Finite complete action lattices.
//!
//! Every carrier is finite, so completeness is automatic and all iterated
//! sums and products used by the satisfaction relation exist. Elements are
//! exact indices into the carrier; there is no floating point anywhere.
//!
//! Shipped instances:
//!
//! * the Boolean lattice `2`,
//! * Gödel chains `{0, 1/(n-1), ..., 1}` with `;` = min,
//! * Łukasiewicz chains on the same grid with `a;b = max(0, a+b-1)`,
//! * explicit operation tables (used for user-supplied or deliberately
//!   broken instances).
//!
//! All chains use `+` = max, `·` = min and a constant-top star, which makes
//! them I-action lattices (`1 = ⊤`).

mod audit;

pub use audit::{
    audit_axioms, lattice_property_check, lattice_property_check_sampled, AuditEntry, AuditReport,
};

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An element of a lattice carrier, stored as its index.
///
/// The derived `Ord` is index order, used only for canonical storage in
/// ordered collections. Use [`ActionLattice::leq`] for the lattice order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeValue(u16);

impl LatticeValue {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("operation `{op}` takes {expected} argument(s), got {got}")]
    Arity {
        op: LatticeOp,
        expected: usize,
        got: usize,
    },
    #[error("value index {index} is outside the carrier of size {size}")]
    OutsideCarrier { index: usize, size: usize },
    #[error("invalid value literal `{literal}`: {reason}")]
    Literal { literal: String, reason: String },
    #[error("invalid lattice: {0}")]
    Invalid(String),
}

/// The basic operations of an action lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeOp {
    Join,
    Seq,
    Meet,
    Residuum,
    Star,
}

impl LatticeOp {
    pub fn arity(self) -> usize {
        match self {
            LatticeOp::Star => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for LatticeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LatticeOp::Join => "join",
            LatticeOp::Seq => "seq",
            LatticeOp::Meet => "meet",
            LatticeOp::Residuum => "residuum",
            LatticeOp::Star => "star",
        };
        f.write_str(s)
    }
}

/// The associative operations that can be iterated (Σ and Π).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldOp {
    Join,
    Seq,
}

/// Operation tables for an explicitly given finite lattice.
///
/// Binary tables are row-major: `join[a * n + b]` is `a + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpTable {
    pub labels: Vec<String>,
    pub join: Vec<u16>,
    pub meet: Vec<u16>,
    pub seq: Vec<u16>,
    pub residuum: Vec<u16>,
    pub star: Vec<u16>,
    pub one: u16,
    bottom: u16,
    top: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Boolean,
    Godel(u16),
    Lukasiewicz(u16),
    Table(Arc<OpTable>),
}

/// A finite complete action lattice `(A, +, ;, 0, 1, *, →, ·)`.
///
/// Cheap to clone; table-backed instances share their tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionLattice {
    kind: Kind,
}

const MAX_LEVELS: usize = 4096;

impl ActionLattice {
    pub fn boolean() -> Self {
        ActionLattice {
            kind: Kind::Boolean,
        }
    }

    pub fn godel(levels: usize) -> Result<Self, LatticeError> {
        check_levels(levels)?;
        Ok(ActionLattice {
            kind: Kind::Godel(levels as u16),
        })
    }

    pub fn lukasiewicz(levels: usize) -> Result<Self, LatticeError> {
        check_levels(levels)?;
        Ok(ActionLattice {
            kind: Kind::Lukasiewicz(levels as u16),
        })
    }

    /// Builds a lattice from explicit operation tables.
    ///
    /// Only shape and closure are validated here; whether the tables satisfy
    /// the action-lattice laws is what [`audit_axioms`] is for. The order is
    /// induced by `join`, and `0`/`⊥`, `⊤` are located from it.
    pub fn from_table(
        labels: Vec<String>,
        join: Vec<Vec<usize>>,
        meet: Vec<Vec<usize>>,
        seq: Vec<Vec<usize>>,
        residuum: Vec<Vec<usize>>,
        star: Vec<usize>,
        one: usize,
    ) -> Result<Self, LatticeError> {
        let n = labels.len();
        if n == 0 || n > MAX_LEVELS {
            return Err(LatticeError::Invalid(format!(
                "table carrier must have between 1 and {MAX_LEVELS} elements"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(LatticeError::Invalid(format!("duplicate element label `{l}`")));
            }
        }
        let flat = |name: &str, rows: Vec<Vec<usize>>| -> Result<Vec<u16>, LatticeError> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(LatticeError::Invalid(format!("`{name}` table must be {n}x{n}")));
            }
            let mut out = Vec::with_capacity(n * n);
            for v in rows.into_iter().flatten() {
                if v >= n {
                    return Err(LatticeError::Invalid(format!(
                        "`{name}` table entry {v} is outside the carrier"
                    )));
                }
                out.push(v as u16);
            }
            Ok(out)
        };
        let join = flat("join", join)?;
        let meet = flat("meet", meet)?;
        let seq = flat("seq", seq)?;
        let residuum = flat("residuum", residuum)?;
        if star.len() != n || star.iter().any(|&v| v >= n) {
            return Err(LatticeError::Invalid(format!(
                "`star` table must list {n} carrier elements"
            )));
        }
        if one >= n {
            return Err(LatticeError::Invalid("`one` is outside the carrier".into()));
        }
        let leq = |a: usize, b: usize| join[a * n + b] as usize == b;
        let top = (0..n).find(|&t| (0..n).all(|x| leq(x, t)));
        let bottom = (0..n).find(|&z| (0..n).all(|x| leq(z, x)));
        let (Some(top), Some(bottom)) = (top, bottom) else {
            return Err(LatticeError::Invalid(
                "join table has no greatest or no least element".into(),
            ));
        };
        Ok(ActionLattice {
            kind: Kind::Table(Arc::new(OpTable {
                labels,
                join,
                meet,
                seq,
                residuum,
                star: star.into_iter().map(|v| v as u16).collect(),
                one: one as u16,
                bottom: bottom as u16,
                top: top as u16,
            })),
        })
    }

    /// Parses a command-line lattice name: `boolean`, `godel:N`,
    /// `lukasiewicz:N` (also `godel-chain:N`, `lukasiewicz-chain:N`).
    pub fn from_name(name: &str) -> Result<Self, LatticeError> {
        let name = name.trim();
        if name == "boolean" || name == "2" {
            return Ok(Self::boolean());
        }
        let (kind, levels) = name
            .split_once(':')
            .ok_or_else(|| LatticeError::Invalid(format!("unknown lattice `{name}`")))?;
        let levels: usize = levels
            .parse()
            .map_err(|_| LatticeError::Invalid(format!("bad level count in `{name}`")))?;
        match kind {
            "godel" | "godel-chain" => Self::godel(levels),
            "lukasiewicz" | "lukasiewicz-chain" => Self::lukasiewicz(levels),
            _ => Err(LatticeError::Invalid(format!("unknown lattice `{name}`"))),
        }
    }

    /// Short descriptor, e.g. `godel:3`.
    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Boolean => "boolean".into(),
            Kind::Godel(n) => format!("godel:{n}"),
            Kind::Lukasiewicz(n) => format!("lukasiewicz:{n}"),
            Kind::Table(t) => format!("table:{}", t.labels.len()),
        }
    }

    pub fn size(&self) -> usize {
        match &self.kind {
            Kind::Boolean => 2,
            Kind::Godel(n) | Kind::Lukasiewicz(n) => *n as usize,
            Kind::Table(t) => t.labels.len(),
        }
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self.kind, Kind::Boolean)
    }

    /// The chain's largest index, for chain kinds.
    fn chain_max(&self) -> Option<u16> {
        match &self.kind {
            Kind::Boolean => Some(1),
            Kind::Godel(n) | Kind::Lukasiewicz(n) => Some(n - 1),
            Kind::Table(_) => None,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = LatticeValue> + Clone {
        (0..self.size() as u16).map(LatticeValue)
    }

    /// Looks up a carrier element by index.
    pub fn value(&self, index: usize) -> Result<LatticeValue, LatticeError> {
        if index < self.size() {
            Ok(LatticeValue(index as u16))
        } else {
            Err(LatticeError::OutsideCarrier {
                index,
                size: self.size(),
            })
        }
    }

    pub fn contains(&self, v: LatticeValue) -> bool {
        v.index() < self.size()
    }

    pub fn bottom(&self) -> LatticeValue {
        match &self.kind {
            Kind::Table(t) => LatticeValue(t.bottom),
            _ => LatticeValue(0),
        }
    }

    /// The unit of `+`, which is the least element.
    pub fn zero(&self) -> LatticeValue {
        self.bottom()
    }

    pub fn top(&self) -> LatticeValue {
        match &self.kind {
            Kind::Table(t) => LatticeValue(t.top),
            _ => LatticeValue(self.chain_max().unwrap_or(0)),
        }
    }

    /// The unit of `;`.
    pub fn one(&self) -> LatticeValue {
        match &self.kind {
            Kind::Table(t) => LatticeValue(t.one),
            _ => self.top(),
        }
    }

    pub fn is_zero(&self, v: LatticeValue) -> bool {
        v == self.zero()
    }

    #[inline]
    pub fn join(&self, a: LatticeValue, b: LatticeValue) -> LatticeValue {
        match &self.kind {
            Kind::Table(t) => LatticeValue(t.join[self.cell(a, b)]),
            _ => a.max(b),
        }
    }

    #[inline]
    pub fn meet(&self, a: LatticeValue, b: LatticeValue) -> LatticeValue {
        match &self.kind {
            Kind::Table(t) => LatticeValue(t.meet[self.cell(a, b)]),
            _ => a.min(b),
        }
    }

    #[inline]
    pub fn seq(&self, a: LatticeValue, b: LatticeValue) -> LatticeValue {
        match &self.kind {
            Kind::Boolean | Kind::Godel(_) => a.min(b),
            Kind::Lukasiewicz(n) => LatticeValue((a.0 + b.0).saturating_sub(n - 1)),
            Kind::Table(t) => LatticeValue(t.seq[self.cell(a, b)]),
        }
    }

    #[inline]
    pub fn residuum(&self, a: LatticeValue, b: LatticeValue) -> LatticeValue {
        match &self.kind {
            Kind::Boolean | Kind::Godel(_) => {
                if a <= b {
                    self.top()
                } else {
                    b
                }
            }
            Kind::Lukasiewicz(n) => {
                let m = n - 1;
                if a <= b {
                    LatticeValue(m)
                } else {
                    LatticeValue(m - a.0 + b.0)
                }
            }
            Kind::Table(t) => LatticeValue(t.residuum[self.cell(a, b)]),
        }
    }

    #[inline]
    pub fn star(&self, a: LatticeValue) -> LatticeValue {
        match &self.kind {
            Kind::Table(t) => LatticeValue(t.star[a.index()]),
            _ => self.top(),
        }
    }

    /// `a ≤ b` iff `a + b = b`.
    #[inline]
    pub fn leq(&self, a: LatticeValue, b: LatticeValue) -> bool {
        match &self.kind {
            Kind::Table(_) => self.join(a, b) == b,
            _ => a <= b,
        }
    }

    #[inline]
    fn cell(&self, a: LatticeValue, b: LatticeValue) -> usize {
        a.index() * self.size() + b.index()
    }

    /// Applies `op` to `args` after checking arity and carrier membership.
    pub fn eval_op(
        &self,
        op: LatticeOp,
        args: &[LatticeValue],
    ) -> Result<LatticeValue, LatticeError> {
        if args.len() != op.arity() {
            return Err(LatticeError::Arity {
                op,
                expected: op.arity(),
                got: args.len(),
            });
        }
        for &a in args {
            if !self.contains(a) {
                return Err(LatticeError::OutsideCarrier {
                    index: a.index(),
                    size: self.size(),
                });
            }
        }
        Ok(match op {
            LatticeOp::Join => self.join(args[0], args[1]),
            LatticeOp::Seq => self.seq(args[0], args[1]),
            LatticeOp::Meet => self.meet(args[0], args[1]),
            LatticeOp::Residuum => self.residuum(args[0], args[1]),
            LatticeOp::Star => self.star(args[0]),
        })
    }

    /// Left fold from the unit: `0` for join, `1` for seq.
    pub fn fold<I>(&self, op: FoldOp, values: I) -> LatticeValue
    where
        I: IntoIterator<Item = LatticeValue>,
    {
        match op {
            FoldOp::Join => self.sum(values),
            FoldOp::Seq => self.product(values),
        }
    }

    /// Iterated `+` (Σ); the empty sum is `0`.
    pub fn sum<I: IntoIterator<Item = LatticeValue>>(&self, values: I) -> LatticeValue {
        values
            .into_iter()
            .fold(self.zero(), |acc, v| self.join(acc, v))
    }

    /// Iterated `;` (Π); the empty product is `1`.
    pub fn product<I: IntoIterator<Item = LatticeValue>>(&self, values: I) -> LatticeValue {
        values
            .into_iter()
            .fold(self.one(), |acc, v| self.seq(acc, v))
    }

    /// Canonical text for a value: a reduced fraction on chains
    /// (`0`, `1/2`, `1`), the element label for tables.
    pub fn literal(&self, v: LatticeValue) -> String {
        match &self.kind {
            Kind::Table(t) => t.labels[v.index()].clone(),
            _ => {
                let m = self.chain_max().unwrap_or(0);
                if m == 0 {
                    return "0".into();
                }
                let r = Ratio::new(v.0 as u64, m as u64);
                if *r.denom() == 1 {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        }
    }

    /// Parses a textual value literal.
    ///
    /// Chains accept exact rationals in `[0, 1]` on the chain grid
    /// (`"0"`, `"1"`, `"1/2"`, `"2/4"`); tables accept element labels.
    pub fn parse_literal(&self, text: &str) -> Result<LatticeValue, LatticeError> {
        let bad = |reason: &str| LatticeError::Literal {
            literal: text.to_string(),
            reason: reason.to_string(),
        };
        match &self.kind {
            Kind::Table(t) => t
                .labels
                .iter()
                .position(|l| l == text.trim())
                .map(|i| LatticeValue(i as u16))
                .ok_or_else(|| bad("not an element label of this lattice")),
            _ => {
                let m = self.chain_max().unwrap_or(0) as u64;
                let s = text.trim();
                let r: Ratio<u64> = match s.split_once('/') {
                    Some((p, q)) => {
                        let p: u64 = p.trim().parse().map_err(|_| bad("bad numerator"))?;
                        let q: u64 = q.trim().parse().map_err(|_| bad("bad denominator"))?;
                        if q == 0 {
                            return Err(bad("zero denominator"));
                        }
                        Ratio::new(p, q)
                    }
                    None => Ratio::from_integer(s.parse().map_err(|_| bad("not a rational"))?),
                };
                if r > Ratio::from_integer(1) {
                    return Err(bad("value exceeds 1"));
                }
                if m == 0 {
                    return Ok(LatticeValue(0));
                }
                let level = r * Ratio::from_integer(m);
                if !level.is_integer() {
                    return Err(bad(&format!("not on the grid of {}", self.name())));
                }
                Ok(LatticeValue(level.to_integer() as u16))
            }
        }
    }

    /// Materializes the operation tables; used to derive modified instances.
    pub fn to_table(&self) -> OpTable {
        if let Kind::Table(t) = &self.kind {
            return (**t).clone();
        }
        let n = self.size();
        let all: Vec<LatticeValue> = self.elements().collect();
        let tab = |f: &dyn Fn(LatticeValue, LatticeValue) -> LatticeValue| -> Vec<u16> {
            let mut out = Vec::with_capacity(n * n);
            for &a in &all {
                for &b in &all {
                    out.push(f(a, b).0);
                }
            }
            out
        };
        OpTable {
            labels: all.iter().map(|&v| self.literal(v)).collect(),
            join: tab(&|a, b| self.join(a, b)),
            meet: tab(&|a, b| self.meet(a, b)),
            seq: tab(&|a, b| self.seq(a, b)),
            residuum: tab(&|a, b| self.residuum(a, b)),
            star: all.iter().map(|&a| self.star(a).0).collect(),
            one: self.one().0,
            bottom: self.bottom().0,
            top: self.top().0,
        }
    }

    /// Serializable description, as used in model files.
    pub fn spec(&self) -> LatticeSpec {
        match &self.kind {
            Kind::Boolean => LatticeSpec::Boolean,
            Kind::Godel(n) => LatticeSpec::GodelChain {
                levels: *n as usize,
            },
            Kind::Lukasiewicz(n) => LatticeSpec::LukasiewiczChain {
                levels: *n as usize,
            },
            Kind::Table(t) => {
                let n = t.labels.len();
                let rows = |v: &[u16]| -> Vec<Vec<usize>> {
                    v.chunks(n)
                        .map(|r| r.iter().map(|&x| x as usize).collect())
                        .collect()
                };
                LatticeSpec::Table {
                    elements: t.labels.clone(),
                    join: rows(&t.join),
                    meet: rows(&t.meet),
                    seq: rows(&t.seq),
                    residuum: rows(&t.residuum),
                    star: t.star.iter().map(|&x| x as usize).collect(),
                    one: t.one as usize,
                }
            }
        }
    }
}

impl OpTable {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    fn rows(&self, v: &[u16]) -> Vec<Vec<usize>> {
        v.chunks(self.size())
            .map(|r| r.iter().map(|&x| x as usize).collect())
            .collect()
    }

    /// Rebuilds a lattice from (possibly edited) tables.
    pub fn build(&self) -> Result<ActionLattice, LatticeError> {
        ActionLattice::from_table(
            self.labels.clone(),
            self.rows(&self.join),
            self.rows(&self.meet),
            self.rows(&self.seq),
            self.rows(&self.residuum),
            self.star.iter().map(|&x| x as usize).collect(),
            self.one as usize,
        )
    }
}

fn check_levels(levels: usize) -> Result<(), LatticeError> {
    if levels == 0 || levels > MAX_LEVELS {
        Err(LatticeError::Invalid(format!(
            "chain length must be between 1 and {MAX_LEVELS}, got {levels}"
        )))
    } else {
        Ok(())
    }
}

/// Lattice description in model and config files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LatticeSpec {
    Boolean,
    GodelChain {
        levels: usize,
    },
    LukasiewiczChain {
        levels: usize,
    },
    /// Explicit finite tables; entries are element indices.
    Table {
        elements: Vec<String>,
        join: Vec<Vec<usize>>,
        meet: Vec<Vec<usize>>,
        seq: Vec<Vec<usize>>,
        residuum: Vec<Vec<usize>>,
        star: Vec<usize>,
        one: usize,
    },
}

impl LatticeSpec {
    pub fn build(&self) -> Result<ActionLattice, LatticeError> {
        match self {
            LatticeSpec::Boolean => Ok(ActionLattice::boolean()),
            LatticeSpec::GodelChain { levels } => ActionLattice::godel(*levels),
            LatticeSpec::LukasiewiczChain { levels } => ActionLattice::lukasiewicz(*levels),
            LatticeSpec::Table {
                elements,
                join,
                meet,
                seq,
                residuum,
                star,
                one,
            } => ActionLattice::from_table(
                elements.clone(),
                join.clone(),
                meet.clone(),
                seq.clone(),
                residuum.clone(),
                star.clone(),
                *one,
            ),
        }
    }
}

/// The catalogue of shipped instances exercised by the test suites.
pub fn catalogue() -> Vec<ActionLattice> {
    let mut out = vec![ActionLattice::boolean()];
    for n in [2, 3, 5, 11] {
        out.push(ActionLattice::godel(n).expect("valid chain"));
    }
    out.push(ActionLattice::lukasiewicz(11).expect("valid chain"));
    out
}
