//! Independent reference implementations used as test oracles.
//!
//! Everything here works on plain bitmasks over at most eight states and
//! never calls into the library's semantic code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cgdl_core::checker::CgdlModel;
use cgdl_core::lattice::ActionLattice;
use cgdl_core::mrel::{BinaryMultirelation, FuzzyMultirelation, FuzzySet, State};
use cgdl_core::syntax::{Formula, Program};

pub type Mask = u8;

/// A crisp multirelation: per source, a set of target bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rel {
    pub n: usize,
    pub rows: Vec<BTreeSet<Mask>>,
}

impl Rel {
    pub fn empty(n: usize) -> Self {
        Rel { n, rows: vec![BTreeSet::new(); n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut r = Rel::empty(n);
        for w in 0..n {
            r.rows[w].insert(1 << w);
        }
        r
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(BTreeSet::is_empty)
    }

    pub fn union(&self, o: &Rel) -> Rel {
        let mut r = self.clone();
        for (row, extra) in r.rows.iter_mut().zip(&o.rows) {
            row.extend(extra.iter().copied());
        }
        r
    }

    pub fn parallel(&self, o: &Rel) -> Rel {
        let mut r = Rel::empty(self.n);
        for w in 0..self.n {
            for &x in &self.rows[w] {
                for &y in &o.rows[w] {
                    r.rows[w].insert(x | y);
                }
            }
        }
        r
    }

    /// Boolean guarded composition: one target per source, the union over
    /// `(w, T) ∈ self` of the intersection of every `o`-target of every
    /// `u ∈ T`, skipping `T` when some `u ∈ T` has no `o`-target.
    pub fn guarded_seq(&self, o: &Rel) -> Rel {
        let full: Mask = if self.n == 8 { 0xff } else { (1u8 << self.n) - 1 };
        let mut r = Rel::empty(self.n);
        for w in 0..self.n {
            let mut acc: Mask = 0;
            for &t in &self.rows[w] {
                let members: Vec<usize> = (0..self.n).filter(|u| t >> u & 1 == 1).collect();
                if members.iter().any(|&u| o.rows[u].is_empty()) {
                    continue;
                }
                let mut inter = full;
                for &u in &members {
                    for &x in &o.rows[u] {
                        inter &= x;
                    }
                }
                acc |= inter;
            }
            if acc != 0 {
                r.rows[w].insert(acc);
            }
        }
        r
    }

    /// Peleg composition: glue one chosen `o`-target per intermediate state.
    pub fn peleg_seq(&self, o: &Rel) -> Rel {
        let mut r = Rel::empty(self.n);
        for w in 0..self.n {
            for &t in &self.rows[w] {
                let mut partial: BTreeSet<Mask> = BTreeSet::from([0]);
                for u in (0..self.n).filter(|u| t >> u & 1 == 1) {
                    let mut next = BTreeSet::new();
                    for &acc in &partial {
                        for &x in &o.rows[u] {
                            next.insert(acc | x);
                        }
                    }
                    partial = next;
                }
                r.rows[w].extend(partial);
            }
        }
        r
    }

    /// Union of all guarded powers, `R⁰` the identity; runs until a power
    /// is empty or repeats.
    pub fn star(&self) -> Rel {
        let mut acc = Rel::identity(self.n);
        let mut seen: BTreeSet<Rel> = BTreeSet::new();
        let mut power = self.clone();
        while !power.is_empty() && seen.insert(power.clone()) {
            acc = acc.union(&power);
            power = power.guarded_seq(self);
        }
        acc
    }

    pub fn to_fuzzy(&self, l: &ActionLattice) -> FuzzyMultirelation {
        let mut r = FuzzyMultirelation::new(l.clone(), self.n);
        for (w, row) in self.rows.iter().enumerate() {
            for &t in row {
                r.insert(State(w), FuzzySet::crisp(l, states(t, self.n)));
            }
        }
        r
    }

    pub fn to_binary(&self) -> BinaryMultirelation {
        let mut r = BinaryMultirelation::new(self.n);
        for (w, row) in self.rows.iter().enumerate() {
            for &t in row {
                r.insert(State(w), states(t, self.n).collect());
            }
        }
        r
    }

    pub fn from_binary(b: &BinaryMultirelation) -> Rel {
        let mut r = Rel::empty(b.universe());
        for (w, t) in b.pairs() {
            r.rows[w.0].insert(t.iter().fold(0, |m, s| m | 1 << s.0));
        }
        r
    }

    /// Reads the supports of a fuzzy multirelation.
    pub fn from_fuzzy(f: &FuzzyMultirelation) -> Rel {
        let mut r = Rel::empty(f.universe());
        for (w, t) in f.pairs() {
            r.rows[w.0].insert(t.support().fold(0, |m, s| m | 1 << s.0));
        }
        r
    }

    /// Pairs `(w, v)` with `v` in some target of `w`.
    pub fn flatten(&self) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; self.n]; self.n];
        for (w, row) in self.rows.iter().enumerate() {
            for &t in row {
                for v in 0..self.n {
                    if t >> v & 1 == 1 {
                        m[w][v] = true;
                    }
                }
            }
        }
        m
    }
}

fn states(t: Mask, n: usize) -> impl Iterator<Item = State> {
    (0..n).filter(move |u| t >> u & 1 == 1).map(State)
}

/// Every nonempty subset of `0..n` with at most `k` members.
pub fn small_subsets(n: usize, k: usize) -> Vec<Mask> {
    (1..(1u16 << n)).map(|m| m as Mask).filter(|m| m.count_ones() as usize <= k).collect()
}

/// Every crisp multirelation whose per-source target set is any subset of
/// `targets`.
pub fn all_relations(n: usize, targets: &[Mask]) -> Vec<Rel> {
    let per_source: Vec<BTreeSet<Mask>> = (0..1u32 << targets.len())
        .map(|bits| targets.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &t)| t).collect())
        .collect();
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        out.push(Rel {
            n,
            rows: digits.iter().map(|&d| per_source[d].clone()).collect(),
        });
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            digits[i] += 1;
            if digits[i] < per_source.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Boolean CPDL model over bitmasks.
#[derive(Debug, Clone)]
pub struct BoolModel {
    pub n: usize,
    pub props: BTreeMap<String, Mask>,
    pub progs: BTreeMap<String, Rel>,
}

impl BoolModel {
    pub fn full(&self) -> Mask {
        if self.n == 8 {
            0xff
        } else {
            (1u8 << self.n) - 1
        }
    }

    pub fn program(&self, p: &Program) -> Rel {
        match p {
            Program::Atomic(a) => self.progs.get(a).cloned().unwrap_or_else(|| Rel::empty(self.n)),
            Program::Seq(x, y) => self.program(x).guarded_seq(&self.program(y)),
            Program::Par(x, y) => self.program(x).parallel(&self.program(y)),
            Program::Choice(x, y) => self.program(x).union(&self.program(y)),
            Program::Star(x) => self.program(x).star(),
        }
    }

    /// States satisfying `f`.
    pub fn sat(&self, f: &Formula) -> Mask {
        let full = self.full();
        match f {
            Formula::Top => full,
            Formula::Bot => 0,
            Formula::Prop(p) => self.props.get(p).copied().unwrap_or(0),
            Formula::Or(a, b) => self.sat(a) | self.sat(b),
            Formula::And(a, b) => self.sat(a) & self.sat(b),
            Formula::Implies(a, b) => (!self.sat(a) | self.sat(b)) & full,
            Formula::Iff(a, b) => !(self.sat(a) ^ self.sat(b)) & full,
            Formula::Diamond(p, a) => {
                let r = self.program(p);
                let s = self.sat(a);
                (0..self.n)
                    .filter(|&w| r.rows[w].iter().any(|&t| t & !s == 0))
                    .fold(0, |m, w| m | 1 << w)
            }
            Formula::Box(p, a) => {
                let r = self.program(p);
                let s = self.sat(a);
                (0..self.n)
                    .filter(|&w| r.rows[w].iter().all(|&t| t & !s == 0))
                    .fold(0, |m, w| m | 1 << w)
            }
        }
    }

    pub fn to_model(&self, l: &ActionLattice) -> CgdlModel {
        let valuation = self
            .props
            .iter()
            .map(|(p, &m)| {
                let vs = (0..self.n).map(|w| if m >> w & 1 == 1 { l.top() } else { l.bottom() }).collect();
                (p.clone(), vs)
            })
            .collect();
        let programs = self.progs.iter().map(|(a, r)| (a.clone(), r.to_fuzzy(l))).collect();
        CgdlModel::new(l.clone(), cgdl_core::checker::state_names(self.n), valuation, programs)
    }
}

/// Reflexive-transitive closure by repeated breadth-first search.
pub fn closure(m: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = m.len();
    let mut out = vec![vec![false; n]; n];
    for s in 0..n {
        let mut stack = vec![s];
        out[s][s] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if m[u][v] && !out[s][v] {
                    out[s][v] = true;
                    stack.push(v);
                }
            }
        }
    }
    out
}

/// Relational composition of Boolean matrices.
pub fn compose(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// The `index`-th `n × n` Boolean matrix, row-major bits.
pub fn bool_matrix(n: usize, index: usize) -> Vec<Vec<bool>> {
    (0..n).map(|i| (0..n).map(|j| index >> (i * n + j) & 1 == 1).collect()).collect()
}
