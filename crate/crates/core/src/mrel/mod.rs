//! Fuzzy sets and fuzzy multirelations over a finite state set.
//!
//! A fuzzy multirelation relates a source state to fuzzy sets of target
//! states; every stored fuzzy set keeps only its support, so no membership
//! degree is ever `0` and pairs with an empty target are never stored.
//!
//! Classical binary multirelations live in [`classical`] and serve as
//! comparison oracles for the fuzzy operators.

pub mod classical;
mod compare;

pub use classical::BinaryMultirelation;
pub use compare::{compare_seq, ComparisonReport, MethodPair, SeqMethod, SeqWitness};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{ActionLattice, LatticeValue};

/// Index of a state in the ambient state set `W = {0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct State(pub usize);

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MrelError {
    #[error("state {state} is outside the state set of size {universe}")]
    StateOutOfRange { state: usize, universe: usize },
    #[error("membership value index {0} is outside the lattice carrier")]
    ValueOutOfRange(usize),
}

/// A finite-support fuzzy subset of the state set.
///
/// Entries are sorted by state and every stored degree is nonzero; absent
/// states have membership `0`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuzzySet {
    entries: Vec<(State, LatticeValue)>,
}

impl FuzzySet {
    pub fn empty() -> Self {
        FuzzySet::default()
    }

    /// Builds a fuzzy set, dropping zero degrees and joining duplicates.
    pub fn from_entries<I>(lattice: &ActionLattice, entries: I) -> Self
    where
        I: IntoIterator<Item = (State, LatticeValue)>,
    {
        let mut v: Vec<(State, LatticeValue)> = entries.into_iter().collect();
        v.sort_by_key(|&(s, _)| s);
        let mut out: Vec<(State, LatticeValue)> = Vec::with_capacity(v.len());
        for (s, x) in v {
            match out.last_mut() {
                Some((t, y)) if *t == s => *y = lattice.join(*y, x),
                _ => out.push((s, x)),
            }
        }
        out.retain(|&(_, x)| !lattice.is_zero(x));
        FuzzySet { entries: out }
    }

    /// Characteristic fuzzy set: every listed state at `⊤`.
    pub fn crisp<I: IntoIterator<Item = State>>(lattice: &ActionLattice, states: I) -> Self {
        let top = lattice.top();
        Self::from_entries(lattice, states.into_iter().map(|s| (s, top)))
    }

    fn from_dense(lattice: &ActionLattice, dense: &[LatticeValue]) -> Self {
        FuzzySet {
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, &x)| !lattice.is_zero(x))
                .map(|(i, &x)| (State(i), x))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(State, LatticeValue)] {
        &self.entries
    }

    pub fn get(&self, s: State) -> Option<LatticeValue> {
        self.entries
            .binary_search_by_key(&s, |&(t, _)| t)
            .ok()
            .map(|i| self.entries[i].1)
    }

    /// Membership degree, `0` outside the support.
    pub fn membership(&self, lattice: &ActionLattice, s: State) -> LatticeValue {
        self.get(s).unwrap_or_else(|| lattice.zero())
    }

    pub fn support(&self) -> impl Iterator<Item = State> + '_ {
        self.entries.iter().map(|&(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.entries.len() == 1
    }

    /// Zadeh union: pointwise join. The support is the union of supports.
    pub fn union(&self, other: &FuzzySet, lattice: &ActionLattice) -> FuzzySet {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, lattice.join(a[i].1, b[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        FuzzySet { entries: out }
    }

    pub fn render(&self, lattice: &ActionLattice, name: &dyn Fn(State) -> String) -> String {
        let inner: Vec<String> = self
            .entries
            .iter()
            .map(|&(s, x)| format!("{}↦{}", name(s), lattice.literal(x)))
            .collect();
        format!("{{{}}}", inner.join(", "))
    }
}

/// Which reading of the sequential-composition formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqMode {
    /// The inner product ranges over every pair of the right operand.
    Literal,
    /// The inner product ranges over pairs whose source lies in the support
    /// of the intermediate fuzzy set; a support state without outgoing pairs
    /// kills the contribution, as a missing choice does in Peleg composition.
    #[default]
    SupportGuarded,
}

impl SeqMode {
    pub const ALL: [SeqMode; 2] = [SeqMode::Literal, SeqMode::SupportGuarded];
}

impl fmt::Display for SeqMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeqMode::Literal => "literal",
            SeqMode::SupportGuarded => "support-guarded",
        })
    }
}

impl FromStr for SeqMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(SeqMode::Literal),
            "support-guarded" | "guarded" => Ok(SeqMode::SupportGuarded),
            _ => Err(format!("unknown sequential mode `{s}` (literal | support-guarded)")),
        }
    }
}

/// Result of [`FuzzyMultirelation::star`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarResult {
    pub relation: FuzzyMultirelation,
    /// `true` when the power sequence provably adds nothing further.
    pub converged: bool,
    /// Highest power computed.
    pub iterations: usize,
}

/// A fuzzy binary multirelation `R ⊆ W × A^W` over a fixed lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzyMultirelation {
    lattice: ActionLattice,
    universe: usize,
    // Indexed by source state; each list sorted and deduplicated.
    by_source: Vec<Vec<FuzzySet>>,
}

impl FuzzyMultirelation {
    pub fn new(lattice: ActionLattice, universe: usize) -> Self {
        FuzzyMultirelation {
            lattice,
            universe,
            by_source: vec![Vec::new(); universe],
        }
    }

    /// Builds a multirelation, validating states and values. Pairs whose
    /// fuzzy set has empty support are dropped.
    pub fn from_pairs<I>(lattice: ActionLattice, universe: usize, pairs: I) -> Result<Self, MrelError>
    where
        I: IntoIterator<Item = (State, FuzzySet)>,
    {
        let mut r = Self::new(lattice, universe);
        for (s, fs) in pairs {
            r.check_state(s)?;
            for &(t, x) in fs.entries() {
                r.check_state(t)?;
                if !r.lattice.contains(x) {
                    return Err(MrelError::ValueOutOfRange(x.index()));
                }
            }
            r.insert(s, fs);
        }
        Ok(r)
    }

    fn check_state(&self, s: State) -> Result<(), MrelError> {
        if s.0 < self.universe {
            Ok(())
        } else {
            Err(MrelError::StateOutOfRange {
                state: s.0,
                universe: self.universe,
            })
        }
    }

    /// `{(w, {w ↦ ⊤}) | w ∈ W}`, used as `R⁰` by the star.
    pub fn identity(lattice: ActionLattice, universe: usize) -> Self {
        let mut r = Self::new(lattice, universe);
        for w in 0..universe {
            let fs = FuzzySet::crisp(&r.lattice, [State(w)]);
            r.by_source[w].push(fs);
        }
        r
    }

    /// Inserts a pair; returns `false` if it was already present or empty.
    pub fn insert(&mut self, source: State, target: FuzzySet) -> bool {
        assert!(source.0 < self.universe, "source state out of range");
        if target.is_empty() {
            return false;
        }
        let row = &mut self.by_source[source.0];
        match row.binary_search(&target) {
            Ok(_) => false,
            Err(i) => {
                row.insert(i, target);
                true
            }
        }
    }

    pub fn lattice(&self) -> &ActionLattice {
        &self.lattice
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Fuzzy sets related to `source`, in canonical order.
    pub fn targets(&self, source: State) -> &[FuzzySet] {
        &self.by_source[source.0]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (State, &FuzzySet)> {
        self.by_source
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |fs| (State(i), fs)))
    }

    pub fn len(&self) -> usize {
        self.by_source.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_source.iter().all(Vec::is_empty)
    }

    pub fn contains(&self, source: State, target: &FuzzySet) -> bool {
        self.by_source[source.0].binary_search(target).is_ok()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.pairs().all(|(s, fs)| other.contains(s, fs))
    }

    /// Every pair relates its source to a single state.
    pub fn has_singleton_supports(&self) -> bool {
        self.pairs().all(|(_, fs)| fs.is_singleton())
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(self.universe, other.universe, "multirelations over different state sets");
        assert_eq!(self.lattice, other.lattice, "multirelations over different lattices");
    }

    /// `R ∪ S`: set union of pairs.
    pub fn union(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (row, extra) in out.by_source.iter_mut().zip(&other.by_source) {
            row.extend(extra.iter().cloned());
            row.sort();
            row.dedup();
        }
        out
    }

    /// `R ∩ S`: for every pair of pairs sharing a source `a`, emit
    /// `(a, φ_R ∪ φ_S)`. Sources present in only one operand produce nothing.
    pub fn parallel(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let mut out = Self::new(self.lattice.clone(), self.universe);
        for (a, (left, right)) in self.by_source.iter().zip(&other.by_source).enumerate() {
            let row = &mut out.by_source[a];
            for r in left {
                for s in right {
                    row.push(r.union(s, &self.lattice));
                }
            }
            row.sort();
            row.dedup();
        }
        out
    }

    /// `R · S`. For each source `a` of `R`, one pair `(a, φ)` with
    ///
    /// `φ(c) = Σ_{(a,φ_a)∈R} Π_{(b,φ_b)} φ_a(b);φ_b(c)`
    ///
    /// where the product ranges over all of `S` in [`SeqMode::Literal`] and
    /// over pairs with `b ∈ support(φ_a)` in [`SeqMode::SupportGuarded`].
    /// Zero degrees are dropped and empty results are not stored.
    ///
    /// In literal mode an empty `S` makes every product empty, so each source
    /// of `R` is related to `W` at degree `1`.
    pub fn seq(&self, other: &Self, mode: SeqMode) -> Self {
        self.assert_compatible(other);
        let l = &self.lattice;
        let n = self.universe;
        let mut out = Self::new(l.clone(), n);
        let mut acc = vec![l.zero(); n];
        let mut contrib = vec![l.one(); n];
        let mut row_b = vec![l.zero(); n];
        for (a, phis) in self.by_source.iter().enumerate() {
            if phis.is_empty() {
                continue;
            }
            acc.fill(l.zero());
            for phi_a in phis {
                contrib.fill(l.one());
                match mode {
                    SeqMode::Literal => {
                        for (b, phi_b) in other.pairs() {
                            let w = phi_a.membership(l, b);
                            densify(l, phi_b, &mut row_b);
                            for (slot, &y) in contrib.iter_mut().zip(&row_b) {
                                *slot = l.seq(*slot, l.seq(w, y));
                            }
                        }
                    }
                    SeqMode::SupportGuarded => {
                        if phi_a.support().any(|b| other.by_source[b.0].is_empty()) {
                            continue;
                        }
                        for &(b, w) in phi_a.entries() {
                            for phi_b in &other.by_source[b.0] {
                                densify(l, phi_b, &mut row_b);
                                for (slot, &y) in contrib.iter_mut().zip(&row_b) {
                                    *slot = l.seq(*slot, l.seq(w, y));
                                }
                            }
                        }
                    }
                }
                for (slot, &x) in acc.iter_mut().zip(&contrib) {
                    *slot = l.join(*slot, x);
                }
            }
            let fs = FuzzySet::from_dense(l, &acc);
            if !fs.is_empty() {
                out.by_source[a].push(fs);
            }
        }
        out
    }

    /// `R* = ⋃ Rⁿ` with `R⁰` the identity, `R¹ = R` and `Rⁿ⁺¹ = Rⁿ · R`.
    ///
    /// Iteration stops once a power is empty or repeats an earlier power
    /// (from `R¹` on), after which no later power can add pairs. If neither
    /// happens by power `max_iterations` the result is flagged unconverged.
    pub fn star(&self, mode: SeqMode, max_iterations: usize) -> StarResult {
        assert!(max_iterations >= 1, "max_iterations must be at least 1");
        let mut acc = Self::identity(self.lattice.clone(), self.universe);
        let mut seen: Vec<Self> = Vec::new();
        let mut power = self.clone();
        for n in 1..=max_iterations {
            if n > 1 {
                power = power.seq(self, mode);
            }
            if power.is_empty() || seen.contains(&power) {
                return StarResult {
                    relation: acc,
                    converged: true,
                    iterations: n,
                };
            }
            acc = acc.union(&power);
            seen.push(power.clone());
        }
        StarResult {
            relation: acc,
            converged: false,
            iterations: max_iterations,
        }
    }

    /// Default star bound `|W|² + 2`.
    pub fn default_star_limit(universe: usize) -> usize {
        universe * universe + 2
    }

    /// Strips weights, keeping supports.
    pub fn crisp_shadow(&self) -> BinaryMultirelation {
        let mut out = BinaryMultirelation::new(self.universe);
        for (s, fs) in self.pairs() {
            out.insert(s, fs.support().collect());
        }
        out
    }

    pub fn render(&self, name: &dyn Fn(State) -> String) -> String {
        let inner: Vec<String> = self
            .pairs()
            .map(|(s, fs)| format!("({}, {})", name(s), fs.render(&self.lattice, name)))
            .collect();
        format!("{{{}}}", inner.join(", "))
    }
}

impl fmt::Display for FuzzyMultirelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|s| s.to_string()))
    }
}

fn densify(l: &ActionLattice, fs: &FuzzySet, out: &mut [LatticeValue]) {
    out.fill(l.zero());
    for &(s, x) in fs.entries() {
        out[s.0] = x;
    }
}
