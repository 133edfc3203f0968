//! Classical binary multirelations `R ⊆ W × P(W)`.

use std::collections::BTreeSet;
use std::fmt;

use super::{FuzzyMultirelation, FuzzySet, MrelError, State};
use crate::lattice::ActionLattice;

pub type StateSet = BTreeSet<State>;

/// Largest state set for which [`BinaryMultirelation::parikh_seq`] will
/// enumerate every subset of `W`.
pub const PARIKH_ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinaryMultirelation {
    universe: usize,
    pairs: BTreeSet<(State, StateSet)>,
}

impl BinaryMultirelation {
    pub fn new(universe: usize) -> Self {
        BinaryMultirelation {
            universe,
            pairs: BTreeSet::new(),
        }
    }

    pub fn from_pairs<I>(universe: usize, pairs: I) -> Result<Self, MrelError>
    where
        I: IntoIterator<Item = (State, StateSet)>,
    {
        let mut r = Self::new(universe);
        for (s, set) in pairs {
            for t in std::iter::once(&s).chain(set.iter()) {
                if t.0 >= universe {
                    return Err(MrelError::StateOutOfRange { state: t.0, universe });
                }
            }
            r.pairs.insert((s, set));
        }
        Ok(r)
    }

    pub fn insert(&mut self, source: State, target: StateSet) -> bool {
        assert!(source.0 < self.universe, "source state out of range");
        self.pairs.insert((source, target))
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn pairs(&self) -> impl Iterator<Item = (State, &StateSet)> {
        self.pairs.iter().map(|(s, t)| (*s, t))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, source: State, target: &StateSet) -> bool {
        // BTreeSet lookup needs an owned key.
        self.pairs.contains(&(source, target.clone()))
    }

    pub fn has_empty_targets(&self) -> bool {
        self.pairs.iter().any(|(_, t)| t.is_empty())
    }

    pub fn targets(&self, source: State) -> impl Iterator<Item = &StateSet> {
        self.pairs
            .range((source, StateSet::new())..)
            .take_while(move |(s, _)| *s == source)
            .map(|(_, t)| t)
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let mut out = self.clone();
        out.pairs.extend(other.pairs.iter().cloned());
        out
    }

    /// `{(a, A ∪ B) | (a, A) ∈ R, (a, B) ∈ S}`.
    pub fn parallel(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let mut out = Self::new(self.universe);
        for (a, x) in self.pairs() {
            for y in other.targets(a) {
                out.pairs.insert((a, x.union(y).cloned().collect()));
            }
        }
        out
    }

    /// Peleg composition: `(a, ⋃ f(B))` for every `(a, B) ∈ R` and every
    /// choice function `f` picking an `S`-successor set for each `b ∈ B`.
    pub fn peleg_seq(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let mut out = Self::new(self.universe);
        for (a, b_set) in self.pairs() {
            let options: Vec<Vec<&StateSet>> =
                b_set.iter().map(|&b| other.targets(b).collect()).collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            // Odometer over choice functions.
            let mut pick = vec![0usize; options.len()];
            loop {
                let mut glued = StateSet::new();
                for (opts, &i) in options.iter().zip(&pick) {
                    glued.extend(opts[i].iter().copied());
                }
                out.pairs.insert((a, glued));
                let mut k = 0;
                loop {
                    if k == pick.len() {
                        break;
                    }
                    pick[k] += 1;
                    if pick[k] < options[k].len() {
                        break;
                    }
                    pick[k] = 0;
                    k += 1;
                }
                if k == pick.len() {
                    break;
                }
            }
        }
        out
    }

    /// Parikh composition: `(a, A)` whenever some `(a, B) ∈ R` has every
    /// `b ∈ B` related to the same `A` by `S`.
    ///
    /// For `B = ∅` the condition holds vacuously, so `a` is related to every
    /// subset of `W`.
    ///
    /// # Panics
    /// If a vacuous case arises with `|W|` above [`PARIKH_ENUMERATION_LIMIT`].
    pub fn parikh_seq(&self, other: &Self) -> Self {
        assert_eq!(self.universe, other.universe);
        let n = self.universe;
        let mut out = Self::new(n);
        for (a, b_set) in self.pairs() {
            let Some(&first) = b_set.iter().next() else {
                assert!(n <= PARIKH_ENUMERATION_LIMIT, "state set too large to enumerate");
                for mask in 0u32..(1u32 << n) {
                    let set = (0..n).filter(|i| mask >> i & 1 == 1).map(State).collect();
                    out.pairs.insert((a, set));
                }
                continue;
            };
            for cand in other.targets(first) {
                if b_set.iter().all(|&b| other.contains(b, cand)) {
                    out.pairs.insert((a, cand.clone()));
                }
            }
        }
        out
    }

    /// Characteristic embedding into the Boolean lattice. Pairs with an
    /// empty target have no fuzzy counterpart and are dropped.
    pub fn embed_boolean(&self) -> FuzzyMultirelation {
        let l = ActionLattice::boolean();
        let mut out = FuzzyMultirelation::new(l.clone(), self.universe);
        for (a, set) in self.pairs() {
            out.insert(a, FuzzySet::crisp(&l, set.iter().copied()));
        }
        out
    }

    pub fn without_empty_targets(&self) -> Self {
        BinaryMultirelation {
            universe: self.universe,
            pairs: self.pairs.iter().filter(|(_, t)| !t.is_empty()).cloned().collect(),
        }
    }

    pub fn render(&self, name: &dyn Fn(State) -> String) -> String {
        let inner: Vec<String> = self
            .pairs()
            .map(|(s, t)| {
                let members: Vec<String> = t.iter().map(|&x| name(x)).collect();
                format!("({}, {{{}}})", name(s), members.join(", "))
            })
            .collect();
        format!("{{{}}}", inner.join(", "))
    }
}

impl fmt::Display for BinaryMultirelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|s| s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: State = State(0);
    const B: State = State(1);
    const C: State = State(2);
    const D: State = State(3);
    const E: State = State(4);

    fn set(xs: &[State]) -> StateSet {
        xs.iter().copied().collect()
    }

    fn rel(n: usize, pairs: &[(State, &[State])]) -> BinaryMultirelation {
        BinaryMultirelation::from_pairs(n, pairs.iter().map(|&(s, t)| (s, set(t)))).unwrap()
    }

    #[test]
    fn peleg_single_choice() {
        let r = rel(3, &[(A, &[B])]);
        let s = rel(3, &[(B, &[C])]);
        assert_eq!(r.peleg_seq(&s), rel(3, &[(A, &[C])]));
    }

    #[test]
    fn peleg_two_choices() {
        let r = rel(4, &[(A, &[B])]);
        let s = rel(4, &[(B, &[C]), (B, &[D])]);
        assert_eq!(r.peleg_seq(&s), rel(4, &[(A, &[C]), (A, &[D])]));
    }

    #[test]
    fn peleg_glues_choices() {
        let r = rel(4, &[(A, &[B, C])]);
        let s = rel(4, &[(B, &[D]), (B, &[A]), (C, &[D])]);
        assert_eq!(r.peleg_seq(&s), rel(4, &[(A, &[D]), (A, &[A, D])]));
    }

    #[test]
    fn peleg_empty_target_is_vacuous() {
        let r = rel(2, &[(A, &[])]);
        let s = rel(2, &[(B, &[A])]);
        assert_eq!(r.peleg_seq(&s), rel(2, &[(A, &[])]));
    }

    #[test]
    fn parikh_examples() {
        let r = rel(3, &[(A, &[B])]);
        let s = rel(3, &[(B, &[C])]);
        assert_eq!(r.parikh_seq(&s), rel(3, &[(A, &[C])]));

        let r = rel(5, &[(A, &[B, C])]);
        let s = rel(5, &[(B, &[D]), (C, &[E])]);
        assert!(r.parikh_seq(&s).is_empty());
    }

    #[test]
    fn parikh_empty_target_relates_to_every_subset() {
        let r = rel(3, &[(A, &[])]);
        let out = r.parikh_seq(&BinaryMultirelation::new(3));
        assert_eq!(out.len(), 8);
        assert!(out.pairs().all(|(s, _)| s == A));
    }

    #[test]
    fn parallel_unions_targets() {
        let r = rel(3, &[(A, &[B]), (B, &[A])]);
        let s = rel(3, &[(A, &[C])]);
        assert_eq!(r.parallel(&s), rel(3, &[(A, &[B, C])]));
    }

    #[test]
    fn embed_examples() {
        let r = rel(3, &[(A, &[B, C])]);
        let e = r.embed_boolean();
        let l = ActionLattice::boolean();
        assert!(e.contains(A, &FuzzySet::crisp(&l, [B, C])));
        assert_eq!(e.len(), 1);
        assert!(BinaryMultirelation::new(3).embed_boolean().is_empty());

        let with_empty = rel(3, &[(A, &[]), (B, &[C])]);
        assert_eq!(with_empty.embed_boolean().len(), 1);
        assert_eq!(with_empty.embed_boolean().crisp_shadow(), with_empty.without_empty_targets());
    }

    #[test]
    fn targets_are_scoped_to_source() {
        let r = rel(3, &[(A, &[]), (A, &[C]), (B, &[A]), (C, &[B])]);
        assert_eq!(r.targets(A).count(), 2);
        assert_eq!(r.targets(B).collect::<Vec<_>>(), vec![&set(&[A])]);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(BinaryMultirelation::from_pairs(2, [(A, set(&[C]))]).is_err());
    }
}
