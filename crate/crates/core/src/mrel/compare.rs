use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use super::{BinaryMultirelation, SeqMode};
use crate::sample::{random_binary, substream};

/// Target sets drawn per source state in [`compare_seq`].
pub const MAX_TARGETS_PER_SOURCE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqMethod {
    Peleg,
    Parikh,
    Literal,
    SupportGuarded,
}

impl SeqMethod {
    pub const ALL: [SeqMethod; 4] = [
        SeqMethod::Peleg,
        SeqMethod::Parikh,
        SeqMethod::Literal,
        SeqMethod::SupportGuarded,
    ];

    /// Composes two Boolean multirelations, reading fuzzy results back as
    /// supports.
    pub fn apply(self, r: &BinaryMultirelation, s: &BinaryMultirelation) -> BinaryMultirelation {
        match self {
            SeqMethod::Peleg => r.peleg_seq(s),
            SeqMethod::Parikh => r.parikh_seq(s),
            SeqMethod::Literal => r.embed_boolean().seq(&s.embed_boolean(), SeqMode::Literal).crisp_shadow(),
            SeqMethod::SupportGuarded => r
                .embed_boolean()
                .seq(&s.embed_boolean(), SeqMode::SupportGuarded)
                .crisp_shadow(),
        }
    }
}

impl fmt::Display for SeqMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeqMethod::Peleg => "peleg",
            SeqMethod::Parikh => "parikh",
            SeqMethod::Literal => "literal",
            SeqMethod::SupportGuarded => "support-guarded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeqWitness {
    pub sample: usize,
    pub r: String,
    pub s: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodPair {
    pub left: SeqMethod,
    pub right: SeqMethod,
    pub agreements: usize,
    pub percent: f64,
    /// First disagreeing sample, by sample index.
    pub witness: Option<SeqWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub states: usize,
    pub samples: usize,
    pub seed: u64,
    pub pairs: Vec<MethodPair>,
}

impl ComparisonReport {
    pub fn pair(&self, a: SeqMethod, b: SeqMethod) -> Option<&MethodPair> {
        self.pairs
            .iter()
            .find(|p| (p.left, p.right) == (a, b) || (p.left, p.right) == (b, a))
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "sequential composition agreement: {} samples over {} states, seed {}\n",
            self.samples, self.states, self.seed
        );
        for p in &self.pairs {
            out.push_str(&format!(
                "  {:<16} {:<16} {:>7.2}%  ({}/{})\n",
                p.left.to_string(),
                p.right.to_string(),
                p.percent,
                p.agreements,
                self.samples
            ));
        }
        let witnesses: Vec<&MethodPair> = self.pairs.iter().filter(|p| p.witness.is_some()).collect();
        if !witnesses.is_empty() {
            out.push_str("witnesses:\n");
            for p in witnesses {
                let w = p.witness.as_ref().expect("filtered");
                out.push_str(&format!(
                    "  {} vs {} (sample {}): R = {}, S = {}\n    {} -> {}\n    {} -> {}\n",
                    p.left, p.right, w.sample, w.r, w.s, p.left, w.left, p.right, w.right
                ));
            }
        }
        out
    }
}

/// Samples `count` pairs of Boolean multirelations with nonempty targets over
/// `states` states and compares the four sequential compositions pairwise.
///
/// Sample `i` draws from substream `i` of `seed`, and results are merged in
/// sample order, so the report is independent of the worker count.
pub fn compare_seq(states: usize, count: usize, seed: u64) -> ComparisonReport {
    assert!(count >= 1, "count must be at least 1");
    let results: Vec<(BinaryMultirelation, BinaryMultirelation, Vec<BinaryMultirelation>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let r = random_binary(&mut rng, states, MAX_TARGETS_PER_SOURCE, true);
            let s = random_binary(&mut rng, states, MAX_TARGETS_PER_SOURCE, true);
            let outs = SeqMethod::ALL.iter().map(|m| m.apply(&r, &s)).collect();
            (r, s, outs)
        })
        .collect();

    let mut pairs = Vec::new();
    for i in 0..SeqMethod::ALL.len() {
        for j in i + 1..SeqMethod::ALL.len() {
            let mut agreements = 0;
            let mut witness = None;
            for (k, (r, s, outs)) in results.iter().enumerate() {
                if outs[i] == outs[j] {
                    agreements += 1;
                } else if witness.is_none() {
                    witness = Some(SeqWitness {
                        sample: k,
                        r: r.to_string(),
                        s: s.to_string(),
                        left: outs[i].to_string(),
                        right: outs[j].to_string(),
                    });
                }
            }
            pairs.push(MethodPair {
                left: SeqMethod::ALL[i],
                right: SeqMethod::ALL[j],
                agreements,
                percent: 100.0 * agreements as f64 / count as f64,
                witness,
            });
        }
    }
    ComparisonReport {
        states,
        samples: count,
        seed,
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mrel::State;

    fn rel(n: usize, pairs: &[(usize, &[usize])]) -> BinaryMultirelation {
        BinaryMultirelation::from_pairs(
            n,
            pairs
                .iter()
                .map(|&(s, t)| (State(s), t.iter().map(|&x| State(x)).collect())),
        )
        .unwrap()
    }

    #[test]
    fn all_agree_on_a_single_chain() {
        let r = rel(3, &[(0, &[1])]);
        let s = rel(3, &[(1, &[2])]);
        let expected = rel(3, &[(0, &[2])]);
        for m in SeqMethod::ALL {
            assert_eq!(m.apply(&r, &s), expected, "{m}");
        }
    }

    #[test]
    fn fuzzy_modes_collapse_choices() {
        let r = rel(4, &[(0, &[1])]);
        let s = rel(4, &[(1, &[2]), (1, &[3])]);
        assert_eq!(SeqMethod::Peleg.apply(&r, &s).len(), 2);
        assert!(SeqMethod::Literal.apply(&r, &s).len() <= 1);
        assert!(SeqMethod::SupportGuarded.apply(&r, &s).len() <= 1);
    }

    #[test]
    fn all_agree_on_empty_inputs() {
        let e = BinaryMultirelation::new(3);
        for m in SeqMethod::ALL {
            assert!(m.apply(&e, &e).is_empty());
        }
    }

    #[test]
    fn report_is_reproducible() {
        let a = compare_seq(3, 60, 11);
        let b = compare_seq(3, 60, 11);
        assert_eq!(a, b);
        assert_eq!(a.pairs.len(), 6);
        assert!(a.pairs.iter().all(|p| (p.agreements == a.samples) == p.witness.is_none()));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| compare_seq(3, 60, 11));
        assert_eq!(a, c);
    }
}
