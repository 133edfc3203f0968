use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ActionLattice, LatticeValue};

/// Outcome of one law over the sampled tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub law: String,
    pub passed: bool,
    pub checked: u64,
    /// First failing tuple, as value literals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub lattice: String,
    pub sample_size: usize,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }

    pub fn entry(&self, law: &str) -> Option<&AuditEntry> {
        self.entries.iter().find(|e| e.law == law)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "lattice audit: {} (sample size {})\n",
            self.lattice, self.sample_size
        );
        let width = self.entries.iter().map(|e| e.law.len()).max().unwrap_or(0);
        for e in &self.entries {
            let status = if e.passed { "pass" } else { "FAIL" };
            out.push_str(&format!(
                "  {:width$}  {status}  ({} checked)",
                e.law,
                e.checked,
                width = width
            ));
            if let Some(w) = &e.witness {
                out.push_str(&format!("  witness: ({})", w.join(", ")));
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        out.push_str(&format!(
            "{} law(s), {} failed\n",
            self.entries.len(),
            failed
        ));
        out
    }
}

struct Law<'a> {
    lattice: &'a ActionLattice,
    name: &'static str,
    checked: u64,
    witness: Option<Vec<LatticeValue>>,
}

impl<'a> Law<'a> {
    fn new(lattice: &'a ActionLattice, name: &'static str) -> Self {
        Law {
            lattice,
            name,
            checked: 0,
            witness: None,
        }
    }

    fn check(&mut self, holds: bool, tuple: &[LatticeValue]) {
        self.checked += 1;
        if !holds && self.witness.is_none() {
            self.witness = Some(tuple.to_vec());
        }
    }

    fn finish(self) -> AuditEntry {
        AuditEntry {
            law: self.name.to_string(),
            passed: self.witness.is_none(),
            checked: self.checked,
            witness: self
                .witness
                .map(|w| w.iter().map(|&v| self.lattice.literal(v)).collect()),
        }
    }
}

fn for_pairs(s: &[LatticeValue], mut f: impl FnMut(LatticeValue, LatticeValue)) {
    for &a in s {
        for &b in s {
            f(a, b);
        }
    }
}

fn for_triples(s: &[LatticeValue], mut f: impl FnMut(LatticeValue, LatticeValue, LatticeValue)) {
    for &a in s {
        for &b in s {
            for &c in s {
                f(a, b, c);
            }
        }
    }
}

/// Exhaustively checks the action-lattice axioms and the auxiliary
/// properties used by the satisfaction proofs over all tuples from `sample`.
///
/// Iterated-sum properties are checked for lists of length 1 to 3.
pub fn audit_axioms(lattice: &ActionLattice, sample: &[LatticeValue]) -> AuditReport {
    assert!(!sample.is_empty(), "audit sample must be nonempty");
    let l = lattice;
    let zero = l.zero();
    let one = l.one();
    let mut entries = Vec::new();

    let mut refl = Law::new(l, "leq-reflexive");
    for &a in sample {
        refl.check(l.leq(a, a), &[a]);
    }
    entries.push(refl.finish());

    let mut antisym = Law::new(l, "leq-antisymmetric");
    for_pairs(sample, |a, b| {
        antisym.check(!(l.leq(a, b) && l.leq(b, a)) || a == b, &[a, b]);
    });
    entries.push(antisym.finish());

    let mut trans = Law::new(l, "leq-transitive");
    for_triples(sample, |a, b, c| {
        trans.check(!(l.leq(a, b) && l.leq(b, c)) || l.leq(a, c), &[a, b, c]);
    });
    entries.push(trans.finish());

    let mut join_assoc = Law::new(l, "join-associative");
    let mut meet_assoc = Law::new(l, "meet-associative");
    let mut seq_assoc = Law::new(l, "seq-associative");
    let mut dist_left = Law::new(l, "seq-distributes-over-join-left");
    let mut dist_right = Law::new(l, "seq-distributes-over-join-right");
    let mut residuation = Law::new(l, "residuation");
    for_triples(sample, |a, b, c| {
        join_assoc.check(l.join(a, l.join(b, c)) == l.join(l.join(a, b), c), &[a, b, c]);
        meet_assoc.check(l.meet(a, l.meet(b, c)) == l.meet(l.meet(a, b), c), &[a, b, c]);
        seq_assoc.check(l.seq(a, l.seq(b, c)) == l.seq(l.seq(a, b), c), &[a, b, c]);
        dist_left.check(
            l.seq(a, l.join(b, c)) == l.join(l.seq(a, b), l.seq(a, c)),
            &[a, b, c],
        );
        dist_right.check(
            l.seq(l.join(b, c), a) == l.join(l.seq(b, a), l.seq(c, a)),
            &[a, b, c],
        );
        residuation.check(
            l.leq(l.seq(a, b), c) == l.leq(b, l.residuum(a, c)),
            &[a, b, c],
        );
    });

    let mut join_comm = Law::new(l, "join-commutative");
    let mut meet_comm = Law::new(l, "meet-commutative");
    let mut absorption = Law::new(l, "absorption");
    for_pairs(sample, |a, b| {
        join_comm.check(l.join(a, b) == l.join(b, a), &[a, b]);
        meet_comm.check(l.meet(a, b) == l.meet(b, a), &[a, b]);
        absorption.check(
            l.join(a, l.meet(a, b)) == a && l.meet(a, l.join(a, b)) == a,
            &[a, b],
        );
    });

    let mut join_idem = Law::new(l, "join-idempotent");
    let mut meet_idem = Law::new(l, "meet-idempotent");
    let mut join_unit = Law::new(l, "join-unit");
    let mut seq_unit = Law::new(l, "seq-unit");
    let mut annihilation = Law::new(l, "seq-annihilation");
    let mut star_unfold = Law::new(l, "star-unfold");
    let mut star_residual = Law::new(l, "star-of-residual");
    for &a in sample {
        join_idem.check(l.join(a, a) == a, &[a]);
        meet_idem.check(l.meet(a, a) == a, &[a]);
        join_unit.check(l.join(a, zero) == a && l.join(zero, a) == a, &[a]);
        seq_unit.check(l.seq(one, a) == a && l.seq(a, one) == a, &[a]);
        annihilation.check(l.seq(a, zero) == zero && l.seq(zero, a) == zero, &[a]);
        let s = l.star(a);
        star_unfold.check(l.leq(l.join(l.join(one, a), l.seq(s, s)), s), &[a]);
        let r = l.residuum(a, a);
        star_residual.check(l.star(r) == r, &[a]);
    }

    let mut i_action = Law::new(l, "one-is-top");
    i_action.check(one == l.top(), &[one, l.top()]);

    entries.extend(
        [
            join_assoc,
            join_comm,
            join_idem,
            join_unit,
            meet_assoc,
            meet_comm,
            meet_idem,
            absorption,
            seq_assoc,
            seq_unit,
            dist_left,
            dist_right,
            annihilation,
            residuation,
            star_unfold,
            star_residual,
            i_action,
        ]
        .into_iter()
        .map(Law::finish),
    );
    entries.extend(lattice_property_check(l, sample, 3).entries);

    AuditReport {
        lattice: l.name(),
        sample_size: sample.len(),
        entries,
    }
}

/// The auxiliary properties behind the satisfaction proofs, checked over
/// all tuples from `sample` and all pairs of lists up to `max_list_len`:
///
/// * `a ≤ b & c ≤ d ⇒ a+c ≤ b+d`
/// * `a;(b·c) ≤ (a;b)·(a;c)`
/// * `Σ(aᵢ·bᵢ) ≤ (Σaᵢ)·(Σbᵢ)`
pub fn lattice_property_check(
    lattice: &ActionLattice,
    sample: &[LatticeValue],
    max_list_len: usize,
) -> AuditReport {
    assert!(!sample.is_empty(), "property sample must be nonempty");
    let l = lattice;
    let mut mono = Law::new(l, "join-monotone");
    for_pairs(sample, |a, b| {
        if !l.leq(a, b) {
            mono.checked += sample.len() as u64 * sample.len() as u64;
            return;
        }
        for_pairs(sample, |c, d| {
            mono.check(
                !l.leq(c, d) || l.leq(l.join(a, c), l.join(b, d)),
                &[a, b, c, d],
            );
        });
    });

    let mut subdist = Law::new(l, "seq-subdistributes-over-meet");
    for_triples(sample, |a, b, c| {
        subdist.check(sub_distributes(l, a, b, c), &[a, b, c]);
    });

    let mut sums = Law::new(l, "sum-of-meets-below-meet-of-sums");
    let mut buf = Vec::new();
    for len in 1..=max_list_len {
        let total = sample.len().pow(2 * len as u32);
        for code in 0..total {
            buf.clear();
            let mut c = code;
            for _ in 0..2 * len {
                buf.push(sample[c % sample.len()]);
                c /= sample.len();
            }
            let (xs, ys) = buf.split_at(len);
            sums.check(sum_of_meets_holds(l, xs, ys), &buf);
        }
    }

    AuditReport {
        lattice: l.name(),
        sample_size: sample.len(),
        entries: vec![mono.finish(), subdist.finish(), sums.finish()],
    }
}

/// Random-draw variant of [`lattice_property_check`] for large carriers.
pub fn lattice_property_check_sampled(
    lattice: &ActionLattice,
    draws: usize,
    max_list_len: usize,
    seed: u64,
) -> AuditReport {
    let l = lattice;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = l.size();
    let pick = |rng: &mut ChaCha8Rng| l.value(rng.gen_range(0..n)).expect("in carrier");
    let mut mono = Law::new(l, "join-monotone");
    let mut subdist = Law::new(l, "seq-subdistributes-over-meet");
    let mut sums = Law::new(l, "sum-of-meets-below-meet-of-sums");
    for _ in 0..draws {
        let (a, b, c, d) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
        mono.check(
            !(l.leq(a, b) && l.leq(c, d)) || l.leq(l.join(a, c), l.join(b, d)),
            &[a, b, c, d],
        );
        subdist.check(sub_distributes(l, a, b, c), &[a, b, c]);
        let len = rng.gen_range(1..=max_list_len.max(1));
        let list: Vec<LatticeValue> = (0..2 * len).map(|_| pick(&mut rng)).collect();
        let (xs, ys) = list.split_at(len);
        sums.check(sum_of_meets_holds(l, xs, ys), &list);
    }
    AuditReport {
        lattice: l.name(),
        sample_size: draws,
        entries: vec![mono.finish(), subdist.finish(), sums.finish()],
    }
}

fn sub_distributes(l: &ActionLattice, a: LatticeValue, b: LatticeValue, c: LatticeValue) -> bool {
    l.leq(l.seq(a, l.meet(b, c)), l.meet(l.seq(a, b), l.seq(a, c)))
}

fn sum_of_meets_holds(l: &ActionLattice, xs: &[LatticeValue], ys: &[LatticeValue]) -> bool {
    let lhs = l.sum(xs.iter().zip(ys).map(|(&x, &y)| l.meet(x, y)));
    let rhs = l.meet(l.sum(xs.iter().copied()), l.sum(ys.iter().copied()));
    l.leq(lhs, rhs)
}
