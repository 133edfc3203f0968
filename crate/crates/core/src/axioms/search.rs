use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_sides, verdict_from, AxiomId, Binding, Verdict};
use crate::checker::{state_names, CgdlModel, EvalModes, Evaluator};
use crate::lattice::{ActionLattice, LatticeValue};
use crate::mrel::{FuzzyMultirelation, FuzzySet, State};
use crate::sample::substream;
use crate::syntax::{Formula, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum Budget {
    /// Enumerate every model, at most `cap` per binding and state count.
    Exhaustive { cap: u64 },
    /// Draw `samples` models per binding from substreams of `seed`.
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub lattice: ActionLattice,
    pub min_states: usize,
    pub max_states: usize,
    /// Atomic program names available to bindings.
    pub programs: Vec<String>,
    pub propositions: Vec<String>,
    /// Candidates for `π, π′`; defaults to the atomic programs.
    pub program_pool: Vec<Program>,
    /// Candidates for `ρ, ρ′`; defaults to the propositions.
    pub formula_pool: Vec<Formula>,
    pub max_support: usize,
    /// Fuzzy sets related to one source, at most.
    pub max_targets: usize,
    /// Values used for valuations and (nonzero ones) for membership degrees.
    pub grid: Vec<LatticeValue>,
    pub modes: Vec<EvalModes>,
    pub axioms: Vec<AxiomId>,
    pub budget: Budget,
    /// Witnesses kept per axiom and mode.
    pub max_witnesses: usize,
}

impl SearchConfig {
    pub fn new(lattice: ActionLattice) -> Self {
        let grid = lattice.elements().collect();
        let programs = vec!["a".to_string(), "b".to_string()];
        let propositions = vec!["p".to_string(), "q".to_string()];
        SearchConfig {
            program_pool: programs.iter().map(Program::atomic).collect(),
            formula_pool: propositions.iter().map(Formula::prop).collect(),
            lattice,
            min_states: 1,
            max_states: 2,
            programs,
            propositions,
            max_support: 2,
            max_targets: 3,
            grid,
            modes: EvalModes::all(),
            axioms: AxiomId::SCHEMES.to_vec(),
            budget: Budget::Exhaustive { cap: 1_000_000 },
            max_witnesses: 3,
        }
    }

    /// Replaces the atomic names and resets both pools to them.
    pub fn with_symbols(mut self, programs: usize, propositions: usize) -> Self {
        self.programs = (0..programs).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        self.propositions = (0..propositions).map(|i| ((b'p' + i as u8) as char).to_string()).collect();
        self.program_pool = self.programs.iter().map(Program::atomic).collect();
        self.formula_pool = self.propositions.iter().map(Formula::prop).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Coverage {
    Exhaustive { models: u64 },
    /// The enumeration hit the cap before covering the space.
    Partial { models: u64 },
    Sampled { models: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchRow {
    pub axiom: AxiomId,
    pub modes: EvalModes,
    pub claimed: bool,
    pub bindings: usize,
    pub checked: u64,
    pub failures: u64,
    pub unconverged: u64,
}

impl SearchRow {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub lattice: String,
    pub min_states: usize,
    pub max_states: usize,
    pub budget: Budget,
    pub coverage: Coverage,
    pub rows: Vec<SearchRow>,
    pub witnesses: Vec<Verdict>,
}

impl SearchReport {
    /// Failures among claimed schemes.
    pub fn claimed_failures(&self) -> u64 {
        self.rows.iter().filter(|r| r.claimed).map(|r| r.failures).sum()
    }

    pub fn row(&self, axiom: AxiomId, modes: EvalModes) -> Option<&SearchRow> {
        self.rows
            .iter()
            .find(|r| r.axiom == axiom && (r.modes.seq, r.modes.diamond) == (modes.seq, modes.diamond))
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "lattice {}, states {}..={}, coverage {}\n",
            self.lattice,
            self.min_states,
            self.max_states,
            match &self.coverage {
                Coverage::Exhaustive { models } => format!("exhaustive ({models} models)"),
                Coverage::Partial { models } => format!("partial enumeration ({models} models, cap reached)"),
                Coverage::Sampled { models, seed } => format!("sampled ({models} models, seed {seed})"),
            }
        );
        out.push_str(&format!(
            "{:<6} {:<16} {:<11} {:>6} {:>10} {:>9} {:>11}\n",
            "axiom", "seq", "diamond", "result", "checked", "failures", "unconverged"
        ));
        for r in &self.rows {
            let result = match (r.passed(), r.claimed) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "fail*",
            };
            out.push_str(&format!(
                "{:<6} {:<16} {:<11} {:>6} {:>10} {:>9} {:>11}\n",
                r.axiom.as_str(),
                r.modes.seq.to_string(),
                r.modes.diamond.to_string(),
                result,
                r.checked,
                r.failures,
                r.unconverged
            ));
        }
        if self.rows.iter().any(|r| !r.claimed) {
            out.push_str("* informational: 2.1 over arbitrary supports\n");
        }
        for w in &self.witnesses {
            out.push_str(&format!(
                "witness {} [{}] {} at {}\n  model {}\n",
                w.axiom,
                w.modes,
                w.instance,
                w.witness_state.as_deref().unwrap_or("-"),
                serde_json::to_string(&w.model).expect("model serializes")
            ));
            for s in w.states.iter().filter(|s| !s.ok) {
                out.push_str(&format!("  {}: lhs {} rhs {} value {}\n", s.state, s.lhs, s.rhs, s.value));
            }
        }
        out
    }
}

/// Canonical bindings for `id` over the pools, deduplicated up to renaming.
fn bindings_for(config: &SearchConfig, id: AxiomId) -> Vec<Binding> {
    let (np, nf) = id.arity();
    let progs: Vec<&Program> = config
        .program_pool
        .iter()
        .filter(|p| !id.atomic_only() || p.is_atomic())
        .collect();
    let forms: Vec<&Formula> = config.formula_pool.iter().collect();
    let mut raw: Vec<Binding> = vec![Binding::default()];
    for slot in 0..np + nf {
        let mut next = Vec::new();
        for b in &raw {
            if slot < np {
                for &p in &progs {
                    let mut nb = b.clone();
                    *(if slot == 0 { &mut nb.pi } else { &mut nb.pi2 }) = Some(p.clone());
                    next.push(nb);
                }
            } else {
                for &f in &forms {
                    let mut nb = b.clone();
                    *(if slot == np { &mut nb.rho } else { &mut nb.rho2 }) = Some(f.clone());
                    next.push(nb);
                }
            }
        }
        raw = next;
    }
    let mut out: Vec<Binding> = Vec::new();
    for b in raw {
        let progs: BTreeMap<String, String> =
            b.atoms().into_iter().zip(config.programs.iter().cloned()).collect();
        let props: BTreeMap<String, String> =
            b.propositions().into_iter().zip(config.propositions.iter().cloned()).collect();
        let c = b.rename(&progs, &props);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// The enumeration space for one binding at one state count.
struct Space {
    universe: usize,
    atoms: Vec<String>,
    props: Vec<String>,
    fuzzy_sets: Vec<FuzzySet>,
    /// Per-source choices: index lists into `fuzzy_sets`.
    options: Vec<Vec<usize>>,
    grid: Vec<LatticeValue>,
}

impl Space {
    fn new(config: &SearchConfig, universe: usize, binding: &Binding, singleton: bool) -> Self {
        let l = &config.lattice;
        let degrees: Vec<LatticeValue> = config.grid.iter().copied().filter(|&v| !l.is_zero(v)).collect();
        let max_support = if singleton { 1 } else { config.max_support.min(universe) };
        let mut fuzzy_sets = Vec::new();
        for mask in 1u32..(1 << universe) {
            let support: Vec<usize> = (0..universe).filter(|i| mask >> i & 1 == 1).collect();
            if support.len() > max_support {
                continue;
            }
            let mut digits = vec![0usize; support.len()];
            loop {
                fuzzy_sets.push(FuzzySet::from_entries(
                    l,
                    support.iter().zip(&digits).map(|(&s, &d)| (State(s), degrees[d])),
                ));
                if !odometer(&mut digits, degrees.len()) {
                    break;
                }
            }
        }
        if degrees.is_empty() {
            fuzzy_sets.clear();
        }
        fuzzy_sets.sort();
        let mut options = Vec::new();
        for k in 0..=config.max_targets.min(fuzzy_sets.len()) {
            combinations(fuzzy_sets.len(), k, &mut options);
        }
        Space {
            universe,
            atoms: binding.atoms(),
            props: binding.propositions(),
            fuzzy_sets,
            options,
            grid: config.grid.clone(),
        }
    }

    fn program_tuples(&self) -> u128 {
        pow_sat(self.options.len() as u128, self.universe * self.atoms.len())
    }

    fn valuations(&self) -> u128 {
        pow_sat(self.grid.len() as u128, self.universe * self.props.len())
    }

    fn decode_programs(&self, lattice: &ActionLattice, mut idx: u128) -> BTreeMap<String, FuzzyMultirelation> {
        let radix = self.options.len() as u128;
        let mut out = BTreeMap::new();
        for a in &self.atoms {
            let mut r = FuzzyMultirelation::new(lattice.clone(), self.universe);
            for s in 0..self.universe {
                let choice = &self.options[(idx % radix) as usize];
                idx /= radix;
                for &f in choice {
                    r.insert(State(s), self.fuzzy_sets[f].clone());
                }
            }
            out.insert(a.clone(), r);
        }
        out
    }

    fn decode_valuation(&self, mut idx: u128) -> BTreeMap<String, Vec<LatticeValue>> {
        let radix = self.grid.len() as u128;
        let mut out = BTreeMap::new();
        for p in &self.props {
            let mut row = Vec::with_capacity(self.universe);
            for _ in 0..self.universe {
                row.push(self.grid[(idx % radix) as usize]);
                idx /= radix;
            }
            out.insert(p.clone(), row);
        }
        out
    }

    fn random_programs<R: Rng>(&self, lattice: &ActionLattice, rng: &mut R) -> BTreeMap<String, FuzzyMultirelation> {
        let n = self.options.len() as u128;
        let idx = (0..self.universe * self.atoms.len()).fold(0u128, |acc, i| {
            acc + rng.gen_range(0..n as u64) as u128 * pow_sat(n, i)
        });
        self.decode_programs(lattice, idx)
    }

    fn random_valuation<R: Rng>(&self, rng: &mut R) -> BTreeMap<String, Vec<LatticeValue>> {
        self.props
            .iter()
            .map(|p| {
                let row = (0..self.universe).map(|_| self.grid[rng.gen_range(0..self.grid.len())]).collect();
                (p.clone(), row)
            })
            .collect()
    }
}

fn pow_sat(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

fn odometer(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

fn combinations(n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

struct Job {
    axiom: AxiomId,
    binding: Binding,
    instance: (Formula, Formula, Formula),
    spaces: Vec<Space>,
}

enum Unit {
    /// Program tuple `tuple`, valuations `lo..hi`.
    Block { job: usize, space: usize, tuple: u128, lo: u128, hi: u128 },
    Sample { job: usize, index: u64, seed: u64 },
}

#[derive(Default)]
struct Tally {
    checked: u64,
    failures: u64,
    unconverged: u64,
    witnesses: Vec<Verdict>,
}

fn run_model(
    config: &SearchConfig,
    job: &Job,
    universe: usize,
    programs: &BTreeMap<String, FuzzyMultirelation>,
    valuations: &mut dyn Iterator<Item = BTreeMap<String, Vec<LatticeValue>>>,
    tallies: &mut [Tally],
) {
    let l = &config.lattice;
    let vals: Vec<_> = valuations.collect();
    for (m, modes) in config.modes.iter().enumerate() {
        let mut ev = Evaluator::from_parts(l, universe, programs, *modes);
        let t = &mut tallies[m];
        for val in &vals {
            let sides = match evaluate_sides(&mut ev, val, l, job.axiom.polarity(), &job.instance) {
                Ok(s) => s,
                Err(e) => panic!("binding names are declared by construction: {e}"),
            };
            t.checked += 1;
            if !sides.converged {
                t.unconverged += 1;
            }
            if sides.ok.iter().all(|&b| b) {
                continue;
            }
            t.failures += 1;
            if t.witnesses.len() < config.max_witnesses {
                let model = CgdlModel::new(l.clone(), state_names(universe), val.clone(), programs.clone());
                t.witnesses
                    .push(verdict_from(&model, job.axiom, &job.binding, *modes, &job.instance.2, &sides));
            }
        }
    }
}

/// Enumerates or samples models for every selected axiom, binding and mode.
///
/// Work is split into independent units evaluated in parallel and merged in
/// enumeration order, so the report does not depend on the worker count.
pub fn search_counterexamples(config: &SearchConfig) -> SearchReport {
    assert!(config.min_states >= 1 && config.min_states <= config.max_states, "bad state range");
    let mut jobs: Vec<Job> = Vec::new();
    for &axiom in &config.axioms {
        for binding in bindings_for(config, axiom) {
            let instance = axiom.instantiate(&binding).expect("canonical bindings fit");
            let spaces = (config.min_states..=config.max_states)
                .map(|n| Space::new(config, n, &binding, axiom.singleton_only()))
                .collect();
            jobs.push(Job {
                axiom,
                binding,
                instance,
                spaces,
            });
        }
    }

    let mut units: Vec<Unit> = Vec::new();
    let mut partial = false;
    let mut models: u64 = 0;
    for (j, job) in jobs.iter().enumerate() {
        match config.budget {
            Budget::Exhaustive { cap } => {
                for (s, space) in job.spaces.iter().enumerate() {
                    let vals = space.valuations();
                    let total = space.program_tuples().saturating_mul(vals);
                    let take = total.min(cap as u128);
                    partial |= take < total;
                    models += take as u64;
                    let mut done: u128 = 0;
                    let mut tuple: u128 = 0;
                    while done < take {
                        let hi = vals.min(take - done);
                        units.push(Unit::Block {
                            job: j,
                            space: s,
                            tuple,
                            lo: 0,
                            hi,
                        });
                        done += hi;
                        tuple += 1;
                    }
                }
            }
            Budget::Sampled { samples, seed } => {
                models += samples;
                for i in 0..samples {
                    units.push(Unit::Sample {
                        job: j,
                        index: i,
                        seed,
                    });
                }
            }
        }
    }

    let results: Vec<(usize, Vec<Tally>)> = units
        .par_iter()
        .map(|unit| {
            let mut tallies: Vec<Tally> = config.modes.iter().map(|_| Tally::default()).collect();
            match *unit {
                Unit::Block { job, space, tuple, lo, hi } => {
                    let jb = &jobs[job];
                    let sp = &jb.spaces[space];
                    let programs = sp.decode_programs(&config.lattice, tuple);
                    let mut vals = (lo..hi).map(|v| sp.decode_valuation(v));
                    run_model(config, jb, sp.universe, &programs, &mut vals, &mut tallies);
                    (job, tallies)
                }
                Unit::Sample { job, index, seed } => {
                    let jb = &jobs[job];
                    let mut rng = substream(seed, ((job as u64) << 40) | index);
                    let sp = &jb.spaces[rng.gen_range(0..jb.spaces.len())];
                    let programs = sp.random_programs(&config.lattice, &mut rng);
                    let val = sp.random_valuation(&mut rng);
                    run_model(config, jb, sp.universe, &programs, &mut std::iter::once(val), &mut tallies);
                    (job, tallies)
                }
            }
        })
        .collect();

    let mut rows: Vec<SearchRow> = Vec::new();
    let mut row_index: BTreeMap<(AxiomId, usize), usize> = BTreeMap::new();
    for &axiom in &config.axioms {
        for (m, modes) in config.modes.iter().enumerate() {
            row_index.insert((axiom, m), rows.len());
            rows.push(SearchRow {
                axiom,
                modes: *modes,
                claimed: axiom.is_claimed(),
                bindings: jobs.iter().filter(|j| j.axiom == axiom).count(),
                checked: 0,
                failures: 0,
                unconverged: 0,
            });
        }
    }
    let mut witnesses: Vec<Vec<Verdict>> = rows.iter().map(|_| Vec::new()).collect();
    for (job, tallies) in results {
        for (m, t) in tallies.into_iter().enumerate() {
            let r = row_index[&(jobs[job].axiom, m)];
            rows[r].checked += t.checked;
            rows[r].failures += t.failures;
            rows[r].unconverged += t.unconverged;
            let room = config.max_witnesses.saturating_sub(witnesses[r].len());
            witnesses[r].extend(t.witnesses.into_iter().take(room));
        }
    }

    let coverage = match config.budget {
        Budget::Sampled { seed, .. } => Coverage::Sampled { models, seed },
        Budget::Exhaustive { .. } if partial => Coverage::Partial { models },
        Budget::Exhaustive { .. } => Coverage::Exhaustive { models },
    };
    SearchReport {
        lattice: config.lattice.name(),
        min_states: config.min_states,
        max_states: config.max_states,
        budget: config.budget,
        coverage,
        rows,
        witnesses: witnesses.into_iter().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::replay;

    #[test]
    fn bindings_are_canonical() {
        let c = SearchConfig::new(ActionLattice::boolean());
        let b = bindings_for(&c, AxiomId::A25);
        let rendered: Vec<String> = b.iter().map(|b| b.to_string()).collect();
        assert_eq!(rendered, ["[π=a, π′=a, ρ=p]", "[π=a, π′=b, ρ=p]"]);
        assert_eq!(bindings_for(&c, AxiomId::A24).len(), 1);
        assert_eq!(bindings_for(&c, AxiomId::A22).len(), 2);
    }

    #[test]
    fn boolean_space_sizes() {
        let c = SearchConfig::new(ActionLattice::boolean());
        let b = &bindings_for(&c, AxiomId::A25)[1];
        let s = Space::new(&c, 2, b, false);
        assert_eq!(s.fuzzy_sets.len(), 3);
        assert_eq!(s.options.len(), 8);
        assert_eq!(s.program_tuples(), 8u128.pow(4));
        assert_eq!(s.valuations(), 4);
        let s = Space::new(&c, 2, b, true);
        assert_eq!(s.fuzzy_sets.len(), 2);
    }

    #[test]
    fn combinations_count() {
        let mut out = Vec::new();
        combinations(5, 2, &mut out);
        assert_eq!(out.len(), 10);
        assert_eq!(out[0], [0, 1]);
        assert_eq!(out[9], [3, 4]);
    }

    #[test]
    fn zero_programs_is_vacuous() {
        let mut c = SearchConfig::new(ActionLattice::boolean()).with_symbols(0, 1);
        c.axioms = vec![AxiomId::A23, AxiomId::A25];
        let r = search_counterexamples(&c);
        assert!(r.rows.iter().all(|r| r.checked == 0 && r.passed()));
    }

    #[test]
    fn boolean_annihilation_exhaustive() {
        let mut c = SearchConfig::new(ActionLattice::boolean());
        c.axioms = vec![AxiomId::A24, AxiomId::A26];
        let r = search_counterexamples(&c);
        assert!(matches!(r.coverage, Coverage::Exhaustive { .. }));
        assert_eq!(r.claimed_failures(), 0, "{}", r.render_text());
    }

    #[test]
    fn godel_sampled_is_deterministic_and_replayable() {
        let mut c = SearchConfig::new(ActionLattice::godel(3).unwrap());
        c.min_states = 2;
        c.axioms = vec![AxiomId::A21, AxiomId::A25];
        c.budget = Budget::Sampled { samples: 200, seed: 7 };
        let a = search_counterexamples(&c);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| search_counterexamples(&c));
        assert_eq!(a, b);
        assert!(!a.witnesses.is_empty());
        for w in &a.witnesses {
            assert_eq!(&replay(w).unwrap(), w);
        }
    }
}
