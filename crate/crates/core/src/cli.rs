//! The `cgdl` command-line front end.
//!
//! Exit codes: 0 success, 1 counterexample or failed law found, 2 parse
//! error, 3 semantic error, 4 star iteration did not converge.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::axioms::{search_counterexamples, AxiomId, Budget, SearchConfig, SearchReport};
use crate::checker::{CgdlModel, DiamondMode, EvalError, EvalModes, Evaluator, LatticeField, TraceRow, ValueLiteral};
use crate::lattice::{audit_axioms, ActionLattice};
use crate::matrix::{gdl_sat_all, GdlError};
use crate::mrel::{compare_seq, SeqMode};
use crate::syntax::{parse_formula, parse_program, Formula, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FOUND: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SEMANTIC: i32 = 3;
pub const EXIT_STAR: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cgdl", version, about = "Graded model checker and axiom lab for concurrent dynamic logic")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for searches and comparisons.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for sampled runs.
    #[arg(long, global = true, env = "CGDL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate formulas on a model file.
    Eval(EvalArgs),
    /// Check axiom schemes over enumerated or sampled models.
    Axioms(SearchArgs),
    /// Like `axioms`, listing every kept witness.
    Search(SearchArgs),
    /// Verify the action-lattice laws of a lattice.
    Audit(AuditArgs),
    /// Compare sequential compositions on random Boolean multirelations.
    Compare(CompareArgs),
    /// Evaluate concurrency-free formulas in the matrix semantics.
    Gdl(GdlArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub model: PathBuf,
    /// Formula to evaluate; defaults to the model's queries.
    pub formula: Option<String>,
    /// Print the value of every subformula.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value_t = SeqMode::SupportGuarded)]
    pub seq: SeqMode,
    #[arg(long, default_value_t = DiamondMode::Definition)]
    pub diamond: DiamondMode,
    /// Star iteration bound (default |W|² + 2).
    #[arg(long)]
    pub star_limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GdlArgs {
    pub model: PathBuf,
    pub formula: Option<String>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// `boolean`, `godel:N` or `lukasiewicz:N`.
    #[arg(long, default_value = "boolean", value_parser = parse_lattice)]
    pub lattice: ActionLattice,
    /// JSON lattice description; overrides `--lattice`.
    #[arg(long)]
    pub lattice_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Longest lists for the sum/meet property.
    #[arg(long, default_value_t = 3)]
    pub max_list_len: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// JSON search configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_lattice)]
    pub lattice: Option<ActionLattice>,
    #[arg(long)]
    pub lattice_file: Option<PathBuf>,
    #[arg(long)]
    pub min_states: Option<usize>,
    #[arg(long)]
    pub max_states: Option<usize>,
    /// Atomic programs `a, b, ..`.
    #[arg(long)]
    pub programs: Option<usize>,
    /// Propositions `p, q, ..`.
    #[arg(long)]
    pub propositions: Option<usize>,
    /// Extra program for the `π` pool (repeatable).
    #[arg(long = "program")]
    pub program_pool: Vec<String>,
    /// Extra formula for the `ρ` pool (repeatable).
    #[arg(long = "formula")]
    pub formula_pool: Vec<String>,
    #[arg(long)]
    pub max_support: Option<usize>,
    #[arg(long)]
    pub max_targets: Option<usize>,
    /// Axiom to check (repeatable); defaults to the modal schemes.
    #[arg(long = "axiom")]
    pub axioms: Vec<AxiomId>,
    /// Sequential mode (repeatable); defaults to support-guarded.
    #[arg(long = "seq")]
    pub seq: Vec<SeqMode>,
    /// Diamond mode (repeatable); defaults to definition.
    #[arg(long = "diamond")]
    pub diamond: Vec<DiamondMode>,
    /// Check all four mode combinations.
    #[arg(long, conflicts_with_all = ["seq", "diamond"])]
    pub all_modes: bool,
    /// Enumerate every model up to the cap.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    #[arg(long)]
    pub cap: Option<u64>,
    /// Sample this many models per binding.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Witnesses kept per axiom and mode.
    #[arg(long)]
    pub witnesses: Option<usize>,
    #[arg(long)]
    pub star_limit: Option<usize>,
}

/// Search configuration file; every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfigFile {
    pub lattice: Option<LatticeField>,
    pub min_states: Option<usize>,
    pub max_states: Option<usize>,
    pub programs: Option<usize>,
    pub propositions: Option<usize>,
    pub program_pool: Option<Vec<String>>,
    pub formula_pool: Option<Vec<String>>,
    pub max_support: Option<usize>,
    pub max_targets: Option<usize>,
    pub grid: Option<Vec<ValueLiteral>>,
    pub modes: Option<Vec<EvalModes>>,
    pub axioms: Option<Vec<AxiomId>>,
    pub budget: Option<Budget>,
    pub max_witnesses: Option<usize>,
    pub star_limit: Option<usize>,
}

fn parse_lattice(s: &str) -> Result<ActionLattice, String> {
    ActionLattice::from_name(s).map_err(|e| e.to_string())
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn parse(what: &str, e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: format!("{what}: {e}"),
        }
    }

    fn semantic(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_SEMANTIC,
            message: e.to_string(),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::semantic(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::parse(&path.display().to_string(), e))
}

fn load_model(path: &Path) -> Result<CgdlModel, Failure> {
    let text = read(path)?;
    CgdlModel::from_json(&text).map_err(|e| {
        if e.is_parse_error() {
            Failure::parse("model file", e)
        } else {
            Failure::semantic(e)
        }
    })
}

fn load_lattice_file(path: &Path) -> Result<ActionLattice, Failure> {
    let spec: LatticeField = serde_json::from_str(&read(path)?).map_err(|e| Failure::parse("lattice file", e))?;
    spec.build().map_err(Failure::semantic)
}

fn parse_formula_arg(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e: ParseError| Failure::parse(&format!("formula `{text}`"), e))
}

fn formulas(model: &CgdlModel, formula: &Option<String>) -> Result<Vec<Formula>, Failure> {
    match formula {
        Some(f) => Ok(vec![parse_formula_arg(f)?]),
        None if model.queries.is_empty() => Err(Failure::semantic("no formula given and the model has no queries")),
        None => model.queries.iter().map(|q| parse_formula_arg(q)).collect(),
    }
}

#[derive(Debug, Serialize)]
struct StateValue {
    state: String,
    value: String,
}

#[derive(Debug, Serialize)]
struct EvalResult {
    formula: String,
    values: Vec<StateValue>,
    valid: bool,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceRow>>,
}

#[derive(Debug, Serialize)]
struct EvalReport {
    lattice: String,
    modes: EvalModes,
    states: Vec<String>,
    results: Vec<EvalResult>,
}

#[derive(Debug, Serialize)]
struct GdlResult {
    formula: String,
    values: Vec<StateValue>,
}

#[derive(Debug, Serialize)]
struct GdlReport {
    lattice: String,
    states: Vec<String>,
    results: Vec<GdlResult>,
}

fn emit<T: Serialize>(out: &mut dyn Write, format: Format, value: &T, text: impl FnOnce() -> String) {
    let s = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("reports serialize") + "\n",
        Format::Text => text(),
    };
    out.write_all(s.as_bytes()).expect("write to output");
}

fn state_values(model: &CgdlModel, values: &[crate::lattice::LatticeValue]) -> Vec<StateValue> {
    model
        .states
        .iter()
        .zip(values)
        .map(|(s, &v)| StateValue {
            state: s.clone(),
            value: model.lattice.literal(v),
        })
        .collect()
}

fn run_eval(args: &EvalArgs, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model(&args.model)?;
    let fs = formulas(&model, &args.formula)?;
    let modes = EvalModes {
        seq: args.seq,
        diamond: args.diamond,
        star_limit: args.star_limit,
    };
    let mut ev = Evaluator::new(&model, modes);
    let top = model.lattice.top();
    let mut results = Vec::new();
    for f in &fs {
        let (values, converged, trace) = if args.trace {
            let (v, c, t) = ev.eval_traced(&model.valuation, f)?;
            (v, c, Some(t))
        } else {
            let (v, c) = ev.eval(&model.valuation, f)?;
            (v, c, None)
        };
        results.push(EvalResult {
            formula: f.render(),
            valid: values.iter().all(|&v| v == top),
            values: state_values(&model, &values),
            converged,
            trace,
        });
    }
    let report = EvalReport {
        lattice: model.lattice.name(),
        modes,
        states: model.states.clone(),
        results,
    };
    emit(out, format, &report, || {
        let mut s = format!("lattice {}, {}\n", report.lattice, report.modes);
        let width = report.states.iter().map(String::len).max().unwrap_or(0);
        for r in &report.results {
            s.push_str(&format!(
                "{}{}{}\n",
                r.formula,
                if r.valid { "  (valid)" } else { "" },
                if r.converged { "" } else { "  (star did not converge)" }
            ));
            for v in &r.values {
                s.push_str(&format!("  {:width$}  {}\n", v.state, v.value));
            }
            if let Some(t) = &r.trace {
                s.push_str(&format!("  trace ({}):\n", report.states.join(" ")));
                for row in t {
                    s.push_str(&format!("    {:<24} {}\n", row.formula, row.values.join(" ")));
                }
            }
        }
        s
    });
    Ok(if report.results.iter().all(|r| r.converged) {
        EXIT_OK
    } else {
        EXIT_STAR
    })
}

fn run_gdl(args: &GdlArgs, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model(&args.model)?;
    let fs = formulas(&model, &args.formula)?;
    let gm = model.gdl_model();
    let mut results = Vec::new();
    for f in &fs {
        let values = gdl_sat_all(&gm, f).map_err(|e: GdlError| Failure::semantic(e))?;
        results.push(GdlResult {
            formula: f.render(),
            values: state_values(&model, &values),
        });
    }
    let report = GdlReport {
        lattice: model.lattice.name(),
        states: model.states.clone(),
        results,
    };
    emit(out, format, &report, || {
        let mut s = format!("lattice {}, matrix semantics\n", report.lattice);
        for r in &report.results {
            s.push_str(&format!("{}\n", r.formula));
            for v in &r.values {
                s.push_str(&format!("  {}  {}\n", v.state, v.value));
            }
        }
        s
    });
    Ok(EXIT_OK)
}

fn run_audit(args: &AuditArgs, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let lattice = match &args.lattice.lattice_file {
        Some(p) => load_lattice_file(p)?,
        None => args.lattice.lattice.clone(),
    };
    let carrier: Vec<_> = lattice.elements().collect();
    let mut report = audit_axioms(&lattice, &carrier);
    if args.max_list_len != 3 {
        let extra = crate::lattice::lattice_property_check(&lattice, &carrier, args.max_list_len);
        for e in extra.entries {
            if let Some(slot) = report.entries.iter_mut().find(|x| x.law == e.law) {
                *slot = e;
            }
        }
    }
    emit(out, format, &report, || report.render_text());
    Ok(if report.passed() { EXIT_OK } else { EXIT_FOUND })
}

fn run_compare(args: &CompareArgs, seed: u64, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    if args.samples == 0 {
        return Err(Failure::parse("--samples", "must be at least 1"));
    }
    if args.states > 6 {
        return Err(Failure::parse("--states", "at most 6 states are supported"));
    }
    let report = compare_seq(args.states, args.samples, seed);
    emit(out, format, &report, || report.render_text());
    Ok(EXIT_OK)
}

/// Builds a search configuration from an optional file and flags.
pub fn search_config(args: &SearchArgs, seed: u64) -> Result<SearchConfig, Failure> {
    let file: SearchConfigFile = match &args.config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::parse("search config", e))?,
        None => SearchConfigFile::default(),
    };
    let lattice = if let Some(p) = &args.lattice_file {
        load_lattice_file(p)?
    } else if let Some(l) = &args.lattice {
        l.clone()
    } else if let Some(f) = &file.lattice {
        f.build().map_err(Failure::semantic)?
    } else {
        ActionLattice::boolean()
    };
    let mut c = SearchConfig::new(lattice);
    let programs = args.programs.or(file.programs).unwrap_or(2);
    let props = args.propositions.or(file.propositions).unwrap_or(2);
    if programs > 8 || props > 8 {
        return Err(Failure::semantic("at most 8 programs and 8 propositions"));
    }
    c = c.with_symbols(programs, props);
    c.min_states = args.min_states.or(file.min_states).unwrap_or(1);
    c.max_states = args.max_states.or(file.max_states).unwrap_or(2).max(c.min_states);
    if c.min_states == 0 || c.max_states > 6 {
        return Err(Failure::semantic("state counts must lie in 1..=6"));
    }
    let pool_p: Vec<String> = file.program_pool.clone().unwrap_or_default().into_iter().chain(args.program_pool.iter().cloned()).collect();
    for p in pool_p {
        let prog = parse_program(&p).map_err(|e| Failure::parse(&format!("program `{p}`"), e))?;
        if let Some(a) = prog.atoms().into_iter().find(|a| !c.programs.iter().any(|x| x == a)) {
            return Err(Failure::semantic(format!("undeclared program `{a}`")));
        }
        c.program_pool.push(prog);
    }
    let pool_f: Vec<String> = file.formula_pool.clone().unwrap_or_default().into_iter().chain(args.formula_pool.iter().cloned()).collect();
    for f in pool_f {
        let form = parse_formula_arg(&f)?;
        if let Some(a) = form.programs().into_iter().find(|a| !c.programs.iter().any(|x| x == a)) {
            return Err(Failure::semantic(format!("undeclared program `{a}`")));
        }
        if let Some(p) = form.propositions().into_iter().find(|p| !c.propositions.iter().any(|x| x == p)) {
            return Err(Failure::semantic(format!("undeclared proposition `{p}`")));
        }
        c.formula_pool.push(form);
    }
    c.max_support = args.max_support.or(file.max_support).unwrap_or(c.max_support).max(1);
    c.max_targets = args.max_targets.or(file.max_targets).unwrap_or(c.max_targets);
    if let Some(grid) = &file.grid {
        c.grid = grid
            .iter()
            .map(|v| v.resolve(&c.lattice))
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::semantic)?;
        if c.grid.is_empty() {
            return Err(Failure::semantic("value grid must be nonempty"));
        }
    }
    c.modes = vec![EvalModes::default()];
    if let Some(modes) = &file.modes {
        c.modes = modes.clone();
    }
    if args.all_modes {
        c.modes = EvalModes::all();
    } else if !args.seq.is_empty() || !args.diamond.is_empty() {
        let seqs = if args.seq.is_empty() { vec![SeqMode::default()] } else { args.seq.clone() };
        let dias = if args.diamond.is_empty() { vec![DiamondMode::default()] } else { args.diamond.clone() };
        c.modes = seqs.iter().flat_map(|&s| dias.iter().map(move |&d| EvalModes::new(s, d))).collect();
    }
    if let Some(limit) = args.star_limit.or(file.star_limit) {
        c.modes = c.modes.into_iter().map(|m| m.with_star_limit(limit)).collect();
    }
    if c.modes.is_empty() {
        return Err(Failure::semantic("no evaluation modes selected"));
    }
    if !args.axioms.is_empty() {
        c.axioms = args.axioms.clone();
    } else if let Some(ax) = &file.axioms {
        c.axioms = ax.clone();
    }
    c.budget = if args.exhaustive {
        Budget::Exhaustive {
            cap: args.cap.unwrap_or(1_000_000),
        }
    } else if let Some(samples) = args.samples {
        Budget::Sampled { samples, seed }
    } else if let Some(b) = file.budget {
        b
    } else {
        Budget::Sampled { samples: 2000, seed }
    };
    match c.budget {
        Budget::Exhaustive { cap: 0 } | Budget::Sampled { samples: 0, .. } => {
            return Err(Failure::semantic("budgets must be positive"))
        }
        _ => {}
    }
    if let Some(w) = args.witnesses.or(file.max_witnesses) {
        c.max_witnesses = w;
    }
    Ok(c)
}

fn run_search(args: &SearchArgs, seed: u64, list_all: bool, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut config = search_config(args, seed)?;
    if list_all && args.witnesses.is_none() {
        config.max_witnesses = config.max_witnesses.max(10);
    }
    if !list_all && args.witnesses.is_none() {
        config.max_witnesses = 1;
    }
    let report: SearchReport = search_counterexamples(&config);
    emit(out, format, &report, || report.render_text());
    Ok(if report.rows.iter().any(|r| r.unconverged > 0) {
        EXIT_STAR
    } else if report.claimed_failures() > 0 {
        EXIT_FOUND
    } else {
        EXIT_OK
    })
}

/// Runs the CLI on `args`, writing reports to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_SEMANTIC;
        }
    };
    let (result, buffer) = pool.install(|| {
        let mut buf: Vec<u8> = Vec::new();
        let r = match &cli.command {
            Command::Eval(a) => run_eval(a, cli.format, &mut buf),
            Command::Gdl(a) => run_gdl(a, cli.format, &mut buf),
            Command::Axioms(a) => run_search(a, cli.seed, false, cli.format, &mut buf),
            Command::Search(a) => run_search(a, cli.seed, true, cli.format, &mut buf),
            Command::Audit(a) => run_audit(a, cli.format, &mut buf),
            Command::Compare(a) => run_compare(a, cli.seed, cli.format, &mut buf),
        };
        (r, buf)
    });
    if out.write_all(&buffer).and_then(|_| out.flush()).is_err() {
        return EXIT_SEMANTIC;
    }
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
