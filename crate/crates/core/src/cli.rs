//! Command-line front end: argument parsing, dispatch and report rendering.
//!
//! [`run`] does all the work and returns a [`RunReport`]; printing and the
//! exit status are left to the binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Error;
use crate::facts::{Fact, Interpretation, Name, Truth};
use crate::fixpoint::{solve_direct, solve_via_translation, translate_with_aliases, Assignment, FixpointDefinition};
use crate::frames::Rule;
use crate::justify::{best_justification, branch_values, enumerate_justifications, jval, Caps, Semantics, System};
use crate::nested::{check_equivalence, compress, expand, flatten, merge, shrink, NestedSystem, Sampling};
use crate::random::{self, DefinitionParams, NestedParams};
use crate::syntax::{parse_definition, parse_system, print_flat, print_system};

#[derive(Debug, Parser)]
#[command(name = "nestjust", version, about = "Supported values, models and transformations of nested justification systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the models of a system.
    Models {
        file: PathBuf,
        #[arg(long)]
        two_valued: bool,
        #[command(flatten)]
        view: View,
        #[command(flatten)]
        common: Common,
    },
    /// Supported value of one fact (or of every defined fact).
    Sv {
        file: PathBuf,
        #[arg(long)]
        fact: Option<String>,
        #[arg(long)]
        interp: String,
        #[command(flatten)]
        view: View,
        #[command(flatten)]
        common: Common,
    },
    /// Print the flattening of a system.
    Flatten {
        file: PathBuf,
        #[command(flatten)]
        view: View,
        #[command(flatten)]
        common: Common,
    },
    /// Print the compression of a nested system, with rule origins.
    Compress {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print the merge of a nested system.
    Merge {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare supported values under compression and merge.
    CheckEquiv {
        file: PathBuf,
        #[arg(long, conflicts_with = "samples")]
        exhaustive: bool,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Show a best justification of a fact, or where a compressed rule comes from.
    Explain {
        file: PathBuf,
        #[arg(long, required_unless_present = "rule")]
        fact: Option<String>,
        /// Defaults to every atom unknown.
        #[arg(long)]
        interp: Option<String>,
        /// A rule of the compression to trace back instead.
        #[arg(long, conflicts_with = "fact")]
        rule: Option<String>,
        #[command(flatten)]
        view: View,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a fixpoint definition for given open values.
    FpdSolve {
        file: PathBuf,
        /// Values of the open atoms, `a=t,b=f`.
        #[arg(long, default_value = "")]
        interp: String,
        #[arg(long, value_enum, default_value_t = Solver::Direct)]
        via: Solver,
        #[command(flatten)]
        common: Common,
    },
    /// Print the nested system a fixpoint definition translates to.
    FpdTranslate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the randomized property suites.
    Selfcheck {
        #[arg(long, default_value_t = 20)]
        random: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Dot,
    JsonLines,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Via {
    /// Compression when the system is compressible, merge otherwise.
    Auto,
    Compress,
    Merge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Direct,
    Translation,
}

#[derive(Debug, Clone, Args)]
pub struct View {
    /// Which flat system stands for a nested one.
    #[arg(long, value_enum, default_value_t = Via::Auto)]
    pub via: Via,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub cap_justifications: Option<u64>,
    #[arg(long)]
    pub cap_interps: Option<u64>,
}

impl Common {
    fn caps(&self) -> Caps {
        let d = Caps::default();
        Caps {
            justifications: self.cap_justifications.unwrap_or(d.justifications),
            interpretations: self.cap_interps.unwrap_or(d.interpretations),
            bodies: d.bodies,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A counterexample, or no model where one was asked for.
    Negative,
    InputError,
    ResourceCap,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Negative => 1,
            Status::InputError => 2,
            Status::ResourceCap => 3,
        }
    }
}

/// Everything a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub status: Status,
    /// Lines for standard output.
    pub output: Vec<String>,
    /// Lines for standard error.
    pub diagnostics: Vec<String>,
    pub counters: BTreeMap<&'static str, u64>,
}

impl RunReport {
    fn new() -> RunReport {
        RunReport {
            status: Status::Success,
            output: Vec::new(),
            diagnostics: Vec::new(),
            counters: BTreeMap::new(),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.output.push(s.into());
    }

    fn block(&mut self, text: &str) {
        self.output.extend(text.lines().map(str::to_string));
    }

    fn record(&mut self, v: Value) {
        self.output.push(v.to_string());
    }
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

pub fn run(cli: &Cli) -> RunReport {
    let mut report = RunReport::new();
    match dispatch(&cli.command, &mut report) {
        Ok(()) => {}
        Err(Failure::Input(msg)) => {
            report.status = Status::InputError;
            report.diagnostics.push(format!("error: {msg}"));
        }
        Err(Failure::Lib(e)) => {
            report.status = match e {
                Error::ResourceCap { .. } => Status::ResourceCap,
                _ => Status::InputError,
            };
            report.diagnostics.push(format!("error: {e}"));
        }
    }
    report
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Outcome<NestedSystem> {
    let text = read(path)?;
    parse_system(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_definition(path: &Path) -> Outcome<FixpointDefinition> {
    let text = read(path)?;
    parse_definition(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn flat_view(ns: &NestedSystem, via: Via, caps: &Caps) -> Outcome<System> {
    Ok(match via {
        Via::Compress => compress(ns, caps)?.system,
        Via::Merge => merge(ns)?,
        Via::Auto if ns.is_compressible() => compress(ns, caps)?.system,
        Via::Auto => merge(ns)?,
    })
}

fn fact_arg(s: &str) -> Outcome<Fact> {
    Fact::parse(s).map_err(|e| Failure::Input(e.to_string()))
}

fn interp_arg(s: &str, atoms: &[Name]) -> Outcome<Interpretation> {
    let i = Interpretation::parse(s).map_err(|e| Failure::Input(e.to_string()))?;
    let missing: Vec<String> = atoms.iter().filter(|a| i.get(Fact::positive(**a)).is_none()).map(|a| a.to_string()).collect();
    if !missing.is_empty() {
        return Err(Failure::Input(format!("--interp leaves {} unassigned", missing.join(", "))));
    }
    Ok(i)
}

fn interp_json(i: &Interpretation) -> Value {
    Value::Object(i.assigned().map(|(a, v)| (a.to_string(), json!(v.symbol()))).collect())
}

fn dispatch(command: &Command, report: &mut RunReport) -> Outcome {
    match command {
        Command::Models { file, two_valued, view, common } => {
            let caps = common.caps();
            let sys = flat_view(&load_system(file)?, view.via, &caps)?;
            let sem = Semantics::new(&sys, &caps)?;
            let models = sem.models(*two_valued, caps.interpretations)?;
            report.counters.insert("models", models.len() as u64);
            match common.format {
                Format::JsonLines => {
                    for m in &models {
                        report.record(json!({ "model": interp_json(m) }));
                    }
                }
                _ => {
                    let atoms = sys.atoms();
                    report.line(atoms.iter().map(|a| format!("{a:>4}")).collect::<Vec<_>>().join(" "));
                    for m in &models {
                        let row: Vec<String> = atoms
                            .iter()
                            .map(|&a| format!("{:>4}", m.get(Fact::positive(a)).map_or("-", Truth::symbol)))
                            .collect();
                        report.line(row.join(" "));
                    }
                    report.line(format!("{} model(s)", models.len()));
                }
            }
            if models.is_empty() {
                report.status = Status::Negative;
            }
        }
        Command::Sv { file, fact, interp, view, common } => {
            let caps = common.caps();
            let sys = flat_view(&load_system(file)?, view.via, &caps)?;
            let i = interp_arg(interp, &sys.atoms())?;
            let facts: Vec<Fact> = match fact {
                Some(f) => vec![fact_arg(f)?],
                None => sys.frame.defined.iter().copied().collect(),
            };
            let sem = Semantics::for_facts(&sys, &facts, &caps)?;
            for x in facts {
                let v = sem.supported_value(x, &i)?;
                match common.format {
                    Format::JsonLines => report.record(json!({ "fact": x.to_string(), "value": v.symbol() })),
                    _ => report.line(format!("SV({x}) = {v}")),
                }
            }
        }
        Command::Flatten { file, view, common } => {
            let caps = common.caps();
            let sys = flat_view(&load_system(file)?, view.via, &caps)?;
            let flat = flatten(&sys, &caps)?;
            report.counters.insert("rules", flat.system.frame.rules.len() as u64);
            report.block(&print_flat(&flat.system, None));
        }
        Command::Compress { file, common } => {
            let comp = compress(&load_system(file)?, &common.caps())?;
            report.counters.insert("rules", comp.system.frame.rules.len() as u64);
            report.block(&print_flat(&comp.system, Some(&comp.provenance)));
        }
        Command::Merge { file, .. } => {
            let ns = load_system(file)?;
            let merged = merge(&ns)?;
            for (k, node) in ns.preorder().iter().enumerate() {
                let local: Vec<String> = node.local.iter().map(|x| x.to_string()).collect();
                report.line(format!("# system {k} ({}): {}", node.evaluation, local.join(" ")));
            }
            report.block(&print_flat(&merged, None));
        }
        Command::CheckEquiv { file, exhaustive, samples, seed, common } => {
            let sampling = match (exhaustive, samples) {
                (_, Some(n)) => Sampling::Random {
                    samples: *n,
                    seed: seed.ok_or_else(|| Failure::Input("--samples needs an explicit --seed".into()))?,
                },
                _ => Sampling::Exhaustive,
            };
            let r = check_equivalence(&load_system(file)?, sampling, &common.caps())?;
            report.counters.insert("interpretations", r.interpretations);
            report.counters.insert("counterexamples", r.counterexamples.len() as u64);
            if !r.within_hypothesis {
                report
                    .diagnostics
                    .push("note: some evaluation is not parametric; equivalence is not guaranteed here".into());
            }
            for c in &r.counterexamples {
                match common.format {
                    Format::JsonLines => report.record(json!({
                        "compress": c.compress.symbol(),
                        "fact": c.fact.to_string(),
                        "interpretation": interp_json(&c.interpretation),
                        "merge": c.merge.symbol(),
                    })),
                    _ => report.line(format!(
                        "SV({}) under {}: compress {}, merge {}",
                        c.fact, c.interpretation, c.compress, c.merge
                    )),
                }
            }
            let verdict = if r.equivalent() { "equivalent" } else { "not equivalent" };
            match common.format {
                Format::JsonLines => report.record(json!({
                    "interpretations": r.interpretations,
                    "verdict": verdict,
                    "within_hypothesis": r.within_hypothesis,
                })),
                _ => report.line(format!("{verdict} ({} interpretations)", r.interpretations)),
            }
            if !r.equivalent() {
                report.status = Status::Negative;
            }
        }
        Command::Explain { file, fact, interp, rule, view, common } => {
            let caps = common.caps();
            let ns = load_system(file)?;
            if let Some(text) = rule {
                let r = Rule::parse(text).map_err(|e| Failure::Input(e.to_string()))?;
                let comp = compress(&ns, &caps)?;
                if !comp.provenance.contains_key(&r) {
                    report.status = Status::Negative;
                }
                for l in comp.explain_rule(&r) {
                    report.line(l);
                }
                return Ok(());
            }
            let sys = flat_view(&ns, view.via, &caps)?;
            let atoms = sys.atoms();
            let i = match interp {
                Some(s) => interp_arg(s, &atoms)?,
                None => Interpretation::from_pairs(atoms.iter().map(|&a| (a, Truth::Unknown))),
            };
            let x = fact_arg(fact.as_deref().expect("clap requires --fact without --rule"))?;
            let (j, v) = best_justification(&sys, x, &i, &caps)?;
            let values = branch_values(&j, &sys.evaluation)?;
            match common.format {
                Format::Dot => report.block(&j.to_dot(&values)),
                Format::JsonLines => report.record(json!({
                    "branch_values": values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                    "fact": x.to_string(),
                    "rules": j.nodes.iter().map(|n| n.rule.to_string()).collect::<Vec<_>>(),
                    "value": v.symbol(),
                })),
                Format::Text => {
                    report.block(&j.to_text());
                    let vs: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                    report.line(format!("branch values: {}", vs.join(", ")));
                    report.line(format!("value under {i}: {v}"));
                }
            }
        }
        Command::FpdSolve { file, interp, via, common } => {
            let d = load_definition(file)?;
            let problems = d.validate();
            if !problems.is_empty() {
                return Err(Failure::Input(problems.join("; ")));
            }
            let given = Interpretation::parse(interp).map_err(|e| Failure::Input(e.to_string()))?;
            let mut opens = Assignment::new();
            for a in d.opens() {
                match given.get(Fact::positive(a)) {
                    Some(Truth::True) => opens.insert(a, true),
                    Some(Truth::False) => opens.insert(a, false),
                    Some(Truth::Unknown) => return Err(Failure::Input(format!("open atom `{a}` must be t or f"))),
                    None => return Err(Failure::Input(format!("--interp leaves open atom `{a}` unassigned"))),
                };
            }
            let solved = match via {
                Solver::Direct => solve_direct(&d, &opens)?,
                Solver::Translation => solve_via_translation(&d, &opens, &common.caps())?,
            };
            match common.format {
                Format::JsonLines => report.record(Value::Object(
                    solved.iter().map(|(a, v)| (a.to_string(), json!(if *v { "t" } else { "f" }))).collect(),
                )),
                _ => report.line(solution_line(&solved)),
            }
        }
        Command::FpdTranslate { file, common } => {
            let d = load_definition(file)?;
            let (ns, aliases) = translate_with_aliases(&d, &common.caps())?;
            for (from, to) in &aliases {
                report.line(format!("# atom {from} is written {to}"));
            }
            report.block(&print_system(&ns));
        }
        Command::Selfcheck { random, seed, common } => selfcheck(*random, *seed, &common.caps(), report)?,
    }
    Ok(())
}

/// True atoms first, then false ones, each group in name order.
pub fn solution_line(a: &Assignment) -> String {
    let (t, f): (Vec<_>, Vec<_>) = a.iter().partition(|(_, v)| **v);
    t.iter()
        .map(|(k, _)| format!("{k}=t"))
        .chain(f.iter().map(|(k, _)| format!("{k}=f")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn selfcheck(n: u64, seed: u64, caps: &Caps, report: &mut RunReport) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = NestedParams::default();
    let (mut interps, mut trees, mut failures) = (0u64, 0u64, Vec::new());
    for k in 0..n {
        let ns = random::nested_system(&mut rng, &params);
        let r = check_equivalence(&ns, Sampling::Exhaustive, caps)?;
        interps += r.interpretations;
        if let Some(c) = r.counterexamples.first() {
            failures.push(format!("system {k}: SV({}) under {} differs", c.fact, c.interpretation));
        }
        let comp = compress(&ns, caps)?;
        let merged = merge(&ns)?;
        let probe = Interpretation::constant(&ns.space, Truth::Unknown);
        for &x in &ns.defined {
            for j in enumerate_justifications(&comp.system, x, caps.justifications)?.iter().take(16) {
                let big = expand(&comp, j)?;
                let back = shrink(&ns, &big)?;
                if !back.same_tree(j) || jval(j, &comp.system.evaluation, &probe)? != jval(&big, &merged.evaluation, &probe)? {
                    failures.push(format!("system {k}: shrink/expand round trip fails for {x}"));
                }
                trees += 1;
            }
        }
    }
    let dparams = DefinitionParams::default();
    let mut solved = 0u64;
    for k in 0..n {
        let d = random::definition(&mut rng, &dparams);
        let opens: Assignment = d.opens().into_iter().map(|a| (a, false)).collect();
        if solve_direct(&d, &opens)? != solve_via_translation(&d, &opens, caps)? {
            failures.push(format!("definition {k}: direct and translated solutions differ"));
        }
        solved += 1;
    }
    report.counters.insert("interpretations", interps);
    report.counters.insert("round_trips", trees);
    report.counters.insert("definitions", solved);
    report.line(format!("compress/merge: {n} systems, {interps} interpretations"));
    report.line(format!("shrink/expand: {trees} justifications"));
    report.line(format!("fixpoint definitions: {solved}"));
    for f in &failures {
        report.line(format!("FAIL {f}"));
    }
    report.line(if failures.is_empty() { "all checks passed".to_string() } else { format!("{} failure(s)", failures.len()) });
    if !failures.is_empty() {
        report.status = Status::Negative;
    }
    Ok(())
}
