//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance` (add `--release` for the timings
//! the budgets were set against).

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nestjust::corpus;
use nestjust::justify::consistency_violations;
use nestjust::random::{self, DefinitionParams, NestedParams};
use nestjust::{
    branch_values, check_equivalence, compress, enumerate_justifications, enumerate_models, evaluate_branch, expand,
    flatten, is_model, jval, merge, shrink, solve_direct, solve_via_translation, unfold, Assignment, Branch, Caps,
    EvalKind, Evaluation, Fact, Interpretation, Name, NestedSystem, Rule, Sampling, Semantics, System, Truth,
};

const RANDOM_SYSTEMS: u64 = 200;
const RANDOM_DEFINITIONS: u64 = 100;
const SYSTEM_SEED: u64 = 0x6e6a_0006;
const DEFINITION_SEED: u64 = 0x6e6a_0009;
/// Justifications per defined fact taken into the shrink/expand run.
const ROUNDTRIP_SAMPLES: usize = 64;

type Outcome = std::result::Result<String, String>;

fn f(s: &str) -> Fact {
    Fact::parse(s).unwrap()
}

fn facts(items: &[&str]) -> Vec<Fact> {
    items.iter().map(|s| f(s)).collect()
}

fn rule_set(items: &[&str]) -> BTreeSet<Rule> {
    items.iter().map(|r| Rule::parse(r).unwrap()).collect()
}

fn interp(text: &str) -> Interpretation {
    Interpretation::parse(text).unwrap()
}

fn within(started: Instant, budget: Duration, detail: String) -> Outcome {
    let took = started.elapsed();
    if took <= budget {
        Ok(format!("{detail} ({:.2?} of {:.0?})", took, budget))
    } else {
        Err(format!("{detail}, but took {:.2?} (budget {:.0?})", took, budget))
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_systems() -> Vec<NestedSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(SYSTEM_SEED);
    let params = NestedParams::default();
    (0..RANDOM_SYSTEMS).map(|_| random::nested_system(&mut rng, &params)).collect()
}

fn branch_table() -> Outcome {
    let started = Instant::now();
    let b = [
        Branch::lasso(facts(&["p"]), facts(&["~q"])),
        Branch::Finite(facts(&["p", "r"])),
        Branch::lasso(vec![], facts(&["q"])),
        Branch::Finite(facts(&["~p", "~r"])),
        Branch::lasso(facts(&["~p"]), facts(&["q"])),
        Branch::lasso(vec![], facts(&["~q"])),
    ];
    let table: [(EvalKind, [&str; 6]); 5] = [
        (EvalKind::Sp, ["~q", "r", "q", "~r", "q", "~q"]),
        (EvalKind::Wf, ["t", "r", "f", "~r", "f", "t"]),
        (EvalKind::Cwf, ["f", "r", "t", "~r", "t", "f"]),
        (EvalKind::Kk, ["u", "r", "u", "~r", "u", "u"]),
        (EvalKind::St, ["~q", "r", "f", "~r", "q", "t"]),
    ];
    let mut wrong = Vec::new();
    for (kind, row) in table {
        for (i, want) in row.iter().enumerate() {
            let got = evaluate_branch(&Evaluation::from(kind), &b[i], None).map_err(err)?;
            if got != f(want) {
                wrong.push(format!("{kind}(b{}) = {got}, expected {want}", i + 1));
            }
        }
    }
    if !wrong.is_empty() {
        return Err(wrong.join("; "));
    }
    within(started, Duration::from_secs(1), "30/30 entries".into())
}

fn example1_model() -> Outcome {
    let ns = corpus::example1();
    let sys = merge(&ns).map_err(err)?;
    let caps = Caps::default();
    let i = interp("r=t p=t q=f");
    if !is_model(&sys, &i, &caps).map_err(err)? {
        return Err(format!("{i} is not a WF-model"));
    }
    let started = Instant::now();
    let models = enumerate_models(&sys, false, &caps).map_err(err)?;
    if !models.contains(&i) {
        return Err("enumeration misses the model".into());
    }
    within(started, Duration::from_secs(5), format!("{i} is a model; {} models in total", models.len()))
}

fn flattening() -> Outcome {
    let inner = &corpus::running().children[0];
    let sys = merge(inner).map_err(err)?;
    let got: BTreeSet<Rule> = flatten(&sys, &Caps::default()).map_err(err)?.system.frame.rules;
    let want = rule_set(&["p <- t, r", "~p <- f", "~p <- ~r", "q <- f", "~q <- t"]);
    if got == want {
        Ok(format!("{} rules", got.len()))
    } else {
        Err(format!("got {got:?}"))
    }
}

fn unfolding() -> Outcome {
    let ns = corpus::running();
    let caps = Caps::default();
    let lower = flatten(&merge(&ns.children[0]).map_err(err)?, &caps).map_err(err)?.system.frame.rules;
    let x: BTreeSet<Fact> = ns.children[0].defined.clone();
    let got = unfold(&x, &lower, &ns.rules, &caps).map_err(err)?;
    let want = rule_set(&["r <- t, r, f", "~r <- ~r", "~r <- f", "~r <- t"]);
    if got == want {
        Ok(format!("{} rules", got.len()))
    } else {
        Err(format!("got {got:?}"))
    }
}

fn aggregates() -> Outcome {
    let caps = Caps::default();
    let mut notes = Vec::new();
    for (name, ns, want) in [
        ("FLP", corpus::agg_flp(), Some("atLeastTwo=t p=t q=t s=t")),
        ("GZ", corpus::agg_gz(), None),
    ] {
        let started = Instant::now();
        let comp = compress(&ns, &caps).map_err(err)?;
        let models = enumerate_models(&comp.system, true, &caps).map_err(err)?;
        let expected: Vec<Interpretation> = want.into_iter().map(interp).collect();
        if models != expected {
            return Err(format!("{name}: two-valued models {:?}", models.iter().map(|m| m.to_string()).collect::<Vec<_>>()));
        }
        let took = started.elapsed();
        if took > Duration::from_secs(10) {
            return Err(format!("{name} took {took:.2?}"));
        }
        notes.push(format!("{name}: {} model(s) in {took:.2?}", models.len()));
    }
    Ok(notes.join(", "))
}

fn compress_merge_equivalence(systems: &[NestedSystem]) -> Outcome {
    let started = Instant::now();
    let caps = Caps::default();
    let mut interps = 0u64;
    let mut failures = Vec::new();
    for (k, ns) in std::iter::once(&corpus::running()).chain(systems).enumerate() {
        let report = check_equivalence(ns, Sampling::Exhaustive, &caps).map_err(|e| format!("system {k}: {e}"))?;
        interps += report.interpretations;
        if let Some(c) = report.counterexamples.first() {
            failures.push(format!(
                "system {k}: SV({}, {}) compress={} merge={}",
                c.fact, c.interpretation, c.compress, c.merge
            ));
        }
    }
    if !failures.is_empty() {
        return Err(format!("{} counterexample system(s): {}", failures.len(), failures.join("; ")));
    }
    within(
        started,
        Duration::from_secs(600),
        format!("{} systems, {interps} interpretations, 0 counterexamples", systems.len() + 1),
    )
}

fn flattening_equivalence() -> Outcome {
    let caps = Caps::default();
    let mut checked = 0;
    for (name, ns) in corpus::systems() {
        for (k, node) in ns.preorder().into_iter().enumerate() {
            let sys = merge(node).map_err(err)?;
            if !sys.is_parametric() {
                continue;
            }
            let flat = flatten(&sys, &caps).map_err(err)?.system;
            let (a, b) = (Semantics::new(&sys, &caps).map_err(err)?, Semantics::new(&flat, &caps).map_err(err)?);
            let atoms = sys.atoms();
            for i in Interpretation::enumerate(&atoms, false) {
                for &x in &sys.frame.defined {
                    let (va, vb) = (a.supported_value(x, &i).map_err(err)?, b.supported_value(x, &i).map_err(err)?);
                    if va != vb {
                        return Err(format!("{name} node {k}: SV({x}, {i}) = {va}, flattened {vb}"));
                    }
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} parametric systems, 0 counterexamples"))
}

fn roundtrip(systems: &[NestedSystem]) -> Outcome {
    let caps = Caps::default();
    let mut samples = 0usize;
    for (k, ns) in std::iter::once(&corpus::running()).chain(systems).enumerate() {
        let comp = compress(ns, &caps).map_err(err)?;
        let merged = merge(ns).map_err(err)?;
        let atoms = ns.atoms();
        let interps: Vec<Interpretation> = Interpretation::enumerate(&atoms, false).collect();
        for &x in &ns.defined {
            let js = enumerate_justifications(&comp.system, x, caps.justifications).map_err(err)?;
            for j in js.iter().take(ROUNDTRIP_SAMPLES) {
                let big = expand(&comp, j).map_err(|e| format!("system {k}: expand: {e}"))?;
                big.check(&merged.frame).map_err(|e| format!("system {k}: expanded tree: {e}"))?;
                let back = shrink(ns, &big).map_err(|e| format!("system {k}: shrink: {e}"))?;
                if !back.same_tree(j) {
                    return Err(format!("system {k}: shrink(expand(J)) differs for\n{}", j.to_text()));
                }
                let small_values = branch_values(j, &comp.system.evaluation).map_err(err)?;
                let big_values = branch_values(&big, &merged.evaluation).map_err(err)?;
                if small_values != big_values {
                    return Err(format!("system {k}: branch values {small_values:?} vs {big_values:?}"));
                }
                for i in &interps {
                    let a = jval(j, &comp.system.evaluation, i).map_err(err)?;
                    let b = jval(&big, &merged.evaluation, i).map_err(err)?;
                    if a != b {
                        return Err(format!("system {k}: jval under {i}: {a} vs {b}"));
                    }
                }
                samples += 1;
            }
        }
    }
    Ok(format!("{samples} compressed justifications round-tripped"))
}

fn all_assignments(names: &BTreeSet<Name>) -> Vec<Assignment> {
    let names: Vec<Name> = names.iter().copied().collect();
    (0..1u64 << names.len())
        .map(|code| names.iter().enumerate().map(|(i, &n)| (n, code >> i & 1 == 1)).collect())
        .collect()
}

fn fixpoint_definitions() -> Outcome {
    let started = Instant::now();
    let caps = Caps::default();
    let d = corpus::fd();
    let want: Assignment = ["p", "q", "r", "s", "t2", "u"]
        .iter()
        .map(|&n| (Name::intern(n), matches!(n, "s" | "t2" | "u")))
        .collect();
    let direct = solve_direct(&d, &Assignment::new()).map_err(err)?;
    let translated = solve_via_translation(&d, &Assignment::new(), &caps).map_err(err)?;
    if direct != want || translated != want {
        return Err(format!("example: direct {direct:?}, translated {translated:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFINITION_SEED);
    let params = DefinitionParams::default();
    let mut runs = 0;
    for k in 0..RANDOM_DEFINITIONS {
        let d = random::definition(&mut rng, &params);
        for opens in all_assignments(&d.opens()) {
            let a = solve_direct(&d, &opens).map_err(err)?;
            let b = solve_via_translation(&d, &opens, &caps).map_err(|e| format!("definition {k}: {e}"))?;
            if a != b {
                return Err(format!("definition {k}:\n{d}\nopens {opens:?}: direct {a:?}, translated {b:?}"));
            }
            runs += 1;
        }
    }
    within(
        started,
        Duration::from_secs(120),
        format!("example s,t2,u true; {RANDOM_DEFINITIONS} random definitions agree on {runs} open assignments"),
    )
}

fn consistency() -> Outcome {
    let caps = Caps::default();
    let mut checked = Vec::new();
    for (name, ns) in corpus::systems() {
        if !ns.preorder().iter().all(|n| n.local_frame().is_complementary()) {
            continue;
        }
        let mut flat: Vec<(&str, System)> = vec![("merge", merge(&ns).map_err(err)?)];
        if ns.is_compressible() {
            flat.push(("compress", compress(&ns, &caps).map_err(err)?.system));
        }
        for (how, sys) in flat {
            let sem = Semantics::new(&sys, &caps).map_err(err)?;
            let atoms = sys.atoms();
            let bad = consistency_violations(&sem, Interpretation::enumerate(&atoms, false)).map_err(err)?;
            if let Some((x, i, a, b)) = bad.first() {
                return Err(format!("{name} ({how}): SV({x}, {i}) = {a} but SV(~{x}) = {b}"));
            }
            checked.push(format!("{name}/{how}"));
        }
    }
    Ok(format!("0 violations on {}", checked.join(", ")))
}

fn running_compress_model() -> Outcome {
    let caps = Caps::default();
    let comp = compress(&corpus::running(), &caps).map_err(err)?;
    let models = enumerate_models(&comp.system, false, &caps).map_err(err)?;
    let pinned = interp("p=f q=f r=f");
    if models != vec![pinned.clone()] {
        return Err(format!("models {:?}", models.iter().map(|m| m.to_string()).collect::<Vec<_>>()));
    }
    let not_r = f("~r");
    let sv = nestjust::supported_value(&comp.system, not_r, &pinned, &caps).map_err(err)?;
    let rule = Rule::parse("~r <- t").unwrap();
    let why = comp.explain_rule(&rule);
    if sv != Truth::True || !why[0].contains("unfolded from") {
        return Err(format!("SV(~r) = {sv}; provenance {why:?}"));
    }
    println!("    computed unique model: {pinned}");
    println!("    SV(~r, I) = {sv} (stated elsewhere as I(~r) = f, which no model satisfies)");
    for line in why {
        println!("    {line}");
    }
    Ok(format!("pinned {pinned}, SV(~r) = t"))
}

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let systems = random_systems();
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("branch table", Box::new(branch_table)),
        ("example 1 WF-model", Box::new(example1_model)),
        ("flattening of the inner system", Box::new(flattening)),
        ("unfolding against the flattened child", Box::new(unfolding)),
        ("aggregate compressions under ST", Box::new(aggregates)),
        ("compress/merge equivalence", Box::new(|| compress_merge_equivalence(&systems))),
        ("parametric systems equal their flattening", Box::new(flattening_equivalence)),
        ("shrink/expand round trip", Box::new(|| roundtrip(&systems))),
        ("fixpoint definitions", Box::new(fixpoint_definitions)),
        ("consistency of complementary systems", Box::new(consistency)),
        ("running example compression model", Box::new(running_compress_model)),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
