//! The command-line tool, the text formats and reproducibility.

use std::process::Command;

use clap::Parser;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nestjust::cli::{run, Cli};
use nestjust::corpus;
use nestjust::random::{self, NestedParams};
use nestjust::{parse_definition, parse_system, print_system};

fn fixture(name: &str) -> String {
    format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn nestjust(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nestjust")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn flp_has_one_two_valued_model() {
    let (code, out, _) = nestjust(&["models", &fixture("agg_flp.njs"), "--two-valued", "--format", "json-lines"]);
    assert_eq!(code, 0);
    assert_eq!(out, "{\"model\":{\"atLeastTwo\":\"t\",\"p\":\"t\",\"q\":\"t\",\"s\":\"t\"}}\n");
}

#[test]
fn gz_has_no_two_valued_model() {
    let (code, out, _) = nestjust(&["models", &fixture("agg_gz.njs"), "--two-valued"]);
    assert_eq!(code, 1);
    assert!(out.ends_with("0 model(s)\n"));
}

#[test]
fn running_example_is_equivalent() {
    let (code, out, _) = nestjust(&["check-equiv", &fixture("running.njs"), "--exhaustive"]);
    assert_eq!(code, 0);
    assert_eq!(out, "equivalent (27 interpretations)\n");
}

#[test]
fn fixpoint_example_solves_both_ways() {
    for via in ["direct", "translation"] {
        let (code, out, _) = nestjust(&["fpd-solve", &fixture("fd.lfp"), "--via", via]);
        assert_eq!(code, 0);
        assert_eq!(out, "s=t t2=t u=t p=f q=f r=f\n");
    }
}

#[test]
fn explain_traces_a_compressed_rule() {
    let (code, out, _) = nestjust(&["explain", &fixture("running.njs"), "--rule", "~r <- t"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("~r <- t: unfolded from ~r <- ~q\n"), "{out}");
}

#[test]
fn explain_writes_dot() {
    let (code, out, _) = nestjust(&[
        "explain",
        &fixture("example1.njs"),
        "--fact",
        "p",
        "--interp",
        "p=t,q=f,r=t",
        "--format",
        "dot",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph justification {"));
    assert!(out.contains("branch values: {t, r}"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("nestjust-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.njs");
    std::fs::write(&bad, "system wf {\n  p <- .\n}\n").unwrap();
    let (code, _, err) = nestjust(&["models", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("2:"), "{err}");

    let siblings = dir.join("siblings.njs");
    std::fs::write(&siblings, "system kk {\n  r <- q.\n  system wf { q <- a. }\n  system wf { q <- b. }\n}\n").unwrap();
    let (code, _, err) = nestjust(&["models", siblings.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("clause 3"), "{err}");
}

#[test]
fn caps_exit_with_three() {
    let (code, _, err) = nestjust(&["sv", &fixture("running.njs"), "--interp", "p=t,q=t,r=t", "--cap-justifications", "1"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("justifications"));
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for (name, ns) in corpus::systems() {
        assert_eq!(parse_system(&print_system(&ns)).unwrap(), ns, "{name}");
    }
    let d = corpus::fd();
    assert_eq!(parse_definition(&d.to_string()).unwrap(), d);
}

#[test]
fn random_systems_round_trip_through_the_printer() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let ns = random::nested_system(&mut rng, &NestedParams::default());
        assert_eq!(parse_system(&print_system(&ns)).unwrap(), ns);
    }
}

#[test]
fn reports_are_reproducible() {
    let runs = [
        vec!["selfcheck", "--random", "4", "--seed", "9"],
        vec!["check-equiv", "--samples", "10", "--seed", "2", "--format", "json-lines"],
        vec!["models", "--format", "json-lines"],
    ];
    for args in runs {
        let mut argv: Vec<String> = vec!["nestjust".into(), args[0].into()];
        if args[0] != "selfcheck" {
            argv.push(fixture("agg_gz.njs"));
        }
        argv.extend(args[1..].iter().map(|s| s.to_string()));
        let once = run(&Cli::try_parse_from(&argv).unwrap());
        let twice = run(&Cli::try_parse_from(&argv).unwrap());
        assert_eq!(once, twice, "{argv:?}");
    }
}
