//! Values of six branches under the five basic branch evaluations.
//!
//! `cargo run --example branch_table`

use nestjust::{evaluate_branch, Branch, EvalKind, Evaluation, Fact};

fn facts(items: &[&str]) -> Vec<Fact> {
    items.iter().map(|s| Fact::parse(s).unwrap()).collect()
}

fn main() {
    let branches = [
        ("p -> (~q)*", Branch::lasso(facts(&["p"]), facts(&["~q"]))),
        ("p -> r", Branch::Finite(facts(&["p", "r"]))),
        ("(q)*", Branch::lasso(vec![], facts(&["q"]))),
        ("~p -> ~r", Branch::Finite(facts(&["~p", "~r"]))),
        ("~p -> (q)*", Branch::lasso(facts(&["~p"]), facts(&["q"]))),
        ("(~q)*", Branch::lasso(vec![], facts(&["~q"]))),
    ];
    let kinds = [EvalKind::Sp, EvalKind::Wf, EvalKind::Cwf, EvalKind::Kk, EvalKind::St];

    print!("{:<12}", "branch");
    for k in kinds {
        print!("{:>5}", k.to_string());
    }
    println!();
    for (label, b) in &branches {
        print!("{label:<12}");
        for k in kinds {
            let v = evaluate_branch(&Evaluation::from(k), b, None).unwrap();
            print!("{:>5}", v.to_string());
        }
        println!();
    }
}
