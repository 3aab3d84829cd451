//! Where a rule of a compression comes from, and a justification as DOT.
//!
//! `cargo run --example explain > just.dot`

use nestjust::corpus;
use nestjust::{best_justification, branch_values, compress, Caps, Fact, Interpretation, Rule};

fn main() -> nestjust::Result<()> {
    let caps = Caps::default();
    let comp = compress(&corpus::running(), &caps)?;
    for line in comp.explain_rule(&Rule::parse("~r <- t")?) {
        eprintln!("{line}");
    }

    let i = Interpretation::parse("p=f, q=f, r=f")?;
    let (j, v) = best_justification(&comp.system, Fact::parse("~r")?, &i, &caps)?;
    eprintln!("SV(~r) under {i} = {v}");
    print!("{}", j.to_dot(&branch_values(&j, &comp.system.evaluation)?));
    Ok(())
}
