//! Supported values and models of a single well-founded system.
//!
//! `cargo run --example models`

use nestjust::corpus;
use nestjust::{best_justification, merge, Caps, Fact, Interpretation, Semantics};

fn main() -> nestjust::Result<()> {
    let sys = merge(&corpus::example1())?;
    let caps = Caps::default();
    let sem = Semantics::new(&sys, &caps)?;

    let i = Interpretation::parse("p=t, q=f, r=t")?;
    for &x in sem.defined() {
        println!("SV({x}) under {i} = {}", sem.supported_value(x, &i)?);
    }
    println!("model: {}", sem.is_model(&i)?);

    println!("\nall three-valued models:");
    for m in sem.models(false, caps.interpretations)? {
        println!("  {m}");
    }

    let (j, v) = best_justification(&sys, Fact::parse("p")?, &i, &caps)?;
    println!("\nbest justification of p (value {v}):\n{}", j.to_text());
    Ok(())
}
