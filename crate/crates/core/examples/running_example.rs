//! A Kripke-Kleene system with a well-founded subsystem: flattening,
//! unfolding, compression and merge side by side.
//!
//! `cargo run --example running_example`

use nestjust::corpus;
use nestjust::syntax::{print_flat, print_system};
use nestjust::{compress, flatten, merge, unfold, Caps, Semantics};

fn main() -> nestjust::Result<()> {
    let caps = Caps::default();
    let ns = corpus::running();
    print!("{}", print_system(&ns));

    let inner = merge(&ns.children[0])?;
    let flat = flatten(&inner, &caps)?;
    println!("\nflattened subsystem:");
    print!("{}", print_flat(&flat.system, None));

    let unfolded = unfold(&ns.children[0].defined, &flat.system.frame.rules, &ns.rules, &caps)?;
    println!("\ntop rules unfolded:");
    for r in &unfolded {
        println!("  {r}");
    }

    let comp = compress(&ns, &caps)?;
    println!("\ncompression:");
    print!("{}", print_flat(&comp.system, Some(&comp.provenance)));

    let sc = Semantics::new(&comp.system, &caps)?;
    let sm = Semantics::new(&merge(&ns)?, &caps)?;
    println!("\nmodels of the compression:");
    for m in sc.models(false, caps.interpretations)? {
        println!("  {m}");
    }
    println!("models of the merge:");
    for m in sm.models(false, caps.interpretations)? {
        println!("  {m}");
    }
    Ok(())
}
