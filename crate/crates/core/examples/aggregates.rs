//! Two readings of the aggregate `#{p, q, s} >= 2` as a Kripke-Kleene
//! subsystem under a stable top level.
//!
//! `cargo run --example aggregates`

use nestjust::corpus;
use nestjust::{compress, Caps, Semantics};

fn main() -> nestjust::Result<()> {
    let caps = Caps::default();
    for (name, ns) in [("FLP", corpus::agg_flp()), ("GZ", corpus::agg_gz())] {
        let comp = compress(&ns, &caps)?;
        let sem = Semantics::new(&comp.system, &caps)?;
        let models = sem.models(true, caps.interpretations)?;
        println!("{name}: {} two-valued model(s)", models.len());
        for m in models {
            println!("  {m}");
        }
    }
    Ok(())
}
