//! Compression against merge on random nested systems.
//!
//! `cargo run --release --example equivalence -- [systems] [seed]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nestjust::random::{nested_system, NestedParams};
use nestjust::syntax::print_system;
use nestjust::{check_equivalence, Caps, Sampling};

fn main() -> nestjust::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(50, |s| s.parse().expect("system count"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let caps = Caps::default();
    let mut total = 0;
    for k in 0..n {
        let ns = nested_system(&mut rng, &NestedParams::default());
        let report = check_equivalence(&ns, Sampling::Exhaustive, &caps)?;
        total += report.interpretations;
        if !report.equivalent() {
            println!("system {k} differs:\n{}", print_system(&ns));
            for c in report.counterexamples.iter().take(3) {
                println!("  SV({}) under {}: {} vs {}", c.fact, c.interpretation, c.compress, c.merge);
            }
        }
    }
    println!("{n} systems, {total} interpretations compared");
    Ok(())
}
