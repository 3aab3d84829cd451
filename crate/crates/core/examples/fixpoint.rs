//! A nested least/greatest fixpoint definition, solved directly and through
//! its translation into a nested justification system.
//!
//! `cargo run --example fixpoint`

use nestjust::corpus;
use nestjust::syntax::print_system;
use nestjust::{solve_direct, solve_via_translation, translate_to_nested, Assignment, Caps};

fn main() -> nestjust::Result<()> {
    let d = corpus::fd();
    let caps = Caps::default();
    println!("{d}");
    print!("{}", print_system(&translate_to_nested(&d, &caps)?));

    let direct = solve_direct(&d, &Assignment::new())?;
    let translated = solve_via_translation(&d, &Assignment::new(), &caps)?;
    for (atom, v) in &direct {
        println!("{atom} = {}   (translation: {})", v, translated[atom]);
    }
    Ok(())
}
