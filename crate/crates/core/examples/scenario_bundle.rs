//! Loads a bundled scenario with overrides, runs it, writes the bundle and
//! prints the report, as the `bornwave` binary does.
//!
//! `cargo run --example scenario_bundle -- noneq-guided checks.nonequilibrium.perturbation=0.5`

use bornwave::scenario::{self, RunOptions};

fn main() -> bornwave::Result<()> {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "ho-ground-1p".into());
    let overrides: Vec<String> = args.collect();

    let s = scenario::load(&id, &overrides)?;
    let dir = std::env::temp_dir().join("bornwave-example").join(&s.id);
    let b = scenario::run_to_dir(&s, RunOptions { threads: Some(1) }, &dir)?;
    for c in b.failures() {
        println!("failed: {} = {:.3e} (bound {:?})", c.check, c.value, c.bound);
    }
    print!("{}", scenario::report(&dir)?.render());
    println!("bundle written to {}", dir.display());
    Ok(())
}
