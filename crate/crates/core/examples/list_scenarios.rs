//! The scenarios shipped with the library, with their refinement ladders and
//! the checks each one asserts.

use bornwave::scenario::{bundled, list_scenarios, Scenario};

fn main() -> bornwave::Result<()> {
    for (id, description) in list_scenarios(None)? {
        let s = Scenario::from_toml(bundled(&id).expect("listed").source)?;
        let suites: Vec<&str> = s.checks.suites.iter().map(|x| x.name()).collect();
        println!("{id}\n  {description}");
        println!("  {}D, levels {:?}, {} equations, suites {suites:?}", s.space.dims, s.levels(), s.checks.equations.len());
    }
    Ok(())
}
