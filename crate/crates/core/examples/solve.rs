//! Solve the bundled adaptation instances.
//!
//! ```text
//! cargo run --release --example solve -- [instance.toml]
//! ```
//!
//! Without an argument every instance under `examples/data/` is solved.

use std::path::PathBuf;

use uswb::adapt::{solve_instance, ProblemInstance};
use uswb::phy::BerTable;

fn main() -> uswb::Result<()> {
    let paths: Vec<PathBuf> = match std::env::args().nth(1) {
        Some(p) => vec![p.into()],
        None => {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data");
            let mut v: Vec<PathBuf> = std::fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml") && p.to_string_lossy().contains("instance"))
                .collect();
            v.sort();
            v
        }
    };
    let table = BerTable::bundled();
    for path in paths {
        let inst = ProblemInstance::load(&path)?;
        let name = path.file_name().unwrap().to_string_lossy();
        match solve_instance(&inst, Some(&table)) {
            Ok(r) => {
                print!("{name}: {} at {:.1} kbit/s", r.pair, r.rate / 1e3);
                if let Some(eb) = r.e_b {
                    print!(", E_b = {eb:.3e} J");
                }
                if let Some((l, u)) = r.bounds {
                    print!(", inverse rate in [{:.3e}, {:.3e}] s/bit", l, u);
                }
                println!();
            }
            Err(e) => println!("{name}: {e}"),
        }
    }
    Ok(())
}
