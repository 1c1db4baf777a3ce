//! Regenerate figure data into `out/`.
//!
//! ```text
//! cargo run --release --example reproduce -- [figure ...]
//! ```
//!
//! With no arguments only the instant recipes run (fig2, fig4, table1);
//! name others explicitly, e.g. `fig3 fig8`.

use uswb::reproduce::{reproduce, ReproduceOptions};

fn main() -> uswb::Result<()> {
    let mut ids: Vec<String> = std::env::args().skip(1).collect();
    if ids.is_empty() {
        ids = ["fig2", "fig4", "table1"].map(String::from).to_vec();
    }
    let opts = ReproduceOptions::new("out", 1);
    for id in ids {
        let start = std::time::Instant::now();
        for path in reproduce(&id, &opts)? {
            println!("{id}: wrote {} ({:.1?})", path.display(), start.elapsed());
        }
    }
    Ok(())
}
