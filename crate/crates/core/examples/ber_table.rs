//! Build a BER table with the chip-level estimator and write it as CSV.
//!
//! ```text
//! cargo run --release --example ber_table -- [chips] [seed] [out.csv] [n_h_max] [n_s_max] [k_max]
//! ```
//!
//! With no arguments this builds a small 5×5 grid for K ≤ 2. The bundled
//! table in `data/ber_table.csv` was produced with
//! `-- 1000000 20240917 data/ber_table.csv 15 20 8`.

use std::time::Instant;

use uswb::phy::{build_ber_table, LinkModel, Scheme, TableEstimator, TableGrid};

fn main() -> uswb::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: u64| args.get(i).map(|s| s.parse().expect("numeric argument")).unwrap_or(default);
    let chips = arg(0, 50_000);
    let seed = arg(1, 7);
    let out = args.get(2).cloned().unwrap_or_else(|| "ber_table_small.csv".into());
    let grid = TableGrid::full(&Scheme::ALL, arg(3, 5) as u32, arg(4, 5) as u32, arg(5, 2) as u32);

    let start = Instant::now();
    let table = build_ber_table(&LinkModel::arm_default(), &grid, TableEstimator::ChipLevel { chips }, seed)?;
    table.save(out.as_ref())?;
    println!("{} entries written to {out} in {:.1?}", table.len(), start.elapsed());

    for scheme in Scheme::ALL {
        let k = *grid.k.last().unwrap();
        let (h, n) = (*grid.n_h.last().unwrap(), *grid.n_s.last().unwrap());
        println!("{scheme}: BER at K={k}, N_h={h}, N_s={n} is {:.3e}", table.ber(scheme, k, h, n)?);
    }
    Ok(())
}
