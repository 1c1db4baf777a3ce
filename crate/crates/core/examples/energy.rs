//! Piezoelectric pulse energy and the energy-optimal pairs.
//!
//! ```text
//! cargo run --release --example energy
//! ```

use uswb::adapt::{
    energy_metrics, max_safe_pressure, pulse_energy, solve_energy_min, solve_implicit, AdaptConstraints,
    EnergyObjective, PiezoParams, TableOracle, INTENSITY_LIMIT,
};
use uswb::phy::{BerTable, Scheme};

fn main() -> uswb::Result<()> {
    let piezo = PiezoParams::default();
    println!("safety cap {:.0} Pa at {INTENSITY_LIMIT} W/m^2", max_safe_pressure(INTENSITY_LIMIT, piezo.rho, piezo.c));
    println!(
        "C0 = {:.2} pF, V = {:.2} V, E_p = {:.3e} J",
        piezo.capacitance() * 1e12,
        piezo.drive_voltage(),
        pulse_energy(&piezo)?
    );

    let table = BerTable::bundled();
    let c = AdaptConstraints::default();
    let e_p = pulse_energy(&piezo)?;
    println!("\n K   rate-max        E_b-min         E_s-min");
    for k in 0..=8 {
        let oracle = TableOracle::new(&table, Scheme::PpmBpsk, k, c.ber_max, c.n_h_max, c.n_s_max)?;
        let rate = solve_implicit(&c, &oracle)?;
        let eb = solve_energy_min(EnergyObjective::Eb, &c, &oracle)?;
        let es = solve_energy_min(EnergyObjective::Es, &c, &oracle)?;
        let show = |p: uswb::adapt::FramePair| {
            let (b, _) = energy_metrics(e_p, p.n_h, p.n_s, c.tc);
            format!("{p:<8} {:.1e}", b)
        };
        println!("{k:>2}   {}   {}   {}", show(rate), show(eb), show(es));
    }
    Ok(())
}
