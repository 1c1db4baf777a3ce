use super::PhyParams;

fn mexican_hat(t: f64, sigma: f64) -> f64 {
    let u = t / sigma;
    (1.0 - u * u) * (-0.5 * u * u).exp()
}

/// Second derivative of a Gaussian evaluated on `t_grid` (centred at t = 0),
/// scaled so that `Σ s²·dt = 1` with `dt` the grid spacing.
pub fn pulse_waveform(params: &PhyParams, t_grid: &[f64]) -> Vec<f64> {
    let sigma = params.sigma_p();
    let mut s: Vec<f64> = t_grid.iter().map(|&t| mexican_hat(t, sigma)).collect();
    let dt = if t_grid.len() > 1 {
        (t_grid[t_grid.len() - 1] - t_grid[0]) / (t_grid.len() - 1) as f64
    } else {
        1.0
    };
    let energy: f64 = s.iter().map(|v| v * v).sum::<f64>() * dt;
    if energy > 0.0 {
        let k = energy.sqrt().recip();
        s.iter_mut().for_each(|v| *v *= k);
    }
    s
}

/// Pulse sampled at the stream rate, starting at the chip (or PPM) slot
/// boundary, with unit discrete energy `Σ s² = 1`.
pub fn pulse_template(params: &PhyParams) -> Vec<f64> {
    let dt = params.sample_period();
    let n = params.pulse_samples();
    let centre = (n - 1) as f64 / 2.0;
    let grid: Vec<f64> = (0..n).map(|k| (k as f64 - centre) * dt).collect();
    let s = pulse_waveform(params, &grid);
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    s.into_iter().map(|v| v / norm).collect()
}
