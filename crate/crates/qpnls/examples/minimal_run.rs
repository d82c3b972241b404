//! Minimal end-to-end use of the library: build a truncated lattice, run the
//! Picard iteration, check the decay bound, and cross-check against the RK4
//! oracle.

use qpnls::combin::{amplitude_constant, time_scale};
use qpnls::fields::{generate_initial, DecayProfile, TimeGrid};
use qpnls::lattice::{FrequencyBasis, Lattice, TruncationBox};
use qpnls::oracle::{compare, rk4_integrate};
use qpnls::picard::iterate;
use qpnls::verify::check_uniform_decay;

fn main() -> qpnls::Result<()> {
    let basis = FrequencyBasis::new(vec![1.0, 2f64.sqrt()], vec![1.0, 3f64.sqrt()])?;
    let lat = Lattice::new(basis, TruncationBox::new(2, 2))?;
    let profile = DecayProfile::Exponential {
        kappa1: 1.0,
        kappa2: 1.0,
    };
    let epsilon = 0.01;
    let te = time_scale(&profile, lat.nu1(), lat.nu2(), epsilon)?;
    let grid = TimeGrid::new(te, 16)?;
    println!(
        "box of {} modes, T_eps = {te:.6e}, A = {}",
        lat.len(),
        amplitude_constant(&profile, lat.nu1(), lat.nu2())?
    );

    let data = generate_initial(&lat, &profile, 0);
    let state = iterate(&lat, data.clone(), epsilon, grid, 4, 1e-10)?;
    println!("picard: k = {}, diffs = {:?}", state.k(), state.diffs);

    let report = check_uniform_decay(&lat, &state, &profile)?;
    println!(
        "uniform decay: worst ratio {:.3e} ({})",
        report.worst_ratio,
        if report.pass { "pass" } else { "FAIL" }
    );

    let run = rk4_integrate(&lat, &data, epsilon, grid, 8)?;
    println!(
        "oracle: sup diff {:.3e}, mass drift {:.3e}, energy drift {:.3e}",
        compare(&state, &run)?,
        run.mass_drift,
        run.energy_drift
    );
    Ok(())
}
