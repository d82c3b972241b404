//! Independent ground truth: direct RK4 integration of the truncated
//! Galerkin system
//!
//! ```text
//! dc/dt (q) = -i dispersion(q) c(q) + i eps conv(c)(q)
//! ```
//!
//! together with the conserved quantities of that system: the mass
//! `M = sum |c|^2` and the Hamiltonian energy
//! `H = sum dispersion |c|^2 - (eps/2) sum_{q1-q2+q3-q4=0} c1 conj(c2) c3 conj(c4)`.
//! The truncated flow conserves both exactly, so any drift measures
//! integrator error, not modeling error. The right-hand side shares the
//! cubic convolution with the Picard engine deliberately (it is brute-force
//! tested on tiny boxes); the time stepping is otherwise a separate code
//! path, so agreement between the two engines is evidential.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{CoefficientField, InitialData, TimeGrid};
use crate::lattice::Lattice;
use crate::picard::{cubic_convolution_at, PicardState};

/// RK4 trajectory recorded on the Picard grid, with conservation drifts.
#[derive(Debug, Clone)]
pub struct OdeRun {
    pub field: CoefficientField,
    /// Total number of RK4 micro-steps taken.
    pub steps: usize,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

/// `dc/dt` of the truncated system, written into `out`.
pub fn galerkin_rhs(lat: &Lattice, values: &[Complex64], epsilon: f64, out: &mut [Complex64]) {
    let ieps = Complex64::new(0.0, epsilon);
    out.par_iter_mut().enumerate().for_each(|(i, slot)| {
        let conv = cubic_convolution_at(lat, values, i);
        *slot = Complex64::new(0.0, -lat.dispersion(i)) * values[i] + ieps * conv;
    });
}

/// `sum |c|^2`.
pub fn mass(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm_sqr()).sum()
}

/// Hamiltonian energy of the truncated system. The quadrilinear part is
/// evaluated through the pair-correlation table `A(d) = sum_{q1-q2=d} c1 conj(c2)`,
/// so the whole sum is `sum_d |A(d)|^2`, manifestly real.
pub fn energy(lat: &Lattice, values: &[Complex64], epsilon: f64) -> f64 {
    let kinetic: f64 = (0..lat.len())
        .map(|i| lat.dispersion(i) * values[i].norm_sqr())
        .sum();

    let nu = lat.nu_total();
    let nu1 = lat.nu1();
    let rx = 2 * lat.trunc().radius_x as i32;
    let ry = 2 * lat.trunc().radius_y as i32;
    let radii: Vec<i32> = (0..nu).map(|d| if d < nu1 { rx } else { ry }).collect();
    let mut strides = vec![0usize; nu];
    let mut size = 1usize;
    for d in (0..nu).rev() {
        strides[d] = size;
        size *= 2 * radii[d] as usize + 1;
    }
    let mut table = vec![Complex64::new(0.0, 0.0); size];
    for i1 in 0..lat.len() {
        let q1 = lat.coords(i1);
        for i2 in 0..lat.len() {
            let q2 = lat.coords(i2);
            let mut key = 0usize;
            for d in 0..nu {
                key += (q1[d] - q2[d] + radii[d]) as usize * strides[d];
            }
            table[key] += values[i1] * values[i2].conj();
        }
    }
    let quartic: f64 = table.iter().map(|z| z.norm_sqr()).sum();
    kinetic - 0.5 * epsilon * quartic
}

/// Classical fourth-order Runge-Kutta with `substeps` fixed micro-steps per
/// grid interval, recording the state at every grid node.
pub fn rk4_integrate(
    lat: &Lattice,
    initial: &InitialData,
    epsilon: f64,
    grid: TimeGrid,
    substeps: usize,
) -> Result<OdeRun> {
    if substeps == 0 {
        return Err(Error::InvalidGrid("rk4 needs at least one substep".into()));
    }
    if initial.len() != lat.len() {
        return Err(Error::ShapeMismatch(format!(
            "initial data has {} modes, lattice has {}",
            initial.len(),
            lat.len()
        )));
    }
    let n = lat.len();
    let h = grid.step() / substeps as f64;
    let mut state: Vec<Complex64> = initial.values().to_vec();
    let mut field = CoefficientField::zeros(grid, n);
    field.at_mut(0).copy_from_slice(&state);

    let mass0 = mass(&state);
    let energy0 = energy(lat, &state, epsilon);
    let mut mass_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;

    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    let mut steps = 0usize;
    for node in 1..grid.n_points() {
        for sub in 0..substeps {
            let t = grid.node(node - 1) + sub as f64 * h;
            galerkin_rhs(lat, &state, epsilon, &mut k1);
            for i in 0..n {
                tmp[i] = state[i] + 0.5 * h * k1[i];
            }
            galerkin_rhs(lat, &tmp, epsilon, &mut k2);
            for i in 0..n {
                tmp[i] = state[i] + 0.5 * h * k2[i];
            }
            galerkin_rhs(lat, &tmp, epsilon, &mut k3);
            for i in 0..n {
                tmp[i] = state[i] + h * k3[i];
            }
            galerkin_rhs(lat, &tmp, epsilon, &mut k4);
            for i in 0..n {
                state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            steps += 1;
            if !state.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::BlowUp { time: t + h });
            }
        }
        field.at_mut(node).copy_from_slice(&state);
        mass_drift = mass_drift.max((mass(&state) - mass0).abs());
        energy_drift = energy_drift.max((energy(lat, &state, epsilon) - energy0).abs());
    }

    Ok(OdeRun {
        field,
        steps,
        mass_drift,
        energy_drift,
    })
}

/// Sup difference between the last Picard iterate and the RK4 trajectory over
/// the shared grid nodes.
pub fn compare(state: &PicardState, run: &OdeRun) -> Result<f64> {
    let a = state.last();
    let b = &run.field;
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!(
            "picard grid {:?} vs oracle grid {:?}",
            a.grid(),
            b.grid()
        )));
    }
    if a.n_modes() != b.n_modes() {
        return Err(Error::ShapeMismatch(format!(
            "picard has {} modes, oracle has {}",
            a.n_modes(),
            b.n_modes()
        )));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}
