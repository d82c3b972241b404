//! Duhamel/Picard iteration for the truncated coupled-mode system.
//!
//! One step maps `c_{k-1}` to
//!
//! ```text
//! c_k(t_i, q) = Phi^{t_i}(q) c(0, q)
//!             + i eps * int_0^{t_i} Phi^{t_i - s}(q) * conv(c_{k-1}(s), q) ds
//! ```
//!
//! where `conv` is the cubic convolution `sum c(q1) conj(c(q2)) c(q3)` over
//! in-box triples with `q1 - q2 + q3 = q` (Galerkin projection: triples with
//! any factor outside the box are dropped, which keeps the truncated flow
//! Hamiltonian). The dispersion factor inside the integral is split as
//! `Phi^{t_i - s} = Phi^{t_i} conj(Phi^s)`, so each mode needs a single
//! cumulative prefix quadrature over the shared uniform grid.
//!
//! Determinism: the convolution accumulates in enumeration order for each
//! output mode, and parallelism is only across output modes (disjoint write
//! slots), so results are bit-identical for any thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{linear_evolution, CoefficientField, InitialData, TimeGrid};
use crate::lattice::{phase_of_dispersion, Lattice, ModeIndex, MAX_TOTAL_DIMENSION};
use crate::quad::prefix_integrals;

/// `z` when `j` is even, `conj(z)` when `j` is odd.
pub fn conjugation_tower(z: Complex64, j: u32) -> Complex64 {
    if j % 2 == 0 {
        z
    } else {
        z.conj()
    }
}

/// Cubic convolution at one output mode given by its enumeration index.
pub fn cubic_convolution_at(lat: &Lattice, values: &[Complex64], out_idx: usize) -> Complex64 {
    cubic_convolution_mixed_at(lat, values, values, values, out_idx)
}

/// `sum a(q1) conj(b(q2)) c(q3)` over in-box triples with `q1 - q2 + q3` equal
/// to the output mode; accumulation order is fixed by the enumeration.
pub fn cubic_convolution_mixed_at(
    lat: &Lattice,
    a: &[Complex64],
    b: &[Complex64],
    c: &[Complex64],
    out_idx: usize,
) -> Complex64 {
    let n = lat.len();
    let mut acc = Complex64::new(0.0, 0.0);
    if let Some(conv) = lat.conv_table() {
        // padded-cube path: q3 = out - q1 + q2 always indexes inside the table
        let offsets = &conv.offsets[..n];
        let base0 = conv.center + offsets[out_idx];
        for i1 in 0..n {
            let a1 = a[i1];
            let base = base0 - offsets[i1];
            for i2 in 0..n {
                let slot = conv.table[(base + offsets[i2]) as usize];
                if slot >= 0 {
                    acc += a1 * b[i2].conj() * c[slot as usize];
                }
            }
        }
        return acc;
    }
    let nu = lat.nu_total();
    let out = lat.coords(out_idx);
    let mut diff = [0i32; MAX_TOTAL_DIMENSION];
    for i1 in 0..n {
        let a1 = a[i1];
        let q1 = lat.coords(i1);
        for d in 0..nu {
            diff[d] = out[d] - q1[d];
        }
        for i2 in 0..n {
            if let Some(i3) = lat.lookup_sum(&diff[..nu], lat.coords(i2)) {
                acc += a1 * b[i2].conj() * c[i3];
            }
        }
    }
    acc
}

/// Cubic convolution at an explicit output mode.
pub fn cubic_convolution(
    lat: &Lattice,
    values: &[Complex64],
    out: &ModeIndex,
) -> Result<Complex64> {
    let idx = lat.index_of(out).ok_or(Error::ModeOutsideBox)?;
    Ok(cubic_convolution_at(lat, values, idx))
}

/// Convolution at every output mode, parallel across modes.
pub fn convolve_all(lat: &Lattice, values: &[Complex64], out: &mut [Complex64]) {
    debug_assert_eq!(out.len(), lat.len());
    out.par_iter_mut()
        .enumerate()
        .for_each(|(i, slot)| *slot = cubic_convolution_at(lat, values, i));
}

/// One Duhamel step. Node 0 returns the initial data exactly.
pub fn duhamel_step(
    lat: &Lattice,
    prev: &CoefficientField,
    initial: &InitialData,
    epsilon: f64,
) -> Result<CoefficientField> {
    if prev.n_modes() != lat.len() || initial.len() != lat.len() {
        return Err(Error::ShapeMismatch(format!(
            "field has {} modes, lattice has {}",
            prev.n_modes(),
            lat.len()
        )));
    }
    let grid = *prev.grid();
    let points = grid.n_points();
    let n = lat.len();

    // conv[node][mode], node-major like fields
    let mut conv = vec![Complex64::new(0.0, 0.0); points * n];
    for node in 0..points {
        convolve_all(lat, prev.at(node), &mut conv[node * n..(node + 1) * n]);
    }

    let h = grid.step();
    let ieps = Complex64::new(0.0, epsilon);
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|mode| {
            let disp = lat.dispersion(mode);
            let integrand: Vec<Complex64> = (0..points)
                .map(|node| {
                    phase_of_dispersion(disp, grid.node(node)).conj() * conv[node * n + mode]
                })
                .collect();
            let prefixes = prefix_integrals(&integrand, h);
            let c0 = initial.values()[mode];
            (0..points)
                .map(move |node| {
                    phase_of_dispersion(disp, grid.node(node)) * (c0 + ieps * prefixes[node])
                })
                .collect::<Vec<_>>()
        })
        .collect();

    // values above are mode-major; transpose into node-major field layout
    let mut field = CoefficientField::zeros(grid, n);
    for mode in 0..n {
        for node in 0..points {
            field.at_mut(node)[mode] = values[mode * points + node];
        }
    }
    if !field.all_finite() {
        let bad = (0..points)
            .find(|&node| {
                field
                    .at(node)
                    .iter()
                    .any(|z| !z.re.is_finite() || !z.im.is_finite())
            })
            .unwrap_or(points - 1);
        return Err(Error::BlowUp {
            time: grid.node(bad),
        });
    }
    Ok(field)
}

/// `max |a - b|` over all nodes and modes.
pub fn cauchy_diff(a: &CoefficientField, b: &CoefficientField) -> Result<f64> {
    if a.grid() != b.grid() || a.n_modes() != b.n_modes() {
        return Err(Error::ShapeMismatch(format!(
            "grids/modes differ: ({:?}, {}) vs ({:?}, {})",
            a.grid(),
            a.n_modes(),
            b.grid(),
            b.n_modes()
        )));
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// The Picard sequence `c_0, c_1, ..., c_k` with its sup-norm Cauchy
/// differences. `iterates[0]` is always the linear evolution of the data.
#[derive(Debug, Clone)]
pub struct PicardState {
    pub epsilon: f64,
    pub initial: InitialData,
    pub iterates: Vec<CoefficientField>,
    pub diffs: Vec<f64>,
}

impl PicardState {
    /// Number of completed Picard steps (the `k` of the last iterate).
    pub fn k(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &CoefficientField {
        self.iterates.last().expect("state holds at least c_0")
    }

    pub fn converged(&self, tol: f64) -> bool {
        self.diffs.last().is_some_and(|&d| d <= tol)
    }
}

/// Run the iteration until `k_max` steps or until the sup Cauchy difference
/// drops to `tol`. Two consecutive >10x growths of the difference abort with a
/// divergence error naming the offending step.
pub fn iterate(
    lat: &Lattice,
    initial: InitialData,
    epsilon: f64,
    grid: TimeGrid,
    k_max: usize,
    tol: f64,
) -> Result<PicardState> {
    assert!(k_max >= 1, "iterate needs k_max >= 1");
    let mut iterates = vec![linear_evolution(lat, &initial, grid)];
    let mut diffs = Vec::new();
    let mut growths = 0usize;
    for step in 1..=k_max {
        let next = duhamel_step(lat, &iterates[step - 1], &initial, epsilon)?;
        let diff = cauchy_diff(&next, &iterates[step - 1])?;
        if let Some(&prev) = diffs.last() {
            if diff > 10.0 * prev && prev > 0.0 {
                growths += 1;
                if growths >= 2 {
                    return Err(Error::Divergence {
                        step,
                        prev,
                        curr: diff,
                    });
                }
            } else {
                growths = 0;
            }
        }
        diffs.push(diff);
        iterates.push(next);
        if diff <= tol {
            break;
        }
    }
    Ok(PicardState {
        epsilon,
        initial,
        iterates,
        diffs,
    })
}
