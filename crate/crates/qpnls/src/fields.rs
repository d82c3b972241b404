//! Coefficient fields `c(t, m, n)` on the truncated lattice.
//!
//! Initial data is generated with the prescribed decay attained with equality
//! (not merely bounded by it), which keeps the decay-bound checks sharp. All
//! field values are dense, node-major, in lattice enumeration order; fields
//! are value-semantic snapshots and never mutated in place by the engines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{phase_of_dispersion, FrequencyBasis, Lattice, ModeIndex, TruncationBox};

/// Decay law for the initial Fourier data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DecayProfile {
    Exponential { kappa1: f64, kappa2: f64 },
    Polynomial { r1: f64, r2: f64 },
}

impl DecayProfile {
    /// `0 < kappa_j <= 1` for the exponential law; for the polynomial law the
    /// rates must make the lattice sums finite (`r_j > nu_j`).
    pub fn validate(&self, nu1: usize, nu2: usize) -> Result<()> {
        match *self {
            DecayProfile::Exponential { kappa1, kappa2 } => {
                for k in [kappa1, kappa2] {
                    if !(k > 0.0 && k <= 1.0) {
                        return Err(Error::InvalidProfile(format!(
                            "exponential rate must satisfy 0 < kappa <= 1, got {k}"
                        )));
                    }
                }
            }
            DecayProfile::Polynomial { r1, r2 } => {
                if !(r1 > nu1 as f64) || !(r2 > nu2 as f64) {
                    return Err(Error::InvalidProfile(format!(
                        "polynomial rates must exceed the lattice dimensions \
                         (r1 > {nu1}, r2 > {nu2}), got ({r1}, {r2})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Magnitude of the generated initial datum at `(|m|_1, |n|_1)`.
    pub fn magnitude(&self, l1_m: u32, l1_n: u32) -> f64 {
        match *self {
            DecayProfile::Exponential { kappa1, kappa2 } => {
                (-(kappa1 * l1_m as f64 + kappa2 * l1_n as f64)).exp()
            }
            DecayProfile::Polynomial { r1, r2 } => {
                (1.0 + l1_m as f64).powf(-r1) * (1.0 + l1_n as f64).powf(-r2)
            }
        }
    }

    /// Inverse of the half-rate decay weight, raised to `scale`: for the
    /// exponential law `exp(scale * (kappa1/2 |m| + kappa2/2 |n|))`, and the
    /// analogous half-power for the polynomial law.
    pub fn half_weight(&self, l1_m: u32, l1_n: u32, scale: f64) -> f64 {
        match *self {
            DecayProfile::Exponential { kappa1, kappa2 } => {
                (scale * (0.5 * kappa1 * l1_m as f64 + 0.5 * kappa2 * l1_n as f64)).exp()
            }
            DecayProfile::Polynomial { r1, r2 } => {
                (1.0 + l1_m as f64).powf(scale * 0.5 * r1)
                    * (1.0 + l1_n as f64).powf(scale * 0.5 * r2)
            }
        }
    }

    /// Whether `0 < kappa_j/2 - 2 rho_j <= 1` holds (the regime in which the
    /// weighted-norm comparison of nonlinear and linear solutions is stated).
    /// Only meaningful for the exponential law.
    pub fn rho_constraint_ok(&self, rho1: f64, rho2: f64) -> bool {
        match *self {
            DecayProfile::Exponential { kappa1, kappa2 } => {
                let a = 0.5 * kappa1 - 2.0 * rho1;
                let b = 0.5 * kappa2 - 2.0 * rho2;
                a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0
            }
            DecayProfile::Polynomial { .. } => false,
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, DecayProfile::Exponential { .. })
    }
}

/// Uniform grid `t_i = i * t_end / N`, `N` even, node 0 exactly 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    #[serde(rename = "nodes")]
    pub num_nodes: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, num_nodes: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "t_end must be positive and finite, got {t_end}"
            )));
        }
        if num_nodes < 2 || num_nodes % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "num_nodes must be an even integer >= 2, got {num_nodes}"
            )));
        }
        Ok(Self { t_end, num_nodes })
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.num_nodes as f64
    }

    /// Number of stored samples (`N + 1`).
    pub fn n_points(&self) -> usize {
        self.num_nodes + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.t_end / self.num_nodes as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points()).map(|i| self.node(i)).collect()
    }
}

/// Initial Fourier data `c(m, n)` in lattice enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    values: Vec<Complex64>,
}

impl InitialData {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Time-indexed coefficients, node-major, lattice enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    grid: TimeGrid,
    n_modes: usize,
    values: Vec<Complex64>,
}

impl CoefficientField {
    pub fn zeros(grid: TimeGrid, n_modes: usize) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.n_points() * n_modes];
        Self {
            grid,
            n_modes,
            values,
        }
    }

    pub fn from_values(grid: TimeGrid, n_modes: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() * n_modes {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values, got {}",
                grid.n_points() * n_modes,
                values.len()
            )));
        }
        Ok(Self {
            grid,
            n_modes,
            values,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn at(&self, node: usize) -> &[Complex64] {
        &self.values[node * self.n_modes..(node + 1) * self.n_modes]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [Complex64] {
        &mut self.values[node * self.n_modes..(node + 1) * self.n_modes]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn all_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Deterministic per-mode unit phase. Seed 0 yields phase 1 everywhere (real
/// positive data); otherwise the angle is a hash of `(seed, m, n)`, so it does
/// not depend on the box radius or enumeration order.
fn mode_phase(seed: u64, idx: &ModeIndex) -> Complex64 {
    if seed == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut h = splitmix64(seed);
    for &c in idx.m.iter().chain(&idx.n) {
        h = splitmix64(h ^ (c as i64 as u64));
    }
    let angle = (h as f64 / u64::MAX as f64) * std::f64::consts::TAU;
    Complex64::from_polar(1.0, angle)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Initial data attaining the decay law with equality: `|c(m,n)|` is exactly
/// the profile magnitude, with phases drawn from `phase_seed`.
pub fn generate_initial(lat: &Lattice, profile: &DecayProfile, phase_seed: u64) -> InitialData {
    let values = (0..lat.len())
        .map(|i| profile.magnitude(lat.l1_m(i), lat.l1_n(i)) * mode_phase(phase_seed, lat.mode(i)))
        .collect();
    InitialData::new(values)
}

/// `sqrt( sum exp(2 rho1 |m| + 2 rho2 |n|) |c|^2 )` over the box.
pub fn weighted_h_norm(lat: &Lattice, values: &[Complex64], rho1: f64, rho2: f64) -> Result<f64> {
    if rho1 < 0.0 || rho2 < 0.0 {
        return Err(Error::NegativeWeight(rho1, rho2));
    }
    let mut acc = 0.0;
    for i in 0..lat.len() {
        let w = (2.0 * (rho1 * lat.l1_m(i) as f64 + rho2 * lat.l1_n(i) as f64)).exp();
        acc += w * values[i].norm_sqr();
    }
    Ok(acc.sqrt())
}

/// Pointwise Fourier synthesis `u(x, y) = sum c e^{i(<m,omega>x + <n,omega'>y)}`
/// by direct summation over the box.
pub fn synthesize(lat: &Lattice, values: &[Complex64], points: &[(f64, f64)]) -> Vec<Complex64> {
    points
        .iter()
        .map(|&(x, y)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..lat.len() {
                let arg = lat.freq_x_of(i) * x + lat.freq_y_of(i) * y;
                acc += values[i] * Complex64::from_polar(1.0, arg);
            }
            acc
        })
        .collect()
}

/// Free evolution `c0(t_i, m, n) = e^{-i dispersion t_i} c(m, n)`.
pub fn linear_evolution(lat: &Lattice, initial: &InitialData, grid: TimeGrid) -> CoefficientField {
    let mut field = CoefficientField::zeros(grid, lat.len());
    for node in 0..grid.n_points() {
        let t = grid.node(node);
        let slice = field.at_mut(node);
        for i in 0..lat.len() {
            slice[i] = phase_of_dispersion(lat.dispersion(i), t) * initial.values()[i];
        }
    }
    field
}

/// `max |c(t,m,n)| * w(m,n)^scale` over all nodes and modes, where `w` is the
/// inverse half-rate decay weight of the profile. With `scale = 1` this is the
/// quantity compared against the uniform amplitude constant.
pub fn sup_weighted_residual(
    lat: &Lattice,
    field: &CoefficientField,
    profile: &DecayProfile,
    scale: f64,
) -> f64 {
    let mut sup: f64 = 0.0;
    for node in 0..field.grid().n_points() {
        let slice = field.at(node);
        for i in 0..lat.len() {
            sup = sup.max(slice[i].norm() * profile.half_weight(lat.l1_m(i), lat.l1_n(i), scale));
        }
    }
    sup
}

/// On-disk snapshot of one coefficient field (the format consumed and emitted
/// by the command-line tools). Complex values are `[re, im]` pairs of doubles;
/// modes are listed in enumeration order as `[[m...], [n...]]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub basis: FrequencyBasis,
    #[serde(rename = "box")]
    pub trunc: BoxDims,
    pub grid: TimeGrid,
    pub modes: Vec<(Vec<i32>, Vec<i32>)>,
    pub values: Vec<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoxDims {
    pub rx: u32,
    pub ry: u32,
}

impl Snapshot {
    pub fn from_field(
        lat: &Lattice,
        field: &CoefficientField,
        config_hash: Option<String>,
    ) -> Self {
        let modes = lat
            .modes()
            .iter()
            .map(|idx| (idx.m.clone(), idx.n.clone()))
            .collect();
        let values = (0..field.grid().n_points())
            .map(|node| field.at(node).iter().map(|z| (z.re, z.im)).collect())
            .collect();
        Snapshot {
            basis: lat.basis().clone(),
            trunc: BoxDims {
                rx: lat.trunc().radius_x,
                ry: lat.trunc().radius_y,
            },
            grid: *field.grid(),
            modes,
            values,
            config_hash,
        }
    }

    /// Rebuild the lattice and field, checking that the stored mode list
    /// matches the deterministic enumeration order.
    pub fn into_parts(self) -> Result<(Lattice, CoefficientField)> {
        let basis = FrequencyBasis::new(self.basis.omega, self.basis.omega_prime)?;
        let lat = Lattice::new(basis, TruncationBox::new(self.trunc.rx, self.trunc.ry))?;
        if self.modes.len() != lat.len() {
            return Err(Error::SnapshotFormat(format!(
                "snapshot lists {} modes, box has {}",
                self.modes.len(),
                lat.len()
            )));
        }
        for (i, (m, n)) in self.modes.iter().enumerate() {
            let idx = lat.mode(i);
            if &idx.m != m || &idx.n != n {
                return Err(Error::SnapshotFormat(format!(
                    "mode {i} out of enumeration order"
                )));
            }
        }
        let grid = TimeGrid::new(self.grid.t_end, self.grid.num_nodes)?;
        if self.values.len() != grid.n_points() {
            return Err(Error::SnapshotFormat(format!(
                "snapshot has {} nodes, grid expects {}",
                self.values.len(),
                grid.n_points()
            )));
        }
        let mut flat = Vec::with_capacity(grid.n_points() * lat.len());
        for node in &self.values {
            if node.len() != lat.len() {
                return Err(Error::SnapshotFormat(
                    "node value count does not match mode count".into(),
                ));
            }
            flat.extend(node.iter().map(|&(re, im)| Complex64::new(re, im)));
        }
        let field = CoefficientField::from_values(grid, lat.len(), flat)?;
        if !field.all_finite() {
            return Err(Error::SnapshotFormat(
                "non-finite values in snapshot".into(),
            ));
        }
        Ok((lat, field))
    }
}
