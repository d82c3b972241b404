//! Dual-lattice geometry for quasi-periodic Fourier modes.
//!
//! A mode is a pair `(m, n)` in `Z^nu1 x Z^nu2`; its frequencies in physical
//! space are `<m, omega>` and `<n, omega'>`, and the free Schroedinger flow
//! rotates it with the dispersion phase `exp(-i (<m,omega>^2 + <n,omega'>^2) t)`.
//! Everything downstream (fields, convolution, oracle) works on the finite
//! truncation `|m|_1 <= R1, |n|_1 <= R2` enumerated here in a fixed total
//! order: lexicographic on `(|m|_1, m, |n|_1, n)`. That order is part of the
//! reproducibility contract; snapshots and parallel reductions rely on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rejection threshold for near-resonant bases. A margin this small makes the
/// orthogonality averages (and hence every per-mode statement) numerically
/// meaningless at desk scale.
pub const MIN_INDEPENDENCE_MARGIN: f64 = 1e-6;

/// Hard cap on `nu1 + nu2`, sized for the stack buffers in the convolution.
pub const MAX_TOTAL_DIMENSION: usize = 16;

/// Frequency vectors `omega` (x-direction) and `omega'` (y-direction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBasis {
    pub omega: Vec<f64>,
    pub omega_prime: Vec<f64>,
}

impl FrequencyBasis {
    /// Structural validation only; the rational-independence margin is
    /// enforced against a concrete box radius in [`Lattice::new`].
    pub fn new(omega: Vec<f64>, omega_prime: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega_prime.is_empty() {
            return Err(Error::EmptyBasis);
        }
        if omega.len() + omega_prime.len() > MAX_TOTAL_DIMENSION {
            return Err(Error::NonFiniteBasis);
        }
        if !omega.iter().chain(&omega_prime).all(|w| w.is_finite()) {
            return Err(Error::NonFiniteBasis);
        }
        Ok(Self { omega, omega_prime })
    }

    pub fn nu1(&self) -> usize {
        self.omega.len()
    }

    pub fn nu2(&self) -> usize {
        self.omega_prime.len()
    }

    /// `nu_j = 1` is the periodic degenerate case; runs are labeled with this.
    pub fn is_periodic_degenerate(&self) -> bool {
        self.nu1() == 1 || self.nu2() == 1
    }

    pub fn freq_x(&self, m: &[i32]) -> f64 {
        inner(m, &self.omega)
    }

    pub fn freq_y(&self, n: &[i32]) -> f64 {
        inner(n, &self.omega_prime)
    }
}

fn inner(v: &[i32], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(&a, &b)| a as f64 * b).sum()
}

/// One dual-lattice point `(m, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: Vec<i32>,
    pub n: Vec<i32>,
}

impl ModeIndex {
    pub fn new(m: Vec<i32>, n: Vec<i32>) -> Self {
        Self { m, n }
    }

    pub fn zero(nu1: usize, nu2: usize) -> Self {
        Self {
            m: vec![0; nu1],
            n: vec![0; nu2],
        }
    }
}

/// Per-direction `l^1` truncation radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationBox {
    pub radius_x: u32,
    pub radius_y: u32,
}

impl TruncationBox {
    pub fn new(radius_x: u32, radius_y: u32) -> Self {
        Self { radius_x, radius_y }
    }

    /// All modes of the box in the deterministic total order.
    pub fn enumerate(&self, nu1: usize, nu2: usize) -> Vec<ModeIndex> {
        let ms = l1_ball(nu1, self.radius_x);
        let ns = l1_ball(nu2, self.radius_y);
        let mut out = Vec::with_capacity(ms.len() * ns.len());
        for m in &ms {
            for n in &ns {
                out.push(ModeIndex::new(m.clone(), n.clone()));
            }
        }
        out
    }
}

/// `sum_j |v_j|`.
pub fn l1_norm(v: &[i32]) -> u32 {
    v.iter().map(|x| x.unsigned_abs()).sum()
}

/// All `v` in `Z^nu` with `|v|_1 <= r`, sorted by `(|v|_1, v)`.
pub fn l1_ball(nu: usize, r: u32) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut cur = vec![0i32; nu];
    fill_ball(&mut out, &mut cur, 0, r as i32);
    out.sort_by(|a, b| (l1_norm(a), a).cmp(&(l1_norm(b), b)));
    out
}

fn fill_ball(out: &mut Vec<Vec<i32>>, cur: &mut Vec<i32>, pos: usize, budget: i32) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for v in -budget..=budget {
        cur[pos] = v;
        fill_ball(out, cur, pos + 1, budget - v.abs());
    }
    cur[pos] = 0;
}

/// Number of points of `Z^nu` with `|v|_1` exactly `s`, computed
/// combinatorially (choose the support, signs, and a composition of `s`).
pub fn shell_count(nu: usize, s: u32) -> u64 {
    if s == 0 {
        return 1;
    }
    let mut total = 0u64;
    for j in 1..=nu.min(s as usize) {
        total += (1u64 << j) * binomial(nu as u64, j as u64) * binomial(s as u64 - 1, j as u64 - 1);
    }
    total
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn check_dims(basis: &FrequencyBasis, idx: &ModeIndex) -> Result<()> {
    if idx.m.len() != basis.nu1() || idx.n.len() != basis.nu2() {
        return Err(Error::DimensionMismatch {
            expected_x: basis.nu1(),
            expected_y: basis.nu2(),
            got_x: idx.m.len(),
            got_y: idx.n.len(),
        });
    }
    Ok(())
}

/// `<m,omega>^2 + <n,omega'>^2 >= 0`.
pub fn dispersion(basis: &FrequencyBasis, idx: &ModeIndex) -> Result<f64> {
    check_dims(basis, idx)?;
    let fx = basis.freq_x(&idx.m);
    let fy = basis.freq_y(&idx.n);
    Ok(fx * fx + fy * fy)
}

/// `exp(-i * dispersion * t)`; unit modulus.
pub fn phase(basis: &FrequencyBasis, idx: &ModeIndex, t: f64) -> Result<Complex64> {
    Ok(phase_of_dispersion(dispersion(basis, idx)?, t))
}

pub(crate) fn phase_of_dispersion(disp: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -disp * t)
}

/// Smallest `|<m,omega>|` over nonzero `|m|_1 <= r`, and the analogue for
/// `omega'`; the smaller of the two. `+inf` when `r = 0`. Strictly positive
/// exactly when no resonance occurs inside the ball.
pub fn independence_margin(basis: &FrequencyBasis, r: u32) -> f64 {
    let (mx, my) = direction_margins(basis, r);
    mx.min(my)
}

/// The two per-direction margins separately.
pub fn direction_margins(basis: &FrequencyBasis, r: u32) -> (f64, f64) {
    (
        direction_margin(&basis.omega, r),
        direction_margin(&basis.omega_prime, r),
    )
}

fn direction_margin(w: &[f64], r: u32) -> f64 {
    let mut margin = f64::INFINITY;
    for v in l1_ball(w.len(), r) {
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        margin = margin.min(inner(&v, w).abs());
    }
    margin
}

fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.sin() / z
    }
}

/// Box average `(1/(4 L1 L2)) int int exp(i <(a-b) Omega, (x,y)>) dx dy` in
/// closed form: `sinc(theta L1) sinc(phi L2)` with `theta = <m_a - m_b, omega>`
/// and `phi = <n_a - n_b, omega'>`. Real by symmetry of the box; tends to the
/// Kronecker delta as the box grows whenever the margin is positive.
pub fn orthogonality_average(
    basis: &FrequencyBasis,
    idx_a: &ModeIndex,
    idx_b: &ModeIndex,
    l1: f64,
    l2: f64,
) -> Result<f64> {
    check_dims(basis, idx_a)?;
    check_dims(basis, idx_b)?;
    let dm: Vec<i32> = idx_a.m.iter().zip(&idx_b.m).map(|(a, b)| a - b).collect();
    let dn: Vec<i32> = idx_a.n.iter().zip(&idx_b.n).map(|(a, b)| a - b).collect();
    let theta = basis.freq_x(&dm);
    let phi = basis.freq_y(&dn);
    Ok(sinc(theta * l1) * sinc(phi * l2))
}

/// Enumerated truncation of the dual lattice: the working geometry shared by
/// every engine. Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct Lattice {
    basis: FrequencyBasis,
    trunc: TruncationBox,
    modes: Vec<ModeIndex>,
    /// Packed coordinates, stride `nu1 + nu2`, same order as `modes`.
    coords: Vec<i32>,
    freq_x: Vec<f64>,
    freq_y: Vec<f64>,
    disp: Vec<f64>,
    l1_m: Vec<u32>,
    l1_n: Vec<u32>,
    /// Dense index table over the bounding cube, -1 outside the l1 balls.
    lookup: Vec<i32>,
    strides: Vec<usize>,
    radii: Vec<i32>,
    margin: f64,
    /// Convolution fast path: a 3R-padded cube so that `out - q1 + q2` always
    /// lands inside and indexing needs no per-component range checks. Skipped
    /// when the padded cube would be unreasonably large.
    conv: Option<ConvTable>,
}

#[derive(Debug, Clone)]
pub(crate) struct ConvTable {
    pub(crate) table: Vec<i32>,
    /// Per-mode additive key offset; the key of `out - q1 + q2` is
    /// `center + offset[out] - offset[q1] + offset[q2]`.
    pub(crate) offsets: Vec<i64>,
    pub(crate) center: i64,
}

const CONV_TABLE_MAX_ENTRIES: usize = 1 << 24;

impl Lattice {
    pub fn new(basis: FrequencyBasis, trunc: TruncationBox) -> Result<Self> {
        let check_radius = trunc.radius_x.max(trunc.radius_y);
        let margin = independence_margin(&basis, check_radius);
        if margin <= MIN_INDEPENDENCE_MARGIN {
            return Err(Error::NearResonantBasis {
                margin,
                radius: check_radius,
                min_margin: MIN_INDEPENDENCE_MARGIN,
            });
        }

        let nu1 = basis.nu1();
        let nu2 = basis.nu2();
        let nu = nu1 + nu2;
        let modes = trunc.enumerate(nu1, nu2);

        let mut coords = Vec::with_capacity(modes.len() * nu);
        let mut freq_x = Vec::with_capacity(modes.len());
        let mut freq_y = Vec::with_capacity(modes.len());
        let mut disp = Vec::with_capacity(modes.len());
        let mut l1_m = Vec::with_capacity(modes.len());
        let mut l1_n = Vec::with_capacity(modes.len());
        for idx in &modes {
            coords.extend_from_slice(&idx.m);
            coords.extend_from_slice(&idx.n);
            let fx = basis.freq_x(&idx.m);
            let fy = basis.freq_y(&idx.n);
            freq_x.push(fx);
            freq_y.push(fy);
            disp.push(fx * fx + fy * fy);
            l1_m.push(l1_norm(&idx.m));
            l1_n.push(l1_norm(&idx.n));
        }

        let mut radii = vec![trunc.radius_x as i32; nu1];
        radii.extend(vec![trunc.radius_y as i32; nu2]);
        let mut strides = vec![0usize; nu];
        let mut size = 1usize;
        for d in (0..nu).rev() {
            strides[d] = size;
            size *= 2 * radii[d] as usize + 1;
        }
        let mut lookup = vec![-1i32; size];
        for (i, idx) in modes.iter().enumerate() {
            let mut key = 0usize;
            for (d, &c) in idx.m.iter().chain(&idx.n).enumerate() {
                key += (c + radii[d]) as usize * strides[d];
            }
            lookup[key] = i as i32;
        }

        let conv = Self::build_conv_table(&modes, &radii, nu);

        Ok(Self {
            basis,
            trunc,
            modes,
            coords,
            freq_x,
            freq_y,
            disp,
            l1_m,
            l1_n,
            lookup,
            strides,
            radii,
            margin,
            conv,
        })
    }

    fn build_conv_table(modes: &[ModeIndex], radii: &[i32], nu: usize) -> Option<ConvTable> {
        let mut strides3 = vec![0i64; nu];
        let mut size = 1usize;
        for d in (0..nu).rev() {
            strides3[d] = size as i64;
            size = size.checked_mul(6 * radii[d] as usize + 1)?;
            if size > CONV_TABLE_MAX_ENTRIES {
                return None;
            }
        }
        let center: i64 = (0..nu).map(|d| 3 * radii[d] as i64 * strides3[d]).sum();
        let mut table = vec![-1i32; size];
        let offset_of = |idx: &ModeIndex| -> i64 {
            idx.m
                .iter()
                .chain(&idx.n)
                .enumerate()
                .map(|(d, &c)| c as i64 * strides3[d])
                .sum()
        };
        let mut offsets = Vec::with_capacity(modes.len());
        for (i, idx) in modes.iter().enumerate() {
            let off = offset_of(idx);
            table[(center + off) as usize] = i as i32;
            offsets.push(off);
        }
        Some(ConvTable {
            table,
            offsets,
            center,
        })
    }

    pub(crate) fn conv_table(&self) -> Option<&ConvTable> {
        self.conv.as_ref()
    }

    /// Test hook: drop the padded-cube fast path to exercise the
    /// range-checked convolution fallback.
    #[cfg(test)]
    pub(crate) fn without_conv_table(mut self) -> Self {
        self.conv = None;
        self
    }

    pub fn basis(&self) -> &FrequencyBasis {
        &self.basis
    }

    pub fn trunc(&self) -> &TruncationBox {
        &self.trunc
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn nu1(&self) -> usize {
        self.basis.nu1()
    }

    pub fn nu2(&self) -> usize {
        self.basis.nu2()
    }

    pub fn nu_total(&self) -> usize {
        self.nu1() + self.nu2()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &ModeIndex {
        &self.modes[i]
    }

    pub fn coords(&self, i: usize) -> &[i32] {
        let nu = self.nu_total();
        &self.coords[i * nu..(i + 1) * nu]
    }

    pub fn dispersion(&self, i: usize) -> f64 {
        self.disp[i]
    }

    pub fn freq_x_of(&self, i: usize) -> f64 {
        self.freq_x[i]
    }

    pub fn freq_y_of(&self, i: usize) -> f64 {
        self.freq_y[i]
    }

    pub fn l1_m(&self, i: usize) -> u32 {
        self.l1_m[i]
    }

    pub fn l1_n(&self, i: usize) -> u32 {
        self.l1_n[i]
    }

    /// Margin actually checked at construction (radius `max(R1, R2)`).
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn index_of(&self, idx: &ModeIndex) -> Option<usize> {
        if idx.m.len() != self.nu1() || idx.n.len() != self.nu2() {
            return None;
        }
        let mut buf = [0i32; MAX_TOTAL_DIMENSION];
        for (d, &c) in idx.m.iter().chain(&idx.n).enumerate() {
            buf[d] = c;
        }
        self.lookup_coords(&buf[..self.nu_total()])
    }

    pub fn zero_index(&self) -> usize {
        self.index_of(&ModeIndex::zero(self.nu1(), self.nu2()))
            .expect("origin is always inside the box")
    }

    #[inline]
    pub(crate) fn lookup_coords(&self, c: &[i32]) -> Option<usize> {
        let mut key = 0usize;
        for d in 0..c.len() {
            let v = c[d];
            if v < -self.radii[d] || v > self.radii[d] {
                return None;
            }
            key += (v + self.radii[d]) as usize * self.strides[d];
        }
        let slot = self.lookup[key];
        (slot >= 0).then_some(slot as usize)
    }

    /// Index of `base + q2` where `base` and `q2` are packed coordinates.
    #[inline]
    pub(crate) fn lookup_sum(&self, base: &[i32], q2: &[i32]) -> Option<usize> {
        debug_assert_eq!(base.len(), q2.len());
        let mut key = 0usize;
        for d in 0..base.len() {
            let v = base[d] + q2[d];
            if v < -self.radii[d] || v > self.radii[d] {
                return None;
            }
            key += (v + self.radii[d]) as usize * self.strides[d];
        }
        let slot = self.lookup[key];
        (slot >= 0).then_some(slot as usize)
    }
}
