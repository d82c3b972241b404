//! Ternary label trees indexing the terms of the expanded Picard iterate.
//!
//! The branch sets are `G(1) = {Leaf, Unit}` and, for `k >= 2`,
//! `G(k) = {Leaf} u G(k-1)^3`. Each branch carries three counting functions:
//!
//! * `sigma`: half the number of mode slots (Leaf 1/2, Unit 3/2, additive
//!   over children). Stored as the integer `2 sigma` to keep the arithmetic
//!   exact.
//! * `ell = sigma - 1/2`: the number of nested Duhamel integrals.
//! * `dee`: the product of iterated-integral denominators,
//!   `dee(node) = ell(node) * prod dee(children)`.
//!
//! The scalar majorant `sum_gamma x^ell / dee` is exactly the `k`-th Picard
//! iterate of `y' = y^3, y(0) = 1` evaluated at `x`, with closed form
//! `(1 - 2x)^{-1/2}` in the limit; level counts stabilize (in `k`) to the
//! Fuss-Catalan numbers. Branch sets are never materialized for large `k`:
//! enumeration is lazy and ell-capped, and the census/majorant tables are
//! computed by the equivalent level-wise recursion, with the analytic
//! Fuss-Catalan tail bound reported alongside any capped sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{linear_evolution, CoefficientField, DecayProfile, InitialData, TimeGrid};
use crate::lattice::{l1_norm, phase_of_dispersion, Lattice, ModeIndex};
use crate::picard::{conjugation_tower, cubic_convolution_mixed_at};
use crate::quad::prefix_integrals;

/// A node of the ternary label tree, with cached counting functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    shape: Shape,
    sigma2: u32,
    ell: u32,
    dee: u64,
    /// The set of `k` with `self in G(k)` is the interval `[min_k, max_k]`
    /// (`max_k = None` meaning unbounded; a Unit pins it, since Units exist
    /// only at the innermost level).
    min_k: u32,
    max_k: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Shape {
    Leaf,
    Unit,
    Node(Box<[Branch; 3]>),
}

impl Branch {
    pub fn leaf() -> Self {
        Branch {
            shape: Shape::Leaf,
            sigma2: 1,
            ell: 0,
            dee: 1,
            min_k: 1,
            max_k: None,
        }
    }

    pub fn unit() -> Self {
        Branch {
            shape: Shape::Unit,
            sigma2: 3,
            ell: 1,
            dee: 1,
            min_k: 1,
            max_k: Some(1),
        }
    }

    /// Combine three branches under a new internal node. Rejects combinations
    /// that occur in no branch set (siblings whose membership intervals are
    /// disjoint, e.g. a Unit next to a nested node).
    pub fn node(a: Branch, b: Branch, c: Branch) -> Result<Self> {
        let min_k = 1 + [&a, &b, &c].iter().map(|ch| ch.min_k).max().unwrap();
        let max_k = [&a, &b, &c]
            .iter()
            .filter_map(|ch| ch.max_k)
            .min()
            .map(|m| m + 1);
        if let Some(max) = max_k {
            if max < min_k {
                return Err(Error::MalformedBranch);
            }
        }
        let sigma2 = a.sigma2 + b.sigma2 + c.sigma2;
        let ell = a.ell + b.ell + c.ell + 1;
        let dee = ell as u64 * a.dee * b.dee * c.dee;
        Ok(Branch {
            shape: Shape::Node(Box::new([a, b, c])),
            sigma2,
            ell,
            dee,
            min_k,
            max_k,
        })
    }

    /// `2 sigma`: the number of mode slots in an assignment.
    pub fn sigma2(&self) -> u32 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2 as f64 / 2.0
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn dee(&self) -> u64 {
        self.dee
    }

    pub fn children(&self) -> Option<&[Branch; 3]> {
        match &self.shape {
            Shape::Node(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.shape, Shape::Leaf)
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.shape, Shape::Unit)
    }

    pub fn depth(&self) -> u32 {
        match &self.shape {
            Shape::Leaf => 0,
            Shape::Unit => 1,
            Shape::Node(c) => 1 + c.iter().map(Branch::depth).max().unwrap(),
        }
    }

    /// Membership in the `k`-th branch set.
    pub fn is_member_of(&self, k: usize) -> bool {
        match &self.shape {
            Shape::Leaf => k >= 1,
            Shape::Unit => k == 1,
            Shape::Node(c) => k >= 2 && c.iter().all(|b| b.is_member_of(k - 1)),
        }
    }
}

/// Lazy enumeration of the `k`-th branch set restricted to `ell <= ell_cap`,
/// each branch exactly once: Leaf first, then triples ordered lexicographically
/// by the recursive order of their components. Beyond `k = ell_cap + 1` the
/// capped sets are stationary (only Unit-free trees survive the cap, and they
/// all fit), so `k` is clamped there.
pub fn enumerate_branches(k: usize, ell_cap: u32) -> Box<dyn Iterator<Item = Branch>> {
    assert!(k >= 1, "branch sets start at k = 1");
    let k = stabilized_k(k, ell_cap);
    if k == 1 {
        let mut v = vec![Branch::leaf()];
        if ell_cap >= 1 {
            v.push(Branch::unit());
        }
        return Box::new(v.into_iter());
    }
    if ell_cap == 0 {
        return Box::new(std::iter::once(Branch::leaf()));
    }
    let inner = ell_cap - 1;
    let triples = enumerate_branches(k - 1, inner).flat_map(move |a| {
        let cap_b = inner - a.ell();
        enumerate_branches(k - 1, cap_b).flat_map(move |b| {
            let cap_c = cap_b - b.ell();
            let a = a.clone();
            enumerate_branches(k - 1, cap_c).map(move |c| {
                Branch::node(a.clone(), b.clone(), c).expect("children from one branch set combine")
            })
        })
    });
    Box::new(std::iter::once(Branch::leaf()).chain(triples))
}

fn poly_mul_trunc(a: &[f64], b: &[f64], cap: usize) -> Vec<f64> {
    let mut out = vec![0.0; cap + 1];
    for (i, &x) in a.iter().enumerate().take(cap + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(cap + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_mul_trunc_u(a: &[u64], b: &[u64], cap: usize) -> Vec<u64> {
    let mut out = vec![0u64; cap + 1];
    for (i, &x) in a.iter().enumerate().take(cap + 1) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(cap + 1 - i) {
            out[i + j] = out[i + j].saturating_add(x.saturating_mul(y));
        }
    }
    out
}

/// Every level `j <= cap` is stable once `k >= j + 1` (a branch with `ell = j`
/// holds at most `j` nested nodes, so labels beyond depth `j + 1` cannot
/// occur), hence the whole capped table is stationary from `k = cap + 1` on.
fn stabilized_k(k: usize, ell_cap: u32) -> usize {
    k.min(ell_cap as usize + 1).max(1)
}

/// Branch counts by `ell` level, index = level. Computed by the level-wise
/// recursion equivalent to capped enumeration: the count vector of `G(k)` is
/// `1` at level 0 plus the thrice-convolved `G(k-1)` vector shifted up one.
/// Counts saturate at `u64::MAX` rather than overflow.
pub fn level_census(k: usize, ell_cap: u32) -> Vec<u64> {
    assert!(k >= 1);
    let cap = ell_cap as usize;
    let mut c = vec![0u64; cap + 1];
    c[0] = 1;
    if cap >= 1 {
        c[1] = 1;
    }
    for _ in 2..=stabilized_k(k, ell_cap) {
        let sq = poly_mul_trunc_u(&c, &c, cap);
        let cu = poly_mul_trunc_u(&sq, &c, cap);
        let mut next = vec![0u64; cap + 1];
        next[0] = 1;
        for j in 1..=cap {
            next[j] = cu[j - 1];
        }
        c = next;
    }
    c
}

/// `sum 1/dee` by `ell` level; the integral recursion divides level `j`
/// contributions by `j` exactly as `dee` grows by the node factor.
pub fn level_inverse_dee_sums(k: usize, ell_cap: u32) -> Vec<f64> {
    assert!(k >= 1);
    let cap = ell_cap as usize;
    let mut d = vec![0.0; cap + 1];
    d[0] = 1.0;
    if cap >= 1 {
        d[1] = 1.0;
    }
    for _ in 2..=stabilized_k(k, ell_cap) {
        let sq = poly_mul_trunc(&d, &d, cap);
        let cu = poly_mul_trunc(&sq, &d, cap);
        let mut next = vec![0.0; cap + 1];
        next[0] = 1.0;
        for j in 1..=cap {
            next[j] = cu[j - 1] / j as f64;
        }
        d = next;
    }
    d
}

/// Census map `ell -> count` for branches of `G(k)` with `ell <= ell_cap`.
pub fn branch_census(k: usize, ell_cap: u32) -> std::collections::BTreeMap<u32, u64> {
    level_census(k, ell_cap)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(j, c)| (j as u32, c))
        .collect()
}

/// `sum x^ell / dee` over `G(k)` with `ell <= ell_cap`.
pub fn majorant_partial_sum(k: usize, ell_cap: u32, x: f64) -> f64 {
    assert!(x >= 0.0);
    level_inverse_dee_sums(k, ell_cap)
        .iter()
        .enumerate()
        .map(|(j, d)| d * x.powi(j as i32))
        .sum()
}

/// Limit of the majorant: `(1 - 2x)^{-1/2}`, finite for `x < 1/2`.
pub fn majorant_closed_form(x: f64) -> f64 {
    (1.0 - 2.0 * x).powf(-0.5)
}

/// Fuss-Catalan number `binom(3j, j) / (2j + 1)`: ternary trees with `j`
/// internal nodes, the stable level counts of the census.
pub fn fuss_catalan(j: u32) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..j as u128 {
        acc = acc * (3 * j as u128 - i) / (i + 1);
    }
    (acc / (2 * j as u128 + 1)) as u64
}

/// Generating function `B(x) = sum FC(j) x^j`, the root of `B = 1 + x B^3`
/// in `[1, 3/2]`; defined for `0 <= x <= 4/27`.
pub fn ternary_tree_gf(x: f64) -> Option<f64> {
    if !(0.0..=4.0 / 27.0 + 1e-15).contains(&x) {
        return None;
    }
    if x == 0.0 {
        return Some(1.0);
    }
    let f = |b: f64| x * b * b * b - b + 1.0;
    let (mut lo, mut hi) = (1.0, 1.5);
    if f(hi) > 0.0 {
        // only at x = 4/27 up to rounding, where the root is exactly 3/2
        return Some(1.5);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Analytic tail bound `sum_{j > cap} FC(j) x^j` on everything a capped sum
/// can miss (each level's `sum 1/dee` is at most its stable count).
pub fn fuss_catalan_tail(x: f64, cap: u32) -> f64 {
    match ternary_tree_gf(x) {
        Some(b) => {
            let partial: f64 = (0..=cap)
                .map(|j| fuss_catalan(j) as f64 * x.powi(j as i32))
                .sum();
            (b - partial).max(0.0)
        }
        None => f64::INFINITY,
    }
}

/// Guaranteed existence horizon `T_eps = (4/27)(kappa1/6)^nu1 (kappa2/6)^nu2 / eps`.
pub fn time_scale(profile: &DecayProfile, nu1: usize, nu2: usize, epsilon: f64) -> Result<f64> {
    let DecayProfile::Exponential { kappa1, kappa2 } = *profile else {
        return Err(Error::UnsupportedProfile);
    };
    if !(epsilon > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "time scale needs epsilon > 0, got {epsilon}"
        )));
    }
    Ok(4.0 / 27.0 * (kappa1 / 6.0).powi(nu1 as i32) * (kappa2 / 6.0).powi(nu2 as i32) / epsilon)
}

/// Uniform amplitude constant `A = (3/2)(6/kappa1)^nu1 (6/kappa2)^nu2`.
pub fn amplitude_constant(profile: &DecayProfile, nu1: usize, nu2: usize) -> Result<f64> {
    let DecayProfile::Exponential { kappa1, kappa2 } = *profile else {
        return Err(Error::UnsupportedProfile);
    };
    Ok(1.5 * (6.0 / kappa1).powi(nu1 as i32) * (6.0 / kappa2).powi(nu2 as i32))
}

/// Per-branch majorant weight `(eps t)^ell / dee`.
pub fn bound_factors(branch: &Branch, t: f64, epsilon: f64) -> f64 {
    debug_assert!(t >= 0.0 && epsilon >= 0.0);
    (epsilon * t).powi(branch.ell() as i32) / branch.dee() as f64
}

/// One branch with one element of its assignment domain: a tuple of
/// `2 sigma` modes.
#[derive(Debug, Clone)]
pub struct TreeTerm {
    pub branch: Branch,
    pub assignment: Vec<ModeIndex>,
}

impl TreeTerm {
    pub fn new(branch: Branch, assignment: Vec<ModeIndex>) -> Result<Self> {
        if assignment.len() != branch.sigma2() as usize {
            return Err(Error::BadAssignment {
                expected: branch.sigma2() as usize,
                got: assignment.len(),
            });
        }
        Ok(Self { branch, assignment })
    }

    /// The summation function: alternating sum of the assigned modes. Equals
    /// the recursive alternating sum over children because every child tuple
    /// has odd length.
    pub fn lambda(&self) -> ModeIndex {
        alternating_sum(&self.assignment)
    }

    /// x-direction image of the assignment (the tuple of `m_j`).
    pub fn x_part(&self) -> Vec<&[i32]> {
        self.assignment.iter().map(|q| q.m.as_slice()).collect()
    }

    /// y-direction image of the assignment (the tuple of `n_j`).
    pub fn y_part(&self) -> Vec<&[i32]> {
        self.assignment.iter().map(|q| q.n.as_slice()).collect()
    }

    /// `sum_j |m_j|_1` over the x-part.
    pub fn l1_x(&self) -> u32 {
        self.assignment.iter().map(|q| l1_norm(&q.m)).sum()
    }

    /// `sum_j |n_j|_1` over the y-part.
    pub fn l1_y(&self) -> u32 {
        self.assignment.iter().map(|q| l1_norm(&q.n)).sum()
    }
}

const TREE_TERM_MAX_DEPTH: u32 = 2;

/// Explicit evaluation of one tree term `C * I(t_node) * F` on the shared
/// uniform grid. Desk-scale only: branch depth at most 2.
pub fn tree_term(
    lat: &Lattice,
    term: &TreeTerm,
    initial: &InitialData,
    epsilon: f64,
    grid: TimeGrid,
    node: usize,
) -> Result<Complex64> {
    if term.branch.depth() > TREE_TERM_MAX_DEPTH {
        return Err(Error::UnsupportedDepth {
            max: TREE_TERM_MAX_DEPTH as usize,
            got: term.branch.depth() as usize,
        });
    }
    if term.assignment.len() != term.branch.sigma2() as usize {
        return Err(Error::BadAssignment {
            expected: term.branch.sigma2() as usize,
            got: term.assignment.len(),
        });
    }
    // C: flattened product of initial data under the conjugation tower
    let mut cfac = Complex64::new(1.0, 0.0);
    for (j, q) in term.assignment.iter().enumerate() {
        let idx = lat.index_of(q).ok_or(Error::ModeOutsideBox)?;
        cfac *= conjugation_tower(initial.values()[idx], j as u32);
    }
    let series = integral_series(lat, &term.branch, &term.assignment, grid)?;
    Ok(cfac * series[node] * f_factor(&term.branch, epsilon))
}

/// `F`: `1` on a Leaf, `i eps` on a Unit, `i eps * prod conj-tower(children)`
/// on a node. Modulus `eps^ell`.
fn f_factor(branch: &Branch, epsilon: f64) -> Complex64 {
    match &branch.shape {
        Shape::Leaf => Complex64::new(1.0, 0.0),
        Shape::Unit => Complex64::new(0.0, epsilon),
        Shape::Node(children) => {
            let mut f = Complex64::new(0.0, epsilon);
            for (j, ch) in children.iter().enumerate() {
                f *= conjugation_tower(f_factor(ch, epsilon), j as u32);
            }
            f
        }
    }
}

fn alternating_sum(assignment: &[ModeIndex]) -> ModeIndex {
    let mut m = vec![0i32; assignment[0].m.len()];
    let mut n = vec![0i32; assignment[0].n.len()];
    for (j, q) in assignment.iter().enumerate() {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        for (acc, &c) in m.iter_mut().zip(&q.m) {
            *acc += sign * c;
        }
        for (acc, &c) in n.iter_mut().zip(&q.n) {
            *acc += sign * c;
        }
    }
    ModeIndex::new(m, n)
}

fn lambda_dispersion(lat: &Lattice, assignment: &[ModeIndex]) -> f64 {
    let lam = alternating_sum(assignment);
    let fx = lat.basis().freq_x(&lam.m);
    let fy = lat.basis().freq_y(&lam.n);
    fx * fx + fy * fy
}

/// The nested Duhamel integral `I` of one branch/assignment on every grid
/// node, via the same cumulative prefix quadrature as the Picard engine.
fn integral_series(
    lat: &Lattice,
    branch: &Branch,
    assignment: &[ModeIndex],
    grid: TimeGrid,
) -> Result<Vec<Complex64>> {
    let points = grid.n_points();
    match &branch.shape {
        Shape::Leaf => {
            let disp = lambda_dispersion(lat, assignment);
            Ok((0..points)
                .map(|i| phase_of_dispersion(disp, grid.node(i)))
                .collect())
        }
        Shape::Unit => {
            let d: Vec<f64> = assignment
                .iter()
                .map(|q| {
                    let fx = lat.basis().freq_x(&q.m);
                    let fy = lat.basis().freq_y(&q.n);
                    fx * fx + fy * fy
                })
                .collect();
            let out_disp = lambda_dispersion(lat, assignment);
            // integrand exp(i out_disp s) * prod {Phi^s(q_j)}^{conj tower}
            let rel = d[0] - d[1] + d[2] - out_disp;
            let integrand: Vec<Complex64> = (0..points)
                .map(|i| phase_of_dispersion(rel, grid.node(i)))
                .collect();
            let pref = prefix_integrals(&integrand, grid.step());
            Ok((0..points)
                .map(|i| phase_of_dispersion(out_disp, grid.node(i)) * pref[i])
                .collect())
        }
        Shape::Node(children) => {
            let mut offset = 0usize;
            let mut child_series = Vec::with_capacity(3);
            for ch in children.iter() {
                let take = ch.sigma2() as usize;
                child_series.push(integral_series(
                    lat,
                    ch,
                    &assignment[offset..offset + take],
                    grid,
                )?);
                offset += take;
            }
            let out_disp = lambda_dispersion(lat, assignment);
            let integrand: Vec<Complex64> = (0..points)
                .map(|i| {
                    phase_of_dispersion(out_disp, grid.node(i)).conj()
                        * child_series[0][i]
                        * child_series[1][i].conj()
                        * child_series[2][i]
                })
                .collect();
            let pref = prefix_integrals(&integrand, grid.step());
            Ok((0..points)
                .map(|i| phase_of_dispersion(out_disp, grid.node(i)) * pref[i])
                .collect())
        }
    }
}

/// The full contribution of one branch to the iterate, as a field on the
/// grid: the sum of its tree terms over every admissible in-box assignment,
/// computed by the recursive (convolution) form. Any depth.
pub fn branch_field(
    lat: &Lattice,
    branch: &Branch,
    initial: &InitialData,
    epsilon: f64,
    grid: TimeGrid,
) -> Result<CoefficientField> {
    match &branch.shape {
        Shape::Leaf => Ok(linear_evolution(lat, initial, grid)),
        Shape::Unit => {
            let c0 = linear_evolution(lat, initial, grid);
            duhamel_correction(lat, [&c0, &c0, &c0], epsilon, grid)
        }
        Shape::Node(children) => {
            let fields: Vec<CoefficientField> = children
                .iter()
                .map(|ch| branch_field(lat, ch, initial, epsilon, grid))
                .collect::<Result<_>>()?;
            duhamel_correction(lat, [&fields[0], &fields[1], &fields[2]], epsilon, grid)
        }
    }
}

/// `i eps * int_0^{t} Phi^{t-s}(q) conv(a(s), b(s), c(s))(q) ds` per mode,
/// without the linear part.
fn duhamel_correction(
    lat: &Lattice,
    factors: [&CoefficientField; 3],
    epsilon: f64,
    grid: TimeGrid,
) -> Result<CoefficientField> {
    let n = lat.len();
    let points = grid.n_points();
    let ieps = Complex64::new(0.0, epsilon);
    let mut out = CoefficientField::zeros(grid, n);
    let mut conv = vec![Complex64::new(0.0, 0.0); points * n];
    for node in 0..points {
        let (a, b, c) = (
            factors[0].at(node),
            factors[1].at(node),
            factors[2].at(node),
        );
        let slab = &mut conv[node * n..(node + 1) * n];
        for (i, slot) in slab.iter_mut().enumerate() {
            *slot = cubic_convolution_mixed_at(lat, a, b, c, i);
        }
    }
    for mode in 0..n {
        let disp = lat.dispersion(mode);
        let integrand: Vec<Complex64> = (0..points)
            .map(|node| phase_of_dispersion(disp, grid.node(node)).conj() * conv[node * n + mode])
            .collect();
        let pref = prefix_integrals(&integrand, grid.step());
        for node in 0..points {
            out.at_mut(node)[mode] = ieps * phase_of_dispersion(disp, grid.node(node)) * pref[node];
        }
    }
    Ok(out)
}

/// Sum of [`branch_field`] over the capped branch set: the tree-calculus
/// route to the `k`-th Picard iterate.
pub fn tree_iterate_field(
    lat: &Lattice,
    k: usize,
    ell_cap: u32,
    initial: &InitialData,
    epsilon: f64,
    grid: TimeGrid,
) -> Result<CoefficientField> {
    let mut acc = CoefficientField::zeros(grid, lat.len());
    for branch in enumerate_branches(k, ell_cap) {
        let f = branch_field(lat, &branch, initial, epsilon, grid)?;
        for node in 0..grid.n_points() {
            let dst = acc.at_mut(node);
            for (d, s) in dst.iter_mut().zip(f.at(node)) {
                *d += s;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::generate_initial;
    use crate::lattice::{FrequencyBasis, TruncationBox};
    use crate::picard;
    use proptest::prelude::*;

    fn max_ell(k: usize) -> u32 {
        ((3u32.pow(k as u32) - 1) / 2) as u32
    }

    #[test]
    fn counting_functions_on_the_basic_shapes() {
        let leaf = Branch::leaf();
        assert_eq!((leaf.sigma2(), leaf.ell(), leaf.dee()), (1, 0, 1));
        assert_eq!(leaf.sigma(), 0.5);
        let unit = Branch::unit();
        assert_eq!((unit.sigma2(), unit.ell(), unit.dee()), (3, 1, 1));
        let top = Branch::node(Branch::unit(), Branch::unit(), Branch::unit()).unwrap();
        assert_eq!((top.sigma2(), top.ell(), top.dee()), (9, 4, 4));
    }

    #[test]
    fn malformed_mixtures_are_rejected() {
        // a Unit lives only in G(1), a plain node only in G(k >= 2); they can
        // never be siblings
        let deep = Branch::node(Branch::leaf(), Branch::leaf(), Branch::leaf()).unwrap();
        assert!(Branch::node(Branch::unit(), deep, Branch::leaf()).is_err());
        // two Unit-bearing children at different depths are equally impossible
        let shallow = Branch::unit();
        let deeper = Branch::node(Branch::unit(), Branch::leaf(), Branch::leaf()).unwrap();
        assert!(Branch::node(shallow, deeper, Branch::leaf()).is_err());
    }

    #[test]
    fn membership_interval_matches_the_recursive_definition() {
        for k in 1..=3usize {
            for b in enumerate_branches(k, max_ell(k)) {
                for probe in 1..=5usize {
                    let interval =
                        probe as u32 >= b.min_k && b.max_k.is_none_or(|m| probe as u32 <= m);
                    assert_eq!(interval, b.is_member_of(probe), "{b:?} at k={probe}");
                }
            }
        }
    }

    #[test]
    fn ell_is_sigma_minus_half_exactly() {
        for k in 1..=3 {
            for b in enumerate_branches(k, max_ell(k)) {
                assert_eq!(2 * b.ell() + 1, b.sigma2());
                assert!(b.is_member_of(k));
            }
        }
    }

    #[test]
    fn branch_set_cardinalities() {
        assert_eq!(enumerate_branches(1, max_ell(1)).count(), 2);
        assert_eq!(enumerate_branches(2, max_ell(2)).count(), 9);
        assert_eq!(enumerate_branches(3, max_ell(3)).count(), 730);
    }

    #[test]
    fn census_matches_enumeration_and_known_table() {
        for k in 1..=3usize {
            for cap in [0u32, 1, 2, 4, max_ell(k)] {
                let dp = level_census(k, cap);
                let mut direct = vec![0u64; cap as usize + 1];
                for b in enumerate_branches(k, cap) {
                    direct[b.ell() as usize] += 1;
                }
                assert_eq!(dp, direct, "k={k} cap={cap}");
            }
        }
        let c2 = branch_census(2, 4);
        let want: std::collections::BTreeMap<u32, u64> = [(0, 1), (1, 1), (2, 3), (3, 3), (4, 1)]
            .into_iter()
            .collect();
        assert_eq!(c2, want);
    }

    #[test]
    fn stable_level_counts_are_fuss_catalan() {
        assert_eq!(
            (0..=4).map(fuss_catalan).collect::<Vec<_>>(),
            vec![1, 1, 3, 12, 55]
        );
        // counts at level j are stable once k >= j + 1
        let c = level_census(6, 4);
        assert_eq!(c, vec![1, 1, 3, 12, 55]);
        let c5 = level_census(5, 4);
        assert_eq!(c5, vec![1, 1, 3, 12, 55]);
        // below stabilization the counts are smaller
        let c2 = level_census(2, 4);
        assert!(c2[3] < 12 && c2[4] < 55);
    }

    #[test]
    fn inverse_dee_sums_stabilize_to_double_factorial_coefficients() {
        // stable level sums are the Taylor coefficients (2j-1)!!/j! of
        // (1 - 2x)^{-1/2}
        let d = level_inverse_dee_sums(9, 6);
        let mut want = vec![1.0];
        for j in 1..=6u32 {
            let df: f64 = (1..=j).map(|i| (2 * i - 1) as f64).product();
            let fact: f64 = (1..=j).map(|i| i as f64).product();
            want.push(df / fact);
        }
        for (a, b) in d.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn capped_tables_are_stationary_beyond_the_stabilization_depth() {
        for cap in [0u32, 1, 3, 6] {
            let base = level_census(cap as usize + 1, cap);
            for k in [cap as usize + 2, cap as usize + 10, 1_000_000] {
                assert_eq!(level_census(k, cap), base, "cap={cap} k={k}");
            }
            let enum_base: Vec<Branch> = enumerate_branches(cap as usize + 1, cap).collect();
            let enum_far: Vec<Branch> = enumerate_branches(1_000_000, cap).collect();
            assert_eq!(enum_base, enum_far, "cap={cap}");
        }
    }

    #[test]
    fn majorant_examples() {
        assert_eq!(majorant_partial_sum(4, 8, 0.0), 1.0);
        let m2 = majorant_partial_sum(2, 4, 1.0);
        assert!((m2 - 4.75).abs() < 1e-12);
        let x = 4.0 / 27.0;
        let m = majorant_partial_sum(16, 12, x);
        let closed = majorant_closed_form(x);
        assert!((closed - (19.0f64 / 27.0).powf(-0.5)).abs() < 1e-15);
        assert!((m - closed).abs() < 1e-3, "m={m} closed={closed}");
        assert!(m <= 1.5);
    }

    #[test]
    fn majorant_agrees_with_direct_enumeration_when_small() {
        for k in 1..=3usize {
            for cap in [1u32, 3, max_ell(k)] {
                for &x in &[0.05, 4.0 / 27.0, 0.3] {
                    let dp = majorant_partial_sum(k, cap, x);
                    let direct: f64 = enumerate_branches(k, cap)
                        .map(|b| x.powi(b.ell() as i32) / b.dee() as f64)
                        .sum();
                    assert!((dp - direct).abs() < 1e-12 * (1.0 + direct));
                }
            }
        }
    }

    #[test]
    fn ternary_gf_and_tail_bound() {
        assert!((ternary_tree_gf(0.0).unwrap() - 1.0).abs() < 1e-15);
        // near the double root at x = 4/27 the root location is only
        // square-root accurate in the rounding of x
        assert!((ternary_tree_gf(4.0 / 27.0).unwrap() - 1.5).abs() < 1e-7);
        assert!(ternary_tree_gf(0.2).is_none());
        // at the critical point the count-based bound decays only like
        // j^{-3/2}, so it is valid but loose there
        let x = 4.0 / 27.0;
        let tail = fuss_catalan_tail(x, 12);
        assert!(tail > 0.0 && tail < 0.5);
        assert!(fuss_catalan_tail(x, 6) > tail);
        // away from the critical point the bound is geometric and tight
        assert!(fuss_catalan_tail(0.05, 12) < 1e-7);
    }

    #[test]
    fn time_scale_examples() {
        let p = DecayProfile::Exponential {
            kappa1: 1.0,
            kappa2: 1.0,
        };
        let te = time_scale(&p, 2, 2, 0.01).unwrap();
        assert!((te - 400.0 / 34992.0).abs() < 1e-12);
        assert!((te - 0.011431).abs() < 1e-6);
        let te10 = time_scale(&p, 2, 2, 0.001).unwrap();
        assert!((te10 / te - 10.0).abs() < 1e-9);
        let smaller = DecayProfile::Exponential {
            kappa1: 0.5,
            kappa2: 1.0,
        };
        assert!(time_scale(&smaller, 2, 2, 0.01).unwrap() < te);
        let poly = DecayProfile::Polynomial { r1: 3.0, r2: 3.0 };
        assert!(matches!(
            time_scale(&poly, 2, 2, 0.01),
            Err(Error::UnsupportedProfile)
        ));
    }

    #[test]
    fn amplitude_constant_examples() {
        let p = DecayProfile::Exponential {
            kappa1: 1.0,
            kappa2: 1.0,
        };
        assert_eq!(amplitude_constant(&p, 2, 2).unwrap(), 1944.0);
        assert_eq!(amplitude_constant(&p, 0, 0).unwrap(), 1.5);
        assert_eq!(amplitude_constant(&p, 1, 0).unwrap(), 9.0);
    }

    #[test]
    fn bound_factor_examples() {
        assert_eq!(bound_factors(&Branch::leaf(), 5.0, 0.0), 1.0);
        let unit = Branch::unit();
        assert!((bound_factors(&unit, 1.0, 0.1) - 0.1).abs() < 1e-16);
        let top = Branch::node(Branch::unit(), Branch::unit(), Branch::unit()).unwrap();
        assert!((bound_factors(&top, 1.0, 0.1) - 2.5e-5).abs() < 1e-18);
    }

    fn lat11(r: u32) -> Lattice {
        let basis = FrequencyBasis::new(vec![std::f64::consts::SQRT_2], vec![1.0]).unwrap();
        Lattice::new(basis, TruncationBox::new(r, r)).unwrap()
    }

    #[test]
    fn leaf_and_unit_tree_terms_match_closed_forms() {
        let lat = lat11(1);
        let profile = DecayProfile::Exponential {
            kappa1: 1.0,
            kappa2: 1.0,
        };
        let initial = generate_initial(&lat, &profile, 0);
        let grid = TimeGrid::new(0.5, 16).unwrap();
        let eps = 0.3;

        let q = ModeIndex::new(vec![1], vec![-1]);
        let leaf = TreeTerm::new(Branch::leaf(), vec![q.clone()]).unwrap();
        let got = tree_term(&lat, &leaf, &initial, eps, grid, 16).unwrap();
        let idx = lat.index_of(&q).unwrap();
        let want = initial.values()[idx] * phase_of_dispersion(lat.dispersion(idx), grid.node(16));
        assert!((got - want).norm() < 1e-14);

        // Unit on the zero mode of constant data: I = t, C = 1, F = i eps
        let point = Lattice::new(
            FrequencyBasis::new(vec![1.0], vec![1.0]).unwrap(),
            TruncationBox::new(0, 0),
        )
        .unwrap();
        let ones = InitialData::new(vec![Complex64::new(1.0, 0.0)]);
        let zero = ModeIndex::new(vec![0], vec![0]);
        let unit = TreeTerm::new(Branch::unit(), vec![zero.clone(), zero.clone(), zero]).unwrap();
        for node in [0usize, 5, 16] {
            let got = tree_term(&point, &unit, &ones, eps, grid, node).unwrap();
            let want = Complex64::new(0.0, eps * grid.node(node));
            assert!((got - want).norm() < 1e-13);
        }
    }

    #[test]
    fn depth_three_terms_are_rejected() {
        let lat = lat11(0);
        let initial = InitialData::new(vec![Complex64::new(1.0, 0.0)]);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let d1 = Branch::node(Branch::leaf(), Branch::leaf(), Branch::leaf()).unwrap();
        let d2 = Branch::node(d1, Branch::leaf(), Branch::leaf()).unwrap();
        let d3 = Branch::node(d2, Branch::leaf(), Branch::leaf()).unwrap();
        assert_eq!(d3.depth(), 3);
        let zero = ModeIndex::new(vec![0], vec![0]);
        let term = TreeTerm::new(d3, vec![zero; 7]).unwrap();
        assert!(matches!(
            tree_term(&lat, &term, &initial, 0.1, grid, 0),
            Err(Error::UnsupportedDepth { .. })
        ));
    }

    #[test]
    fn branch_fields_over_the_second_set_reassemble_c2() {
        // constant-mode data: one admissible assignment per branch, so the
        // identity is exact up to rounding
        let point = Lattice::new(
            FrequencyBasis::new(vec![1.0], vec![1.0]).unwrap(),
            TruncationBox::new(0, 0),
        )
        .unwrap();
        let ones = InitialData::new(vec![Complex64::new(1.0, 0.0)]);
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let eps = 0.2;
        let sum = tree_iterate_field(&point, 2, 4, &ones, eps, grid).unwrap();
        let c0 = linear_evolution(&point, &ones, grid);
        let c1 = picard::duhamel_step(&point, &c0, &ones, eps).unwrap();
        let c2 = picard::duhamel_step(&point, &c1, &ones, eps).unwrap();
        for node in 0..grid.n_points() {
            assert!(
                (sum.at(node)[0] - c2.at(node)[0]).norm() < 1e-12,
                "node {node}"
            );
        }
    }

    #[test]
    fn branch_field_equals_assignment_sum_on_a_tiny_box() {
        let lat = lat11(1);
        let profile = DecayProfile::Exponential {
            kappa1: 1.0,
            kappa2: 0.8,
        };
        let initial = generate_initial(&lat, &profile, 17);
        let grid = TimeGrid::new(0.4, 8).unwrap();
        let eps = 0.25;
        let branch = Branch::node(Branch::unit(), Branch::leaf(), Branch::leaf()).unwrap();
        let field = branch_field(&lat, &branch, &initial, eps, grid).unwrap();

        // brute force: sum tree terms over all in-box assignments per output
        let arity = branch.sigma2() as usize;
        let mut brute = vec![Complex64::new(0.0, 0.0); lat.len()];
        let mut pick = vec![0usize; arity];
        loop {
            let assignment: Vec<ModeIndex> = pick.iter().map(|&i| lat.mode(i).clone()).collect();
            // Galerkin admissibility: the unit child's own output mode (the
            // alternating sum of its three slots) must stay inside the box,
            // exactly as the recursive convolution enforces
            let child_lambda = TreeTerm::new(Branch::unit(), assignment[..3].to_vec())
                .unwrap()
                .lambda();
            let term = TreeTerm::new(branch.clone(), assignment).unwrap();
            if lat.index_of(&child_lambda).is_some() {
                if let Some(out) = lat.index_of(&term.lambda()) {
                    brute[out] += tree_term(&lat, &term, &initial, eps, grid, 8).unwrap();
                }
            }
            let mut d = arity;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                pick[d] += 1;
                if pick[d] < lat.len() {
                    break;
                }
                pick[d] = 0;
            }
            if pick.iter().all(|&i| i == 0) {
                break;
            }
        }
        for i in 0..lat.len() {
            assert!(
                (field.at(8)[i] - brute[i]).norm() < 1e-11,
                "mode {i}: {} vs {}",
                field.at(8)[i],
                brute[i]
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn tree_terms_respect_the_combined_bound(
            picks in proptest::collection::vec(0usize..9, 9),
            which in 0usize..9,
        ) {
            // |term| <= e^{-(k1 |x-part| + k2 |y-part|)} (eps t)^ell / dee
            // for seed-0 data attaining the decay law with equality
            let lat = lat11(1);
            prop_assume!(lat.len() == 9);
            let profile = DecayProfile::Exponential { kappa1: 1.0, kappa2: 1.0 };
            let initial = generate_initial(&lat, &profile, 0);
            let grid = TimeGrid::new(0.5, 8).unwrap();
            let eps = 0.4;
            let branches: Vec<Branch> = enumerate_branches(2, 4).collect();
            let branch = branches[which].clone();
            let arity = branch.sigma2() as usize;
            let assignment: Vec<ModeIndex> =
                picks[..arity].iter().map(|&i| lat.mode(i).clone()).collect();
            let term = TreeTerm::new(branch.clone(), assignment).unwrap();
            let t = grid.node(8);
            let got = tree_term(&lat, &term, &initial, eps, grid, 8).unwrap().norm();
            let bound = (-(term.l1_x() as f64 + term.l1_y() as f64)).exp()
                * bound_factors(&branch, t, eps);
            prop_assert!(got <= bound * (1.0 + 1e-9) + 1e-15, "{got} > {bound}");
        }

        #[test]
        fn majorant_is_monotone_in_k_and_cap(k in 1usize..6, cap in 0u32..8, xi in 0usize..3) {
            let x = [0.05, 4.0 / 27.0, 0.25][xi];
            let a = majorant_partial_sum(k, cap, x);
            prop_assert!(majorant_partial_sum(k + 1, cap, x) >= a - 1e-12);
            prop_assert!(majorant_partial_sum(k, cap + 1, x) >= a - 1e-12);
        }
    }
}
