//! Cumulative fourth-order quadrature on a uniform grid.
//!
//! Given samples `f[0..=n]` at spacing `h`, [`prefix_integrals`] returns every
//! prefix integral `P[i] = int_0^{t_i} f ds`. Even prefixes use composite
//! Simpson; odd prefixes `i >= 3` use Simpson on the first `i - 3`
//! subintervals plus the 3/8 rule on the last three. The prefix `i = 1` has no
//! Newton-Cotes rule of its own: it integrates the interpolating cubic through
//! nodes `0..=3` over the first subinterval (the quadratic through `0..=2`
//! when only three samples exist).

use num_complex::Complex64;

pub trait Linear: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
}

impl Linear for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Linear for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// All prefix integrals of uniformly sampled data. `f.len()` must be >= 2.
pub fn prefix_integrals<T: Linear>(f: &[T], h: f64) -> Vec<T> {
    let n = f.len();
    assert!(n >= 2, "prefix quadrature needs at least two samples");
    let mut out = vec![T::zero(); n];

    // Running composite-Simpson sums at even indices.
    let mut simpson = T::zero();
    let mut even_prefix = vec![T::zero(); n];
    for i in (2..n).step_by(2) {
        let panel = f[i - 2].add(f[i - 1].scale(4.0)).add(f[i]).scale(h / 3.0);
        simpson = simpson.add(panel);
        even_prefix[i] = simpson;
        out[i] = simpson;
    }

    for i in (1..n).step_by(2) {
        out[i] = if i >= 3 {
            let tail = f[i - 3]
                .add(f[i - 2].scale(3.0))
                .add(f[i - 1].scale(3.0))
                .add(f[i])
                .scale(3.0 * h / 8.0);
            even_prefix[i - 3].add(tail)
        } else if n >= 4 {
            // Interpolating cubic through nodes 0..=3, integrated over [0, h].
            f[0].scale(3.0 / 8.0)
                .add(f[1].scale(19.0 / 24.0))
                .add(f[2].scale(-5.0 / 24.0))
                .add(f[3].scale(1.0 / 24.0))
                .scale(h)
        } else if n == 3 {
            f[0].scale(5.0 / 12.0)
                .add(f[1].scale(2.0 / 3.0))
                .add(f[2].scale(-1.0 / 12.0))
                .scale(h)
        } else {
            f[0].add(f[1]).scale(h / 2.0)
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, t_end: f64, g: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
        let h = t_end / n as f64;
        ((0..=n).map(|i| g(i as f64 * h)).collect(), h)
    }

    #[test]
    fn exact_on_cubics_at_every_prefix() {
        // int_0^t s^p ds = t^{p+1}/(p+1); all rules in play are exact on cubics.
        for p in 0..=3u32 {
            let (f, h) = sample(9, 3.0, |s| s.powi(p as i32));
            let pref = prefix_integrals(&f, h);
            for (i, v) in pref.iter().enumerate() {
                let t = i as f64 * h;
                let exact = t.powi(p as i32 + 1) / (p as f64 + 1.0);
                assert!(
                    (v - exact).abs() < 1e-12 * (1.0 + exact.abs()),
                    "p={p} i={i}: got {v}, want {exact}"
                );
            }
        }
    }

    #[test]
    fn fourth_order_on_oscillatory_integrand() {
        // Halving h should shrink the worst prefix error ~16x.
        let errs: Vec<f64> = [16usize, 32, 64, 128]
            .iter()
            .map(|&n| {
                let (f, h) = sample(n, 2.0, f64::sin);
                let pref = prefix_integrals(&f, h);
                pref.iter()
                    .enumerate()
                    .map(|(i, v)| (v - (1.0 - (i as f64 * h).cos())).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 3.6 && order < 4.6, "measured order {order}");
        }
    }

    #[test]
    fn complex_integrand_matches_closed_form() {
        let n = 64;
        let h = 1.0 / n as f64;
        let f: Vec<Complex64> = (0..=n)
            .map(|i| (Complex64::i() * 3.0 * (i as f64 * h)).exp())
            .collect();
        let pref = prefix_integrals(&f, h);
        for (i, v) in pref.iter().enumerate() {
            let t = i as f64 * h;
            let exact = ((Complex64::i() * 3.0 * t).exp() - 1.0) / (Complex64::i() * 3.0);
            assert!((v - exact).norm() < 5e-8);
        }
    }

    #[test]
    fn three_sample_fallback_is_exact_on_quadratics() {
        let (f, h) = sample(2, 1.0, |s| 1.0 + 2.0 * s + 3.0 * s * s);
        let pref = prefix_integrals(&f, h);
        let exact = |t: f64| t + t * t + t * t * t;
        assert!((pref[1] - exact(h)).abs() < 1e-14);
        assert!((pref[2] - exact(1.0)).abs() < 1e-14);
    }
}
