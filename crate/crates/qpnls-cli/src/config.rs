//! Run configuration: a single JSON document, validated as a whole (every
//! failure reported together), hashed canonically for artifact provenance.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use qpnls::combin::{amplitude_constant, time_scale};
use qpnls::fields::{DecayProfile, TimeGrid};
use qpnls::lattice::{direction_margins, FrequencyBasis, Lattice, TruncationBox};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisConfig {
    pub omega: Vec<f64>,
    pub omega_prime: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoxConfig {
    pub rx: u32,
    pub ry: u32,
}

/// Exactly one of `t_end` / `t_eps_fraction` must be set; the fraction form
/// resolves against the guaranteed horizon `T_eps`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_eps_fraction: Option<f64>,
    pub nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub basis: BasisConfig,
    #[serde(rename = "box")]
    pub trunc: BoxConfig,
    pub profile: DecayProfile,
    pub epsilon: f64,
    pub grid: GridConfig,
    pub k_max: usize,
    pub tol: f64,
    pub seed: u64,
    pub rho1: f64,
    pub rho2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Everything a run needs, built only after the whole config validates.
pub struct Validated {
    pub lattice: Lattice,
    pub profile: DecayProfile,
    pub grid: TimeGrid,
    pub epsilon: f64,
    pub k_max: usize,
    pub tol: f64,
    pub seed: u64,
    pub rho1: f64,
    pub rho2: f64,
    pub t_eps: Option<f64>,
    pub amplitude: Option<f64>,
    pub margins: (f64, f64),
    pub in_regime: bool,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }

    /// Canonical hash over the physics content of the config (the output
    /// directory does not participate).
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = None;
        let bytes = crate::emit::to_p17_json(&canon);
        format!("{:016x}", fnv1a64(bytes.as_bytes()))
    }

    /// Validate everything at once; `override_te` permits horizons beyond
    /// `T_eps` (the run is then labeled out-of-regime rather than refused).
    pub fn validate(&self, override_te: bool) -> Result<Validated, Vec<String>> {
        let mut failures = Vec::new();
        let mut warnings = Vec::new();

        let basis =
            match FrequencyBasis::new(self.basis.omega.clone(), self.basis.omega_prime.clone()) {
                Ok(b) => Some(b),
                Err(e) => {
                    failures.push(format!("basis: {e}"));
                    None
                }
            };
        let (nu1, nu2) = (self.basis.omega.len(), self.basis.omega_prime.len());

        if let Err(e) = self.profile.validate(nu1.max(1), nu2.max(1)) {
            failures.push(format!("profile: {e}"));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            failures.push(format!(
                "epsilon: must be finite and >= 0 (focusing sign is fixed), got {}",
                self.epsilon
            ));
        }
        if self.k_max < 1 {
            failures.push("k_max: must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            failures.push(format!("tol: must be >= 0, got {}", self.tol));
        }
        if self.rho1 < 0.0 || self.rho2 < 0.0 {
            failures.push(format!(
                "rho: weights must be >= 0, got ({}, {})",
                self.rho1, self.rho2
            ));
        }

        let t_eps = if self.epsilon > 0.0 {
            time_scale(&self.profile, nu1, nu2, self.epsilon).ok()
        } else {
            None
        };
        let amplitude = amplitude_constant(&self.profile, nu1, nu2).ok();

        let t_end = match (self.grid.t_end, self.grid.t_eps_fraction) {
            (Some(t), None) => Some(t),
            (None, Some(f)) => {
                if !(f > 0.0) {
                    failures.push(format!("grid: t_eps_fraction must be > 0, got {f}"));
                    None
                } else {
                    match t_eps {
                        Some(te) => Some(f * te),
                        None => {
                            failures.push(
                                "grid: t_eps_fraction needs an exponential profile and epsilon > 0"
                                    .into(),
                            );
                            None
                        }
                    }
                }
            }
            (Some(_), Some(_)) => {
                failures.push("grid: set exactly one of t_end / t_eps_fraction, got both".into());
                None
            }
            (None, None) => {
                failures
                    .push("grid: set exactly one of t_end / t_eps_fraction, got neither".into());
                None
            }
        };

        let grid = t_end.and_then(|t| match TimeGrid::new(t, self.grid.nodes) {
            Ok(g) => Some(g),
            Err(e) => {
                failures.push(format!("grid: {e}"));
                None
            }
        });

        let lattice = basis.and_then(|b| {
            match Lattice::new(b, TruncationBox::new(self.trunc.rx, self.trunc.ry)) {
                Ok(l) => Some(l),
                Err(e) => {
                    failures.push(format!("lattice: {e}"));
                    None
                }
            }
        });

        let mut in_regime = true;
        if let (Some(te), Some(g)) = (t_eps, grid.as_ref()) {
            if g.t_end > te * (1.0 + 1e-12) {
                in_regime = false;
                if override_te {
                    warnings.push(format!(
                        "t_end {:.6e} exceeds T_eps {:.6e}; run is labeled out-of-regime",
                        g.t_end, te
                    ));
                } else {
                    failures.push(format!(
                        "grid: t_end {:.6e} exceeds T_eps {:.6e} (pass --override-te to permit)",
                        g.t_end, te
                    ));
                }
            }
        }
        if !self.profile.is_exponential() {
            in_regime = false;
        }
        if !self.profile.rho_constraint_ok(self.rho1, self.rho2) {
            warnings.push(format!(
                "rho = ({}, {}) violates 0 < kappa/2 - 2 rho <= 1; weighted-norm comparisons are out of the stated regime",
                self.rho1, self.rho2
            ));
        }

        if !failures.is_empty() {
            return Err(failures);
        }
        let lattice = lattice.expect("validated above");
        if lattice.basis().is_periodic_degenerate() {
            warnings.push("periodic degenerate case: some nu_j = 1".into());
        }
        let margins = direction_margins(lattice.basis(), self.trunc.rx.max(self.trunc.ry));
        Ok(Validated {
            lattice,
            profile: self.profile,
            grid: grid.expect("validated above"),
            epsilon: self.epsilon,
            k_max: self.k_max,
            tol: self.tol,
            seed: self.seed,
            rho1: self.rho1,
            rho2: self.rho2,
            t_eps,
            amplitude,
            margins,
            in_regime,
            warnings,
        })
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
