//! The six subcommands and their artifact formats.
//!
//! Every artifact embeds the canonical config hash: JSON artifacts carry a
//! `config_hash` field, CSV artifacts a leading `# config_hash=...` comment
//! line. Identical config + seed yields byte-identical artifacts for any
//! thread count.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qpnls::combin::{
    fuss_catalan_tail, level_census, level_inverse_dee_sums, majorant_closed_form, time_scale,
};
use qpnls::fields::{
    generate_initial, synthesize, weighted_h_norm, CoefficientField, InitialData, Snapshot,
};
use qpnls::lattice::Lattice;
use qpnls::oracle::{compare, rk4_integrate};
use qpnls::picard::{cauchy_diff, iterate, PicardState};
use qpnls::verify::{
    check_asymptotic_bound, check_cauchy, check_uniform_decay, deviation_bound_constant,
    truncation_tail, BoundReport,
};
use qpnls::Error as EngineError;

use crate::config::{fnv1a64, RunConfig, Validated};
use crate::emit::{f17, to_p17_json, write_p17_json, Csv};

#[derive(Debug)]
pub enum CliError {
    Validation(Vec<String>),
    Divergence(String),
    BoundFailure(String),
    MissingArtifacts(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::BoundFailure(_) => 4,
            CliError::MissingArtifacts(_) => 5,
            CliError::Other(_) => 1,
        }
    }

    pub fn print(&self) {
        match self {
            CliError::Validation(msgs) => {
                eprintln!("validation failed ({} problem(s)):", msgs.len());
                for m in msgs {
                    eprintln!("  - {m}");
                }
            }
            CliError::Divergence(m) => eprintln!("computation diverged: {m}"),
            CliError::BoundFailure(m) => eprintln!("bound check failed: {m}"),
            CliError::MissingArtifacts(m) => eprintln!("missing artifacts: {m}"),
            CliError::Other(m) => eprintln!("error: {m}"),
        }
    }
}

fn engine_to_cli(e: EngineError) -> CliError {
    match e {
        EngineError::Divergence { .. } | EngineError::BlowUp { .. } => {
            CliError::Divergence(e.to_string())
        }
        other => CliError::Other(other.to_string()),
    }
}

fn io_other(context: &str, e: std::io::Error) -> CliError {
    CliError::Other(format!("{context}: {e}"))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub t_eps: Option<f64>,
    pub amplitude_constant: Option<f64>,
    /// None when the check ball holds no nonzero modes (infinite margin).
    pub margin_x: Option<f64>,
    pub margin_y: Option<f64>,
    pub periodic_degenerate: bool,
    pub t_end: f64,
    pub nodes: usize,
    pub mode_count: usize,
    pub in_regime: bool,
    pub k_used: usize,
    pub converged: bool,
    pub snapshots: Vec<String>,
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::load(path).map_err(|e| CliError::Validation(vec![e]))
}

fn validated(config: &RunConfig, override_te: bool) -> Result<Validated, CliError> {
    let v = config.validate(override_te).map_err(CliError::Validation)?;
    for w in &v.warnings {
        eprintln!("warning: {w}");
    }
    Ok(v)
}

fn out_dir(config: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.or_else(|| config.output_dir.clone()).ok_or_else(|| {
        CliError::Validation(vec![
            "no output directory: set output_dir in the config or pass --out".into(),
        ])
    })
}

/// `run`: execute the Picard iteration, write snapshots for c_0..c_k,
/// diffs.csv, and the run manifest.
pub fn cmd_run(
    config_path: &Path,
    out: Option<PathBuf>,
    override_te: bool,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let v = validated(&config, override_te)?;
    let dir = out_dir(&config, out)?;
    std::fs::create_dir_all(&dir).map_err(|e| io_other("create output dir", e))?;
    let hash = config.hash();

    let data = generate_initial(&v.lattice, &v.profile, v.seed);
    let state =
        iterate(&v.lattice, data, v.epsilon, v.grid, v.k_max, v.tol).map_err(engine_to_cli)?;

    let mut snapshots = Vec::new();
    for (k, field) in state.iterates.iter().enumerate() {
        let name = format!("c_{k}.json");
        let snap = Snapshot::from_field(&v.lattice, field, Some(hash.clone()));
        write_p17_json(&dir.join(&name), &snap).map_err(|e| io_other("write snapshot", e))?;
        snapshots.push(name);
    }

    let mut diffs = Csv::new(&hash, "k,sup_diff");
    for (i, d) in state.diffs.iter().enumerate() {
        diffs.row(&[(i + 1).to_string(), f17(*d)]);
    }
    diffs
        .write(&dir.join("diffs.csv"))
        .map_err(|e| io_other("write diffs.csv", e))?;

    let manifest = Manifest {
        config: config.clone(),
        config_hash: hash.clone(),
        t_eps: v.t_eps,
        amplitude_constant: v.amplitude,
        margin_x: v.margins.0.is_finite().then_some(v.margins.0),
        margin_y: v.margins.1.is_finite().then_some(v.margins.1),
        periodic_degenerate: v.lattice.basis().is_periodic_degenerate(),
        t_end: v.grid.t_end,
        nodes: v.grid.num_nodes,
        mode_count: v.lattice.len(),
        in_regime: v.in_regime,
        k_used: state.k(),
        converged: state.converged(v.tol),
        snapshots,
    };
    write_p17_json(&dir.join("manifest.json"), &manifest)
        .map_err(|e| io_other("write manifest", e))?;

    println!(
        "run complete: k={} converged={} final_diff={} modes={} out={}",
        state.k(),
        manifest.converged,
        state
            .diffs
            .last()
            .map(|d| f17(*d))
            .unwrap_or_else(|| "-".into()),
        v.lattice.len(),
        dir.display()
    );
    Ok(())
}

/// `tree`: census and majorant tables for the capped branch set.
pub fn cmd_tree(k: usize, ell_cap: u32, x: f64, out: Option<PathBuf>) -> Result<(), CliError> {
    if k < 1 {
        return Err(CliError::Validation(vec!["tree: k must be >= 1".into()]));
    }
    if !(x >= 0.0) {
        return Err(CliError::Validation(vec![format!(
            "tree: x must be >= 0, got {x}"
        )]));
    }
    #[derive(Serialize)]
    struct Params {
        k: usize,
        ell_cap: u32,
        x: f64,
    }
    let hash = format!(
        "{:016x}",
        fnv1a64(to_p17_json(&Params { k, ell_cap, x }).as_bytes())
    );

    let counts = level_census(k, ell_cap);
    let dee_sums = level_inverse_dee_sums(k, ell_cap);
    let closed = if x < 0.5 {
        majorant_closed_form(x)
    } else {
        f64::INFINITY
    };

    let mut csv = Csv::new(
        &hash,
        "ell,count,dee_sum,partial_sum,closed_form,tail_bound",
    );
    let mut partial = 0.0;
    for (j, (&count, &dee)) in counts.iter().zip(&dee_sums).enumerate() {
        partial += dee * x.powi(j as i32);
        let tail = fuss_catalan_tail(x, j as u32);
        csv.row(&[
            j.to_string(),
            count.to_string(),
            f17(dee),
            f17(partial),
            fmt_maybe_inf(closed),
            fmt_maybe_inf(tail),
        ]);
    }
    let path = out.unwrap_or_else(|| PathBuf::from("tree.csv"));
    csv.write(&path)
        .map_err(|e| io_other("write tree csv", e))?;
    let total: u64 = counts.iter().sum();
    println!(
        "tree table: k={k} ell_cap={ell_cap} x={} branches={total} partial_sum={} -> {}",
        f17(x),
        f17(partial),
        path.display()
    );
    Ok(())
}

fn fmt_maybe_inf(v: f64) -> String {
    if v.is_finite() {
        f17(v)
    } else {
        "inf".into()
    }
}

fn read_manifest(run_dir: &Path) -> Result<Manifest, CliError> {
    let path = run_dir.join("manifest.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::MissingArtifacts(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::MissingArtifacts(format!("{}: {e}", path.display())))
}

fn read_snapshot(run_dir: &Path, name: &str, expect_hash: &str) -> Result<Snapshot, CliError> {
    let path = run_dir.join(name);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::MissingArtifacts(format!("{}: {e}", path.display())))?;
    let snap: Snapshot = serde_json::from_str(&text)
        .map_err(|e| CliError::MissingArtifacts(format!("{}: {e}", path.display())))?;
    match snap.config_hash.as_deref() {
        Some(h) if h == expect_hash => Ok(snap),
        Some(h) => Err(CliError::Validation(vec![format!(
            "snapshot {name} carries config hash {h}, manifest says {expect_hash}"
        )])),
        None => Err(CliError::Validation(vec![format!(
            "snapshot {name} carries no config hash"
        )])),
    }
}

/// Rebuild lattice and Picard state from a run directory.
fn load_state(run_dir: &Path, manifest: &Manifest) -> Result<(Lattice, PicardState), CliError> {
    let mut lattice = None;
    let mut iterates: Vec<CoefficientField> = Vec::new();
    for name in &manifest.snapshots {
        let snap = read_snapshot(run_dir, name, &manifest.config_hash)?;
        let (lat, field) = snap
            .into_parts()
            .map_err(|e| CliError::MissingArtifacts(format!("{name}: {e}")))?;
        if let Some(first) = &lattice {
            let first: &Lattice = first;
            if first.len() != lat.len() {
                return Err(CliError::Validation(vec![format!(
                    "snapshot {name} disagrees on box size"
                )]));
            }
        } else {
            lattice = Some(lat);
        }
        if let Some(prev) = iterates.last() {
            if prev.grid() != field.grid() {
                return Err(CliError::Validation(vec![format!(
                    "snapshot {name} disagrees on the time grid"
                )]));
            }
        }
        iterates.push(field);
    }
    let lattice = lattice
        .ok_or_else(|| CliError::MissingArtifacts("run directory lists no snapshots".into()))?;
    if iterates.is_empty() {
        return Err(CliError::MissingArtifacts("no snapshots".into()));
    }
    let initial = InitialData::new(iterates[0].at(0).to_vec());
    let mut diffs = Vec::new();
    for w in iterates.windows(2) {
        diffs.push(cauchy_diff(&w[1], &w[0]).map_err(engine_to_cli)?);
    }
    Ok((
        lattice,
        PicardState {
            epsilon: manifest.config.epsilon,
            initial,
            iterates,
            diffs,
        },
    ))
}

#[derive(Serialize)]
struct VerifySummary {
    config_hash: String,
    in_regime: bool,
    truncation_tail: Option<f64>,
    s_box: Option<f64>,
    reports: usize,
    failed_in_regime: Vec<String>,
    failed_out_of_regime: Vec<String>,
}

/// `verify`: bound reports as JSON lines; nonzero exit iff an in-regime
/// report fails.
pub fn cmd_verify(run_dir: &Path, config_path: Option<PathBuf>) -> Result<(), CliError> {
    let manifest = read_manifest(run_dir)?;
    if let Some(path) = config_path {
        let given = load_config(&path)?;
        if given.hash() != manifest.config_hash {
            return Err(CliError::Validation(vec![format!(
                "config {} (hash {}) does not match run dir {} (hash {})",
                path.display(),
                given.hash(),
                run_dir.display(),
                manifest.config_hash
            )]));
        }
    }
    let (lattice, state) = load_state(run_dir, &manifest)?;
    let profile = manifest.config.profile;

    let mut reports: Vec<BoundReport> = Vec::new();
    let mut tail = None;
    let mut s_box = None;
    if profile.is_exponential() {
        reports.push(check_uniform_decay(&lattice, &state, &profile).map_err(engine_to_cli)?);
        if state.iterates.len() >= 2 {
            reports.extend(check_cauchy(&lattice, &state, &profile).map_err(engine_to_cli)?);
        }
        if profile.rho_constraint_ok(manifest.config.rho1, manifest.config.rho2) {
            reports.push(
                check_asymptotic_bound(
                    &lattice,
                    &state,
                    &profile,
                    manifest.config.rho1,
                    manifest.config.rho2,
                )
                .map_err(engine_to_cli)?,
            );
        } else {
            eprintln!("warning: rho outside the stated regime; asymptotic bound not checked");
        }
        tail = Some(
            truncation_tail(
                &profile,
                lattice.nu1(),
                lattice.nu2(),
                lattice.trunc().radius_x,
                lattice.trunc().radius_y,
            )
            .map_err(engine_to_cli)?,
        );
        s_box = Some(
            deviation_bound_constant(
                &lattice,
                &profile,
                manifest.config.rho1,
                manifest.config.rho2,
            )
            .map_err(engine_to_cli)?,
        );
    } else {
        eprintln!("note: polynomial profile; the exponential-decay bound family does not apply");
    }

    let mut lines = String::new();
    for r in &reports {
        lines.push_str(&to_p17_json(r));
        lines.push('\n');
    }
    std::fs::write(run_dir.join("reports.jsonl"), lines)
        .map_err(|e| io_other("write reports.jsonl", e))?;

    let failed_in: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass && r.in_regime)
        .map(|r| r.bound_name.clone())
        .collect();
    let failed_out: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass && !r.in_regime)
        .map(|r| r.bound_name.clone())
        .collect();
    let summary = VerifySummary {
        config_hash: manifest.config_hash.clone(),
        in_regime: manifest.in_regime,
        truncation_tail: tail,
        s_box,
        reports: reports.len(),
        failed_in_regime: failed_in.clone(),
        failed_out_of_regime: failed_out.clone(),
    };
    write_p17_json(&run_dir.join("verify_summary.json"), &summary)
        .map_err(|e| io_other("write verify summary", e))?;

    for r in &reports {
        println!(
            "{} {}: worst_ratio={} at (k={}, node={}, mode={}){}",
            if r.pass { "pass" } else { "FAIL" },
            r.bound_name,
            f17(r.worst_ratio),
            r.worst_location.k,
            r.worst_location.t_node,
            r.worst_location.mode,
            if r.in_regime { "" } else { " [out-of-regime]" }
        );
    }
    if !failed_out.is_empty() {
        eprintln!("note: out-of-regime failures (not gating): {failed_out:?}");
    }
    if !failed_in.is_empty() {
        return Err(CliError::BoundFailure(format!(
            "in-regime bounds failed: {failed_in:?}"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    config_hash: String,
    eta: f64,
    coeff: f64,
    t_fix: f64,
    slope: f64,
    deviation_over_eps_t_spread: f64,
    rows: usize,
}

/// `sweep`: per-epsilon horizons `t = coeff * eps^(eta - 1)` plus a fixed-t
/// sub-sweep whose log-log slope of deviation against eps is fitted.
#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    config_path: &Path,
    epsilons: &[f64],
    eta: f64,
    t_coeff: Option<f64>,
    t_cap: Option<f64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if epsilons.len() < 3 {
        return Err(CliError::Validation(vec![format!(
            "sweep: need at least 3 epsilon values for a slope fit, got {}",
            epsilons.len()
        )]));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Validation(vec![
            "sweep: every epsilon must be > 0".into(),
        ]));
    }
    let template = load_config(config_path)?;
    let hash = template.hash();
    let dir = out_dir(&template, out)?;
    std::fs::create_dir_all(&dir).map_err(|e| io_other("create output dir", e))?;

    let (nu1, nu2) = (template.basis.omega.len(), template.basis.omega_prime.len());
    let coeff = match t_coeff {
        Some(c) => c,
        None => match time_scale(&template.profile, nu1, nu2, 1.0) {
            Ok(te1) => te1, // T_eps * eps: the te-scale constant
            Err(_) => {
                return Err(CliError::Validation(vec![
                    "sweep: polynomial profile has no te scale; pass --t-coeff".into(),
                ]))
            }
        },
    };

    let horizon = |eps: f64| -> f64 {
        let t = coeff * eps.powf(eta - 1.0);
        match t_cap {
            Some(cap) => t.min(cap),
            None => t,
        }
    };
    let t_fix = epsilons
        .iter()
        .map(|&e| horizon(e))
        .fold(f64::INFINITY, f64::min);

    let run_at = |eps: f64, t_end: f64| -> Result<(f64, bool), CliError> {
        let mut cfg = template.clone();
        cfg.epsilon = eps;
        cfg.grid.t_end = Some(t_end);
        cfg.grid.t_eps_fraction = None;
        // sweeps label rather than refuse horizons beyond T_eps
        let v = cfg.validate(true).map_err(CliError::Validation)?;
        let data = generate_initial(&v.lattice, &v.profile, v.seed);
        let state =
            iterate(&v.lattice, data, eps, v.grid, v.k_max, v.tol).map_err(engine_to_cli)?;
        let n = v.grid.num_nodes;
        let diff: Vec<Complex64> = state
            .last()
            .at(n)
            .iter()
            .zip(state.iterates[0].at(n))
            .map(|(a, b)| a - b)
            .collect();
        let dev = weighted_h_norm(&v.lattice, &diff, v.rho1, v.rho2).map_err(engine_to_cli)?;
        Ok((dev, v.in_regime))
    };

    let mut csv = Csv::new(
        &hash,
        "epsilon,t_end,deviation_norm,deviation_over_eps_t,in_regime",
    );
    for &eps in epsilons {
        let t = horizon(eps);
        let (dev, in_regime) = run_at(eps, t)?;
        csv.row(&[
            f17(eps),
            f17(t),
            f17(dev),
            f17(dev / (eps * t)),
            in_regime.to_string(),
        ]);
    }
    let mut fixed = Vec::new();
    for &eps in epsilons {
        let (dev, in_regime) = run_at(eps, t_fix)?;
        csv.row(&[
            f17(eps),
            f17(t_fix),
            f17(dev),
            f17(dev / (eps * t_fix)),
            in_regime.to_string(),
        ]);
        fixed.push((eps, dev));
    }
    csv.write(&dir.join("sweep.csv"))
        .map_err(|e| io_other("write sweep.csv", e))?;

    let xs: Vec<f64> = fixed.iter().map(|(e, _)| e.ln()).collect();
    let ys: Vec<f64> = fixed.iter().map(|(_, d)| d.ln()).collect();
    let n = xs.len() as f64;
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    let ratios: Vec<f64> = fixed.iter().map(|(e, d)| d / (e * t_fix)).collect();
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min)
        - 1.0;

    let summary = SweepSummary {
        config_hash: hash,
        eta,
        coeff,
        t_fix,
        slope,
        deviation_over_eps_t_spread: spread,
        rows: 2 * epsilons.len(),
    };
    write_p17_json(&dir.join("sweep_summary.json"), &summary)
        .map_err(|e| io_other("write sweep summary", e))?;
    println!(
        "sweep complete: slope={} t_fix={} spread={} -> {}",
        f17(slope),
        f17(t_fix),
        f17(spread),
        dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct OracleSummary {
    config_hash: String,
    substeps: usize,
    steps: usize,
    sup_diff: f64,
    mass_drift: f64,
    energy_drift: f64,
}

/// `oracle`: RK4 the same truncated system and compare against the run's
/// final iterate.
pub fn cmd_oracle(run_dir: &Path, substeps: usize) -> Result<(), CliError> {
    let manifest = read_manifest(run_dir)?;
    if !manifest.converged {
        eprintln!(
            "warning: run did not reach its tolerance; comparison is against the last iterate"
        );
    }
    let (lattice, state) = load_state(run_dir, &manifest)?;
    let v = manifest
        .config
        .validate(true)
        .map_err(CliError::Validation)?;

    // the stored node-0 data must be the configured initial data
    let regenerated = generate_initial(&lattice, &v.profile, v.seed);
    let drift = regenerated
        .values()
        .iter()
        .zip(state.initial.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if drift > 1e-12 {
        return Err(CliError::Validation(vec![format!(
            "stored initial data disagrees with the config (sup diff {drift:.3e})"
        )]));
    }

    let run = rk4_integrate(&lattice, &state.initial, v.epsilon, v.grid, substeps)
        .map_err(engine_to_cli)?;
    let sup = compare(&state, &run).map_err(engine_to_cli)?;

    let snap = Snapshot::from_field(&lattice, &run.field, Some(manifest.config_hash.clone()));
    write_p17_json(&run_dir.join("oracle_run.json"), &snap)
        .map_err(|e| io_other("write oracle trajectory", e))?;
    let summary = OracleSummary {
        config_hash: manifest.config_hash.clone(),
        substeps,
        steps: run.steps,
        sup_diff: sup,
        mass_drift: run.mass_drift,
        energy_drift: run.energy_drift,
    };
    write_p17_json(&run_dir.join("oracle_summary.json"), &summary)
        .map_err(|e| io_other("write oracle summary", e))?;
    println!(
        "oracle complete: sup_diff={} mass_drift={} energy_drift={} steps={}",
        f17(sup),
        f17(run.mass_drift),
        f17(run.energy_drift),
        run.steps
    );
    Ok(())
}

/// `synth`: plot-ready physical-space samples of the nonlinear and linear
/// solutions at one time node.
#[allow(clippy::too_many_arguments)]
pub fn cmd_synth(
    run_dir: &Path,
    node: usize,
    nx: usize,
    ny: usize,
    x_range: (f64, f64),
    y_range: (f64, f64),
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let manifest = read_manifest(run_dir)?;
    let (lattice, state) = load_state(run_dir, &manifest)?;
    if node > manifest.nodes {
        return Err(CliError::Validation(vec![format!(
            "node {node} out of range 0..={}",
            manifest.nodes
        )]));
    }
    if nx < 1 || ny < 1 {
        return Err(CliError::Validation(vec!["nx and ny must be >= 1".into()]));
    }
    let coord = |lo: f64, hi: f64, n: usize, i: usize| -> f64 {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut points = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        for iy in 0..ny {
            points.push((
                coord(x_range.0, x_range.1, nx, ix),
                coord(y_range.0, y_range.1, ny, iy),
            ));
        }
    }
    let u = synthesize(&lattice, state.last().at(node), &points);
    let u0 = synthesize(&lattice, state.iterates[0].at(node), &points);

    let mut csv = Csv::new(&manifest.config_hash, "x,y,re_u,im_u,abs_u,re_u0,im_u0");
    for (p, (a, b)) in points.iter().zip(u.iter().zip(&u0)) {
        csv.row(&[
            f17(p.0),
            f17(p.1),
            f17(a.re),
            f17(a.im),
            f17(a.norm()),
            f17(b.re),
            f17(b.im),
        ]);
    }
    let path = out.unwrap_or_else(|| run_dir.join("synth.csv"));
    csv.write(&path)
        .map_err(|e| io_other("write synth csv", e))?;
    println!(
        "synth complete: {} samples at node {node} (t={}) -> {}",
        points.len(),
        f17(state.last().grid().node(node)),
        path.display()
    );
    Ok(())
}
