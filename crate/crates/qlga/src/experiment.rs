//! Turns a parsed [`ExperimentConfig`] into artifacts on disk: CSV tables
//! and JSON summaries, written atomically (temp file + rename) so a crashed
//! run never leaves a truncated output. Every file embeds the resolved
//! config and the artifact version. Outputs are byte-identical for
//! identical (config, seed).

use crate::analysis::{
    continuum_error, convergence_order, crank_nicolson, dense_vs_sector_check,
    measure_dispersion_brick, measure_dispersion_qlga, nonlocal_m_density, DispersionResult,
};
use crate::config::{
    render_config, render_f64, ConvergeSection, ExperimentConfig, ExperimentKind, ExternalKind,
    InitKind, PairKind,
};
use crate::dynamics::{
    gate_count, gaussian_packet, run, EngineKind, InitialState, PairPotential, PotentialField,
    Potentials, RunConfig, SimState,
};
use crate::error::{Result, SimError};
use crate::gates::{CollisionSpec, KineticParams};
use crate::lattice::{build_lattice, LatticeMode, LatticeSpec};
use crate::state::Statistics;
use crate::C64;
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

pub const ARTIFACT_NAME: &str = "qlga";

pub fn artifact_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Paths written plus the summary value (also written as JSON).
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_preamble(cfg: &ExperimentConfig) -> String {
    let mut out = format!("# {} {}\n", ARTIFACT_NAME, artifact_version());
    for line in render_config(cfg).lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn build_lattice_from(cfg: &ExperimentConfig) -> Result<LatticeSpec> {
    build_lattice(
        cfg.lattice.d,
        cfg.lattice.l,
        cfg.lattice.epsilon,
        cfg.lattice.mode,
    )
}

fn build_potentials(cfg: &ExperimentConfig, lattice: &LatticeSpec) -> Result<Potentials> {
    let Some(pot) = &cfg.potential else {
        return Ok(Potentials::none());
    };
    let external = match pot.external {
        ExternalKind::None => None,
        ExternalKind::Constant => Some(PotentialField::constant(lattice, pot.u0)?),
        ExternalKind::CosineWell => {
            if lattice.dim() != 1 {
                return Err(SimError::Invalid(
                    "cosine-well potentials are one-dimensional".into(),
                ));
            }
            Some(cosine_well(lattice, pot.u0, pot.center)?)
        }
        ExternalKind::Table => Some(PotentialField::from_values(lattice, pot.table.clone())?),
    };
    let pair = match pot.pair {
        PairKind::None => None,
        PairKind::Distance => Some(PairPotential::from_distance_profile(
            lattice,
            &pot.pair_values,
        )?),
    };
    Ok(Potentials {
        external,
        pair,
        pair_cadence: cfg.run.as_ref().map(|r| r.pair_cadence),
    })
}

/// Smooth periodic well: u0 * (1 - cos(2 pi (x - center) / L)) / 2.
pub fn cosine_well(lattice: &LatticeSpec, u0: f64, center: f64) -> Result<PotentialField> {
    let l = lattice.side();
    let eps = lattice.epsilon();
    let length = l as f64 * eps;
    let values = (0..l)
        .map(|s| {
            let x = s as f64 * eps;
            u0 * (1.0 - ((x - center) * 2.0 * std::f64::consts::PI / length).cos()) / 2.0
        })
        .collect();
    PotentialField::from_values(lattice, values)
}

fn build_run_config(cfg: &ExperimentConfig) -> Result<RunConfig> {
    let lattice = build_lattice_from(cfg)?;
    let run_sec = cfg
        .run
        .as_ref()
        .ok_or_else(|| SimError::Invalid("missing [run] section".into()))?;
    let engine = match cfg.lattice.mode {
        LatticeMode::Brick1d => {
            let k = cfg
                .kinetic
                .as_ref()
                .ok_or_else(|| SimError::Invalid("missing [kinetic] section".into()))?;
            EngineKind::Brick {
                params: KineticParams::new(k.a, k.b)?,
                phi: k.phi,
            }
        }
        LatticeMode::Qlga => {
            let c = cfg
                .collision
                .as_ref()
                .ok_or_else(|| SimError::Invalid("missing [collision] section".into()))?;
            EngineKind::Qlga {
                collision: CollisionSpec::new(
                    c.mu,
                    c.nu,
                    c.lambda,
                    c.phi_onsite,
                    run_sec.statistics,
                )?,
            }
        }
    };
    let potentials = build_potentials(cfg, &lattice)?;
    let initial = match run_sec.init {
        InitKind::Occupied => InitialState::Occupied(run_sec.occupied.clone()),
        InitKind::Gaussian => InitialState::Gaussian {
            x0: run_sec.x0,
            sigma: run_sec.sigma,
            k0: run_sec.k0,
        },
    };
    Ok(RunConfig {
        lattice,
        engine,
        statistics: run_sec.statistics,
        representation: run_sec.representation,
        potentials,
        t_steps: run_sec.t_steps,
        initial,
        record_every: run_sec.record_every,
        seed: cfg.seed,
        norm_tol: cfg.tolerance.as_ref().map_or(crate::TOL_DRIFT, |t| t.norm),
    })
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(render_f64).unwrap_or_default()
}

/// Export a state as a self-describing record stream: occupancy indices
/// joined by '+' ('-' for the vacuum), then re and im, tab separated, sorted
/// by occupancy.
pub fn render_snapshot(cfg: &ExperimentConfig, state: &SimState) -> String {
    let mut out = csv_preamble(cfg);
    out.push_str(&format!("n_qbits\t{}\n", state.num_qbits()));
    match state {
        SimState::Sector(s) => {
            out.push_str(&format!("n_particles\t{}\n", s.num_particles()));
            let stats = match s.statistics() {
                Statistics::HardBoson => "hard-boson",
                Statistics::Fermion => "fermion",
            };
            out.push_str(&format!("statistics\t{stats}\n"));
            out.push_str("occupancy\tre\tim\n");
            for (key, amp) in s.sorted_components() {
                let occ = if key.is_empty() {
                    "-".to_string()
                } else {
                    key.iter()
                        .map(|q| q.to_string())
                        .collect::<Vec<_>>()
                        .join("+")
                };
                out.push_str(&format!(
                    "{occ}\t{}\t{}\n",
                    render_f64(amp.re),
                    render_f64(amp.im)
                ));
            }
        }
        SimState::Dense(d) => {
            out.push_str("n_particles\t-\n");
            out.push_str("statistics\t-\n");
            out.push_str("occupancy\tre\tim\n");
            for (idx, amp) in d.amplitudes().iter().enumerate() {
                if *amp == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut occ: Vec<String> = Vec::new();
                let mut rest = idx;
                while rest != 0 {
                    occ.push(rest.trailing_zeros().to_string());
                    rest &= rest - 1;
                }
                let occ = if occ.is_empty() {
                    "-".to_string()
                } else {
                    occ.join("+")
                };
                out.push_str(&format!(
                    "{occ}\t{}\t{}\n",
                    render_f64(amp.re),
                    render_f64(amp.im)
                ));
            }
        }
    }
    out
}

fn summary_value(cfg: &ExperimentConfig, results: serde_json::Value) -> serde_json::Value {
    json!({
        "artifact": { "name": ARTIFACT_NAME, "version": artifact_version() },
        "config": render_config(cfg),
        "results": results,
    })
}

fn dispersion_results_json(res: &DispersionResult) -> serde_json::Value {
    let rel_error = res
        .target_mass
        .map(|t| (res.implied_mass - t).abs() / t.abs());
    json!({
        "fitted_mass": res.implied_mass,
        "target_mass": res.target_mass,
        "rel_error": rel_error,
        "quad_coeff": res.quad_coeff,
        "quartic_coeff": res.quartic_coeff,
        "fit_residual": res.fit_residual,
    })
}

/// One level of the convergence ladder.
#[derive(Debug, Clone)]
pub struct ConvergenceLevel {
    pub l: usize,
    pub epsilon: f64,
    pub steps: usize,
    pub time: f64,
    pub l2_error: f64,
    pub ref_error_estimate: f64,
}

#[derive(Debug)]
pub struct ConvergenceStudy {
    pub levels: Vec<ConvergenceLevel>,
    pub fitted_order: f64,
    /// True when every reference self-error is at most 10% of the measured
    /// model error, which is what the convergence claim requires.
    pub reference_adequate: bool,
}

/// Run the epsilon-ladder convergence study for the brick model against the
/// independent fine-grid integrator.
pub fn convergence_study(
    params: &KineticParams,
    phi: f64,
    conv: &ConvergeSection,
    potential: impl Fn(&LatticeSpec) -> Result<Option<PotentialField>>,
) -> Result<ConvergenceStudy> {
    let mass = params.mass().ok_or_else(|| {
        SimError::Invalid("convergence study needs a finite mass (a != 0)".into())
    })?;
    let mut levels = Vec::new();
    for level in 0..conv.levels {
        let l = conv.base_l << level;
        let eps = conv.domain / l as f64;
        // an even step count closes the last brick double step
        let steps = (2.0 * (conv.time / (2.0 * eps * eps)).round()).max(2.0) as usize;
        let time = steps as f64 * eps * eps;
        let lattice = build_lattice(1, l, eps, LatticeMode::Brick1d)?;
        let field = potential(&lattice)?;
        let config = RunConfig {
            lattice: lattice.clone(),
            engine: EngineKind::Brick {
                params: *params,
                phi,
            },
            statistics: Statistics::HardBoson,
            representation: crate::dynamics::Representation::Sector,
            potentials: Potentials {
                external: field.clone(),
                pair: None,
                pair_cadence: None,
            },
            t_steps: steps,
            initial: InitialState::Gaussian {
                x0: conv.x0,
                sigma: conv.sigma,
                k0: conv.k0,
            },
            record_every: steps.max(1),
            seed: 0,
            norm_tol: crate::TOL_DRIFT,
        };
        let out = run(&config)?;
        let sector = out.state.as_sector().expect("sector run");
        let mut sim = vec![C64::new(0.0, 0.0); l];
        for (key, amp) in sector.iter() {
            sim[key[0] as usize] = *amp;
        }
        // reference on a 4x grid, with an 8x / half-dt run for the
        // Richardson-style self-error estimate
        let dt = (eps * eps / 4.0).min(5e-4);
        let refine = |factor: usize, dt: f64| -> Result<Vec<C64>> {
            let n = l * factor;
            let fine = build_lattice(1, n, conv.domain / n as f64, LatticeMode::Brick1d)?;
            let psi0: Vec<C64> = {
                let packet =
                    gaussian_packet(&fine, conv.x0, conv.sigma, conv.k0, Statistics::HardBoson)?;
                let mut v = vec![C64::new(0.0, 0.0); n];
                for (key, amp) in packet.iter() {
                    v[key[0] as usize] = *amp;
                }
                v
            };
            let u: Vec<f64> = match potential(&fine)? {
                Some(f) => f.values().to_vec(),
                None => vec![0.0; n],
            };
            let res = crank_nicolson(&psi0, &u, mass, time, dt, conv.domain / n as f64)?;
            if res.norm_drift > 1e-10 {
                return Err(SimError::Invalid(format!(
                    "reference integrator norm drift {:.3e}",
                    res.norm_drift
                )));
            }
            // restrict to the coarse sites
            Ok(res.psi.iter().step_by(factor).copied().collect())
        };
        let ref_a = refine(4, dt)?;
        let ref_b = refine(8, dt / 2.0)?;
        let ref_error_estimate = continuum_error(&ref_a, &ref_b)?;
        let l2_error = continuum_error(&sim, &ref_b)?;
        levels.push(ConvergenceLevel {
            l,
            epsilon: eps,
            steps,
            time,
            l2_error,
            ref_error_estimate,
        });
    }
    let eps: Vec<f64> = levels.iter().map(|lv| lv.epsilon).collect();
    let errs: Vec<f64> = levels.iter().map(|lv| lv.l2_error).collect();
    let fitted_order = convergence_order(&eps, &errs)?;
    let reference_adequate = levels
        .iter()
        .all(|lv| lv.ref_error_estimate <= 0.1 * lv.l2_error);
    Ok(ConvergenceStudy {
        levels,
        fitted_order,
        reference_adequate,
    })
}

/// Execute a parsed experiment, writing its artifacts under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let summary = match cfg.kind {
        ExperimentKind::RunBrick | ExperimentKind::RunQlga => {
            let run_config = build_run_config(cfg)?;
            let out = run(&run_config)?;
            let mut csv = csv_preamble(cfg);
            csv.push_str("step,time,norm,particle_number,centroid,spread\n");
            for row in &out.trace {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.step,
                    render_f64(row.time),
                    render_f64(row.norm),
                    render_f64(row.particle_number),
                    opt_cell(row.centroid),
                    opt_cell(row.spread),
                ));
            }
            let trace_path = out_dir.join("trace.csv");
            atomic_write(&trace_path, csv.as_bytes())?;
            files.push(trace_path);
            if cfg.run.as_ref().is_some_and(|r| r.snapshot) {
                let snap_path = out_dir.join("state.tsv");
                atomic_write(&snap_path, render_snapshot(cfg, &out.state).as_bytes())?;
                files.push(snap_path);
            }
            let last = out.trace.last().expect("at least the initial row");
            summary_value(
                cfg,
                json!({
                    "steps": out.steps_done,
                    "physical_time": last.time,
                    "final_norm": last.norm,
                    "final_particle_number": last.particle_number,
                }),
            )
        }
        ExperimentKind::Dispersion => {
            let lattice = build_lattice_from(cfg)?;
            let disp = cfg.dispersion.as_ref().expect("validated");
            let res = match cfg.lattice.mode {
                LatticeMode::Brick1d => {
                    let k = cfg.kinetic.as_ref().expect("validated");
                    let params = KineticParams::new(k.a, k.b)?;
                    measure_dispersion_brick(&params, &lattice, &disp.k_list, disp.steps)?
                }
                LatticeMode::Qlga => {
                    let c = cfg.collision.as_ref().expect("validated");
                    let spec = CollisionSpec::new(
                        c.mu,
                        c.nu,
                        c.lambda,
                        c.phi_onsite,
                        Statistics::HardBoson,
                    )?;
                    measure_dispersion_qlga(&spec, &lattice, &disp.k_list, disp.steps)?
                }
            };
            let mut csv = csv_preamble(cfg);
            csv.push_str("k,kappa,omega_measured,omega_model,residual\n");
            for pt in &res.points {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    pt.k,
                    render_f64(pt.kappa),
                    render_f64(pt.omega_measured),
                    render_f64(pt.omega_model),
                    render_f64(pt.residual),
                ));
            }
            let path = out_dir.join("dispersion.csv");
            atomic_write(&path, csv.as_bytes())?;
            files.push(path);
            summary_value(cfg, dispersion_results_json(&res))
        }
        ExperimentKind::Converge => {
            let k = cfg.kinetic.as_ref().expect("validated");
            let params = KineticParams::new(k.a, k.b)?;
            let conv = cfg.converge.as_ref().expect("validated");
            let pot_section = cfg.potential.clone();
            let study = convergence_study(&params, k.phi, conv, |lattice| match &pot_section {
                None => Ok(None),
                Some(pot) => match pot.external {
                    ExternalKind::None => Ok(None),
                    ExternalKind::Constant => Ok(Some(PotentialField::constant(lattice, pot.u0)?)),
                    ExternalKind::CosineWell => Ok(Some(cosine_well(lattice, pot.u0, pot.center)?)),
                    ExternalKind::Table => Err(SimError::Invalid(
                        "table potentials cannot be refined across the epsilon ladder".into(),
                    )),
                },
            })?;
            let mut csv = csv_preamble(cfg);
            csv.push_str("level,epsilon,l,steps,l2_error,ref_error_estimate\n");
            for (i, lv) in study.levels.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    i,
                    render_f64(lv.epsilon),
                    lv.l,
                    lv.steps,
                    render_f64(lv.l2_error),
                    render_f64(lv.ref_error_estimate),
                ));
            }
            let path = out_dir.join("converge.csv");
            atomic_write(&path, csv.as_bytes())?;
            files.push(path);
            summary_value(
                cfg,
                json!({
                    "fitted_order": study.fitted_order,
                    "errors": study.levels.iter().map(|lv| lv.l2_error).collect::<Vec<_>>(),
                    "reference_adequate": study.reference_adequate,
                }),
            )
        }
        ExperimentKind::OracleCheck => {
            let run_config = build_run_config(cfg)?;
            let max_deviation = dense_vs_sector_check(&run_config)?;
            summary_value(cfg, json!({ "max_deviation": max_deviation }))
        }
        ExperimentKind::GateCount => {
            let lattice = build_lattice_from(cfg)?;
            let n = cfg.gatecount.as_ref().map_or(1, |g| g.n_particles);
            let gc = gate_count(&lattice, n);
            summary_value(cfg, serde_json::to_value(&gc).expect("serializable"))
        }
        ExperimentKind::MInverse => {
            let k = cfg.kinetic.as_ref().expect("validated");
            let threshold = cfg.minverse.as_ref().map_or(1e-10, |m| m.threshold);
            let report = nonlocal_m_density(k.a, k.b, cfg.lattice.l, threshold)?;
            let mut csv = csv_preamble(cfg);
            csv.push_str("log10_bucket,count\n");
            for (bucket, count) in &report.histogram {
                csv.push_str(&format!("{bucket},{count}\n"));
            }
            let path = out_dir.join("m_inverse_histogram.csv");
            atomic_write(&path, csv.as_bytes())?;
            files.push(path);
            summary_value(cfg, serde_json::to_value(&report).expect("serializable"))
        }
    };
    let summary_path = out_dir.join("summary.json");
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("serializable");
    bytes.push(b'\n');
    atomic_write(&summary_path, &bytes)?;
    files.push(summary_path);
    Ok(ExperimentOutcome { files, summary })
}

/// Process exit code for an error, per the documented contract:
/// 2 config, 3 runtime invariant breach, 4 I/O.
pub fn exit_code_for(err: &SimError) -> i32 {
    match err {
        SimError::Io(_) => 4,
        _ => 3,
    }
}
