//! Dispersion measurement: initialize exact Bloch eigenvectors, evolve the
//! circuit, extract the rescaled per-step phase, and fit omega(kappa) to
//! recover the emergent mass.

use super::transfer::{bloch_state, commensurate_kappa, Branch};
use crate::dynamics::{step_brick, BrickParity, Potentials, QlgaEngine, SimState};
use crate::error::{Result, SimError};
use crate::gates::{CollisionSpec, KineticParams};
use crate::lattice::{LatticeMode, LatticeSpec};
use crate::linalg::CMatrix;
use crate::state::{SectorState, Statistics};
use crate::C64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DispersionPoint {
    pub k: i64,
    pub kappa: f64,
    pub omega_measured: f64,
    pub omega_model: f64,
    pub residual: f64,
}

/// Fit of the measured per-step phases to omega = c2 kappa^2 (+ c4 kappa^4
/// when a quartic term is requested to absorb lattice corrections).
#[derive(Debug, Clone, Serialize)]
pub struct DispersionResult {
    pub points: Vec<DispersionPoint>,
    pub quad_coeff: f64,
    pub quartic_coeff: Option<f64>,
    /// 1 / (2 * quad_coeff).
    pub implied_mass: f64,
    pub target_mass: Option<f64>,
    pub fit_residual: f64,
}

fn fit_points(
    ks: &[i64],
    kappas: &[f64],
    omegas: &[f64],
    target_mass: Option<f64>,
    with_quartic: bool,
) -> DispersionResult {
    let (c2, c4) = if with_quartic {
        // least squares on the basis (kappa^2, kappa^4)
        let (mut s22, mut s24, mut s44, mut b2, mut b4) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&kap, &om) in kappas.iter().zip(omegas) {
            let k2 = kap * kap;
            let k4 = k2 * k2;
            s22 += k2 * k2;
            s24 += k2 * k4;
            s44 += k4 * k4;
            b2 += om * k2;
            b4 += om * k4;
        }
        let det = s22 * s44 - s24 * s24;
        if det.abs() < 1e-300 {
            (if s22 > 0.0 { b2 / s22 } else { 0.0 }, None)
        } else {
            (
                (b2 * s44 - b4 * s24) / det,
                Some((s22 * b4 - s24 * b2) / det),
            )
        }
    } else {
        let s4: f64 = kappas.iter().map(|k| k.powi(4)).sum();
        let b: f64 = kappas.iter().zip(omegas).map(|(k, o)| o * k * k).sum();
        (if s4 > 0.0 { b / s4 } else { 0.0 }, None)
    };
    let model = |kap: f64| c2 * kap * kap + c4.unwrap_or(0.0) * kap.powi(4);
    let points: Vec<DispersionPoint> = ks
        .iter()
        .zip(kappas.iter().zip(omegas))
        .map(|(&k, (&kappa, &om))| DispersionPoint {
            k,
            kappa,
            omega_measured: om,
            omega_model: model(kappa),
            residual: om - model(kappa),
        })
        .collect();
    let fit_residual = (points.iter().map(|p| p.residual * p.residual).sum::<f64>()
        / points.len().max(1) as f64)
        .sqrt();
    DispersionResult {
        points,
        quad_coeff: c2,
        quartic_coeff: c4,
        implied_mass: if c2 != 0.0 {
            1.0 / (2.0 * c2)
        } else {
            f64::INFINITY
        },
        target_mass,
        fit_residual,
    }
}

/// Accumulated phase per unit of measurement, with the unwrap guard the
/// step convention requires: each increment must stay well inside a branch.
fn phase_increment(overlap: C64, reference: C64) -> Result<f64> {
    let delta = (overlap * reference.conj()).arg();
    if delta.abs() > std::f64::consts::FRAC_PI_2 {
        return Err(SimError::PhaseUnwrap { phase: delta });
    }
    Ok(delta)
}

/// Measure the brick-model dispersion: evolve the exact smooth-branch Bloch
/// eigenvector for each mode and fit the rescaled per-double-step phase to
/// omega = c kappa^2. For valid kinetic parameters the fitted mass must
/// approach b i / a as max(kappa eps) -> 0.
pub fn measure_dispersion_brick(
    params: &KineticParams,
    lattice: &LatticeSpec,
    k_list: &[i64],
    double_steps: usize,
) -> Result<DispersionResult> {
    if lattice.mode() != LatticeMode::Brick1d {
        return Err(SimError::InvalidLattice(
            "brick dispersion needs a brick lattice".into(),
        ));
    }
    let eps = lattice.epsilon();
    let rescale = (params.a() + params.b()) * (params.a() + params.b());
    if rescale.norm() < 1e-300 {
        return Err(SimError::Invalid("a + b = 0: rescaling undefined".into()));
    }
    let steps = double_steps.max(1);
    // modes are independent: sweep them in parallel, collect in order
    let measured: Result<Vec<(f64, f64)>> = k_list
        .par_iter()
        .map(|&k| {
            let kappa = commensurate_kappa(lattice, k);
            let (state, _) =
                bloch_state(lattice, params, k, Branch::Smooth, Statistics::HardBoson)?;
            let mut current = SimState::Sector(state);
            let mut total_phase = 0.0;
            for _ in 0..steps {
                let prev = current.clone();
                step_brick(
                    &mut current,
                    lattice,
                    params,
                    0.0,
                    &Potentials::none(),
                    BrickParity::Odd,
                    Statistics::HardBoson,
                )?;
                step_brick(
                    &mut current,
                    lattice,
                    params,
                    0.0,
                    &Potentials::none(),
                    BrickParity::Even,
                    Statistics::HardBoson,
                )?;
                let overlap = prev.inner(&current)?;
                total_phase += phase_increment(overlap, rescale)?;
            }
            // physical time per double step is 2 eps^2
            Ok((kappa, -total_phase / (steps as f64 * 2.0 * eps * eps)))
        })
        .collect();
    let (kappas, omegas): (Vec<f64>, Vec<f64>) = measured?.into_iter().unzip();
    Ok(fit_points(k_list, &kappas, &omegas, params.mass(), false))
}

/// Single-particle transfer matrix of one QLGA step at wave number kappa
/// along axis 0: collide(C) after advect(D), D = diag(e^{-i kappa eps v}).
pub fn qlga_transfer_matrix(collision: &CMatrix, lattice: &LatticeSpec, kappa: f64) -> CMatrix {
    let n = lattice.channels_per_site();
    let mut d = CMatrix::zeros(n, n);
    for ch in 0..n {
        let (axis, sign) = lattice.channel_velocity(ch);
        let phase = if axis == 0 {
            C64::from_polar(1.0, -kappa * lattice.epsilon() * sign as f64)
        } else {
            C64::new(1.0, 0.0)
        };
        d[(ch, ch)] = phase;
    }
    collision.mul(&d)
}

/// The smooth-branch eigenpair of the QLGA step transfer matrix: the
/// eigenvector continuously connected to the constant channel vector
/// (eigenvalue mu at kappa = 0).
pub fn qlga_smooth_mode(
    collision: &CMatrix,
    lattice: &LatticeSpec,
    kappa: f64,
) -> Result<(Vec<C64>, C64)> {
    let t = qlga_transfer_matrix(collision, lattice, kappa);
    let (vals, vecs) = t.unitary_eigen()?;
    let n = t.nrows();
    let mut best = 0;
    let mut best_overlap = -1.0;
    for k in 0..n {
        let overlap: C64 = vecs.column(k).iter().sum();
        if overlap.norm() > best_overlap {
            best_overlap = overlap.norm();
            best = k;
        }
    }
    if best_overlap / (n as f64).sqrt() < 0.5 {
        return Err(SimError::DegenerateBranch {
            kappa_eps: kappa * lattice.epsilon(),
        });
    }
    Ok((vecs.column(best), vals[best]))
}

/// Measure the QLGA dispersion along axis 0: evolve the exact smooth-branch
/// plane wave, extract the per-step phase rescaled by mu, and fit with a
/// quartic correction term (the fit's quadratic coefficient is the
/// continuum dispersion coefficient).
pub fn measure_dispersion_qlga(
    spec: &CollisionSpec,
    lattice: &LatticeSpec,
    k_list: &[i64],
    steps: usize,
) -> Result<DispersionResult> {
    let engine = QlgaEngine::new(lattice, spec)?;
    let eps = lattice.epsilon();
    let steps = steps.max(1);
    let target_mass = spec.inverse_mass(lattice.dim()).ok().and_then(|inv| {
        if inv.im.abs() < 1e-9 && inv.re.abs() > 1e-300 {
            Some(1.0 / inv.re)
        } else {
            None
        }
    });
    let measured: Result<Vec<(f64, f64)>> = k_list
        .par_iter()
        .map(|&k| {
            let kappa = commensurate_kappa(lattice, k);
            let (mode, _) = qlga_smooth_mode(engine.collision_matrix(), lattice, kappa)?;
            let mut comps: Vec<(crate::state::OccKey, C64)> = Vec::new();
            for site in 0..lattice.num_sites() {
                let x = lattice.site_coords(site)[0] as f64 * eps;
                let phase = C64::from_polar(1.0, kappa * x);
                for (ch, &w) in mode.iter().enumerate() {
                    comps.push((
                        smallvec::smallvec![lattice.qbit_index(site, ch) as u32],
                        w * phase,
                    ));
                }
            }
            let mut state =
                SectorState::from_components(lattice.num_qbits(), 1, spec.statistics, comps)?;
            state.normalize();
            let mut current = SimState::Sector(state);
            let mut total_phase = 0.0;
            for _ in 0..steps {
                let prev = current.clone();
                engine.step(&mut current, &Potentials::none())?;
                let overlap = prev.inner(&current)?;
                total_phase += phase_increment(overlap, spec.mu)?;
            }
            Ok((kappa, -total_phase / (steps as f64 * eps * eps)))
        })
        .collect();
    let (kappas, omegas): (Vec<f64>, Vec<f64>) = measured?.into_iter().unzip();
    Ok(fit_points(k_list, &kappas, &omegas, target_mass, true))
}
