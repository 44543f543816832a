//! Independent oracles and measurements for the quantitative claims of the
//! lattice models: transfer-matrix eigenstructure, dispersion and mass,
//! continuum convergence, inverse-density of the non-implementable
//! single-step matrix, and dense-vs-sector cross-checks.

mod dispersion;
mod equivalence;
mod minverse;
mod pde;
mod transfer;

pub use dispersion::{
    measure_dispersion_brick, measure_dispersion_qlga, qlga_smooth_mode, qlga_transfer_matrix,
    DispersionPoint, DispersionResult,
};
pub use equivalence::dense_vs_sector_check;
pub use minverse::{build_m, nonlocal_m_density, MInverseReport};
pub use pde::{crank_nicolson, crank_nicolson_two_particle, PdeResult};
pub use transfer::{
    bloch_state, closed_form_lambdas, commensurate_kappa, embed_bloch_vector, transfer_eigen,
    transfer_matrix, Branch, TransferEigen,
};

use crate::dynamics::SimState;
use crate::error::{Result, SimError};
use crate::gates::collision_inverse_mass;
use crate::C64;
use serde::Serialize;

/// Emergent mass implied by collision eigenvalues (mu, nu) in d dimensions.
#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub mass: f64,
    /// Imaginary residue of the complex mass; nonzero means the parameters
    /// sit outside the nonrelativistic regime.
    pub imag_residual: f64,
    pub nonrelativistic: bool,
}

/// Evaluate the mass relation. Errors when mu = nu; mu = -nu yields an
/// infinite mass (zero inverse).
pub fn mass_consistency(mu: C64, nu: C64, d: usize) -> Result<MassReport> {
    let inv = collision_inverse_mass(mu, nu, d)?;
    if inv.norm() < 1e-14 {
        return Ok(MassReport {
            mass: f64::INFINITY,
            imag_residual: 0.0,
            nonrelativistic: true,
        });
    }
    let mass = C64::new(1.0, 0.0) / inv;
    let imag_residual = mass.im.abs();
    Ok(MassReport {
        mass: mass.re,
        imag_residual,
        nonrelativistic: imag_residual <= 1e-10 * mass.re.abs().max(1.0),
    })
}

/// Remove the overall time-dependent phase of a brick trajectory: the
/// snapshot at pass count t is multiplied by (a + b)^{-t}. Norms are
/// untouched because |a + b| = 1 for valid kinetic parameters; the factor
/// is computed from the polar form to stay stable for large t.
pub fn rescale_phase(trajectory: &mut [(usize, SimState)], a: C64, b: C64) -> Result<()> {
    let base = a + b;
    if base.norm() < 1e-300 {
        return Err(SimError::Invalid(
            "a + b = 0: the overall phase rescaling is undefined".into(),
        ));
    }
    let (r, theta) = base.to_polar();
    for (t, state) in trajectory.iter_mut() {
        let tf = *t as f64;
        let factor = C64::from_polar(r.powf(-tf), -theta * tf);
        match state {
            SimState::Sector(s) => s.scale(factor),
            SimState::Dense(s) => s.scale(factor),
        }
    }
    Ok(())
}

/// L2 distance between two same-length amplitude vectors after normalizing
/// both and minimizing over one global phase.
pub fn continuum_error(sim: &[C64], reference: &[C64]) -> Result<f64> {
    if sim.len() != reference.len() {
        return Err(SimError::Invalid(format!(
            "cannot compare vectors of length {} and {}",
            sim.len(),
            reference.len()
        )));
    }
    let ns: f64 = sim.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nr: f64 = reference.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if ns == 0.0 || nr == 0.0 {
        return Err(SimError::Invalid("cannot compare zero vectors".into()));
    }
    let overlap: C64 = sim
        .iter()
        .zip(reference)
        .map(|(s, r)| r.conj() * s)
        .sum::<C64>()
        / (ns * nr);
    // min over phi of || s - e^{i phi} r ||^2 = 2 - 2 |<r, s>|
    Ok((2.0 - 2.0 * overlap.norm()).max(0.0).sqrt())
}

/// Least-squares slope of log(error) against log(epsilon): the measured
/// convergence order.
pub fn convergence_order(epsilons: &[f64], errors: &[f64]) -> Result<f64> {
    if epsilons.len() != errors.len() || epsilons.len() < 2 {
        return Err(SimError::Invalid(
            "convergence order needs at least two (epsilon, error) pairs".into(),
        ));
    }
    if errors.iter().any(|&e| e <= 0.0) || epsilons.iter().any(|&e| e <= 0.0) {
        return Err(SimError::Invalid(
            "convergence order needs positive errors and epsilons".into(),
        ));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
