//! Two-step transfer-matrix analysis of the brick-wall rule.
//!
//! For the Bloch ansatz psi_{2j} = alpha e^{i kappa (2j) eps},
//! psi_{2j+1} = beta e^{i kappa (2j+1) eps}, a double step acts on
//! (alpha, beta) by a 2x2 unitary whose closed-form eigenvalue
//! lambda(kappa eps) controls the continuum limit. The smooth branch is the
//! eigenvector continuously connected to (1, 1); only it survives as
//! kappa eps -> 0.

use crate::error::{Result, SimError};
use crate::gates::KineticParams;
use crate::lattice::{LatticeMode, LatticeSpec};
use crate::state::{SectorState, Statistics};
use crate::C64;

/// The 2x2 double-step transfer matrix at s = kappa * eps, in the
/// convention where the even pairing acts first:
/// [[b^2 + a^2 e^{-2is}, 2ab cos s], [2ab cos s, b^2 + a^2 e^{2is}]].
pub fn transfer_matrix(a: C64, b: C64, s: f64) -> [[C64; 2]; 2] {
    let e_m2 = C64::from_polar(1.0, -2.0 * s);
    let e_p2 = C64::from_polar(1.0, 2.0 * s);
    let off = a * b * C64::new(2.0 * s.cos(), 0.0);
    [[b * b + a * a * e_m2, off], [off, b * b + a * a * e_p2]]
}

/// Closed-form eigenvalue pair of [`transfer_matrix`]:
/// lambda = b^2 + a^2 cos 2s +- a cos s * w with
/// w = sqrt(4 b^2 + 2 a^2 (cos 2s - 1)), the square-root branch chosen
/// continuously connected to 2b at s = 0. The first element is the smooth
/// branch (it tends to (a+b)^2 as s -> 0).
pub fn closed_form_lambdas(a: C64, b: C64, s: f64) -> (C64, C64) {
    let cos2 = C64::new((2.0 * s).cos(), 0.0);
    let base = b * b + a * a * cos2;
    let q = C64::new(4.0, 0.0) * b * b + C64::new(2.0, 0.0) * a * a * (cos2 - C64::new(1.0, 0.0));
    let mut w = q.sqrt();
    let two_b = C64::new(2.0, 0.0) * b;
    if (w - two_b).norm() > (w + two_b).norm() {
        w = -w;
    }
    let shift = a * C64::new(s.cos(), 0.0) * w;
    (base + shift, base - shift)
}

/// Eigenstructure of the double-step transfer matrix at one wave number,
/// computed two ways (closed form and direct 2x2 diagonalization).
#[derive(Debug, Clone)]
pub struct TransferEigen {
    pub kappa_eps: f64,
    pub matrix: [[C64; 2]; 2],
    /// Eigenvalue of the branch connected to (1, 1).
    pub lambda_smooth: C64,
    pub lambda_other: C64,
    pub smooth_vec: [C64; 2],
    pub other_vec: [C64; 2],
    /// Max deviation between the closed-form eigenvalue pair and the
    /// directly diagonalized pair.
    pub closed_form_dev: f64,
}

fn eigvec_for(m: &[[C64; 2]; 2], lambda: C64) -> [C64; 2] {
    let cand1 = [m[0][1], lambda - m[0][0]];
    let cand2 = [lambda - m[1][1], m[1][0]];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let v = if n1 >= n2 { cand1 } else { cand2 };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

/// Diagonalize the transfer matrix at wave number kappa, lattice spacing
/// epsilon. Errors when the two eigenvalues are degenerate (the branch
/// selection is then ambiguous; at those isolated wave numbers the matrix
/// is a multiple of the identity and every vector is an eigenvector).
pub fn transfer_eigen(params: &KineticParams, kappa: f64, epsilon: f64) -> Result<TransferEigen> {
    let (a, b) = (params.a(), params.b());
    let s = kappa * epsilon;
    let m = transfer_matrix(a, b, s);
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr - C64::new(4.0, 0.0) * det).sqrt();
    let half = C64::new(0.5, 0.0);
    let l1 = (tr + disc) * half;
    let l2 = (tr - disc) * half;
    // near a degeneracy the discriminant is a square root of a cancellation
    // and carries sqrt(eps)-level noise; flag the whole band
    if (l1 - l2).norm() < 1e-6 {
        return Err(SimError::DegenerateBranch { kappa_eps: s });
    }
    let v1 = eigvec_for(&m, l1);
    let v2 = eigvec_for(&m, l2);
    // smooth branch: larger overlap with (1, 1)/sqrt(2)
    let o1 = (v1[0] + v1[1]).norm();
    let o2 = (v2[0] + v2[1]).norm();
    let (lambda_smooth, smooth_vec, lambda_other, other_vec) = if o1 >= o2 {
        (l1, v1, l2, v2)
    } else {
        (l2, v2, l1, v1)
    };
    // cross-check the closed form against the direct pair
    let (cf1, cf2) = closed_form_lambdas(a, b, s);
    let dev_same = (cf1 - l1).norm().max((cf2 - l2).norm());
    let dev_swap = (cf1 - l2).norm().max((cf2 - l1).norm());
    let closed_form_dev = dev_same.min(dev_swap);
    if closed_form_dev > 1e-8 {
        return Err(SimError::Invalid(format!(
            "closed-form and direct transfer eigenvalues disagree by {closed_form_dev:.3e} at kappa*eps = {s}"
        )));
    }
    Ok(TransferEigen {
        kappa_eps: s,
        matrix: m,
        lambda_smooth,
        lambda_other,
        smooth_vec,
        other_vec,
        closed_form_dev,
    })
}

/// Which transfer-matrix branch to embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Smooth,
    Other,
}

/// Commensurate wave number for mode k: kappa = 2 pi k / (l eps).
pub fn commensurate_kappa(lattice: &LatticeSpec, k: i64) -> f64 {
    2.0 * std::f64::consts::PI * k as f64 / (lattice.side() as f64 * lattice.epsilon())
}

/// Embed the exact Bloch eigenvector for mode k as a normalized
/// single-particle state, returning it with its double-step eigenvalue.
///
/// The dynamics applies the odd (wraparound) pass first, which mirrors the
/// even-first transfer convention; the realized double-step matrix at +kappa
/// is therefore [`transfer_matrix`] evaluated at -kappa. The eigenvalues are
/// even in kappa, so the returned lambda is lambda(kappa eps) of the closed
/// form either way.
pub fn bloch_state(
    lattice: &LatticeSpec,
    params: &KineticParams,
    k: i64,
    branch: Branch,
    stats: Statistics,
) -> Result<(SectorState, C64)> {
    if lattice.mode() != LatticeMode::Brick1d {
        return Err(SimError::InvalidLattice(
            "Bloch states are defined on brick lattices".into(),
        ));
    }
    let kappa = commensurate_kappa(lattice, k);
    let eigen = transfer_eigen(params, -kappa, lattice.epsilon())?;
    let (lambda, vec) = match branch {
        Branch::Smooth => (eigen.lambda_smooth, eigen.smooth_vec),
        Branch::Other => (eigen.lambda_other, eigen.other_vec),
    };
    let state = embed_bloch_vector(lattice, kappa, vec, stats)?;
    Ok((state, lambda))
}

/// Place a two-component (even-site, odd-site) Bloch amplitude pair on the
/// ring and normalize.
pub fn embed_bloch_vector(
    lattice: &LatticeSpec,
    kappa: f64,
    vec: [C64; 2],
    stats: Statistics,
) -> Result<SectorState> {
    let l = lattice.side();
    let eps = lattice.epsilon();
    let mut comps: Vec<(crate::state::OccKey, C64)> = Vec::with_capacity(l);
    for site in 0..l {
        let weight = vec[site % 2];
        let phase = C64::from_polar(1.0, kappa * site as f64 * eps);
        comps.push((smallvec::smallvec![site as u32], weight * phase));
    }
    let mut state = SectorState::from_components(lattice.num_qbits(), 1, stats, comps)?;
    state.normalize();
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{step_brick, BrickParity, Potentials, SimState};
    use crate::lattice::build_lattice;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kappa_zero_eigenpairs() {
        let p = KineticParams::from_angle(0.7, 0.0);
        let eig = transfer_eigen(&p, 0.0, 0.1).unwrap();
        let (a, b) = (p.a(), p.b());
        assert!((eig.lambda_smooth - (a + b) * (a + b)).norm() < 1e-14);
        assert!((eig.lambda_other - (b - a) * (b - a)).norm() < 1e-14);
        // eigenvectors (1,1) and (1,-1) up to normalization and phase
        let r = eig.smooth_vec[1] / eig.smooth_vec[0];
        assert!((r - c(1.0, 0.0)).norm() < 1e-12);
        let r = eig.other_vec[1] / eig.other_vec[0];
        assert!((r + c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_form_matches_diagonalization_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let theta = 0.15 + 1.25 * rng.gen::<f64>();
            let beta = 2.0 * PI * rng.gen::<f64>();
            let p = KineticParams::from_angle(theta, beta);
            let s = 3.0 * (rng.gen::<f64>() - 0.5);
            match transfer_eigen(&p, s, 1.0) {
                Ok(eig) => {
                    assert!(eig.closed_form_dev < 1e-12, "dev = {}", eig.closed_form_dev);
                    assert!((eig.lambda_smooth.norm() - 1.0).abs() < 1e-12);
                    assert!((eig.lambda_other.norm() - 1.0).abs() < 1e-12);
                }
                Err(SimError::DegenerateBranch { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn transfer_matrix_is_unitary() {
        let p = KineticParams::from_angle(0.9, 1.3);
        let m = transfer_matrix(p.a(), p.b(), 0.37);
        // M^dagger M = I
        for r in 0..2 {
            for col in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    acc += m[k][r].conj() * m[k][col];
                }
                let want = if r == col { 1.0 } else { 0.0 };
                assert!((acc - c(want, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn small_kappa_expansion() {
        // lambda ~ (a+b)^2 (1 - (a/b) s^2), relative error O(s^4)
        let p = KineticParams::from_angle(0.8, 0.0);
        let (a, b) = (p.a(), p.b());
        let model = |s: f64| (a + b) * (a + b) * (c(1.0, 0.0) - a / b * c(s * s, 0.0));
        let err_at = |s: f64| {
            let (lam, _) = closed_form_lambdas(a, b, s);
            (lam - model(s)).norm() / lam.norm()
        };
        let e1 = err_at(0.02);
        let e2 = err_at(0.04);
        // quartic scaling: doubling s multiplies the error by about 16
        assert!(e1 < 1e-6);
        let ratio = e2 / e1;
        assert!(ratio > 10.0 && ratio < 24.0, "ratio = {ratio}");
    }

    #[test]
    fn rescaled_bloch_advance_approaches_unity() {
        // the rescaled phase advance per double step, lambda / (a+b)^2,
        // tends to 1 as kappa -> 0
        let p = KineticParams::from_angle(0.8, 0.2);
        let rescale = (p.a() + p.b()) * (p.a() + p.b());
        let advance = |s: f64| {
            let eig = transfer_eigen(&p, s, 1.0).unwrap();
            (eig.lambda_smooth / rescale - c(1.0, 0.0)).norm()
        };
        let d1 = advance(0.08);
        let d2 = advance(0.04);
        let d3 = advance(0.02);
        assert!(d1 > d2 && d2 > d3);
        assert!(d3 < 1e-3);
        // quadratic approach: halving kappa quarters the distance
        let ratio = d1 / d2;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio = {ratio}");
    }

    #[test]
    fn bloch_eigenvector_is_exact_under_double_step() {
        // the exact circuit identity: two passes multiply the embedded
        // eigenvector by its transfer eigenvalue
        let lat = build_lattice(1, 16, 0.1, LatticeMode::Brick1d).unwrap();
        let p = KineticParams::from_angle(0.75, 0.4);
        for k in [0i64, 1, 3, 5, 7] {
            for branch in [Branch::Smooth, Branch::Other] {
                let (state, lambda) = match bloch_state(&lat, &p, k, branch, Statistics::HardBoson)
                {
                    Ok(x) => x,
                    Err(SimError::DegenerateBranch { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                let mut evolved = SimState::Sector(state.clone());
                step_brick(
                    &mut evolved,
                    &lat,
                    &p,
                    0.0,
                    &Potentials::none(),
                    BrickParity::Odd,
                    Statistics::HardBoson,
                )
                .unwrap();
                step_brick(
                    &mut evolved,
                    &lat,
                    &p,
                    0.0,
                    &Potentials::none(),
                    BrickParity::Even,
                    Statistics::HardBoson,
                )
                .unwrap();
                let evolved = evolved.as_sector().unwrap();
                for (key, amp) in state.iter() {
                    let got = evolved.amplitude(key);
                    assert!(
                        (got - lambda * amp).norm() < 1e-13,
                        "k={k} branch={branch:?}"
                    );
                }
            }
        }
    }
}
