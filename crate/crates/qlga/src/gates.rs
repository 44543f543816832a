//! Constructors for the model's unitaries: the brick-wall kinetic gate, the
//! propagation exchange gate, external and pairwise potential phases, and
//! the lattice-gas collision operator with its many-body lift.

use crate::error::{Result, SimError};
use crate::linalg::CMatrix;
use crate::state::{Statistics, TwoQbitGate};
use crate::C64;
use serde::{Deserialize, Serialize};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Kinetic amplitudes (a, b) of the brick gate. Unitarity of the gate
/// requires |a|^2 + |b|^2 = 1 and a*conj(b) + conj(a)*b = 0; the second
/// condition is what makes the emergent mass b*i/a real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    a: C64,
    b: C64,
}

/// Diagnostics from checking a candidate (a, b) pair.
#[derive(Debug, Clone, Copy)]
pub struct KineticDiagnostics {
    pub ok: bool,
    /// | |a|^2 + |b|^2 - 1 |
    pub norm_residual: f64,
    /// | a*conj(b) + conj(a)*b |
    pub orthogonality_residual: f64,
    /// Re(b*i/a); `None` when a = 0 (no propagation, infinite mass).
    pub mass: Option<f64>,
    /// | Im(b*i/a) |; must vanish for valid parameters.
    pub mass_imag_residual: f64,
}

/// Check both unitarity constraints and report the derived mass.
pub fn validate_kinetic(a: C64, b: C64) -> KineticDiagnostics {
    let norm_residual = (a.norm_sqr() + b.norm_sqr() - 1.0).abs();
    let orthogonality_residual = (a * b.conj() + a.conj() * b).norm();
    let (mass, mass_imag_residual) = if a.norm() == 0.0 {
        (None, 0.0)
    } else {
        let m = b * C64::new(0.0, 1.0) / a;
        (Some(m.re), m.im.abs())
    };
    KineticDiagnostics {
        ok: norm_residual <= crate::TOL_ALGEBRAIC
            && orthogonality_residual <= crate::TOL_ALGEBRAIC
            && mass_imag_residual <= crate::TOL_ALGEBRAIC,
        norm_residual,
        orthogonality_residual,
        mass,
        mass_imag_residual,
    }
}

impl KineticParams {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let diag = validate_kinetic(a, b);
        if !diag.ok {
            return Err(SimError::InvalidGate(format!(
                "kinetic amplitudes violate unitarity: |a|^2+|b|^2-1 = {:.3e}, a*conj(b)+conj(a)*b = {:.3e}",
                diag.norm_residual, diag.orthogonality_residual
            )));
        }
        Ok(KineticParams { a, b })
    }

    /// The family a = i sin(theta) e^{i beta}, b = cos(theta) e^{i beta},
    /// which satisfies both constraints identically and has mass cot(theta).
    pub fn from_angle(theta: f64, beta: f64) -> Self {
        let phase = C64::from_polar(1.0, beta);
        KineticParams {
            a: c(0.0, theta.sin()) * phase,
            b: c(theta.cos(), 0.0) * phase,
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// Derived mass b*i/a; `None` when a = 0.
    pub fn mass(&self) -> Option<f64> {
        if self.a.norm() == 0.0 {
            None
        } else {
            Some((self.b * C64::new(0.0, 1.0) / self.a).re)
        }
    }
}

/// Collision operator data: the three irrep eigenvalues of the
/// single-particle block plus the on-site interaction phase.
///
/// mu acts on the constant vector, nu on vectors antisymmetric under
/// velocity parity, lambda on the rest. phi_onsite is the bare phase applied
/// per doubly-occupied channel pair at one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionSpec {
    pub mu: C64,
    pub nu: C64,
    pub lambda: C64,
    pub phi_onsite: f64,
    pub statistics: Statistics,
}

impl CollisionSpec {
    pub fn new(
        mu: C64,
        nu: C64,
        lambda: C64,
        phi_onsite: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        for (name, z) in [("mu", mu), ("nu", nu), ("lambda", lambda)] {
            if (z.norm() - 1.0).abs() > crate::TOL_ALGEBRAIC {
                return Err(SimError::InvalidGate(format!(
                    "collision eigenvalue {name} must be unimodular, |{name}| = {}",
                    z.norm()
                )));
            }
        }
        if !phi_onsite.is_finite() {
            return Err(SimError::InvalidGate("phi_onsite must be finite".into()));
        }
        Ok(CollisionSpec {
            mu,
            nu,
            lambda,
            phi_onsite,
            statistics,
        })
    }

    /// Inverse of the emergent mass in d dimensions,
    /// 1/m = -i (mu + nu) / (d (mu - nu)).
    pub fn inverse_mass(&self, d: usize) -> Result<C64> {
        collision_inverse_mass(self.mu, self.nu, d)
    }
}

/// Inverse mass implied by the collision eigenvalues: rearranging
/// i/(2m) = (1/d)(nu/(mu-nu) + 1/2) gives m = i d (mu - nu) / (mu + nu).
/// Errors when mu = nu (the single-particle block is degenerate and the
/// relation divides by zero). A complex result signals parameters outside
/// the nonrelativistic regime; callers decide how strictly to reject it.
pub fn collision_inverse_mass(mu: C64, nu: C64, d: usize) -> Result<C64> {
    if (mu - nu).norm() < 1e-15 {
        return Err(SimError::InvalidGate(
            "mu = nu: degenerate collision, mass relation divides by zero".into(),
        ));
    }
    Ok(c(0.0, -1.0) * (mu + nu) / (c(d as f64, 0.0) * (mu - nu)))
}

/// The brick kinetic gate: block diagonal {1, [[b, a], [a, b]], e^{-i phi}}
/// in the pair basis. phi is the on-site two-particle interaction phase.
pub fn build_s_gate(params: &KineticParams, phi: f64) -> Result<TwoQbitGate> {
    let (a, b) = (params.a(), params.b());
    TwoQbitGate::new([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, b, a, ZERO],
        [ZERO, a, b, ZERO],
        [ZERO, ZERO, ZERO, C64::from_polar(1.0, -phi)],
    ])
}

/// The propagation exchange gate: swaps the pair's q-bit states. The
/// fermionic variant sends |11> to -|11>, which is the canonical-ordering
/// sign of two particles crossing.
pub fn build_exchange_gate(statistics: Statistics) -> TwoQbitGate {
    let corner = match statistics {
        Statistics::HardBoson => ONE,
        Statistics::Fermion => -ONE,
    };
    TwoQbitGate::new([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ZERO, ONE, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, ZERO, corner],
    ])
    .expect("exchange gate is unitary")
}

/// External-potential phase on one q-bit: diag(1, e^{-i eps^2 U}).
pub fn build_external_phase(u_value: f64, epsilon: f64) -> [C64; 2] {
    [ONE, C64::from_polar(1.0, -epsilon * epsilon * u_value)]
}

/// Pairwise-potential phase on two q-bits: diag(1, 1, 1, e^{-i eps^2 U}).
pub fn build_pair_phase(u_value: f64, epsilon: f64) -> TwoQbitGate {
    TwoQbitGate::new([
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, ONE, ZERO],
        [
            ZERO,
            ZERO,
            ZERO,
            C64::from_polar(1.0, -epsilon * epsilon * u_value),
        ],
    ])
    .expect("pair phase gate is unitary")
}

/// The three spectral projectors of a lattice-symmetric single-particle
/// collision operator on the 2d velocity channels:
/// P_mu onto the constant vector, P_nu onto parity-odd vectors, and
/// P_lambda onto the remainder. They are exact orthogonal idempotents
/// summing to the identity.
pub fn collision_projectors(d: usize) -> (CMatrix, CMatrix, CMatrix) {
    let n = 2 * d;
    let mut p_mu = CMatrix::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            p_mu[(r, col)] = c(1.0 / n as f64, 0.0);
        }
    }
    // R maps each channel to its parity partner (velocity reversal)
    let mut reflect = CMatrix::zeros(n, n);
    for ch in 0..n {
        reflect[(ch, ch ^ 1)] = ONE;
    }
    let ident = CMatrix::identity(n);
    let half = c(0.5, 0.0);
    let p_nu = ident.sub(&reflect).scale(half);
    let p_lambda = ident.add(&reflect).scale(half).sub(&p_mu);
    (p_mu, p_nu, p_lambda)
}

/// Single-particle collision matrix C = mu P_mu + nu P_nu + lambda P_lambda.
/// Unitary, and invariant under every signed permutation of the axes.
pub fn build_collision_matrix(spec: &CollisionSpec, d: usize) -> CMatrix {
    let (p_mu, p_nu, p_lambda) = collision_projectors(d);
    p_mu.scale(spec.mu)
        .add(&p_nu.scale(spec.nu))
        .add(&p_lambda.scale(spec.lambda))
}

/// Lift a single-particle collision matrix to the 2^{2d}-dimensional
/// many-body unitary of one site.
///
/// The lift is exp(-i H_int) exp(-i H_kin): H_kin is the number-conserving
/// quadratic lift of h = i log C (principal branch), with within-site
/// canonical-order signs for fermions and none for hard bosons, and
/// H_int = phi_onsite * sum_{c<c'} n_c n_{c'}. The single-particle block of
/// the result equals C, the construction is unitary, and particle number is
/// conserved sector by sector.
pub fn lift_collision(collision: &CMatrix, spec: &CollisionSpec) -> Result<CMatrix> {
    let n_ch = collision.nrows();
    if n_ch > 8 {
        return Err(SimError::InvalidGate(format!(
            "collision lift supports at most 8 channels per site, got {n_ch}"
        )));
    }
    let defect = collision.unitarity_defect();
    if defect > 1e-10 {
        return Err(SimError::InvalidGate(format!(
            "collision matrix is not unitary: defect {defect:.3e}"
        )));
    }
    // principal logarithm via the eigendecomposition of the unitary C
    let (vals, vecs) = collision.unitary_eigen()?;
    let mut h = CMatrix::zeros(n_ch, n_ch);
    for (k, lam) in vals.iter().enumerate() {
        let theta = lam.arg();
        if (theta.abs() - std::f64::consts::PI).abs() < 1e-12 {
            return Err(SimError::LogBranch {
                context: format!("collision eigenvalue {lam} lies on the branch cut"),
            });
        }
        let v = vecs.column(k);
        // C = exp(-i h) so the eigenphase of h is -arg(lambda)
        let coeff = c(-theta, 0.0);
        for r in 0..n_ch {
            for col in 0..n_ch {
                h[(r, col)] += coeff * v[r] * v[col].conj();
            }
        }
    }

    let fermionic = spec.statistics == Statistics::Fermion;
    let dim = 1usize << n_ch;
    let mut lift = CMatrix::zeros(dim, dim);
    // exponentiate sector by sector; the block structure makes number
    // conservation exact rather than approximate
    let mut patterns: Vec<Vec<u32>> = vec![Vec::new(); n_ch + 1];
    for pat in 0..dim as u32 {
        patterns[pat.count_ones() as usize].push(pat);
    }
    for sector in &patterns {
        let s = sector.len();
        if s == 0 {
            continue;
        }
        let index_of = |pat: u32| sector.binary_search(&pat).unwrap();
        let mut h_sector = CMatrix::zeros(s, s);
        for (col_idx, &pat) in sector.iter().enumerate() {
            for src in 0..n_ch as u32 {
                if pat & (1 << src) == 0 {
                    continue;
                }
                for dst in 0..n_ch as u32 {
                    if dst == src {
                        h_sector[(col_idx, col_idx)] += h[(src as usize, src as usize)];
                        continue;
                    }
                    if pat & (1 << dst) != 0 {
                        continue;
                    }
                    let removed = pat & !(1 << src);
                    let new_pat = removed | (1 << dst);
                    let sign = if fermionic {
                        let below_src = (pat & ((1 << src) - 1)).count_ones();
                        let below_dst = (removed & ((1 << dst) - 1)).count_ones();
                        if (below_src + below_dst) % 2 == 1 {
                            -1.0
                        } else {
                            1.0
                        }
                    } else {
                        1.0
                    };
                    h_sector[(index_of(new_pat), col_idx)] +=
                        c(sign, 0.0) * h[(dst as usize, src as usize)];
                }
            }
        }
        let (thetas, v) = h_sector.hermitian_eigen()?;
        for (r_loc, &rp) in sector.iter().enumerate() {
            for (c_loc, &cp) in sector.iter().enumerate() {
                let mut entry = ZERO;
                for k in 0..s {
                    entry +=
                        C64::from_polar(1.0, -thetas[k]) * v[(r_loc, k)] * v[(c_loc, k)].conj();
                }
                lift[(rp as usize, cp as usize)] = entry;
            }
        }
    }
    // interaction phase: e^{-i phi * (pairs of particles on this site)}
    if spec.phi_onsite != 0.0 {
        for (row_pat, _) in (0..dim).map(|p| (p, ())) {
            let r = (row_pat as u32).count_ones() as f64;
            let phase = C64::from_polar(1.0, -spec.phi_onsite * r * (r - 1.0) / 2.0);
            for col in 0..dim {
                lift[(row_pat, col)] = phase * lift[(row_pat, col)];
            }
        }
    }
    Ok(lift)
}

/// Signed axis permutations generating the hyperoctahedral symmetry group,
/// represented as channel permutations (for tests and covariance checks).
pub fn hyperoctahedral_generators(d: usize) -> Vec<Vec<usize>> {
    let n = 2 * d;
    let mut gens = Vec::new();
    // reflection of axis 0: swap its two channels
    let mut refl: Vec<usize> = (0..n).collect();
    refl.swap(0, 1);
    gens.push(refl);
    // adjacent axis swaps
    for axis in 0..d.saturating_sub(1) {
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(2 * axis, 2 * (axis + 1));
        swap.swap(2 * axis + 1, 2 * (axis + 1) + 1);
        gens.push(swap);
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    pub fn random_params(rng: &mut ChaCha8Rng) -> KineticParams {
        let theta = 0.15 + 1.25 * rng.gen::<f64>();
        let beta = 2.0 * PI * rng.gen::<f64>();
        KineticParams::from_angle(theta, beta)
    }

    #[test]
    fn kinetic_validation() {
        // canonical family: mass cot(theta)
        let th: f64 = 0.7;
        let diag = validate_kinetic(c(0.0, th.sin()), c(th.cos(), 0.0));
        assert!(diag.ok);
        assert!((diag.mass.unwrap() - 1.0 / th.tan()).abs() < 1e-14);

        // a = b = 1/sqrt(2) violates the orthogonality constraint
        let h = 0.5f64.sqrt();
        let diag = validate_kinetic(c(h, 0.0), c(h, 0.0));
        assert!(!diag.ok);
        assert!(diag.orthogonality_residual > 0.9);
        assert!(KineticParams::new(c(h, 0.0), c(h, 0.0)).is_err());

        // a = 0: valid, no propagation, infinite mass
        let diag = validate_kinetic(c(0.0, 0.0), c(1.0, 0.0));
        assert!(diag.ok);
        assert!(diag.mass.is_none());
    }

    #[test]
    fn s_gate_structure() {
        // a=0, b=1, phi=0 gives the identity
        let p = KineticParams::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let g = build_s_gate(&p, 0.0).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col { 1.0 } else { 0.0 };
                assert!((g.matrix()[r][col] - c(want, 0.0)).norm() < 1e-15);
            }
        }

        // theta = pi/4: middle block [[1/sqrt2, i/sqrt2], [i/sqrt2, 1/sqrt2]]
        let p = KineticParams::from_angle(FRAC_PI_4, 0.0);
        assert!((p.mass().unwrap() - 1.0).abs() < 1e-14);
        let g = build_s_gate(&p, 0.0).unwrap();
        let h = 0.5f64.sqrt();
        assert!((g.matrix()[1][1] - c(h, 0.0)).norm() < 1e-15);
        assert!((g.matrix()[1][2] - c(0.0, h)).norm() < 1e-15);
        assert!(g.is_number_conserving());

        // phi = pi flips the sign of |11> only
        let g = build_s_gate(&p, PI).unwrap();
        assert!((g.matrix()[3][3] + c(1.0, 0.0)).norm() < 1e-12);
        assert!((g.matrix()[1][1] - c(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn exchange_gate_involution() {
        for stats in [Statistics::HardBoson, Statistics::Fermion] {
            let e = build_exchange_gate(stats);
            // |10> -> |01>
            assert!((e.matrix()[2][1] - ONE).norm() < 1e-15);
            // E^2 = I for both statistics
            let m = e.matrix();
            for r in 0..4 {
                for col in 0..4 {
                    let mut acc = ZERO;
                    for k in 0..4 {
                        acc += m[r][k] * m[k][col];
                    }
                    let want = if r == col { 1.0 } else { 0.0 };
                    assert!((acc - c(want, 0.0)).norm() < 1e-15);
                }
            }
        }
        let ef = build_exchange_gate(Statistics::Fermion);
        assert!((ef.matrix()[3][3] + ONE).norm() < 1e-15);
    }

    #[test]
    fn potential_phases() {
        let p = build_external_phase(0.0, 0.1);
        assert!((p[1] - ONE).norm() < 1e-15);
        let eps = 0.1;
        let p = build_external_phase(PI / (eps * eps), eps);
        assert!((p[1] + ONE).norm() < 1e-12);

        let g = build_pair_phase(0.0, eps);
        assert!((g.matrix()[3][3] - ONE).norm() < 1e-15);
        let g = build_pair_phase(2.5, eps);
        assert!((g.matrix()[3][3] - C64::from_polar(1.0, -eps * eps * 2.5)).norm() < 1e-15);
        assert!(g.is_number_conserving());
    }

    #[test]
    fn projector_identities_are_exact() {
        for d in [1usize, 2, 3, 4] {
            let n = 2 * d;
            let (p_mu, p_nu, p_lambda) = collision_projectors(d);
            let sum = p_mu.add(&p_nu).add(&p_lambda);
            assert!(sum.sub(&CMatrix::identity(n)).max_abs() < 1e-14);
            for p in [&p_mu, &p_nu, &p_lambda] {
                assert!(p.mul(p).sub(p).max_abs() < 1e-14);
                assert!(p.sub(&p.adjoint()).max_abs() < 1e-14);
            }
            assert!(p_mu.mul(&p_nu).max_abs() < 1e-14);
            assert!(p_mu.mul(&p_lambda).max_abs() < 1e-14);
            assert!(p_nu.mul(&p_lambda).max_abs() < 1e-14);
        }
    }

    #[test]
    fn collision_matrix_d1_matches_kinetic_block() {
        // with mu = a+b and nu = a-b the 1D collision matrix is [[a,b],[b,a]]
        let p = KineticParams::from_angle(0.6, 0.0);
        let (a, b) = (p.a(), p.b());
        let spec = CollisionSpec::new(a + b, a - b, ONE, 0.0, Statistics::HardBoson).unwrap();
        let cmat = build_collision_matrix(&spec, 1);
        assert!((cmat[(0, 0)] - a).norm() < 1e-14);
        assert!((cmat[(0, 1)] - b).norm() < 1e-14);
        assert!((cmat[(1, 0)] - b).norm() < 1e-14);
        assert!((cmat[(1, 1)] - a).norm() < 1e-14);

        // identity collision
        let spec = CollisionSpec::new(ONE, ONE, ONE, 0.0, Statistics::HardBoson).unwrap();
        let cmat = build_collision_matrix(&spec, 3);
        assert!(cmat.sub(&CMatrix::identity(6)).max_abs() < 1e-14);
    }

    #[test]
    fn collision_matrix_eigenstructure_d2() {
        let spec = CollisionSpec::new(
            ONE,
            c(0.0, 1.0),
            C64::from_polar(1.0, 0.8),
            0.0,
            Statistics::HardBoson,
        )
        .unwrap();
        let cmat = build_collision_matrix(&spec, 2);
        assert!(cmat.unitarity_defect() < 1e-13);
        let (vals, _) = cmat.unitary_eigen().unwrap();
        let count = |target: C64| vals.iter().filter(|v| (*v - target).norm() < 1e-10).count();
        assert_eq!(count(spec.mu), 1);
        assert_eq!(count(spec.nu), 2);
        assert_eq!(count(spec.lambda), 1);
    }

    #[test]
    fn collision_commutes_with_lattice_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in [1usize, 2, 3] {
            let spec = CollisionSpec::new(
                C64::from_polar(1.0, rng.gen::<f64>()),
                C64::from_polar(1.0, rng.gen::<f64>()),
                C64::from_polar(1.0, rng.gen::<f64>()),
                0.0,
                Statistics::HardBoson,
            )
            .unwrap();
            let cmat = build_collision_matrix(&spec, d);
            for gen in hyperoctahedral_generators(d) {
                let n = 2 * d;
                let mut pi = CMatrix::zeros(n, n);
                for (from, &to) in gen.iter().enumerate() {
                    pi[(to, from)] = ONE;
                }
                let lhs = cmat.mul(&pi);
                let rhs = pi.mul(&cmat);
                assert!(lhs.sub(&rhs).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lift_identity_is_identity() {
        let spec = CollisionSpec::new(ONE, ONE, ONE, 0.0, Statistics::HardBoson).unwrap();
        let cmat = build_collision_matrix(&spec, 2);
        let lift = lift_collision(&cmat, &spec).unwrap();
        assert!(lift.sub(&CMatrix::identity(16)).max_abs() < 1e-12);
    }

    #[test]
    fn lift_single_particle_block_equals_collision() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in [1usize, 2, 3] {
            for stats in [Statistics::HardBoson, Statistics::Fermion] {
                let spec = CollisionSpec::new(
                    C64::from_polar(1.0, 2.0 * rng.gen::<f64>() - 1.0),
                    C64::from_polar(1.0, 2.0 * rng.gen::<f64>() - 1.0),
                    C64::from_polar(1.0, 2.0 * rng.gen::<f64>() - 1.0),
                    rng.gen::<f64>(),
                    stats,
                )
                .unwrap();
                let cmat = build_collision_matrix(&spec, d);
                let lift = lift_collision(&cmat, &spec).unwrap();
                assert!(lift.unitarity_defect() < 1e-11);
                // single-particle block sits on the power-of-two patterns
                for src in 0..2 * d {
                    for dst in 0..2 * d {
                        let got = lift[(1 << dst, 1 << src)];
                        assert!(
                            (got - cmat[(dst, src)]).norm() < 1e-10,
                            "d={d} block deviates"
                        );
                    }
                }
                // number conservation: no coupling between different popcounts
                let dim = 1usize << (2 * d);
                for r in 0..dim {
                    for col in 0..dim {
                        if r.count_ones() != col.count_ones() {
                            assert!(lift[(r, col)].norm() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn fermionic_lift_has_determinant_matrix_elements() {
        // independent oracle: the fermionic second quantization of a
        // single-particle unitary acts on the r-particle sector by the
        // determinants of r x r submatrices (Slater-determinant evolution);
        // this pins the within-site sign convention of the lift
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for d in [1usize, 2, 3, 4] {
            let spec = CollisionSpec::new(
                C64::from_polar(1.0, 2.0 * rng.gen::<f64>() - 1.0),
                C64::from_polar(1.0, 2.0 * rng.gen::<f64>() - 1.0),
                C64::from_polar(1.0, 2.0 * rng.gen::<f64>() - 1.0),
                0.0,
                Statistics::Fermion,
            )
            .unwrap();
            let n_ch = 2 * d;
            let cmat = build_collision_matrix(&spec, d);
            let lift = lift_collision(&cmat, &spec).unwrap();
            let dim = 1usize << n_ch;
            let bits = |pat: usize| -> Vec<usize> {
                (0..n_ch).filter(|&c| pat & (1 << c) != 0).collect()
            };
            for col_pat in 0..dim {
                let cols = bits(col_pat);
                for row_pat in 0..dim {
                    if row_pat.count_ones() != col_pat.count_ones() {
                        continue;
                    }
                    let rows = bits(row_pat);
                    let r = rows.len();
                    let mut sub = CMatrix::zeros(r.max(1), r.max(1));
                    for (i, &ri) in rows.iter().enumerate() {
                        for (j, &cj) in cols.iter().enumerate() {
                            sub[(i, j)] = cmat[(ri, cj)];
                        }
                    }
                    let det = determinant(&sub, r);
                    assert!(
                        (lift[(row_pat, col_pat)] - det).norm() < 1e-10,
                        "d={d} pattern {row_pat:b} <- {col_pat:b}"
                    );
                }
            }
        }
    }

    fn determinant(m: &CMatrix, n: usize) -> C64 {
        if n == 0 {
            return ONE;
        }
        // Laplace expansion along the first row (n <= 8 here)
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = ZERO;
        let mut sign = 1.0;
        for col in 0..n {
            let mut minor = CMatrix::zeros(n - 1, n - 1);
            for r in 1..n {
                let mut cc = 0;
                for c in 0..n {
                    if c == col {
                        continue;
                    }
                    minor[(r - 1, cc)] = m[(r, c)];
                    cc += 1;
                }
            }
            acc += c(sign, 0.0) * m[(0, col)] * determinant(&minor, n - 1);
            sign = -sign;
        }
        acc
    }

    #[test]
    fn lift_two_particle_phase_d1() {
        // d=1 hard bosons: the {01, 10} block equals C; the |11> component
        // is the pure phase mu*nu*e^{-i phi}
        let p = KineticParams::from_angle(0.8, 0.0);
        let (mu, nu) = (p.a() + p.b(), p.a() - p.b());
        let phi = 0.37;
        let spec = CollisionSpec::new(mu, nu, ONE, phi, Statistics::HardBoson).unwrap();
        let cmat = build_collision_matrix(&spec, 1);
        let lift = lift_collision(&cmat, &spec).unwrap();
        assert!((lift[(1, 1)] - cmat[(0, 0)]).norm() < 1e-11);
        assert!((lift[(2, 1)] - cmat[(1, 0)]).norm() < 1e-11);
        let expect = mu * nu * C64::from_polar(1.0, -phi);
        assert!((lift[(3, 3)] - expect).norm() < 1e-11);
        // the fermionic lift has the same doubly-occupied phase here: the
        // diagonal element carries no reordering
        let spec_f = CollisionSpec::new(mu, nu, ONE, phi, Statistics::Fermion).unwrap();
        let lift_f = lift_collision(&cmat, &spec_f).unwrap();
        assert!((lift_f[(3, 3)] - expect).norm() < 1e-11);
    }

    #[test]
    fn lift_rejects_branch_cut() {
        let spec = CollisionSpec::new(-ONE, ONE, ONE, 0.0, Statistics::HardBoson).unwrap();
        let cmat = build_collision_matrix(&spec, 1);
        assert!(matches!(
            lift_collision(&cmat, &spec),
            Err(SimError::LogBranch { .. })
        ));
    }

    #[test]
    fn mass_relation_reduces_to_kinetic_mass_in_1d() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let p = random_params(&mut rng);
            let inv = collision_inverse_mass(p.a() + p.b(), p.a() - p.b(), 1).unwrap();
            let m_expected = p.mass().unwrap();
            let m = 1.0 / inv.re;
            assert!(inv.im.abs() < 1e-12);
            assert!((m - m_expected).abs() < 1e-10 * m_expected.abs().max(1.0));
        }
    }

    #[test]
    fn mass_relation_special_points() {
        // mu = -nu: 1/m = 0, infinite mass
        let inv = collision_inverse_mass(c(0.0, 1.0), c(0.0, -1.0), 2).unwrap();
        assert!(inv.norm() < 1e-15);
        // mu = nu: degenerate
        assert!(collision_inverse_mass(ONE, ONE, 2).is_err());
        // d=3, mu=1, nu=i: m = 3
        let inv = collision_inverse_mass(ONE, c(0.0, 1.0), 3).unwrap();
        assert!((1.0 / inv.re - 3.0).abs() < 1e-12);
        assert!(inv.im.abs() < 1e-14);
    }
}
