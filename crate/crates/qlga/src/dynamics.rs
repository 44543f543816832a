//! Time-stepping engines: the 1D brick-wall rule and the d-dimensional
//! lattice-gas step (advect, collide), each with optional external and
//! pairwise potential passes.
//!
//! Pass order within a step is fixed: kinetic first, then the external
//! phase, then the pair phase. The diagonal passes commute with each other,
//! so only the kinetic/diagonal split is a real (Trotter-style) choice.
//! Physical time advances by epsilon^2 per elementary step (per M-pass in
//! the brick model); the dispersion measurements in `analysis` validate that
//! normalization rather than assume it.

use crate::error::{Result, SimError};
use crate::gates::{
    build_collision_matrix, build_s_gate, lift_collision, CollisionSpec, KineticParams,
};
use crate::lattice::{advection_permutation, brick_schedules, LatticeMode, LatticeSpec};
use crate::linalg::CMatrix;
use crate::state::{DenseState, SectorState, Statistics, TwoQbitGate};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Per-site external potential values U(x).
///
/// Finite values only; smoothness is deliberately not enforced (non-smooth
/// potentials are allowed but carry no accuracy claim).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    values: Vec<f64>,
}

impl PotentialField {
    pub fn from_values(lattice: &LatticeSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.num_sites() {
            return Err(SimError::Invalid(format!(
                "potential needs {} site values, got {}",
                lattice.num_sites(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Invalid("potential values must be finite".into()));
        }
        Ok(PotentialField { values })
    }

    pub fn constant(lattice: &LatticeSpec, u: f64) -> Result<Self> {
        Self::from_values(lattice, vec![u; lattice.num_sites()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, site: usize) -> f64 {
        self.values[site]
    }
}

/// Symmetric pairwise potential U(x, y) over site pairs. The diagonal
/// U(x, x) is never applied: on-site interactions belong to the collision
/// phase (QLGA) or the s-gate phi (brick model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPotential {
    num_sites: usize,
    table: Vec<f64>,
}

impl PairPotential {
    pub fn from_table(num_sites: usize, table: Vec<f64>) -> Result<Self> {
        if table.len() != num_sites * num_sites {
            return Err(SimError::Invalid(format!(
                "pair potential table needs {} entries, got {}",
                num_sites * num_sites,
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Invalid("pair potential must be finite".into()));
        }
        for x in 0..num_sites {
            for y in 0..x {
                if table[x * num_sites + y] != table[y * num_sites + x] {
                    return Err(SimError::Invalid(format!(
                        "pair potential not symmetric at ({x}, {y})"
                    )));
                }
            }
        }
        Ok(PairPotential { num_sites, table })
    }

    /// U(x, y) as a function of the minimum-image L1 distance between the
    /// sites: `profile[dist - 1]` for dist >= 1, zero beyond the profile.
    pub fn from_distance_profile(lattice: &LatticeSpec, profile: &[f64]) -> Result<Self> {
        let n = lattice.num_sites();
        let mut table = vec![0.0; n * n];
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let dist = lattice.l1_distance(x, y);
                if dist >= 1 && dist <= profile.len() {
                    table[x * n + y] = profile[dist - 1];
                }
            }
        }
        Self::from_table(n, table)
    }

    pub fn value(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.num_sites + y]
    }
}

/// When the pair-potential pass runs in the brick model. The time-step
/// convention allows either one pass per M-pass or one per M1*M2 double
/// step; per-pass is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairCadence {
    PerPass,
    PerDoubleStep,
}

/// Optional potential passes attached to a run.
#[derive(Debug, Clone, Default)]
pub struct Potentials {
    pub external: Option<PotentialField>,
    pub pair: Option<PairPotential>,
    pub pair_cadence: Option<PairCadence>,
}

impl Potentials {
    pub fn none() -> Self {
        Potentials::default()
    }

    fn cadence(&self) -> PairCadence {
        self.pair_cadence.unwrap_or(PairCadence::PerPass)
    }
}

/// A state in either representation, owned by one dynamics run.
#[derive(Debug, Clone)]
pub enum SimState {
    Dense(DenseState),
    Sector(SectorState),
}

impl SimState {
    pub fn num_qbits(&self) -> usize {
        match self {
            SimState::Dense(s) => s.num_qbits(),
            SimState::Sector(s) => s.num_qbits(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            SimState::Dense(s) => s.norm(),
            SimState::Sector(s) => s.norm(),
        }
    }

    pub fn density(&self) -> Vec<f64> {
        match self {
            SimState::Dense(s) => s.density(),
            SimState::Sector(s) => s.density(),
        }
    }

    pub fn particle_number(&self) -> f64 {
        match self {
            SimState::Dense(s) => s.particle_number_expectation(),
            SimState::Sector(s) => s.num_particles() as f64,
        }
    }

    pub fn inner(&self, other: &SimState) -> Result<C64> {
        match (self, other) {
            (SimState::Dense(a), SimState::Dense(b)) => a.inner(b),
            (SimState::Sector(a), SimState::Sector(b)) => a.inner(b),
            _ => Err(SimError::Representation(
                "inner product across representations".into(),
            )),
        }
    }

    pub fn as_sector(&self) -> Option<&SectorState> {
        match self {
            SimState::Sector(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_dense(&self) -> Option<&DenseState> {
        match self {
            SimState::Dense(s) => Some(s),
            _ => None,
        }
    }

    pub fn apply_gate(
        &mut self,
        gate: &TwoQbitGate,
        i: usize,
        j: usize,
        stats: Statistics,
    ) -> Result<()> {
        match self {
            SimState::Dense(s) => s.apply_gate_stat(gate, i, j, stats),
            SimState::Sector(s) => s.apply_gate(gate, i, j),
        }
    }

    pub fn apply_schedule(
        &mut self,
        pairs: &[(usize, usize)],
        gate: &TwoQbitGate,
        stats: Statistics,
    ) -> Result<()> {
        match self {
            SimState::Dense(s) => {
                for &(a, b) in pairs {
                    s.apply_gate_stat(gate, a, b, stats)?;
                }
                Ok(())
            }
            SimState::Sector(s) => s.apply_pair_schedule(pairs, gate),
        }
    }

    pub fn apply_permutation(&mut self, perm: &[usize], stats: Statistics) -> Result<()> {
        match self {
            SimState::Dense(s) => s.apply_qbit_permutation(perm, stats),
            SimState::Sector(s) => s.apply_qbit_permutation(perm),
        }
    }

    pub fn apply_per_site_unitary(&mut self, u: &CMatrix, lattice: &LatticeSpec) -> Result<()> {
        match self {
            SimState::Sector(s) => s.apply_per_site_unitary(u, lattice),
            SimState::Dense(s) => {
                let cps = lattice.channels_per_site();
                for site in 0..lattice.num_sites() {
                    let block: Vec<usize> = (0..cps).map(|c| site * cps + c).collect();
                    s.apply_block_unitary(u, &block)?;
                }
                Ok(())
            }
        }
    }

    /// Diagonal pass over occupied-index sets.
    pub fn apply_occ_phase(&mut self, f: &mut dyn FnMut(&[u32]) -> C64) -> Result<()> {
        match self {
            SimState::Sector(s) => s.apply_occupation_phase(|occ| f(occ)),
            SimState::Dense(s) => {
                let mut occ: Vec<u32> = Vec::new();
                s.apply_occupation_phase(|idx| {
                    occ.clear();
                    let mut rest = idx;
                    while rest != 0 {
                        occ.push(rest.trailing_zeros());
                        rest &= rest - 1;
                    }
                    f(&occ)
                })
            }
        }
    }
}

/// Which brick pass to apply: the even pairing (2j, 2j+1) or the odd
/// pairing (2j+1, 2j+2 mod l) with the wraparound pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrickParity {
    Even,
    Odd,
}

/// The external-potential pass: every q-bit of a site picks up
/// e^{-i eps^2 U(site)} when occupied. Applied as one diagonal sweep, which
/// equals the product of the per-q-bit phase gates.
pub fn external_pass(
    state: &mut SimState,
    lattice: &LatticeSpec,
    field: &PotentialField,
) -> Result<()> {
    let eps2 = lattice.epsilon() * lattice.epsilon();
    let cps = lattice.channels_per_site();
    let values = field.values().to_vec();
    state.apply_occ_phase(&mut |occ: &[u32]| {
        let total: f64 = occ.iter().map(|&q| values[q as usize / cps]).sum();
        C64::from_polar(1.0, -eps2 * total)
    })
}

/// The pairwise-potential pass: for every unordered q-bit pair on distinct
/// sites, the doubly-occupied component picks up e^{-i eps^2 U(x, y)}.
/// Applied as one diagonal sweep equal to the product of all pair gates
/// (the decomposed gate count is tracked separately in [`gate_count`]).
pub fn pair_potential_pass(
    state: &mut SimState,
    lattice: &LatticeSpec,
    pair: &PairPotential,
) -> Result<()> {
    let eps2 = lattice.epsilon() * lattice.epsilon();
    let cps = lattice.channels_per_site();
    let pair = pair.clone();
    state.apply_occ_phase(&mut |occ: &[u32]| {
        let mut total = 0.0;
        for (i, &p) in occ.iter().enumerate() {
            let sp = p as usize / cps;
            for &q in &occ[i + 1..] {
                let sq = q as usize / cps;
                if sp != sq {
                    total += pair.value(sp, sq);
                }
            }
        }
        C64::from_polar(1.0, -eps2 * total)
    })
}

/// One brick M-pass: the s-gate over the selected pairing, then the
/// external phase, then the pair phase when its cadence says so.
pub fn step_brick(
    state: &mut SimState,
    lattice: &LatticeSpec,
    params: &KineticParams,
    phi: f64,
    potentials: &Potentials,
    parity: BrickParity,
    stats: Statistics,
) -> Result<()> {
    if lattice.mode() != LatticeMode::Brick1d {
        return Err(SimError::InvalidLattice(
            "brick step needs a brick lattice".into(),
        ));
    }
    let gate = build_s_gate(params, phi)?;
    let (even, odd) = brick_schedules(lattice)?;
    let schedule = match parity {
        BrickParity::Even => &even,
        BrickParity::Odd => &odd,
    };
    state.apply_schedule(&schedule.pairs, &gate, stats)?;
    if let Some(field) = &potentials.external {
        external_pass(state, lattice, field)?;
    }
    if let Some(pair) = &potentials.pair {
        let run_pair = match potentials.cadence() {
            PairCadence::PerPass => true,
            // the double step is M2 then M1, so the pass closes on M1
            PairCadence::PerDoubleStep => parity == BrickParity::Even,
        };
        if run_pair {
            pair_potential_pass(state, lattice, pair)?;
        }
    }
    Ok(())
}

/// Precomputed QLGA step: the advection permutation and the lifted
/// per-site collision unitary.
pub struct QlgaEngine {
    lattice: LatticeSpec,
    statistics: Statistics,
    lift: CMatrix,
    collision: CMatrix,
    perm: Vec<usize>,
}

impl QlgaEngine {
    pub fn new(lattice: &LatticeSpec, spec: &CollisionSpec) -> Result<Self> {
        if lattice.mode() != LatticeMode::Qlga {
            return Err(SimError::InvalidLattice(
                "QLGA step needs a QLGA lattice".into(),
            ));
        }
        let collision = build_collision_matrix(spec, lattice.dim());
        let lift = lift_collision(&collision, spec)?;
        let perm = advection_permutation(lattice)?;
        Ok(QlgaEngine {
            lattice: lattice.clone(),
            statistics: spec.statistics,
            lift,
            collision,
            perm,
        })
    }

    pub fn collision_matrix(&self) -> &CMatrix {
        &self.collision
    }

    pub fn lift(&self) -> &CMatrix {
        &self.lift
    }

    /// One full step: advect, collide, then potential passes.
    ///
    /// Advection is applied as the composed permutation; it equals the
    /// exchange-gate chain over `advection_schedule` for both statistics
    /// (the fermionic sort-parity sign is the composition of the exchange
    /// signs), which the dynamics tests verify directly.
    pub fn step(&self, state: &mut SimState, potentials: &Potentials) -> Result<()> {
        state.apply_permutation(&self.perm, self.statistics)?;
        state.apply_per_site_unitary(&self.lift, &self.lattice)?;
        if let Some(field) = &potentials.external {
            external_pass(state, &self.lattice, field)?;
        }
        if let Some(pair) = &potentials.pair {
            pair_potential_pass(state, &self.lattice, pair)?;
        }
        Ok(())
    }
}

/// Which kinetic rule a run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineKind {
    Brick { params: KineticParams, phi: f64 },
    Qlga { collision: CollisionSpec },
}

/// State representation for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Sector,
    Dense,
}

/// Initial condition.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// Basis state with the listed q-bits occupied.
    Occupied(Vec<u32>),
    /// Single-particle Gaussian packet (brick lattices): envelope
    /// exp(-dx^2/(4 sigma^2)) with dx the minimum-image distance from x0,
    /// carrier e^{i k0 x}, all in physical units.
    Gaussian { x0: f64, sigma: f64, k0: f64 },
}

/// A complete dynamics run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    pub engine: EngineKind,
    pub statistics: Statistics,
    pub representation: Representation,
    pub potentials: Potentials,
    pub t_steps: usize,
    pub initial: InitialState,
    pub record_every: usize,
    pub seed: u64,
    /// Abort threshold on |norm - 1| during the run.
    pub norm_tol: f64,
}

/// One recorded observable row.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub norm: f64,
    pub particle_number: f64,
    pub centroid: Option<f64>,
    pub spread: Option<f64>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub state: SimState,
    pub trace: Vec<TraceRow>,
    pub steps_done: usize,
}

/// Build the initial state for a run.
pub fn initial_state(config: &RunConfig) -> Result<SimState> {
    let n = config.lattice.num_qbits();
    let sector = match &config.initial {
        InitialState::Occupied(occ) => SectorState::new_basis(n, occ, config.statistics)?,
        InitialState::Gaussian { x0, sigma, k0 } => {
            if config.lattice.mode() != LatticeMode::Brick1d {
                return Err(SimError::Invalid(
                    "gaussian initial states are defined for brick lattices".into(),
                ));
            }
            gaussian_packet(&config.lattice, *x0, *sigma, *k0, config.statistics)?
        }
    };
    match config.representation {
        Representation::Sector => Ok(SimState::Sector(sector)),
        Representation::Dense => Ok(SimState::Dense(sector.to_dense(crate::DENSE_QBIT_LIMIT)?)),
    }
}

/// Normalized single-particle Gaussian packet on a 1D ring.
pub fn gaussian_packet(
    lattice: &LatticeSpec,
    x0: f64,
    sigma: f64,
    k0: f64,
    stats: Statistics,
) -> Result<SectorState> {
    if !(sigma > 0.0) {
        return Err(SimError::Invalid("gaussian width must be positive".into()));
    }
    let l = lattice.side();
    let eps = lattice.epsilon();
    let length = l as f64 * eps;
    let mut comps: Vec<(crate::state::OccKey, C64)> = Vec::with_capacity(l);
    for site in 0..l {
        let x = site as f64 * eps;
        let mut dx = x - x0;
        dx -= (dx / length).round() * length;
        let env = (-dx * dx / (4.0 * sigma * sigma)).exp();
        let amp = C64::from_polar(env, k0 * x);
        comps.push((smallvec::smallvec![site as u32], amp));
    }
    let mut state = SectorState::from_components(lattice.num_qbits(), 1, stats, comps)?;
    state.normalize();
    Ok(state)
}

/// Circular centroid and spread of a 1D site-density profile, in physical
/// units. The spread uses minimum-image distances from the centroid.
pub fn profile_centroid_spread(lattice: &LatticeSpec, density: &[f64]) -> (f64, f64) {
    let l = lattice.side();
    let cps = lattice.channels_per_site();
    let eps = lattice.epsilon();
    let length = l as f64 * eps;
    let mut site_density = vec![0.0; l];
    for (q, &rho) in density.iter().enumerate() {
        site_density[q / cps] += rho;
    }
    let total: f64 = site_density.iter().sum();
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let mut z = C64::new(0.0, 0.0);
    for (site, &rho) in site_density.iter().enumerate() {
        z += C64::from_polar(rho, 2.0 * std::f64::consts::PI * site as f64 / l as f64);
    }
    let mut centroid = z.arg() / (2.0 * std::f64::consts::PI) * length;
    if centroid < 0.0 {
        centroid += length;
    }
    let mut var = 0.0;
    for (site, &rho) in site_density.iter().enumerate() {
        let mut dx = site as f64 * eps - centroid;
        dx -= (dx / length).round() * length;
        var += rho * dx * dx;
    }
    (centroid, (var / total).sqrt())
}

fn record_row(config: &RunConfig, state: &SimState, step: usize) -> TraceRow {
    let (centroid, spread) = if config.lattice.dim() == 1 {
        let (c, s) = profile_centroid_spread(&config.lattice, &state.density());
        (Some(c), Some(s))
    } else {
        (None, None)
    };
    TraceRow {
        step,
        time: step as f64 * config.lattice.epsilon() * config.lattice.epsilon(),
        norm: state.norm(),
        particle_number: state.particle_number(),
        centroid,
        spread,
    }
}

/// Run a configured experiment to completion, recording observables.
///
/// Brick runs alternate M2 (odd, with the wraparound pair) and M1 (even)
/// passes, M2 first; each pass is one elementary step. QLGA runs apply one
/// advect+collide step per step count. A norm drift beyond `norm_tol`
/// aborts with an error.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mut state = initial_state(config)?;
    let record_every = config.record_every.max(1);
    let mut trace = vec![record_row(config, &state, 0)];
    let qlga = match &config.engine {
        EngineKind::Qlga { collision } => Some(QlgaEngine::new(&config.lattice, collision)?),
        EngineKind::Brick { .. } => None,
    };
    for t in 0..config.t_steps {
        match &config.engine {
            EngineKind::Brick { params, phi } => {
                let parity = if t % 2 == 0 {
                    BrickParity::Odd
                } else {
                    BrickParity::Even
                };
                step_brick(
                    &mut state,
                    &config.lattice,
                    params,
                    *phi,
                    &config.potentials,
                    parity,
                    config.statistics,
                )?;
            }
            EngineKind::Qlga { .. } => {
                qlga.as_ref()
                    .unwrap()
                    .step(&mut state, &config.potentials)?;
            }
        }
        let step = t + 1;
        if step % record_every == 0 || step == config.t_steps {
            let row = record_row(config, &state, step);
            let drift = (row.norm - 1.0).abs();
            if drift > config.norm_tol {
                return Err(SimError::NormDrift {
                    drift,
                    tol: config.norm_tol,
                    step,
                });
            }
            trace.push(row);
        }
    }
    Ok(RunOutput {
        steps_done: config.t_steps,
        state,
        trace,
    })
}

/// Exact per-step gate counts under this artifact's fixed decomposition,
/// together with the order-of-magnitude formulas they track.
#[derive(Debug, Clone, Serialize)]
pub struct GateCount {
    pub mode: String,
    pub d: usize,
    pub l: usize,
    pub n_particles: usize,
    pub qbits: u128,
    /// Exchange gates per propagation step: 2 d l^{d-1} (l-1) for the QLGA
    /// (a ring shift is l-1 transpositions); s-gates per pass (l/2) for the
    /// brick model.
    pub propagation_exact: u128,
    /// Order of the propagation cost: d * l^d.
    pub propagation_order: f64,
    /// Two-q-bit gates to synthesize all site collisions: d(2d-1) Givens
    /// rotations per site for the 2d-channel single-particle block.
    pub collision_two_qbit_exact: u128,
    /// Order of the collision cost: d^2 * l^d.
    pub collision_order: f64,
    /// Cross-site q-bit pair gates for one interaction pass.
    pub interaction_pair_gates_exact: u128,
    /// Order of the interaction cost: d^2 * l^{2d}.
    pub interaction_order: f64,
    /// Headline per-step operation estimate (2d)^2 l^{2d} = N^2; the
    /// interaction pass dominates.
    pub per_step_ops_estimate: u128,
    pub external_single_qbit: u128,
    /// Classical state-vector size l^{d n} for the same system: the cost a
    /// classical simulation cannot avoid.
    pub classical_state_components: f64,
}

/// Complexity audit for a lattice and particle count.
pub fn gate_count(lattice: &LatticeSpec, n_particles: usize) -> GateCount {
    let d = lattice.dim() as u32;
    let l = lattice.side() as u128;
    let ld = l.pow(d);
    let n = lattice.num_qbits() as u128;
    let (mode, propagation_exact, collision_two_qbit_exact) = match lattice.mode() {
        LatticeMode::Brick1d => ("brick1d".to_string(), l / 2, 0),
        LatticeMode::Qlga => (
            "qlga".to_string(),
            2 * d as u128 * l.pow(d - 1) * (l - 1),
            d as u128 * (2 * d as u128 - 1) * ld,
        ),
    };
    // all unordered q-bit pairs on distinct sites
    let cps = lattice.channels_per_site() as u128;
    let interaction_pair_gates_exact = n * (n - 1) / 2 - ld * cps * (cps - 1) / 2;
    let df = d as f64;
    let lf = l as f64;
    GateCount {
        mode,
        d: lattice.dim(),
        l: lattice.side(),
        n_particles,
        qbits: n,
        propagation_exact,
        propagation_order: df * lf.powi(d as i32),
        collision_two_qbit_exact,
        collision_order: df * df * lf.powi(d as i32),
        interaction_pair_gates_exact,
        interaction_order: df * df * lf.powi(2 * d as i32),
        per_step_ops_estimate: (2 * d as u128).pow(2) * l.pow(2 * d),
        external_single_qbit: n,
        classical_state_components: lf.powi((d as i32) * (n_particles as i32)),
    }
}
