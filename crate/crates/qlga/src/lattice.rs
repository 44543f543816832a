//! Lattice geometry, q-bit indexing, and the pairing schedules that realize
//! propagation and the brick-wall kinetic rule.
//!
//! Q-bit indices are linearized channel-major within a site and row-major
//! over sites (last axis fastest). The ordering is part of the contract: the
//! fermionic canonical ordering used elsewhere is exactly this index order.

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Which circuit family the lattice hosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeMode {
    /// One q-bit per site on a 1D ring; the brick-wall kinetic rule.
    Brick1d,
    /// 2d q-bits per site (one per signed axis direction); advect + collide.
    Qlga,
}

/// Validated lattice geometry. Boundaries are always periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    d: usize,
    l: usize,
    epsilon: f64,
    mode: LatticeMode,
}

/// Build and validate a lattice.
///
/// `Brick1d` requires `d == 1` and even `l` (the two brick pairings must
/// tile the ring); `epsilon` must be positive.
pub fn build_lattice(d: usize, l: usize, epsilon: f64, mode: LatticeMode) -> Result<LatticeSpec> {
    if d < 1 {
        return Err(SimError::InvalidLattice("dimension must be >= 1".into()));
    }
    if l < 2 {
        return Err(SimError::InvalidLattice(
            "need at least 2 sites per axis".into(),
        ));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(SimError::InvalidLattice(format!(
            "lattice spacing must be positive and finite, got {epsilon}"
        )));
    }
    if mode == LatticeMode::Brick1d {
        if d != 1 {
            return Err(SimError::InvalidLattice(
                "brick-wall mode is one-dimensional".into(),
            ));
        }
        if l % 2 != 0 {
            return Err(SimError::InvalidLattice(format!(
                "brick-wall mode needs an even number of sites, got {l}"
            )));
        }
    }
    Ok(LatticeSpec {
        d,
        l,
        epsilon,
        mode,
    })
}

impl LatticeSpec {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> usize {
        self.l
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> LatticeMode {
        self.mode
    }

    pub fn channels_per_site(&self) -> usize {
        match self.mode {
            LatticeMode::Brick1d => 1,
            LatticeMode::Qlga => 2 * self.d,
        }
    }

    pub fn num_sites(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    /// Total q-bit count N = channels_per_site * l^d.
    pub fn num_qbits(&self) -> usize {
        self.channels_per_site() * self.num_sites()
    }

    /// Site index from coordinates, row-major with the last axis fastest.
    pub fn site_index(&self, coords: &[usize]) -> usize {
        assert_eq!(coords.len(), self.d);
        let mut idx = 0;
        for &x in coords {
            debug_assert!(x < self.l);
            idx = idx * self.l + x;
        }
        idx
    }

    pub fn site_coords(&self, mut site: usize) -> Vec<usize> {
        let mut coords = vec![0; self.d];
        for axis in (0..self.d).rev() {
            coords[axis] = site % self.l;
            site /= self.l;
        }
        coords
    }

    pub fn qbit_index(&self, site: usize, channel: usize) -> usize {
        debug_assert!(channel < self.channels_per_site());
        site * self.channels_per_site() + channel
    }

    pub fn qbit_site(&self, qbit: usize) -> usize {
        qbit / self.channels_per_site()
    }

    pub fn qbit_channel(&self, qbit: usize) -> usize {
        qbit % self.channels_per_site()
    }

    /// Velocity carried by a channel: channel 2a moves along +axis a,
    /// channel 2a+1 along -axis a. Brick channels carry no velocity label.
    pub fn channel_velocity(&self, channel: usize) -> (usize, i32) {
        let axis = channel / 2;
        let sign = if channel % 2 == 0 { 1 } else { -1 };
        (axis, sign)
    }

    /// The channel with opposite velocity.
    pub fn parity_partner(&self, channel: usize) -> usize {
        channel ^ 1
    }

    /// Neighboring site one step along `axis` (periodic wrap).
    pub fn neighbor(&self, site: usize, axis: usize, step: i32) -> usize {
        let mut coords = self.site_coords(site);
        let l = self.l as i32;
        coords[axis] = ((coords[axis] as i32 + step).rem_euclid(l)) as usize;
        self.site_index(&coords)
    }

    /// Minimum-image L1 distance between two sites.
    pub fn l1_distance(&self, a: usize, b: usize) -> usize {
        let ca = self.site_coords(a);
        let cb = self.site_coords(b);
        ca.iter()
            .zip(&cb)
            .map(|(&x, &y)| {
                let diff = x.abs_diff(y);
                diff.min(self.l - diff)
            })
            .sum()
    }
}

/// Role of a schedule within a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleTag {
    BrickEven,
    BrickOdd,
    AdvectionAxis(usize),
}

/// An ordered list of disjoint q-bit pairs. Disjointness means every gate in
/// the schedule commutes with every other, so a schedule is one parallel
/// layer of the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSchedule {
    pub tag: ScheduleTag,
    pub pairs: Vec<(usize, usize)>,
}

impl PairSchedule {
    /// True when no q-bit index appears twice.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.pairs
            .iter()
            .all(|&(a, b)| a != b && seen.insert(a) && seen.insert(b))
    }
}

/// The two brick-wall pairings: even pairs (2j, 2j+1) and odd pairs
/// (2j+1, 2j+2 mod l), the latter including the wraparound pair (l-1, 0).
pub fn brick_schedules(lattice: &LatticeSpec) -> Result<(PairSchedule, PairSchedule)> {
    if lattice.mode() != LatticeMode::Brick1d {
        return Err(SimError::InvalidLattice(
            "brick schedules need a brick-wall lattice".into(),
        ));
    }
    let l = lattice.side();
    let even = PairSchedule {
        tag: ScheduleTag::BrickEven,
        pairs: (0..l / 2).map(|j| (2 * j, 2 * j + 1)).collect(),
    };
    let odd = PairSchedule {
        tag: ScheduleTag::BrickOdd,
        pairs: (0..l / 2).map(|j| (2 * j + 1, (2 * j + 2) % l)).collect(),
    };
    Ok((even, odd))
}

/// Swap-chain decomposition of the velocity-shift permutation.
///
/// Per axis the +channel rings shift forward and the -channel rings shift
/// backward; a cyclic shift of a ring of l sites is a chain of l-1 adjacent
/// transpositions. Chain step k holds, for every ring, the +channel swap at
/// sites (l-2-k, l-1-k) and the -channel swap at sites (k, k+1); pairs within
/// one chain step are disjoint and may run in parallel. Axes are emitted in
/// ascending order, which fixes the decomposition for determinism.
pub fn advection_schedule(lattice: &LatticeSpec) -> Result<Vec<PairSchedule>> {
    if lattice.mode() != LatticeMode::Qlga {
        return Err(SimError::InvalidLattice(
            "advection schedules need a QLGA lattice".into(),
        ));
    }
    let l = lattice.side();
    let d = lattice.dim();
    let mut schedules = Vec::with_capacity(d * (l - 1));
    for axis in 0..d {
        let ch_plus = 2 * axis;
        let ch_minus = 2 * axis + 1;
        for k in 0..l - 1 {
            let mut pairs = Vec::new();
            for site in 0..lattice.num_sites() {
                let coords = lattice.site_coords(site);
                if coords[axis] == l - 2 - k {
                    let next = lattice.neighbor(site, axis, 1);
                    pairs.push((
                        lattice.qbit_index(site, ch_plus),
                        lattice.qbit_index(next, ch_plus),
                    ));
                }
                if coords[axis] == k {
                    let next = lattice.neighbor(site, axis, 1);
                    pairs.push((
                        lattice.qbit_index(site, ch_minus),
                        lattice.qbit_index(next, ch_minus),
                    ));
                }
            }
            schedules.push(PairSchedule {
                tag: ScheduleTag::AdvectionAxis(axis),
                pairs,
            });
        }
    }
    Ok(schedules)
}

/// The exact permutation the advection schedules compose to:
/// perm[q(x, c)] = q(x + v_c, c) with periodic wrap.
pub fn advection_permutation(lattice: &LatticeSpec) -> Result<Vec<usize>> {
    if lattice.mode() != LatticeMode::Qlga {
        return Err(SimError::InvalidLattice(
            "advection permutation needs a QLGA lattice".into(),
        ));
    }
    let mut perm = vec![0usize; lattice.num_qbits()];
    for site in 0..lattice.num_sites() {
        for channel in 0..lattice.channels_per_site() {
            let (axis, sign) = lattice.channel_velocity(channel);
            let dest = lattice.neighbor(site, axis, sign);
            perm[lattice.qbit_index(site, channel)] = lattice.qbit_index(dest, channel);
        }
    }
    Ok(perm)
}

/// Compose a list of transposition schedules into one permutation
/// (first schedule applied first).
pub fn compose_schedules(n_qbits: usize, schedules: &[PairSchedule]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n_qbits).collect();
    for schedule in schedules {
        for &(a, b) in &schedule.pairs {
            perm.swap(a, b);
        }
    }
    // `perm` now holds, at slot q, the original position whose content ends
    // up at q; invert to the content-destination convention perm[old] = new.
    let mut out = vec![0usize; n_qbits];
    for (new_pos, &old_pos) in perm.iter().enumerate() {
        out[old_pos] = new_pos;
    }
    out
}
