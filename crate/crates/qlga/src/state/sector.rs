//! Fixed-particle-number state representation.
//!
//! Amplitudes are keyed by strictly ascending tuples of occupied q-bit
//! indices. Gate application enumerates the stored configurations, so the
//! cost scales with the sector size rather than 2^N. Fermionic amplitudes
//! are stored relative to the ascending canonical order; hopping terms carry
//! the parity of the occupied q-bits strictly between source and target.

use super::{check_unimodular, sort_with_parity, Statistics, TwoQbitGate};
use crate::error::{Result, SimError};
use crate::lattice::LatticeSpec;
use crate::linalg::CMatrix;
use crate::state::DenseState;
use crate::C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;
use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

/// Strictly ascending occupied q-bit indices.
pub type OccKey = SmallVec<[u32; 6]>;

/// Deterministic hasher: outputs (norms, exported snapshots) must not depend
/// on per-process hash randomization.
type AmpMap = HashMap<OccKey, C64, BuildHasherDefault<DefaultHasher>>;

#[derive(Debug, Clone)]
pub struct SectorState {
    n_qbits: usize,
    n_particles: usize,
    statistics: Statistics,
    amps: AmpMap,
}

fn new_map(capacity: usize) -> AmpMap {
    AmpMap::with_capacity_and_hasher(capacity, BuildHasherDefault::default())
}

impl SectorState {
    pub fn new_basis(n_qbits: usize, occupied: &[u32], statistics: Statistics) -> Result<Self> {
        let mut key: OccKey = occupied.iter().copied().collect();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::InvalidState("duplicate occupied q-bit".into()));
        }
        if key.iter().any(|&q| q as usize >= n_qbits) {
            return Err(SimError::InvalidState(format!(
                "occupied q-bit out of range for {n_qbits} q-bits"
            )));
        }
        let mut amps = new_map(1);
        let n_particles = key.len();
        amps.insert(key, C64::new(1.0, 0.0));
        Ok(SectorState {
            n_qbits,
            n_particles,
            statistics,
            amps,
        })
    }

    /// Build from explicit components; keys must be strictly ascending
    /// tuples of the common length.
    pub fn from_components(
        n_qbits: usize,
        n_particles: usize,
        statistics: Statistics,
        components: impl IntoIterator<Item = (OccKey, C64)>,
    ) -> Result<Self> {
        let mut amps = new_map(16);
        for (key, amp) in components {
            if key.len() != n_particles {
                return Err(SimError::InvalidState(format!(
                    "key length {} does not match particle number {n_particles}",
                    key.len()
                )));
            }
            if key.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SimError::InvalidState(
                    "occupancy keys must be strictly ascending".into(),
                ));
            }
            if key.iter().any(|&q| q as usize >= n_qbits) {
                return Err(SimError::InvalidState("occupied q-bit out of range".into()));
            }
            *amps.entry(key).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        Ok(SectorState {
            n_qbits,
            n_particles,
            statistics,
            amps,
        })
    }

    pub fn num_qbits(&self) -> usize {
        self.n_qbits
    }

    pub fn num_particles(&self) -> usize {
        self.n_particles
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn num_components(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, occupied: &[u32]) -> C64 {
        let key: OccKey = occupied.iter().copied().collect();
        self.amps.get(&key).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccKey, &C64)> {
        self.amps.iter()
    }

    /// Components sorted by occupancy key; the deterministic order used for
    /// sampling and snapshot export.
    pub fn sorted_components(&self) -> Vec<(OccKey, C64)> {
        let mut v: Vec<(OccKey, C64)> = self.amps.iter().map(|(k, &a)| (k.clone(), a)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in self.amps.values_mut() {
                *a /= n;
            }
        }
    }

    pub fn scale(&mut self, z: C64) {
        for a in self.amps.values_mut() {
            *a *= z;
        }
    }

    /// Apply a number-conserving two-q-bit gate on (i, j); gate basis bit 0
    /// is q-bit i. Cost is one sweep over the stored configurations.
    pub fn apply_gate(&mut self, gate: &TwoQbitGate, i: usize, j: usize) -> Result<()> {
        if !gate.is_number_conserving() {
            return Err(SimError::InvalidGate(
                "sector states only admit number-conserving gates".into(),
            ));
        }
        if i == j || i >= self.n_qbits || j >= self.n_qbits {
            return Err(SimError::InvalidState(format!(
                "bad gate q-bits ({i}, {j}) for {} q-bits",
                self.n_qbits
            )));
        }
        let oriented;
        let g = if i < j {
            gate.matrix()
        } else {
            oriented = gate.swapped_qbits();
            oriented.matrix()
        };
        let (p, q) = (i.min(j) as u32, i.max(j) as u32);
        let fermionic = self.statistics == Statistics::Fermion;
        let mut out = new_map(self.amps.len() * 2);
        for (key, &amp) in &self.amps {
            let has_p = key.binary_search(&p).is_ok();
            let has_q = key.binary_search(&q).is_ok();
            match (has_p, has_q) {
                (false, false) => add_amp(&mut out, key.clone(), g[0][0] * amp),
                (true, true) => add_amp(&mut out, key.clone(), g[3][3] * amp),
                (true, false) => {
                    add_amp(&mut out, key.clone(), g[1][1] * amp);
                    let (hopped, sign) = hop_key(key, p, q, fermionic);
                    add_amp(&mut out, hopped, g[2][1] * sign * amp);
                }
                (false, true) => {
                    add_amp(&mut out, key.clone(), g[2][2] * amp);
                    let (hopped, sign) = hop_key(key, q, p, fermionic);
                    add_amp(&mut out, hopped, g[1][2] * sign * amp);
                }
            }
        }
        self.amps = out;
        Ok(())
    }

    /// Apply one gate over every pair of a disjoint-pair schedule.
    ///
    /// For hard bosons this is a single fused sweep. Fermionic hops of
    /// different pairs can cross each other's sign strings, so the fermionic
    /// path applies the pairs sequentially (the gates commute, so the order
    /// does not matter).
    pub fn apply_pair_schedule(
        &mut self,
        pairs: &[(usize, usize)],
        gate: &TwoQbitGate,
    ) -> Result<()> {
        if self.statistics == Statistics::Fermion {
            for &(a, b) in pairs {
                self.apply_gate(gate, a, b)?;
            }
            return Ok(());
        }
        if !gate.is_number_conserving() {
            return Err(SimError::InvalidGate(
                "sector states only admit number-conserving gates".into(),
            ));
        }
        // partner_of[q] = (other q-bit, gate oriented so that q is bit 0)
        let mut partner_of: Vec<Option<(u32, bool)>> = vec![None; self.n_qbits];
        for &(a, b) in pairs {
            if a == b || a >= self.n_qbits || b >= self.n_qbits {
                return Err(SimError::InvalidState(format!(
                    "bad schedule pair ({a}, {b})"
                )));
            }
            if partner_of[a].is_some() || partner_of[b].is_some() {
                return Err(SimError::InvalidState(
                    "schedule pairs must be disjoint".into(),
                ));
            }
            partner_of[a] = Some((b as u32, true));
            partner_of[b] = Some((a as u32, false));
        }
        let g = gate.matrix();
        let g_swap = gate.swapped_qbits();
        let gs = g_swap.matrix();
        let total_pairs = pairs.len();
        let mut out = new_map(self.amps.len() * 2);
        // branch expansion scratch: (key, coefficient)
        let mut branches: Vec<(OccKey, C64)> = Vec::new();
        let mut next: Vec<(OccKey, C64)> = Vec::new();
        for (key, &amp) in &self.amps {
            branches.clear();
            branches.push((key.clone(), amp));
            let mut touched = 0usize;
            // visit each occupied q-bit; a pair is handled when its
            // first-encountered occupied member comes up
            let occupied: Vec<u32> = key.to_vec();
            for &qb in &occupied {
                let Some((partner, q_is_first)) = partner_of[qb as usize] else {
                    continue;
                };
                let partner_occupied = key.binary_search(&partner).is_ok();
                if partner_occupied {
                    if partner < qb {
                        continue; // already handled at the partner
                    }
                    touched += 1;
                    for (_, coeff) in branches.iter_mut() {
                        *coeff *= g[3][3];
                    }
                } else {
                    touched += 1;
                    // local matrix with this q-bit as gate bit 0
                    let loc = if q_is_first { g } else { gs };
                    next.clear();
                    for (bkey, coeff) in branches.drain(..) {
                        let (hopped, _) = hop_key(&bkey, qb, partner, false);
                        next.push((bkey, coeff * loc[1][1]));
                        next.push((hopped, coeff * loc[2][1]));
                    }
                    std::mem::swap(&mut branches, &mut next);
                }
            }
            let untouched = total_pairs - touched;
            let vac = g[0][0].powu(untouched as u32);
            for (bkey, coeff) in branches.drain(..) {
                add_amp(&mut out, bkey, coeff * vac);
            }
        }
        self.amps = out;
        Ok(())
    }

    /// Relabel q-bits by a permutation (`perm[old] = new`). For fermions each
    /// configuration picks up the parity of re-sorting its image; this
    /// equals the composition of fermionic exchange gates realizing the
    /// permutation.
    pub fn apply_qbit_permutation(&mut self, perm: &[usize]) -> Result<()> {
        if perm.len() != self.n_qbits {
            return Err(SimError::InvalidState("permutation length mismatch".into()));
        }
        let mut out = new_map(self.amps.len());
        for (key, &amp) in &self.amps {
            let mut mapped: OccKey = key.iter().map(|&q| perm[q as usize] as u32).collect();
            let sign = match self.statistics {
                Statistics::HardBoson => {
                    mapped.sort_unstable();
                    1.0
                }
                Statistics::Fermion => sort_with_parity(&mut mapped),
            };
            out.insert(mapped, sign * amp);
        }
        self.amps = out;
        Ok(())
    }

    /// Apply the same on-site block unitary at every lattice site in one
    /// sweep. The unitary acts on the 2^c patterns of a site's c channels
    /// (which are contiguous in the canonical q-bit order, so no external
    /// fermionic strings arise; local signs live inside the matrix). It must
    /// be number conserving per site and fix the vacuum pattern.
    pub fn apply_per_site_unitary(&mut self, u: &CMatrix, lattice: &LatticeSpec) -> Result<()> {
        let cps = lattice.channels_per_site();
        let dim = 1usize << cps;
        if u.nrows() != dim || u.ncols() != dim {
            return Err(SimError::InvalidGate(format!(
                "site unitary dimension {} does not match {cps} channels",
                u.nrows()
            )));
        }
        if (u[(0, 0)] - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(SimError::InvalidGate(
                "site unitary must fix the vacuum pattern".into(),
            ));
        }
        // patterns grouped by popcount, ascending within each group
        let mut by_count: Vec<Vec<u32>> = vec![Vec::new(); cps + 1];
        for pat in 0..dim as u32 {
            by_count[pat.count_ones() as usize].push(pat);
        }
        let mut out = new_map(self.amps.len() * 2);
        let mut groups: Vec<(usize, u32)> = Vec::new(); // (site, pattern)
        for (key, &amp) in &self.amps {
            groups.clear();
            for &q in key.iter() {
                let site = q as usize / cps;
                let ch = q as usize % cps;
                match groups.last_mut() {
                    Some((s, pat)) if *s == site => *pat |= 1 << ch,
                    _ => groups.push((site, 1 << ch)),
                }
            }
            expand_site_branches(
                u,
                &by_count,
                &groups,
                0,
                &mut OccKey::new(),
                amp,
                cps,
                &mut out,
            );
        }
        self.amps = out;
        Ok(())
    }

    /// Diagonal pass: multiply each component by `f(occupied)`. Factors must
    /// be unimodular.
    pub fn apply_occupation_phase<F: FnMut(&[u32]) -> C64>(&mut self, mut f: F) -> Result<()> {
        for (key, amp) in self.amps.iter_mut() {
            let z = check_unimodular(f(key))?;
            *amp *= z;
        }
        Ok(())
    }

    /// Diagonal pass on a subset of q-bits, factor per occupation pattern.
    pub fn apply_phase<F: Fn(u32) -> C64>(&mut self, qbits: &[usize], f: F) -> Result<()> {
        let k = qbits.len();
        let mut table = Vec::with_capacity(1 << k);
        for pat in 0..(1u32 << k) {
            table.push(check_unimodular(f(pat))?);
        }
        for (key, amp) in self.amps.iter_mut() {
            let mut pat = 0u32;
            for (t, &q) in qbits.iter().enumerate() {
                if key.binary_search(&(q as u32)).is_ok() {
                    pat |= 1 << t;
                }
            }
            *amp *= table[pat as usize];
        }
        Ok(())
    }

    pub fn inner(&self, other: &SectorState) -> Result<C64> {
        if self.n_qbits != other.n_qbits || self.n_particles != other.n_particles {
            return Err(SimError::Representation(
                "inner product requires matching sector shape".into(),
            ));
        }
        let mut acc = C64::new(0.0, 0.0);
        for (key, amp) in &self.amps {
            if let Some(b) = other.amps.get(key) {
                acc += amp.conj() * b;
            }
        }
        Ok(acc)
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Simulator-side diagnostic: expected occupation per q-bit. Sums to the
    /// particle number for a normalized state.
    pub fn density(&self) -> Vec<f64> {
        let mut density = vec![0.0; self.n_qbits];
        for (key, amp) in &self.amps {
            let p = amp.norm_sqr();
            for &q in key.iter() {
                density[q as usize] += p;
            }
        }
        density
    }

    /// Born-rule measurement of the whole register, returned as the measured
    /// bitstring. Deterministic for a fixed seed.
    pub fn sample_measurement(&self, seed: u64) -> Result<usize> {
        Ok(self.sample_many(seed, 1)?[0])
    }

    pub fn sample_many(&self, seed: u64, count: usize) -> Result<Vec<usize>> {
        let norm = self.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NormOutOfTolerance { norm });
        }
        let sorted = self.sorted_components();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = sorted.len() - 1;
            for (idx, (_, amp)) in sorted.iter().enumerate() {
                acc += amp.norm_sqr();
                if u < acc {
                    chosen = idx;
                    break;
                }
            }
            let mut bits = 0usize;
            for &q in sorted[chosen].0.iter() {
                bits |= 1 << q;
            }
            out.push(bits);
        }
        Ok(out)
    }

    /// Expand into the dense representation. Fermionic amplitudes transfer
    /// unchanged: the dense basis state for a configuration is defined with
    /// the same ascending canonical order.
    pub fn to_dense(&self, limit: usize) -> Result<DenseState> {
        if self.n_qbits > limit {
            return Err(SimError::DenseLimit {
                qbits: self.n_qbits,
                limit,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << self.n_qbits];
        for (key, &amp) in &self.amps {
            let mut idx = 0usize;
            for &q in key.iter() {
                idx |= 1 << q;
            }
            amps[idx] = amp;
        }
        DenseState::from_amplitudes(self.n_qbits, amps)
    }

    /// Project a dense state onto the n-particle sector. Errors if more than
    /// `tol` of the squared norm lives outside that sector.
    pub fn from_dense(
        dense: &DenseState,
        n_particles: usize,
        statistics: Statistics,
        tol: f64,
    ) -> Result<SectorState> {
        let mut amps = new_map(64);
        let mut outside = 0.0;
        for (idx, &amp) in dense.amplitudes().iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            if idx.count_ones() as usize != n_particles {
                outside += amp.norm_sqr();
                continue;
            }
            let mut key = OccKey::new();
            let mut rest = idx;
            while rest != 0 {
                key.push(rest.trailing_zeros());
                rest &= rest - 1;
            }
            amps.insert(key, amp);
        }
        if outside > tol {
            return Err(SimError::InvalidState(format!(
                "dense state has squared norm {outside:.3e} outside the {n_particles}-particle sector"
            )));
        }
        Ok(SectorState {
            n_qbits: dense.num_qbits(),
            n_particles,
            statistics,
            amps,
        })
    }
}

fn add_amp(map: &mut AmpMap, key: OccKey, val: C64) {
    *map.entry(key).or_insert(C64::new(0.0, 0.0)) += val;
}

/// Move the particle at `from` to the empty q-bit `to`, returning the
/// re-sorted key and, when `fermionic`, the parity of the occupied q-bits
/// strictly between the two.
fn hop_key(key: &OccKey, from: u32, to: u32, fermionic: bool) -> (OccKey, f64) {
    let mut out = OccKey::with_capacity(key.len());
    let mut between = 0usize;
    let (lo, hi) = (from.min(to), from.max(to));
    let mut inserted = false;
    for &q in key.iter() {
        if q == from {
            continue;
        }
        if q > lo && q < hi {
            between += 1;
        }
        if !inserted && q > to {
            out.push(to);
            inserted = true;
        }
        out.push(q);
    }
    if !inserted {
        out.push(to);
    }
    let sign = if fermionic && between % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    (out, sign)
}

/// Recursive branch expansion for the per-site unitary: each occupied site's
/// pattern is replaced by every same-popcount pattern with the matching
/// matrix element.
#[allow(clippy::too_many_arguments)]
fn expand_site_branches(
    u: &CMatrix,
    by_count: &[Vec<u32>],
    groups: &[(usize, u32)],
    idx: usize,
    partial: &mut OccKey,
    coeff: C64,
    cps: usize,
    out: &mut AmpMap,
) {
    if coeff == C64::new(0.0, 0.0) {
        return;
    }
    if idx == groups.len() {
        add_amp(out, partial.clone(), coeff);
        return;
    }
    let (site, pat) = groups[idx];
    let r = pat.count_ones() as usize;
    for &new_pat in &by_count[r] {
        let w = u[(new_pat as usize, pat as usize)];
        if w == C64::new(0.0, 0.0) {
            continue;
        }
        let len_before = partial.len();
        for ch in 0..cps {
            if new_pat & (1 << ch) != 0 {
                partial.push((site * cps + ch) as u32);
            }
        }
        expand_site_branches(u, by_count, groups, idx + 1, partial, coeff * w, cps, out);
        partial.truncate(len_before);
    }
}
