//! Full 2^N state-vector representation. This is the oracle the sector
//! representation is checked against; it is capped at [`crate::DENSE_QBIT_LIMIT`]
//! q-bits.

use super::{check_unimodular, sort_with_parity, Statistics, TwoQbitGate};
use crate::error::{Result, SimError};
use crate::linalg::CMatrix;
use crate::C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Amplitudes indexed by bitstring; bit k set means q-bit k is up (occupied).
#[derive(Debug, Clone)]
pub struct DenseState {
    n_qbits: usize,
    amps: Vec<C64>,
}

fn check_limit(n_qbits: usize) -> Result<()> {
    if n_qbits > crate::DENSE_QBIT_LIMIT {
        return Err(SimError::DenseLimit {
            qbits: n_qbits,
            limit: crate::DENSE_QBIT_LIMIT,
        });
    }
    Ok(())
}

impl DenseState {
    /// Basis state with the given q-bits occupied (all others down).
    pub fn new_basis(n_qbits: usize, occupied: &[u32]) -> Result<Self> {
        check_limit(n_qbits)?;
        let mut index = 0usize;
        let mut seen = std::collections::HashSet::new();
        for &q in occupied {
            if q as usize >= n_qbits {
                return Err(SimError::InvalidState(format!(
                    "q-bit {q} out of range for {n_qbits} q-bits"
                )));
            }
            if !seen.insert(q) {
                return Err(SimError::InvalidState(format!("duplicate q-bit {q}")));
            }
            index |= 1 << q;
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qbits];
        amps[index] = C64::new(1.0, 0.0);
        Ok(DenseState { n_qbits, amps })
    }

    pub fn from_amplitudes(n_qbits: usize, amps: Vec<C64>) -> Result<Self> {
        check_limit(n_qbits)?;
        if amps.len() != 1 << n_qbits {
            return Err(SimError::InvalidState(format!(
                "expected {} amplitudes, got {}",
                1usize << n_qbits,
                amps.len()
            )));
        }
        Ok(DenseState { n_qbits, amps })
    }

    pub fn num_qbits(&self) -> usize {
        self.n_qbits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn scale(&mut self, z: C64) {
        for a in &mut self.amps {
            *a *= z;
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(SimError::InvalidState(format!(
                "gate q-bits must differ, got ({i}, {j})"
            )));
        }
        if i >= self.n_qbits || j >= self.n_qbits {
            return Err(SimError::InvalidState(format!(
                "gate q-bits ({i}, {j}) out of range for {} q-bits",
                self.n_qbits
            )));
        }
        Ok(())
    }

    /// Apply a two-q-bit gate on (i, j); the gate basis bit 0 is q-bit i.
    pub fn apply_gate(&mut self, gate: &TwoQbitGate, i: usize, j: usize) -> Result<()> {
        self.apply_gate_kernel(gate, i, j, false)
    }

    /// Apply a number-conserving two-q-bit gate with the fermionic
    /// canonical-ordering correction: hopping amplitudes between i and j are
    /// multiplied by the parity of the occupied q-bits strictly between them.
    pub fn apply_gate_fermionic(&mut self, gate: &TwoQbitGate, i: usize, j: usize) -> Result<()> {
        if !gate.is_number_conserving() {
            return Err(SimError::InvalidGate(
                "fermionic sign correction is defined for number-conserving gates".into(),
            ));
        }
        self.apply_gate_kernel(gate, i, j, true)
    }

    pub fn apply_gate_stat(
        &mut self,
        gate: &TwoQbitGate,
        i: usize,
        j: usize,
        stats: Statistics,
    ) -> Result<()> {
        match stats {
            Statistics::HardBoson => self.apply_gate(gate, i, j),
            Statistics::Fermion => self.apply_gate_fermionic(gate, i, j),
        }
    }

    fn apply_gate_kernel(
        &mut self,
        gate: &TwoQbitGate,
        i: usize,
        j: usize,
        fermionic: bool,
    ) -> Result<()> {
        self.check_pair(i, j)?;
        let g = gate.matrix();
        let bi = 1usize << i;
        let bj = 1usize << j;
        let (lo, hi) = (i.min(j), i.max(j));
        let string_mask = ((1usize << hi) - 1) & !((1usize << (lo + 1)) - 1);
        for base in 0..(1usize << (self.n_qbits - 2)) {
            // insert zero bits at positions lo then hi
            let with_lo = ((base >> lo) << (lo + 1)) | (base & ((1 << lo) - 1));
            let idx0 = ((with_lo >> hi) << (hi + 1)) | (with_lo & ((1 << hi) - 1));
            let v = [
                self.amps[idx0],
                self.amps[idx0 | bi],
                self.amps[idx0 | bj],
                self.amps[idx0 | bi | bj],
            ];
            let sign = if fermionic && (idx0 & string_mask).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let mut out = [C64::new(0.0, 0.0); 4];
            for (r, out_r) in out.iter_mut().enumerate() {
                for (c, &vc) in v.iter().enumerate() {
                    // the string affects only terms that move a particle
                    // between the two gate q-bits
                    let s = if (r == 1 && c == 2) || (r == 2 && c == 1) {
                        sign
                    } else {
                        1.0
                    };
                    *out_r += g[r][c] * s * vc;
                }
            }
            self.amps[idx0] = out[0];
            self.amps[idx0 | bi] = out[1];
            self.amps[idx0 | bj] = out[2];
            self.amps[idx0 | bi | bj] = out[3];
        }
        Ok(())
    }

    /// Apply a 2^k x 2^k unitary on the listed q-bits (ascending). Bit t of
    /// the local pattern corresponds to `qbits[t]`. No fermionic strings are
    /// inserted, so for fermions the block must be contiguous in the
    /// canonical order and the matrix must already carry the local signs.
    pub fn apply_block_unitary(&mut self, u: &CMatrix, qbits: &[usize]) -> Result<()> {
        let k = qbits.len();
        if u.nrows() != (1 << k) || u.ncols() != (1 << k) {
            return Err(SimError::InvalidGate(format!(
                "block unitary dimension {} does not match {} q-bits",
                u.nrows(),
                k
            )));
        }
        if qbits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimError::InvalidState(
                "block q-bits must be strictly ascending".into(),
            ));
        }
        if qbits.iter().any(|&q| q >= self.n_qbits) {
            return Err(SimError::InvalidState("block q-bit out of range".into()));
        }
        let dim = 1usize << k;
        let mut local = vec![C64::new(0.0, 0.0); dim];
        let rest_count = 1usize << (self.n_qbits - k);
        for rest in 0..rest_count {
            // scatter `rest` bits into the positions outside `qbits`
            let mut idx_base = 0usize;
            let mut src = rest;
            let mut qit = qbits.iter().peekable();
            for pos in 0..self.n_qbits {
                if qit.peek() == Some(&&pos) {
                    qit.next();
                    continue;
                }
                idx_base |= (src & 1) << pos;
                src >>= 1;
            }
            for (pat, slot) in local.iter_mut().enumerate() {
                let mut idx = idx_base;
                for (t, &q) in qbits.iter().enumerate() {
                    if pat & (1 << t) != 0 {
                        idx |= 1 << q;
                    }
                }
                *slot = self.amps[idx];
            }
            let out = u.matvec(&local);
            for (pat, &val) in out.iter().enumerate() {
                let mut idx = idx_base;
                for (t, &q) in qbits.iter().enumerate() {
                    if pat & (1 << t) != 0 {
                        idx |= 1 << q;
                    }
                }
                self.amps[idx] = val;
            }
        }
        Ok(())
    }

    /// Diagonal pass: multiply every amplitude by `f(bitstring)`. Factors
    /// must be unimodular.
    pub fn apply_occupation_phase<F: FnMut(usize) -> C64>(&mut self, mut f: F) -> Result<()> {
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            let z = check_unimodular(f(idx))?;
            *amp *= z;
        }
        Ok(())
    }

    /// Diagonal pass on a subset of q-bits: the factor depends only on the
    /// occupation pattern of `qbits` (bit t of the pattern is `qbits[t]`).
    pub fn apply_phase<F: Fn(u32) -> C64>(&mut self, qbits: &[usize], f: F) -> Result<()> {
        let k = qbits.len();
        let mut table = Vec::with_capacity(1 << k);
        for pat in 0..(1u32 << k) {
            table.push(check_unimodular(f(pat))?);
        }
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            let mut pat = 0u32;
            for (t, &q) in qbits.iter().enumerate() {
                if idx & (1 << q) != 0 {
                    pat |= 1 << t;
                }
            }
            *amp *= table[pat as usize];
        }
        Ok(())
    }

    /// Relabel q-bits: the state of q-bit q moves to `perm[q]`. For fermions
    /// each basis state picks up the parity of the induced reordering of its
    /// occupied indices.
    pub fn apply_qbit_permutation(&mut self, perm: &[usize], stats: Statistics) -> Result<()> {
        if perm.len() != self.n_qbits {
            return Err(SimError::InvalidState("permutation length mismatch".into()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let mut occ: Vec<u32> = Vec::with_capacity(self.n_qbits);
        for (idx, &amp) in self.amps.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            occ.clear();
            let mut rest = idx;
            while rest != 0 {
                let q = rest.trailing_zeros() as usize;
                occ.push(perm[q] as u32);
                rest &= rest - 1;
            }
            let sign = match stats {
                Statistics::HardBoson => 1.0,
                Statistics::Fermion => sort_with_parity(&mut occ),
            };
            let mut new_idx = 0usize;
            for &q in &occ {
                new_idx |= 1 << q;
            }
            out[new_idx] = sign * amp;
        }
        self.amps = out;
        Ok(())
    }

    pub fn inner(&self, other: &DenseState) -> Result<C64> {
        if self.n_qbits != other.n_qbits {
            return Err(SimError::Representation(
                "inner product requires equal q-bit counts".into(),
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Simulator-side diagnostic: expected occupation of every q-bit. This
    /// reads the full amplitude vector and is not available through the
    /// measurement interface of a physical device.
    pub fn density(&self) -> Vec<f64> {
        let mut density = vec![0.0; self.n_qbits];
        for (idx, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut rest = idx;
            while rest != 0 {
                density[rest.trailing_zeros() as usize] += p;
                rest &= rest - 1;
            }
        }
        density
    }

    pub fn particle_number_expectation(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(idx, amp)| idx.count_ones() as f64 * amp.norm_sqr())
            .sum()
    }

    /// Born-rule measurement of the whole register. Deterministic for a
    /// fixed seed; rejects states that are not normalized.
    pub fn sample_measurement(&self, seed: u64) -> Result<usize> {
        Ok(self.sample_many(seed, 1)?[0])
    }

    /// Draw `count` independent measurement outcomes from one seeded stream.
    pub fn sample_many(&self, seed: u64, count: usize) -> Result<Vec<usize>> {
        let norm = self.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(SimError::NormOutOfTolerance { norm });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = self.amps.len() - 1;
            for (idx, amp) in self.amps.iter().enumerate() {
                acc += amp.norm_sqr();
                if u < acc {
                    chosen = idx;
                    break;
                }
            }
            out.push(chosen);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basis_state_bit_layout() {
        let s = DenseState::new_basis(4, &[2]).unwrap();
        assert_eq!(s.amplitude(0b0100), c(1.0, 0.0));
        assert_eq!(s.norm(), 1.0);
        let vacuum = DenseState::new_basis(3, &[]).unwrap();
        assert_eq!(vacuum.amplitude(0), c(1.0, 0.0));
        assert!(DenseState::new_basis(4, &[1, 1]).is_err());
        assert!(DenseState::new_basis(4, &[4]).is_err());
        assert!(DenseState::new_basis(64, &[]).is_err());
    }

    #[test]
    fn identity_gate_is_identity() {
        let mut s = DenseState::new_basis(3, &[0, 2]).unwrap();
        let before = s.amplitudes().to_vec();
        s.apply_gate(&TwoQbitGate::identity(), 0, 1).unwrap();
        assert_eq!(s.amplitudes(), &before[..]);
        assert!(s.apply_gate(&TwoQbitGate::identity(), 1, 1).is_err());
    }

    #[test]
    fn gate_orientation() {
        // s-like gate: |10> -> b|10> + a|01> where bit order is (i, j)
        let b = c(0.6, 0.0);
        let a = c(0.0, 0.8);
        let m = [
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), b, a, c(0.0, 0.0)],
            [c(0.0, 0.0), a, b, c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let g = TwoQbitGate::new(m).unwrap();
        let mut s = DenseState::new_basis(2, &[0]).unwrap();
        s.apply_gate(&g, 0, 1).unwrap();
        assert!((s.amplitude(0b01) - b).norm() < 1e-15);
        assert!((s.amplitude(0b10) - a).norm() < 1e-15);
    }

    #[test]
    fn fermionic_string_sign() {
        // particle hopping 0 -> 2 over an occupied q-bit 1 picks up -1
        let swap = TwoQbitGate::new([
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let mut s = DenseState::new_basis(3, &[0, 1]).unwrap();
        s.apply_gate_fermionic(&swap, 0, 2).unwrap();
        assert!((s.amplitude(0b110) - c(-1.0, 0.0)).norm() < 1e-15);
        // without a particle in between there is no sign
        let mut s = DenseState::new_basis(3, &[0]).unwrap();
        s.apply_gate_fermionic(&swap, 0, 2).unwrap();
        assert!((s.amplitude(0b100) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn block_unitary_matches_gate() {
        // a two-q-bit block unitary must agree with apply_gate on (i, j)
        let b = c(0.6, 0.0);
        let a = c(0.0, 0.8);
        let rows: Vec<Vec<C64>> = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), b, a, c(0.0, 0.0)],
            vec![c(0.0, 0.0), a, b, c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ];
        let u = CMatrix::from_rows(&rows);
        let m = [
            [rows[0][0], rows[0][1], rows[0][2], rows[0][3]],
            [rows[1][0], rows[1][1], rows[1][2], rows[1][3]],
            [rows[2][0], rows[2][1], rows[2][2], rows[2][3]],
            [rows[3][0], rows[3][1], rows[3][2], rows[3][3]],
        ];
        let g = TwoQbitGate::new(m).unwrap();
        let mut s1 = DenseState::new_basis(4, &[1, 3]).unwrap();
        let mut s2 = s1.clone();
        s1.apply_gate(&g, 1, 2).unwrap();
        s2.apply_block_unitary(&u, &[1, 2]).unwrap();
        for k in 0..16 {
            assert!((s1.amplitude(k) - s2.amplitude(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn phase_pass_and_unimodularity() {
        let mut s = DenseState::new_basis(2, &[0]).unwrap();
        s.apply_phase(&[0], |pat| {
            if pat == 1 {
                C64::from_polar(1.0, -0.3)
            } else {
                c(1.0, 0.0)
            }
        })
        .unwrap();
        assert!((s.amplitude(1) - C64::from_polar(1.0, -0.3)).norm() < 1e-15);
        let err = s.apply_phase(&[0], |_| c(0.5, 0.0));
        assert!(matches!(err, Err(SimError::NonUnimodular { .. })));
    }

    #[test]
    fn sampling_is_deterministic_and_rejects_unnormalized() {
        let mut amps = vec![c(0.0, 0.0); 4];
        amps[1] = c(1.0, 0.0);
        let s = DenseState::from_amplitudes(2, amps).unwrap();
        assert_eq!(s.sample_measurement(42).unwrap(), 1);
        let a = s.sample_many(7, 100).unwrap();
        let b = s.sample_many(7, 100).unwrap();
        assert_eq!(a, b);

        let bad = DenseState::from_amplitudes(1, vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            bad.sample_measurement(0),
            Err(SimError::NormOutOfTolerance { .. })
        ));
    }

    #[test]
    fn balanced_qbit_sampling_frequency() {
        // (|up> + |down>)/sqrt(2): occupation frequency 0.5 within 3 sigma
        let h = 0.5f64.sqrt();
        let s = DenseState::from_amplitudes(1, vec![c(h, 0.0), c(h, 0.0)]).unwrap();
        let n = 100_000usize;
        let ups = s
            .sample_many(11, n)
            .unwrap()
            .into_iter()
            .filter(|&b| b == 1)
            .count();
        let freq = ups as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn density_of_balanced_superposition() {
        let h = 0.5f64.sqrt();
        let amps = vec![c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)];
        let s = DenseState::from_amplitudes(2, amps).unwrap();
        let d = s.density();
        assert!((d[0] - 0.5).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        assert!((s.particle_number_expectation() - 1.0).abs() < 1e-15);
    }
}
