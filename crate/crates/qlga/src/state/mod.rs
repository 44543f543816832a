//! Quantum state representations and gate application.
//!
//! Two interchangeable representations are provided. [`DenseState`] holds all
//! 2^N amplitudes and serves as the brute-force oracle; [`SectorState`] holds
//! amplitudes only over configurations with a fixed particle number, which is
//! what makes long multi-particle runs affordable. Any program of
//! number-conserving gates gives identical results in both (see the
//! equivalence tests and the `analysis` module).

mod dense;
mod sector;

pub use dense::DenseState;
pub use sector::{OccKey, SectorState};

use crate::error::{Result, SimError};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Particle statistics for multi-particle sectors.
///
/// Hard bosons are bosonic particles that can never doubly occupy a channel
/// (one q-bit holds at most one particle). Fermions additionally carry the
/// canonical-ordering sign: amplitudes are stored relative to ascending
/// q-bit index order, and every hop picks up the parity of the occupied
/// channels it passes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistics {
    HardBoson,
    Fermion,
}

/// Tolerance used when validating constructed gates.
const GATE_TOL: f64 = 1e-12;

/// A 4x4 unitary acting on a pair of q-bits in the basis
/// {|00>, |10>, |01>, |11>} (bit 0 is the first q-bit named in the call).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQbitGate {
    m: [[C64; 4]; 4],
    number_conserving: bool,
}

impl TwoQbitGate {
    /// Validate unitarity and detect the number-conserving block pattern
    /// over the particle-count sectors {0}, {1,2}, {3}.
    pub fn new(m: [[C64; 4]; 4]) -> Result<Self> {
        let mut defect: f64 = 0.0;
        for r in 0..4 {
            for c in 0..4 {
                let mut dot = C64::new(0.0, 0.0);
                for k in 0..4 {
                    dot += m[k][r].conj() * m[k][c];
                }
                let target = if r == c { 1.0 } else { 0.0 };
                defect = defect.max((dot - target).norm());
            }
        }
        if defect > GATE_TOL {
            return Err(SimError::InvalidGate(format!(
                "not unitary: max |G†G - I| = {defect:.3e}"
            )));
        }
        let coupling = [
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 0),
            (2, 0),
            (3, 0),
            (1, 3),
            (2, 3),
            (3, 1),
            (3, 2),
        ];
        let number_conserving = coupling.iter().all(|&(r, c)| m[r][c].norm() <= GATE_TOL);
        Ok(TwoQbitGate {
            m,
            number_conserving,
        })
    }

    pub fn identity() -> Self {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (k, row) in m.iter_mut().enumerate() {
            row[k] = C64::new(1.0, 0.0);
        }
        TwoQbitGate {
            m,
            number_conserving: true,
        }
    }

    pub fn matrix(&self) -> &[[C64; 4]; 4] {
        &self.m
    }

    pub fn is_number_conserving(&self) -> bool {
        self.number_conserving
    }

    /// The same gate with the roles of the two q-bits exchanged
    /// (basis states |10> and |01> swap places).
    pub(crate) fn swapped_qbits(&self) -> TwoQbitGate {
        let sigma = [0usize, 2, 1, 3];
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = self.m[sigma[r]][sigma[c]];
            }
        }
        TwoQbitGate {
            m,
            number_conserving: self.number_conserving,
        }
    }
}

/// Sort `indices` ascending and return the parity sign (+1/-1) of the
/// permutation that performed the sort. This is the fermionic reordering
/// sign relative to the canonical (ascending) order.
pub(crate) fn sort_with_parity(indices: &mut [u32]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] > indices[j] {
                inversions += 1;
            }
        }
    }
    indices.sort_unstable();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Validate that an occupation-phase factor is unimodular.
pub(crate) fn check_unimodular(z: C64) -> Result<C64> {
    let m = z.norm();
    if (m - 1.0).abs() > 1e-9 {
        return Err(SimError::NonUnimodular { modulus: m });
    }
    Ok(z)
}
