//! Cross-representation oracle: run the same dynamics in the dense and
//! sector representations and compare amplitudes.

use crate::dynamics::{run, Representation, RunConfig};
use crate::error::{Result, SimError};

/// Run `config` in both representations and return the largest amplitude
/// deviation. The sector state maps onto the dense register through the
/// shared canonical ordering, so no sign or phase alignment is needed; any
/// deviation is a real disagreement.
pub fn dense_vs_sector_check(config: &RunConfig) -> Result<f64> {
    if config.lattice.num_qbits() > crate::DENSE_QBIT_LIMIT {
        return Err(SimError::DenseLimit {
            qbits: config.lattice.num_qbits(),
            limit: crate::DENSE_QBIT_LIMIT,
        });
    }
    let mut sector_cfg = config.clone();
    sector_cfg.representation = Representation::Sector;
    let mut dense_cfg = config.clone();
    dense_cfg.representation = Representation::Dense;
    let sector_out = run(&sector_cfg)?;
    let dense_out = run(&dense_cfg)?;
    let from_sector = sector_out
        .state
        .as_sector()
        .expect("sector run yields a sector state")
        .to_dense(crate::DENSE_QBIT_LIMIT)?;
    let dense = dense_out
        .state
        .as_dense()
        .expect("dense run yields a dense state");
    let mut max_dev: f64 = 0.0;
    for (a, b) in from_sector.amplitudes().iter().zip(dense.amplitudes()) {
        max_dev = max_dev.max((a - b).norm());
    }
    Ok(max_dev)
}
