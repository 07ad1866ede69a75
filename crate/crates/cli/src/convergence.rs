//! Refinement studies against a closed-form oracle.

use std::fmt;

use quasilocal_core::closed_form::closed_form_for;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::compute;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: (usize, usize),
    pub energy: f64,
    pub error: f64,
    /// `log₂(err(h) / err(h/2))` against the previous row.
    pub observed_order: Option<f64>,
}

impl fmt::Display for ConvergenceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = self.observed_order.map_or("-".to_string(), |o| format!("{o:.3}"));
        write!(f, "{:>5} x {:<5} {:>22.15e} {:>12.4e} {:>8}", self.resolution.0, self.resolution.1, self.energy, self.error, order)
    }
}

/// Runs `levels` resolutions, doubling both grid counts each time, starting
/// from the configured one.
pub fn run_convergence(config: &RunConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    if levels == 0 {
        return Err(CliError::Validation("levels must be positive".into()));
    }
    let oracle = closed_form_for(&config.spec)
        .ok_or_else(|| CliError::Validation("no closed-form oracle for this specification".into()))?
        .energy
        .finite()
        .ok_or_else(|| CliError::Validation("the oracle energy is -inf; there is no error to measure".into()))?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut level = config.clone();
        level.resolution = (config.resolution.0 << k, config.resolution.1 << k);
        level.record_runtime = false;
        let rep = compute(&level)?;
        let energy = rep
            .energy
            .finite()
            .ok_or_else(|| CliError::Validation(format!("discrete energy is -inf at {:?}", level.resolution)))?;
        let error = (energy - oracle).abs();
        let observed_order = rows.last().map(|prev| (prev.error / error).log2());
        rows.push(ConvergenceRow { resolution: level.resolution, energy, error, observed_order });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{flat_disk, stretch};

    #[test]
    fn specs_without_oracle_are_refused() {
        let config = RunConfig::new(stretch(0.1), (16, 32));
        assert!(matches!(run_convergence(&config, 2), Err(CliError::Validation(_))));
    }

    #[test]
    fn flat_disk_errors_stay_small() {
        let rows = run_convergence(&RunConfig::new(flat_disk(), (16, 32)), 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].resolution, (32, 64));
        assert!(rows.iter().all(|r| r.error <= 5e-3));
        assert!(rows[0].observed_order.is_none() && rows[1].observed_order.is_some());
    }
}
