use crate::error::{Error, Result};

/// Default cap on `N * n` for recurrence grids.
pub const DEFAULT_GRID_CAP: usize = 10_000_000;

/// Default cap on the reservoir size of the exact simulator. The joint
/// operator of `N + 1` qubits then has `2^11` rows.
pub const DEFAULT_EXACT_QUBIT_CAP: usize = 10;

/// Resource caps shared by every engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest admissible `N * n` for a recurrence run.
    pub grid_cap: usize,
    /// Largest reservoir handled by the exact density-matrix engine.
    pub exact_qubit_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            grid_cap: DEFAULT_GRID_CAP,
            exact_qubit_cap: DEFAULT_EXACT_QUBIT_CAP,
        }
    }
}

impl Limits {
    pub fn check_grid(&self, reservoir_size: usize, iterations: usize) -> Result<()> {
        let cells = reservoir_size.saturating_mul(iterations);
        if cells > self.grid_cap {
            return Err(Error::Resource {
                what: "N*n",
                requested: cells,
                cap: self.grid_cap,
            });
        }
        Ok(())
    }

    pub fn check_exact(&self, reservoir_size: usize) -> Result<()> {
        if reservoir_size > self.exact_qubit_cap {
            return Err(Error::Resource {
                what: "exact reservoir size N",
                requested: reservoir_size,
                cap: self.exact_qubit_cap,
            });
        }
        Ok(())
    }
}
