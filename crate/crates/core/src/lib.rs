//! Numerical laboratory for the qubit quantum homogenizer.
//!
//! A reservoir of `N` identical qubits homogenizes a stream of system qubits
//! through partial swaps `U = cos(eta) 1 + i sin(eta) S`. This crate follows
//! the machine two ways:
//!
//! * [`recurrence`] tracks single-qubit Bloch magnitudes only (the
//!   product-state description) and scales to millions of interactions;
//! * [`exactsim`] evolves the full reservoir density matrix for small `N`.
//!
//! On top of either engine, [`metrics`] computes the error, robustness and
//! relative deterioration of the pure-to-mixed and mixed-to-pure tasks, and
//! [`analysis`] derives entropy surfaces, resource curves, lifetimes and a
//! finite-grid possibility verdict.
//!
//! ```
//! use homogenizer::{Coupling, TaskDirection, run_protocol, relative_deterioration};
//!
//! let trace = run_protocol(TaskDirection::MixedToPure, 1, 1, Coupling::new(0.5)?)?;
//! let rec = relative_deterioration(&trace);
//! assert!((rec.relative_deterioration - 0.43508).abs() < 1e-5);
//! # Ok::<(), homogenizer::Error>(())
//! ```

pub mod analysis;
pub mod collision;
pub mod densops;
mod error;
pub mod exactsim;
mod limits;
pub mod metrics;
pub mod recurrence;
pub mod selftest;
pub mod tolerances;

pub use analysis::{
    assess_possibility, classify_possibility, compare_engines, entropy_surface, entropy_total, find_min_reservoir,
    lifetime, resource_curve, EngineComparison, EntropySurface, Lifetime, PossibilityVerdict, ReservoirSearch,
    ResourceCurve, Verdict,
};
pub use collision::{apply_pair, partial_swap_unitary, reduced_update, Coupling};
pub use densops::{
    binary_entropy_bloch, partial_trace, qubit_fidelity, qubit_fidelity_bloch, tensor, uhlmann_fidelity,
    von_neumann_entropy, BlochScalar, DensityMatrix, UnitaryMatrix,
};
pub use error::{Error, Result};
pub use exactsim::{channel_linearity_check, exact_metrics, ExactHomogenizer};
pub use limits::{Limits, DEFAULT_EXACT_QUBIT_CAP, DEFAULT_GRID_CAP};
pub use metrics::{
    error, log_robustness, metrics_surface, relative_deterioration, Engine, MetricsRecord,
};
pub use recurrence::{check_symmetries, closed_form, run_protocol, ProtocolTrace, SymmetryReport, TaskDirection};

// Book chapters are compiled as doc-tests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/density-operators.md")]
    mod density_operators {}
    #[doc = include_str!("../../../book/src/partial-swap.md")]
    mod partial_swap {}
    #[doc = include_str!("../../../book/src/recurrence.md")]
    mod recurrence {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/exact-simulation.md")]
    mod exact_simulation {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/oracle-runs.md")]
    mod oracle_runs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
