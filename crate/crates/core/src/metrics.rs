//! Error, robustness and relative deterioration.
//!
//! The robustness of an `N`-qubit reservoir is a product of `N` fidelities
//! and underflows quickly, so it is carried as `log_delta`. Relative
//! deterioration is likewise formed in the log domain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::Coupling;
use crate::error::{argument, Error, Result};
use crate::limits::Limits;
use crate::recurrence::{run_protocol_with_limits, ProtocolTrace, TaskDirection};

/// Which engine produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Engine {
    /// Product-state marginal recurrence.
    Approx,
    /// Full density-matrix simulation.
    Exact,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Engine::Approx => "approx",
            Engine::Exact => "exact",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `(epsilon, log delta, R)` for one `(direction, eta, N, n)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub engine: Engine,
    pub direction: TaskDirection,
    pub eta: f64,
    pub reservoir_size: usize,
    pub iterations: usize,
    pub epsilon: f64,
    pub log_delta: f64,
    /// `ln R`; `-inf` for a perfect machine.
    pub log_r: f64,
    pub relative_deterioration: f64,
}

impl MetricsRecord {
    pub fn new(
        engine: Engine,
        direction: TaskDirection,
        eta: f64,
        reservoir_size: usize,
        iterations: usize,
        epsilon: f64,
        log_delta: f64,
    ) -> Self {
        let log_r = epsilon.ln() - log_delta;
        MetricsRecord {
            engine,
            direction,
            eta,
            reservoir_size,
            iterations,
            epsilon,
            log_delta,
            log_r,
            relative_deterioration: log_r.exp(),
        }
    }

    pub fn delta(&self) -> f64 {
        self.log_delta.exp()
    }

    /// Re-checks the record's invariants: `epsilon` in `[0, 1]`,
    /// `log_delta <= 0` and `R = epsilon / delta` when finite.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Invariant(format!("{what} in record {self:?}")));
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon {} outside [0, 1]", self.epsilon));
        }
        if self.log_delta.is_nan() || self.log_delta > 1e-12 {
            return bad(format!("log_delta {} is positive", self.log_delta));
        }
        let r = self.relative_deterioration;
        if r.is_nan() || r < 0.0 {
            return bad(format!("R = {r} is negative"));
        }
        if r.is_finite() && self.log_delta.is_finite() {
            let direct = self.epsilon / self.delta();
            if (direct - r).abs() > 1e-9 * direct.max(1e-300) {
                return bad(format!("R = {r} disagrees with epsilon/delta = {direct}"));
            }
        }
        Ok(())
    }
}

/// Error of the task given the system qubit's final Bloch magnitude.
///
/// Pure-to-mixed uses `(1 - sqrt(1 - b^2)) / 2` in the cancellation-free
/// form `b^2 / (2 (1 + sqrt(1 - b^2)))`; mixed-to-pure is `(1 - b) / 2`.
pub fn error_from_bloch(direction: TaskDirection, beta: f64) -> f64 {
    match direction {
        TaskDirection::PureToMixed => {
            let b2 = beta * beta;
            0.5 * b2 / (1.0 + (1.0 - b2).max(0.0).sqrt())
        }
        TaskDirection::MixedToPure => 0.5 * (1.0 - beta),
    }
}

/// `ln F(xi_j, xi_0)` for one reservoir qubit of magnitude `alpha`.
pub fn log_fidelity_from_bloch(direction: TaskDirection, alpha: f64) -> f64 {
    match direction {
        TaskDirection::PureToMixed => {
            let a2 = alpha * alpha;
            (-0.5 * a2 / (1.0 + (1.0 - a2).max(0.0).sqrt())).ln_1p()
        }
        // Zero fidelity (alpha = -1) maps to -inf: total degradation.
        TaskDirection::MixedToPure => (-0.5 * (1.0 - alpha)).ln_1p(),
    }
}

/// Error after the last iteration of the trace.
pub fn error(trace: &ProtocolTrace) -> f64 {
    error_at(trace, trace.reservoir_size(), trace.iterations())
}

/// Error of an `N`-qubit machine after `n` iterations, read from a trace
/// at least that large.
pub fn error_at(trace: &ProtocolTrace, reservoir_size: usize, iterations: usize) -> f64 {
    error_from_bloch(trace.direction(), trace.beta(iterations, reservoir_size))
}

/// `ln delta` after the last iteration of the trace.
pub fn log_robustness(trace: &ProtocolTrace) -> f64 {
    log_robustness_at(trace, trace.reservoir_size(), trace.iterations())
}

/// `ln delta` of an `N`-qubit machine after `n >= 0` iterations.
pub fn log_robustness_at(trace: &ProtocolTrace, reservoir_size: usize, iterations: usize) -> f64 {
    trace.reservoir_row(iterations)[..reservoir_size]
        .iter()
        .map(|&a| log_fidelity_from_bloch(trace.direction(), a))
        .sum()
}

/// Metrics of the full trace.
pub fn relative_deterioration(trace: &ProtocolTrace) -> MetricsRecord {
    record_at(trace, trace.reservoir_size(), trace.iterations())
}

/// Metrics of the `(N, n)` sub-machine of a trace.
pub fn record_at(trace: &ProtocolTrace, reservoir_size: usize, iterations: usize) -> MetricsRecord {
    MetricsRecord::new(
        Engine::Approx,
        trace.direction(),
        trace.coupling().eta(),
        reservoir_size,
        iterations,
        error_at(trace, reservoir_size, iterations),
        log_robustness_at(trace, reservoir_size, iterations),
    )
}

/// Records for every `1 <= N <= N_max`, `1 <= n <= n_max`, ordered by `(N, n)`.
pub fn metrics_surface(
    direction: TaskDirection,
    coupling: Coupling,
    max_reservoir: usize,
    max_iterations: usize,
) -> Result<Vec<MetricsRecord>> {
    metrics_surface_with_limits(direction, coupling, max_reservoir, max_iterations, &Limits::default())
}

pub fn metrics_surface_with_limits(
    direction: TaskDirection,
    coupling: Coupling,
    max_reservoir: usize,
    max_iterations: usize,
    limits: &Limits,
) -> Result<Vec<MetricsRecord>> {
    let trace = run_protocol_with_limits(direction, max_reservoir, max_iterations, coupling, limits)?;
    Ok((1..=max_reservoir)
        .into_par_iter()
        .flat_map_iter(|big_n| (1..=max_iterations).map(move |n| (big_n, n)))
        .map(|(big_n, n)| record_at(&trace, big_n, n))
        .collect())
}

/// `ln R` along the diagonal `N = n = k` for `k = 1..=k_max`.
pub fn diagonal_log_r(direction: TaskDirection, coupling: Coupling, k_max: usize) -> Result<Vec<(usize, f64)>> {
    diagonal_log_r_with_limits(direction, coupling, k_max, &Limits::default())
}

pub fn diagonal_log_r_with_limits(
    direction: TaskDirection,
    coupling: Coupling,
    k_max: usize,
    limits: &Limits,
) -> Result<Vec<(usize, f64)>> {
    if k_max == 0 {
        return Err(argument("diagonal needs k_max >= 1"));
    }
    let trace = run_protocol_with_limits(direction, k_max, k_max, coupling, limits)?;
    Ok((1..=k_max).map(|k| (k, record_at(&trace, k, k).log_r)).collect())
}
