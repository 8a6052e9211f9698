//! Studies built on top of the engines: entropy surfaces, resource curves,
//! lifetimes, engine comparisons and the possibility classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::Coupling;
use crate::densops::{binary_entropy_bloch, BlochScalar};
use crate::error::{argument, Error, Result};
use crate::exactsim::exact_metrics_with_limits;
use crate::limits::Limits;
use crate::metrics::{error_at, error_from_bloch, record_at, MetricsRecord};
use crate::recurrence::{run_protocol_with_limits, RecurrenceState, TaskDirection};

/// Slack on consecutive `ln R` differences when judging a trend.
pub const TREND_SLACK: f64 = 1e-12;

/// Shortest diagonal series [`classify_possibility`] accepts.
pub const MIN_SERIES_LEN: usize = 10;

fn entropy_of(alpha: f64) -> f64 {
    binary_entropy_bloch(BlochScalar::new(alpha).expect("recurrence keeps magnitudes in [0, 1]"))
}

/// Summed single-qubit entropies (bits) of both task reservoirs after `n`
/// iterations of an `N`-qubit machine.
pub fn entropy_total(coupling: Coupling, reservoir_size: usize, iterations: usize) -> Result<f64> {
    if reservoir_size == 0 {
        return Err(argument("reservoir size must be at least 1"));
    }
    if iterations == 0 {
        // Each index contributes one maximally mixed and one pure qubit.
        return Ok(reservoir_size as f64);
    }
    let limits = Limits::default();
    TaskDirection::BOTH.iter().try_fold(0.0, |acc, &dir| {
        let trace = run_protocol_with_limits(dir, reservoir_size, iterations, coupling, &limits)?;
        Ok(acc + trace.reservoir_row(iterations).iter().map(|&a| entropy_of(a)).sum::<f64>())
    })
}

/// `S_tot` over `1 <= N <= N_max`, `0 <= n <= n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySurface {
    pub eta: f64,
    pub max_reservoir: usize,
    pub max_iterations: usize,
    // Row n in 0..=n_max, column N in 1..=N_max.
    values: Vec<f64>,
}

impl EntropySurface {
    pub fn s_tot(&self, reservoir_size: usize, iterations: usize) -> f64 {
        assert!((1..=self.max_reservoir).contains(&reservoir_size) && iterations <= self.max_iterations);
        self.values[iterations * self.max_reservoir + reservoir_size - 1]
    }
}

pub fn entropy_surface(coupling: Coupling, max_reservoir: usize, max_iterations: usize) -> Result<EntropySurface> {
    entropy_surface_with_limits(coupling, max_reservoir, max_iterations, &Limits::default())
}

pub fn entropy_surface_with_limits(
    coupling: Coupling,
    max_reservoir: usize,
    max_iterations: usize,
    limits: &Limits,
) -> Result<EntropySurface> {
    let traces = TaskDirection::BOTH
        .iter()
        .map(|&dir| run_protocol_with_limits(dir, max_reservoir, max_iterations.max(1), coupling, limits))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity((max_iterations + 1) * max_reservoir);
    for n in 0..=max_iterations {
        let mut running = 0.0;
        for j in 1..=max_reservoir {
            running += traces.iter().map(|t| entropy_of(t.alpha(n, j))).sum::<f64>();
            values.push(running);
        }
    }
    Ok(EntropySurface {
        eta: coupling.eta(),
        max_reservoir,
        max_iterations,
        values,
    })
}

/// Result of a minimum-reservoir search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReservoirSearch {
    Found(usize),
    /// No reservoir up to `cap` qubits meets the threshold.
    Unsatisfiable { cap: usize },
}

impl ReservoirSearch {
    pub fn found(self) -> Option<usize> {
        match self {
            ReservoirSearch::Found(n) => Some(n),
            ReservoirSearch::Unsatisfiable { .. } => None,
        }
    }
}

fn check_threshold(epsilon_star: f64) -> Result<()> {
    if !(epsilon_star > 0.0 && epsilon_star < 0.5) {
        return Err(argument(format!("accuracy threshold {epsilon_star} outside (0, 1/2)")));
    }
    Ok(())
}

/// Smallest `N` whose error stays within `epsilon_star` at every one of the
/// first `n` iterations.
pub fn find_min_reservoir(
    direction: TaskDirection,
    coupling: Coupling,
    epsilon_star: f64,
    iterations: usize,
) -> Result<ReservoirSearch> {
    find_min_reservoir_with_limits(direction, coupling, epsilon_star, iterations, &Limits::default())
}

pub fn find_min_reservoir_with_limits(
    direction: TaskDirection,
    coupling: Coupling,
    epsilon_star: f64,
    iterations: usize,
    limits: &Limits,
) -> Result<ReservoirSearch> {
    check_threshold(epsilon_star)?;
    if iterations == 0 {
        return Err(argument("need at least one iteration"));
    }
    let cap = limits.grid_cap / iterations;
    if cap == 0 {
        return Err(Error::Resource {
            what: "N*n",
            requested: iterations,
            cap: limits.grid_cap,
        });
    }
    let feasible = |n_res: usize| -> Result<bool> {
        let trace = run_protocol_with_limits(direction, n_res, iterations, coupling, limits)?;
        Ok((1..=iterations).all(|i| error_at(&trace, n_res, i) <= epsilon_star))
    };

    if feasible(1)? {
        return Ok(ReservoirSearch::Found(1));
    }
    // Invariant: `lo` infeasible, `hi` feasible once the doubling stops.
    let mut hi = 1usize;
    let mut lo;
    loop {
        if hi == cap {
            return Ok(ReservoirSearch::Unsatisfiable { cap });
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
        if feasible(hi)? {
            break;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ReservoirSearch::Found(hi))
}

/// Minimum reservoir sizes for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceCurve {
    pub direction: TaskDirection,
    pub eta: f64,
    pub epsilon_star: f64,
    pub points: Vec<(usize, ReservoirSearch)>,
}

impl ResourceCurve {
    /// `N_min(n + 1) >= N_min(n)`, with unsatisfiable points treated as infinite.
    pub fn is_monotone(&self) -> bool {
        let key = |s: &ReservoirSearch| s.found().unwrap_or(usize::MAX);
        self.points.windows(2).all(|w| key(&w[1].1) >= key(&w[0].1))
    }
}

pub fn resource_curve(
    direction: TaskDirection,
    coupling: Coupling,
    epsilon_star: f64,
    max_iterations: usize,
) -> Result<ResourceCurve> {
    resource_curve_with_limits(direction, coupling, epsilon_star, max_iterations, &Limits::default())
}

pub fn resource_curve_with_limits(
    direction: TaskDirection,
    coupling: Coupling,
    epsilon_star: f64,
    max_iterations: usize,
    limits: &Limits,
) -> Result<ResourceCurve> {
    let points = (1..=max_iterations)
        .into_par_iter()
        .map(|n| Ok((n, find_min_reservoir_with_limits(direction, coupling, epsilon_star, n, limits)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResourceCurve {
        direction,
        eta: coupling.eta(),
        epsilon_star,
        points,
    })
}

/// How many consecutive uses an `N`-qubit machine survives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lifetime {
    /// Largest `n` with every iteration `1..=n` within threshold.
    pub iterations: usize,
    /// The iteration cap was reached without a failure.
    pub capped: bool,
}

pub fn lifetime(direction: TaskDirection, coupling: Coupling, epsilon_star: f64, reservoir_size: usize) -> Result<Lifetime> {
    let cap = Limits::default().grid_cap / reservoir_size.max(1);
    lifetime_with_cap(direction, coupling, epsilon_star, reservoir_size, cap)
}

pub fn lifetime_with_cap(
    direction: TaskDirection,
    coupling: Coupling,
    epsilon_star: f64,
    reservoir_size: usize,
    iteration_cap: usize,
) -> Result<Lifetime> {
    check_threshold(epsilon_star)?;
    let mut state = RecurrenceState::new(direction, reservoir_size, coupling)?;
    for n in 1..=iteration_cap {
        let beta = state.iterate();
        if error_from_bloch(direction, beta) > epsilon_star {
            return Ok(Lifetime {
                iterations: n - 1,
                capped: false,
            });
        }
    }
    Ok(Lifetime {
        iterations: iteration_cap,
        capped: true,
    })
}

/// Approximate and exact metrics at `N = n = k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineComparison {
    pub k: usize,
    pub approx: MetricsRecord,
    pub exact: MetricsRecord,
}

impl EngineComparison {
    /// `|R_exact - R_approx| / R_exact`
    pub fn relative_gap(&self) -> f64 {
        let (a, e) = (self.approx.relative_deterioration, self.exact.relative_deterioration);
        (e - a).abs() / e
    }
}

pub fn compare_engines(direction: TaskDirection, coupling: Coupling, k_max: usize) -> Result<Vec<EngineComparison>> {
    compare_engines_with_limits(direction, coupling, k_max, &Limits::default())
}

pub fn compare_engines_with_limits(
    direction: TaskDirection,
    coupling: Coupling,
    k_max: usize,
    limits: &Limits,
) -> Result<Vec<EngineComparison>> {
    if k_max == 0 {
        return Err(argument("k_max must be at least 1"));
    }
    limits.check_exact(k_max)?;
    let trace = run_protocol_with_limits(direction, k_max, k_max, coupling, limits)?;
    (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let exact = exact_metrics_with_limits(direction, k, k, coupling, limits)?
                .pop()
                .expect("k >= 1 iterations");
            Ok(EngineComparison {
                k,
                approx: record_at(&trace, k, k),
                exact,
            })
        })
        .collect()
}

/// Finite-grid reading of the limit of `R` along `N = n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    /// `ln R` strictly decreasing over the window: `R -> 0`.
    Converging,
    /// `ln R` strictly increasing over the window: `R -> inf`.
    Diverging,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Converging => "converging",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Classifies a diagonal series of `(k, ln R)` from the trend over its last
/// half. Consecutive differences must clear [`TREND_SLACK`] to count.
pub fn classify_possibility(series: &[(usize, f64)]) -> Result<Verdict> {
    if series.len() < MIN_SERIES_LEN {
        return Err(argument(format!(
            "possibility classification needs at least {MIN_SERIES_LEN} points, got {}",
            series.len()
        )));
    }
    let window = &series[series.len() / 2..];
    let diffs: Vec<f64> = window.windows(2).map(|w| w[1].1 - w[0].1).collect();
    Ok(if diffs.iter().all(|&d| d < -TREND_SLACK) {
        Verdict::Converging
    } else if diffs.iter().all(|&d| d > TREND_SLACK) {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PossibilityVerdict {
    pub direction: TaskDirection,
    pub eta: f64,
    pub verdict: Verdict,
    /// `(k, ln R)` at `N = n = k`.
    pub evidence: Vec<(usize, f64)>,
}

impl PossibilityVerdict {
    /// Diagonal point with the smallest `R`.
    pub fn minimum(&self) -> (usize, f64) {
        self.evidence
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty evidence")
    }
}

/// Runs the diagonal `k = 1..=k_max` and classifies it.
pub fn assess_possibility(direction: TaskDirection, coupling: Coupling, k_max: usize) -> Result<PossibilityVerdict> {
    assess_possibility_with_limits(direction, coupling, k_max, &Limits::default())
}

pub fn assess_possibility_with_limits(
    direction: TaskDirection,
    coupling: Coupling,
    k_max: usize,
    limits: &Limits,
) -> Result<PossibilityVerdict> {
    let evidence = crate::metrics::diagonal_log_r_with_limits(direction, coupling, k_max, limits)?;
    Ok(PossibilityVerdict {
        direction,
        eta: coupling.eta(),
        verdict: classify_possibility(&evidence)?,
        evidence,
    })
}
