//! Product-state homogenizer engine.
//!
//! Only single-qubit marginals are tracked. Reservoir qubit `j` after `I`
//! iterations has Bloch magnitude `alpha(I, j)`; the system qubit of
//! iteration `I` after meeting reservoir qubits `1..=j` has magnitude
//! `beta(I, j)`. Interactions run iteration-major: every system qubit
//! crosses the whole reservoir before the next one arrives.
//!
//! Because a system qubit only ever moves forward through the reservoir, the
//! entries with `j <= N'` of a size-`N` run coincide with a size-`N'` run.
//! Surfaces over `(N, n)` are therefore read off a single large trace.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::collision::Coupling;
use crate::densops::{BlochScalar, DensityMatrix};
use crate::error::{argument, Error, Result};
use crate::limits::Limits;

/// Which homogenization task the machine performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskDirection {
    /// Pure system qubits (`beta = 1`) into a maximally mixed reservoir (`alpha = 0`).
    PureToMixed,
    /// Maximally mixed system qubits (`beta = 0`) into a pure reservoir (`alpha = 1`).
    MixedToPure,
}

impl TaskDirection {
    pub const BOTH: [TaskDirection; 2] = [TaskDirection::PureToMixed, TaskDirection::MixedToPure];

    /// Bloch magnitude of every fresh system qubit.
    pub fn fresh_system(self) -> f64 {
        match self {
            TaskDirection::PureToMixed => 1.0,
            TaskDirection::MixedToPure => 0.0,
        }
    }

    /// Bloch magnitude of every reservoir qubit before first use.
    pub fn fresh_reservoir(self) -> f64 {
        match self {
            TaskDirection::PureToMixed => 0.0,
            TaskDirection::MixedToPure => 1.0,
        }
    }

    pub fn fresh_system_state(self) -> DensityMatrix {
        BlochScalar::new(self.fresh_system()).unwrap().to_state()
    }

    pub fn fresh_reservoir_state(self) -> DensityMatrix {
        BlochScalar::new(self.fresh_reservoir()).unwrap().to_state()
    }

    pub fn transpose(self) -> Self {
        match self {
            TaskDirection::PureToMixed => TaskDirection::MixedToPure,
            TaskDirection::MixedToPure => TaskDirection::PureToMixed,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TaskDirection::PureToMixed => "p2m",
            TaskDirection::MixedToPure => "m2p",
        }
    }
}

impl fmt::Display for TaskDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TaskDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p2m" | "pure-to-mixed" | "puretomixed" => Ok(TaskDirection::PureToMixed),
            "m2p" | "mixed-to-pure" | "mixedtopure" => Ok(TaskDirection::MixedToPure),
            other => Err(argument(format!("unknown task direction '{other}' (expected p2m or m2p)"))),
        }
    }
}

/// Iterates the marginal recurrence one system qubit at a time, keeping only
/// the current reservoir row.
#[derive(Debug, Clone)]
pub struct RecurrenceState {
    direction: TaskDirection,
    coupling: Coupling,
    reservoir: Vec<f64>,
    iterations_done: usize,
}

impl RecurrenceState {
    pub fn new(direction: TaskDirection, reservoir_size: usize, coupling: Coupling) -> Result<Self> {
        if reservoir_size == 0 {
            return Err(argument("reservoir size must be at least 1"));
        }
        Ok(RecurrenceState {
            direction,
            coupling,
            reservoir: vec![direction.fresh_reservoir(); reservoir_size],
            iterations_done: 0,
        })
    }

    /// Sends one fresh system qubit through the reservoir and returns its
    /// final Bloch magnitude.
    pub fn iterate(&mut self) -> f64 {
        self.iterate_recording(|_, _| {})
    }

    /// As [`iterate`](Self::iterate), calling `record(j, beta_j)` after the
    /// system qubit leaves reservoir qubit `j` (1-based).
    pub fn iterate_recording(&mut self, mut record: impl FnMut(usize, f64)) -> f64 {
        let mut beta = self.direction.fresh_system();
        for (idx, alpha) in self.reservoir.iter_mut().enumerate() {
            let (a, b) = self.coupling.update(*alpha, beta);
            *alpha = a;
            beta = b;
            record(idx + 1, beta);
        }
        self.iterations_done += 1;
        beta
    }

    pub fn reservoir(&self) -> &[f64] {
        &self.reservoir
    }

    pub fn iterations_done(&self) -> usize {
        self.iterations_done
    }

    pub fn direction(&self) -> TaskDirection {
        self.direction
    }
}

/// Full table of reservoir and system Bloch magnitudes for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    direction: TaskDirection,
    reservoir_size: usize,
    iterations: usize,
    coupling: Coupling,
    // Row I in 0..=n, column j in 1..=N.
    alpha: Vec<f64>,
    // Row I in 1..=n, column j in 0..=N.
    beta: Vec<f64>,
}

impl ProtocolTrace {
    fn blank(direction: TaskDirection, reservoir_size: usize, iterations: usize, coupling: Coupling) -> Self {
        let mut alpha = vec![0.0; (iterations + 1) * reservoir_size];
        alpha[..reservoir_size].fill(direction.fresh_reservoir());
        let mut beta = vec![0.0; iterations * (reservoir_size + 1)];
        for row in beta.chunks_mut(reservoir_size + 1) {
            row[0] = direction.fresh_system();
        }
        ProtocolTrace {
            direction,
            reservoir_size,
            iterations,
            coupling,
            alpha,
            beta,
        }
    }

    pub fn direction(&self) -> TaskDirection {
        self.direction
    }

    /// `N`
    pub fn reservoir_size(&self) -> usize {
        self.reservoir_size
    }

    /// `n`
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Reservoir qubit `j` (1-based) after `i` iterations, `0 <= i <= n`.
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        assert!(i <= self.iterations && (1..=self.reservoir_size).contains(&j), "alpha index ({i}, {j}) out of range");
        self.alpha[i * self.reservoir_size + j - 1]
    }

    /// System qubit of iteration `i` (1-based) after `j` interactions.
    pub fn beta(&self, i: usize, j: usize) -> f64 {
        assert!((1..=self.iterations).contains(&i) && j <= self.reservoir_size, "beta index ({i}, {j}) out of range");
        self.beta[(i - 1) * (self.reservoir_size + 1) + j]
    }

    /// `alpha(i, 1..=N)`
    pub fn reservoir_row(&self, i: usize) -> &[f64] {
        assert!(i <= self.iterations, "iteration {i} out of range");
        &self.alpha[i * self.reservoir_size..(i + 1) * self.reservoir_size]
    }

    /// `beta(i, 0..=N)`
    pub fn system_row(&self, i: usize) -> &[f64] {
        assert!((1..=self.iterations).contains(&i), "iteration {i} out of range");
        let w = self.reservoir_size + 1;
        &self.beta[(i - 1) * w..i * w]
    }

    fn alpha_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.alpha[i * self.reservoir_size + j - 1]
    }

    fn beta_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.beta[(i - 1) * (self.reservoir_size + 1) + j]
    }

    /// Largest entry-wise difference between two traces of the same shape.
    pub fn max_abs_diff(&self, other: &ProtocolTrace) -> Result<f64> {
        if self.reservoir_size != other.reservoir_size || self.iterations != other.iterations {
            return Err(argument("traces have different shapes"));
        }
        Ok(self
            .alpha
            .iter()
            .zip(&other.alpha)
            .chain(self.beta.iter().zip(&other.beta))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Checks range, boundary and per-interaction sum conservation.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        if let Some(v) = self
            .alpha
            .iter()
            .chain(&self.beta)
            .find(|v| !(-tol..=1.0 + tol).contains(*v))
        {
            return fail(format!("Bloch magnitude {v} outside [0, 1]"));
        }
        if self.reservoir_row(0).iter().any(|&a| a != self.direction.fresh_reservoir()) {
            return fail("reservoir boundary row altered".into());
        }
        for i in 1..=self.iterations {
            if self.beta(i, 0) != self.direction.fresh_system() {
                return fail(format!("system boundary altered at iteration {i}"));
            }
            for j in 1..=self.reservoir_size {
                let before = self.alpha(i - 1, j) + self.beta(i, j - 1);
                let after = self.alpha(i, j) + self.beta(i, j);
                if (before - after).abs() > tol {
                    return fail(format!("sum not conserved at ({i}, {j}): {before} vs {after}"));
                }
            }
        }
        Ok(())
    }
}

fn check_shape(reservoir_size: usize, iterations: usize, limits: &Limits) -> Result<()> {
    if reservoir_size == 0 || iterations == 0 {
        return Err(argument(format!(
            "need N >= 1 and n >= 1, got N = {reservoir_size}, n = {iterations}"
        )));
    }
    limits.check_grid(reservoir_size, iterations)
}

/// Runs `n` iterations of an `N`-qubit homogenizer under the default caps.
pub fn run_protocol(
    direction: TaskDirection,
    reservoir_size: usize,
    iterations: usize,
    coupling: Coupling,
) -> Result<ProtocolTrace> {
    run_protocol_with_limits(direction, reservoir_size, iterations, coupling, &Limits::default())
}

pub fn run_protocol_with_limits(
    direction: TaskDirection,
    reservoir_size: usize,
    iterations: usize,
    coupling: Coupling,
    limits: &Limits,
) -> Result<ProtocolTrace> {
    check_shape(reservoir_size, iterations, limits)?;
    let mut trace = ProtocolTrace::blank(direction, reservoir_size, iterations, coupling);
    let mut state = RecurrenceState::new(direction, reservoir_size, coupling)?;
    for i in 1..=iterations {
        let row = &mut trace.beta[(i - 1) * (reservoir_size + 1)..i * (reservoir_size + 1)];
        state.iterate_recording(|j, b| row[j] = b);
        trace.alpha[i * reservoir_size..(i + 1) * reservoir_size].copy_from_slice(state.reservoir());
    }
    Ok(trace)
}

/// Evaluates the decoupled double-sum solutions of the recurrence.
///
/// With `q = cos^-2(eta)` the four solutions are
///
/// ```text
/// p2m  beta(I,j)  = c^2j     (1 + s^4 c^2(I-1) S_beta(I,j))
/// p2m  alpha(I,j) = c^2(j-1) (1 - c^2I + s^4 c^2I S_alpha(I,j))
/// m2p  beta(I,j)  = c^2(I-1) (1 - c^2j + s^4 c^2j S_beta(I,j))
/// m2p  alpha(I,j) = c^2I     (1 + s^4 c^2(j-1) S_alpha(I,j))
///
/// S_beta(I,j)  = sum_{k<=j}   sum_{l<=I-1} q^(k+l) beta(l, k-1)
/// S_alpha(I,j) = sum_{l<=I}   sum_{k<=j-1} q^(k+l) alpha(l-1, k)
/// ```
///
/// where the sums always run over entries of the same table. They are
/// accumulated as running 2-D prefix sums, so the cost is `O(N n)`.
/// Fails when `q^(N+n)` leaves the comfortable range of `f64`.
// One index drives several prefix arrays at once.
#[allow(clippy::needless_range_loop)]
pub fn closed_form(
    direction: TaskDirection,
    reservoir_size: usize,
    iterations: usize,
    coupling: Coupling,
) -> Result<ProtocolTrace> {
    check_shape(reservoir_size, iterations, &Limits::default())?;
    let ln_c2 = coupling.ln_cos2();
    let span = (reservoir_size + iterations) as f64 * -ln_c2;
    if span > 600.0 {
        return Err(argument(format!(
            "closed form weights overflow for N + n = {} at eta = {}",
            reservoir_size + iterations,
            coupling.eta()
        )));
    }
    let s4 = coupling.sin2() * coupling.sin2();
    let c2pow = |x: usize| (x as f64 * ln_c2).exp();
    let one_minus_c2pow = |x: usize| -(x as f64 * ln_c2).exp_m1();
    let q = |x: usize| (-(x as f64) * ln_c2).exp();

    let (n_res, n_it) = (reservoir_size, iterations);
    let mut trace = ProtocolTrace::blank(direction, n_res, n_it, coupling);
    // acc_beta[j] = sum over finished rows l and k <= j of q^(k+l) beta(l, k-1)
    let mut acc_beta = vec![0.0; n_res + 1];
    // acc_alpha[j] = sum over rows l <= I and k <= j of q^(k+l) alpha(l-1, k)
    let mut acc_alpha = vec![0.0; n_res + 1];

    for i in 1..=n_it {
        // Fold row l = I of the alpha sum, which reads alpha(I-1, k).
        let mut running = 0.0;
        for k in 1..=n_res {
            running += q(k + i) * trace.alpha(i - 1, k);
            acc_alpha[k] += running;
        }
        for j in 1..=n_res {
            let s_beta = acc_beta[j];
            let s_alpha = acc_alpha[j - 1];
            let (beta, alpha) = match direction {
                TaskDirection::PureToMixed => (
                    c2pow(j) * (1.0 + s4 * c2pow(i - 1) * s_beta),
                    c2pow(j - 1) * (one_minus_c2pow(i) + s4 * c2pow(i) * s_alpha),
                ),
                TaskDirection::MixedToPure => (
                    c2pow(i - 1) * (one_minus_c2pow(j) + s4 * c2pow(j) * s_beta),
                    c2pow(i) * (1.0 + s4 * c2pow(j - 1) * s_alpha),
                ),
            };
            *trace.beta_mut(i, j) = beta;
            *trace.alpha_mut(i, j) = alpha;
        }
        // Fold row l = I of the beta sum, which reads beta(I, k-1).
        let mut running = 0.0;
        for k in 1..=n_res {
            running += q(k + i) * trace.beta(i, k - 1);
            acc_beta[k] += running;
        }
    }
    if trace.alpha.iter().chain(&trace.beta).any(|v| !v.is_finite()) {
        return Err(Error::Invariant("closed form produced a non-finite entry".into()));
    }
    Ok(trace)
}

/// Largest violations of the three identities linking the two task tables:
/// `alpha(a,b) + beta(b,a) = 1`, `alpha(a,b) = beta~(b,a)` and
/// `alpha~(a,b) = beta(b,a)`, where `~` marks the mixed-to-pure run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub complement: f64,
    pub reservoir_transpose: f64,
    pub system_transpose: f64,
    /// Number of `(a, b)` pairs scanned.
    pub pairs: usize,
}

impl SymmetryReport {
    pub fn max_violation(&self) -> f64 {
        self.complement.max(self.reservoir_transpose).max(self.system_transpose)
    }
}

pub fn check_symmetries(trace_p2m: &ProtocolTrace, trace_m2p: &ProtocolTrace) -> Result<SymmetryReport> {
    if trace_p2m.direction != TaskDirection::PureToMixed || trace_m2p.direction != TaskDirection::MixedToPure {
        return Err(argument("expected a pure-to-mixed trace followed by a mixed-to-pure trace"));
    }
    if trace_p2m.reservoir_size != trace_m2p.reservoir_size
        || trace_p2m.iterations != trace_m2p.iterations
        || trace_p2m.coupling != trace_m2p.coupling
    {
        return Err(argument("traces must share N, n and eta"));
    }
    let edge = trace_p2m.reservoir_size.min(trace_p2m.iterations);
    let mut report = SymmetryReport {
        complement: 0.0,
        reservoir_transpose: 0.0,
        system_transpose: 0.0,
        pairs: 0,
    };
    for a in 0..=edge {
        for b in 1..=edge {
            let (p, m) = (trace_p2m, trace_m2p);
            report.complement = report.complement.max((p.alpha(a, b) + p.beta(b, a) - 1.0).abs());
            report.reservoir_transpose = report.reservoir_transpose.max((p.alpha(a, b) - m.beta(b, a)).abs());
            report.system_transpose = report.system_transpose.max((m.alpha(a, b) - p.beta(b, a)).abs());
            report.pairs += 1;
        }
    }
    Ok(report)
}
