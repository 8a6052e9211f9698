//! Exact density-matrix simulation of the homogenizer.
//!
//! Only the reservoir and the current system qubit are kept live. A system
//! qubit that has crossed the reservoir is never touched again, so tracing
//! it out immediately leaves the dynamics of the remaining qubits exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::collision::{apply_pair_in_place, Coupling};
use crate::densops::{partial_trace, qubit_fidelity, tensor, DensityMatrix, INVARIANT_TOL};
use crate::error::{argument, Result};
use crate::limits::Limits;
use crate::metrics::{Engine, MetricsRecord};
use crate::recurrence::TaskDirection;

/// An `N`-qubit reservoir evolved without the product-state approximation.
#[derive(Debug, Clone)]
pub struct ExactHomogenizer {
    direction: TaskDirection,
    coupling: Coupling,
    reservoir: DensityMatrix,
    iterations_done: usize,
    check_spectrum: bool,
}

/// Outcome of one homogenization.
#[derive(Debug, Clone)]
pub struct ExactStep {
    /// `1 - F(system, xi_0)`
    pub epsilon: f64,
    /// The homogenized system qubit.
    pub system: DensityMatrix,
}

impl ExactHomogenizer {
    pub fn new(direction: TaskDirection, reservoir_size: usize, coupling: Coupling) -> Result<Self> {
        Self::with_limits(direction, reservoir_size, coupling, &Limits::default())
    }

    pub fn with_limits(
        direction: TaskDirection,
        reservoir_size: usize,
        coupling: Coupling,
        limits: &Limits,
    ) -> Result<Self> {
        if reservoir_size == 0 {
            return Err(argument("reservoir size must be at least 1"));
        }
        limits.check_exact(reservoir_size)?;
        let xi = direction.fresh_reservoir_state();
        let reservoir = (1..reservoir_size).fold(xi.clone(), |acc, _| tensor(&acc, &xi));
        Ok(ExactHomogenizer {
            direction,
            coupling,
            reservoir,
            iterations_done: 0,
            check_spectrum: true,
        })
    }

    /// Skips the eigenvalue part of the per-step invariant check. Hermiticity
    /// and trace are still verified.
    pub fn without_spectrum_checks(mut self) -> Self {
        self.check_spectrum = false;
        self
    }

    pub fn direction(&self) -> TaskDirection {
        self.direction
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn reservoir_size(&self) -> usize {
        self.reservoir.qubits()
    }

    pub fn iterations_done(&self) -> usize {
        self.iterations_done
    }

    pub fn reservoir(&self) -> &DensityMatrix {
        &self.reservoir
    }

    /// Reduced state of reservoir qubit `j` (0-based).
    pub fn marginal(&self, j: usize) -> Result<DensityMatrix> {
        partial_trace(&self.reservoir, &[j])
    }

    /// The reservoir before any use, `xi_0^{⊗N}`.
    pub fn initial_reservoir(&self) -> DensityMatrix {
        let xi = self.direction.fresh_reservoir_state();
        (1..self.reservoir_size()).fold(xi.clone(), |acc, _| tensor(&acc, &xi))
    }

    /// Couples a fresh system qubit to reservoir qubits `0..N` in order,
    /// records its error and traces it out.
    pub fn step(&mut self) -> Result<ExactStep> {
        let n_res = self.reservoir_size();
        let mut joint = tensor(&self.reservoir, &self.direction.fresh_system_state());
        for q in 0..n_res {
            apply_pair_in_place(&mut joint, q, n_res, &self.coupling)?;
        }
        let system = partial_trace(&joint, &[n_res])?;
        let reference = self.direction.fresh_reservoir_state();
        let epsilon = 1.0 - qubit_fidelity(&system, &reference)?;
        let reservoir = partial_trace(&joint, &(0..n_res).collect::<Vec<_>>())?;

        let report = reservoir.invariant_report(self.check_spectrum);
        if !report.holds(INVARIANT_TOL) {
            return Err(crate::Error::Invariant(format!(
                "reservoir after iteration {} violates invariants: {report:?}",
                self.iterations_done + 1
            )));
        }
        self.reservoir = reservoir;
        self.iterations_done += 1;
        Ok(ExactStep { epsilon, system })
    }

    /// Fidelity of the full reservoir with its initial product state.
    ///
    /// For a pure initial reservoir this is `<0...0|rho|0...0>`; for the
    /// maximally mixed one it is `(Tr sqrt(rho))^2 / 2^N`.
    pub fn robustness(&self) -> f64 {
        match self.direction {
            TaskDirection::MixedToPure => self.reservoir.matrix()[(0, 0)].re.clamp(0.0, 1.0),
            TaskDirection::PureToMixed => {
                let root_trace: f64 = self
                    .reservoir
                    .eigenvalues()
                    .into_iter()
                    .map(|l| l.max(0.0).sqrt())
                    .sum();
                (root_trace * root_trace / self.reservoir.dim() as f64).clamp(0.0, 1.0)
            }
        }
    }
}

/// Exact metrics after each of `n` iterations of an `N`-qubit machine.
pub fn exact_metrics(
    direction: TaskDirection,
    reservoir_size: usize,
    iterations: usize,
    coupling: Coupling,
) -> Result<Vec<MetricsRecord>> {
    exact_metrics_with_limits(direction, reservoir_size, iterations, coupling, &Limits::default())
}

pub fn exact_metrics_with_limits(
    direction: TaskDirection,
    reservoir_size: usize,
    iterations: usize,
    coupling: Coupling,
    limits: &Limits,
) -> Result<Vec<MetricsRecord>> {
    if iterations == 0 {
        return Err(argument("need at least one iteration"));
    }
    let mut machine = ExactHomogenizer::with_limits(direction, reservoir_size, coupling, limits)?;
    (1..=iterations)
        .map(|n| {
            let step = machine.step()?;
            Ok(MetricsRecord::new(
                Engine::Exact,
                direction,
                coupling.eta(),
                reservoir_size,
                n,
                step.epsilon.max(0.0),
                machine.robustness().ln(),
            ))
        })
        .collect()
}

/// The machine map `rho_C -> Tr_S(U_N ... U_1 (rho_C ⊗ rho_S) U_1† ... U_N†)`.
pub fn homogenize_machine(machine: &DensityMatrix, substrate: &DensityMatrix, coupling: &Coupling) -> Result<DensityMatrix> {
    if substrate.qubits() != 1 {
        return Err(argument("substrate must be a single qubit"));
    }
    let n_res = machine.qubits();
    let mut joint = tensor(machine, substrate);
    for q in 0..n_res {
        apply_pair_in_place(&mut joint, q, n_res, coupling)?;
    }
    partial_trace(&joint, &(0..n_res).collect::<Vec<_>>())
}

/// Largest entry-wise deviation of the machine map from affinity over
/// `trials` random pairs of machine states, mixing weights and substrates.
pub fn channel_linearity_check(coupling: Coupling, reservoir_size: usize, trials: usize, seed: u64) -> Result<f64> {
    if !(1..=3).contains(&reservoir_size) {
        return Err(argument("linearity check runs on 1 to 3 reservoir qubits"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let a = DensityMatrix::random(reservoir_size, &mut rng);
        let b = DensityMatrix::random(reservoir_size, &mut rng);
        let substrate = DensityMatrix::random(1, &mut rng);
        let lambda: f64 = rand::Rng::random(&mut rng);
        worst = worst.max(linearity_deviation(&a, &b, &substrate, lambda, &coupling)?);
    }
    Ok(worst)
}

/// `max |map(l A + (1-l) B) - l map(A) - (1-l) map(B)|`.
pub fn linearity_deviation(
    a: &DensityMatrix,
    b: &DensityMatrix,
    substrate: &DensityMatrix,
    lambda: f64,
    coupling: &Coupling,
) -> Result<f64> {
    let mixed_in = homogenize_machine(&a.mix(lambda, b)?, substrate, coupling)?;
    let mixed_out = homogenize_machine(a, substrate, coupling)?.mix(lambda, &homogenize_machine(b, substrate, coupling)?)?;
    Ok(mixed_in.max_abs_diff(&mixed_out))
}
