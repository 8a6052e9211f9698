//! The partial-swap interaction `U = cos(eta) 1 + i sin(eta) S`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use crate::densops::{BlochScalar, DensityMatrix, UnitaryMatrix};
use crate::error::{argument, Result};

/// Coupling strength of the partial swap, `0 < eta <= pi/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    eta: f64,
    c2: f64,
    s2: f64,
}

impl Coupling {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= FRAC_PI_2) {
            return Err(argument(format!("coupling eta = {eta} outside (0, pi/2]")));
        }
        let (s, c) = eta.sin_cos();
        Ok(Coupling {
            eta,
            c2: c * c,
            s2: s * s,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `cos^2(eta)`
    pub fn cos2(&self) -> f64 {
        self.c2
    }

    /// `sin^2(eta)`
    pub fn sin2(&self) -> f64 {
        self.s2
    }

    /// `ln(cos^2 eta)`, evaluated without cancellation for small `eta`.
    pub(crate) fn ln_cos2(&self) -> f64 {
        (-self.s2).ln_1p()
    }

    /// Raw Bloch update `(alpha, beta) -> (alpha', beta')`.
    #[inline]
    pub(crate) fn update(&self, alpha: f64, beta: f64) -> (f64, f64) {
        (
            self.s2 * beta + self.c2 * alpha,
            self.c2 * beta + self.s2 * alpha,
        )
    }

    pub(crate) fn gate(&self) -> Matrix4<Complex64> {
        let (s, c) = self.eta.sin_cos();
        let diag = Complex64::new(c, 0.0) + Complex64::new(0.0, s);
        let cc = Complex64::new(c, 0.0);
        let is = Complex64::new(0.0, s);
        let z = Complex64::new(0.0, 0.0);
        // Basis |00>, |01>, |10>, |11>; S exchanges |01> and |10>.
        Matrix4::new(
            diag, z, z, z, //
            z, cc, is, z, //
            z, is, cc, z, //
            z, z, z, diag,
        )
    }
}

/// The 4x4 partial-swap unitary.
pub fn partial_swap_unitary(coupling: &Coupling) -> UnitaryMatrix {
    let g = coupling.gate();
    UnitaryMatrix::from_raw(DMatrix::from_fn(4, 4, |i, j| g[(i, j)]))
}

/// Conjugates `joint` by the partial swap embedded on qubits `a` and `b`.
pub fn apply_pair(joint: &DensityMatrix, a: usize, b: usize, coupling: &Coupling) -> Result<DensityMatrix> {
    let mut out = joint.clone();
    apply_pair_in_place(&mut out, a, b, coupling)?;
    Ok(out)
}

pub(crate) fn apply_pair_in_place(
    joint: &mut DensityMatrix,
    a: usize,
    b: usize,
    coupling: &Coupling,
) -> Result<()> {
    let m = joint.qubits();
    if a == b || a >= m || b >= m {
        return Err(argument(format!(
            "partial swap needs two distinct qubits below {m}, got ({a}, {b})"
        )));
    }
    joint.conjugate_two_qubit(&coupling.gate(), a, b);
    Ok(())
}

/// Marginal Bloch magnitudes after one partial swap of a product state
/// `rho(beta) ⊗ xi(alpha)` with parallel Bloch vectors.
///
/// Returns `(alpha', beta')` with `alpha' = s^2 beta + c^2 alpha` and
/// `beta' = c^2 beta + s^2 alpha`.
pub fn reduced_update(alpha: BlochScalar, beta: BlochScalar, coupling: &Coupling) -> (BlochScalar, BlochScalar) {
    let (a, b) = coupling.update(alpha.value(), beta.value());
    // Convex combinations of values in [-1, 1] stay there up to one ulp.
    (
        BlochScalar::new(a).expect("convex combination"),
        BlochScalar::new(b).expect("convex combination"),
    )
}
