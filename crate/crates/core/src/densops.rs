//! Dense complex operators on registers of qubits.
//!
//! Qubit `0` is the leftmost tensor factor, i.e. the most significant bit of
//! a computational-basis index. Every routine here follows that convention,
//! and [`partial_trace`] keeps the surviving qubits in ascending order.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{argument, Error, Result};

/// Tolerance for the structural invariants of density and unitary matrices.
pub const INVARIANT_TOL: f64 = 1e-10;

/// Tolerance for algebraic identities between two evaluation routes.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Eigenvalues at or below this threshold do not contribute to an entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Magnitude of a qubit Bloch vector along the shared measurement axis.
///
/// The scalar `r` stands for the diagonal state `diag((1 + r)/2, (1 - r)/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BlochScalar(f64);

impl BlochScalar {
    /// Accepts `|r| <= 1`; values outside by less than [`IDENTITY_TOL`] are
    /// clamped onto the sphere.
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r.abs() > 1.0 + IDENTITY_TOL {
            return Err(argument(format!("Bloch magnitude {r} lies outside [-1, 1]")));
        }
        Ok(BlochScalar(r.clamp(-1.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_state(self) -> DensityMatrix {
        let p = 0.5 * (1.0 + self.0);
        let mut data = DMatrix::zeros(2, 2);
        data[(0, 0)] = Complex64::new(p, 0.0);
        data[(1, 1)] = Complex64::new(1.0 - p, 0.0);
        DensityMatrix { data, qubits: 1 }
    }
}

/// Worst-case deviations of a matrix from the density-operator axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    /// `max |rho[i][j] - conj(rho[j][i])|`
    pub hermiticity: f64,
    /// `|Tr(rho) - 1|`
    pub trace_error: f64,
    /// Smallest eigenvalue of the Hermitian part; `None` when not computed.
    pub min_eigenvalue: Option<f64>,
}

impl InvariantReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.hermiticity <= tol
            && self.trace_error <= tol
            && self.min_eigenvalue.is_none_or(|e| e >= -tol)
    }
}

/// A density operator on `qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<Complex64>,
    qubits: usize,
}

impl DensityMatrix {
    /// Wraps a matrix after checking shape and the Hermitian, unit-trace and
    /// positivity invariants at [`INVARIANT_TOL`].
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let qubits = qubit_count(&data)?;
        let rho = DensityMatrix { data, qubits };
        rho.check_invariants(INVARIANT_TOL)?;
        Ok(rho)
    }

    pub(crate) fn from_raw(data: DMatrix<Complex64>, qubits: usize) -> Self {
        debug_assert_eq!(data.nrows(), 1 << qubits);
        DensityMatrix { data, qubits }
    }

    /// `1 / 2^m` on `m` qubits.
    pub fn maximally_mixed(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        let data = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { data, qubits }
    }

    /// The projector `|index><index|` on `m` qubits.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(argument(format!("basis index {index} out of range for {qubits} qubits")));
        }
        let mut data = DMatrix::zeros(dim, dim);
        data[(index, index)] = ONE;
        Ok(DensityMatrix { data, qubits })
    }

    /// `|psi><psi|` for a (not necessarily normalised) state vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(argument("state vector has zero or non-finite norm"));
        }
        let qubits = qubit_count_of_dim(psi.len())?;
        let dim = psi.len();
        let data = DMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(DensityMatrix { data, qubits })
    }

    /// Random state `G G† / Tr(G G†)` with `G` a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Self {
        let dim = 1usize << qubits;
        let g = ginibre(dim, rng);
        let mut data = &g * g.adjoint();
        let tr = data.trace();
        data /= tr;
        DensityMatrix { data: hermitian_part(&data), qubits }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Hermiticity and trace deviations, plus the minimum eigenvalue when
    /// `with_spectrum` is set.
    pub fn invariant_report(&self, with_spectrum: bool) -> InvariantReport {
        let dim = self.dim();
        let mut hermiticity: f64 = 0.0;
        for j in 0..dim {
            for i in j..dim {
                let d = (self.data[(i, j)] - self.data[(j, i)].conj()).norm();
                hermiticity = hermiticity.max(d);
            }
        }
        let trace_error = (self.trace() - ONE).norm();
        let min_eigenvalue = with_spectrum.then(|| {
            self.eigenvalues()
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        });
        InvariantReport {
            hermiticity,
            trace_error,
            min_eigenvalue,
        }
    }

    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        let report = self.invariant_report(true);
        if report.holds(tol) {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "density matrix on {} qubits fails invariants: {:?}",
                self.qubits, report
            )))
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_part(&self.data)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `U rho U†`.
    pub fn conjugate(&self, u: &UnitaryMatrix) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(argument(format!(
                "unitary of dim {} cannot act on a state of dim {}",
                u.dim(),
                self.dim()
            )));
        }
        let data = &u.data * &self.data * u.data.adjoint();
        Ok(DensityMatrix::from_raw(data, self.qubits))
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, lambda: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(argument(format!("mixing weight {lambda} outside [0, 1]")));
        }
        if self.dim() != other.dim() {
            return Err(argument("cannot mix states of different dimension"));
        }
        let data = self.data.map(|z| z * lambda) + other.data.map(|z| z * (1.0 - lambda));
        Ok(DensityMatrix::from_raw(data, self.qubits))
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// In-place conjugation by a two-qubit gate acting on qubits `a` and `b`,
    /// with `a` the more significant factor of the gate's 4x4 basis.
    ///
    /// Cost is `O(dim^2)`; the full embedded unitary is never formed.
    pub(crate) fn conjugate_two_qubit(&mut self, gate: &Matrix4<Complex64>, a: usize, b: usize) {
        let m = self.qubits;
        debug_assert!(a < m && b < m && a != b);
        let mask_a = 1usize << (m - 1 - a);
        let mask_b = 1usize << (m - 1 - b);
        let dim = self.dim();
        let groups: Vec<[usize; 4]> = (0..dim)
            .filter(|i| i & (mask_a | mask_b) == 0)
            .map(|i| [i, i | mask_b, i | mask_a, i | mask_a | mask_b])
            .collect();
        let gate_conj = gate.map(|z| z.conj());

        // rho <- G rho: mixes rows inside each column.
        for c in 0..dim {
            let mut col = self.data.column_mut(c);
            for idx in &groups {
                let v = [col[idx[0]], col[idx[1]], col[idx[2]], col[idx[3]]];
                for (r, &target) in idx.iter().enumerate() {
                    col[target] = gate[(r, 0)] * v[0]
                        + gate[(r, 1)] * v[1]
                        + gate[(r, 2)] * v[2]
                        + gate[(r, 3)] * v[3];
                }
            }
        }
        // rho <- rho G†: mixes columns inside each row.
        for idx in &groups {
            for r in 0..dim {
                let v = [
                    self.data[(r, idx[0])],
                    self.data[(r, idx[1])],
                    self.data[(r, idx[2])],
                    self.data[(r, idx[3])],
                ];
                for (s, &target) in idx.iter().enumerate() {
                    self.data[(r, target)] = v[0] * gate_conj[(s, 0)]
                        + v[1] * gate_conj[(s, 1)]
                        + v[2] * gate_conj[(s, 2)]
                        + v[3] * gate_conj[(s, 3)];
                }
            }
        }
    }
}

/// A unitary operator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    data: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    /// Wraps a square matrix after checking `max |U U† - 1| <= INVARIANT_TOL`.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(argument("unitary must be a non-empty square matrix"));
        }
        let u = UnitaryMatrix { data };
        let dev = u.unitarity_deviation();
        if dev > INVARIANT_TOL {
            return Err(Error::Invariant(format!("matrix is not unitary (deviation {dev:e})")));
        }
        Ok(u)
    }

    pub(crate) fn from_raw(data: DMatrix<Complex64>) -> Self {
        UnitaryMatrix { data }
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix {
            data: DMatrix::identity(dim, dim),
        }
    }

    /// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let qr = ginibre(dim, rng).qr();
        let (q, r) = (qr.q(), qr.r());
        let phases = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                let d = r[(i, i)];
                if d.norm() > 0.0 {
                    d / d.norm()
                } else {
                    ONE
                }
            } else {
                ZERO
            }
        });
        UnitaryMatrix { data: q * phases }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// `max |U U† - 1|` over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = &self.data * self.data.adjoint();
        let dim = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { ONE } else { ZERO };
                dev = dev.max((prod[(i, j)] - target).norm());
            }
        }
        dev
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_raw(a.data.kronecker(&b.data), a.qubits + b.qubits)
}

/// Reduced state on the qubits listed in `keep`.
///
/// The kept qubits appear in ascending order of their original index
/// regardless of the order in which they are listed.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = rho.qubits;
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    if let Some(&q) = kept.iter().find(|&&q| q >= m) {
        return Err(argument(format!("qubit index {q} out of range for {m} qubits")));
    }
    if kept.windows(2).any(|w| w[0] == w[1]) {
        return Err(argument("partial trace indices must be distinct"));
    }
    let traced: Vec<usize> = (0..m).filter(|q| !kept.contains(q)).collect();

    let embed = |qs: &[usize], bits: usize| -> usize {
        let k = qs.len();
        qs.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
            if bits >> (k - 1 - pos) & 1 == 1 {
                acc | 1 << (m - 1 - q)
            } else {
                acc
            }
        })
    };
    let kept_full: Vec<usize> = (0..1usize << kept.len()).map(|b| embed(&kept, b)).collect();
    let traced_full: Vec<usize> = (0..1usize << traced.len()).map(|b| embed(&traced, b)).collect();

    let out_dim = kept_full.len();
    let data = DMatrix::from_fn(out_dim, out_dim, |r, c| {
        traced_full
            .iter()
            .map(|&t| rho.data[(kept_full[r] | t, kept_full[c] | t)])
            .sum()
    });
    Ok(DensityMatrix::from_raw(data, kept.len()))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
///
/// Both square roots go through a Hermitian eigendecomposition with
/// negative round-off eigenvalues clamped to zero.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(argument(format!(
            "fidelity needs equal dimensions, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sqrt_rho = psd_sqrt(&rho.data);
    let inner = hermitian_part(&(&sqrt_rho * &sigma.data * &sqrt_rho));
    let ev = inner.symmetric_eigenvalues();
    // Eigenvalues at rounding level would add O(sqrt(eps)) noise to the sum.
    let floor = ev.iter().fold(0.0f64, |m, &l| m.max(l)) * f64::EPSILON * ev.len() as f64;
    let root_sum: f64 = ev.iter().filter(|&&l| l > floor).map(|&l| l.sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Closed-form qubit fidelity `Tr(rho sigma) + 2 sqrt(det rho det sigma)`.
pub fn qubit_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.qubits != 1 || sigma.qubits != 1 {
        return Err(argument("qubit_fidelity takes single-qubit states"));
    }
    let overlap = (&rho.data * &sigma.data).trace().re;
    let det = |m: &DMatrix<Complex64>| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    let dets = (det(&rho.data) * det(&sigma.data)).max(0.0);
    Ok((overlap + 2.0 * dets.sqrt()).clamp(0.0, 1.0))
}

/// Fidelity of two diagonal qubit states given by their Bloch magnitudes.
pub fn qubit_fidelity_bloch(alpha: BlochScalar, beta: BlochScalar) -> f64 {
    let (a, b) = (alpha.0, beta.0);
    let cross = ((1.0 - a * a) * (1.0 - b * b)).max(0.0).sqrt();
    (0.5 * (1.0 + a * b + cross)).clamp(0.0, 1.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > ENTROPY_CUTOFF)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// `h((1 + |r|)/2)` with `h` the binary entropy in bits.
pub fn binary_entropy_bloch(r: BlochScalar) -> f64 {
    let p = 0.5 * (1.0 + r.0.abs());
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

fn qubit_count(data: &DMatrix<Complex64>) -> Result<usize> {
    if data.nrows() != data.ncols() {
        return Err(argument(format!(
            "matrix must be square, got {}x{}",
            data.nrows(),
            data.ncols()
        )));
    }
    qubit_count_of_dim(data.nrows())
}

fn qubit_count_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(argument(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let roots = DMatrix::from_diagonal(
        &eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    );
    &eig.eigenvectors * roots * eig.eigenvectors.adjoint()
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x5eed)
    }

    fn bell() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[
            Complex64::new(h, 0.0),
            ZERO,
            ZERO,
            Complex64::new(h, 0.0),
        ])
        .unwrap()
    }

    // Element-wise Kronecker product written from the index definition.
    fn kron_reference(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (da, db) = (a.nrows(), b.nrows());
        let mut out = DMatrix::zeros(da * db, da * db);
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k, j * db + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn tensor_of_maximally_mixed_is_maximally_mixed() {
        let t = tensor(&DensityMatrix::maximally_mixed(1), &DensityMatrix::maximally_mixed(1));
        assert!(t.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < IDENTITY_TOL);
    }

    #[test]
    fn tensor_of_basis_states() {
        let t = tensor(&DensityMatrix::basis(1, 0).unwrap(), &DensityMatrix::basis(1, 1).unwrap());
        assert_eq!(t, DensityMatrix::basis(2, 0b01).unwrap());
    }

    #[test]
    fn tensor_matches_elementwise_reference_and_trace_multiplies() {
        let mut rng = rng();
        for _ in 0..10 {
            let a = DensityMatrix::random(1, &mut rng);
            let b = DensityMatrix::random(2, &mut rng);
            let t = tensor(&a, &b);
            let reference = kron_reference(a.matrix(), b.matrix());
            let diff = (t.matrix() - &reference).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < IDENTITY_TOL);
            assert!((t.trace() - a.trace() * b.trace()).norm() < IDENTITY_TOL);
            assert!(t.invariant_report(true).holds(INVARIANT_TOL));
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = rng();
        let a = DensityMatrix::random(1, &mut rng);
        let b = DensityMatrix::random(1, &mut rng);
        let ab = tensor(&a, &b);
        assert!(partial_trace(&ab, &[0]).unwrap().max_abs_diff(&a) < IDENTITY_TOL);
        assert!(partial_trace(&ab, &[1]).unwrap().max_abs_diff(&b) < IDENTITY_TOL);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let r = partial_trace(&bell(), &[0]).unwrap();
        assert!(r.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < IDENTITY_TOL);
    }

    #[test]
    fn partial_trace_compose_equals_direct() {
        let mut rng = rng();
        let rho = DensityMatrix::random(3, &mut rng);
        let step = partial_trace(&partial_trace(&rho, &[0, 1]).unwrap(), &[0]).unwrap();
        let direct = partial_trace(&rho, &[0]).unwrap();
        assert!(step.max_abs_diff(&direct) < IDENTITY_TOL);
        assert!((direct.trace() - ONE).norm() < IDENTITY_TOL);
    }

    #[test]
    fn partial_trace_keeps_ascending_order() {
        let a = DensityMatrix::basis(1, 0).unwrap();
        let b = DensityMatrix::basis(1, 1).unwrap();
        let c = DensityMatrix::maximally_mixed(1);
        let abc = tensor(&tensor(&a, &b), &c);
        let kept = partial_trace(&abc, &[2, 0]).unwrap();
        assert!(kept.max_abs_diff(&tensor(&a, &c)) < IDENTITY_TOL);
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&rho, &[1, 1]), Err(Error::Argument(_))));
    }

    #[test]
    fn fidelity_basic_values() {
        let zero = DensityMatrix::basis(1, 0).unwrap();
        let one = DensityMatrix::basis(1, 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!((uhlmann_fidelity(&zero, &zero).unwrap() - 1.0).abs() < IDENTITY_TOL);
        assert!(uhlmann_fidelity(&zero, &one).unwrap().abs() < IDENTITY_TOL);
        assert!((uhlmann_fidelity(&zero, &mixed).unwrap() - 0.5).abs() < IDENTITY_TOL);
        assert!((uhlmann_fidelity(&mixed, &zero).unwrap() - 0.5).abs() < IDENTITY_TOL);
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let r = uhlmann_fidelity(&DensityMatrix::maximally_mixed(1), &DensityMatrix::maximally_mixed(2));
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn fidelity_eigen_route_matches_qubit_formula() {
        let mut rng = rng();
        for _ in 0..100 {
            let rho = DensityMatrix::random(1, &mut rng);
            let sigma = DensityMatrix::random(1, &mut rng);
            let eig = uhlmann_fidelity(&rho, &sigma).unwrap();
            let closed = qubit_fidelity(&rho, &sigma).unwrap();
            assert!((eig - closed).abs() < INVARIANT_TOL, "{eig} vs {closed}");
            let swapped = uhlmann_fidelity(&sigma, &rho).unwrap();
            assert!((eig - swapped).abs() < INVARIANT_TOL);
        }
    }

    #[test]
    fn fidelity_with_pure_state_is_expectation() {
        let mut rng = rng();
        let rho = DensityMatrix::random(2, &mut rng);
        let psi: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let expectation: Complex64 = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| psi[i].conj() * rho.matrix()[(i, j)] * psi[j])
            .sum();
        let f = uhlmann_fidelity(&rho, &DensityMatrix::from_pure(&psi).unwrap()).unwrap();
        assert!((f - expectation.re).abs() < 1e-9);
    }

    #[test]
    fn bloch_fidelity_values() {
        let b = |r| BlochScalar::new(r).unwrap();
        assert_eq!(qubit_fidelity_bloch(b(0.0), b(0.0)), 1.0);
        assert_eq!(qubit_fidelity_bloch(b(1.0), b(1.0)), 1.0);
        assert_eq!(qubit_fidelity_bloch(b(1.0), b(-1.0)), 0.0);
        assert_eq!(qubit_fidelity_bloch(b(0.0), b(1.0)), 0.5);
    }

    #[test]
    fn bloch_fidelity_agrees_with_uhlmann_on_grid() {
        for i in 0..=20 {
            for j in 0..=20 {
                let a = BlochScalar::new(-1.0 + 0.1 * i as f64).unwrap();
                let b = BlochScalar::new(-1.0 + 0.1 * j as f64).unwrap();
                let direct = uhlmann_fidelity(&a.to_state(), &b.to_state()).unwrap();
                assert!((qubit_fidelity_bloch(a, b) - direct).abs() < IDENTITY_TOL);
            }
        }
    }

    #[test]
    fn entropy_values() {
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(1)) - 1.0).abs() < IDENTITY_TOL);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(3)) - 3.0).abs() < IDENTITY_TOL);
        assert!(von_neumann_entropy(&DensityMatrix::basis(1, 0).unwrap()).abs() < IDENTITY_TOL);
        assert!(von_neumann_entropy(&bell()).abs() < 1e-9);
    }

    #[test]
    fn binary_entropy_matches_matrix_route() {
        let b = |r| BlochScalar::new(r).unwrap();
        assert_eq!(binary_entropy_bloch(b(0.0)), 1.0);
        assert_eq!(binary_entropy_bloch(b(1.0)), 0.0);
        assert_eq!(binary_entropy_bloch(b(-1.0)), 0.0);
        for r in [0.5, 0.6, -0.6] {
            let matrix = von_neumann_entropy(&b(r).to_state());
            assert!((binary_entropy_bloch(b(r)) - matrix).abs() < IDENTITY_TOL);
        }
        let p = 0.8f64;
        let diag = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
        assert!((binary_entropy_bloch(b(0.6)) - diag).abs() < IDENTITY_TOL);
    }

    #[test]
    fn entropy_is_unitarily_invariant() {
        let mut rng = rng();
        for q in 1..=3 {
            let rho = DensityMatrix::random(q, &mut rng);
            let u = UnitaryMatrix::random(1 << q, &mut rng);
            assert!(u.unitarity_deviation() < INVARIANT_TOL);
            let rotated = rho.conjugate(&u).unwrap();
            assert!((von_neumann_entropy(&rotated) - von_neumann_entropy(&rho)).abs() < 1e-9);
        }
    }

    #[test]
    fn constructor_rejects_invalid_matrices() {
        let not_square = DMatrix::<Complex64>::zeros(2, 4);
        assert!(matches!(DensityMatrix::new(not_square), Err(Error::Argument(_))));
        let three = DMatrix::<Complex64>::identity(3, 3);
        assert!(matches!(DensityMatrix::new(three), Err(Error::Argument(_))));
        let mut negative = DMatrix::<Complex64>::zeros(2, 2);
        negative[(0, 0)] = Complex64::new(1.5, 0.0);
        negative[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::Invariant(_))));
        assert!(BlochScalar::new(1.5).is_err());
    }

    #[test]
    fn two_qubit_kernel_matches_embedded_unitary() {
        let mut rng = rng();
        let rho = DensityMatrix::random(3, &mut rng);
        let u2 = UnitaryMatrix::random(4, &mut rng);
        let gate = Matrix4::from_fn(|i, j| u2.matrix()[(i, j)]);
        // Gate on qubits (0, 2) embedded by permuting the basis.
        let embedded = DMatrix::from_fn(8, 8, |row, col| {
            let bits = |x: usize| ((x >> 2) & 1, (x >> 1) & 1, x & 1);
            let (r0, r1, r2) = bits(row);
            let (c0, c1, c2) = bits(col);
            if r1 != c1 {
                ZERO
            } else {
                gate[(2 * r0 + r2, 2 * c0 + c2)]
            }
        });
        let expected = rho.conjugate(&UnitaryMatrix::from_raw(embedded)).unwrap();
        let mut fast = rho.clone();
        fast.conjugate_two_qubit(&gate, 0, 2);
        assert!(fast.max_abs_diff(&expected) < IDENTITY_TOL);
    }
}
