//! Born-rule probabilities, joint-projection supports and common eigenbases
//! for the operators of a [`KsGraph`].
//!
//! Support and eigenspace structure are decided on exact projections; only
//! probabilities against a density operator use floating point.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{all_sign_tuples, KsGraph};
use crate::matrix::ComplexMatrix;
use crate::pauli::{PauliError, PauliString, Sign};

/// Tolerance for hermiticity, unit trace and positive semidefiniteness.
pub const DENSITY_TOLERANCE: f64 = 1e-10;
/// Tolerance for deciding that a probability is 0 or 1.
pub const EIGENSTATE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("dimension mismatch: state has dimension {state}, operator needs {operator}")]
    DimensionMismatch { state: usize, operator: usize },
    #[error("density matrix is not square or is empty")]
    NotSquare,
    #[error("density matrix is not hermitian")]
    NotHermitian,
    #[error("density matrix trace {0} differs from 1")]
    Trace(f64),
    #[error("density matrix has negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("state vector has zero norm")]
    ZeroVector,
    #[error("state vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("outcome tuple has {got} entries for {expected} operators")]
    TupleLength { got: usize, expected: usize },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// A validated density operator: hermitian, unit trace, PSD within
/// [`DENSITY_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, QuantumError> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(QuantumError::NotSquare);
        }
        if (&matrix - matrix.adjoint()).iter().any(|z| z.norm() > DENSITY_TOLERANCE) {
            return Err(QuantumError::NotHermitian);
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(QuantumError::Trace(trace.re));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -DENSITY_TOLERANCE {
            return Err(QuantumError::NotPositive(min_eig));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|` for the normalized amplitudes.
    pub fn from_state_vector(amplitudes: &[Complex64]) -> Result<Self, QuantumError> {
        let n = amplitudes.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(QuantumError::BadLength(n));
        }
        let psi = DVector::from_column_slice(amplitudes);
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(QuantumError::ZeroVector);
        }
        let psi = psi / Complex64::new(norm, 0.0);
        Self::new(&psi * psi.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let scale = Complex64::new(1.0 / dim as f64, 0.0);
        Self {
            matrix: DMatrix::identity(dim, dim) * scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `Tr(ρ P)` for an exact projection-like operator `P`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64, QuantumError> {
        if op.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch {
                state: self.dim(),
                operator: op.dim(),
            });
        }
        let n = self.dim();
        let mut acc = Complex64::zero();
        for r in 0..n {
            for c in 0..n {
                let e = op.get(c, r);
                if !e.is_zero() {
                    acc += self.matrix[(r, c)] * e.to_complex64();
                }
            }
        }
        Ok(acc.re)
    }
}

/// Born-rule probability of `eigenvalue` for the observable `p` in state `rho`.
pub fn born_probability(rho: &DensityOperator, p: &PauliString, eigenvalue: Sign) -> Result<f64, QuantumError> {
    let proj = p.spectral_projection(eigenvalue)?;
    rho.expectation(&proj)
}

fn check_mutually_commuting(ops: &[PauliString]) -> Result<(), PauliError> {
    for (k, a) in ops.iter().enumerate() {
        for b in &ops[k + 1..] {
            if !a.commutes(b)? {
                return Err(PauliError::NotCommuting(a.clone(), b.clone()));
            }
        }
    }
    Ok(())
}

/// Exact product `Π P^{outcome_k}` of spectral projections of commuting operators.
pub fn joint_projection(ops: &[PauliString], outcome: &[Sign]) -> Result<ComplexMatrix, QuantumError> {
    if ops.len() != outcome.len() {
        return Err(QuantumError::TupleLength {
            got: outcome.len(),
            expected: ops.len(),
        });
    }
    let first = ops.first().ok_or(PauliError::Empty)?;
    check_mutually_commuting(ops)?;
    let mut acc = ComplexMatrix::identity(1usize << first.num_qubits());
    for (op, &s) in ops.iter().zip(outcome) {
        acc = &acc * &op.spectral_projection(s)?;
    }
    Ok(acc)
}

/// `Tr(ρ Π P^{outcome_k})` for mutually commuting operators.
pub fn joint_born_probability(
    rho: &DensityOperator,
    ops: &[PauliString],
    outcome: &[Sign],
) -> Result<f64, QuantumError> {
    let proj = joint_projection(ops, outcome)?;
    rho.expectation(&proj)
}

/// Per edge, the outcome tuples whose joint projection is a nonzero operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportTable {
    pub edges: Vec<Vec<Vec<Sign>>>,
}

/// State-independent support of every hyperedge, decided exactly.
pub fn support_table(graph: &KsGraph) -> Result<SupportTable, QuantumError> {
    let mut edges = Vec::with_capacity(graph.edges().len());
    for e in 0..graph.edges().len() {
        let ops = graph.edge_operators(e);
        let mut tuples = Vec::new();
        for t in all_sign_tuples(ops.len()) {
            if !joint_projection(&ops, &t)?.is_zero() {
                tuples.push(t);
            }
        }
        edges.push(tuples);
    }
    Ok(SupportTable { edges })
}

/// A simultaneous eigenvector together with its eigenvalue for each operator.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonEigenvector {
    pub vector: DVector<Complex64>,
    pub eigenvalues: Vec<Sign>,
}

/// Orthonormal basis of simultaneous eigenvectors of commuting ±1 observables.
///
/// The space is split by each operator's ±1 projections in turn; the resulting
/// joint projections are exact, and only the final orthonormalization of their
/// column spaces uses floating point. Output is ordered by eigenvalue tuple.
pub fn common_eigenbasis(ops: &[PauliString]) -> Result<Vec<CommonEigenvector>, QuantumError> {
    let first = ops.first().ok_or(PauliError::Empty)?;
    check_mutually_commuting(ops)?;
    let dim = 1usize << first.num_qubits();
    let mut blocks: Vec<(Vec<Sign>, ComplexMatrix)> = vec![(Vec::new(), ComplexMatrix::identity(dim))];
    for op in ops {
        let plus = op.spectral_projection(Sign::Plus)?;
        let minus = op.spectral_projection(Sign::Minus)?;
        let mut next = Vec::with_capacity(blocks.len() * 2);
        for (tuple, proj) in blocks {
            for (s, p) in [(Sign::Plus, &plus), (Sign::Minus, &minus)] {
                let refined = &proj * p;
                if !refined.is_zero() {
                    let mut t = tuple.clone();
                    t.push(s);
                    next.push((t, refined));
                }
            }
        }
        blocks = next;
    }
    let mut basis = Vec::with_capacity(dim);
    for (tuple, proj) in blocks {
        for vector in column_space_basis(&proj) {
            basis.push(CommonEigenvector {
                vector,
                eigenvalues: tuple.clone(),
            });
        }
    }
    Ok(basis)
}

/// Orthonormal basis of the range of an exact orthogonal projection.
fn column_space_basis(proj: &ComplexMatrix) -> Vec<DVector<Complex64>> {
    let rank = proj.trace().re;
    let rank = *rank.numer() / *rank.denom();
    let m = proj.to_dmatrix();
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for c in 0..m.ncols() {
        if basis.len() as i64 == rank {
            break;
        }
        let mut v: DVector<Complex64> = m.column(c).into_owned();
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-9 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    basis
}

/// Whether every joint outcome of the commuting operators has probability 0 or
/// 1 in `rho`, within [`EIGENSTATE_TOLERANCE`].
pub fn is_operational_eigenstate(rho: &DensityOperator, ops: &[PauliString]) -> Result<bool, QuantumError> {
    for t in all_sign_tuples(ops.len()) {
        let p = joint_born_probability(rho, ops, &t)?;
        if p.abs() > EIGENSTATE_TOLERANCE && (p - 1.0).abs() > EIGENSTATE_TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Density operator `|ψ⟩⟨ψ|` for a (normalized) eigenvector.
pub fn projector_state(vector: &DVector<Complex64>) -> Result<DensityOperator, QuantumError> {
    DensityOperator::from_state_vector(vector.as_slice())
}
