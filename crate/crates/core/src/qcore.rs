//! Qubit-register primitives: pure states, density matrices, unitaries and the
//! gate kernels used by the circuit model.
//!
//! Basis ordering: qubit 0 is the most significant bit of the basis index, so
//! qubit `i` of an `n`-qubit register lives at bit position `n - 1 - i`.

use serde::{Deserialize, Serialize};

use crate::error::{check_capacity, Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, C64, ONE, ZERO};

/// Largest register handled by state-vector paths.
pub const MAX_STATE_QUBITS: usize = 12;
/// Largest register handled by density-matrix paths.
pub const MAX_DENSITY_QUBITS: usize = 7;

pub const NORM_TOLERANCE: f64 = 1e-10;
pub const UNITARITY_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_SLACK: f64 = 1e-9;

#[inline]
pub(crate) fn bit_position(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Argument(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// A 2x2 unitary acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitGate {
    m: [[C64; 2]; 2],
}

impl SingleQubitGate {
    /// Validates unitarity to within [`UNITARITY_TOLERANCE`].
    pub fn new(m: [[C64; 2]; 2]) -> Result<Self> {
        let gate = Self { m };
        let err = gate.unitarity_error();
        if err > UNITARITY_TOLERANCE {
            return Err(Error::Validation(format!(
                "single-qubit gate is not unitary (max |G†G - I| = {err:e})"
            )));
        }
        Ok(gate)
    }

    pub(crate) fn new_unchecked(m: [[C64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        Self::new_unchecked([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn pauli_x() -> Self {
        Self::new_unchecked([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::new_unchecked([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new_unchecked([[h, h], [h, -h]])
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = self.m;
        Self::new_unchecked([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn unitarity_error(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                let dot = m[0][a].conj() * m[0][b] + m[1][a].conj() * m[1][b];
                let target = if a == b { ONE } else { ZERO };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_row_major(2, 2, vec![self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]])
            .expect("2x2")
    }
}

/// Pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity("state vector", n_qubits, MAX_STATE_QUBITS)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Argument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amps.len())?;
        check_capacity("state vector", n_qubits, MAX_STATE_QUBITS)?;
        let state = Self { n_qubits, amps };
        let err = (state.norm_sqr() - 1.0).abs();
        if err > NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "state is not normalized (| |psi|^2 - 1 | = {err:e})"
            )));
        }
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Argument("cannot normalize a zero or non-finite vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Self::from_amplitudes(amps)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Argument("GHZ state needs at least one qubit".into()));
        }
        let mut s = Self::zero(n_qubits)?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        s.amps[0] = C64::new(h, 0.0);
        let last = s.amps.len() - 1;
        s.amps[last] = C64::new(h, 0.0);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    /// Tensor product `self ⊗ other`, with `self` holding the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_capacity("state vector", n, MAX_STATE_QUBITS)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(Self { n_qubits: n, amps })
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::Argument(format!(
                "qubit index {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies `gate` to qubit `target`.
    pub fn apply_single_qubit_gate(&mut self, gate: &SingleQubitGate, target: usize) -> Result<()> {
        self.check_qubit(target)?;
        let stride = 1usize << bit_position(self.n_qubits, target);
        let [[g00, g01], [g10, g11]] = gate.m;
        for block in self.amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = g00 * x + g01 * y;
                *a1 = g10 * x + g11 * y;
            }
        }
        Ok(())
    }

    /// Multiplies every amplitude `k` by `exp(i·angle·s(k))`, where `s(k)` sums
    /// `z_j z_{j+1}` over adjacent pairs of an open chain and `z = +1` for a
    /// 0 bit, `-1` for a 1 bit.
    pub fn apply_zz_coupling_layer(&mut self, angle: f64) -> Result<()> {
        let n = self.n_qubits;
        if n < 2 {
            return Err(Error::Argument(format!(
                "ZZ coupling needs at least 2 qubits, got {n}"
            )));
        }
        if angle == 0.0 {
            return Ok(());
        }
        let pairs = n as i64 - 1;
        // s(k) = (n-1) - 2·(number of adjacent pairs whose bits differ)
        //      = (n-1) - 2·popcount((k ^ (k >> 1)) & mask).
        let mask = (1usize << (n - 1)) - 1;
        let phases: Vec<C64> = (0..=pairs)
            .map(|flips| C64::from_polar(1.0, angle * (pairs - 2 * flips) as f64))
            .collect();
        for (k, a) in self.amps.iter_mut().enumerate() {
            let flips = ((k ^ (k >> 1)) & mask).count_ones() as usize;
            *a *= phases[flips];
        }
        Ok(())
    }

    /// `Tr[ρ_i²]` for the single-qubit marginal of qubit `i`, computed directly
    /// from amplitude pairs.
    pub fn reduced_qubit_purity(&self, qubit: usize) -> Result<f64> {
        let rho = self.reduced_qubit_density(qubit)?;
        Ok(rho[0][0].norm_sqr() + rho[1][1].norm_sqr() + 2.0 * rho[0][1].norm_sqr())
    }

    /// The 2x2 reduced density matrix of one qubit.
    pub fn reduced_qubit_density(&self, qubit: usize) -> Result<[[C64; 2]; 2]> {
        self.check_qubit(qubit)?;
        let stride = 1usize << bit_position(self.n_qubits, qubit);
        let (mut p0, mut p1, mut coh) = (0.0, 0.0, ZERO);
        for block in self.amps.chunks_exact(2 * stride) {
            let (lo, hi) = block.split_at(stride);
            for (a0, a1) in lo.iter().zip(hi) {
                p0 += a0.norm_sqr();
                p1 += a1.norm_sqr();
                coh += a0 * a1.conj();
            }
        }
        Ok([
            [C64::new(p0, 0.0), coh],
            [coh.conj(), C64::new(p1, 0.0)],
        ])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Argument(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply_unitary(&mut self, u: &Unitary) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::Argument(format!(
                "unitary of dimension {} applied to a state of dimension {}",
                u.dim(),
                self.dim()
            )));
        }
        self.amps = u.matrix().matvec(&self.amps)?;
        Ok(())
    }
}

/// `|⟨a|b⟩|²`.
pub fn fidelity_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// `⟨a|ρ|a⟩`.
pub fn fidelity_pure_mixed(a: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if a.dim() != rho.dim() {
        return Err(Error::Argument(format!(
            "dimension mismatch: state {} vs density matrix {}",
            a.dim(),
            rho.dim()
        )));
    }
    let r = rho.rho.matvec(a.amplitudes())?;
    let val: C64 = a.amplitudes().iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
    Ok(val.re)
}

/// A validated unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    mat: CMatrix,
}

impl Unitary {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Argument(format!(
                "unitary must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let err = mat.unitarity_error();
        if err > UNITARITY_TOLERANCE {
            return Err(Error::Validation(format!(
                "matrix is not unitary (max |U†U - I| = {err:e})"
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(CMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.mat.adjoint())
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Unitary) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Argument(format!(
                "cannot compose unitaries of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self::new_unchecked(self.mat.matmul(&other.mat)?))
    }

    pub fn unitarity_error(&self) -> f64 {
        self.mat.unitarity_error()
    }
}

/// Mixed state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        check_capacity("density matrix", state.n_qubits(), MAX_DENSITY_QUBITS)?;
        let d = state.dim();
        let a = state.amplitudes();
        let mut rho = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                rho[(i, j)] = a[i] * a[j].conj();
            }
        }
        Ok(Self {
            n_qubits: state.n_qubits(),
            rho,
        })
    }

    /// `I/D`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_capacity("density matrix", n_qubits, MAX_DENSITY_QUBITS)?;
        let d = 1usize << n_qubits;
        let mut rho = CMatrix::identity(d);
        rho.scale(C64::new(1.0 / d as f64, 0.0));
        Ok(Self { n_qubits, rho })
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::Argument("density matrix must be square".into()));
        }
        let n_qubits = qubits_for_dim(rho.rows())?;
        check_capacity("density matrix", n_qubits, MAX_DENSITY_QUBITS)?;
        let dm = Self { n_qubits, rho };
        dm.validate()?;
        Ok(dm)
    }

    pub fn validate(&self) -> Result<()> {
        let herr = self.rho.hermiticity_error();
        if herr > NORM_TOLERANCE {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (max |ρ - ρ†| = {herr:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("density matrix has trace {tr}")));
        }
        let min_eig = self.min_eigenvalue()?;
        if min_eig < -POSITIVITY_SLACK {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `Tr[ρ²]`, which for Hermitian ρ equals the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.rho.as_slice().iter().map(C64::norm_sqr).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = hermitian_eigen(&self.rho)?;
        Ok(eig.eigenvalues.first().copied().unwrap_or(0.0))
    }

    /// `ρ ↦ U ρ U†`.
    pub fn conjugate(&mut self, u: &Unitary) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::Argument(format!(
                "unitary of dimension {} applied to a density matrix of dimension {}",
                u.dim(),
                self.dim()
            )));
        }
        let left = u.matrix().matmul(&self.rho)?;
        self.rho = left.matmul(&u.matrix().adjoint())?;
        Ok(())
    }
}

/// `U ρ U†` as a new value.
pub fn conjugate_channel(rho: &DensityMatrix, u: &Unitary) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.conjugate(u)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_state_close(a: &StateVector, b: &[C64], tol: f64) {
        assert_eq!(a.dim(), b.len());
        for (x, y) in a.amplitudes().iter().zip(b) {
            assert!((x - y).norm() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn identity_gate_leaves_state_unchanged() {
        let mut s = StateVector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)]).unwrap();
        let before = s.clone();
        s.apply_single_qubit_gate(&SingleQubitGate::identity(), 1).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn pauli_x_on_qubit_zero_flips_most_significant_bit() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_single_qubit_gate(&SingleQubitGate::pauli_x(), 0).unwrap();
        // |10⟩ is index 2 with qubit 0 as the MSB.
        assert_eq!(s, StateVector::basis(2, 2).unwrap());
    }

    #[test]
    fn hadamard_on_single_qubit() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single_qubit_gate(&SingleQubitGate::hadamard(), 0).unwrap();
        assert_state_close(&s, &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], 1e-15);
    }

    #[test]
    fn gate_target_out_of_range() {
        let mut s = StateVector::zero(2).unwrap();
        let err = s.apply_single_qubit_gate(&SingleQubitGate::hadamard(), 2).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn non_unitary_gate_is_rejected() {
        let err = SingleQubitGate::new([[c(1.0, 0.0), c(1e-6, 0.0)], [ZERO, ONE]]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn zz_phases_two_qubits() {
        let amps = vec![c(0.5, 0.0); 4];
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_zz_coupling_layer(FRAC_PI_4).unwrap();
        let p = C64::from_polar(0.5, FRAC_PI_4);
        let m = C64::from_polar(0.5, -FRAC_PI_4);
        assert_state_close(&s, &[p, m, m, p], 1e-15);
    }

    #[test]
    fn zz_phase_three_qubits_all_zero() {
        let mut s = StateVector::zero(3).unwrap();
        s.apply_zz_coupling_layer(FRAC_PI_4).unwrap();
        // s(000) = 2, phase e^{iπ/2} = i
        assert!((s.amplitudes()[0] - C64::from_polar(1.0, FRAC_PI_2)).norm() < 1e-15);
        assert!((s.amplitudes()[0] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn zz_matches_explicit_pair_sum() {
        // Hand-enumerated s(k) for four qubits against the bit-trick kernel.
        let n = 4;
        let angle = 0.37;
        let amps = vec![c(0.25, 0.0); 16];
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_zz_coupling_layer(angle).unwrap();
        for k in 0..16usize {
            let z = |q: usize| if (k >> (n - 1 - q)) & 1 == 0 { 1i64 } else { -1 };
            let sk: i64 = (0..n - 1).map(|j| z(j) * z(j + 1)).sum();
            let want = C64::from_polar(0.25, angle * sk as f64);
            assert!((s.amplitudes()[k] - want).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn zz_zero_angle_is_identity_and_one_qubit_is_rejected() {
        let mut s = StateVector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)]).unwrap();
        let before = s.clone();
        s.apply_zz_coupling_layer(0.0).unwrap();
        assert_eq!(s, before);
        let mut one = StateVector::zero(1).unwrap();
        assert!(matches!(one.apply_zz_coupling_layer(FRAC_PI_4), Err(Error::Argument(_))));
    }

    #[test]
    fn reduced_purity_examples() {
        assert_eq!(StateVector::zero(2).unwrap().reduced_qubit_purity(0).unwrap(), 1.0);
        let bell = StateVector::ghz(2).unwrap();
        assert!((bell.reduced_qubit_purity(0).unwrap() - 0.5).abs() < 1e-15);
        let ghz = StateVector::ghz(3).unwrap();
        assert!((ghz.reduced_qubit_purity(1).unwrap() - 0.5).abs() < 1e-15);
        let rho = ghz.reduced_qubit_density(1).unwrap();
        assert!((rho[0][0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((rho[1][1] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(rho[0][1].norm() < 1e-15);
        assert!(matches!(ghz.reduced_qubit_purity(3), Err(Error::Argument(_))));
    }

    #[test]
    fn purity_examples() {
        let psi = StateVector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)]).unwrap();
        let pure = DensityMatrix::from_pure(&psi).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-14);
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((mixed.purity() - 0.25).abs() < 1e-15);

        // (1-p)|ψ⟩⟨ψ| + p I/D, p = 1/2, D = 4: square the matrix explicitly.
        let p = 0.5;
        let mut m = pure.matrix().clone();
        m.scale(c(1.0 - p, 0.0));
        for i in 0..4 {
            m[(i, i)] += c(p / 4.0, 0.0);
        }
        let squared = m.matmul(&m).unwrap();
        let brute = squared.trace().re;
        let dm = DensityMatrix::from_matrix(m).unwrap();
        assert!((dm.purity() - brute).abs() < 1e-14);
        // (1-p)² + 2(1-p)p/D + p²/D = 0.25 + 0.125 + 0.0625
        assert!((brute - 0.4375).abs() < 1e-14);
    }

    #[test]
    fn fidelity_examples() {
        let psi = StateVector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.4)]).unwrap();
        assert!((fidelity_pure(&psi, &psi).unwrap() - 1.0).abs() < 1e-14);
        let a = StateVector::basis(2, 1).unwrap();
        let b = StateVector::basis(2, 3).unwrap();
        assert_eq!(fidelity_pure(&a, &b).unwrap(), 0.0);
        let zero = StateVector::zero(1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((fidelity_pure_mixed(&zero, &mixed).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(fidelity_pure(&zero, &a), Err(Error::Argument(_))));
        assert!(matches!(fidelity_pure_mixed(&a, &mixed), Err(Error::Argument(_))));
    }

    #[test]
    fn unitary_plumbing() {
        let h = SingleQubitGate::hadamard().to_cmatrix();
        let s = CMatrix::from_diagonal(&[ONE, c(0.0, 1.0)]);
        let u = Unitary::new(h.matmul(&s).unwrap()).unwrap();
        let id = u.compose(&u.adjoint()).unwrap();
        assert!(id.matrix().max_abs_diff(&CMatrix::identity(2)) < 1e-10);

        let mut zero = StateVector::zero(3).unwrap();
        zero.apply_unitary(&Unitary::identity(8)).unwrap();
        assert_eq!(zero, StateVector::zero(3).unwrap());

        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        let out = conjugate_channel(&mixed, &u).unwrap();
        assert!(out.matrix().max_abs_diff(mixed.matrix()) < 1e-15);

        assert!(matches!(u.compose(&Unitary::identity(4)), Err(Error::Argument(_))));
        assert!(matches!(zero.apply_unitary(&u), Err(Error::Argument(_))));
        assert!(matches!(Unitary::new(CMatrix::zeros(2, 2)), Err(Error::Validation(_))));
    }

    #[test]
    fn density_matrix_validation() {
        let mut bad = CMatrix::identity(2);
        bad[(0, 0)] = c(1.5, 0.0);
        bad[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(DensityMatrix::from_matrix(bad), Err(Error::Validation(_))));
        let mut not_herm = CMatrix::identity(2);
        not_herm.scale(c(0.5, 0.0));
        not_herm[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::from_matrix(not_herm), Err(Error::Validation(_))));
    }

    #[test]
    fn capacity_guards() {
        assert!(matches!(StateVector::zero(13), Err(Error::Capacity { .. })));
        assert!(matches!(DensityMatrix::maximally_mixed(8), Err(Error::Capacity { .. })));
        let big = StateVector::zero(8).unwrap();
        assert!(matches!(DensityMatrix::from_pure(&big), Err(Error::Capacity { .. })));
    }
}
