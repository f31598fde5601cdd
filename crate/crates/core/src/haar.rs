//! Exact Haar samplers.
//!
//! Single-qubit rotations come from the four-angle Hurwitz parametrization of
//! U(2). Full U(D) samples (the CUE reference) come from a Ginibre matrix
//! factorized by QR, with the columns of `Q` rephased so that `R` has a
//! positive diagonal.

use std::f64::consts::TAU;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_capacity, Error, Result};
use crate::linalg::{householder_qr, CMatrix, C64};
use crate::qcore::{SingleQubitGate, StateVector, Unitary, MAX_STATE_QUBITS};

/// Largest dimension accepted by [`sample_haar_unitary`].
pub const MAX_HAAR_DIM: usize = 1 << MAX_STATE_QUBITS;

/// Deterministic generator. Equal seeds give identical draw sequences.
#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Generator for trial `index` of an ensemble rooted at `root_seed`.
    pub fn for_trial(root_seed: u64, index: u64) -> Self {
        Self::seed_from_u64(derive_child_seed(root_seed, index))
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.random::<u64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Complex Gaussian with unit variance, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.standard_normal() * s, self.standard_normal() * s)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(root, index)`: `splitmix64(root ^ splitmix64(index))`.
///
/// Every ensemble trial draws from its own generator seeded this way, so the
/// output never depends on how trials are scheduled across threads.
pub fn derive_child_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

/// Hurwitz angles of a U(2) element.
///
/// The gate is `e^{iα} [[e^{iψ} cos φ, e^{iχ} sin φ], [-e^{-iχ} sin φ, e^{-iψ} cos φ]]`
/// with `sin² φ = ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HurwitzAngles {
    pub alpha: f64,
    pub psi: f64,
    pub chi: f64,
    pub xi: f64,
}

impl HurwitzAngles {
    pub fn zero() -> Self {
        Self {
            alpha: 0.0,
            psi: 0.0,
            chi: 0.0,
            xi: 0.0,
        }
    }

    /// Haar draw: three uniform phases and `ξ` uniform on `[0, 1)`.
    pub fn sample(rng: &mut Rng) -> Self {
        Self {
            alpha: TAU * rng.uniform(),
            psi: TAU * rng.uniform(),
            chi: TAU * rng.uniform(),
            xi: rng.uniform(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("psi", self.psi), ("chi", self.chi)] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("angle {name} is not finite")));
            }
        }
        if !(0.0..1.0).contains(&self.xi) {
            return Err(Error::Validation(format!(
                "xi = {} outside [0, 1)",
                self.xi
            )));
        }
        Ok(())
    }

    /// Polar angle `φ = arcsin(√ξ)`.
    pub fn phi(&self) -> f64 {
        self.xi.sqrt().asin()
    }

    pub fn to_gate(&self) -> SingleQubitGate {
        // cos φ = √(1-ξ), sin φ = √ξ without a round trip through asin.
        let cos = (1.0 - self.xi).max(0.0).sqrt();
        let sin = self.xi.max(0.0).sqrt();
        let g = C64::from_polar(1.0, self.alpha);
        let e_psi = C64::from_polar(1.0, self.psi);
        let e_chi = C64::from_polar(1.0, self.chi);
        SingleQubitGate::new_unchecked([
            [g * e_psi * cos, g * e_chi * sin],
            [-g * e_chi.conj() * sin, g * e_psi.conj() * cos],
        ])
    }
}

/// Haar-random single-qubit unitary.
pub fn sample_u2(rng: &mut Rng) -> SingleQubitGate {
    HurwitzAngles::sample(rng).to_gate()
}

/// Haar-random `dim x dim` unitary.
pub fn sample_haar_unitary(dim: usize, rng: &mut Rng) -> Result<Unitary> {
    if dim == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    if dim > MAX_HAAR_DIM {
        return Err(Error::Capacity {
            what: "Haar unitary",
            requested: dim.next_power_of_two().trailing_zeros() as usize,
            limit: MAX_STATE_QUBITS,
        });
    }
    let data = (0..dim * dim).map(|_| rng.complex_normal()).collect();
    let ginibre = CMatrix::from_row_major(dim, dim, data)?;
    let qr = householder_qr(&ginibre)?;
    let mut q = qr.q;
    // Q·Λ with Λ = diag(R_jj/|R_jj|) is the Q of the unique factorization
    // whose R has a positive diagonal; only that one is Haar distributed.
    for j in 0..dim {
        let r = qr.r[(j, j)];
        let norm = r.norm();
        if norm == 0.0 {
            return Err(Error::Numerical("singular Ginibre sample".into()));
        }
        let phase = r / norm;
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(Unitary::new_unchecked(q))
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn sample_haar_state(dim: usize, rng: &mut Rng) -> Result<StateVector> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Argument(format!(
            "state dimension {dim} is not a power of two"
        )));
    }
    check_capacity("Haar state", dim.trailing_zeros() as usize, MAX_STATE_QUBITS)?;
    let amps = (0..dim).map(|_| rng.complex_normal()).collect();
    StateVector::normalized(amps)
}
