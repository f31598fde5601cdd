//! Seeded trial runner shared by the ensemble statistics and the noise
//! protocols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitSpec;
use crate::error::{Error, Result};
use crate::haar::{sample_haar_unitary, Rng};
use crate::qcore::Unitary;

/// Where the unitaries of an ensemble come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnitarySource {
    /// Random circuit with `depth` layers on `n_qubits` qubits.
    Circuit { n_qubits: usize, depth: usize },
    /// Haar (CUE) unitary of dimension `2^n_qubits`.
    Haar { n_qubits: usize },
}

impl UnitarySource {
    pub fn n_qubits(&self) -> usize {
        match *self {
            Self::Circuit { n_qubits, .. } | Self::Haar { n_qubits } => n_qubits,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn depth(&self) -> Option<usize> {
        match *self {
            Self::Circuit { depth, .. } => Some(depth),
            Self::Haar { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Circuit { n_qubits, depth } => format!("circuit(n_q={n_qubits}, m={depth})"),
            Self::Haar { n_qubits } => format!("haar(n_q={n_qubits})"),
        }
    }

    /// Dense unitary for one trial.
    pub fn sample_matrix(&self, rng: &mut Rng) -> Result<Unitary> {
        match *self {
            Self::Circuit { n_qubits, depth } => CircuitSpec::sample(n_qubits, depth, rng)?.to_matrix(),
            Self::Haar { n_qubits } => sample_haar_unitary(1 << n_qubits, rng),
        }
    }
}

/// Runs `n_trials` independent trials, trial `i` drawing from
/// `Rng::for_trial(seed, i)`. Results come back ordered by trial index.
///
/// `max_threads` bounds the number of trials in flight; `None` uses the
/// global rayon pool.
pub fn run_trials<T, F>(n_trials: usize, seed: u64, max_threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut Rng) -> Result<T> + Sync + Send,
{
    let work = || {
        (0..n_trials)
            .into_par_iter()
            .map(|i| f(i, &mut Rng::for_trial(seed, i as u64)))
            .collect::<Result<Vec<T>>>()
    };
    match max_threads {
        None => work(),
        Some(0) => Err(Error::Argument("max_threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Numerical(format!("could not build thread pool: {e}")))?
            .install(work),
    }
}
