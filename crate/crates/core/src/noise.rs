//! Noise channels and the motion-reversal (echo) protocol.
//!
//! A trial applies `Λ∘U` `n` times and then `Λ∘U†` `n` times to a basis
//! state, where `Λ` is the noise channel, and records the fidelity with the
//! initial state and the purity of the result. Noise acts after every one of
//! the `2n` unitary applications.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSpec, MAX_MATRIX_QUBITS};
use crate::ensemble::run_trials;
use crate::error::{check_capacity, Error, Result};
use crate::haar::{sample_haar_unitary, Rng};
use crate::linalg::{hermitian_eigen, hermitian_propagator, CMatrix, C64};
use crate::qcore::{
    fidelity_pure, fidelity_pure_mixed, DensityMatrix, StateVector, Unitary, MAX_DENSITY_QUBITS,
};
use crate::stats::mean_and_std;

/// Fixed coherent error `V = exp(-i·delta·H)` with `‖H‖₂ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentPerturbation {
    delta: f64,
    generator: CMatrix,
    propagator: Unitary,
}

impl CoherentPerturbation {
    /// Validates that `generator` is Hermitian with unit spectral norm.
    pub fn new(delta: f64, generator: CMatrix) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Argument("coherent strength must be finite".into()));
        }
        let herr = generator.hermiticity_error();
        if herr > 1e-10 {
            return Err(Error::Validation(format!(
                "noise generator is not Hermitian (max |H - H†| = {herr:e})"
            )));
        }
        let norm = spectral_norm(&generator)?;
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Validation(format!(
                "noise generator has spectral norm {norm}, expected 1"
            )));
        }
        let propagator = Unitary::new(hermitian_propagator(&generator, delta)?)?;
        Ok(Self {
            delta,
            generator,
            propagator,
        })
    }

    /// Draws `H = (A + A†)/2` from i.i.d. complex Gaussian `A`, rescaled to
    /// unit spectral norm.
    pub fn random(n_qubits: usize, delta: f64, rng: &mut Rng) -> Result<Self> {
        check_capacity("coherent noise generator", n_qubits, MAX_MATRIX_QUBITS)?;
        let d = 1usize << n_qubits;
        let a = CMatrix::from_row_major(d, d, (0..d * d).map(|_| rng.complex_normal()).collect())?;
        let mut h = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                h[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            }
        }
        let norm = spectral_norm(&h)?;
        h.scale(C64::new(1.0 / norm, 0.0));
        Self::new(delta, h)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn generator(&self) -> &CMatrix {
        &self.generator
    }

    pub fn propagator(&self) -> &Unitary {
        &self.propagator
    }

    pub fn n_qubits(&self) -> usize {
        self.generator.rows().trailing_zeros() as usize
    }
}

fn spectral_norm(h: &CMatrix) -> Result<f64> {
    let eig = hermitian_eigen(h)?;
    Ok(eig.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs())))
}

/// A noise channel applied after every unitary step.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    None,
    Coherent(Arc<CoherentPerturbation>),
    /// `ρ ↦ (1-p)ρ + p·I/D`.
    Depolarizing { p: f64 },
    /// Independent phase flip with probability `gamma` on every qubit.
    DephasingPerQubit { gamma: f64 },
}

impl NoiseModel {
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability("depolarizing p", p)?;
        Ok(Self::Depolarizing { p })
    }

    pub fn dephasing(gamma: f64) -> Result<Self> {
        check_probability("dephasing gamma", gamma)?;
        Ok(Self::DephasingPerQubit { gamma })
    }

    /// True when the channel maps pure states to pure states.
    pub fn is_unitary(&self) -> bool {
        matches!(self, Self::None | Self::Coherent(_))
    }

    pub fn descriptor(&self) -> String {
        match self {
            Self::None => "none".into(),
            Self::Coherent(c) => format!("coherent:{}", c.delta()),
            Self::Depolarizing { p } => format!("depolarizing:{p}"),
            Self::DephasingPerQubit { gamma } => format!("dephasing:{gamma}"),
        }
    }

    fn check_dim(&self, n_qubits: usize) -> Result<()> {
        if let Self::Coherent(c) = self {
            if c.n_qubits() != n_qubits {
                return Err(Error::Argument(format!(
                    "coherent noise generator acts on {} qubits, register has {n_qubits}",
                    c.n_qubits()
                )));
            }
        }
        Ok(())
    }
}

fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Argument(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

/// Parsed form of a `kind[:param]` noise descriptor, before any random
/// generator has been drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    Coherent { delta: f64 },
    Depolarizing { p: f64 },
    Dephasing { gamma: f64 },
}

pub const NOISE_GRAMMAR: &str =
    "none | coherent:<delta> | depolarizing:<p in [0,1]> | dephasing:<gamma in [0,1]>";

impl FromStr for NoiseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let param = parts.next();
        if parts.next().is_some() {
            return Err(Error::Argument(format!(
                "too many fields in noise descriptor `{s}`; accepted: {NOISE_GRAMMAR}"
            )));
        }
        let value = |name: &str| -> Result<f64> {
            let raw = param.ok_or_else(|| {
                Error::Argument(format!("noise `{kind}` needs a {name}; accepted: {NOISE_GRAMMAR}"))
            })?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Argument(format!("invalid {name} `{raw}` in noise descriptor")))
        };
        let spec = match kind.as_str() {
            "none" if param.is_none() => Self::None,
            "coherent" => Self::Coherent { delta: value("delta")? },
            "depolarizing" => {
                let p = value("probability")?;
                check_probability("depolarizing p", p)?;
                Self::Depolarizing { p }
            }
            "dephasing" => {
                let gamma = value("probability")?;
                check_probability("dephasing gamma", gamma)?;
                Self::Dephasing { gamma }
            }
            _ => {
                return Err(Error::Argument(format!(
                    "unknown noise descriptor `{s}`; accepted: {NOISE_GRAMMAR}"
                )))
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::None => write!(f, "none"),
            Self::Coherent { delta } => write!(f, "coherent:{delta}"),
            Self::Depolarizing { p } => write!(f, "depolarizing:{p}"),
            Self::Dephasing { gamma } => write!(f, "dephasing:{gamma}"),
        }
    }
}

impl NoiseSpec {
    /// Builds the channel; a coherent generator is drawn from `noise_seed`.
    pub fn instantiate(&self, n_qubits: usize, noise_seed: u64) -> Result<NoiseModel> {
        Ok(match *self {
            Self::None => NoiseModel::None,
            Self::Coherent { delta } => NoiseModel::Coherent(Arc::new(CoherentPerturbation::random(
                n_qubits,
                delta,
                &mut Rng::seed_from_u64(noise_seed),
            )?)),
            Self::Depolarizing { p } => NoiseModel::depolarizing(p)?,
            Self::Dephasing { gamma } => NoiseModel::dephasing(gamma)?,
        })
    }
}

/// Applies a unitary channel to a pure state.
pub fn apply_noise_state(state: &mut StateVector, noise: &NoiseModel) -> Result<()> {
    noise.check_dim(state.n_qubits())?;
    match noise {
        NoiseModel::None => Ok(()),
        NoiseModel::Coherent(c) => state.apply_unitary(c.propagator()),
        other => Err(Error::Mode(format!(
            "noise `{}` is not unitary and cannot act on a pure state",
            other.descriptor()
        ))),
    }
}

/// Applies the channel to a density matrix.
pub fn apply_noise_density(rho: &mut DensityMatrix, noise: &NoiseModel) -> Result<()> {
    noise.check_dim(rho.n_qubits())?;
    match noise {
        NoiseModel::None => {}
        NoiseModel::Coherent(c) => rho.conjugate(c.propagator())?,
        &NoiseModel::Depolarizing { p } => {
            let d = rho.dim();
            let m = rho.matrix_mut();
            m.scale(C64::new(1.0 - p, 0.0));
            for i in 0..d {
                m[(i, i)] += C64::new(p / d as f64, 0.0);
            }
        }
        &NoiseModel::DephasingPerQubit { gamma } => {
            // Each qubit maps ρ to (1-γ)ρ + γ Z ρ Z, which scales entries whose
            // row and column bits differ on that qubit by (1 - 2γ).
            let n = rho.n_qubits();
            let factors: Vec<f64> = (0..=n).map(|k| (1.0 - 2.0 * gamma).powi(k as i32)).collect();
            let d = rho.dim();
            let m = rho.matrix_mut();
            for i in 0..d {
                for j in 0..d {
                    let differing = (i ^ j).count_ones() as usize;
                    if differing > 0 {
                        m[(i, j)] *= factors[differing];
                    }
                }
            }
        }
    }
    Ok(())
}

/// Where the echoed unitary of each trial comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ReversalSource {
    /// Fresh random circuit per trial.
    Circuit { n_qubits: usize, depth: usize },
    /// Fresh CUE unitary per trial.
    Haar { n_qubits: usize },
    /// The same circuit in every trial.
    FixedCircuit(Arc<CircuitSpec>),
    /// The same unitary in every trial.
    FixedUnitary(Arc<Unitary>),
}

impl ReversalSource {
    pub fn n_qubits(&self) -> usize {
        match self {
            Self::Circuit { n_qubits, .. } | Self::Haar { n_qubits } => *n_qubits,
            Self::FixedCircuit(c) => c.n_qubits(),
            Self::FixedUnitary(u) => u.dim().trailing_zeros() as usize,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Circuit { n_qubits, depth } => format!("circuit(n_q={n_qubits}, m={depth})"),
            Self::Haar { n_qubits } => format!("haar(n_q={n_qubits})"),
            Self::FixedCircuit(c) => format!("fixed_circuit(n_q={}, m={})", c.n_qubits(), c.depth()),
            Self::FixedUnitary(u) => format!("fixed_unitary(dim={})", u.dim()),
        }
    }

    fn depth(&self) -> Option<usize> {
        match self {
            Self::Circuit { depth, .. } => Some(*depth),
            Self::FixedCircuit(c) => Some(c.depth()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    /// State vectors for unitary noise, density matrices otherwise.
    #[default]
    Auto,
    StateVector,
    DensityMatrix,
}

/// The operator echoed within one trial.
enum TrialOperator {
    Circuit(Arc<CircuitSpec>),
    Matrix(Arc<Unitary>),
}

impl TrialOperator {
    fn forward(&self, s: &mut StateVector) -> Result<()> {
        match self {
            Self::Circuit(c) => c.apply(s),
            Self::Matrix(u) => s.apply_unitary(u),
        }
    }

    fn backward(&self, s: &mut StateVector) -> Result<()> {
        match self {
            Self::Circuit(c) => c.apply_inverse(s),
            Self::Matrix(u) => s.apply_unitary(&u.adjoint()),
        }
    }

    fn matrix(&self) -> Result<Arc<Unitary>> {
        match self {
            Self::Circuit(c) => Ok(Arc::new(c.to_matrix()?)),
            Self::Matrix(u) => Ok(Arc::clone(u)),
        }
    }
}

/// Configuration of a motion-reversal experiment.
#[derive(Debug, Clone)]
pub struct ReversalConfig {
    pub source: ReversalSource,
    pub noise: NoiseModel,
    pub n_max: usize,
    pub initial: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub mode: SimulationMode,
    /// Upper bound on trials simulated concurrently.
    pub max_concurrent_trials: Option<usize>,
}

impl ReversalConfig {
    pub fn new(source: ReversalSource, noise: NoiseModel, n_max: usize, n_trials: usize, seed: u64) -> Self {
        Self {
            source,
            noise,
            n_max,
            initial: 0,
            n_trials,
            seed,
            mode: SimulationMode::Auto,
            max_concurrent_trials: None,
        }
    }

    fn resolved_mode(&self) -> Result<SimulationMode> {
        match (self.mode, self.noise.is_unitary()) {
            (SimulationMode::Auto, true) => Ok(SimulationMode::StateVector),
            (SimulationMode::Auto, false) => Ok(SimulationMode::DensityMatrix),
            (SimulationMode::StateVector, false) => Err(Error::Mode(format!(
                "noise `{}` needs density-matrix simulation",
                self.noise.descriptor()
            ))),
            (mode, _) => Ok(mode),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayMetadata {
    pub noise: String,
    pub source: String,
    pub n_q: usize,
    pub m: Option<usize>,
    pub n_trials: usize,
    pub seed: u64,
    pub initial: usize,
    pub mode: SimulationMode,
}

/// Trial-averaged fidelity and purity after `n` forward and `n` backward steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub n_values: Vec<usize>,
    pub fidelity: Vec<f64>,
    pub fidelity_std: Vec<f64>,
    pub purity: Vec<f64>,
    pub purity_std: Vec<f64>,
    pub metadata: DecayMetadata,
}

impl DecayCurve {
    /// `n,fidelity_mean,fidelity_std,purity_mean,purity_std` rows.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("n,fidelity_mean,fidelity_std,purity_mean,purity_std\n");
        for i in 0..self.n_values.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.n_values[i], self.fidelity[i], self.fidelity_std[i], self.purity[i], self.purity_std[i]
            );
        }
        out
    }
}

/// Fidelity and purity of one trial for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialCurve {
    pub fidelity: Vec<f64>,
    pub purity: Vec<f64>,
}

fn echo_state(op: &TrialOperator, noise: &NoiseModel, initial: &StateVector, n_max: usize) -> Result<TrialCurve> {
    let mut fidelity = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut s = initial.clone();
        for _ in 0..n {
            op.forward(&mut s)?;
            apply_noise_state(&mut s, noise)?;
        }
        for _ in 0..n {
            op.backward(&mut s)?;
            apply_noise_state(&mut s, noise)?;
        }
        fidelity.push(fidelity_pure(initial, &s)?);
    }
    Ok(TrialCurve {
        purity: vec![1.0; n_max],
        fidelity,
    })
}

fn echo_density(op: &TrialOperator, noise: &NoiseModel, initial: &StateVector, n_max: usize) -> Result<TrialCurve> {
    let u = op.matrix()?;
    let u_dag = u.adjoint();
    let start = DensityMatrix::from_pure(initial)?;
    let mut fidelity = Vec::with_capacity(n_max);
    let mut purity = Vec::with_capacity(n_max);
    // The forward half of n+1 extends the forward half of n.
    let mut forward = start;
    for _ in 1..=n_max {
        forward.conjugate(&u)?;
        apply_noise_density(&mut forward, noise)?;
        let n = fidelity.len() + 1;
        let mut rho = forward.clone();
        for _ in 0..n {
            rho.conjugate(&u_dag)?;
            apply_noise_density(&mut rho, noise)?;
        }
        fidelity.push(fidelity_pure_mixed(initial, &rho)?);
        purity.push(rho.purity());
    }
    Ok(TrialCurve { fidelity, purity })
}

fn check_config(cfg: &ReversalConfig, mode: SimulationMode) -> Result<()> {
    if cfg.n_max == 0 {
        return Err(Error::Argument("n_max must be at least 1".into()));
    }
    if cfg.n_trials == 0 {
        return Err(Error::Argument("n_trials must be at least 1".into()));
    }
    let n_q = cfg.source.n_qubits();
    cfg.noise.check_dim(n_q)?;
    if mode == SimulationMode::DensityMatrix {
        check_capacity("density-matrix simulation", n_q, MAX_DENSITY_QUBITS)?;
    }
    if let ReversalSource::Haar { n_qubits } = cfg.source {
        check_capacity("Haar unitary echo", n_qubits, MAX_MATRIX_QUBITS)?;
    }
    // Validates the basis index and state capacity.
    StateVector::basis(n_q, cfg.initial)?;
    Ok(())
}

/// Per-trial echo curves, ordered by trial index.
pub fn motion_reversal_trials(cfg: &ReversalConfig) -> Result<Vec<TrialCurve>> {
    let mode = cfg.resolved_mode()?;
    check_config(cfg, mode)?;
    let n_q = cfg.source.n_qubits();
    let initial = StateVector::basis(n_q, cfg.initial)?;
    run_trials(cfg.n_trials, cfg.seed, cfg.max_concurrent_trials, |_, rng| {
        let op = match &cfg.source {
            &ReversalSource::Circuit { n_qubits, depth } => {
                TrialOperator::Circuit(Arc::new(CircuitSpec::sample(n_qubits, depth, rng)?))
            }
            &ReversalSource::Haar { n_qubits } => {
                TrialOperator::Matrix(Arc::new(sample_haar_unitary(1 << n_qubits, rng)?))
            }
            ReversalSource::FixedCircuit(c) => TrialOperator::Circuit(Arc::clone(c)),
            ReversalSource::FixedUnitary(u) => TrialOperator::Matrix(Arc::clone(u)),
        };
        match mode {
            SimulationMode::DensityMatrix => echo_density(&op, &cfg.noise, &initial, cfg.n_max),
            _ => echo_state(&op, &cfg.noise, &initial, cfg.n_max),
        }
    })
}

fn aggregate(cfg: &ReversalConfig, mode: SimulationMode, trials: &[TrialCurve]) -> DecayCurve {
    let column = |pick: &dyn Fn(&TrialCurve) -> &Vec<f64>, n: usize| -> (f64, f64) {
        let vals: Vec<f64> = trials.iter().map(|t| pick(t)[n]).collect();
        mean_and_std(&vals)
    };
    let (mut fidelity, mut fidelity_std, mut purity, mut purity_std) = (vec![], vec![], vec![], vec![]);
    for n in 0..cfg.n_max {
        let (fm, fs) = column(&|t| &t.fidelity, n);
        let (pm, ps) = column(&|t| &t.purity, n);
        fidelity.push(fm);
        fidelity_std.push(fs);
        purity.push(pm);
        purity_std.push(ps);
    }
    DecayCurve {
        n_values: (1..=cfg.n_max).collect(),
        fidelity,
        fidelity_std,
        purity,
        purity_std,
        metadata: DecayMetadata {
            noise: cfg.noise.descriptor(),
            source: cfg.source.label(),
            n_q: cfg.source.n_qubits(),
            m: cfg.source.depth(),
            n_trials: cfg.n_trials,
            seed: cfg.seed,
            initial: cfg.initial,
            mode,
        },
    }
}

/// Trial-averaged motion-reversal curve with cross-trial spreads.
pub fn motion_reversal_curve(cfg: &ReversalConfig) -> Result<DecayCurve> {
    let mode = cfg.resolved_mode()?;
    let trials = motion_reversal_trials(cfg)?;
    Ok(aggregate(cfg, mode, &trials))
}

/// [`motion_reversal_curve`] for each initial basis state in `initials`
/// (the configured `initial` when empty). Every initial state sees the same
/// sequence of trial unitaries.
pub fn average_fidelity_decay(cfg: &ReversalConfig, initials: &[usize]) -> Result<Vec<DecayCurve>> {
    if initials.is_empty() {
        return Ok(vec![motion_reversal_curve(cfg)?]);
    }
    initials
        .iter()
        .map(|&initial| {
            let cfg = ReversalConfig {
                initial,
                ..cfg.clone()
            };
            motion_reversal_curve(&cfg)
        })
        .collect()
}
