//! Entanglement indicator, CUE reference values and the distribution
//! diagnostics used to compare random-circuit ensembles with the CUE.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitSpec;
use crate::ensemble::{run_trials, UnitarySource};
use crate::error::{Error, Result};
use crate::haar::{derive_child_seed, sample_haar_state};
use crate::linalg::normal_eigen;
use crate::qcore::{StateVector, Unitary};

/// Overshoot beyond `[0, 1]` that is silently clamped.
const Q_CLAMP_SLACK: f64 = 1e-9;
/// Residual bound for eigenpairs of sampled unitaries.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Matrices whose closest eigenvalue pair is nearer than this are skipped.
pub const DEGENERATE_SPACING: f64 = 1e-10;
pub const DEFAULT_BINS: usize = 50;

/// Meyer–Wallach indicator `Q = 2 - (2/n) Σ_i Tr[ρ_i²]`.
pub fn meyer_wallach_q(state: &StateVector) -> Result<f64> {
    let n = state.n_qubits();
    if n < 2 {
        return Err(Error::Argument(format!(
            "Meyer-Wallach Q needs at least 2 qubits, got {n}"
        )));
    }
    let mut purity_sum = 0.0;
    for i in 0..n {
        purity_sum += state.reduced_qubit_purity(i)?;
    }
    let q = 2.0 - 2.0 * purity_sum / n as f64;
    if !(-Q_CLAMP_SLACK..=1.0 + Q_CLAMP_SLACK).contains(&q) {
        return Err(Error::Validation(format!(
            "Q = {q} outside [0, 1]; is the state normalized?"
        )));
    }
    Ok(q.clamp(0.0, 1.0))
}

/// Exact CUE average of Q for dimension `dim`: `(D-2)/(D+1)`.
pub fn cue_q_mean(dim: usize) -> f64 {
    (dim as f64 - 2.0) / (dim as f64 + 1.0)
}

/// CDF of `y = |U_ij|²` for a CUE matrix of dimension `dim`:
/// `1 - (1-y)^{D-1}` on `[0, 1]`.
pub fn cue_element_cdf(dim: usize, y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - y).powi(dim as i32 - 1)
    }
}

/// Reference values of the CUE in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueReference {
    pub dim: usize,
}

impl CueReference {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn q_mean_exact(&self) -> f64 {
        cue_q_mean(self.dim)
    }

    pub fn element_cdf(&self, y: f64) -> f64 {
        cue_element_cdf(self.dim, y)
    }
}

/// One-sample Kolmogorov–Smirnov distance `sup_x |F_n(x) - F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Argument("KS statistic of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Argument("KS statistic of a sample containing NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample Kolmogorov–Smirnov distance `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("KS statistic of an empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic survival function of the Kolmogorov distribution,
/// `P(K > λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2k²λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Approximate p-value of a two-sample KS distance `d` between samples of
/// sizes `n1` and `n2` (Stephens' small-sample correction).
pub fn ks_two_sample_p_value(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let s = ne.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// Uniform-bin histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Values outside `[lo, hi]` are clamped into the end bins; `hi` itself
    /// falls in the last bin.
    pub fn uniform(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || lo.is_nan() || hi.is_nan() || hi <= lo {
            return Err(Error::Argument(format!(
                "invalid histogram: {bins} bins on [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let idx = ((v - lo) / width).floor();
            let idx = if idx.is_nan() { 0 } else { (idx.max(0.0) as usize).min(bins - 1) };
            counts[idx] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Sample mean and standard deviation (`n-1` denominator; zero for `n = 1`).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub bins: usize,
    pub keep_samples: bool,
    pub max_threads: Option<usize>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            keep_samples: true,
            max_threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub statistic: String,
    pub source: String,
    pub n_q: usize,
    pub m: Option<usize>,
    pub seed: u64,
    pub basis_index: usize,
    pub notes: Vec<String>,
}

/// Aggregated Q statistics of one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub n_trials: usize,
    pub q_mean: f64,
    pub q_std: f64,
    pub q_samples: Option<Vec<f64>>,
    pub histogram: Histogram,
    /// Two-sample KS distance to a CUE reference sample, once attached.
    pub ks_to_cue: Option<f64>,
    pub metadata: ReportMetadata,
}

impl EnsembleReport {
    /// Standard error of `q_mean`.
    pub fn standard_error(&self) -> f64 {
        self.q_std / (self.n_trials as f64).sqrt()
    }

    pub fn abs_gap_to_cue(&self) -> f64 {
        (self.q_mean - cue_q_mean(1 << self.metadata.n_q)).abs()
    }

    /// Sets `ks_to_cue` from a sample of Q values drawn under the CUE.
    pub fn attach_cue_reference(&mut self, reference: &[f64]) -> Result<()> {
        let samples = self.q_samples.as_deref().ok_or_else(|| {
            Error::Argument("report was built without raw samples; enable keep_samples".into())
        })?;
        self.ks_to_cue = Some(ks_two_sample(samples, reference)?);
        Ok(())
    }

    /// `trial,value` rows of the raw Q samples.
    pub fn samples_csv(&self) -> Option<String> {
        self.q_samples.as_ref().map(|s| {
            let trials: Vec<usize> = (0..s.len()).collect();
            samples_csv(&trials, s)
        })
    }
}

/// Q of `n_trials` independent states drawn from `source`.
///
/// Circuit trials apply a fresh circuit to `|basis_index⟩`. Haar trials draw
/// the state directly: a CUE unitary applied to any basis state is a
/// Haar-random state, so the basis index does not enter.
pub fn run_q_ensemble(
    source: UnitarySource,
    n_trials: usize,
    seed: u64,
    basis_index: usize,
    options: &EnsembleOptions,
) -> Result<EnsembleReport> {
    if n_trials == 0 {
        return Err(Error::Argument("n_trials must be at least 1".into()));
    }
    let n_q = source.n_qubits();
    if n_q < 2 {
        return Err(Error::Argument(format!("Q ensembles need n_q >= 2, got {n_q}")));
    }
    // Fails early on capacity or a bad basis index.
    StateVector::basis(n_q, basis_index)?;

    let samples = run_trials(n_trials, seed, options.max_threads, |_, rng| {
        let state = match source {
            UnitarySource::Circuit { n_qubits, depth } => {
                let c = CircuitSpec::sample(n_qubits, depth, rng)?;
                let mut s = StateVector::basis(n_qubits, basis_index)?;
                c.apply(&mut s)?;
                s
            }
            UnitarySource::Haar { n_qubits } => sample_haar_state(1 << n_qubits, rng)?,
        };
        meyer_wallach_q(&state)
    })?;

    let (q_mean, q_std) = mean_and_std(&samples);
    let histogram = Histogram::uniform(&samples, options.bins, 0.0, 1.0)?;
    let mut notes = Vec::new();
    if matches!(source, UnitarySource::Haar { .. }) {
        notes.push("haar trials sample pure states directly".to_string());
    }
    Ok(EnsembleReport {
        n_trials,
        q_mean,
        q_std,
        q_samples: options.keep_samples.then_some(samples),
        histogram,
        ks_to_cue: None,
        metadata: ReportMetadata {
            statistic: "meyer_wallach_q".into(),
            source: source.label(),
            n_q,
            m: source.depth(),
            seed,
            basis_index,
            notes,
        },
    })
}

/// Which matrix entries are recorded per sampled unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementSelection {
    All,
    Entry { row: usize, col: usize },
}

/// Pooled scalar samples tagged with the trial that produced them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PooledSamples {
    pub trial: Vec<usize>,
    pub values: Vec<f64>,
    /// Trials dropped from the pool (degenerate spectra).
    pub skipped_trials: usize,
}

impl PooledSamples {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn csv(&self) -> String {
        samples_csv(&self.trial, &self.values)
    }

    fn extend_trial(&mut self, trial: usize, values: Vec<f64>) {
        self.trial.extend(std::iter::repeat_n(trial, values.len()));
        self.values.extend(values);
    }
}

/// `trial,value` CSV.
pub fn samples_csv(trials: &[usize], values: &[f64]) -> String {
    let mut out = String::from("trial,value\n");
    for (t, v) in trials.iter().zip(values) {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

/// Pooled `|U_ij|²` over `n_trials` unitaries from `source`.
///
/// Entries of one matrix are correlated; pooling them all is accepted.
pub fn matrix_element_samples(
    source: UnitarySource,
    n_trials: usize,
    seed: u64,
    selection: ElementSelection,
    max_threads: Option<usize>,
) -> Result<PooledSamples> {
    if n_trials == 0 {
        return Err(Error::Argument("n_trials must be at least 1".into()));
    }
    let dim = source.dim();
    if let ElementSelection::Entry { row, col } = selection {
        if row >= dim || col >= dim {
            return Err(Error::Argument(format!(
                "entry ({row}, {col}) outside a {dim}x{dim} matrix"
            )));
        }
    }
    let per_trial = run_trials(n_trials, seed, max_threads, |_, rng| {
        let u = source.sample_matrix(rng)?;
        Ok(match selection {
            ElementSelection::All => u.matrix().as_slice().iter().map(|z| z.norm_sqr()).collect(),
            ElementSelection::Entry { row, col } => vec![u.matrix()[(row, col)].norm_sqr()],
        })
    })?;
    let mut pooled = PooledSamples::default();
    for (t, v) in per_trial.into_iter().enumerate() {
        pooled.extend_trial(t, v);
    }
    Ok(pooled)
}

/// All `|v_k|²` of all eigenvectors of `u`, or `None` when two eigenvalues
/// are closer than [`DEGENERATE_SPACING`] and the eigenvectors are not
/// well defined.
pub fn eigenvector_components(u: &Unitary) -> Result<Option<Vec<f64>>> {
    let eig = normal_eigen(u.matrix(), EIGEN_RESIDUAL_TOLERANCE)?;
    if let Some(bad) = eig
        .eigenvalues
        .iter()
        .find(|l| (l.norm() - 1.0).abs() > EIGEN_RESIDUAL_TOLERANCE)
    {
        return Err(Error::Numerical(format!(
            "eigenvalue {bad} of a {}x{} unitary is off the unit circle (unitarity error {:e})",
            u.dim(),
            u.dim(),
            u.unitarity_error()
        )));
    }
    if eig.min_spacing() < DEGENERATE_SPACING {
        return Ok(None);
    }
    Ok(Some(
        eig.eigenvectors.as_slice().iter().map(|z| z.norm_sqr()).collect(),
    ))
}

/// Pooled eigenvector components `|v_k|²` over `n_trials` unitaries.
pub fn eigenvector_component_samples(
    source: UnitarySource,
    n_trials: usize,
    seed: u64,
    max_threads: Option<usize>,
) -> Result<PooledSamples> {
    if n_trials == 0 {
        return Err(Error::Argument("n_trials must be at least 1".into()));
    }
    let per_trial = run_trials(n_trials, seed, max_threads, |_, rng| {
        eigenvector_components(&source.sample_matrix(rng)?)
    })?;
    let mut pooled = PooledSamples::default();
    for (t, v) in per_trial.into_iter().enumerate() {
        match v {
            Some(v) => pooled.extend_trial(t, v),
            None => pooled.skipped_trials += 1,
        }
    }
    Ok(pooled)
}

/// Ordinary least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Argument(format!(
            "line fit needs at least two paired points, got {} x and {} y",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Argument("line fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fits `ln(gap)` against depth over the supplied `(m, gap)` points.
pub fn convergence_rate_fit(points: &[(usize, f64)]) -> Result<LinearFit> {
    if let Some(&(m, g)) = points.iter().find(|(_, g)| g.is_nan() || *g <= 0.0) {
        return Err(Error::Argument(format!(
            "gap at m = {m} is {g}; the logarithmic fit needs positive gaps"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(m, _)| m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, g)| g.ln()).collect();
    fit_line(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n_q: usize,
    pub q_mean: f64,
    pub q_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTable {
    pub rows: Vec<ConcentrationRow>,
    /// Fit of `ln(q_std)` against `n_q`; present with two or more rows.
    pub fit: Option<LinearFit>,
}

/// Q spread of Haar-random states for each register size.
pub fn concentration_scan(
    n_q_list: &[usize],
    n_trials: usize,
    seed: u64,
    max_threads: Option<usize>,
) -> Result<ConcentrationTable> {
    if n_q_list.is_empty() {
        return Err(Error::Argument("concentration scan needs at least one n_q".into()));
    }
    let options = EnsembleOptions {
        keep_samples: false,
        max_threads,
        ..EnsembleOptions::default()
    };
    let rows = n_q_list
        .iter()
        .map(|&n_q| {
            let report = run_q_ensemble(
                UnitarySource::Haar { n_qubits: n_q },
                n_trials,
                derive_child_seed(seed, n_q as u64),
                0,
                &options,
            )?;
            Ok(ConcentrationRow {
                n_q,
                q_mean: report.q_mean,
                q_std: report.q_std,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = if rows.len() >= 2 && rows.iter().all(|r| r.q_std > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|r| r.n_q as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.q_std.ln()).collect();
        fit_line(&xs, &ys).ok()
    } else {
        None
    };
    Ok(ConcentrationTable { rows, fit })
}
