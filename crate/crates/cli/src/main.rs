//! `randcirc` command-line front end.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 usage or validation, 3 capacity,
//! 4 numerical failure.

mod output;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use randcirc::circuit::CircuitSpec;
use randcirc::ensemble::UnitarySource;
use randcirc::haar::derive_child_seed;
use randcirc::noise::{average_fidelity_decay, NoiseSpec, ReversalConfig, ReversalSource, SimulationMode, NOISE_GRAMMAR};
use randcirc::qcore::StateVector;
use randcirc::stats::{
    concentration_scan, cue_element_cdf, cue_q_mean, eigenvector_component_samples, ks_statistic,
    ks_two_sample_p_value, matrix_element_samples, meyer_wallach_q, run_q_ensemble, ElementSelection,
    EnsembleOptions, PooledSamples, DEFAULT_BINS,
};

use output::{opt_num, pretty, CliError, Format, RunConfig, Sink};

/// Child-seed index of the Haar baseline in m-sweeps.
const HAAR_STREAM: u64 = u64::MAX;
/// Child-seed index of the coherent-noise generator.
const NOISE_STREAM: u64 = u64::MAX - 1;

const SEEDING: &str = "Seeding: the circuit ensemble at depth m uses child seed \
splitmix64(seed ^ splitmix64(m)); the Haar baseline uses index 2^64-1. Trial i of \
an ensemble draws from splitmix64(child ^ splitmix64(i)).";

#[derive(Parser)]
#[command(name = "randcirc", version, about = "Random-circuit ensembles, CUE diagnostics and motion-reversal noise runs")]
#[command(after_help = SEEDING)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Run {
    /// Root seed. Drawn from system entropy when omitted; always echoed.
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per ensemble.
    #[arg(long, default_value_t = 500)]
    trials: usize,
    /// Output directory.
    #[arg(long, value_name = "PATH", default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Upper bound on worker threads. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Circuit,
    Haar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Statevector,
    Density,
}

#[derive(Subcommand)]
enum Command {
    /// Distribution of Q over circuit depths, plus a Haar baseline.
    Qdist {
        #[arg(long)]
        nq: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        /// Initial basis state index.
        #[arg(long, default_value_t = 0)]
        basis: usize,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[command(flatten)]
        run: Run,
    },
    /// Pooled |U_ij|^2 samples per depth with a KS summary against the CUE law.
    Elements {
        #[arg(long)]
        nq: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        /// Single entry `ROW,COL` instead of all entries.
        #[arg(long, value_delimiter = ',', num_args = 2, value_names = ["ROW", "COL"])]
        entry: Option<Vec<usize>>,
        #[command(flatten)]
        run: Run,
    },
    /// Pooled eigenvector components per depth with a KS summary.
    Eigvecs {
        #[arg(long)]
        nq: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        #[command(flatten)]
        run: Run,
    },
    /// Motion-reversal fidelity and purity decay.
    Decay {
        #[arg(long)]
        nq: usize,
        /// Circuit depth (circuit source only).
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Source::Circuit)]
        source: Source,
        #[arg(long, value_name = "DESCRIPTOR", help = noise_help())]
        noise: Option<String>,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        /// Initial basis state index.
        #[arg(long, default_value_t = 0)]
        basis: usize,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[command(flatten)]
        run: Run,
    },
    /// Spread of Q for Haar-random states versus register size.
    Concentration {
        #[arg(long, value_delimiter = ',', required = true)]
        nq_list: Vec<usize>,
        #[command(flatten)]
        run: Run,
    },
    /// Sample a circuit and write it as JSON.
    CircuitGen {
        #[arg(long)]
        nq: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Apply a stored circuit to a basis state and print Q.
    CircuitApply {
        #[arg(long, value_name = "PATH")]
        circuit: PathBuf,
        #[arg(long, default_value_t = 0)]
        basis: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn noise_help() -> String {
    format!("Noise channel applied after every step: {NOISE_GRAMMAR}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> (u64, &'static str) {
    let resolved = match seed {
        Some(s) => (s, "argument"),
        None => (rand::random(), "entropy"),
    };
    eprintln!("seed: {}", resolved.0);
    resolved
}

fn base_config(command: &'static str, run: &Run) -> RunConfig {
    let (seed, seed_origin) = resolve_seed(run.seed);
    RunConfig {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        seed_origin,
        n_trials: Some(run.trials),
        format: Some(run.format),
        ..RunConfig::default()
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Qdist {
            nq,
            m_list,
            basis,
            bins,
            run,
        } => qdist(nq, &m_list, basis, bins, &run),
        Command::Elements { nq, m_list, entry, run } => {
            let selection = match entry.as_deref() {
                None => ElementSelection::All,
                Some([row, col]) => ElementSelection::Entry { row: *row, col: *col },
                Some(_) => return Err(CliError::Usage("--entry takes ROW,COL".into())),
            };
            pooled(PooledKind::Elements(selection), nq, &m_list, &run)
        }
        Command::Eigvecs { nq, m_list, run } => pooled(PooledKind::Eigvecs, nq, &m_list, &run),
        Command::Decay {
            nq,
            m,
            source,
            noise,
            nmax,
            basis,
            mode,
            run,
        } => decay(nq, m, source, noise.as_deref(), nmax, basis, mode, &run),
        Command::Concentration { nq_list, run } => concentration(&nq_list, &run),
        Command::CircuitGen { nq, m, seed, out } => circuit_gen(nq, m, seed, out),
        Command::CircuitApply { circuit, basis, format } => circuit_apply(&circuit, basis, format),
    }
}

fn qdist(nq: usize, m_list: &[usize], basis: usize, bins: usize, run: &Run) -> Result<(), CliError> {
    let config = RunConfig {
        n_q: Some(nq),
        m_list: Some(m_list.to_vec()),
        basis: Some(basis),
        bins: Some(bins),
        source: Some("circuit+haar".into()),
        ..base_config("qdist", run)
    };
    let seed = config.seed;
    let options = EnsembleOptions {
        bins,
        keep_samples: true,
        max_threads: run.threads,
    };
    let cue = cue_q_mean(1 << nq);

    let haar_seed = derive_child_seed(seed, HAAR_STREAM);
    let haar = run_q_ensemble(UnitarySource::Haar { n_qubits: nq }, run.trials, haar_seed, basis, &options)?;
    let reference = haar.q_samples.clone().unwrap_or_default();

    let sink = Sink::new(&run.out, run.format, config)?;
    let mut summary = String::from("m,q_mean,q_std,ks_to_cue,abs_gap_to_cue\n");
    let mut rows = Vec::new();
    for &m in m_list {
        let child = derive_child_seed(seed, m as u64);
        let mut r = run_q_ensemble(UnitarySource::Circuit { n_qubits: nq, depth: m }, run.trials, child, basis, &options)?;
        r.attach_cue_reference(&reference)?;
        let gap = r.abs_gap_to_cue();
        let _ = writeln!(summary, "{m},{},{},{},{gap}", r.q_mean, r.q_std, opt_num(r.ks_to_cue));
        let ks_p = r.ks_to_cue.map(|d| ks_two_sample_p_value(d, r.n_trials, reference.len()));
        let details = json!({
            "m": m, "child_seed": child, "q_mean": r.q_mean, "q_std": r.q_std,
            "ks_to_cue": r.ks_to_cue, "ks_p_value": ks_p, "abs_gap_to_cue": gap, "cue_q_mean": cue,
            "ks_reference": "two-sample KS against the haar baseline Q samples",
        });
        rows.push(details.clone());
        sink.write(&format!("report_m{m}"), &histogram_csv(&r.histogram), serde_json::to_value(&r).unwrap(), details)?;
    }
    let gap = haar.abs_gap_to_cue();
    let _ = writeln!(summary, "haar,{},{},,{gap}", haar.q_mean, haar.q_std);
    let details = json!({
        "m": Value::Null, "child_seed": haar_seed, "q_mean": haar.q_mean, "q_std": haar.q_std,
        "ks_to_cue": Value::Null, "abs_gap_to_cue": gap, "cue_q_mean": cue,
    });
    rows.push(details.clone());
    sink.write("report_haar", &histogram_csv(&haar.histogram), serde_json::to_value(&haar).unwrap(), details)?;
    sink.write("qdist_summary", &summary, Value::Array(rows), json!({ "cue_q_mean": cue }))
}

fn histogram_csv(h: &randcirc::stats::Histogram) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, c) in h.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{c}", h.edges[i], h.edges[i + 1]);
    }
    out
}

enum PooledKind {
    Elements(ElementSelection),
    Eigvecs,
}

fn pooled(kind: PooledKind, nq: usize, m_list: &[usize], run: &Run) -> Result<(), CliError> {
    let (command, selection) = match kind {
        PooledKind::Elements(ElementSelection::All) => ("elements", Some("all".to_string())),
        PooledKind::Elements(ElementSelection::Entry { row, col }) => ("elements", Some(format!("{row},{col}"))),
        PooledKind::Eigvecs => ("eigvecs", None),
    };
    let config = RunConfig {
        n_q: Some(nq),
        m_list: Some(m_list.to_vec()),
        source: Some("circuit+haar".into()),
        selection,
        ..base_config(command, run)
    };
    let seed = config.seed;
    let dim = 1usize << nq.min(usize::BITS as usize - 1);
    let sample = |source: UnitarySource, child: u64| -> Result<PooledSamples, CliError> {
        Ok(match kind {
            PooledKind::Elements(sel) => matrix_element_samples(source, run.trials, child, sel, run.threads)?,
            PooledKind::Eigvecs => eigenvector_component_samples(source, run.trials, child, run.threads)?,
        })
    };

    let sink = Sink::new(&run.out, run.format, config)?;
    let mut summary = String::from("m,n_samples,skipped_trials,ks_to_cue\n");
    let mut rows = Vec::new();
    let mut emit = |label: String, stem: String, child: u64, s: PooledSamples| -> Result<(), CliError> {
        let ks = if s.is_empty() {
            None
        } else {
            Some(ks_statistic(&s.values, |y| cue_element_cdf(dim, y))?)
        };
        let _ = writeln!(summary, "{label},{},{},{}", s.len(), s.skipped_trials, opt_num(ks));
        let details = json!({
            "m": label, "child_seed": child, "n_samples": s.len(),
            "skipped_trials": s.skipped_trials, "ks_to_cue": ks,
        });
        rows.push(details.clone());
        sink.write(&stem, &s.csv(), serde_json::to_value(&s).unwrap(), details)
    };
    for &m in m_list {
        let child = derive_child_seed(seed, m as u64);
        let s = sample(UnitarySource::Circuit { n_qubits: nq, depth: m }, child)?;
        emit(m.to_string(), format!("{command}_m{m}"), child, s)?;
    }
    let child = derive_child_seed(seed, HAAR_STREAM);
    let s = sample(UnitarySource::Haar { n_qubits: nq }, child)?;
    emit("haar".into(), format!("{command}_haar"), child, s)?;
    sink.write(
        &format!("{command}_summary"),
        &summary,
        Value::Array(rows),
        json!({
            "reference": format!("CUE law P(|u|^2 <= y) = 1 - (1 - y)^{}", dim - 1),
            "notes": ["values from one matrix are correlated; all of them are pooled"],
        }),
    )
}

#[allow(clippy::too_many_arguments)]
fn decay(
    nq: usize,
    m: usize,
    source: Source,
    noise: Option<&str>,
    nmax: usize,
    basis: usize,
    mode: Mode,
    run: &Run,
) -> Result<(), CliError> {
    let noise = noise.ok_or_else(|| CliError::Usage(format!("--noise is required; accepted descriptors: {NOISE_GRAMMAR}")))?;
    let spec: NoiseSpec = noise.parse()?;
    let (source, source_label, depth) = match source {
        Source::Circuit => (ReversalSource::Circuit { n_qubits: nq, depth: m }, "circuit", Some(m)),
        Source::Haar => (ReversalSource::Haar { n_qubits: nq }, "haar", None),
    };
    let mode = match mode {
        Mode::Auto => SimulationMode::Auto,
        Mode::Statevector => SimulationMode::StateVector,
        Mode::Density => SimulationMode::DensityMatrix,
    };
    let config = RunConfig {
        n_q: Some(nq),
        m: depth,
        source: Some(source_label.into()),
        noise: Some(spec.to_string()),
        n_max: Some(nmax),
        basis: Some(basis),
        mode: Some(serde_json::to_value(mode).unwrap().as_str().unwrap_or_default().to_string()),
        ..base_config("decay", run)
    };
    let seed = config.seed;
    let noise_seed = derive_child_seed(seed, NOISE_STREAM);
    let capacity_hint = "density-matrix runs hold at most 7 qubits and are needed for depolarizing or \
                         dephasing noise; reduce --nq or use coherent/none noise in statevector mode";
    let model = spec.instantiate(nq, noise_seed).map_err(|e| CliError::from(e).with_capacity_hint(capacity_hint))?;
    let cfg = ReversalConfig {
        max_concurrent_trials: run.threads,
        mode,
        ..ReversalConfig::new(source, model, nmax, run.trials, seed)
    };
    let curve = average_fidelity_decay(&cfg, &[basis])
        .map_err(|e| CliError::from(e).with_capacity_hint(capacity_hint))?
        .remove(0);
    let sink = Sink::new(&run.out, run.format, config)?;
    let details = json!({ "noise_seed": noise_seed, "trial_seed": seed, "metadata": curve.metadata });
    sink.write("decay", &curve.to_csv(), serde_json::to_value(&curve).unwrap(), details)
}

fn concentration(nq_list: &[usize], run: &Run) -> Result<(), CliError> {
    let config = RunConfig {
        n_q_list: Some(nq_list.to_vec()),
        source: Some("haar".into()),
        ..base_config("concentration", run)
    };
    let table = concentration_scan(nq_list, run.trials, config.seed, run.threads)?;
    let mut csv = String::from("n_q,q_std,log_q_std\n");
    for r in &table.rows {
        let _ = writeln!(csv, "{},{},{}", r.n_q, r.q_std, r.q_std.ln());
    }
    let child_seeds: Vec<u64> = nq_list.iter().map(|&n| derive_child_seed(config.seed, n as u64)).collect();
    let sink = Sink::new(&run.out, run.format, config)?;
    let details = json!({ "child_seeds": child_seeds, "fit_log_std_vs_n_q": table.fit });
    sink.write("concentration", &csv, serde_json::to_value(&table).unwrap(), details)
}

fn circuit_gen(nq: usize, m: usize, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), CliError> {
    let (seed, _) = resolve_seed(seed);
    let text = CircuitSpec::sample_seeded(nq, m, seed)?.to_json();
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(&path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn circuit_apply(path: &PathBuf, basis: usize, format: Format) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let circuit = CircuitSpec::from_json(&text)?;
    let mut state = StateVector::basis(circuit.n_qubits(), basis)?;
    circuit.apply(&mut state)?;
    let q = meyer_wallach_q(&state)?;
    match format {
        Format::Csv => println!("{q}"),
        Format::Json => print!(
            "{}",
            pretty(&json!({ "n_q": circuit.n_qubits(), "m": circuit.depth(), "basis": basis, "seed": circuit.seed(), "q": q }))
        ),
    }
    Ok(())
}
