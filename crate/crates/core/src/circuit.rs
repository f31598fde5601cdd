//! The pseudo-random circuit model: `m` iterations of a constant-depth gate,
//! each made of independent Haar U(2) rotations on every qubit followed by a
//! nearest-neighbour ZZ coupling layer on an open chain.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{check_capacity, Error, Result};
use crate::haar::{HurwitzAngles, Rng};
use crate::linalg::CMatrix;
use crate::qcore::{StateVector, Unitary, MAX_STATE_QUBITS};

/// Coupling angle that maximizes the entanglement of one ZZ layer.
pub const DEFAULT_COUPLING_ANGLE: f64 = FRAC_PI_4;
/// Largest register for which the full circuit matrix is assembled.
pub const MAX_MATRIX_QUBITS: usize = 10;
/// Version tag written into serialized circuits.
pub const FORMAT_VERSION: u64 = 1;

/// One iteration of the constant-depth gate: a rotation per qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rotations: Vec<HurwitzAngles>,
}

/// An `m`-layer circuit on `n_q` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    n_qubits: usize,
    coupling_angle: f64,
    layers: Vec<Layer>,
    seed: Option<u64>,
}

impl CircuitSpec {
    /// Validates the layer shapes and angles.
    pub fn new(
        n_qubits: usize,
        coupling_angle: f64,
        layers: Vec<Layer>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::Argument(format!(
                "a circuit needs at least 2 qubits, got {n_qubits}"
            )));
        }
        check_capacity("circuit", n_qubits, MAX_STATE_QUBITS)?;
        if !coupling_angle.is_finite() {
            return Err(Error::Validation("coupling angle is not finite".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.rotations.len() != n_qubits {
                return Err(Error::Validation(format!(
                    "layer {i} has {} rotations, expected {n_qubits}",
                    layer.rotations.len()
                )));
            }
            for r in &layer.rotations {
                r.validate()?;
            }
        }
        Ok(Self {
            n_qubits,
            coupling_angle,
            layers,
            seed,
        })
    }

    /// Draws `depth` layers of independent Haar rotations.
    pub fn sample(n_qubits: usize, depth: usize, rng: &mut Rng) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::Argument(format!(
                "a circuit needs at least 2 qubits for the coupling layer, got {n_qubits}"
            )));
        }
        check_capacity("circuit", n_qubits, MAX_STATE_QUBITS)?;
        let layers = (0..depth)
            .map(|_| Layer {
                rotations: (0..n_qubits).map(|_| HurwitzAngles::sample(rng)).collect(),
            })
            .collect();
        Ok(Self {
            n_qubits,
            coupling_angle: DEFAULT_COUPLING_ANGLE,
            layers,
            seed: None,
        })
    }

    /// [`CircuitSpec::sample`] from a fresh generator, recording the seed.
    pub fn sample_seeded(n_qubits: usize, depth: usize, seed: u64) -> Result<Self> {
        let mut c = Self::sample(n_qubits, depth, &mut Rng::seed_from_u64(seed))?;
        c.seed = Some(seed);
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of layers `m`.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn coupling_angle(&self) -> f64 {
        self.coupling_angle
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Argument(format!(
                "circuit on {} qubits applied to a {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        Ok(())
    }

    /// Applies every layer in order: rotations, then the coupling layer.
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        self.check_state(state)?;
        for layer in &self.layers {
            for (q, r) in layer.rotations.iter().enumerate() {
                state.apply_single_qubit_gate(&r.to_gate(), q)?;
            }
            state.apply_zz_coupling_layer(self.coupling_angle)?;
        }
        Ok(())
    }

    /// Exact inverse from the stored angles: layers reversed, each undone by
    /// the negated coupling followed by the adjoint rotations.
    pub fn apply_inverse(&self, state: &mut StateVector) -> Result<()> {
        self.check_state(state)?;
        for layer in self.layers.iter().rev() {
            state.apply_zz_coupling_layer(-self.coupling_angle)?;
            for (q, r) in layer.rotations.iter().enumerate() {
                state.apply_single_qubit_gate(&r.to_gate().adjoint(), q)?;
            }
        }
        Ok(())
    }

    /// Dense matrix whose column `k` is the circuit applied to `|k⟩`.
    pub fn to_matrix(&self) -> Result<Unitary> {
        check_capacity("circuit matrix", self.n_qubits, MAX_MATRIX_QUBITS)?;
        let dim = 1usize << self.n_qubits;
        let columns = (0..dim)
            .map(|k| {
                let mut s = StateVector::basis(self.n_qubits, k)?;
                self.apply(&mut s)?;
                Ok(s.into_amplitudes())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Unitary::new_unchecked(CMatrix::from_columns(&columns)?))
    }

    /// Structured-text (JSON) form with 17 significant digits per angle.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let f = |x: f64| format!("{x:.16e}");
        out.push_str("{\n");
        let _ = writeln!(out, "  \"version\": {FORMAT_VERSION},");
        let _ = writeln!(out, "  \"n_q\": {},", self.n_qubits);
        let _ = writeln!(out, "  \"m\": {},", self.depth());
        let _ = writeln!(out, "  \"coupling_angle\": {},", f(self.coupling_angle));
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "  \"seed\": {seed},");
        }
        if self.layers.is_empty() {
            out.push_str("  \"layers\": []\n");
        } else {
            out.push_str("  \"layers\": [\n");
            for (li, layer) in self.layers.iter().enumerate() {
                out.push_str("    [\n");
                for (ri, r) in layer.rotations.iter().enumerate() {
                    let _ = write!(
                        out,
                        "      {{\"alpha\": {}, \"psi\": {}, \"chi\": {}, \"xi\": {}}}",
                        f(r.alpha),
                        f(r.psi),
                        f(r.chi),
                        f(r.xi)
                    );
                    out.push_str(if ri + 1 < layer.rotations.len() { ",\n" } else { "\n" });
                }
                out.push_str(if li + 1 < self.layers.len() { "    ],\n" } else { "    ]\n" });
            }
            out.push_str("  ]\n");
        }
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct VersionProbe {
            version: Option<u64>,
        }

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Document {
            #[allow(dead_code)]
            version: u64,
            n_q: usize,
            m: usize,
            coupling_angle: f64,
            #[serde(default)]
            seed: Option<u64>,
            layers: Vec<Vec<HurwitzAngles>>,
        }

        fn parse_err(e: serde_json::Error) -> Error {
            Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        }

        fn field_err(field: &str, message: String) -> Error {
            Error::Parse {
                line: 0,
                column: 0,
                message: format!("field `{field}`: {message}"),
            }
        }

        let probe: VersionProbe = serde_json::from_str(text).map_err(parse_err)?;
        match probe.version {
            None => return Err(field_err("version", "missing field `version`".into())),
            Some(FORMAT_VERSION) => {}
            Some(found) => {
                return Err(Error::UnsupportedVersion {
                    found,
                    expected: FORMAT_VERSION,
                })
            }
        }
        let doc: Document = serde_json::from_str(text).map_err(parse_err)?;
        if doc.layers.len() != doc.m {
            return Err(field_err(
                "m",
                format!("declares {} layers but `layers` holds {}", doc.m, doc.layers.len()),
            ));
        }
        for (i, layer) in doc.layers.iter().enumerate() {
            if layer.len() != doc.n_q {
                return Err(field_err(
                    &format!("layers[{i}]"),
                    format!("has {} rotations, expected n_q = {}", layer.len(), doc.n_q),
                ));
            }
            for (j, r) in layer.iter().enumerate() {
                r.validate()
                    .map_err(|e| field_err(&format!("layers[{i}][{j}]"), e.to_string()))?;
            }
        }
        let layers = doc
            .layers
            .into_iter()
            .map(|rotations| Layer { rotations })
            .collect();
        Self::new(doc.n_q, doc.coupling_angle, layers, doc.seed)
    }
}
