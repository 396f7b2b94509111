//! The programmable SIGN gate and its teleportation-based implementation.
//!
//! A program `|φ⟩ = cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩` selects the basis
//! `{|φ⟩, |φ⊥⟩}` in which the gate flips the sign of `|φ⊥⟩`. The program is
//! stored in two qubits as `(|φφ⊥⟩ + |φ⊥φ⟩)/√2`; a singlet projection of the
//! data qubit with the first program qubit leaves the second one in `Σ_φ|ψ⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ZERO};
use crate::state::{PureState, Unitary2};

/// Bloch angles of the basis state that programs the gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgramSpec {
    theta: f64,
    phi: f64,
}

impl ProgramSpec {
    /// `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(Error::ProgramAngles { theta, phi });
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `|φ⟩`
    pub fn basis_state(&self) -> PureState {
        let (s, co) = (self.theta / 2.0).sin_cos();
        PureState::qubit(c(co, 0.0), Complex64::from_polar(s, self.phi))
            .expect("Bloch parametrization is normalized")
    }

    /// `|φ⊥⟩ = sin(θ/2)|H⟩ − e^{iφ} cos(θ/2)|V⟩`
    pub fn orthogonal_state(&self) -> PureState {
        let (s, co) = (self.theta / 2.0).sin_cos();
        PureState::qubit(c(s, 0.0), -Complex64::from_polar(co, self.phi))
            .expect("Bloch parametrization is normalized")
    }
}

pub fn orthogonal_state(p: &ProgramSpec) -> PureState {
    p.orthogonal_state()
}

/// `Σ_φ = |φ⟩⟨φ| − |φ⊥⟩⟨φ⊥|`
pub fn sign_gate_unitary(p: &ProgramSpec) -> Unitary2 {
    sign_gate_from_states(&p.basis_state(), &p.orthogonal_state())
}

fn sign_gate_from_states(fixed: &PureState, flipped: &PureState) -> Unitary2 {
    Unitary2::new(fixed.outer() - flipped.outer()).expect("difference of orthogonal projectors")
}

/// `(|φ φ⊥⟩ + |φ⊥ φ⟩)/√2`
pub fn program_state(p: &ProgramSpec) -> PureState {
    symmetric_program(&p.basis_state(), &p.orthogonal_state())
}

fn symmetric_program(phi: &PureState, perp: &PureState) -> PureState {
    let a = phi.tensor(perp).expect("two qubits");
    let b = perp.tensor(phi).expect("two qubits");
    let amps = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x + y) * FRAC_1_SQRT_2)
        .collect();
    PureState::new(amps).expect("orthogonal pair yields a normalized program")
}

/// `(|HV⟩ − |VH⟩)/√2`
pub fn singlet_state() -> PureState {
    let s = c(FRAC_1_SQRT_2, 0.0);
    PureState::new(vec![ZERO, s, -s, ZERO]).expect("normalized")
}

/// Heralded output of the teleportation circuit.
#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub output: PureState,
    pub success_probability: f64,
}

/// Runs the circuit on `|ψ⟩₁ ⊗ |Φ⟩_p(2,3)`: projects qubits 1 and 2 onto the
/// singlet and returns the normalized state of qubit 3 with the squared norm
/// of the projected vector. Other Bell outcomes are discarded.
pub fn teleport_gate(data: &PureState, p: &ProgramSpec) -> Result<TeleportOutcome> {
    if data.dim() != 2 {
        return Err(Error::Shape("data register must be a single qubit".into()));
    }
    let data = data.normalize()?;
    let joint = data.tensor(&program_state(p))?;
    let singlet = singlet_state();
    let amps = joint.amplitudes();
    let residual: Vec<Complex64> = (0..2)
        .map(|out| {
            (0..4)
                .map(|bell_index| singlet.amplitudes()[bell_index].conj() * amps[2 * bell_index + out])
                .sum()
        })
        .collect();
    let residual = PureState::unnormalized(residual)?;
    let success_probability = residual.norm_sqr();
    assert!(
        success_probability > 0.0,
        "singlet branch has input-independent probability 1/4"
    );
    Ok(TeleportOutcome {
        output: residual.normalize()?,
        success_probability,
    })
}

/// The five program bases used in the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProgramLabel {
    Phi1,
    Phi2,
    Phi3,
    Phi4,
    Phi5,
}

impl ProgramLabel {
    pub const ALL: [ProgramLabel; 5] = [
        ProgramLabel::Phi1,
        ProgramLabel::Phi2,
        ProgramLabel::Phi3,
        ProgramLabel::Phi4,
        ProgramLabel::Phi5,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProgramLabel::Phi1 => "phi1",
            ProgramLabel::Phi2 => "phi2",
            ProgramLabel::Phi3 => "phi3",
            ProgramLabel::Phi4 => "phi4",
            ProgramLabel::Phi5 => "phi5",
        }
    }

    pub fn spec(&self) -> ProgramSpec {
        let (theta, phi) = match self {
            // |H⟩
            ProgramLabel::Phi1 => (0.0, 0.0),
            // |R⟩
            ProgramLabel::Phi2 => (FRAC_PI_2, FRAC_PI_2),
            // |D⟩
            ProgramLabel::Phi3 => (FRAC_PI_2, 0.0),
            // [(1+√2)|H⟩ + |V⟩] / √(4+2√2)
            ProgramLabel::Phi4 => (FRAC_PI_4, 0.0),
            // |H⟩/√2 + (1+i)/2 |V⟩
            ProgramLabel::Phi5 => (FRAC_PI_2, FRAC_PI_4),
        };
        ProgramSpec { theta, phi }
    }
}

impl fmt::Display for ProgramLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProgramLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProgramLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownProgram(s.to_string()))
    }
}

/// A program with a display label; `label` is `None` for ad-hoc angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NamedProgram {
    pub label: Option<ProgramLabel>,
    pub spec: ProgramSpec,
}

impl NamedProgram {
    pub fn named(label: ProgramLabel) -> Self {
        Self {
            label: Some(label),
            spec: label.spec(),
        }
    }

    pub fn custom(spec: ProgramSpec) -> Self {
        Self { label: None, spec }
    }

    pub fn all() -> Vec<Self> {
        ProgramLabel::ALL.into_iter().map(Self::named).collect()
    }

    pub fn name(&self) -> String {
        match self.label {
            Some(l) => l.to_string(),
            None => format!("theta={},phi={}", self.spec.theta, self.spec.phi),
        }
    }
}
