//! Count corrections and maximum-likelihood process reconstruction.
//!
//! The data qubit is prepared in one of `H, V, D, R` and the output is
//! projected onto each state of the `{H,V}`, `{D,A}`, `{R,L}` bases, giving
//! 24 settings with operators `M_jk = ρ_j^T ⊗ Π_k`.
//!
//! Frequencies only fix the process up to an overall rate, so the likelihood
//! is taken over the normalized predictions `p_jk / Σ p`. Its stationary
//! points satisfy `G⁻¹ K χ = χ` (up to scale) with `K = Σ f_jk/p_jk M_jk` and
//! `G = Σ M_jk`, which the iteration `χ ← N[G⁻¹ K χ K G⁻¹]` reaches while
//! keeping `χ ≥ 0`. Steps that would lower the likelihood are diluted towards
//! the identity until they do not. Each iteration also tries Newton steps,
//! over all Hermitian matrices and restricted to the low-rank faces of the
//! positive cone through the current iterate, projected back onto the cone;
//! the best of these is kept when it gains more than the fixed-point step.
//! This turns the slow approach to rank-deficient optima into a few steps.
//! Likelihood comparisons use exact differences via `ln_1p`, so progress well
//! below the rounding error of ℓ itself is still recognised.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::choi::{expectation, measurement_operator, ProcessMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, c, eigen_hermitian, max_abs_diff, CMat};
use crate::state::PureState;

/// Data-qubit preparation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InputState {
    H,
    V,
    D,
    R,
}

impl InputState {
    pub const ALL: [InputState; 4] = [InputState::H, InputState::V, InputState::D, InputState::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn state(self) -> PureState {
        match self {
            InputState::H => PureState::h(),
            InputState::V => PureState::v(),
            InputState::D => PureState::d(),
            InputState::R => PureState::r(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InputState::H => "H",
            InputState::V => "V",
            InputState::D => "D",
            InputState::R => "R",
        }
    }
}

/// Output projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProjectorLabel {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl ProjectorLabel {
    pub const ALL: [ProjectorLabel; 6] = [
        ProjectorLabel::H,
        ProjectorLabel::V,
        ProjectorLabel::D,
        ProjectorLabel::A,
        ProjectorLabel::R,
        ProjectorLabel::L,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn state(self) -> PureState {
        match self {
            ProjectorLabel::H => PureState::h(),
            ProjectorLabel::V => PureState::v(),
            ProjectorLabel::D => PureState::d(),
            ProjectorLabel::A => PureState::a(),
            ProjectorLabel::R => PureState::r(),
            ProjectorLabel::L => PureState::l(),
        }
    }

    /// The other member of the same measurement basis.
    pub fn partner(self) -> ProjectorLabel {
        match self {
            ProjectorLabel::H => ProjectorLabel::V,
            ProjectorLabel::V => ProjectorLabel::H,
            ProjectorLabel::D => ProjectorLabel::A,
            ProjectorLabel::A => ProjectorLabel::D,
            ProjectorLabel::R => ProjectorLabel::L,
            ProjectorLabel::L => ProjectorLabel::R,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProjectorLabel::H => "H",
            ProjectorLabel::V => "V",
            ProjectorLabel::D => "D",
            ProjectorLabel::A => "A",
            ProjectorLabel::R => "R",
            ProjectorLabel::L => "L",
        }
    }
}

impl fmt::Display for InputState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for ProjectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InputState::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown input state {s:?}")))
    }
}

impl FromStr for ProjectorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProjectorLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown projector {s:?}")))
    }
}

pub const SETTINGS: usize = 24;

/// One measurement setting as recorded by the coincidence logic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRecord {
    pub input: InputState,
    pub projector: ProjectorLabel,
    pub raw: f64,
    pub accidental: f64,
    pub efficiency: f64,
}

impl CountRecord {
    pub fn new(input: InputState, projector: ProjectorLabel, raw: f64) -> Self {
        Self {
            input,
            projector,
            raw,
            accidental: 0.0,
            efficiency: 1.0,
        }
    }
}

/// Corrected frequencies indexed `[input][projector]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedDataset {
    frequencies: [[f64; 6]; 4],
    total: f64,
    /// Settings whose accidental estimate exceeded the raw count.
    pub clamped: Vec<(InputState, ProjectorLabel)>,
}

impl CorrectedDataset {
    /// Wraps already-corrected frequencies. Entries must be finite and
    /// nonnegative; an all-zero table is allowed here but cannot be
    /// reconstructed.
    pub fn from_frequencies(frequencies: [[f64; 6]; 4]) -> Result<Self> {
        let mut total = 0.0;
        for (j, row) in frequencies.iter().enumerate() {
            for (k, &f) in row.iter().enumerate() {
                if !(f >= 0.0) || !f.is_finite() {
                    return Err(Error::InvalidRecord {
                        index: j * 6 + k,
                        message: format!("frequency {f} is not a finite nonnegative number"),
                    });
                }
                total += f;
            }
        }
        Ok(Self {
            frequencies,
            total,
            clamped: Vec::new(),
        })
    }

    /// Noise-free frequencies `p_jk` predicted by a process.
    pub fn exact(chi: &ProcessMatrix) -> Self {
        let probs = MeasurementDesign::get().probabilities(chi.matrix());
        let mut freqs = [[0.0; 6]; 4];
        for (idx, p) in probs.into_iter().enumerate() {
            freqs[idx / 6][idx % 6] = p.max(0.0);
        }
        Self::from_frequencies(freqs).expect("probabilities are nonnegative")
    }

    pub fn frequency(&self, input: InputState, projector: ProjectorLabel) -> f64 {
        self.frequencies[input.index()][projector.index()]
    }

    pub fn frequencies(&self) -> &[[f64; 6]; 4] {
        &self.frequencies
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut freqs = self.frequencies;
        freqs.iter_mut().flatten().for_each(|f| *f *= factor);
        Self::from_frequencies(freqs)
    }

    fn flat(&self) -> [f64; SETTINGS] {
        let mut out = [0.0; SETTINGS];
        for (idx, f) in self.frequencies.iter().flatten().enumerate() {
            out[idx] = *f;
        }
        out
    }
}

/// Subtracts accidentals, clamps at zero and divides by the detection efficiency.
pub fn correct_counts(records: &[CountRecord]) -> Result<CorrectedDataset> {
    let mut seen: [[Option<usize>; 6]; 4] = [[None; 6]; 4];
    let mut freqs = [[0.0; 6]; 4];
    let mut clamped = Vec::new();
    for (index, rec) in records.iter().enumerate() {
        let slot = &mut seen[rec.input.index()][rec.projector.index()];
        if slot.is_some() {
            return Err(Error::DuplicateRecord(rec.input, rec.projector));
        }
        *slot = Some(index);
        if !(rec.raw >= 0.0) || !rec.raw.is_finite() {
            return Err(Error::InvalidRecord {
                index,
                message: format!("raw count {} must be finite and nonnegative", rec.raw),
            });
        }
        if !(rec.accidental >= 0.0) || !rec.accidental.is_finite() {
            return Err(Error::InvalidRecord {
                index,
                message: format!("accidental count {} must be finite and nonnegative", rec.accidental),
            });
        }
        if !(rec.efficiency > 0.0) || !rec.efficiency.is_finite() {
            return Err(Error::InvalidRecord {
                index,
                message: format!("efficiency {} must be positive", rec.efficiency),
            });
        }
        let signal = rec.raw - rec.accidental;
        if signal < 0.0 {
            clamped.push((rec.input, rec.projector));
        }
        freqs[rec.input.index()][rec.projector.index()] = signal.max(0.0) / rec.efficiency;
    }
    for input in InputState::ALL {
        for projector in ProjectorLabel::ALL {
            if seen[input.index()][projector.index()].is_none() {
                return Err(Error::MissingRecord(input, projector));
            }
        }
    }
    let mut data = CorrectedDataset::from_frequencies(freqs)?;
    if data.total <= 0.0 {
        return Err(Error::EmptyDataset);
    }
    data.clamped = clamped;
    Ok(data)
}

/// Floor applied to predicted probabilities before logs and divisions.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// The 24 measurement operators and their sum.
#[derive(Debug)]
pub struct MeasurementDesign {
    operators: Vec<CMat>,
    sum_inverse: CMat,
    gram_rank: usize,
}

impl MeasurementDesign {
    pub fn get() -> &'static MeasurementDesign {
        static DESIGN: OnceLock<MeasurementDesign> = OnceLock::new();
        DESIGN.get_or_init(|| {
            let design = MeasurementDesign::build();
            assert_eq!(
                design.gram_rank, 16,
                "measurement operators must span the 16-dimensional operator space"
            );
            design
        })
    }

    fn build() -> Self {
        let mut operators = Vec::with_capacity(SETTINGS);
        for input in InputState::ALL {
            let rho = input.state().outer();
            for projector in ProjectorLabel::ALL {
                operators.push(measurement_operator(&rho, &projector.state().outer()));
            }
        }
        let sum = operators.iter().fold(CMat::zeros(4, 4), |acc, m| acc + m);
        let sum_inverse = sum.try_inverse().expect("operator sum is positive definite");
        let gram = CMat::from_fn(SETTINGS, SETTINGS, |a, b| {
            c(expectation(&operators[a], &operators[b]), 0.0)
        });
        let eig = eigen_hermitian(&gram).expect("Gram matrix is symmetric");
        let cutoff = eig.values[0] * 1e-10;
        let gram_rank = eig.values.iter().filter(|&&v| v > cutoff).count();
        Self {
            operators,
            sum_inverse,
            gram_rank,
        }
    }

    pub fn operators(&self) -> &[CMat] {
        &self.operators
    }

    pub fn gram_rank(&self) -> usize {
        self.gram_rank
    }

    /// Unfloored `p_jk` in `[input][projector]` row-major order.
    pub fn probabilities(&self, chi: &CMat) -> [f64; SETTINGS] {
        let mut out = [0.0; SETTINGS];
        for (p, op) in out.iter_mut().zip(&self.operators) {
            *p = expectation(op, chi);
        }
        out
    }
}

fn log_likelihood_flat(chi: &CMat, freqs: &[f64; SETTINGS]) -> f64 {
    let probs = MeasurementDesign::get().probabilities(chi);
    let floored = probs.map(|p| p.max(PROBABILITY_FLOOR));
    let total: f64 = floored.iter().sum();
    freqs
        .iter()
        .zip(floored)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, p)| f * (p / total).ln())
        .sum()
}

/// Orthonormal Hermitian basis of the tangent space of the face of the
/// positive cone on which the eigenvectors `vectors[.., j]` for `j` in
/// `null` carry zero weight. An empty `null` spans all Hermitian matrices.
fn face_basis(vectors: &CMat, null: &[usize]) -> Vec<CMat> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let outer = |i: usize, j: usize| vectors.column(i) * vectors.column(j).adjoint();
    let mut basis = Vec::with_capacity(16);
    for i in 0..4 {
        for j in i..4 {
            if null.contains(&i) && null.contains(&j) {
                continue;
            }
            if i == j {
                basis.push(outer(i, i));
            } else {
                let (ij, ji) = (outer(i, j), outer(j, i));
                basis.push((&ij + &ji) * c(r, 0.0));
                basis.push((&ij - &ji) * c(0.0, r));
            }
        }
    }
    basis
}

/// Newton direction for ℓ within the span of `basis`. Directions along which
/// ℓ is not strictly concave are left untouched.
fn newton_direction(
    basis: &[CMat],
    probs: &[f64; SETTINGS],
    freqs: &[f64; SETTINGS],
    total: f64,
) -> CMat {
    let design = MeasurementDesign::get();
    let n = basis.len();
    let sum_p: f64 = probs.iter().sum();
    let mut g_sum = DVector::<f64>::zeros(n);
    let mut gradient = DVector::<f64>::zeros(n);
    let mut hessian = DMatrix::<f64>::zeros(n, n);
    for ((op, &p), &f) in design.operators.iter().zip(probs).zip(freqs) {
        let g = DVector::from_iterator(n, basis.iter().map(|b| expectation(op, b)));
        g_sum += &g;
        if f > 0.0 {
            gradient += &g * (f / p);
            hessian -= &g * g.transpose() * (f / (p * p));
        }
    }
    gradient -= &g_sum * (total / sum_p);
    hessian += &g_sum * g_sum.transpose() * (total / (sum_p * sum_p));

    let eig = nalgebra::SymmetricEigen::new(hessian);
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut delta = DVector::<f64>::zeros(n);
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-12 * scale {
            let v = eig.eigenvectors.column(j);
            delta -= v * (v.dot(&gradient) / lambda);
        }
    }
    let mut direction = CMat::zeros(4, 4);
    for (d, b) in delta.iter().zip(basis) {
        direction += b * c(*d, 0.0);
    }
    direction
}

/// Nearest unit-trace positive matrix by clipping negative eigenvalues.
/// The second pass removes the rounding left behind when a large negative
/// part was cut off.
fn project_positive(m: &CMat) -> Option<CMat> {
    let mut current = m.clone();
    for _ in 0..2 {
        let clipped = eigen_hermitian(&current).ok()?.map(|v| v.max(0.0));
        let tr = clipped.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return None;
        }
        current = CMat::from_fn(4, 4, |i, j| 0.5 * (clipped[(i, j)] + clipped[(j, i)].conj()) / tr);
    }
    Some(current)
}

/// `ℓ(χ + Δ) − ℓ(χ)` evaluated from `Tr[M Δ]` and `ln_1p`, which resolves
/// changes far below the rounding error of ℓ itself.
fn likelihood_gain(probs: &[f64; SETTINGS], delta: &CMat, freqs: &[f64; SETTINGS], total: f64) -> f64 {
    let shifts = MeasurementDesign::get().probabilities(delta);
    let (mut sum_old, mut sum_shift, mut gain) = (0.0, 0.0, 0.0);
    for ((&p, d), &f) in probs.iter().zip(shifts).zip(freqs) {
        let old = p.max(PROBABILITY_FLOOR);
        let new = p + d;
        let shift = if p >= PROBABILITY_FLOOR && new >= PROBABILITY_FLOOR {
            d
        } else {
            new.max(PROBABILITY_FLOOR) - old
        };
        sum_old += old;
        sum_shift += shift;
        if f > 0.0 {
            gain += f * (shift / old).ln_1p();
        }
    }
    gain - total * (sum_shift / sum_old).ln_1p()
}

/// `Σ f_jk ln(p_jk / Σ p)` with `p_jk` floored at [`PROBABILITY_FLOOR`].
pub fn log_likelihood(chi: &ProcessMatrix, data: &CorrectedDataset) -> f64 {
    log_likelihood_flat(chi.matrix(), &data.flat())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Why a converged reconstruction stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Max-norm change of χ fell below the tolerance.
    Tolerance,
    /// The step changes χ by more than the tolerance but the likelihood
    /// difference is at floating-point resolution, so no step can be verified
    /// as an improvement.
    LikelihoodResolution,
    /// Still iterating (only seen in partial diagnostics).
    Running,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Log-likelihood of the starting point followed by every accepted step.
    pub log_likelihood: Vec<f64>,
    pub final_change: f64,
    pub positivity_margin: f64,
    /// Steps that had to be diluted to keep the likelihood from dropping.
    pub diluted_steps: usize,
    /// Accepted projected Newton steps.
    pub newton_steps: usize,
}

impl MleDiagnostics {
    pub fn final_log_likelihood(&self) -> f64 {
        self.log_likelihood.last().copied().unwrap_or(f64::NAN)
    }
}

const MIN_DILUTION: f64 = 1e-6;
const NEWTON_HALVINGS: usize = 8;
/// Relative likelihood change treated as rounding noise.
const LIKELIHOOD_RESOLUTION: f64 = 1e-15;

/// `N[A χ A†]`. Large entries of `A` can push rounding errors outside the
/// positive cone, so any negative eigenvalues are clipped.
fn normalized_congruence(a: &CMat, chi: &CMat) -> CMat {
    let m = a * chi * a.adjoint();
    let tr = m.trace().re;
    let m = CMat::from_fn(4, 4, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()) / tr);
    match eigen_hermitian(&m) {
        Ok(eig) if eig.min_value() < 0.0 => {
            let clipped = eig.map(|v| v.max(0.0));
            let tr = clipped.trace().re;
            CMat::from_fn(4, 4, |i, j| 0.5 * (clipped[(i, j)] + clipped[(j, i)].conj()) / tr)
        }
        _ => m,
    }
}

/// Iterative maximum-likelihood reconstruction starting from `I₄/4`.
pub fn mle_reconstruct(
    data: &CorrectedDataset,
    options: MleOptions,
) -> Result<(ProcessMatrix, MleDiagnostics)> {
    if !(options.tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance {} must be positive", options.tol)));
    }
    if !(data.total > 0.0) {
        return Err(Error::EmptyDataset);
    }
    let design = MeasurementDesign::get();
    let freqs = data.flat();
    let identity = linalg::identity(4);

    let mut chi = ProcessMatrix::depolarizing().into_matrix();
    let mut ll = log_likelihood_flat(&chi, &freqs);
    let mut diag = MleDiagnostics {
        iterations: 0,
        converged: false,
        stop_reason: StopReason::Running,
        log_likelihood: vec![ll],
        final_change: f64::INFINITY,
        positivity_margin: 0.25,
        diluted_steps: 0,
        newton_steps: 0,
    };

    for iteration in 1..=options.max_iter {
        diag.iterations = iteration;
        let raw = design.probabilities(&chi);
        let probs = raw.map(|p| p.max(PROBABILITY_FLOOR));
        let prob_total: f64 = probs.iter().sum();
        let mut k = CMat::zeros(4, 4);
        for ((op, f), p) in design.operators.iter().zip(freqs).zip(probs) {
            if f > 0.0 {
                k += op * c(f / p, 0.0);
            }
        }
        // Scaled so that the step operator is the identity at a stationary point.
        let step = &design.sum_inverse * k * c(prob_total / data.total, 0.0);
        let gain_of = |trial: &CMat| likelihood_gain(&raw, &(trial - &chi), &freqs, data.total);

        let candidate = normalized_congruence(&step, &chi);
        let change = max_abs_diff(&candidate, &chi);
        let candidate_gain = gain_of(&candidate);
        diag.final_change = change;
        if change < options.tol {
            if candidate_gain >= 0.0 {
                chi = candidate;
                ll += candidate_gain;
                diag.log_likelihood.push(ll);
            }
            diag.converged = true;
            diag.stop_reason = StopReason::Tolerance;
            break;
        }
        // For rank-deficient optima the plain step converges only
        // sublinearly, so a projected Newton step is tried alongside it.
        // Newton steps over all Hermitian matrices and over the faces of
        // rank 1 to 3 spanned by the leading eigenvectors; overshooting steps
        // are halved a few times.
        let mut best_newton: Option<(CMat, f64)> = None;
        if let Ok(eig) = eigen_hermitian(&chi) {
            for null in [&[][..], &[3], &[2, 3], &[1, 2, 3]] {
                let basis = face_basis(&eig.vectors, null);
                let direction = newton_direction(&basis, &probs, &freqs, data.total);
                let mut length = 1.0;
                let mut found = false;
                for _ in 0..NEWTON_HALVINGS {
                    if let Some(trial) = project_positive(&(&chi + &direction * c(length, 0.0))) {
                        let gain = gain_of(&trial);
                        if gain > best_newton.as_ref().map_or(0.0, |b| b.1) {
                            best_newton = Some((trial, gain));
                            found = true;
                        } else if found {
                            break;
                        }
                    }
                    length *= 0.5;
                }
            }
        }
        if let Some((newton, newton_gain)) = best_newton {
            if newton_gain > candidate_gain.max(0.0) {
                diag.final_change = max_abs_diff(&newton, &chi);
                diag.newton_steps += 1;
                chi = newton;
                ll += newton_gain;
                diag.log_likelihood.push(ll);
                continue;
            }
        }
        if candidate_gain >= 0.0 {
            chi = candidate;
            ll += candidate_gain;
            diag.log_likelihood.push(ll);
            continue;
        }
        if -candidate_gain <= LIKELIHOOD_RESOLUTION * data.total {
            diag.converged = true;
            diag.stop_reason = StopReason::LikelihoodResolution;
            break;
        }

        diag.diluted_steps += 1;
        let mut best_diluted = f64::NEG_INFINITY;
        let mut s = 0.5;
        loop {
            if s < MIN_DILUTION {
                if -best_diluted <= LIKELIHOOD_RESOLUTION * data.total {
                    diag.converged = true;
                    diag.stop_reason = StopReason::LikelihoodResolution;
                    break;
                }
                return Err(Error::NonConvergence {
                    iterations: iteration,
                    last_change: change,
                    reason: "no diluted step increases the likelihood",
                });
            }
            let mixed = &identity * c(1.0 - s, 0.0) + &step * c(s, 0.0);
            let diluted = normalized_congruence(&mixed, &chi);
            let diluted_gain = gain_of(&diluted);
            best_diluted = best_diluted.max(diluted_gain);
            if diluted_gain >= 0.0 {
                diag.final_change = max_abs_diff(&diluted, &chi);
                chi = diluted;
                ll += diluted_gain;
                diag.log_likelihood.push(ll);
                break;
            }
            s *= 0.5;
        }
        if diag.converged {
            break;
        }
    }

    if !diag.converged {
        return Err(Error::NonConvergence {
            iterations: diag.iterations,
            last_change: diag.final_change,
            reason: "iteration budget exhausted",
        });
    }
    let chi = ProcessMatrix::from_unnormalized(chi)?;
    diag.positivity_margin = chi.positivity_margin();
    Ok((chi, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::choi_of_unitary;
    use crate::state::Unitary2;

    fn full_dataset(raw: f64) -> Vec<CountRecord> {
        InputState::ALL
            .into_iter()
            .flat_map(|i| ProjectorLabel::ALL.into_iter().map(move |p| CountRecord::new(i, p, raw)))
            .collect()
    }

    #[test]
    fn correction_examples() {
        let mut records = full_dataset(100.0);
        let data = correct_counts(&records).unwrap();
        assert_eq!(data.frequency(InputState::H, ProjectorLabel::H), 100.0);

        records[0].accidental = 10.0;
        records[0].efficiency = 0.5;
        records[1].raw = 5.0;
        records[1].accidental = 9.0;
        let data = correct_counts(&records).unwrap();
        assert_eq!(data.frequency(InputState::H, ProjectorLabel::H), 180.0);
        assert_eq!(data.frequency(InputState::H, ProjectorLabel::V), 0.0);
        assert_eq!(data.clamped, vec![(InputState::H, ProjectorLabel::V)]);
    }

    #[test]
    fn missing_and_duplicate_records() {
        let mut records = full_dataset(1.0);
        let removed = records.remove(13);
        match correct_counts(&records) {
            Err(Error::MissingRecord(i, p)) => {
                assert_eq!((i, p), (removed.input, removed.projector))
            }
            other => panic!("unexpected {other:?}"),
        }
        records.push(records[3]);
        match correct_counts(&records) {
            Err(Error::DuplicateRecord(i, p)) => {
                assert_eq!((i, p), (records[3].input, records[3].projector))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonpositive_efficiency_rejected() {
        let mut records = full_dataset(1.0);
        records[7].efficiency = 0.0;
        assert!(matches!(
            correct_counts(&records),
            Err(Error::InvalidRecord { index: 7, .. })
        ));
    }

    #[test]
    fn all_zero_counts_are_empty() {
        assert!(matches!(
            correct_counts(&full_dataset(0.0)),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn design_is_informationally_complete() {
        assert_eq!(MeasurementDesign::get().gram_rank(), 16);
    }

    #[test]
    fn zero_frequencies_have_zero_likelihood() {
        let data = CorrectedDataset::from_frequencies([[0.0; 6]; 4]).unwrap();
        assert_eq!(log_likelihood(&ProcessMatrix::depolarizing(), &data), 0.0);
        assert!(matches!(
            mle_reconstruct(&data, MleOptions::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn uniform_data_gives_depolarizing_map() {
        let data = CorrectedDataset::from_frequencies([[7.0; 6]; 4]).unwrap();
        let (chi, diag) = mle_reconstruct(&data, MleOptions::default()).unwrap();
        assert!(diag.converged);
        assert!(max_abs_diff(chi.matrix(), ProcessMatrix::depolarizing().matrix()) < 1e-6);
    }

    #[test]
    fn sigma_z_round_trip() {
        let truth = choi_of_unitary(&Unitary2::pauli_z());
        let data = CorrectedDataset::exact(&truth);
        let (chi, diag) = mle_reconstruct(&data, MleOptions::default()).unwrap();
        let f = linalg::trace_product(chi.matrix(), truth.matrix()).re;
        assert!(f >= 1.0 - 1e-6, "fidelity {f}");
        assert!(diag
            .log_likelihood
            .windows(2)
            .all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let data = CorrectedDataset::from_frequencies([[1.0; 6]; 4]).unwrap();
        let opts = MleOptions { tol: 0.0, ..Default::default() };
        assert!(matches!(mle_reconstruct(&data, opts), Err(Error::Parameter(_))));
    }

    #[test]
    fn iteration_budget_exhaustion_is_reported() {
        let truth = choi_of_unitary(&Unitary2::pauli_x());
        let data = CorrectedDataset::exact(&truth);
        let opts = MleOptions { tol: 1e-10, max_iter: 3 };
        assert!(matches!(
            mle_reconstruct(&data, opts),
            Err(Error::NonConvergence { iterations: 3, .. })
        ));
    }
}
