//! Fixed unitary offset on the input photon and its removal.
//!
//! All reconstructed processes share one unknown input-side unitary. The
//! correction `δΣ` is parametrized by ZYZ Euler angles and chosen to maximize
//! the mean process fidelity over all programs: a coarse grid over the angle
//! box seeds a Nelder–Mead refinement.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::choi::ProcessMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, ZERO};
use crate::metrics::{average_fidelity, process_fidelity};
use crate::simplex::{self, NelderMeadOptions};
use crate::state::Unitary2;

/// `δΣ = R_z(α) R_y(β) R_z(γ)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// `diag(e^{−it/2}, e^{it/2})`
pub fn rz(t: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -t / 2.0), ZERO, ZERO, Complex64::from_polar(1.0, t / 2.0)],
    )
}

/// `[[cos(t/2), −sin(t/2)], [sin(t/2), cos(t/2)]]`
pub fn ry(t: f64) -> CMat {
    let (s, co) = (t / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    pub fn unitary(&self) -> Unitary2 {
        Unitary2::new(rz(self.alpha) * ry(self.beta) * rz(self.gamma)).expect("rotations are unitary")
    }

    /// Equivalent angles with `α, γ ∈ [0, 2π)` and `β ∈ [0, π]`. The
    /// resulting unitary agrees with the original up to a global phase.
    pub fn canonical(&self) -> Self {
        let mut alpha = self.alpha;
        let mut gamma = self.gamma;
        let mut beta = self.beta.rem_euclid(TAU);
        if beta > PI {
            // R_y(2π − β) = −σ_z R_y(β) σ_z, and σ_z ∝ R_z(π).
            beta = TAU - beta;
            alpha += PI;
            gamma += PI;
        }
        Self {
            alpha: wrap(alpha),
            beta,
            gamma: wrap(gamma),
        }
    }

    /// Rotation angle of the SU(2) element, in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        let tr = self.unitary().matrix().trace().norm();
        2.0 * (tr / 2.0).clamp(0.0, 1.0).acos()
    }
}

fn wrap(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// `χ̃ = (δΣ ⊗ 1) χ (δΣ† ⊗ 1)`
pub fn apply_correction(chi: &ProcessMatrix, dsigma: &Unitary2) -> ProcessMatrix {
    chi.conjugate_input(dsigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
}

impl Default for GridShape {
    fn default() -> Self {
        Self {
            alpha: 16,
            beta: 8,
            gamma: 16,
        }
    }
}

impl GridShape {
    fn points(&self) -> impl Iterator<Item = EulerAngles> + '_ {
        let beta_step = if self.beta > 1 {
            PI / (self.beta - 1) as f64
        } else {
            0.0
        };
        (0..self.alpha).flat_map(move |i| {
            (0..self.beta).flat_map(move |j| {
                (0..self.gamma).map(move |k| EulerAngles {
                    alpha: TAU * i as f64 / self.alpha as f64,
                    beta: beta_step * j as f64,
                    gamma: TAU * k as f64 / self.gamma as f64,
                })
            })
        })
    }
}

#[derive(Debug, Clone)]
pub struct CorrectionResult {
    pub angles: EulerAngles,
    pub corrected: Vec<ProcessMatrix>,
    pub fbar_before: f64,
    pub fbar: f64,
    /// Best grid point and its mean fidelity.
    pub grid_best: (EulerAngles, f64),
    pub refinement_iterations: usize,
    pub refinement_converged: bool,
    /// Best mean fidelity after each simplex iteration.
    pub refinement_trace: Vec<f64>,
}

/// Report form of a correction run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub fbar_before: f64,
    pub fbar_after: f64,
}

impl From<&CorrectionResult> for CorrectionReport {
    fn from(r: &CorrectionResult) -> Self {
        Self {
            alpha: r.angles.alpha,
            beta: r.angles.beta,
            gamma: r.angles.gamma,
            fbar_before: r.fbar_before,
            fbar_after: r.fbar,
        }
    }
}

fn mean_corrected_fidelity(
    chis: &[ProcessMatrix],
    targets: &[ProcessMatrix],
    angles: &EulerAngles,
) -> f64 {
    let u = angles.unitary();
    chis.iter()
        .zip(targets)
        .map(|(chi, t)| process_fidelity(&apply_correction(chi, &u), t).unwrap_or(0.0))
        .sum::<f64>()
        / chis.len() as f64
}

/// Grid search followed by simplex refinement of the mean corrected fidelity.
pub fn optimize_correction(
    chis: &[ProcessMatrix],
    targets: &[ProcessMatrix],
) -> Result<CorrectionResult> {
    optimize_correction_with(chis, targets, GridShape::default(), NelderMeadOptions::default())
}

pub fn optimize_correction_with(
    chis: &[ProcessMatrix],
    targets: &[ProcessMatrix],
    grid: GridShape,
    options: NelderMeadOptions,
) -> Result<CorrectionResult> {
    if chis.len() != targets.len() {
        return Err(Error::LengthMismatch(chis.len(), targets.len()));
    }
    if chis.is_empty() {
        return Err(Error::EmptyInput);
    }
    if grid.alpha == 0 || grid.beta == 0 || grid.gamma == 0 {
        return Err(Error::Parameter("grid must have at least one point per axis".into()));
    }
    let fbar_before = average_fidelity(chis, targets)?;

    let mut grid_best = (EulerAngles::IDENTITY, f64::NEG_INFINITY);
    for angles in grid.points() {
        let f = mean_corrected_fidelity(chis, targets, &angles);
        if f > grid_best.1 {
            grid_best = (angles, f);
        }
    }

    let step = [
        PI / grid.alpha as f64,
        PI / (2.0 * grid.beta as f64),
        PI / grid.gamma as f64,
    ];
    let start = [grid_best.0.alpha, grid_best.0.beta, grid_best.0.gamma];
    let refined = simplex::minimize(
        |x: &[f64; 3]| -mean_corrected_fidelity(chis, targets, &EulerAngles::new(x[0], x[1], x[2])),
        start,
        step,
        options,
    );

    let mut angles = EulerAngles::new(refined.x[0], refined.x[1], refined.x[2]);
    let mut fbar = -refined.value;
    // The identity is always admissible, so the correction can never lose.
    if fbar < fbar_before {
        angles = EulerAngles::IDENTITY;
        fbar = fbar_before;
    }
    let angles = angles.canonical();
    let u = angles.unitary();
    let corrected = chis.iter().map(|chi| apply_correction(chi, &u)).collect();
    Ok(CorrectionResult {
        angles,
        corrected,
        fbar_before,
        fbar,
        grid_best,
        refinement_iterations: refined.iterations,
        refinement_converged: refined.converged,
        refinement_trace: refined.trace.into_iter().map(|v| -v).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::choi_of_unitary;
    use crate::gate::{sign_gate_unitary, NamedProgram};
    use crate::linalg::{eigen_hermitian, max_abs_diff};
    use proptest::prelude::*;

    fn targets() -> Vec<ProcessMatrix> {
        NamedProgram::all()
            .iter()
            .map(|p| choi_of_unitary(&sign_gate_unitary(&p.spec)))
            .collect()
    }

    #[test]
    fn identity_correction_is_noop() {
        let chi = ProcessMatrix::depolarizing()
            .mix(&targets()[1], 0.6)
            .unwrap();
        let out = apply_correction(&chi, &Unitary2::identity());
        assert!(max_abs_diff(out.matrix(), chi.matrix()) < 1e-15);
    }

    #[test]
    fn undoes_planted_input_rotation() {
        let u = EulerAngles::new(0.3, 1.1, -0.7).unitary();
        let z = Unitary2::pauli_z();
        // σ_z U^T acting on the output equals U on the input factor.
        let planted = choi_of_unitary(&z.compose(&u.transpose()));
        let recovered = apply_correction(&planted, &u.adjoint());
        assert!(max_abs_diff(recovered.matrix(), choi_of_unitary(&z).matrix()) < 1e-14);
    }

    #[test]
    fn already_optimal_inputs() {
        let t = targets();
        let res = optimize_correction(&t, &t).unwrap();
        assert!((res.fbar - 1.0).abs() < 1e-9);
        assert!(res.angles.rotation_angle() < 1e-4);
        assert!(res.fbar >= res.fbar_before);
    }

    #[test]
    fn canonical_angles_lie_in_box_and_keep_action() {
        for (a, b, g) in [(7.0, 4.0, -1.0), (-0.2, -0.3, 0.4), (1.0, 2.0 * PI + 0.5, 3.0)] {
            let e = EulerAngles::new(a, b, g);
            let k = e.canonical();
            assert!((0.0..TAU).contains(&k.alpha));
            assert!((0.0..=PI).contains(&k.beta));
            assert!((0.0..TAU).contains(&k.gamma));
            let chi = choi_of_unitary(&sign_gate_unitary(&NamedProgram::all()[4].spec));
            let x = apply_correction(&chi, &e.unitary());
            let y = apply_correction(&chi, &k.unitary());
            assert!(max_abs_diff(x.matrix(), y.matrix()) < 1e-13);
        }
    }

    #[test]
    fn rejects_mismatched_lists() {
        let t = targets();
        assert!(matches!(
            optimize_correction(&t[..2], &t),
            Err(Error::LengthMismatch(2, 5))
        ));
        assert!(matches!(optimize_correction(&[], &[]), Err(Error::EmptyInput)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn correction_preserves_spectrum_and_trace(a in 0.0..TAU, b in 0.0..PI, g in 0.0..TAU, w in 0.0..1.0f64) {
            let chi = ProcessMatrix::depolarizing().mix(&targets()[3], w).unwrap();
            let out = apply_correction(&chi, &EulerAngles::new(a, b, g).unitary());
            let before = eigen_hermitian(chi.matrix()).unwrap().values;
            let after = eigen_hermitian(out.matrix()).unwrap().values;
            for (x, y) in before.iter().zip(&after) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-12);
        }

        #[test]
        fn fidelity_ignores_correction_phase(a in 0.0..TAU, b in 0.0..PI, g in 0.0..TAU, phase in 0.0..TAU) {
            let t = targets();
            let u = EulerAngles::new(a, b, g).unitary();
            let f1 = process_fidelity(&apply_correction(&t[0], &u), &t[2]).unwrap();
            let f2 = process_fidelity(&apply_correction(&t[0], &u.with_phase(phase)), &t[2]).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-13);
        }
    }
}
