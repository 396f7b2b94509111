//! Figures of merit on process matrices.

use serde::Serialize;

use crate::choi::ProcessMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, eigen_hermitian, CMat};

/// `F = Tr[χ χ_t] / (Tr[χ] Tr[χ_t])`
pub fn process_fidelity(chi: &ProcessMatrix, target: &ProcessMatrix) -> Result<f64> {
    fidelity_of_matrices(chi.matrix(), target.matrix())
}

/// [`process_fidelity`] on raw Hermitian matrices of any positive scale.
pub fn fidelity_of_matrices(chi: &CMat, target: &CMat) -> Result<f64> {
    let (ta, tb) = (chi.trace().re, target.trace().re);
    if ta == 0.0 || tb == 0.0 {
        return Err(Error::ZeroTrace);
    }
    Ok(linalg::trace_product(chi, target).re / (ta * tb))
}

/// Uhlmann fidelity `(Tr √(√χ σ √χ))²` of two unit-trace process matrices.
///
/// Agrees with [`process_fidelity`] whenever either argument is pure, and
/// unlike it reaches 1 for identical mixed processes, so it is the measure to
/// use when scoring a reconstruction against a noisy ground truth.
pub fn uhlmann_fidelity(chi: &ProcessMatrix, sigma: &ProcessMatrix) -> f64 {
    let root = eigen_hermitian(chi.matrix())
        .expect("process matrices are Hermitian")
        .map(|v| v.max(0.0).sqrt());
    let inner = &root * sigma.matrix() * &root;
    let inner = (&inner + inner.adjoint()) * linalg::c(0.5, 0.0);
    let root_sum: f64 = eigen_hermitian(&inner)
        .expect("symmetrized product is Hermitian")
        .values
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    root_sum * root_sum
}

/// `P = Tr[χ²] / (Tr χ)²`
pub fn purity(chi: &ProcessMatrix) -> Result<f64> {
    purity_of_matrix(chi.matrix())
}

pub fn purity_of_matrix(chi: &CMat) -> Result<f64> {
    let tr = chi.trace().re;
    if tr == 0.0 {
        return Err(Error::ZeroTrace);
    }
    Ok(linalg::trace_product(chi, chi).re / (tr * tr))
}

/// Base-2 binary entropy with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Wootters concurrence of χ read as a two-qubit density matrix.
///
/// With `χ = W W†`, `W = V √Λ` from the eigen-decomposition, the `λ_i` are
/// the singular values of the complex symmetric `τ = W^T (σ_y⊗σ_y) W`, whose
/// squares are the eigenvalues of `χ (σ_y⊗σ_y) χ* (σ_y⊗σ_y)`. The singular
/// values are read off the Hermitian dilation `[[0, τ], [τ†, 0]]` so that
/// rank-deficient χ keeps full absolute accuracy.
pub fn concurrence(chi: &ProcessMatrix) -> f64 {
    let eig = eigen_hermitian(chi.matrix()).expect("process matrices are Hermitian");
    let mut w = eig.vectors.clone();
    for (j, &p) in eig.values.iter().enumerate() {
        // tiny negative eigenvalues are rounding noise
        let scale = p.max(0.0).sqrt();
        for i in 0..4 {
            w[(i, j)] *= scale;
        }
    }
    let yy = linalg::pauli_y().kronecker(&linalg::pauli_y());
    let tau = w.transpose() * yy * &w;
    let mut dilation = CMat::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            dilation[(i, 4 + j)] = tau[(i, j)];
            dilation[(4 + j, i)] = tau[(i, j)].conj();
        }
    }
    let singular = eigen_hermitian(&dilation)
        .expect("dilation is Hermitian")
        .values;
    let l: Vec<f64> = singular[..4].iter().map(|v| v.max(0.0)).collect();
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// `E_f = h((1 + √(1 − C²)) / 2)`
pub fn entanglement_of_formation(chi: &ProcessMatrix) -> f64 {
    eof_from_concurrence(concurrence(chi))
}

pub fn eof_from_concurrence(concurrence: f64) -> f64 {
    let c = concurrence.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

/// Mean of pairwise process fidelities.
pub fn average_fidelity(chis: &[ProcessMatrix], targets: &[ProcessMatrix]) -> Result<f64> {
    if chis.len() != targets.len() {
        return Err(Error::LengthMismatch(chis.len(), targets.len()));
    }
    if chis.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for (chi, target) in chis.iter().zip(targets) {
        sum += process_fidelity(chi, target)?;
    }
    Ok(sum / chis.len() as f64)
}

/// The three quantities reported per program.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcessMetrics {
    #[serde(rename = "F")]
    pub fidelity: f64,
    #[serde(rename = "P")]
    pub purity: f64,
    #[serde(rename = "Ef")]
    pub entanglement_of_formation: f64,
}

impl ProcessMetrics {
    pub fn evaluate(chi: &ProcessMatrix, target: &ProcessMatrix) -> Result<Self> {
        Ok(Self {
            fidelity: process_fidelity(chi, target)?,
            purity: purity(chi)?,
            entanglement_of_formation: entanglement_of_formation(chi),
        })
    }
}

/// Mean and sample standard deviation (`n − 1` denominator; zero for one value).
pub fn mean_and_spread(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
