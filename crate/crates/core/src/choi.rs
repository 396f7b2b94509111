//! Choi matrices of single-qubit operations on `H_in ⊗ H_out`.
//!
//! `χ = (I ⊗ E)(|Φ⁺⟩⟨Φ⁺|)` with `|Φ⁺⟩ = (|HH⟩ + |VV⟩)/√2`, stored with unit
//! trace. The gate is probabilistic, so trace preservation is not required.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, check_square, eigen_hermitian, hermiticity_defect, partial_trace_first, tensor, CMat,
    CVec, ZERO,
};
use crate::state::{DensityMatrix, Projector, Unitary2};

const HERMITIAN_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Unit-trace, positive semidefinite 4×4 Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix(CMat);

impl ProcessMatrix {
    /// Validates a matrix that is already trace-normalized.
    pub fn new(entries: CMat) -> Result<Self> {
        check_square(&entries, 4)?;
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Self::validated(entries)
    }

    /// Rescales a Hermitian positive matrix to unit trace.
    pub fn from_unnormalized(entries: CMat) -> Result<Self> {
        check_square(&entries, 4)?;
        let tr = entries.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::ZeroTrace);
        }
        Self::validated(entries / c(tr, 0.0))
    }

    fn validated(entries: CMat) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("non-finite matrix entry".into()));
        }
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let min = eigen_hermitian(&entries)?.min_value();
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self(entries))
    }

    /// `I₄/4`, the fully depolarizing map.
    pub fn depolarizing() -> Self {
        Self(linalg::identity(4) * c(0.25, 0.0))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    /// Smallest eigenvalue, i.e. how far the matrix sits inside the positive cone.
    pub fn positivity_margin(&self) -> f64 {
        eigen_hermitian(&self.0)
            .map(|e| e.min_value())
            .unwrap_or(f64::NAN)
    }

    /// `(1 − w)·self + w·other`
    pub fn mix(&self, other: &ProcessMatrix, w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Parameter(format!("mixing weight {w} outside [0, 1]")));
        }
        Ok(Self(&self.0 * c(1.0 - w, 0.0) + &other.0 * c(w, 0.0)))
    }

    /// `(u ⊗ I) χ (u† ⊗ I)`: a unitary acting on the input factor.
    pub fn conjugate_input(&self, u: &Unitary2) -> Self {
        let big = u.matrix().kronecker(&linalg::identity(2));
        let m = &big * &self.0 * big.adjoint();
        // restore exact Hermiticity lost to rounding
        Self(CMat::from_fn(4, 4, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj())))
    }
}

/// `|Φ⁺⟩ = (|HH⟩ + |VV⟩)/√2`
pub fn phi_plus() -> CVec {
    let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CVec::from_vec(vec![s, ZERO, ZERO, s])
}

/// `(I ⊗ u)|Φ⁺⟩⟨Φ⁺|(I ⊗ u†)`
pub fn choi_of_unitary(u: &Unitary2) -> ProcessMatrix {
    let big = linalg::identity(2).kronecker(u.matrix());
    let v = big * phi_plus();
    let m = linalg::outer(&v);
    ProcessMatrix(CMat::from_fn(4, 4, |i, j| {
        0.5 * (m[(i, j)] + m[(j, i)].conj())
    }))
}

/// Output of a process on an input state.
#[derive(Debug, Clone)]
pub struct ProcessOutput {
    /// `Tr_in[(ρ^T ⊗ 1) χ]`, generally with trace below one.
    pub rho_out_unnormalized: CMat,
    pub output_trace: f64,
}

impl ProcessOutput {
    pub fn normalized(&self) -> Result<CMat> {
        if !(self.output_trace > 0.0) {
            return Err(Error::ZeroTrace);
        }
        Ok(&self.rho_out_unnormalized / c(self.output_trace, 0.0))
    }
}

/// `ρ_out = Tr_in[(ρ_in^T ⊗ 1_out) χ]`, transposition in the `{H, V}` basis.
pub fn apply_process(chi: &ProcessMatrix, rho_in: &DensityMatrix) -> Result<ProcessOutput> {
    if rho_in.dim() != 2 {
        return Err(Error::Shape("input state must be a single qubit".into()));
    }
    let lifted = tensor(&rho_in.matrix().transpose(), &linalg::identity(2))?;
    let out = partial_trace_first(&(lifted * chi.matrix()))?;
    let output_trace = out.trace().re;
    Ok(ProcessOutput {
        rho_out_unnormalized: out,
        output_trace,
    })
}

/// `ρ^T ⊗ Π`, the operator whose expectation in χ gives `p_jk`.
pub fn measurement_operator(rho: &CMat, pi: &CMat) -> CMat {
    rho.transpose().kronecker(pi)
}

/// `p_jk = Tr[(ρ_j^T ⊗ Π_k) χ]`
pub fn predict_probability(chi: &ProcessMatrix, rho_j: &DensityMatrix, pi_k: &Projector) -> f64 {
    let op = measurement_operator(rho_j.matrix(), pi_k.matrix());
    linalg::trace_product(&op, chi.matrix()).re
}

/// `Tr[A B]` restricted to its real part, for Hermitian arguments.
pub(crate) fn expectation(op: &CMat, chi: &CMat) -> f64 {
    linalg::trace_product(op, chi).re
}
