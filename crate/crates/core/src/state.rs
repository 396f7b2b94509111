//! Validated quantum objects: pure states, density matrices, projectors and
//! single-qubit unitaries.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, check_square, eigen_hermitian, hermiticity_defect, max_abs_diff, outer, CMat, CVec,
    I, ONE, ZERO,
};

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const DENSITY_POSITIVITY_TOL: f64 = 1e-10;
const DENSITY_TRACE_TOL: f64 = 1e-10;

/// Amplitude vector of one to three qubits in the `{H, V}` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
    normalized: bool,
}

impl PureState {
    /// Builds a normalized state; fails if the squared norm is not 1.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unnormalized(amplitudes)?;
        let norm2 = state.norm_sqr();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self {
            normalized: true,
            ..state
        })
    }

    /// Wraps an intermediate vector (e.g. a projection residual) that is not
    /// required to have unit norm.
    pub fn unnormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !matches!(len, 2 | 4 | 8) {
            return Err(if len > linalg::MAX_DIM {
                Error::DimensionOverflow(len)
            } else {
                Error::Shape(format!("{len} amplitudes do not describe 1-3 qubits"))
            });
        }
        Ok(Self {
            amplitudes: CVec::from_vec(amplitudes),
            normalized: false,
        })
    }

    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::new(vec![alpha, beta])
    }

    pub fn h() -> Self {
        Self::known(vec![ONE, ZERO])
    }

    pub fn v() -> Self {
        Self::known(vec![ZERO, ONE])
    }

    pub fn d() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::known(vec![s, s])
    }

    pub fn a() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::known(vec![s, -s])
    }

    pub fn r() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::known(vec![s, I * s])
    }

    pub fn l() -> Self {
        let s = c(FRAC_1_SQRT_2, 0.0);
        Self::known(vec![s, -I * s])
    }

    fn known(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes: CVec::from_vec(amplitudes),
            normalized: true,
        }
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalize(&self) -> Result<Self> {
        let norm2 = self.norm_sqr();
        if norm2 <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self {
            amplitudes: &self.amplitudes / c(norm2.sqrt(), 0.0),
            normalized: true,
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Equality of rays: the states agree up to a global phase.
    pub fn equals_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && (self.overlap(other) - self.norm_sqr() * other.norm_sqr()).abs() <= tol
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let amps = linalg::tensor(
            &CMat::from_column_slice(self.dim(), 1, self.amplitudes.as_slice()),
            &CMat::from_column_slice(other.dim(), 1, other.amplitudes.as_slice()),
        )?;
        Ok(Self {
            amplitudes: CVec::from_column_slice(amps.as_slice()),
            normalized: self.normalized && other.normalized,
        })
    }

    pub fn apply(&self, op: &CMat) -> Result<Self> {
        if op.ncols() != self.dim() || op.nrows() != self.dim() {
            return Err(Error::Shape(format!(
                "operator {}×{} on a state of dimension {}",
                op.nrows(),
                op.ncols(),
                self.dim()
            )));
        }
        Ok(Self {
            amplitudes: op * &self.amplitudes,
            normalized: false,
        })
    }

    /// `|ψ⟩⟨ψ|` as a projector matrix (not validated).
    pub fn outer(&self) -> CMat {
        outer(&self.amplitudes)
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.normalize()?.outer())
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix of one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMat);

impl DensityMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        let d = entries.nrows();
        if d != 2 && d != 4 {
            return Err(Error::Shape(format!("density matrix dimension {d}")));
        }
        check_square(&entries, d)?;
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let min = eigen_hermitian(&entries)?.min_value();
        if min < -DENSITY_POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self(entries))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(linalg::identity(dim) * c(1.0 / dim as f64, 0.0))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.0, &self.0).re
    }
}

/// Rank-one orthogonal projector on a single qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector(CMat);

impl Projector {
    pub fn new(entries: CMat) -> Result<Self> {
        check_square(&entries, 2)?;
        let defect = hermiticity_defect(&entries);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let idem = max_abs_diff(&(&entries * &entries), &entries);
        if idem > NORM_TOL {
            return Err(Error::NotProjector(format!("Π² − Π deviates by {idem:.3e}")));
        }
        let tr = entries.trace().re;
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotProjector(format!("trace {tr}")));
        }
        Ok(Self(entries))
    }

    pub fn onto(state: &PureState) -> Result<Self> {
        if state.dim() != 2 {
            return Err(Error::Shape("projector needs a single-qubit state".into()));
        }
        Self::new(state.normalize()?.outer())
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }
}

/// 2×2 unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary2(CMat);

impl Unitary2 {
    pub fn new(entries: CMat) -> Result<Self> {
        check_square(&entries, 2)?;
        let defect = max_abs_diff(&(entries.adjoint() * &entries), &linalg::identity(2));
        if defect > NORM_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self(entries))
    }

    pub fn identity() -> Self {
        Self(linalg::identity(2))
    }

    pub fn pauli_x() -> Self {
        Self(linalg::pauli_x())
    }

    pub fn pauli_y() -> Self {
        Self(linalg::pauli_y())
    }

    pub fn pauli_z() -> Self {
        Self(linalg::pauli_z())
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn with_phase(&self, gamma: f64) -> Self {
        Self(&self.0 * Complex64::from_polar(1.0, gamma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_states_are_normalized() {
        for s in [
            PureState::h(),
            PureState::v(),
            PureState::d(),
            PureState::a(),
            PureState::r(),
            PureState::l(),
        ] {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
            assert!(s.is_normalized());
        }
    }

    #[test]
    fn mutually_unbiased_bases() {
        let bases = [
            (PureState::h(), PureState::v()),
            (PureState::d(), PureState::a()),
            (PureState::r(), PureState::l()),
        ];
        for (i, (a, a_perp)) in bases.iter().enumerate() {
            assert!(a.overlap(a_perp) < 1e-30);
            for (j, (b, b_perp)) in bases.iter().enumerate() {
                if i != j {
                    for x in [a, a_perp] {
                        for y in [b, b_perp] {
                            assert!((x.overlap(y) - 0.5).abs() < 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            PureState::new(vec![ONE, ONE]),
            Err(Error::NotNormalized(_))
        ));
        assert!(PureState::new(vec![ONE, ZERO, ZERO]).is_err());
        assert!(matches!(
            PureState::unnormalized(vec![ZERO; 16]),
            Err(Error::DimensionOverflow(16))
        ));
        assert!(PureState::unnormalized(vec![ZERO; 2])
            .unwrap()
            .normalize()
            .is_err());
        let not_herm = CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, ZERO]);
        assert!(DensityMatrix::new(not_herm.clone()).is_err());
        assert!(Projector::new(not_herm).is_err());
        assert!(matches!(
            DensityMatrix::new(linalg::identity(2)),
            Err(Error::BadTrace(_))
        ));
        let negative = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(matches!(
            DensityMatrix::new(negative),
            Err(Error::NotPositive(_))
        ));
        assert!(matches!(
            Unitary2::new(linalg::identity(2) * c(2.0, 0.0)),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn phase_equality() {
        let h = PureState::h();
        let minus_h = PureState::qubit(-I, ZERO).unwrap();
        assert!(h.equals_up_to_phase(&minus_h, 1e-14));
        assert!(!h.equals_up_to_phase(&PureState::d(), 1e-3));
    }

    #[test]
    fn density_of_pure_state_is_rank_one() {
        let rho = PureState::r().density().unwrap();
        let eig = eigen_hermitian(rho.matrix()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!(eig.values[1].abs() < 1e-14);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn three_qubit_tensor_limit() {
        let hh = PureState::h().tensor(&PureState::h()).unwrap();
        let hhh = hh.tensor(&PureState::h()).unwrap();
        assert_eq!(hhh.qubits(), 3);
        assert!(hhh.tensor(&PureState::h()).is_err());
    }
}
