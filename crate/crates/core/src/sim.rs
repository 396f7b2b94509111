//! Synthetic coincidence data and the end-to-end analysis pipeline.
//!
//! Imperfections are reduced to a white-noise admixture, an optional fixed
//! unitary on the input photon, per-projector detection efficiencies and a
//! flat accidental rate. Counts are Poisson with a seeded ChaCha generator.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::choi::{choi_of_unitary, ProcessMatrix};
use crate::correction::{apply_correction, optimize_correction, CorrectionReport, EulerAngles};
use crate::error::{Error, Result};
use crate::gate::{sign_gate_unitary, NamedProgram, ProgramSpec};
use crate::metrics::{mean_and_spread, ProcessMetrics};
use crate::tomography::{
    correct_counts, mle_reconstruct, CorrectedDataset, CountRecord, InputState, MeasurementDesign,
    MleOptions, ProjectorLabel, SETTINGS,
};

/// How raw counts are drawn from their expected values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    #[default]
    Poisson,
    /// Raw counts equal their expectation (the infinite-statistics limit).
    Expected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Weight ε of `I₄/4` in `(1−ε) χ + ε I₄/4`.
    pub white_noise: f64,
    /// Fixed unitary planted on the input factor.
    pub offset: Option<EulerAngles>,
    /// Average counts per setting.
    pub mean_counts: f64,
    pub accidental_rate: f64,
    /// Missing projectors have efficiency 1.
    pub efficiencies: BTreeMap<ProjectorLabel, f64>,
    pub sampling: Sampling,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            white_noise: 0.0,
            offset: None,
            mean_counts: 1e4,
            accidental_rate: 0.0,
            efficiencies: BTreeMap::new(),
            sampling: Sampling::Poisson,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.white_noise) {
            return Err(Error::Parameter(format!(
                "white noise {} outside [0, 1]",
                self.white_noise
            )));
        }
        if !(self.mean_counts > 0.0) || !self.mean_counts.is_finite() {
            return Err(Error::Parameter(format!(
                "mean counts {} must be positive",
                self.mean_counts
            )));
        }
        if !(self.accidental_rate >= 0.0) || !self.accidental_rate.is_finite() {
            return Err(Error::Parameter(format!(
                "accidental rate {} must be nonnegative",
                self.accidental_rate
            )));
        }
        for (label, eff) in &self.efficiencies {
            if !(*eff > 0.0) || !eff.is_finite() {
                return Err(Error::Parameter(format!("efficiency {eff} for {label} must be positive")));
            }
        }
        Ok(())
    }

    pub fn efficiency(&self, projector: ProjectorLabel) -> f64 {
        self.efficiencies.get(&projector).copied().unwrap_or(1.0)
    }
}

/// Target SIGN process with the planted offset and white noise applied.
pub fn ground_truth(p: &ProgramSpec, noise: &NoiseModel) -> Result<ProcessMatrix> {
    noise.validate()?;
    let mut chi = choi_of_unitary(&sign_gate_unitary(p));
    if let Some(offset) = noise.offset {
        chi = apply_correction(&chi, &offset.unitary());
    }
    chi.mix(&ProcessMatrix::depolarizing(), noise.white_noise)
}

/// Expected raw count of every setting, in `[input][projector]` order.
pub fn expected_counts(chi_true: &ProcessMatrix, noise: &NoiseModel) -> Result<[f64; SETTINGS]> {
    noise.validate()?;
    let probs = MeasurementDesign::get()
        .probabilities(chi_true.matrix())
        .map(|p| p.max(0.0));
    let mean_p = probs.iter().sum::<f64>() / SETTINGS as f64;
    let mut out = [0.0; SETTINGS];
    for (idx, p) in probs.into_iter().enumerate() {
        let projector = ProjectorLabel::ALL[idx % 6];
        out[idx] = noise.mean_counts * p / mean_p * noise.efficiency(projector) + noise.accidental_rate;
    }
    Ok(out)
}

/// Draws the 24 raw counts. Identical seeds give identical records.
pub fn generate_counts(
    chi_true: &ProcessMatrix,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    let expected = expected_counts(chi_true, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(SETTINGS);
    for (idx, mean) in expected.into_iter().enumerate() {
        let input = InputState::ALL[idx / 6];
        let projector = ProjectorLabel::ALL[idx % 6];
        let raw = match noise.sampling {
            Sampling::Expected => mean,
            Sampling::Poisson if mean > 0.0 => Poisson::new(mean)
                .map_err(|e| Error::Parameter(format!("Poisson mean {mean}: {e}")))?
                .sample(&mut rng),
            Sampling::Poisson => 0.0,
        };
        records.push(CountRecord {
            input,
            projector,
            raw,
            accidental: noise.accidental_rate,
            efficiency: noise.efficiency(projector),
        });
    }
    Ok(records)
}

/// Decorrelated per-program seed derived from the master seed (SplitMix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One program's row of the pipeline.
#[derive(Debug, Clone)]
pub struct ProgramRun {
    pub program: NamedProgram,
    pub truth: ProcessMatrix,
    pub target: ProcessMatrix,
    pub records: Vec<CountRecord>,
    pub data: CorrectedDataset,
    pub reconstructed: ProcessMatrix,
    pub iterations: usize,
    pub final_log_likelihood: f64,
    pub uncorrected: ProcessMetrics,
    pub corrected: ProcessMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSpread {
    pub mean: f64,
    pub std: f64,
}

impl MeanSpread {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_and_spread(values);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricAverages {
    #[serde(rename = "F")]
    pub fidelity: MeanSpread,
    #[serde(rename = "P")]
    pub purity: MeanSpread,
    #[serde(rename = "Ef")]
    pub entanglement_of_formation: MeanSpread,
}

impl MetricAverages {
    pub fn of(rows: &[ProcessMetrics]) -> Self {
        let col = |f: fn(&ProcessMetrics) -> f64| MeanSpread::of(&rows.iter().map(f).collect::<Vec<_>>());
        Self {
            fidelity: col(|m| m.fidelity),
            purity: col(|m| m.purity),
            entanglement_of_formation: col(|m| m.entanglement_of_formation),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub runs: Vec<ProgramRun>,
    pub correction: CorrectionReport,
    /// Averages of the corrected metrics.
    pub averages: MetricAverages,
    pub uncorrected_averages: MetricAverages,
}

/// Per-program noise for [`run_pipeline_with`].
#[derive(Debug, Clone)]
pub struct PipelineEntry {
    pub program: NamedProgram,
    pub noise: NoiseModel,
}

/// Runs every program under the same noise model.
pub fn run_pipeline(
    programs: &[NamedProgram],
    noise: &NoiseModel,
    seed: u64,
) -> Result<PipelineReport> {
    let entries: Vec<PipelineEntry> = programs
        .iter()
        .map(|p| PipelineEntry {
            program: *p,
            noise: noise.clone(),
        })
        .collect();
    run_pipeline_with(&entries, seed, MleOptions::default())
}

/// Truth → counts → corrections → MLE → metrics per program, then one
/// joint unitary correction across all of them.
pub fn run_pipeline_with(
    entries: &[PipelineEntry],
    seed: u64,
    mle: MleOptions,
) -> Result<PipelineReport> {
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    let label_err = |p: &NamedProgram, e: Error| match e {
        e @ Error::NonConvergence { .. } => e,
        other => Error::Format(format!("{}: {other}", p.name())),
    };

    let mut runs = Vec::with_capacity(entries.len());
    for (index, entry) in entries.iter().enumerate() {
        let program = entry.program;
        let stage = || -> Result<ProgramRun> {
            let truth = ground_truth(&program.spec, &entry.noise)?;
            let target = choi_of_unitary(&sign_gate_unitary(&program.spec));
            let records = generate_counts(&truth, &entry.noise, derive_seed(seed, index as u64))?;
            let data = correct_counts(&records)?;
            let (reconstructed, diag) = mle_reconstruct(&data, mle)?;
            let uncorrected = ProcessMetrics::evaluate(&reconstructed, &target)?;
            Ok(ProgramRun {
                program,
                truth,
                target,
                records,
                data,
                reconstructed,
                iterations: diag.iterations,
                final_log_likelihood: diag.final_log_likelihood(),
                uncorrected,
                corrected: uncorrected,
            })
        };
        runs.push(stage().map_err(|e| label_err(&program, e))?);
    }

    let chis: Vec<ProcessMatrix> = runs.iter().map(|r| r.reconstructed.clone()).collect();
    let targets: Vec<ProcessMatrix> = runs.iter().map(|r| r.target.clone()).collect();
    let correction = optimize_correction(&chis, &targets)?;
    for (run, chi) in runs.iter_mut().zip(&correction.corrected) {
        run.corrected = ProcessMetrics::evaluate(chi, &run.target)?;
    }
    let corrected_rows: Vec<ProcessMetrics> = runs.iter().map(|r| r.corrected).collect();
    let uncorrected_rows: Vec<ProcessMetrics> = runs.iter().map(|r| r.uncorrected).collect();
    Ok(PipelineReport {
        averages: MetricAverages::of(&corrected_rows),
        uncorrected_averages: MetricAverages::of(&uncorrected_rows),
        correction: CorrectionReport::from(&correction),
        runs,
    })
}

/// White-noise weight that gives fidelity `f` against a rank-one target:
/// `F = (1 − ε) + ε/4`.
pub fn white_noise_for_fidelity(f: f64) -> f64 {
    4.0 * (1.0 - f) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::ProgramLabel;
    use crate::linalg::max_abs_diff;
    use crate::metrics::process_fidelity;

    fn phi(label: ProgramLabel) -> ProgramSpec {
        label.spec()
    }

    #[test]
    fn ground_truth_limits() {
        let p = phi(ProgramLabel::Phi2);
        let ideal = choi_of_unitary(&sign_gate_unitary(&p));
        let clean = ground_truth(&p, &NoiseModel::default()).unwrap();
        assert!(max_abs_diff(clean.matrix(), ideal.matrix()) < 1e-15);
        let full = NoiseModel {
            white_noise: 1.0,
            ..Default::default()
        };
        for label in ProgramLabel::ALL {
            let chi = ground_truth(&phi(label), &full).unwrap();
            assert!(max_abs_diff(chi.matrix(), ProcessMatrix::depolarizing().matrix()) < 1e-15);
        }
    }

    #[test]
    fn white_noise_fidelity_formula() {
        for eps in [0.0, 0.05, 0.092, 0.3, 0.77, 1.0] {
            let noise = NoiseModel {
                white_noise: eps,
                ..Default::default()
            };
            let p = phi(ProgramLabel::Phi5);
            let chi = ground_truth(&p, &noise).unwrap();
            let f = process_fidelity(&chi, &choi_of_unitary(&sign_gate_unitary(&p))).unwrap();
            assert!((f - ((1.0 - eps) + eps / 4.0)).abs() < 1e-14);
        }
        assert!((white_noise_for_fidelity(0.931) - 0.092).abs() < 1e-12);
    }

    #[test]
    fn invalid_noise_rejected() {
        let p = phi(ProgramLabel::Phi1);
        for noise in [
            NoiseModel { white_noise: 1.5, ..Default::default() },
            NoiseModel { mean_counts: 0.0, ..Default::default() },
            NoiseModel { accidental_rate: -1.0, ..Default::default() },
            NoiseModel {
                efficiencies: [(ProjectorLabel::A, 0.0)].into_iter().collect(),
                ..Default::default()
            },
        ] {
            assert!(matches!(ground_truth(&p, &noise), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn seeded_counts_are_reproducible() {
        let chi = ground_truth(&phi(ProgramLabel::Phi3), &NoiseModel::default()).unwrap();
        let a = generate_counts(&chi, &NoiseModel::default(), 11).unwrap();
        let b = generate_counts(&chi, &NoiseModel::default(), 11).unwrap();
        let c = generate_counts(&chi, &NoiseModel::default(), 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 24);
    }

    #[test]
    fn d_input_splits_zero_to_one_under_sigma_z() {
        let chi = ground_truth(&phi(ProgramLabel::Phi1), &NoiseModel::default()).unwrap();
        let noise = NoiseModel {
            sampling: Sampling::Expected,
            ..Default::default()
        };
        let data = correct_counts(&generate_counts(&chi, &noise, 0).unwrap()).unwrap();
        assert!(data.frequency(InputState::D, ProjectorLabel::D).abs() < 1e-9);
        assert!(data.frequency(InputState::D, ProjectorLabel::A) > 1.0);
    }

    #[test]
    fn large_counts_approach_probabilities() {
        let noise = NoiseModel {
            white_noise: 0.2,
            mean_counts: 1e9,
            ..Default::default()
        };
        let chi = ground_truth(&phi(ProgramLabel::Phi4), &noise).unwrap();
        let data = correct_counts(&generate_counts(&chi, &noise, 3).unwrap()).unwrap();
        let exact = CorrectedDataset::exact(&chi);
        let scale = data.total() / exact.total();
        for input in InputState::ALL {
            for projector in ProjectorLabel::ALL {
                let want = exact.frequency(input, projector) * scale;
                let got = data.frequency(input, projector);
                assert!((got - want).abs() <= 1e-3 * want.max(1.0), "{input}/{projector}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn seed_derivation_is_stable_and_distinct() {
        assert_eq!(derive_seed(7, 0), derive_seed(7, 0));
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn noiseless_pipeline_is_exact() {
        let noise = NoiseModel {
            sampling: Sampling::Expected,
            ..Default::default()
        };
        let report = run_pipeline(&NamedProgram::all(), &noise, 1).unwrap();
        for run in &report.runs {
            assert!(run.corrected.fidelity >= 0.9999);
            assert!(run.corrected.purity >= 0.9999);
            assert!(run.corrected.entanglement_of_formation >= 0.9999);
        }
    }

    #[test]
    fn planted_offset_is_recovered() {
        let noise = NoiseModel {
            offset: Some(EulerAngles::new(0.4, 0.5, 1.3)),
            sampling: Sampling::Expected,
            ..Default::default()
        };
        let report = run_pipeline(&NamedProgram::all(), &noise, 1).unwrap();
        assert!(report.correction.fbar_before < 1.0 - 1e-3);
        assert!(report.correction.fbar_after >= 1.0 - 1e-5);
    }

    #[test]
    fn empty_program_list_rejected() {
        assert!(matches!(
            run_pipeline(&[], &NoiseModel::default(), 0),
            Err(Error::EmptyInput)
        ));
    }
}
