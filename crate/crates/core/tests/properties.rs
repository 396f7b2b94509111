use num_complex::Complex64;
use proptest::prelude::*;
use qproc::choi::{choi_of_unitary, predict_probability, ProcessMatrix};
use qproc::correction::EulerAngles;
use qproc::gate::{sign_gate_unitary, ProgramLabel};
use qproc::linalg::{self, eigen_hermitian, max_abs_diff, partial_trace_first, tensor, CMat};
use qproc::metrics::{concurrence, entanglement_of_formation, eof_from_concurrence, fidelity_of_matrices, process_fidelity, uhlmann_fidelity};
use qproc::sim::{generate_counts, ground_truth, NoiseModel};
use qproc::state::{DensityMatrix, Projector, PureState, Unitary2};
use qproc::tomography::{
    correct_counts, log_likelihood, mle_reconstruct, CorrectedDataset, InputState, MleOptions,
    ProjectorLabel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complex_matrix(n: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(-1.0..1.0f64, 2 * n * n)
        .prop_map(move |v| CMat::from_fn(n, n, |i, j| Complex64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1])))
}

/// Random full-rank density matrix `G G† / Tr`.
fn density(n: usize) -> impl Strategy<Value = CMat> {
    complex_matrix(n).prop_map(move |g| {
        let m = &g * g.adjoint() + linalg::identity(n) * Complex64::new(1e-3, 0.0);
        let tr = m.trace();
        m / tr
    })
}

fn process() -> impl Strategy<Value = ProcessMatrix> {
    density(4).prop_map(|m| ProcessMatrix::new(m).unwrap())
}

fn unitary() -> impl Strategy<Value = Unitary2> {
    (0.0..6.3f64, 0.0..3.15f64, 0.0..6.3f64).prop_map(|(a, b, g)| EulerAngles::new(a, b, g).unitary())
}

fn state() -> impl Strategy<Value = PureState> {
    prop::collection::vec(-1.0..1.0f64, 4)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            PureState::unnormalized(vec![Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])])
                .unwrap()
                .normalize()
                .unwrap()
        })
}

fn blend(a: &CMat, b: &CMat, w: f64) -> CMat {
    a * Complex64::new(w, 0.0) + b * Complex64::new(1.0 - w, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_state_density_is_rank_one(psi in state()) {
        let rho = psi.density().unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let eig = eigen_hermitian(rho.matrix()).unwrap();
        prop_assert!((eig.values[0] - 1.0).abs() < 1e-12 && eig.values[1].abs() < 1e-12);
    }

    #[test]
    fn tensor_is_associative(a in complex_matrix(2), b in complex_matrix(2), c in complex_matrix(2)) {
        let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
        let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&left, &right) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product(rho in density(2), sigma in density(2), scale in 0.1..3.0f64) {
        let rho = rho * Complex64::new(scale, 0.0);
        let reduced = partial_trace_first(&tensor(&rho, &sigma).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&reduced, &(&sigma * rho.trace())) < 1e-12);
    }

    #[test]
    fn probability_is_linear(
        c1 in process(), c2 in process(),
        r1 in density(2), r2 in density(2),
        w in 0.0..1.0f64,
        k in 0usize..6,
    ) {
        let pi = Projector::onto(&ProjectorLabel::ALL[k].state()).unwrap();
        let d1 = DensityMatrix::new(r1.clone()).unwrap();
        let mixed_chi = c1.mix(&c2, 1.0 - w).unwrap();
        let by_chi = predict_probability(&mixed_chi, &d1, &pi);
        let expected = w * predict_probability(&c1, &d1, &pi)
            + (1.0 - w) * predict_probability(&c2, &d1, &pi);
        prop_assert!((by_chi - expected).abs() < 1e-12);

        let d2 = DensityMatrix::new(r2.clone()).unwrap();
        let mixed_rho = DensityMatrix::new(blend(&r1, &r2, w)).unwrap();
        let by_rho = predict_probability(&c1, &mixed_rho, &pi);
        let expected = w * predict_probability(&c1, &d1, &pi)
            + (1.0 - w) * predict_probability(&c1, &d2, &pi);
        prop_assert!((by_rho - expected).abs() < 1e-12);

        let pi2 = Projector::onto(&ProjectorLabel::ALL[(k + 2) % 6].state()).unwrap();
        let mixed_pi = blend(pi.matrix(), pi2.matrix(), w);
        let direct = (linalg::tensor(&r1.transpose(), &mixed_pi).unwrap() * c1.matrix()).trace().re;
        let expected = w * predict_probability(&c1, &d1, &pi)
            + (1.0 - w) * predict_probability(&c1, &d1, &pi2);
        prop_assert!((direct - expected).abs() < 1e-12);
    }

    #[test]
    fn basis_pairs_share_output_trace(chi in process()) {
        for input in InputState::ALL {
            let rho = input.state().density().unwrap();
            let sums: Vec<f64> = [ProjectorLabel::H, ProjectorLabel::D, ProjectorLabel::R]
                .into_iter()
                .map(|k| {
                    let p = predict_probability(&chi, &rho, &Projector::onto(&k.state()).unwrap());
                    let q = predict_probability(&chi, &rho, &Projector::onto(&k.partner().state()).unwrap());
                    prop_assert!(p >= -1e-15 && q >= -1e-15);
                    Ok(p + q)
                })
                .collect::<Result<_, TestCaseError>>()?;
            prop_assert!((sums[0] - sums[1]).abs() < 1e-12 && (sums[0] - sums[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_is_scale_invariant(a in process(), b in process(), s in 0.01..100.0f64, t in 0.01..100.0f64) {
        let base = process_fidelity(&a, &b).unwrap();
        let scaled = fidelity_of_matrices(
            &(a.matrix() * Complex64::new(s, 0.0)),
            &(b.matrix() * Complex64::new(t, 0.0)),
        ).unwrap();
        prop_assert!((base - scaled).abs() < 1e-12);
    }

    #[test]
    fn eof_is_local_unitary_invariant(chi in process(), ua in unitary(), ub in unitary()) {
        let local = tensor(ua.matrix(), ub.matrix()).unwrap();
        let rotated = ProcessMatrix::new(&local * chi.matrix() * local.adjoint()).unwrap();
        let before = entanglement_of_formation(&chi);
        prop_assert!((before - entanglement_of_formation(&rotated)).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reconstruction_is_a_valid_process_for_any_data(
        freqs in prop::collection::vec(prop_oneof![Just(0.0), 0.0..1000.0f64], 24)
            .prop_filter("some counts", |v| v.iter().sum::<f64>() > 0.0)
    ) {
        let mut table = [[0.0; 6]; 4];
        for (i, f) in freqs.iter().enumerate() {
            table[i / 6][i % 6] = *f;
        }
        let data = CorrectedDataset::from_frequencies(table).unwrap();
        let (chi, diag) = mle_reconstruct(&data, MleOptions::default()).unwrap();
        prop_assert!((chi.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(eigen_hermitian(chi.matrix()).unwrap().min_value() >= -1e-10);
        prop_assert!(diag.log_likelihood.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn reconstruction_is_scale_invariant(seed in 0u64..1000, scale in 0.001..1000.0f64) {
        let noise = NoiseModel { white_noise: 0.2, mean_counts: 500.0, ..Default::default() };
        let truth = ground_truth(&ProgramLabel::Phi5.spec(), &noise).unwrap();
        let data = correct_counts(&generate_counts(&truth, &noise, seed).unwrap()).unwrap();
        let (a, _) = mle_reconstruct(&data, MleOptions::default()).unwrap();
        let (b, _) = mle_reconstruct(&data.scaled(scale).unwrap(), MleOptions::default()).unwrap();
        prop_assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-7);
    }
}

#[test]
fn reconstruction_maximizes_likelihood() {
    let noise = NoiseModel { white_noise: 0.15, mean_counts: 2000.0, ..Default::default() };
    let truth = ground_truth(&ProgramLabel::Phi2.spec(), &noise).unwrap();
    let data = correct_counts(&generate_counts(&truth, &noise, 4).unwrap()).unwrap();
    let (chi, _) = mle_reconstruct(&data, MleOptions::default()).unwrap();
    let best = log_likelihood(&chi, &data);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..100 {
        let g = CMat::from_fn(4, 4, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let random = ProcessMatrix::from_unnormalized(&g * g.adjoint()).unwrap();
        // also probe points close to the optimum
        let w = if i % 2 == 0 { 1.0 } else { 1e-3 };
        let probe = chi.mix(&random, w).unwrap();
        assert!(log_likelihood(&probe, &data) <= best + 1e-9 * best.abs(), "probe {i}");
    }
    assert!(log_likelihood(&truth, &data) <= best);
}

#[test]
fn more_counts_give_better_reconstructions() {
    let median_infidelity = |mean_counts: f64| {
        let noise = NoiseModel { white_noise: 0.05, mean_counts, ..Default::default() };
        let truth = ground_truth(&ProgramLabel::Phi4.spec(), &noise).unwrap();
        let mut errs: Vec<f64> = (0..20)
            .map(|seed| {
                let data = correct_counts(&generate_counts(&truth, &noise, seed).unwrap()).unwrap();
                let (chi, _) = mle_reconstruct(&data, MleOptions::default()).unwrap();
                1.0 - uhlmann_fidelity(&chi, &truth)
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        0.5 * (errs[9] + errs[10])
    };
    let (high, low) = (median_infidelity(1e6), median_infidelity(1e3));
    assert!(high < low, "{high} vs {low}");
}

#[test]
fn calibrated_reproductions_have_consistent_entanglement() {
    let mut entanglement = Vec::new();
    for (label, f) in ProgramLabel::ALL.into_iter().zip([0.866, 0.903, 0.931, 0.905, 0.889]) {
        let noise = NoiseModel {
            white_noise: qproc::sim::white_noise_for_fidelity(f),
            sampling: qproc::sim::Sampling::Expected,
            ..Default::default()
        };
        let truth = ground_truth(&label.spec(), &noise).unwrap();
        let (chi, _) = mle_reconstruct(&CorrectedDataset::exact(&truth), MleOptions::default()).unwrap();
        let target = choi_of_unitary(&sign_gate_unitary(&label.spec()));
        assert!((process_fidelity(&chi, &target).unwrap() - f).abs() < 1e-6);
        let c = concurrence(&chi);
        assert!((c - (2.0 * f - 1.0)).abs() < 1e-6, "{label}: C = {c}");
        let ef = entanglement_of_formation(&chi);
        assert!((ef - eof_from_concurrence(c)).abs() < 1e-12);
        entanglement.push((f, ef));
    }
    entanglement.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(entanglement.windows(2).all(|w| w[1].1 > w[0].1), "{entanglement:?}");
    assert!(entanglement.iter().all(|&(_, ef)| ef > 0.6), "{entanglement:?}");
}
