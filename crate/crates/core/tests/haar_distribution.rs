//! Distributional checks of the Haar samplers against closed forms and
//! against each other.

use randcirc::ensemble::UnitarySource;
use randcirc::haar::{sample_haar_state, sample_haar_unitary, sample_u2, Rng};
use randcirc::linalg::{householder_qr, CMatrix, C64};
use randcirc::qcore::StateVector;
use randcirc::stats::{
    cue_element_cdf, eigenvector_component_samples, ks_statistic, ks_two_sample, ks_two_sample_p_value,
    matrix_element_samples, meyer_wallach_q, ElementSelection,
};

fn uniform(y: f64) -> f64 {
    y.clamp(0.0, 1.0)
}

/// Monte Carlo estimate of `E|Tr U|^2` and `E|Tr U|^4`.
fn trace_moments(dim: usize, n: usize, mut draw: impl FnMut(&mut Rng) -> CMatrix) -> (f64, f64) {
    let mut rng = Rng::seed_from_u64(dim as u64 * 31 + 7);
    let (mut m2, mut m4) = (0.0, 0.0);
    for _ in 0..n {
        let t = draw(&mut rng).trace().norm_sqr();
        m2 += t;
        m4 += t * t;
    }
    (m2 / n as f64, m4 / n as f64)
}

#[test]
fn u2_element_is_uniform() {
    let mut rng = Rng::seed_from_u64(101);
    let ys: Vec<f64> = (0..100_000).map(|_| sample_u2(&mut rng).matrix()[0][0].norm_sqr()).collect();
    let ks = ks_statistic(&ys, uniform).unwrap();
    assert!(ks < 0.01, "KS = {ks}");
}

#[test]
fn ginibre_qr_agrees_with_hurwitz_at_dimension_two() {
    let mut rng = Rng::seed_from_u64(102);
    let hurwitz: Vec<f64> = (0..100_000).map(|_| sample_u2(&mut rng).matrix()[0][0].norm_sqr()).collect();
    let qr = matrix_element_samples(
        UnitarySource::Haar { n_qubits: 1 },
        100_000,
        103,
        ElementSelection::Entry { row: 0, col: 0 },
        None,
    )
    .unwrap();
    assert!(ks_statistic(&qr.values, uniform).unwrap() < 0.01);
    let d = ks_two_sample(&hurwitz, &qr.values).unwrap();
    let p = ks_two_sample_p_value(d, hurwitz.len(), qr.len());
    assert!(p > 0.01, "two-sample KS {d}, p = {p}");
}

#[test]
fn element_law_holds_for_small_dimensions() {
    for (n_qubits, seed) in [(1usize, 104u64), (2, 105), (3, 106)] {
        let dim = 1 << n_qubits;
        let s = matrix_element_samples(
            UnitarySource::Haar { n_qubits },
            10_000,
            seed,
            ElementSelection::Entry { row: 1, col: 0 },
            None,
        )
        .unwrap();
        let ks = ks_statistic(&s.values, |y| cue_element_cdf(dim, y)).unwrap();
        assert!(ks < 0.02, "D = {dim}: KS = {ks}");
    }
}

#[test]
fn pooled_elements_at_dimension_sixteen() {
    let s = matrix_element_samples(
        UnitarySource::Haar { n_qubits: 4 },
        40,
        107,
        ElementSelection::All,
        None,
    )
    .unwrap();
    assert_eq!(s.len(), 40 * 256);
    let ks = ks_statistic(&s.values, |y| cue_element_cdf(16, y)).unwrap();
    assert!(ks < 0.02, "KS = {ks}");
}

#[test]
fn trace_moments_match_cue() {
    // For the CUE with D >= 2: E|Tr U|^2 = 1 and E|Tr U|^4 = 2. Column
    // moduli do not see the phase correction; the trace does.
    for dim in [2usize, 4, 8] {
        let (m2, m4) = trace_moments(dim, 40_000, |rng| {
            sample_haar_unitary(dim, rng).unwrap().into_matrix()
        });
        assert!((m2 - 1.0).abs() < 0.05, "D={dim}: E|Tr U|^2 = {m2}");
        assert!((m4 - 2.0).abs() < 0.2, "D={dim}: E|Tr U|^4 = {m4}");
    }
}

#[test]
fn uncorrected_qr_is_not_haar() {
    // Plain Householder Q without rephasing. At D = 2 it is a reflection
    // with zero trace; at D = 4 its fourth trace moment misses the CUE value.
    let plain = |dim: usize| {
        move |rng: &mut Rng| {
            let data = (0..dim * dim).map(|_| rng.complex_normal()).collect();
            householder_qr(&CMatrix::from_row_major(dim, dim, data).unwrap()).unwrap().q
        }
    };
    let (m2, _) = trace_moments(2, 10_000, plain(2));
    assert!(m2 < 1e-20, "uncorrected D=2 E|Tr Q|^2 = {m2}");
    let (_, m4) = trace_moments(4, 40_000, plain(4));
    assert!((m4 - 2.0).abs() > 0.2, "uncorrected D=4 E|Tr Q|^4 = {m4}");
}

#[test]
fn left_invariance_under_permutation() {
    // Q of P·U|0⟩ versus Q of U|0⟩ for a fixed basis permutation P.
    let dim = 8;
    let perm = [3usize, 7, 0, 5, 1, 6, 2, 4];
    let q_of = |u: &CMatrix| {
        let col = u.column(0);
        meyer_wallach_q(&StateVector::from_amplitudes(col).unwrap()).unwrap()
    };
    let mut rng_a = Rng::seed_from_u64(108);
    let mut rng_b = Rng::seed_from_u64(109);
    let mut plain = Vec::new();
    let mut permuted = Vec::new();
    for _ in 0..10_000 {
        plain.push(q_of(sample_haar_unitary(dim, &mut rng_a).unwrap().matrix()));
        let u = sample_haar_unitary(dim, &mut rng_b).unwrap().into_matrix();
        let mut pu = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                pu[(perm[i], j)] = u[(i, j)];
            }
        }
        permuted.push(q_of(&pu));
    }
    let d = ks_two_sample(&plain, &permuted).unwrap();
    let p = ks_two_sample_p_value(d, plain.len(), permuted.len());
    assert!(p > 0.01, "two-sample KS {d}, p = {p}");
}

#[test]
fn haar_state_mean_q_matches_cue_average() {
    let mut rng = Rng::seed_from_u64(110);
    let qs: Vec<f64> = (0..2000)
        .map(|_| meyer_wallach_q(&sample_haar_state(16, &mut rng).unwrap()).unwrap())
        .collect();
    let n = qs.len() as f64;
    let mean = qs.iter().sum::<f64>() / n;
    let std = (qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 14.0 / 17.0).abs() <= 3.0 * std / n.sqrt(), "mean {mean}");
}

#[test]
fn haar_eigenvectors_follow_element_law() {
    // 157 matrices × 64 components ≈ 10^4 pooled samples.
    let s = eigenvector_component_samples(UnitarySource::Haar { n_qubits: 3 }, 157, 111, None).unwrap();
    assert_eq!(s.skipped_trials, 0);
    assert!(s.len() >= 10_000);
    let ks = ks_statistic(&s.values, |y| cue_element_cdf(8, y)).unwrap();
    assert!(ks < 0.02, "KS = {ks}");

    // Cross-check against pooled matrix elements of independent draws.
    let elems = matrix_element_samples(UnitarySource::Haar { n_qubits: 3 }, 157, 112, ElementSelection::All, None)
        .unwrap();
    let d = ks_two_sample(&s.values, &elems.values).unwrap();
    assert!(d < 0.03, "two-sample KS = {d}");
}

#[test]
fn phase_of_haar_entries_is_uniform() {
    let mut rng = Rng::seed_from_u64(113);
    let phases: Vec<f64> = (0..20_000)
        .map(|_| {
            let u = sample_haar_unitary(3, &mut rng).unwrap();
            let z: C64 = u.matrix()[(2, 1)];
            (z.arg() + std::f64::consts::PI) / std::f64::consts::TAU
        })
        .collect();
    assert!(ks_statistic(&phases, uniform).unwrap() < 0.015);
}
