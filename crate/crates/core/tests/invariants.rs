use proptest::prelude::*;

use randcirc::circuit::CircuitSpec;
use randcirc::haar::{sample_haar_state, sample_u2, Rng};
use randcirc::linalg::{CMatrix, C64};
use randcirc::qcore::{fidelity_pure, StateVector};
use randcirc::stats::{ks_statistic, meyer_wallach_q};

fn haar_state(n_qubits: usize, seed: u64) -> StateVector {
    sample_haar_state(1 << n_qubits, &mut Rng::seed_from_u64(seed)).unwrap()
}

/// Tr[ρ_i²] from the full projector |ψ⟩⟨ψ| with the other qubits traced out
/// index by index.
#[allow(clippy::needless_range_loop)]
fn brute_force_purity(psi: &StateVector, qubit: usize) -> f64 {
    let n = psi.n_qubits();
    let d = psi.dim();
    let a = psi.amplitudes();
    let mut proj = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            proj[(i, j)] = a[i] * a[j].conj();
        }
    }
    let bit = n - 1 - qubit;
    let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            for env in 0..d {
                if (env >> bit) & 1 != 0 {
                    continue;
                }
                rho[r][c] += proj[(env | (r << bit), env | (c << bit))];
            }
        }
    }
    let mut tr = C64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            tr += rho[r][c] * rho[c][r];
        }
    }
    tr.re
}

/// Exchanges qubits `a` and `b` by permuting amplitudes.
fn swap_qubits(psi: &StateVector, a: usize, b: usize) -> StateVector {
    let n = psi.n_qubits();
    let (ba, bb) = (n - 1 - a, n - 1 - b);
    let mut out = vec![C64::new(0.0, 0.0); psi.dim()];
    for (k, &amp) in psi.amplitudes().iter().enumerate() {
        let (x, y) = ((k >> ba) & 1, (k >> bb) & 1);
        let mut j = k & !(1 << ba) & !(1 << bb);
        j |= y << ba;
        j |= x << bb;
        out[j] = amp;
    }
    StateVector::from_amplitudes(out).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_sequences_preserve_norm(n in 2usize..8, depth in 0usize..30, seed in any::<u64>()) {
        let c = CircuitSpec::sample_seeded(n, depth, seed).unwrap();
        let mut s = haar_state(n, seed ^ 1);
        c.apply(&mut s).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn zz_layer_is_diagonal(n in 2usize..8, angle in -10.0f64..10.0, seed in any::<u64>()) {
        let psi = haar_state(n, seed);
        let mut s = psi.clone();
        s.apply_zz_coupling_layer(angle).unwrap();
        for (a, b) in s.amplitudes().iter().zip(psi.amplitudes()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn reduced_purity_bounds_and_brute_force(n in 1usize..5, seed in any::<u64>()) {
        let psi = haar_state(n, seed);
        for q in 0..n {
            let p = psi.reduced_qubit_purity(q).unwrap();
            prop_assert!(p >= 0.5 - 1e-12 && p <= 1.0 + 1e-12);
            prop_assert!((p - brute_force_purity(&psi, q)).abs() <= 1e-10);
        }
    }

    #[test]
    fn q_is_bounded(n in 2usize..9, seed in any::<u64>(), depth in 0usize..6) {
        let mut s = StateVector::zero(n).unwrap();
        CircuitSpec::sample_seeded(n, depth, seed).unwrap().apply(&mut s).unwrap();
        let q = meyer_wallach_q(&s).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn q_is_local_unitary_invariant(n in 2usize..7, seed in any::<u64>()) {
        let psi = haar_state(n, seed);
        let mut rng = Rng::seed_from_u64(seed.wrapping_add(17));
        let mut rotated = psi.clone();
        for q in 0..n {
            rotated.apply_single_qubit_gate(&sample_u2(&mut rng), q).unwrap();
        }
        let a = meyer_wallach_q(&psi).unwrap();
        let b = meyer_wallach_q(&rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn q_is_permutation_invariant(n in 2usize..7, seed in any::<u64>(), a in 0usize..6, b in 0usize..6) {
        let (a, b) = (a % n, b % n);
        let psi = haar_state(n, seed);
        let swapped = swap_qubits(&psi, a, b);
        prop_assert!((meyer_wallach_q(&psi).unwrap() - meyer_wallach_q(&swapped).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn inverse_undoes_circuit(n in 2usize..7, depth in 0usize..40, seed in any::<u64>()) {
        let c = CircuitSpec::sample_seeded(n, depth, seed).unwrap();
        let psi = haar_state(n, seed.rotate_left(7));
        let mut s = psi.clone();
        c.apply(&mut s).unwrap();
        c.apply_inverse(&mut s).unwrap();
        prop_assert!((fidelity_pure(&s, &psi).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn serialization_round_trips(n in 2usize..6, depth in 0usize..6, seed in any::<u64>()) {
        let c = CircuitSpec::sample_seeded(n, depth, seed).unwrap();
        prop_assert_eq!(CircuitSpec::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn ks_matches_double_loop(samples in prop::collection::vec(0.0f64..1.0, 1..100), power in 0.5f64..3.0) {
        let cdf = |x: f64| x.clamp(0.0, 1.0).powf(power);
        let n = samples.len() as f64;
        let mut brute = 0.0f64;
        for &x in &samples {
            let le = samples.iter().filter(|&&y| y <= x).count() as f64 / n;
            let lt = samples.iter().filter(|&&y| y < x).count() as f64 / n;
            brute = brute.max((le - cdf(x)).abs()).max((lt - cdf(x)).abs());
        }
        prop_assert!((ks_statistic(&samples, cdf).unwrap() - brute).abs() <= 1e-12);
    }
}
