mod common;

use pdit_core::bits::BitString;
use pdit_core::channel::{
    apply_noisy_processing, build_key_state, estimate_rates, model_to_distribution, sample_errors,
    PauliDistribution, ProtocolKind, ProtocolModel,
};
use pdit_core::distill::{
    bit_error_correct, build_rho, construct_untwisting, end_to_end, explicit_pipeline,
    phase_correct, untwist_fidelity, CodeSpec, LinearCode,
};
use pdit_core::pgm::{
    average_error, neumark_extend, pgm_construct, sigma_state, success_probabilities, Ensemble,
};
use pdit_core::qcore::random::random_state;
use pdit_core::qcore::{binary_entropy, CVector, DensityOperator, Layout, StateVector, C64};
use pdit_core::rates::{key_rate, optimize_q, rate_curve, threshold_with, NoisePolicy, RateInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dist(p: [f64; 4]) -> PauliDistribution {
    PauliDistribution::new(p[0], p[1], p[2], p[3]).unwrap()
}

fn model(kind: ProtocolKind, qber: f64) -> ProtocolModel {
    ProtocolModel::new(kind, qber).unwrap()
}

#[test]
fn binary_entropy_at_eleven_percent() {
    let h = binary_entropy(0.11).unwrap();
    assert!((h - common::h2(0.11)).abs() < 1e-15);
    assert!((h - 0.499916).abs() < 1e-6);
}

#[test]
fn lambda_plus_is_top_eigenvalue_of_sigma() {
    for i in 0..=20 {
        for j in 0..=20 {
            let (q, p) = (0.5 * i as f64 / 20.0, j as f64 / 20.0);
            let top = sigma_state(q, p)
                .unwrap()
                .eigenvalues()
                .unwrap()
                .into_iter()
                .fold(0.0, f64::max);
            assert!((pdit_core::rates::lambda_plus(q, p).unwrap() - top).abs() < 1e-12);
            assert!((common::lambda_plus(q, p) - top).abs() < 1e-12);
        }
    }
}

#[test]
fn key_rate_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let mut p: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let q = rng.gen_range(0.0..=0.5);
        let r = key_rate(&RateInput::new(dist(p), q).unwrap()).unwrap();
        assert!((r.rate - common::rate(p, q)).abs() < 1e-12, "{p:?} {q}");
        assert!((r.rate - (1.0 - r.bit_term - r.phase_term + r.shield_term)).abs() < 1e-12);
    }
}

#[test]
fn model_mappings() {
    let six = model_to_distribution(&model(ProtocolKind::SixState, 0.12)).unwrap();
    for (x, y) in six.as_array().iter().zip([0.82, 0.06, 0.06, 0.06]) {
        assert!((x - y).abs() < 1e-15);
    }
    let m = six.marginals();
    assert!((m.phase_given_bit[1] - 0.5).abs() < 1e-15);
    assert!((m.phase_given_bit[0] - 0.06 / 0.88).abs() < 1e-15);
    // A depolarizing channel of strength 3Q/2 flips each basis at rate Q.
    assert!((m.p_x - 0.12).abs() < 1e-15 && (m.p_z - 0.12).abs() < 1e-15);
    let bb = model_to_distribution(&model(ProtocolKind::Bb84, 0.07)).unwrap();
    for (x, y) in bb.as_array().iter().zip(common::bb84(0.07)) {
        assert!((x - y).abs() < 1e-15);
    }
}

#[test]
fn shor_preskill_threshold() {
    let oracle = common::bisect(|x| 1.0 - 2.0 * common::h2(x), 0.01, 0.2, 1e-12);
    assert!((oracle - 0.110028).abs() < 1e-6);
    let t = threshold_with(ProtocolKind::Bb84, NoisePolicy::Fixed(0.0), 1e-7).unwrap();
    assert!((t.qber - oracle).abs() < 1e-6);
    for qber in [0.01, 0.05, 0.1] {
        let r = key_rate(&RateInput::new(dist(common::bb84(qber)), 0.0).unwrap()).unwrap();
        assert!((r.rate - (1.0 - 2.0 * common::h2(qber))).abs() < 1e-13);
    }
}

#[test]
fn noisy_preprocessing_thresholds() {
    // Best rate over a fine grid of q < 1/2, from the formula alone. At q = 1/2
    // every channel gives exactly zero.
    let best = |p: [f64; 4]| {
        (0..5000)
            .map(|i| common::rate(p, 0.5 * i as f64 / 5000.0))
            .fold(f64::MIN, f64::max)
    };
    for p in [common::bb84(0.125), common::six_state(0.3), [0.25; 4]] {
        assert!(common::rate(p, 0.5).abs() < 1e-12);
    }
    assert!(best(common::bb84(0.12)) > 0.0);
    assert!(best(common::bb84(0.125)) < 0.0);
    assert!(best(common::six_state(0.14)) > 0.0);
    assert!(best(common::six_state(0.142)) < 0.0);
    let r = optimize_q(&dist(common::bb84(0.123))).unwrap();
    assert!(r.rate() > 0.0, "{r:?}");
    assert!((r.rate() - best(common::bb84(0.123))).abs() < 1e-9);
    // The optimal added noise climbs towards 1/2 as Q approaches the threshold.
    let stars: Vec<f64> = [0.12, 0.123, 0.124, 0.1241]
        .iter()
        .map(|&qber| optimize_q(&dist(common::bb84(qber))).unwrap().q_star)
        .collect();
    assert!(stars.windows(2).all(|w| w[1] > w[0]), "{stars:?}");
    assert!(stars[1] > 0.3 && stars[3] > 0.45, "{stars:?}");
    let r = optimize_q(&dist(common::bb84(0.05))).unwrap();
    assert!(r.rate() >= 1.0 - 2.0 * common::h2(0.05));
    let r = optimize_q(&PauliDistribution::noiseless()).unwrap();
    assert_eq!((r.q_star, r.rate()), (0.0, 1.0));
}

#[test]
fn curves_dominate_and_bracket() {
    let grid: Vec<f64> = (0..=30).map(|i| 0.15 * i as f64 / 30.0).collect();
    let opt = rate_curve(ProtocolKind::Bb84, &grid, NoisePolicy::Optimized).unwrap();
    let fixed = rate_curve(ProtocolKind::Bb84, &grid, NoisePolicy::Fixed(0.2)).unwrap();
    assert_eq!(opt[0].result.rate, 1.0);
    for (o, f) in opt.iter().zip(&fixed) {
        assert!(o.result.rate >= f.result.rate - 1e-12);
    }
    let cross = opt
        .windows(2)
        .find(|w| w[0].result.rate > 0.0 && w[1].result.rate <= 0.0)
        .unwrap();
    assert!(cross[0].qber <= 0.1241 && 0.1241 <= cross[1].qber);
}

#[test]
fn bell_diagonal_marginal() {
    let p = [0.7, 0.1, 0.1, 0.1];
    let psi = pdit_core::distill::explicit_key_state(1, &dist(p)).unwrap();
    let rho = psi.reduced(&["A", "B"]).unwrap();
    assert!((rho.matrix() - common::bell_diagonal(p)).norm() < 1e-14);
    let block = build_key_state(1, &dist(p)).unwrap().to_density().unwrap();
    assert!((block.matrix() - common::bell_diagonal(p)).norm() < 1e-14);
}

#[test]
fn pauli_identity_on_phi() {
    // X ⊗ XZ and I ⊗ XZX act alike on |Φ>.
    let phi = StateVector::bell_pairs("A", "B", 1).unwrap();
    let one = BitString::ones(1);
    let zero = BitString::zeros(1);
    let left = phi
        .apply_pauli("A", &one, &zero)
        .unwrap()
        .apply_pauli("B", &one, &one)
        .unwrap();
    let right = phi
        .apply_pauli("B", &one, &zero)
        .unwrap()
        .apply_pauli("B", &zero, &one)
        .unwrap()
        .apply_pauli("B", &one, &zero)
        .unwrap();
    assert!((left.amplitudes() - right.amplitudes()).norm() < 1e-15);
}

#[test]
fn key_states_match_transcriptions() {
    let p = [0.7, 0.1, 0.15, 0.05];
    let d = dist(p);
    let q = 0.2;
    for n in 1..=3 {
        let full = LinearCode::full(n).unwrap();
        let s1 = build_key_state(n, &d).unwrap();
        let oracle1 = common::keystate1(n, p);
        assert!(
            (common::overlap(&oracle1, &s1.to_state_vector_with_eve().unwrap()) - 1.0).abs()
                < 1e-10
        );
        assert!(
            (common::overlap(
                &oracle1,
                &pdit_core::distill::explicit_key_state(n, &d).unwrap()
            ) - 1.0)
                .abs()
                < 1e-10
        );

        let s2 = apply_noisy_processing(&s1, q).unwrap();
        let oracle2 = common::keystate2(n, p, q);
        assert!(
            (common::overlap(&oracle2, &s2.to_state_vector_with_eve().unwrap()) - 1.0).abs()
                < 1e-10
        );

        let s3 = bit_error_correct(&s2, &full).unwrap().state;
        let oracle3 = common::keystate3(n, p, q);
        assert!(
            (common::overlap(&oracle3, &s3.to_state_vector_with_eve().unwrap()) - 1.0).abs()
                < 1e-10
        );

        let empty = LinearCode::empty(n).unwrap();
        let pc = phase_correct(&s3, &empty).unwrap();
        let u = construct_untwisting(&pc.cosets, n, q, &d).unwrap();
        let run = explicit_pipeline(&d, q, &full, &empty, &u).unwrap();
        assert!((common::overlap(&oracle3, &run.corrected) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn shielded_state_matches_transcription() {
    for (n, p, q) in [
        (1, [0.8, 0.2, 0.0, 0.0], 0.3),
        (2, common::bb84(0.1), 0.15),
        (2, common::six_state(0.2), 0.4),
    ] {
        let s = apply_noisy_processing(&build_key_state(n, &dist(p)).unwrap(), q).unwrap();
        let rho = build_rho(
            &bit_error_correct(&s, &LinearCode::full(n).unwrap())
                .unwrap()
                .state,
        )
        .unwrap();
        let oracle = common::state3(n, p, q);
        assert!((rho.matrix() - oracle.reorder(rho.layout()).unwrap().matrix()).norm() < 1e-12);
    }
}

#[test]
fn orthogonal_phases_untwist_exactly() {
    // At q = 1/2 the |φ^v> are orthogonal and the untwisted state is
    // [Φ]^n ⊗ Σ_{u,v} p_uv [u]_{B'} [φ^v]_{A'}.
    let (n, q) = (2, 0.5);
    for p in [common::bb84(0.1), common::six_state(0.15)] {
        let d = dist(p);
        let s = apply_noisy_processing(&build_key_state(n, &d).unwrap(), q).unwrap();
        let pc = phase_correct(
            &bit_error_correct(&s, &LinearCode::full(n).unwrap())
                .unwrap()
                .state,
            &LinearCode::empty(n).unwrap(),
        )
        .unwrap();
        let u = construct_untwisting(&pc.cosets, n, q, &d).unwrap();
        let out = untwist_fidelity(&pc.state, &u).unwrap();
        assert!((out.fidelity - 1.0).abs() < 1e-10);
        let rho = out.state.to_density().unwrap();
        let rho = rho.partial_trace(&["A", "B", "A'", "B'"]).unwrap();

        let phi = StateVector::bell_pairs("A", "B", n).unwrap().to_density();
        let dim = 1usize << n;
        let mut shield = pdit_core::qcore::CMatrix::zeros(dim * dim, dim * dim);
        for uu in 0..dim {
            for v in 0..dim {
                let puv = d
                    .pattern_probability(
                        &BitString::new(uu as u64, n).unwrap(),
                        &BitString::new(v as u64, n).unwrap(),
                    )
                    .unwrap();
                let f = common::phi_v(n, q, v);
                let mut w = CVector::zeros(dim * dim);
                for a in 0..dim {
                    w[a * dim + uu] = f[a];
                }
                shield += &w * w.adjoint() * C64::new(puv, 0.0);
            }
        }
        let shield =
            DensityOperator::new(shield, Layout::new([("A'", n), ("B'", n)]).unwrap()).unwrap();
        let oracle = phi.tensor(&shield).unwrap();
        assert!((rho.matrix() - oracle.reorder(rho.layout()).unwrap().matrix()).norm() < 1e-10);
    }
}

#[test]
fn pgm_meets_helstrom() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let layout = Layout::single("X", 2);
    for _ in 0..10 {
        let a = random_state(layout.clone(), &mut rng)
            .unwrap()
            .amplitudes()
            .clone();
        let b = random_state(layout.clone(), &mut rng)
            .unwrap()
            .amplitudes()
            .clone();
        let e = Ensemble::new(vec![0.5, 0.5], vec![a.clone(), b.clone()]).unwrap();
        let pgm = average_error(&e, &pgm_construct(&e).unwrap()).unwrap();
        let c = a.dotc(&b).norm();
        assert!((pgm - common::helstrom(c)).abs() < 1e-10);
        assert!((pgm - common::brute_force_two_state_error(&a, &b)).abs() < 1e-6);
    }
    let a = random_state(layout, &mut rng).unwrap().amplitudes().clone();
    let e = Ensemble::new(vec![0.5, 0.5], vec![a.clone(), a.clone()]).unwrap();
    assert!((average_error(&e, &pgm_construct(&e).unwrap()).unwrap() - 0.5).abs() < 1e-10);
    assert!((common::brute_force_two_state_error(&a, &a) - 0.5).abs() < 1e-12);
}

#[test]
fn pgm_error_matches_sampled_measurements() {
    let (n, q, p_z) = (4, 0.1, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let code = LinearCode::random(n, 3, &mut rng).unwrap();
    let v0 = BitString::new(rng.gen_range(0..16), n).unwrap();
    let set = code.coset(&code.syndrome(&v0).unwrap()).unwrap();
    assert_eq!(set.len(), 2);
    let weights: Vec<f64> = set
        .iter()
        .map(|v| pdit_core::pgm::phase_prior(v, p_z))
        .collect();
    let e = Ensemble::phase_flipped(n, q, &set, &weights).unwrap();
    let m = pgm_construct(&e).unwrap();
    let exact = average_error(&e, &m).unwrap();

    let shots = 40_000;
    let mut wrong = 0usize;
    for _ in 0..shots {
        let truth = if rng.gen::<f64>() < e.priors()[0] {
            0
        } else {
            1
        };
        let psi = &e.states()[truth];
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        let mut outcome = None;
        for (w, t) in m.vectors().iter().enumerate() {
            acc += t.dotc(psi).norm_sqr();
            if r < acc {
                outcome = Some(w);
                break;
            }
        }
        if outcome != Some(truth) {
            wrong += 1;
        }
    }
    let rate = wrong as f64 / shots as f64;
    let sigma = (exact * (1.0 - exact) / shots as f64).sqrt();
    assert!(
        (rate - exact).abs() <= 3.0 * sigma,
        "sampled {rate}, exact {exact}"
    );
    let s = success_probabilities(&e, &m).unwrap();
    assert!(
        (1.0 - e.priors().iter().zip(&s).map(|(p, s)| p * s).sum::<f64>() - exact).abs() < 1e-12
    );
}

#[test]
fn trine_extension() {
    let states: Vec<CVector> = (0..3)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            CVector::from_vec(vec![C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0)])
        })
        .collect();
    let e = Ensemble::new(vec![1.0 / 3.0; 3], states.clone()).unwrap();
    let m = pgm_construct(&e).unwrap();
    let ext = neumark_extend(&m).unwrap();
    assert_eq!((ext.dim(), ext.len()), (4, 3));
    let theta = ext.vectors();
    for i in 0..3 {
        for j in 0..3 {
            let g = theta[i].dotc(&theta[j]);
            assert!((g - C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).norm() < 1e-10);
        }
        for (w, psi) in states.iter().enumerate() {
            let lifted = ext.embed(psi).unwrap();
            let lhs = theta[i].dotc(&lifted);
            let rhs = m.vectors()[i].dotc(psi);
            assert!((lhs - rhs).norm() < 1e-10);
            // The trine PGM recognizes each state with probability 2/3.
            if w == i {
                assert!((lhs.norm_sqr() - 2.0 / 3.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn sampled_error_rates() {
    let d = dist([0.7, 0.1, 0.1, 0.1]);
    let truth_x = 0.2;
    let truth_z = 0.2;
    let runs = 200;
    let mut good = 0;
    for seed in 0..runs {
        let samples = sample_errors(&d, 10_000, seed).unwrap();
        let est = estimate_rates(&samples, 0.99).unwrap();
        let m = est.f_est.marginals();
        if (m.p_x - truth_x).abs() < 0.02
            && (m.p_z - truth_z).abs() < 0.02
            && est
                .f_est
                .as_array()
                .iter()
                .zip(d.as_array())
                .all(|(a, b)| (a - b).abs() < 0.02)
        {
            good += 1;
        }
    }
    assert!(good as f64 >= 0.99 * runs as f64, "{good}/{runs}");
}

#[test]
fn pipeline_examples() {
    let bb = model(ProtocolKind::Bb84, 0.05);
    let r = end_to_end(2, &bb, 0.1, &CodeSpec::Full, &CodeSpec::Empty, 0).unwrap();
    assert!(r.fidelity < 1.0);
    assert!(r.key_security_distance <= r.bound);
    let r = end_to_end(
        3,
        &model(ProtocolKind::Bb84, 0.1),
        0.5,
        &CodeSpec::Full,
        &CodeSpec::Empty,
        0,
    )
    .unwrap();
    assert!(r.key_security_distance < 1e-9);
    let r = end_to_end(
        2,
        &model(ProtocolKind::Bb84, 0.0),
        0.0,
        &CodeSpec::Full,
        &CodeSpec::Full,
        0,
    )
    .unwrap();
    assert!(r.key_security_distance < 1e-12 && (r.fidelity - 1.0).abs() < 1e-12);
}
