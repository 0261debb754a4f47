use super::closed_form::{flatten_code, unflatten_code};
use super::*;

use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_gaussian, draw_channel_set, ChannelSet, NoiseModel};
use crate::modem::modulate;
use crate::numerics::{norm_sqr, outer};
use crate::stc::{budget_deviation, Alamouti, AmplifyGain, CoopLink, RandomizedCode};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn qpsk(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
    modulate(&bits).unwrap()
}

fn random_link(relays: usize, direct: bool, snr_db: f64, rng: &mut impl Rng) -> CoopLink {
    let noise = NoiseModel::from_snr_db(snr_db).unwrap();
    CoopLink::new(
        draw_channel_set(2, relays, rng).unwrap(),
        AmplifyGain::fixed(2, noise, 1.0).unwrap(),
        noise,
        direct,
        Alamouti,
    )
    .unwrap()
}

fn random_code(relays: usize, rng: &mut impl Rng) -> RandomizedCode {
    let budget = RandomizedCode::unit_modulus_budget(relays, &Alamouti);
    RandomizedCode::random(relays, &Alamouti, budget, rng).unwrap()
}

fn random_vec(len: usize, var: f64, rng: &mut impl Rng) -> Vec<C64> {
    (0..len).map(|_| complex_gaussian(var, rng)).collect()
}

fn random_bank(symbols: usize, len: usize, rng: &mut impl Rng) -> FilterBank {
    FilterBank::new((0..symbols).map(|_| random_vec(len, 0.1, rng)).collect()).unwrap()
}

fn summed_mse(corr: &CorrelationPair, bank: &FilterBank) -> f64 {
    (0..bank.symbols())
        .map(|j| mmse_value(corr, bank.filter(j), j))
        .sum()
}

/// Gauss-Jordan inverse with partial pivoting, independent of the Cholesky
/// path under test.
fn gauss_jordan_inverse(a: &ComplexMat) -> ComplexMat {
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = ComplexMat::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[(x, col)].norm().partial_cmp(&m[(y, col)].norm()).unwrap())
            .unwrap();
        for k in 0..n {
            let (t1, t2) = (m[(col, k)], inv[(col, k)]);
            m[(col, k)] = m[(pivot, k)];
            inv[(col, k)] = inv[(pivot, k)];
            m[(pivot, k)] = t1;
            inv[(pivot, k)] = t2;
        }
        let p = m[(col, col)];
        for k in 0..n {
            m[(col, k)] /= p;
            inv[(col, k)] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[(row, col)];
                for k in 0..n {
                    let (mv, iv) = (m[(col, k)], inv[(col, k)]);
                    m[(row, k)] -= f * mv;
                    inv[(row, k)] -= f * iv;
                }
            }
        }
    }
    inv
}

fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    libm::sqrt(diff / norm_sqr(b).max(1e-300))
}

#[test]
fn noiseless_correlations_are_rank_one_per_symbol() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut link = random_link(1, true, 10.0, &mut rng);
    link.noise = NoiseModel::noiseless();
    let code = random_code(1, &mut rng);
    let eq = link.equivalent(&code).unwrap();
    let corr = analytic_correlations(&eq, link.noise);
    let mut expected = ComplexMat::zeros(eq.rows(), eq.rows());
    for j in 0..eq.symbols() {
        expected = expected.add(&outer(&eq.column(j), &eq.column(j))).unwrap();
        assert_eq!(corr.cross[j], eq.column(j));
    }
    assert!(corr.auto.sub(&expected).unwrap().max_abs() < 1e-12);
}

#[test]
fn dead_channels_leave_noise_only() {
    let z = ComplexMat::zeros(2, 2);
    let channels = ChannelSet::new(vec![z.clone()], vec![z.clone()], z).unwrap();
    let noise = NoiseModel::new(0.3).unwrap();
    let link = CoopLink::new(
        channels,
        AmplifyGain::new(1.0).unwrap(),
        noise,
        true,
        Alamouti,
    )
    .unwrap();
    let code = RandomizedCode::identity(1, &Alamouti, 16.0).unwrap();
    let corr = analytic_correlations(&link.equivalent(&code).unwrap(), noise);
    for j in 0..2 {
        assert!(corr.cross[j].iter().all(|x| x.norm() == 0.0));
        assert!(mmse_filter(&corr, j)
            .unwrap()
            .iter()
            .all(|x| x.norm() < 1e-15));
    }
    // the relay still forwards its own receive noise through G = 0, so only
    // destination noise remains
    let expected = ComplexMat::identity(6).scale_real(0.3);
    assert!(corr.auto.sub(&expected).unwrap().max_abs() < 1e-15);
}

#[test]
fn correlations_match_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let link = random_link(2, true, 5.0, &mut rng);
    let code = random_code(2, &mut rng);
    let corr = analytic_correlations(&link.equivalent(&code).unwrap(), link.noise);
    let draws = 40_000;
    let rows = link.rows();
    let mut auto = ComplexMat::zeros(rows, rows);
    let mut cross = vec![vec![c(0.0, 0.0); rows]; 2];
    for _ in 0..draws {
        let s = qpsk(2, &mut rng);
        let r = link.receive(&code, &s, &mut rng).unwrap();
        auto.add_scaled(&outer(&r, &r), c(1.0 / draws as f64, 0.0))
            .unwrap();
        for j in 0..2 {
            for (acc, x) in cross[j].iter_mut().zip(&r) {
                *acc += x * s[j].conj() / draws as f64;
            }
        }
    }
    let err = auto.sub(&corr.auto).unwrap().frobenius_norm() / corr.auto.frobenius_norm();
    assert!(err < 0.03, "auto-correlation off by {err}");
    for (sampled, exact) in cross.iter().zip(&corr.cross) {
        assert!(rel_err(sampled, exact) < 0.03);
    }
}

#[test]
fn scalar_wiener_filter_is_one_half() {
    let corr = CorrelationPair {
        auto: ComplexMat::identity(1).scale_real(2.0),
        cross: vec![vec![c(1.0, 0.0)]],
    };
    let w = mmse_filter(&corr, 0).unwrap();
    assert!((w[0] - c(0.5, 0.0)).norm() < 1e-15);
    assert!((mmse_value(&corr, &w, 0) - 0.5).abs() < 1e-15);
    assert_eq!(mmse_value(&corr, &[c(0.0, 0.0)], 0), 1.0);
}

#[test]
fn orthogonal_columns_decouple() {
    // D = diag(a, b), σ² = 1: w_j = d_j / (|d_j|² + 1)
    let (a, b) = (c(2.0, 1.0), c(0.0, -3.0));
    let auto = ComplexMat::from_diag(&[c(a.norm_sqr() + 1.0, 0.0), c(b.norm_sqr() + 1.0, 0.0)]);
    let corr = CorrelationPair {
        auto,
        cross: vec![vec![a, c(0.0, 0.0)], vec![c(0.0, 0.0), b]],
    };
    let bank = wiener_filters(&corr).unwrap();
    assert!((bank.filter(0)[0] - a / (a.norm_sqr() + 1.0)).norm() < 1e-15);
    assert!((bank.filter(1)[1] - b / (b.norm_sqr() + 1.0)).norm() < 1e-15);
    assert!((mmse_value(&corr, bank.filter(1), 1) - 1.0 / (b.norm_sqr() + 1.0)).abs() < 1e-14);
}

#[test]
fn wiener_filter_matches_explicit_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for relays in [1, 2] {
        let link = random_link(relays, true, 8.0, &mut rng);
        let code = random_code(relays, &mut rng);
        let corr = analytic_correlations(&link.equivalent(&code).unwrap(), link.noise);
        let inv = gauss_jordan_inverse(&corr.auto);
        for j in 0..2 {
            let oracle = inv.mul_vec(&corr.cross[j]).unwrap();
            assert!(rel_err(&mmse_filter(&corr, j).unwrap(), &oracle) < 1e-10);
        }
    }
}

#[test]
fn wiener_filter_satisfies_orthogonality_and_is_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..10 {
        let direct = trial % 2 == 0;
        let link = random_link(1 + trial % 2, direct, 12.0, &mut rng);
        let code = random_code(link.relays(), &mut rng);
        let corr = analytic_correlations(&link.equivalent(&code).unwrap(), link.noise);
        for j in 0..2 {
            let w = mmse_filter(&corr, j).unwrap();
            // E[r e*] = p − R w
            let rw = corr.auto.mul_vec(&w).unwrap();
            let resid: Vec<C64> = corr.cross[j].iter().zip(&rw).map(|(p, q)| p - q).collect();
            assert!(libm::sqrt(norm_sqr(&resid)) <= 1e-8 * libm::sqrt(norm_sqr(&corr.cross[j])));
            let best = mmse_value(&corr, &w, j);
            for _ in 0..100 {
                let other: Vec<C64> = w
                    .iter()
                    .map(|x| x + complex_gaussian(0.05, &mut rng))
                    .collect();
                assert!(best <= mmse_value(&corr, &other, j));
            }
        }
    }
}

#[test]
fn mse_formula_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let link = random_link(1, true, 6.0, &mut rng);
    let code = random_code(1, &mut rng);
    let corr = analytic_correlations(&link.equivalent(&code).unwrap(), link.noise);
    let wiener = wiener_filters(&corr).unwrap();
    let other = random_bank(2, link.rows(), &mut rng);
    for bank in [&wiener, &other] {
        let draws = 40_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let s = qpsk(2, &mut rng);
            let r = link.receive(&code, &s, &mut rng).unwrap();
            acc += norm_sqr(&filter_errors(bank, &r, &s).unwrap());
        }
        let empirical = acc / draws as f64;
        let analytic = summed_mse(&corr, bank);
        assert!(
            (empirical - analytic).abs() < 0.03 * analytic,
            "{empirical} vs {analytic}"
        );
    }
}

#[test]
fn quadratic_form_agrees_with_correlation_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (relays, direct) in [(1, true), (1, false), (2, true), (2, false)] {
        let link = random_link(relays, direct, 7.0, &mut rng);
        let code = random_code(relays, &mut rng);
        let bank = random_bank(2, link.rows(), &mut rng);
        let corr = analytic_correlations(&link.equivalent(&code).unwrap(), link.noise);
        let via_corr = summed_mse(&corr, &bank);
        let via_quad = code_objective(&link, &bank, &code).unwrap();
        assert!(
            (via_corr - via_quad).abs() < 1e-9 * via_corr,
            "{via_corr} vs {via_quad}"
        );
    }
}

#[test]
fn flatten_roundtrips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let code = random_code(2, &mut rng);
    let x = flatten_code(&code);
    assert_eq!(x.len(), 16);
    assert_eq!(unflatten_code(&code, &x).unwrap(), code);
}

#[test]
fn closed_form_unconstrained_when_budget_is_loose() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let link = random_link(1, true, 10.0, &mut rng);
    let code = random_code(1, &mut rng);
    let bank = wiener_filters(&analytic_correlations(
        &link.equivalent(&code).unwrap(),
        link.noise,
    ))
    .unwrap();
    let loose = code.clone().with_budget(1e9).unwrap();
    let out = rstc_closed_form(&link, &bank, &loose).unwrap();
    assert_eq!(out.multiplier, 0.0);
    assert!(out.code.equivalent_trace() <= 1e9);
}

#[test]
fn closed_form_meets_active_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for relays in [1, 2] {
        let link = random_link(relays, false, 10.0, &mut rng);
        let code = random_code(relays, &mut rng).with_budget(1.0).unwrap();
        let bank = random_bank(2, link.rows(), &mut rng);
        let out = rstc_closed_form(&link, &bank, &code).unwrap();
        assert!(out.multiplier > 0.0);
        assert!(budget_deviation(&out.code) <= 1e-8);
    }
}

#[test]
fn closed_form_beats_random_feasible_codes() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..5 {
        let link = random_link(1 + trial % 2, trial % 3 != 0, 10.0, &mut rng);
        let template = random_code(link.relays(), &mut rng);
        let bank = wiener_filters(&analytic_correlations(
            &link.equivalent(&template).unwrap(),
            link.noise,
        ))
        .unwrap();
        let best = rstc_closed_form(&link, &bank, &template).unwrap();
        let best_value = code_objective(&link, &bank, &best.code).unwrap();
        assert!(best.code.equivalent_trace() <= template.budget() * (1.0 + 1e-8));
        for _ in 0..1000 {
            let matrices = (0..link.relays())
                .map(|_| ComplexMat::from_fn(2, 2, |_, _| complex_gaussian(1.0, &mut rng)))
                .collect();
            let raw = RandomizedCode::from_layout(&template.layout(), matrices).unwrap();
            let scale = rng.random::<f64>();
            let candidate = crate::stc::normalize_code(&raw)
                .unwrap()
                .with_budget(template.budget())
                .unwrap();
            let candidate = unflatten_code(
                &candidate,
                &flatten_code(&candidate)
                    .iter()
                    .map(|v| v * libm::sqrt(scale))
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            assert!(best_value <= code_objective(&link, &bank, &candidate).unwrap() + 1e-6);
        }
    }
}

#[test]
fn closed_form_rejects_zero_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let link = random_link(1, false, 10.0, &mut rng);
    let code = random_code(1, &mut rng).with_budget(1.0).unwrap();
    let bank = FilterBank::zeros(2, link.rows());
    // with zero filters the objective is constant; b = 0 and A = 0 make
    // every code optimal, and the unconstrained solve is singular
    assert!(rstc_closed_form(&link, &bank, &code).is_err());
}

/// `|s_j − w_jᴴ r|²` for a fixed noise realisation.
fn instantaneous_error(
    link: &CoopLink,
    code: &RandomizedCode,
    w: &[C64],
    s: &[C64],
    j: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = link.receive(code, s, &mut rng).unwrap();
    (s[j] - crate::numerics::inner(w, &r)).norm_sqr()
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-4;
    for trial in 0..20 {
        let link = random_link(1 + trial % 2, trial % 2 == 0, 8.0, &mut rng);
        let code = random_code(link.relays(), &mut rng);
        let s = qpsk(2, &mut rng);
        let w = random_vec(link.rows(), 0.2, &mut rng);
        let j = trial % 2;
        let seed = rng.random::<u64>();
        let reception = link
            .transmit(&code, &s, &mut ChaCha8Rng::seed_from_u64(seed))
            .unwrap();
        let e = s[j] - crate::numerics::inner(&w, &reception.received);

        // filter: ∂|e|²/∂w* = −e* r
        let grad_w: Vec<C64> = reception.received.iter().map(|x| -e.conj() * x).collect();
        let dir = random_vec(w.len(), 1.0, &mut rng);
        let shifted = |t: f64| -> Vec<C64> { w.iter().zip(&dir).map(|(a, d)| a + d * t).collect() };
        let fd = (instantaneous_error(&link, &code, &shifted(h), &s, j, seed)
            - instantaneous_error(&link, &code, &shifted(-h), &s, j, seed))
            / (2.0 * h);
        let analytic = 2.0 * crate::numerics::inner(&grad_w, &dir).re;
        assert!(
            (fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0),
            "{fd} vs {analytic}"
        );

        // code
        let grads = symbol_code_gradient(&link, &w, e, &reception.relay_drives).unwrap();
        let deltas: Vec<ComplexMat> = (0..link.relays())
            .map(|_| ComplexMat::from_fn(2, 2, |_, _| complex_gaussian(1.0, &mut rng)))
            .collect();
        let perturbed = |t: f64| {
            let mut moved = code.clone();
            for (m, d) in moved.matrices_mut().iter_mut().zip(&deltas) {
                m.add_scaled(d, c(t, 0.0)).unwrap();
            }
            moved
        };
        let fd = (instantaneous_error(&link, &perturbed(h), &w, &s, j, seed)
            - instantaneous_error(&link, &perturbed(-h), &w, &s, j, seed))
            / (2.0 * h);
        let analytic: f64 = grads
            .iter()
            .zip(&deltas)
            .map(|(g, d)| {
                2.0 * g
                    .as_slice()
                    .iter()
                    .zip(d.as_slice())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum::<f64>()
            })
            .sum();
        assert!(
            (fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0),
            "{fd} vs {analytic}"
        );
    }
}

#[test]
fn zero_steps_are_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let link = random_link(1, true, 10.0, &mut rng);
    let code = random_code(1, &mut rng);
    let init = matched_filter_init(&link.equivalent(&code).unwrap());
    let mut state = AdaptState::new(init.clone(), code.clone(), 0.0, 0.0).unwrap();
    let pilots: Vec<_> = (0..50).map(|_| qpsk(2, &mut rng)).collect();
    alrrmo_train(&mut state, &link, &pilots, &mut rng).unwrap();
    assert_eq!(state.filters, init);
    assert_eq!(state.code, code);
    assert_eq!(state.iteration, 50);
}

#[test]
fn rejects_bad_step_sizes_and_empty_preamble() {
    let bank = FilterBank::zeros(2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let code = random_code(1, &mut rng);
    assert!(AdaptState::new(bank.clone(), code.clone(), -0.1, 0.0).is_err());
    assert!(AdaptState::new(bank.clone(), code.clone(), 0.1, f64::NAN).is_err());
    let link = random_link(1, true, 10.0, &mut rng);
    let mut state = AdaptState::new(bank, code, 0.01, 0.0).unwrap();
    assert!(alrrmo_train(&mut state, &link, &[], &mut rng).is_err());
}

#[test]
fn matched_filter_normalizes_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let link = random_link(1, true, 10.0, &mut rng);
    let code = random_code(1, &mut rng);
    let eq = link.equivalent(&code).unwrap();
    let bank = matched_filter_init(&eq);
    for j in 0..2 {
        let gain = crate::numerics::inner(bank.filter(j), &eq.column(j));
        assert!((gain - c(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn small_step_lms_approaches_wiener() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let link = random_link(1, true, 10.0, &mut rng);
    let code = random_code(1, &mut rng);
    let eq = link.equivalent(&code).unwrap();
    let corr = analytic_correlations(&eq, link.noise);
    let floor = summed_mse(&corr, &wiener_filters(&corr).unwrap());
    let mut state = AdaptState::new(matched_filter_init(&eq), code, 0.002, 0.0).unwrap();
    let pilots: Vec<_> = (0..20_000).map(|_| qpsk(2, &mut rng)).collect();
    alrrmo_train(&mut state, &link, &pilots, &mut rng).unwrap();
    let reached = summed_mse(&corr, &state.filters);
    assert!(reached < 1.1 * floor, "{reached} vs {floor}");
}

#[test]
fn code_adaptation_keeps_budget_and_lowers_attainable_mse() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut before = 0.0;
    let mut after = 0.0;
    for _ in 0..10 {
        let link = random_link(1, true, 10.0, &mut rng);
        let code = random_code(1, &mut rng);
        let eq = link.equivalent(&code).unwrap();
        let corr = analytic_correlations(&eq, link.noise);
        before += summed_mse(&corr, &wiener_filters(&corr).unwrap());
        let pilots: Vec<_> = (0..2000).map(|_| qpsk(2, &mut rng)).collect();
        let mut state = AdaptState::new(matched_filter_init(&eq), code, 0.005, 0.05).unwrap();
        let report = alrrmo_train(&mut state, &link, &pilots, &mut rng).unwrap();
        assert!(report.max_budget_deviation <= 1e-8);
        let corr = analytic_correlations(&link.equivalent(&state.code).unwrap(), link.noise);
        after += summed_mse(&corr, &wiener_filters(&corr).unwrap());
    }
    assert!(after < before, "{after} vs {before}");
}

#[test]
fn joint_adaptation_is_never_worse_than_filter_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut filter_only = 0.0;
    let mut joint = 0.0;
    for _ in 0..20 {
        let link = random_link(1, true, 10.0, &mut rng);
        let code = random_code(1, &mut rng);
        let init = matched_filter_init(&link.equivalent(&code).unwrap());
        let pilots: Vec<_> = (0..500).map(|_| qpsk(2, &mut rng)).collect();
        let seed = rng.random::<u64>();
        for (mu, acc) in [(0.0, &mut filter_only), (0.01, &mut joint)] {
            let mut state = AdaptState::new(init.clone(), code.clone(), 0.01, mu).unwrap();
            alrrmo_train(
                &mut state,
                &link,
                &pilots,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )
            .unwrap();
            let corr = analytic_correlations(&link.equivalent(&state.code).unwrap(), link.noise);
            *acc += summed_mse(&corr, &state.filters);
        }
    }
    assert!(joint <= 1.05 * filter_only, "{joint} vs {filter_only}");
}

#[test]
fn divergence_is_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let link = random_link(1, true, 10.0, &mut rng);
    let code = random_code(1, &mut rng);
    let init = matched_filter_init(&link.equivalent(&code).unwrap());
    let mut state = AdaptState::new(init, code, 5.0, 0.0).unwrap();
    let pilots: Vec<_> = (0..500).map(|_| qpsk(2, &mut rng)).collect();
    assert!(matches!(
        alrrmo_train(&mut state, &link, &pilots, &mut rng),
        Err(Error::Diverged { .. })
    ));
}

#[test]
fn detection_slices_filter_outputs() {
    let bank = FilterBank::new(vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(2.0, 0.0)],
    ])
    .unwrap();
    let r = [c(0.3, -0.2), c(-1.0, -1.0)];
    let s = detect_symbols(&bank, &r).unwrap();
    let a = core::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(s, vec![c(a, -a), c(-a, -a)]);
    assert!(detect_symbols(&bank, &r[..1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wiener_value_never_exceeds_signal_power(seed in any::<u64>(), snr in -5.0f64..30.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let link = random_link(1, seed % 2 == 0, snr, &mut rng);
        let code = random_code(1, &mut rng);
        let corr = analytic_correlations(&link.equivalent(&code).unwrap(), link.noise);
        let bank = wiener_filters(&corr).unwrap();
        for j in 0..2 {
            let v = mmse_value(&corr, bank.filter(j), j);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn code_step_preserves_budget(seed in any::<u64>(), mu in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let link = random_link(2, true, 10.0, &mut rng);
        let code = random_code(2, &mut rng);
        let mut state = AdaptState::new(random_bank(2, link.rows(), &mut rng), code, 0.01, mu).unwrap();
        let s = qpsk(2, &mut rng);
        let reception = link.transmit(&state.code, &s, &mut rng).unwrap();
        state.step(&link, &reception.received, &s, &reception.relay_drives).unwrap();
        prop_assert!(budget_deviation(&state.code) <= 1e-8);
    }
}
