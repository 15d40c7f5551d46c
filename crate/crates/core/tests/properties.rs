use hyprec::calculus::{grad_psi_qr, reduce_gradient};
use hyprec::factorization::{
    analog_objective_qr, digital_from_analog, objective_qr, phases_to_analog, residual_direct,
};
use hyprec::linalg;
use hyprec::random::{seeded_complex_gaussian, seeded_phases};
use hyprec::solver::{solve, SolverConfig};
use hyprec::{sample_channel, CMat, FactorizationProblem, HybridPrecoder, C};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..10).prop_flat_map(|n_t| (Just(n_t), 1..=n_t)).prop_flat_map(|(n_t, n_rf)| (Just(n_t), Just(n_rf), 1..=n_rf))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channel_matches_its_path_decomposition(n_r in 1usize..8, n_t in 1usize..12, l in 1usize..6, seed in any::<u64>()) {
        let ch = sample_channel::<f64>(n_r, n_t, l, seed).unwrap();
        prop_assert!(ch.reconstruction_error() < 1e-12 * (1.0 + ch.h.norm()));
        prop_assert!(ch.theta_t.iter().chain(&ch.theta_r).all(|&t| (0.0..2.0 * std::f64::consts::PI).contains(&t)));
        prop_assert!(linalg::numerical_rank(&ch.h, 1e-10) <= l.min(n_r).min(n_t));
    }

    #[test]
    fn eliminated_objective_is_a_projection_residual((n_t, n_rf, n_s) in dims(), seed in any::<u64>()) {
        let phi = seeded_phases::<f64>(n_t, n_rf, seed);
        let f_opt = seeded_complex_gaussian::<f64>(n_t, n_s, seed ^ 1);
        let p = FactorizationProblem::new(f_opt.clone(), n_rf).unwrap();
        let Ok(v) = objective_qr(&phi, &p) else { return Ok(()); };
        prop_assert!(v >= 0.0 && v <= linalg::frob2(&f_opt) * (1.0 + 1e-12));
        let f_rf = phases_to_analog(&phi, n_t).unwrap();
        if let Ok(direct) = residual_direct(&f_rf, &f_opt) {
            prop_assert!((v - direct).abs() < 1e-8 * (1.0 + direct));
        }
        let hp = HybridPrecoder { f_bb: digital_from_analog(&f_rf, &f_opt).unwrap(), f_rf };
        prop_assert!(hp.transmit_power() <= p.power() + 1e-8);
        prop_assert!((hp.residual(&f_opt) - v).abs() < 1e-8 * (1.0 + v));
    }

    #[test]
    fn column_phase_rotation_leaves_objective_unchanged((n_t, n_rf, n_s) in dims(), seed in any::<u64>(), rot in proptest::collection::vec(-3.0f64..3.0, 10)) {
        let phi = seeded_phases::<f64>(n_t, n_rf, seed);
        let f_opt = seeded_complex_gaussian::<f64>(n_t, n_s, seed ^ 2);
        let f_rf = phases_to_analog(&phi, n_t).unwrap();
        let rotated = CMat::from_fn(n_t, n_rf, |i, j| f_rf[(i, j)] * C::from_polar(1.0, rot[j]));
        if let (Ok(a), Ok(b)) = (analog_objective_qr(&f_rf, &f_opt), analog_objective_qr(&rotated, &f_opt)) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a));
        }
    }

    #[test]
    fn phase_gradient_has_zero_column_sums((n_t, n_rf, n_s) in dims(), seed in any::<u64>()) {
        let phi = seeded_phases::<f64>(n_t, n_rf, seed).full();
        let f_opt = seeded_complex_gaussian::<f64>(n_t, n_s, seed ^ 3);
        if let Ok(g) = grad_psi_qr(&phi, &f_opt) {
            for col in g.column_iter() {
                prop_assert!(col.sum().abs() < 1e-8 * (1.0 + g.norm()));
            }
            prop_assert_eq!(reduce_gradient(&g).unwrap().nrows(), n_t - 1);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_output_respects_power_bound_and_monotonicity((n_t, n_rf, n_s) in dims(), seed in any::<u64>()) {
        let f_opt = seeded_complex_gaussian::<f64>(n_t, n_s, seed);
        let p = FactorizationProblem::new(f_opt.clone(), n_rf).unwrap();
        let cfg = SolverConfig { max_iter: 200, ..Default::default() };
        if let Ok((prec, rep)) = solve(&p, &cfg, None) {
            prop_assert!(rep.objective_trace.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(prec.transmit_power() <= p.power() + 1e-8);
            prop_assert!(prec.modulus_deviation() < 1e-12);
            let again = solve(&p, &cfg, None).unwrap().1;
            prop_assert!(rep.same_outcome(&again));
        }
    }
}
