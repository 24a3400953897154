use nalgebra::DMatrix;
use num_complex::Complex64;
use nqp_core::dynamics::evaluate_field;
use nqp_core::tfseries::{Domain, DomainWeights, Lattice};
use nqp_core::twolayer::{
    build_full_field, build_linearized_field, equilibrium, linear_block, main_pipeline, reference_config,
    reference_perturbations, sample_admissible, solve_spectrum, PerturbationSet, PipelineConfig, SLOW_DIM,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_invariants_on_admissible_draws(seed in any::<u64>()) {
        let p = sample_admissible(&mut ChaCha8Rng::seed_from_u64(seed));
        let s = solve_spectrum(&p).unwrap();
        let l = linear_block(&p, &equilibrium(&p).unwrap()).as_complex();
        let ln = inf_norm(&l);
        for r in s.residuals {
            prop_assert!(r <= 1e-10 * ln);
        }
        let mut ev = s.eigenvalues.to_vec();
        let mut cj: Vec<Complex64> = ev.iter().map(|z| z.conj()).collect();
        let key = |z: &Complex64| (z.re, z.im);
        ev.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        cj.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        prop_assert_eq!(ev, cj);
        let d = &s.b_inv * &l * &s.b;
        let off: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j)
            .map(|(i, j)| d[(i, j)].norm()).sum();
        prop_assert!(off <= 1e-10 * ln, "off-diagonal mass {off}");
        prop_assert!(s.max_real() <= s.corrected_upper + 1e-12);
    }

    #[test]
    fn equilibrium_is_a_zero_of_the_full_field(seed in any::<u64>()) {
        let p = sample_admissible(&mut ChaCha8Rng::seed_from_u64(seed));
        let eta0 = equilibrium(&p).unwrap().eta0;
        let full = build_full_field(&p, &PerturbationSet::zero(), 25).unwrap();
        let at_eq = [c(0.0), c(0.0), c(eta0), c(0.0)];
        let v = evaluate_field(&full, &at_eq, &[c(0.3)], &Domain::new(2.0, 1.0)).unwrap();
        let centred = build_linearized_field(&p, &PerturbationSet::zero(), 5).unwrap().field();
        let w = evaluate_field(&centred, &[c(0.0); SLOW_DIM], &[c(0.3)], &Domain::new(1.0, 1.0)).unwrap();
        for x in v[..SLOW_DIM].iter().chain(&w[..SLOW_DIM]) {
            prop_assert!(x.norm() <= 1e-14, "residual {x}");
        }
    }
}

#[test]
fn linearized_field_matches_full_field_near_equilibrium() {
    let cfg = reference_config();
    let lin = build_linearized_field(&cfg.params, &cfg.perturbations, 7).unwrap().field();
    let full = build_full_field(&cfg.params, &cfg.perturbations, 7).unwrap();
    for (z, phi) in [([1e-4, -2e-4, 3e-4, 1e-4], 0.4), ([-3e-4, 1e-4, -1e-4, 2e-4], 2.5)] {
        let zeta: Vec<Complex64> = z.iter().map(|v| c(*v)).collect();
        let a = evaluate_field(&lin, &zeta, &[c(phi)], &Domain::new(1e-3, 1.0)).unwrap();
        let b = evaluate_field(&full, &zeta, &[c(phi)], &Domain::new(1e-3, 1.0)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-15, "{x} vs {y}");
        }
    }
}

#[test]
fn nonlinear_remainder_has_no_linear_part() {
    let cfg = reference_config();
    let m = build_linearized_field(&cfg.params, &cfg.perturbations, 7).unwrap();
    assert!(!m.breve.is_zero());
    assert!(m.breve.project_order(1).is_zero());
}

#[test]
fn zero_perturbations_leave_the_exponents_unchanged() {
    let mut cfg = PipelineConfig::new(reference_config().params, PerturbationSet::zero());
    cfg.const_used = reference_config().const_used;
    cfg.order_cap = 1;
    let r = main_pipeline(&cfg).unwrap();
    assert!(r.certified());
    for j in 0..SLOW_DIM {
        assert_eq!(r.n_hat.lambda[j], r.spectrum.eigenvalues[j]);
    }
    assert!(r.p3.is_zero());
}

#[test]
fn reference_shift_is_within_half_mu1() {
    let r = main_pipeline(&reference_config()).unwrap();
    assert!(r.certified(), "{}", r.ledger.to_table());
    for j in 0..SLOW_DIM {
        assert!((r.n_hat.lambda[j] - r.spectrum.eigenvalues[j]).norm() <= r.budget.mu1 / 2.0);
        assert!(r.n_hat.lambda[j].re < 0.0);
    }
}

#[test]
fn averaging_projector_is_the_angle_average() {
    let r = main_pipeline(&reference_config()).unwrap();
    let (low, _) = r.model.p0.ultraviolet_tail(r.k0);
    let projected = low.project_lattice(&Lattice::AngleAverage);
    let averaged = low.angle_average();
    assert_eq!(projected, averaged);
    // Direct oracle: averaging the truncated field over a uniform angle grid.
    let u = Domain::new(r.config.params.eps0, r.config.params.s0);
    let dw = DomainWeights::new(u, vec![1.0; SLOW_DIM + 1]).unwrap();
    let zeta = [c(1e-4), c(-2e-4), c(5e-5), c(1e-4)];
    let n = 64;
    let mut mean = [c(0.0); SLOW_DIM + 1];
    for i in 0..n {
        let phi = c(2.0 * std::f64::consts::PI * i as f64 / n as f64);
        for (acc, v) in mean.iter_mut().zip(low.eval(&zeta, &[phi])) {
            *acc += v / n as f64;
        }
    }
    let direct = averaged.eval(&zeta, &[c(0.0)]);
    for (a, b) in mean.iter().zip(&direct) {
        assert!((a - b).norm() <= 1e-13 * (1.0 + low.weighted_norm(&dw)), "{a} vs {b}");
    }
}

fn p2_norm(scale: f64) -> f64 {
    let mut cfg = reference_config();
    cfg.perturbations = reference_perturbations(scale);
    let r = main_pipeline(&cfg).unwrap();
    r.ledger.find("diagonalize: [[P_2]] <= mu_1").unwrap().measured
}

#[test]
fn plumbing_check_p2_scales_linearly_with_perturbations() {
    let (base, unit) = (p2_norm(0.0), p2_norm(1.0));
    for s in [0.25, 0.5] {
        let ratio = (p2_norm(s) - base) / (unit - base);
        assert!(ratio >= s / 2.0 && ratio <= 2.0 * s, "scale {s}: ratio {ratio}");
    }
}
