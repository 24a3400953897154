use num_complex::Complex64;
use nqp_core::dynamics::{
    damped_reference, harmonic_drift, integrate, shadowing_experiment, verify_conjugation, IntegratorOptions,
    ShadowOptions,
};
use nqp_core::tfseries::Domain;
use nqp_core::twolayer::{main_pipeline, reference_config, reference_perturbations, SLOW_DIM};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn harmonic_energy_drift_is_small_over_a_thousand_periods() {
    let drift = harmonic_drift(1.0, 1e3, 1e-12).unwrap();
    assert!(drift <= 1e-8, "drift {drift}");
}

#[test]
fn integrator_self_converges_on_a_damped_rotation() {
    // x' = (-0.1 + i) x against the exact solution and against a tighter run.
    let lam = Complex64::new(-0.1, 1.0);
    let f = |_t: f64, x: &[Complex64]| vec![lam * x[0]];
    let outs = [5.0, 10.0];
    let loose = integrate(f, &[c(1.0)], 0.0, 20.0, &outs, &IntegratorOptions::with_tol(1e-8)).unwrap();
    let tight = integrate(f, &[c(1.0)], 0.0, 20.0, &outs, &IntegratorOptions::with_tol(1e-12)).unwrap();
    let exact = (lam * 20.0).exp();
    let e_loose = (loose.last()[0] - exact).norm();
    let e_tight = (tight.last()[0] - exact).norm();
    assert!(e_tight <= 1e-10, "tight error {e_tight}");
    assert!(e_tight < e_loose, "{e_tight} !< {e_loose}");
    assert!((loose.last()[0] - tight.last()[0]).norm() <= 1e-6);
}

#[test]
fn damped_reference_matches_the_linear_flow() {
    let r = main_pipeline(&reference_config()).unwrap();
    let x0 = [c(1e-4), c(-2e-4), c(5e-5), c(3e-5)];
    let reference = damped_reference(&r.spectrum.b, &r.spectrum.eigenvalues, &x0).unwrap();
    let at0 = reference.eval(0.0);
    for (a, b) in at0.iter().zip(&x0) {
        assert!((a - b).norm() <= 1e-12 * 1e-4, "{a} vs {b}");
    }
    let l = r.model.block.l;
    let f = |_t: f64, x: &[Complex64]| -> Vec<Complex64> {
        (0..SLOW_DIM).map(|i| (0..SLOW_DIM).map(|j| x[j] * l[(i, j)]).sum()).collect()
    };
    let traj = integrate(f, &x0, 0.0, 50.0, &[25.0], &IntegratorOptions::with_tol(1e-12)).unwrap();
    for (t, x) in traj.times.iter().zip(&traj.states) {
        for (a, b) in reference.eval(*t).iter().zip(x) {
            assert!((a - b).norm() <= 1e-12, "t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn conjugation_holds_for_the_averaging_generator() {
    let r = main_pipeline(&reference_config()).unwrap();
    let p = &r.config.params;
    let u = Domain::new(p.eps0, p.s0);
    let w = u.scaled(0.25);
    let y = &r.averaging.generator.y;
    assert!(!y.is_zero());
    let rep = verify_conjugation(y, &r.model.field(), &u, &w, 5, 1e-6, 1.0, 11).unwrap();
    assert!(rep.pass, "discrepancy {} > {}", rep.max_discrepancy, rep.threshold);
    assert!(rep.max_discrepancy <= 1e-6);
}

#[test]
fn shadowing_passes_and_deviation_shrinks_with_the_perturbation() {
    let opts = ShadowOptions {
        cap_horizon: 200.0,
        ..Default::default()
    };
    let mut devs = Vec::new();
    for scale in [1.0, 0.5, 0.25] {
        let mut cfg = reference_config();
        cfg.perturbations = reference_perturbations(scale);
        let r = main_pipeline(&cfg).unwrap();
        let s = shadowing_experiment(&r, &opts).unwrap();
        assert!(s.pass);
        devs.push(s.max_deviation_gamma.max(s.max_deviation_psi));
    }
    assert!(devs[1] <= devs[0] && devs[2] <= devs[1] && devs[2] < devs[0], "deviations {devs:?}");
}
