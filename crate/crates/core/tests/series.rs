use num_complex::Complex64;
use nqp_core::cli::{random_field, RandomFieldSpec};
use nqp_core::normalform::{solve_homological, Frequencies};
use nqp_core::tfseries::io::{parse_field, write_field};
use nqp_core::tfseries::{Domain, DomainWeights, Lattice, TFVectorField};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(seed: u64, m: usize, n: usize) -> TFVectorField {
    let spec = RandomFieldSpec {
        m,
        n,
        max_alpha: 3,
        max_k: 2,
        terms_per_component: 4,
        amplitude: 1.0,
    };
    random_field(&mut ChaCha8Rng::seed_from_u64(seed), &spec)
}

fn unit(d: Domain, f: &TFVectorField) -> DomainWeights {
    DomainWeights::new(d, vec![1.0; f.dim()]).unwrap()
}

fn close(a: &TFVectorField, b: &TFVectorField, rel: f64) -> bool {
    let u = unit(Domain::new(1.0, 1.0), a);
    a.sub(b).weighted_norm(&u) <= rel * (1.0 + a.weighted_norm(&u) + b.weighted_norm(&u))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_format_round_trips(seed in any::<u64>(), m in 1usize..3, n in 0usize..3) {
        let f = field(seed, m, n);
        let g = parse_field(&write_field(&f)).unwrap();
        prop_assert_eq!(write_field(&g), write_field(&f));
        prop_assert!(close(&f, &g, 0.0));
    }

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>(), m in 1usize..3, n in 0usize..2) {
        let x = field(seed, m, n);
        let y = field(seed.wrapping_add(1), m, n);
        prop_assert!(close(&x.lie_bracket(&y), &y.lie_bracket(&x).scale_re(-1.0), 1e-12));
    }

    #[test]
    fn bracket_pointwise_matches_jacobian_definition(seed in any::<u64>()) {
        // [Y, X] = J_X Y - J_Y X, checked against central differences.
        let (x, y) = (field(seed, 2, 1), field(seed ^ 0x5a5a, 2, 1));
        let z = [Complex64::new(0.11, 0.0), Complex64::new(-0.07, 0.0)];
        let phi = [Complex64::new(0.3, 0.0)];
        let h = 1e-5;
        let jac = |f: &TFVectorField, v: &[Complex64]| -> Vec<Complex64> {
            let plus: Vec<Complex64> = z.iter().zip(v).map(|(a, b)| a + b * h).collect();
            let minus: Vec<Complex64> = z.iter().zip(v).map(|(a, b)| a - b * h).collect();
            let pp = [phi[0] + v[2] * h];
            let pm = [phi[0] - v[2] * h];
            f.eval(&plus, &pp).iter().zip(f.eval(&minus, &pm)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        };
        let (xv, yv) = (x.eval(&z, &phi), y.eval(&z, &phi));
        let expected: Vec<Complex64> = jac(&x, &yv).iter().zip(jac(&y, &xv)).map(|(a, b)| a - b).collect();
        let got = y.lie_bracket(&x).eval(&z, &phi);
        let scale = 1.0 + expected.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in got.iter().zip(&expected) {
            prop_assert!((a - b).norm() <= 1e-6 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn norm_is_subadditive_and_monotone_in_domain(seed in any::<u64>()) {
        let (a, b) = (field(seed, 2, 1), field(seed ^ 7, 2, 1));
        let big = unit(Domain::new(1.0, 1.0), &a);
        let small = unit(Domain::new(0.8, 0.7), &a);
        prop_assert!(a.add(&b).weighted_norm(&big) <= a.weighted_norm(&big) + b.weighted_norm(&big) + 1e-12);
        prop_assert!(a.weighted_norm(&small) <= a.weighted_norm(&big));
    }

    #[test]
    fn homological_solution_solves_the_equation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let lambda: Vec<Complex64> = (0..2).map(|_| Complex64::new(-rng.gen_range(0.1..1.0), rng.gen_range(-2.0..2.0))).collect();
        let freq = Frequencies::new(lambda, vec![rng.gen_range(1.0..3.0)]);
        let z = field(seed, 2, 1).project_lattice_complement(&Lattice::Zero);
        let y = solve_homological(&freq, &z, &Lattice::Zero, None, 1e-9).unwrap();
        // [Y, N] = Z with N the linear/rotational part.
        let residual = y.lie_bracket(&freq.field()).sub(&z);
        let u = unit(Domain::new(1.0, 1.0), &z);
        prop_assert!(residual.weighted_norm(&u) <= 1e-10 * z.weighted_norm(&u));
    }
}
