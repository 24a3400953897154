use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NormalFormError;
use crate::tfseries::{Domain, DomainWeights, TFVectorField};

/// Target relative size of the analytic tail when the number of terms is
/// chosen automatically.
pub const LIE_TAIL_TARGET: f64 = 1e-12;
const LIE_MAX_TERMS: usize = 200;

/// Result of summing a truncated Lie series.
#[derive(Clone, Debug)]
pub struct LieSeries {
    pub field: TFVectorField,
    /// `q^M / (1 - q) [[W]]^w_u`; zero when the series terminated exactly.
    pub tail_bound: f64,
    pub q: f64,
    pub terms: usize,
}

/// Contraction factor `q = e [[Y]]^w_{u+w}`.
pub fn contraction_factor(y: &TFVectorField, u: &Domain, w: &Domain) -> f64 {
    let dw = DomainWeights::new(u.grow(w), w.as_weights(y.m(), y.n())).expect("positive domain");
    std::f64::consts::E * y.weighted_norm(&dw)
}

/// Smallest `M` with `q^M / (1 - q) < target`.
pub fn terms_for_tail(q: f64, target: f64) -> usize {
    if q <= 0.0 {
        return 1;
    }
    let mut m = 1;
    while q.powi(m as i32) / (1.0 - q) >= target && m < LIE_MAX_TERMS {
        m += 1;
    }
    m
}

/// `sum_{k < M} L_Y^k W / k!` with the tail estimate on `u - w`.
pub fn lie_series_apply(
    y: &TFVectorField,
    wf: &TFVectorField,
    u: &Domain,
    w: &Domain,
    max_terms: Option<usize>,
) -> Result<LieSeries, NormalFormError> {
    let q = contraction_factor(y, u, w);
    if q >= 1.0 {
        return Err(NormalFormError::DivergentSeries { q });
    }
    let terms = max_terms.unwrap_or_else(|| terms_for_tail(q, LIE_TAIL_TARGET)).max(1);
    let dw = DomainWeights::new(*u, w.as_weights(wf.m(), wf.n())).expect("positive domain");
    let w_norm = wf.weighted_norm(&dw);
    let mut sum = wf.clone();
    let mut term = wf.clone();
    let mut used = 1;
    let mut exact = term.is_zero();
    for k in 1..terms {
        term = y.lie_bracket(&term).scale_re(1.0 / k as f64);
        used = k + 1;
        if term.is_zero() {
            exact = true;
            break;
        }
        sum = sum.add(&term);
    }
    let tail_bound = if exact { 0.0 } else { q.powi(used as i32) / (1.0 - q) * w_norm };
    Ok(LieSeries {
        field: sum,
        tail_bound,
        q,
        terms: used,
    })
}

/// Time-one map of `Y` at a complex point, classical RK4 with `steps` steps.
pub fn time_one_map(y: &TFVectorField, x: &[Complex64], steps: usize) -> Vec<Complex64> {
    let m = y.m();
    let h = 1.0 / steps as f64;
    let f = |s: &[Complex64]| y.eval(&s[..m], &s[m..]);
    let mut s = x.to_vec();
    let axpy = |a: &[Complex64], b: &[Complex64], c: f64| -> Vec<Complex64> {
        a.iter().zip(b).map(|(p, q)| p + q * c).collect()
    };
    for _ in 0..steps {
        let k1 = f(&s);
        let k2 = f(&axpy(&s, &k1, h / 2.0));
        let k3 = f(&axpy(&s, &k2, h / 2.0));
        let k4 = f(&axpy(&s, &k3, h));
        for i in 0..s.len() {
            s[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
        }
    }
    s
}

/// Sampled `sup_{x in V_u} sum_h w_h^{-1} |phi_h(x) - x_h|` for the composition
/// `phi = Phi_1^{Y_0} o Phi_1^{Y_1} o ... o Phi_1^{Y_r}` (the last generator acts first).
pub fn sample_close_to_identity(
    generators: &[&TFVectorField],
    u: &Domain,
    weights: &[f64],
    samples: usize,
    seed: u64,
) -> f64 {
    let Some(first) = generators.first() else {
        return 0.0;
    };
    if generators.iter().all(|g| g.is_zero()) {
        return 0.0;
    }
    let (m, n) = (first.m(), first.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for s in 0..samples.max(1) {
        let boundary = s % 2 == 0;
        let mut x: Vec<Complex64> = (0..m)
            .map(|_| {
                let r = if boundary { 1.0 } else { rng.gen::<f64>().sqrt() };
                Complex64::from_polar(u.eps * r, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        x.extend((0..n).map(|_| {
            let im = if boundary {
                if rng.gen::<bool>() { u.s } else { -u.s }
            } else {
                rng.gen_range(-u.s..=u.s)
            };
            Complex64::new(rng.gen_range(0.0..std::f64::consts::TAU), im)
        }));
        let mut img = x.clone();
        for g in generators.iter().rev() {
            if !g.is_zero() {
                img = time_one_map(g, &img, 64);
            }
        }
        let dev: f64 = img
            .iter()
            .zip(&x)
            .zip(weights)
            .map(|((a, b), w)| (a - b).norm() / w)
            .sum();
        best = best.max(dev);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_generator_is_identity() {
        let w = TFVectorField::constant(1, 1, &[re(1.0), re(2.0)]);
        let out = lie_series_apply(&TFVectorField::zero(1, 1), &w, &Domain::new(1.0, 1.0), &Domain::new(0.1, 0.1), None)
            .unwrap();
        assert_eq!(out.field, w);
        assert_eq!(out.tail_bound, 0.0);
    }

    #[test]
    fn divergent_generator() {
        let y = TFVectorField::constant(1, 0, &[re(10.0)]);
        let w = TFVectorField::zero(1, 0);
        assert!(matches!(
            lie_series_apply(&y, &w, &Domain::new(1.0, 1.0), &Domain::new(0.1, 0.1), None),
            Err(NormalFormError::DivergentSeries { .. })
        ));
    }

    #[test]
    fn time_one_of_linear_field() {
        let a = DMatrix::from_row_slice(1, 1, &[re(0.3)]);
        let y = TFVectorField::linear(1, 0, &a);
        let out = time_one_map(&y, &[re(1.0)], 64);
        assert!((out[0].re - 0.3f64.exp()).abs() < 1e-10);
    }
}
