use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::CompiledField;
use super::integrate::{integrate, IntegratorOptions};
use super::DynamicsError;
use crate::normalform::lie_series_apply;
use crate::tfseries::{Domain, TFVectorField};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 30;
const FLOW_RTOL: f64 = 1e-13;

/// Route A / route B comparison of `e^{L_Y} X` against the flow of `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationReport {
    pub samples: usize,
    /// Largest `|y_A(t) - y_B(t)|_inf` over samples and output times.
    pub max_discrepancy: f64,
    pub per_sample: Vec<f64>,
    pub q: f64,
    pub lie_tail: f64,
    /// `tol + t_final * lie_tail`.
    pub threshold: f64,
    pub pass: bool,
}

fn flow_opts(x: &[Complex64]) -> IntegratorOptions {
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    IntegratorOptions {
        rtol: FLOW_RTOL,
        atol: FLOW_RTOL * 1e-3 * scale,
        ..Default::default()
    }
}

/// Time-one map of `Y` by the adaptive integrator.
fn time_one(y: &CompiledField, x: &[Complex64]) -> Result<Vec<Complex64>, DynamicsError> {
    let traj = integrate(|_, s| y.eval(s), x, 0.0, 1.0, &[], &flow_opts(x))?;
    Ok(traj.last().to_vec())
}

fn sup_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

/// Solves `Phi_1^Y(z) = x` by Newton's method seeded with `x - Y(x)`.
pub fn pull_back(y: &TFVectorField, x: &[Complex64]) -> Result<Vec<Complex64>, DynamicsError> {
    let cy = CompiledField::new(y);
    let dim = x.len();
    let vy = cy.eval(x);
    let mut z: Vec<Complex64> = x.iter().zip(&vy).map(|(a, b)| a - b).collect();
    let scale = x.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let mut residual = f64::INFINITY;
    for it in 0..NEWTON_MAX_ITER {
        let fz = time_one(&cy, &z)?;
        let r: Vec<Complex64> = fz.iter().zip(x).map(|(a, b)| a - b).collect();
        residual = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if residual <= NEWTON_TOL * scale {
            return Ok(z);
        }
        let h = 1e-6 * scale.max(z.iter().map(|v| v.norm()).fold(0.0, f64::max));
        let mut jac = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for j in 0..dim {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += h;
            zm[j] -= h;
            let fp = time_one(&cy, &zp)?;
            let fm = time_one(&cy, &zm)?;
            for i in 0..dim {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_vec(r);
        let Some(delta) = jac.lu().solve(&rhs) else {
            return Err(DynamicsError::NewtonFailed {
                iterations: it + 1,
                residual,
            });
        };
        for (zi, d) in z.iter_mut().zip(delta.iter()) {
            *zi -= d;
        }
    }
    Err(DynamicsError::NewtonFailed {
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

/// Compares route A (integrate `e^{L_Y} X` from `y`) with route B (integrate
/// `X` from `Phi_1^Y(y)` and pull back through `Phi_1^Y`) on `samples` seeded
/// points of the real slice of `V_{u/2}`, over `t in [0, t_final]`.
#[allow(clippy::too_many_arguments)]
pub fn verify_conjugation(
    y: &TFVectorField,
    x: &TFVectorField,
    u: &Domain,
    w: &Domain,
    samples: usize,
    tol: f64,
    t_final: f64,
    seed: u64,
) -> Result<ConjugationReport, DynamicsError> {
    let lie = lie_series_apply(y, x, u, w, None)?;
    let ca = CompiledField::new(&lie.field);
    let cx = CompiledField::new(x);
    let cy = CompiledField::new(y);
    let (m, n) = (x.m(), x.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outputs: Vec<f64> = (1..10).map(|i| t_final * i as f64 / 10.0).collect();
    let mut per_sample = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut y0: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.gen_range(-0.5..0.5) * u.eps, 0.0))
            .collect();
        y0.extend((0..n).map(|_| Complex64::new(rng.gen_range(0.0..std::f64::consts::TAU), 0.0)));
        let ta = integrate(|_, s| ca.eval(s), &y0, 0.0, t_final, &outputs, &flow_opts(&y0))?;
        let x0 = time_one(&cy, &y0)?;
        let tb = integrate(|_, s| cx.eval(s), &x0, 0.0, t_final, &outputs, &flow_opts(&x0))?;
        let mut worst: f64 = 0.0;
        for (ya, xb) in ta.states.iter().zip(&tb.states) {
            let yb = pull_back(y, xb)?;
            worst = worst.max(sup_dist(ya, &yb));
        }
        per_sample.push(worst);
    }
    let max_discrepancy = per_sample.iter().copied().fold(0.0, f64::max);
    let threshold = tol + t_final * lie.tail_bound;
    Ok(ConjugationReport {
        samples,
        max_discrepancy,
        per_sample,
        q: lie.q,
        lie_tail: lie.tail_bound,
        threshold,
        pass: max_discrepancy <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_generator_translates_identity_field() {
        let y = TFVectorField::constant(1, 0, &[re(0.05)]);
        let x = TFVectorField::linear(1, 0, &DMatrix::from_element(1, 1, re(1.0)));
        let r = verify_conjugation(&y, &x, &Domain::new(1.0, 1.0), &Domain::new(0.2, 0.2), 2, 1e-8, 1.0, 1).unwrap();
        assert_eq!(r.lie_tail, 0.0);
        assert!(r.pass, "{r:?}");
    }
}
