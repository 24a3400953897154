use num_complex::Complex64;

use super::DynamicsError;
use crate::tfseries::{Domain, TFVectorField};

struct Term {
    alpha: Vec<(usize, u32)>,
    k: Vec<(usize, i32)>,
    coef: Complex64,
}

/// Flattened copy of a field for repeated pointwise evaluation with cached
/// powers and Fourier factors.
pub struct CompiledField {
    m: usize,
    n: usize,
    max_alpha: usize,
    max_k: usize,
    comps: Vec<Vec<Term>>,
}

impl CompiledField {
    pub fn new(field: &TFVectorField) -> Self {
        let (m, n) = (field.m(), field.n());
        let mut max_alpha = 0;
        let mut max_k = 0;
        let comps = field
            .components()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|(idx, z)| {
                        let alpha: Vec<(usize, u32)> =
                            idx.alpha().iter().enumerate().filter(|(_, a)| **a > 0).map(|(j, a)| (j, *a)).collect();
                        let k: Vec<(usize, i32)> =
                            idx.k().iter().enumerate().filter(|(_, k)| **k != 0).map(|(j, k)| (j, *k)).collect();
                        for (_, a) in &alpha {
                            max_alpha = max_alpha.max(*a as usize);
                        }
                        for (_, kk) in &k {
                            max_k = max_k.max(kk.unsigned_abs() as usize);
                        }
                        Term { alpha, k, coef: *z }
                    })
                    .collect()
            })
            .collect();
        CompiledField {
            m,
            n,
            max_alpha,
            max_k,
            comps,
        }
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Value at the flat state `(zeta, phi)`.
    pub fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (m, n) = (self.m, self.n);
        let one = Complex64::new(1.0, 0.0);
        let pw: Vec<Vec<Complex64>> = (0..m)
            .map(|j| {
                let mut row = Vec::with_capacity(self.max_alpha + 1);
                row.push(one);
                for a in 1..=self.max_alpha {
                    row.push(row[a - 1] * x[j]);
                }
                row
            })
            .collect();
        // fourier[j][k + max_k] = e^{i k phi_j}
        let fourier: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                let e = (Complex64::i() * x[m + j]).exp();
                let einv = one / e;
                let mut row = vec![one; 2 * self.max_k + 1];
                for k in 1..=self.max_k {
                    row[self.max_k + k] = row[self.max_k + k - 1] * e;
                    row[self.max_k - k] = row[self.max_k - k + 1] * einv;
                }
                row
            })
            .collect();
        self.comps
            .iter()
            .map(|terms| {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    let mut v = t.coef;
                    for &(j, a) in &t.alpha {
                        v *= pw[j][a as usize];
                    }
                    for &(j, k) in &t.k {
                        v *= fourier[j][(self.max_k as i64 + k as i64) as usize];
                    }
                    acc += v;
                }
                acc
            })
            .collect()
    }
}

/// Evaluates `field` at `(zeta, phi)` after checking that the point lies in
/// `{|zeta|_inf <= eps, |Im phi|_inf <= s}`.
pub fn evaluate_field(
    field: &TFVectorField,
    zeta: &[Complex64],
    phi: &[Complex64],
    domain: &Domain,
) -> Result<Vec<Complex64>, DynamicsError> {
    if zeta.len() != field.m() || phi.len() != field.n() {
        return Err(DynamicsError::OutOfDomain(format!(
            "expected {} slow and {} angle coordinates, got {} and {}",
            field.m(),
            field.n(),
            zeta.len(),
            phi.len()
        )));
    }
    let z = zeta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let s = phi.iter().map(|p| p.im.abs()).fold(0.0, f64::max);
    if z > domain.eps || s > domain.s {
        return Err(DynamicsError::OutOfDomain(format!(
            "|zeta| = {z:.6e} (radius {:.6e}), |Im phi| = {s:.6e} (strip {:.6e})",
            domain.eps, domain.s
        )));
    }
    Ok(field.eval(zeta, phi))
}
