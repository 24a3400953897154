use num_complex::Complex64;

use super::NormalFormError;
use crate::tfseries::{for_each_index, Lattice, MultiIndex, TFComponent, TFVectorField};

/// Generalized frequencies `(lambda, i omega)` of `N = (lambda_j zeta_j, omega)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequencies {
    pub lambda: Vec<Complex64>,
    pub omega: Vec<f64>,
}

impl Frequencies {
    pub fn new(lambda: Vec<Complex64>, omega: Vec<f64>) -> Self {
        Frequencies { lambda, omega }
    }

    pub fn m(&self) -> usize {
        self.lambda.len()
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    /// `lambda . a + i omega . k` for a signed point `(a, k)`.
    pub fn form(&self, point: &[i64]) -> Complex64 {
        let m = self.m();
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, a) in self.lambda.iter().zip(&point[..m]) {
            acc += l * (*a as f64);
        }
        let mut im = 0.0;
        for (w, k) in self.omega.iter().zip(&point[m..]) {
            im += w * (*k as f64);
        }
        acc + Complex64::new(0.0, im)
    }

    /// Divisor `d^h_{alpha k} = -(lambda, i omega) . ((alpha, k) - p_h)`.
    pub fn divisor(&self, index: &MultiIndex, h: usize) -> Complex64 {
        -self.form(&index.shifted(h))
    }

    /// Largest modulus among the entries of `(lambda, i omega)`.
    pub fn scale(&self) -> f64 {
        self.lambda
            .iter()
            .map(|l| l.norm())
            .chain(self.omega.iter().map(|w| w.abs()))
            .fold(0.0, f64::max)
    }

    /// The field `N`.
    pub fn field(&self) -> TFVectorField {
        let (m, n) = (self.m(), self.n());
        let mut comps = Vec::with_capacity(m + n);
        for (h, l) in self.lambda.iter().enumerate() {
            comps.push(TFComponent::monomial(MultiIndex::slow_unit(m, n, h), *l));
        }
        for w in &self.omega {
            comps.push(TFComponent::constant(m, n, Complex64::new(*w, 0.0)));
        }
        TFVectorField::from_components(m, n, comps).expect("consistent dimensions")
    }
}

/// Witness of `(gamma, Lambda, K)`-nonresonance.
#[derive(Clone, Debug, PartialEq)]
pub struct NonresonanceCertificate {
    pub gamma: f64,
    pub lattice: Lattice,
    pub k: u32,
    /// Signed point `(alpha, k) - p_h` attaining the smallest divisor (`None`
    /// when every scanned point lies in the lattice).
    pub worst_point: Option<Vec<i64>>,
    pub worst_value: f64,
}

/// Scans every `(alpha, k)` in `N^m x Z^n` with `|(alpha, k)|_1 <= K` together
/// with its translates `(alpha, k) - p_h`, and checks
/// `|lambda . a + i omega . k| >= gamma` at every point outside `Lambda`.
/// The translates are the points whose divisors the homological equation
/// divides by in component `h`; without them `|Y_h| <= |Z_h|/gamma` can fail.
pub fn check_nonresonant(
    freq: &Frequencies,
    gamma: f64,
    lattice: &Lattice,
    k: u32,
) -> Result<NonresonanceCertificate, NormalFormError> {
    if !(gamma > 0.0) {
        return Err(NormalFormError::PreconditionViolated(format!(
            "nonresonance threshold gamma = {gamma} must be positive"
        )));
    }
    let (m, n) = (freq.m(), freq.n());
    let mut worst: Option<(Vec<i64>, f64)> = None;
    let mut point = vec![0i64; m + n];
    let mut visit = |point: &[i64]| {
        if lattice.contains(point, m) {
            return;
        }
        let v = freq.form(point).norm();
        if worst.as_ref().is_none_or(|(_, w)| v < *w) {
            worst = Some((point.to_vec(), v));
        }
    };
    for_each_index(m, n, k, |alpha, kk| {
        for (p, a) in point.iter_mut().zip(alpha) {
            *p = *a as i64;
        }
        for (p, v) in point[m..].iter_mut().zip(kk) {
            *p = *v as i64;
        }
        visit(&point);
        // translates with alpha_h = 0 leave N^m; the others were scanned already
        for h in 0..m {
            if alpha[h] == 0 {
                point[h] = -1;
                visit(&point);
                point[h] = 0;
            }
        }
    });
    match worst {
        Some((point, value)) if value < gamma => Err(NormalFormError::ResonanceFound { point, m, value, gamma }),
        Some((point, value)) => Ok(NonresonanceCertificate {
            gamma,
            lattice: lattice.clone(),
            k,
            worst_point: Some(point),
            worst_value: value,
        }),
        None => Ok(NonresonanceCertificate {
            gamma,
            lattice: lattice.clone(),
            k,
            worst_point: None,
            worst_value: f64::INFINITY,
        }),
    }
}

/// True when every lattice point with `|.|_1 <= order_cap` annihilates the
/// frequency form, up to `1e-12 |omega|`.
pub fn check_lambda_resonant(freq: &Frequencies, lattice: &Lattice, order_cap: u32) -> bool {
    let tol = 1e-12 * freq.scale();
    lattice
        .enumerate(freq.m(), freq.n(), order_cap)
        .iter()
        .all(|p| freq.form(p).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_rotation_is_nonresonant() {
        let f = Frequencies::new(vec![], vec![1.0]);
        for k in 1..6 {
            let c = check_nonresonant(&f, 1.0, &Lattice::Zero, k).unwrap();
            assert_eq!(c.worst_value, 1.0);
        }
    }

    #[test]
    fn conjugate_pair_resonates() {
        let f = Frequencies::new(vec![Complex64::i(), -Complex64::i()], vec![]);
        match check_nonresonant(&f, 0.1, &Lattice::Zero, 2) {
            Err(NormalFormError::ResonanceFound { point, value, .. }) => {
                assert_eq!(value, 0.0);
                assert_eq!(point, vec![1, 1]);
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn translated_points_are_scanned() {
        // lambda_1 - lambda_2 is a divisor of component 2 at alpha = e_1.
        let f = Frequencies::new(vec![Complex64::new(-1.0, 1.0), Complex64::new(-1.05, 1.0)], vec![]);
        match check_nonresonant(&f, 0.1, &Lattice::Zero, 2) {
            Err(NormalFormError::ResonanceFound { point, value, .. }) => {
                assert!((value - 0.05).abs() < 1e-12);
                assert!(point == vec![1, -1] || point == vec![-1, 1], "{point:?}");
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn lattice_resonance() {
        let f = Frequencies::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], vec![]);
        assert!(check_lambda_resonant(&f, &Lattice::Zero, 4));
        assert!(check_lambda_resonant(&f, &Lattice::span(&[vec![1, 1]], 8), 8));
        assert!(!check_lambda_resonant(&f, &Lattice::span(&[vec![1, 1], vec![1, 0]], 8), 8));
        let avg = Frequencies::new(vec![Complex64::new(0.0, 0.0); 2], vec![3.0]);
        assert!(check_lambda_resonant(&avg, &Lattice::AngleAverage, 6));
    }
}
