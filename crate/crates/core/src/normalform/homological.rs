use super::{Frequencies, NormalFormError};
use crate::tfseries::{Lattice, TFVectorField};

/// Solves `[Y, N] = Z` term by term, `y = z / d` with the divisors of
/// [`Frequencies::divisor`].
///
/// `k = None` accepts any finitely supported `Z`.
pub fn solve_homological(
    freq: &Frequencies,
    z: &TFVectorField,
    lattice: &Lattice,
    k: Option<u32>,
    gamma: f64,
) -> Result<TFVectorField, NormalFormError> {
    if (freq.m(), freq.n()) != (z.m(), z.n()) {
        return Err(NormalFormError::PreconditionViolated(format!(
            "frequencies have (m, n) = ({}, {}), field has ({}, {})",
            freq.m(),
            freq.n(),
            z.m(),
            z.n()
        )));
    }
    if !z.project_lattice(lattice).is_zero() {
        return Err(NormalFormError::PreconditionViolated(
            "right-hand side has a nonzero lattice projection".into(),
        ));
    }
    if let Some(k) = k {
        if z.max_order().is_some_and(|o| o > k) {
            return Err(NormalFormError::PreconditionViolated(format!(
                "right-hand side has terms of order above K = {k}"
            )));
        }
    }
    let mut err = None;
    let y = z.map_components(|h, comp| {
        comp.map_terms(|idx, c| {
            let d = freq.divisor(idx, h);
            if d.norm() < gamma && err.is_none() {
                err = Some(NormalFormError::SmallDivisor {
                    component: h,
                    index: idx.clone(),
                    value: d.norm(),
                    gamma,
                });
            }
            c / d
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfseries::{MultiIndex, TFComponent};
    use num_complex::Complex64;

    #[test]
    fn single_harmonic() {
        let freq = Frequencies::new(vec![], vec![1.0]);
        let mut z = TFVectorField::zero(0, 1);
        z.set_component(0, TFComponent::monomial(MultiIndex::new(&[], &[1]), Complex64::new(1.0, 0.0)));
        let y = solve_homological(&freq, &z, &Lattice::Zero, Some(1), 1.0).unwrap();
        assert_eq!(y.component(0).get(&MultiIndex::new(&[], &[1])), Complex64::i());
        let residual = y.lie_bracket(&freq.field()).sub(&z);
        assert!(residual.is_zero());
    }

    #[test]
    fn rejects_lattice_terms() {
        let freq = Frequencies::new(vec![], vec![1.0]);
        let z = TFVectorField::constant(0, 1, &[Complex64::new(1.0, 0.0)]);
        assert!(matches!(
            solve_homological(&freq, &z, &Lattice::Zero, None, 1.0),
            Err(NormalFormError::PreconditionViolated(_))
        ));
    }
}
