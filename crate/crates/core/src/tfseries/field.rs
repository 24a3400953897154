use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::component::{Accumulator, TFComponent, Var};
use super::domain::{Domain, DomainWeights};
use super::index::MultiIndex;
use super::lattice::Lattice;
use super::sum::CompensatedSum;
use super::SeriesError;

/// Vector field with `m` slow components followed by `n` angle components.
///
/// `cap` is the truncation order carried by the field (`None` = exact); any
/// operation that had to drop terms above the cap sets `truncated`.
#[derive(Clone, Debug, PartialEq)]
pub struct TFVectorField {
    m: usize,
    n: usize,
    components: Vec<TFComponent>,
    cap: Option<u32>,
    truncated: bool,
}

fn min_cap(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl TFVectorField {
    pub fn zero(m: usize, n: usize) -> Self {
        TFVectorField {
            m,
            n,
            components: (0..m + n).map(|_| TFComponent::zero(m, n)).collect(),
            cap: None,
            truncated: false,
        }
    }

    pub fn from_components(m: usize, n: usize, components: Vec<TFComponent>) -> Result<Self, SeriesError> {
        if components.len() != m + n {
            return Err(SeriesError::ComponentCount {
                expected: m + n,
                found: components.len(),
            });
        }
        if let Some(c) = components.iter().find(|c| c.m() != m || c.n() != n) {
            return Err(SeriesError::DimensionMismatch {
                expected: (m, n),
                found: (c.m(), c.n()),
            });
        }
        Ok(TFVectorField {
            m,
            n,
            components,
            cap: None,
            truncated: false,
        })
    }

    /// Constant field with the given values.
    pub fn constant(m: usize, n: usize, values: &[Complex64]) -> Self {
        let mut f = Self::zero(m, n);
        for (h, v) in values.iter().enumerate() {
            f.components[h] = TFComponent::constant(m, n, *v);
        }
        f
    }

    /// Slow components `A zeta` (angle components zero).
    pub fn linear(m: usize, n: usize, a: &DMatrix<Complex64>) -> Self {
        let mut f = Self::zero(m, n);
        for h in 0..m {
            for j in 0..m {
                f.components[h].add_term(MultiIndex::slow_unit(m, n, j), a[(h, j)]);
            }
        }
        f
    }

    /// Sets the truncation cap, dropping (and flagging) terms above it.
    pub fn with_cap(mut self, cap: Option<u32>) -> Self {
        self.cap = cap;
        if let Some(c) = cap {
            for comp in &mut self.components {
                if comp.max_order().is_some_and(|o| o > c) {
                    *comp = comp.filter(|i| i.order() <= c);
                    self.truncated = true;
                }
            }
        }
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn component(&self, h: usize) -> &TFComponent {
        &self.components[h]
    }

    pub fn components(&self) -> &[TFComponent] {
        &self.components
    }

    pub fn set_component(&mut self, h: usize, comp: TFComponent) {
        assert_eq!((comp.m(), comp.n()), (self.m, self.n));
        self.components[h] = comp;
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(TFComponent::is_empty)
    }

    pub fn num_terms(&self) -> usize {
        self.components.iter().map(TFComponent::len).sum()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.components.iter().filter_map(TFComponent::max_order).max()
    }

    fn check_dims(&self, other: &TFVectorField) {
        assert_eq!(
            (self.m, self.n),
            (other.m, other.n),
            "vector fields of different dimensions"
        );
    }

    fn zip_with<F: Fn(&TFComponent, &TFComponent) -> TFComponent>(&self, other: &TFVectorField, f: F) -> TFVectorField {
        self.check_dims(other);
        let out = TFVectorField {
            m: self.m,
            n: self.n,
            components: self.components.iter().zip(&other.components).map(|(a, b)| f(a, b)).collect(),
            cap: min_cap(self.cap, other.cap),
            truncated: self.truncated || other.truncated,
        };
        let cap = out.cap;
        out.with_cap(cap)
    }

    pub fn add(&self, other: &TFVectorField) -> TFVectorField {
        self.zip_with(other, TFComponent::add)
    }

    pub fn sub(&self, other: &TFVectorField) -> TFVectorField {
        self.zip_with(other, TFComponent::sub)
    }

    pub fn scale(&self, c: Complex64) -> TFVectorField {
        self.map_components(|_, comp| comp.scale(c))
    }

    pub fn scale_re(&self, c: f64) -> TFVectorField {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Applies `f(h, Z_h)` to every component, keeping cap metadata.
    pub fn map_components<F: FnMut(usize, &TFComponent) -> TFComponent>(&self, mut f: F) -> TFVectorField {
        TFVectorField {
            m: self.m,
            n: self.n,
            components: self.components.iter().enumerate().map(|(h, c)| f(h, c)).collect(),
            cap: self.cap,
            truncated: self.truncated,
        }
    }

    /// Keeps the terms `(h, index)` for which `keep` holds.
    pub fn filter_terms<F: FnMut(usize, &MultiIndex) -> bool>(&self, mut keep: F) -> TFVectorField {
        self.map_components(|h, c| c.filter(|i| keep(h, i)))
    }

    /// `[[X]]^w_u = sum_h w_h^{-1} ||X_h||_u`.
    pub fn weighted_norm(&self, u: &DomainWeights) -> f64 {
        assert_eq!(u.weights.len(), self.dim(), "weight vector length");
        let d = u.domain();
        let mut acc = CompensatedSum::new();
        for (comp, w) in self.components.iter().zip(&u.weights) {
            acc.add(comp.norm(&d) / w);
        }
        acc.value()
    }

    /// Sampled lower estimate of `sup_{x in V_u} sum_h w_h^{-1} |X_h(x)|`.
    pub fn sup_norm(&self, u: &DomainWeights, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for s in 0..samples.max(1) {
            let on_boundary = s % 2 == 0;
            let zeta: Vec<Complex64> = (0..self.m)
                .map(|_| {
                    let r = if on_boundary { 1.0 } else { rng.gen::<f64>().sqrt() };
                    Complex64::from_polar(u.eps * r, rng.gen_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            let phi: Vec<Complex64> = (0..self.n)
                .map(|_| {
                    let im = if on_boundary {
                        if rng.gen::<bool>() { u.s } else { -u.s }
                    } else {
                        rng.gen_range(-u.s..=u.s)
                    };
                    Complex64::new(rng.gen_range(0.0..std::f64::consts::TAU), im)
                })
                .collect();
            let v = self.eval(&zeta, &phi);
            let mut acc = CompensatedSum::new();
            for (x, w) in v.iter().zip(&u.weights) {
                acc.add(x.norm() / w);
            }
            best = best.max(acc.value());
        }
        best
    }

    pub fn eval(&self, zeta: &[Complex64], phi: &[Complex64]) -> Vec<Complex64> {
        self.components.iter().map(|c| c.eval(zeta, phi)).collect()
    }

    /// Directional derivative `J_X V`, i.e. `(J_X V)_h = sum_j d_j X_h V_j`.
    pub fn jacobian_apply(&self, v: &TFVectorField) -> TFVectorField {
        self.check_dims(v);
        let cap = min_cap(self.cap, v.cap);
        let mut truncated = self.truncated || v.truncated;
        let one = Complex64::new(1.0, 0.0);
        let components = self
            .components
            .iter()
            .map(|xh| {
                let mut acc = Accumulator::default();
                for (j, vj) in v.components.iter().enumerate() {
                    if vj.is_empty() {
                        continue;
                    }
                    let d = xh.partial_derivative(Var::from_flat(j, self.m), 1);
                    if d.is_empty() {
                        continue;
                    }
                    truncated |= d.mul_into(vj, one, cap, &mut acc);
                }
                TFComponent::from_accumulator(self.m, self.n, acc)
            })
            .collect();
        TFVectorField {
            m: self.m,
            n: self.n,
            components,
            cap,
            truncated,
        }
    }

    /// `[Y, X] = J_X Y - J_Y X`, with `self = Y`.
    pub fn lie_bracket(&self, x: &TFVectorField) -> TFVectorField {
        x.jacobian_apply(self).sub(&self.jacobian_apply(x))
    }

    /// `T_K`: keeps orders `<= k`.
    pub fn project_order(&self, k: u32) -> TFVectorField {
        self.filter_terms(|_, i| i.order() <= k)
    }

    /// `Pi_Lambda`: component `h` keeps indices in `Lambda + p_h`.
    pub fn project_lattice(&self, lattice: &Lattice) -> TFVectorField {
        let m = self.m;
        self.filter_terms(|h, i| lattice.contains_point(&i.shifted(h), m))
    }

    /// `Id - Pi_Lambda`.
    pub fn project_lattice_complement(&self, lattice: &Lattice) -> TFVectorField {
        let m = self.m;
        self.filter_terms(|h, i| !lattice.contains_point(&i.shifted(h), m))
    }

    /// Splits into orders `< 2K` and the ultraviolet tail of orders `>= 2K`.
    pub fn ultraviolet_tail(&self, k: u32) -> (TFVectorField, TFVectorField) {
        let cut = 2 * k;
        (
            self.filter_terms(|_, i| i.order() < cut),
            self.filter_terms(|_, i| i.order() >= cut),
        )
    }

    /// Average over all angles (keeps `k = 0`).
    pub fn angle_average(&self) -> TFVectorField {
        self.filter_terms(|_, i| i.k().iter().all(|&k| k == 0))
    }

    /// `Z(b zeta)` in every component (no action on the components themselves).
    pub fn substitute_linear(&self, b: &DMatrix<Complex64>) -> TFVectorField {
        let (m, n) = (self.m, self.n);
        let max_a = self
            .components
            .iter()
            .flat_map(|c| c.iter().flat_map(|(i, _)| i.alpha().iter().copied().max()))
            .max()
            .unwrap_or(0) as usize;
        // powers[i][p] = (sum_j b_ij zeta_j)^p
        let mut powers: Vec<Vec<TFComponent>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut row = TFComponent::zero(m, n);
            for j in 0..m {
                row.add_term(MultiIndex::slow_unit(m, n, j), b[(i, j)]);
            }
            let mut list = vec![TFComponent::constant(m, n, Complex64::new(1.0, 0.0))];
            for p in 1..=max_a {
                let next = list[p - 1].mul_capped(&row, None).0;
                list.push(next);
            }
            powers.push(list);
        }
        self.map_components(|_, comp| {
            let mut out = TFComponent::zero(m, n);
            for (idx, z) in comp.iter() {
                let mut acc = TFComponent::monomial(MultiIndex::new(&vec![0; m], idx.k()), *z);
                for (i, &a) in idx.alpha().iter().enumerate() {
                    if a > 0 {
                        acc = acc.mul_capped(&powers[i][a as usize], None).0;
                    }
                }
                out = out.add(&acc);
            }
            out
        })
    }

    /// Linear change of slow variables `zeta = b zeta'`: returns
    /// `(b^{-1} Z_slow(b zeta'), Z_angle(b zeta'))`.
    pub fn conjugate_linear(&self, b: &DMatrix<Complex64>, b_inv: &DMatrix<Complex64>) -> TFVectorField {
        let sub = self.substitute_linear(b);
        let m = self.m;
        let mut out = sub.clone();
        for h in 0..m {
            let mut comp = TFComponent::zero(m, self.n);
            for j in 0..m {
                comp = comp.add(&sub.components[j].scale(b_inv[(h, j)]));
            }
            out.components[h] = comp;
        }
        out
    }

    /// Substitutes `zeta_var -> zeta_var + delta`.
    pub fn shift_slow(&self, var: usize, delta: Complex64) -> TFVectorField {
        self.map_components(|_, comp| {
            let mut out = TFComponent::zero(self.m, self.n);
            for (idx, z) in comp.iter() {
                let a = idx.alpha()[var];
                let mut binom = 1.0;
                for q in (0..=a).rev() {
                    // coefficient C(a, q) delta^{a-q} zeta^q
                    let c = z * binom * delta.powu(a - q);
                    out.add_term(idx.with_alpha(var, q), c);
                    binom = binom * q as f64 / (a - q + 1) as f64;
                }
            }
            out
        })
    }

    /// Drops terms contributing at most `rel` of their component's norm on `u`.
    pub fn prune(&mut self, u: &Domain, rel: f64) {
        for c in &mut self.components {
            c.prune(u, rel);
        }
    }

    /// Mutable access for in-crate builders.
    pub(crate) fn component_mut(&mut self, h: usize) -> &mut TFComponent {
        &mut self.components[h]
    }

}

/// `[[X]]^w_u`.
pub fn weighted_field_norm(x: &TFVectorField, u: &DomainWeights) -> f64 {
    x.weighted_norm(u)
}

pub fn sup_field_norm(x: &TFVectorField, u: &DomainWeights, samples: usize, seed: u64) -> f64 {
    x.sup_norm(u, samples, seed)
}

pub fn lie_bracket(y: &TFVectorField, x: &TFVectorField) -> TFVectorField {
    y.lie_bracket(x)
}

pub fn project_order(z: &TFVectorField, k: u32) -> TFVectorField {
    z.project_order(k)
}

pub fn project_lattice(z: &TFVectorField, lattice: &Lattice) -> TFVectorField {
    z.project_lattice(lattice)
}

pub fn ultraviolet_tail(z: &TFVectorField, k: u32) -> (TFVectorField, TFVectorField) {
    z.ultraviolet_tail(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn bracket_of_linear_fields_is_commutator() {
        let a = DMatrix::from_row_slice(2, 2, &[re(1.0), re(2.0), re(-0.5), re(0.3)]);
        let b = DMatrix::from_row_slice(2, 2, &[re(0.1), re(-1.0), re(4.0), re(2.0)]);
        let y = TFVectorField::linear(2, 0, &a);
        let x = TFVectorField::linear(2, 0, &b);
        let got = y.lie_bracket(&x);
        let want = TFVectorField::linear(2, 0, &(&b * &a - &a * &b));
        assert!(got.sub(&want).is_zero() || got.sub(&want).weighted_norm(&dw()) < 1e-14);
        assert!(y.lie_bracket(&y).is_zero());
    }

    fn dw() -> DomainWeights {
        DomainWeights::new(Domain::new(1.0, 1.0), vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn projector_on_zero_lattice() {
        let mut f = TFVectorField::zero(1, 1);
        for a in 0..3u32 {
            for k in -1..=1 {
                f.component_mut(0).add_term(MultiIndex::new(&[a], &[k]), re(1.0));
                f.component_mut(1).add_term(MultiIndex::new(&[a], &[k]), re(1.0));
            }
        }
        let p = f.project_lattice(&Lattice::Zero);
        assert_eq!(p.component(0).len(), 1);
        assert_eq!(p.component(0).get(&MultiIndex::new(&[1], &[0])), re(1.0));
        assert_eq!(p.component(1).len(), 1);
        assert_eq!(p.component(1).get(&MultiIndex::new(&[0], &[0])), re(1.0));
        let q = f.project_lattice_complement(&Lattice::Zero);
        assert_eq!(p.add(&q), f);
    }

    #[test]
    fn shift_matches_binomial() {
        let mut f = TFVectorField::zero(1, 0);
        f.component_mut(0).add_term(MultiIndex::new(&[3], &[]), re(1.0));
        let g = f.shift_slow(0, re(2.0));
        // (z + 2)^3 = z^3 + 6 z^2 + 12 z + 8
        let c = g.component(0);
        assert_eq!(c.get(&MultiIndex::new(&[0], &[])), re(8.0));
        assert_eq!(c.get(&MultiIndex::new(&[1], &[])), re(12.0));
        assert_eq!(c.get(&MultiIndex::new(&[2], &[])), re(6.0));
        assert_eq!(c.get(&MultiIndex::new(&[3], &[])), re(1.0));
    }

    #[test]
    fn conjugation_of_linear_field() {
        let a = DMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(-2.0), re(-0.1)]);
        let b = DMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(0.5), re(2.0)]);
        let b_inv = b.clone().try_inverse().unwrap();
        let f = TFVectorField::linear(2, 0, &a).conjugate_linear(&b, &b_inv);
        let want = TFVectorField::linear(2, 0, &(&b_inv * &a * &b));
        assert!(f.sub(&want).weighted_norm(&dw()) < 1e-14);
    }
}
