use std::collections::btree_map::{self, BTreeMap};
use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::collections::hash_map::DefaultHasher;

use num_complex::Complex64;

use super::domain::{Domain, DomainWeights};
use super::index::MultiIndex;
use super::sum::{ComplexSum, CompensatedSum};
use super::SeriesError;

pub(crate) type Accumulator = HashMap<MultiIndex, Complex64, BuildHasherDefault<DefaultHasher>>;

/// A variable of the phase space: slow `zeta_i` or angle `phi_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Slow(usize),
    Angle(usize),
}

impl Var {
    /// Position in the flat `(zeta, phi)` ordering.
    pub fn flat(&self, m: usize) -> usize {
        match *self {
            Var::Slow(i) => i,
            Var::Angle(i) => m + i,
        }
    }

    pub fn from_flat(j: usize, m: usize) -> Var {
        if j < m {
            Var::Slow(j)
        } else {
            Var::Angle(j - m)
        }
    }
}

/// Sparse Taylor–Fourier series `sum z_{alpha k} zeta^alpha e^{i k.phi}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TFComponent {
    m: usize,
    n: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl TFComponent {
    pub fn zero(m: usize, n: usize) -> Self {
        TFComponent {
            m,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: usize, n: usize, c: Complex64) -> Self {
        let mut out = Self::zero(m, n);
        out.add_term(MultiIndex::zero(m, n), c);
        out
    }

    pub fn monomial(index: MultiIndex, c: Complex64) -> Self {
        let mut out = Self::zero(index.m(), index.n());
        out.add_term(index, c);
        out
    }

    pub fn from_terms<I>(m: usize, n: usize, terms: I) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut out = Self::zero(m, n);
        for (idx, c) in terms {
            if idx.m() != m || idx.n() != n {
                return Err(SeriesError::DimensionMismatch {
                    expected: (m, n),
                    found: (idx.m(), idx.n()),
                });
            }
            out.add_term(idx, c);
        }
        Ok(out)
    }

    pub(crate) fn from_accumulator(m: usize, n: usize, acc: Accumulator) -> Self {
        let terms = acc.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        TFComponent { m, n, terms }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, index: &MultiIndex) -> Complex64 {
        self.terms.get(index).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, MultiIndex, Complex64> {
        self.terms.iter()
    }

    /// Adds `c` to the coefficient at `index`, dropping it if it becomes zero.
    pub fn add_term(&mut self, index: MultiIndex, c: Complex64) {
        debug_assert_eq!((index.m(), index.n()), (self.m, self.n));
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(index) {
            btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            btree_map::Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v == Complex64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    /// Majorant norm `sum |z| eps^{|alpha|} e^{|k| s}`.
    pub fn norm(&self, u: &Domain) -> f64 {
        let mut acc = CompensatedSum::new();
        for (idx, c) in &self.terms {
            acc.add(c.norm() * term_weight(idx, u));
        }
        acc.value()
    }

    pub fn scale(&self, c: Complex64) -> TFComponent {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero(self.m, self.n);
        }
        TFComponent {
            m: self.m,
            n: self.n,
            terms: self.terms.iter().map(|(i, z)| (i.clone(), z * c)).collect(),
        }
    }

    pub fn add(&self, other: &TFComponent) -> TFComponent {
        let mut out = self.clone();
        for (i, z) in &other.terms {
            out.add_term(i.clone(), *z);
        }
        out
    }

    pub fn sub(&self, other: &TFComponent) -> TFComponent {
        let mut out = self.clone();
        for (i, z) in &other.terms {
            out.add_term(i.clone(), -z);
        }
        out
    }

    /// Keeps the terms for which `keep` is true.
    pub fn filter<F: FnMut(&MultiIndex) -> bool>(&self, mut keep: F) -> TFComponent {
        TFComponent {
            m: self.m,
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(i, _)| keep(i))
                .map(|(i, z)| (i.clone(), *z))
                .collect(),
        }
    }

    /// Maps each coefficient; zero results are dropped.
    pub fn map_terms<F: FnMut(&MultiIndex, Complex64) -> Complex64>(&self, mut f: F) -> TFComponent {
        let mut out = Self::zero(self.m, self.n);
        for (i, z) in &self.terms {
            out.add_term(i.clone(), f(i, *z));
        }
        out
    }

    /// `p`-th partial derivative with respect to `var`.
    pub fn partial_derivative(&self, var: Var, p: u32) -> TFComponent {
        let mut out = Self::zero(self.m, self.n);
        match var {
            Var::Angle(j) => {
                let ip = Complex64::i().powu(p);
                for (idx, z) in &self.terms {
                    let k = idx.k()[j];
                    if k != 0 {
                        out.add_term(idx.clone(), z * ip * (k as f64).powi(p as i32));
                    }
                }
            }
            Var::Slow(j) => {
                for (idx, z) in &self.terms {
                    let a = idx.alpha()[j];
                    if a >= p {
                        let falling: f64 = (0..p).map(|q| (a - q) as f64).product();
                        out.add_term(idx.with_alpha(j, a - p), z * falling);
                    }
                }
            }
        }
        out
    }

    /// Product of two series; terms of order above `cap` are dropped and
    /// reported through the returned flag.
    pub fn mul_capped(&self, other: &TFComponent, cap: Option<u32>) -> (TFComponent, bool) {
        let mut acc = Accumulator::default();
        let truncated = self.mul_into(other, Complex64::new(1.0, 0.0), cap, &mut acc);
        (Self::from_accumulator(self.m, self.n, acc), truncated)
    }

    pub(crate) fn mul_into(
        &self,
        other: &TFComponent,
        factor: Complex64,
        cap: Option<u32>,
        acc: &mut Accumulator,
    ) -> bool {
        let mut truncated = false;
        for (ia, za) in &self.terms {
            for (ib, zb) in &other.terms {
                let idx = ia.add(ib);
                if cap.is_some_and(|c| idx.order() > c) {
                    truncated = true;
                    continue;
                }
                *acc.entry(idx).or_default() += za * zb * factor;
            }
        }
        truncated
    }

    /// Pointwise value at complex `(zeta, phi)`.
    pub fn eval(&self, zeta: &[Complex64], phi: &[Complex64]) -> Complex64 {
        let mut acc = ComplexSum::new();
        for (idx, z) in &self.terms {
            acc.add(z * monomial_value(idx, zeta, phi));
        }
        acc.value()
    }

    /// Removes the terms whose weighted contribution to the norm on `u` is at
    /// most `rel` times the component norm.
    pub fn prune(&mut self, u: &Domain, rel: f64) {
        let total = self.norm(u);
        if total == 0.0 {
            return;
        }
        let thr = rel * total;
        self.terms.retain(|idx, z| z.norm() * term_weight(idx, u) > thr);
    }

    pub fn component_norm(&self, u: &DomainWeights) -> f64 {
        self.norm(&u.domain())
    }
}

pub(crate) fn term_weight(idx: &MultiIndex, u: &Domain) -> f64 {
    let a = idx.alpha_order();
    let kk = idx.k_order();
    let pa = if a == 0 { 1.0 } else { u.eps.powi(a as i32) };
    let pk = if kk == 0 { 1.0 } else { (kk as f64 * u.s).exp() };
    pa * pk
}

pub(crate) fn monomial_value(idx: &MultiIndex, zeta: &[Complex64], phi: &[Complex64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (a, z) in idx.alpha().iter().zip(zeta) {
        if *a > 0 {
            v *= z.powu(*a);
        }
    }
    let mut arg = Complex64::new(0.0, 0.0);
    for (k, p) in idx.k().iter().zip(phi) {
        if *k != 0 {
            arg += p * (*k as f64);
        }
    }
    if arg != Complex64::new(0.0, 0.0) {
        v *= (Complex64::i() * arg).exp();
    }
    v
}

/// `||Z_h||_u` for a component.
pub fn component_norm(z: &TFComponent, u: &DomainWeights) -> f64 {
    z.component_norm(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norms_of_single_terms() {
        let u = Domain::new(0.5, 1.0);
        assert_eq!(TFComponent::constant(1, 1, c(2.0)).norm(&u), 2.0);
        let z = TFComponent::monomial(MultiIndex::new(&[1], &[0]), c(1.0));
        assert_eq!(z.norm(&u), 0.5);
        assert_eq!(TFComponent::zero(1, 1).norm(&u), 0.0);
    }

    #[test]
    fn derivatives() {
        let e = TFComponent::monomial(MultiIndex::new(&[], &[1]), c(1.0));
        let d = e.partial_derivative(Var::Angle(0), 1);
        assert_eq!(d.get(&MultiIndex::new(&[], &[1])), Complex64::i());
        let z3 = TFComponent::monomial(MultiIndex::new(&[3], &[]), c(1.0));
        let d = z3.partial_derivative(Var::Slow(0), 2);
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(&MultiIndex::new(&[1], &[])), c(6.0));
    }

    #[test]
    fn product_cap_flags_truncation() {
        let z = TFComponent::monomial(MultiIndex::new(&[1], &[1]), c(1.0));
        let (p, t) = z.mul_capped(&z, Some(3));
        assert!(p.is_empty());
        assert!(t);
        let (p, t) = z.mul_capped(&z, Some(4));
        assert_eq!(p.get(&MultiIndex::new(&[2], &[2])), c(1.0));
        assert!(!t);
    }

    #[test]
    fn eval_matches_closed_form() {
        let mut z = TFComponent::zero(1, 1);
        z.add_term(MultiIndex::new(&[2], &[1]), c(3.0));
        z.add_term(MultiIndex::new(&[0], &[0]), c(-1.0));
        let zeta = Complex64::new(0.3, 0.1);
        let phi = Complex64::new(0.7, 0.0);
        let want = 3.0 * zeta * zeta * (Complex64::i() * phi).exp() - 1.0;
        assert!((z.eval(&[zeta], &[phi]) - want).norm() < 1e-15);
    }
}
