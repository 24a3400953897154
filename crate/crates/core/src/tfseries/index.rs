use smallvec::SmallVec;
use std::fmt;

/// Signed point of `Z^{m+n}`; used for lattice membership after the `p_h` shift.
pub type LatticePoint = SmallVec<[i64; 8]>;

/// Taylor exponents `alpha` (one per slow variable) and Fourier harmonics `k`
/// (one per angle).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    alpha: SmallVec<[u32; 6]>,
    k: SmallVec<[i32; 4]>,
}

impl MultiIndex {
    pub fn new(alpha: &[u32], k: &[i32]) -> Self {
        MultiIndex {
            alpha: SmallVec::from_slice(alpha),
            k: SmallVec::from_slice(k),
        }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        MultiIndex {
            alpha: SmallVec::from_elem(0, m),
            k: SmallVec::from_elem(0, n),
        }
    }

    /// `zeta_var` to the first power.
    pub fn slow_unit(m: usize, n: usize, var: usize) -> Self {
        let mut idx = Self::zero(m, n);
        idx.alpha[var] = 1;
        idx
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn k(&self) -> &[i32] {
        &self.k
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    pub fn alpha_order(&self) -> u32 {
        self.alpha.iter().sum()
    }

    pub fn k_order(&self) -> u32 {
        self.k.iter().map(|k| k.unsigned_abs()).sum()
    }

    /// `|(alpha, k)|_1`.
    pub fn order(&self) -> u32 {
        self.alpha_order() + self.k_order()
    }

    pub fn is_zero(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0) && self.k.iter().all(|&k| k == 0)
    }

    /// Index of the product of the two monomials.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.m(), other.m());
        debug_assert_eq!(self.n(), other.n());
        MultiIndex {
            alpha: self
                .alpha
                .iter()
                .zip(&other.alpha)
                .map(|(a, b)| a + b)
                .collect(),
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
        }
    }

    pub(crate) fn with_alpha(&self, var: usize, value: u32) -> MultiIndex {
        let mut out = self.clone();
        out.alpha[var] = value;
        out
    }

    /// `(alpha, k) - p_h`, where `p_h` is the unit vector `e_h` for a slow
    /// component and zero for an angle component.
    pub fn shifted(&self, h: usize) -> LatticePoint {
        let mut p: LatticePoint = self
            .alpha
            .iter()
            .map(|&a| a as i64)
            .chain(self.k.iter().map(|&k| k as i64))
            .collect();
        if h < self.m() {
            p[h] -= 1;
        }
        p
    }

    pub fn as_point(&self) -> LatticePoint {
        self.alpha
            .iter()
            .map(|&a| a as i64)
            .chain(self.k.iter().map(|&k| k as i64))
            .collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.alpha.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ";")?;
        for (i, k) in self.k.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Calls `visit` on every `(alpha, k)` in `N^m x Z^n` with
/// `|(alpha, k)|_1 <= max_order`, in a fixed order.
pub fn for_each_index<F: FnMut(&[u32], &[i32])>(m: usize, n: usize, max_order: u32, mut visit: F) {
    let mut alpha = vec![0u32; m];
    let mut k = vec![0i32; n];
    alpha_rec(0, max_order, &mut alpha, &mut k, &mut visit);
}

fn alpha_rec<F: FnMut(&[u32], &[i32])>(
    pos: usize,
    budget: u32,
    alpha: &mut [u32],
    k: &mut [i32],
    visit: &mut F,
) {
    if pos == alpha.len() {
        k_rec(0, budget, alpha, k, visit);
        return;
    }
    for a in 0..=budget {
        alpha[pos] = a;
        alpha_rec(pos + 1, budget - a, alpha, k, visit);
    }
    alpha[pos] = 0;
}

fn k_rec<F: FnMut(&[u32], &[i32])>(
    pos: usize,
    budget: u32,
    alpha: &[u32],
    k: &mut [i32],
    visit: &mut F,
) {
    if pos == k.len() {
        visit(alpha, k);
        return;
    }
    let b = budget as i32;
    for v in -b..=b {
        k[pos] = v;
        k_rec(pos + 1, budget - v.unsigned_abs(), alpha, k, visit);
    }
    k[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_shift() {
        let idx = MultiIndex::new(&[2, 0], &[-3]);
        assert_eq!(idx.order(), 5);
        assert_eq!(idx.shifted(0).as_slice(), &[1, 0, -3]);
        assert_eq!(idx.shifted(1).as_slice(), &[2, -1, -3]);
        assert_eq!(idx.shifted(2).as_slice(), &[2, 0, -3]);
    }

    #[test]
    fn enumeration_counts() {
        // m = 1, n = 1, order <= 2: alpha in 0..=2 and |k| <= 2 - alpha.
        let mut count = 0;
        for_each_index(1, 1, 2, |_, _| count += 1);
        assert_eq!(count, 5 + 3 + 1);
        let mut count = 0;
        for_each_index(2, 0, 3, |a, _| {
            assert!(a.iter().sum::<u32>() <= 3);
            count += 1
        });
        assert_eq!(count, 10);
    }
}
