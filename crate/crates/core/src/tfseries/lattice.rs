use std::collections::BTreeSet;
use std::fmt;

use super::index::LatticePoint;

/// Sub-lattice `Lambda` of `Z^{m+n}` containing the origin.
///
/// Points are signed so that the translated lattices `Lambda + p_h` can be
/// tested by shifting the index instead of the lattice.
#[derive(Clone, Debug, PartialEq)]
pub enum Lattice {
    /// `{0}`.
    Zero,
    /// `Z^m x {0}`: every index without Fourier harmonics (averaging).
    AngleAverage,
    /// Everything.
    Full,
    /// Explicit finite list; membership outside the list is false.
    Explicit(BTreeSet<Vec<i64>>),
}

impl Lattice {
    pub fn contains(&self, point: &[i64], m: usize) -> bool {
        match self {
            Lattice::Zero => point.iter().all(|&p| p == 0),
            Lattice::AngleAverage => point[m..].iter().all(|&p| p == 0),
            Lattice::Full => true,
            Lattice::Explicit(set) => set.contains(point),
        }
    }

    /// Integer span of `generators`, enumerated up to `|.|_1 <= cap`.
    pub fn span(generators: &[Vec<i64>], cap: u64) -> Lattice {
        let dim = generators.first().map_or(0, Vec::len);
        let mut set = BTreeSet::new();
        let mut frontier = vec![vec![0i64; dim]];
        set.insert(vec![0i64; dim]);
        while let Some(p) = frontier.pop() {
            for g in generators {
                for sign in [1i64, -1] {
                    let q: Vec<i64> = p.iter().zip(g).map(|(a, b)| a + sign * b).collect();
                    if q.iter().map(|v| v.unsigned_abs()).sum::<u64>() <= cap && set.insert(q.clone()) {
                        frontier.push(q);
                    }
                }
            }
        }
        Lattice::Explicit(set)
    }

    /// All lattice points with `|.|_1 <= cap` in dimension `m + n`.
    pub fn enumerate(&self, m: usize, n: usize, cap: u32) -> Vec<Vec<i64>> {
        let dim = m + n;
        match self {
            Lattice::Zero => vec![vec![0; dim]],
            Lattice::Explicit(set) => set
                .iter()
                .filter(|p| p.iter().map(|v| v.unsigned_abs()).sum::<u64>() <= cap as u64)
                .cloned()
                .collect(),
            Lattice::AngleAverage | Lattice::Full => {
                let free = if matches!(self, Lattice::Full) { dim } else { m };
                let mut out = Vec::new();
                let mut cur = vec![0i64; dim];
                signed_rec(0, free, cap as i64, &mut cur, &mut out);
                out
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Lattice::Zero => "zero".into(),
            Lattice::AngleAverage => "angle-average".into(),
            Lattice::Full => "full".into(),
            Lattice::Explicit(set) => format!("explicit({} points)", set.len()),
        }
    }

    /// Membership of a shifted index given as a [`LatticePoint`].
    pub fn contains_point(&self, point: &LatticePoint, m: usize) -> bool {
        self.contains(point.as_slice(), m)
    }
}

fn signed_rec(pos: usize, free: usize, budget: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if pos == free {
        out.push(cur.clone());
        return;
    }
    for v in -budget..=budget {
        cur[pos] = v;
        signed_rec(pos + 1, free, budget - v.abs(), cur, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        assert!(Lattice::Zero.contains(&[0, 0, 0], 2));
        assert!(!Lattice::Zero.contains(&[0, -1, 0], 2));
        assert!(Lattice::AngleAverage.contains(&[3, -1, 0], 2));
        assert!(!Lattice::AngleAverage.contains(&[0, 0, 1], 2));
        assert!(Lattice::Full.contains(&[7, 7, 7], 2));
    }

    #[test]
    fn span_enumerates_multiples() {
        let l = Lattice::span(&[vec![1, 1]], 6);
        assert!(l.contains(&[2, 2], 2));
        assert!(l.contains(&[-3, -3], 2));
        assert!(!l.contains(&[1, 0], 2));
        assert!(!l.contains(&[4, 4], 2));
        assert_eq!(l.enumerate(2, 0, 6).len(), 7);
    }

    #[test]
    fn enumerate_average() {
        let pts = Lattice::AngleAverage.enumerate(1, 1, 2);
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|p| p[1] == 0));
    }
}
