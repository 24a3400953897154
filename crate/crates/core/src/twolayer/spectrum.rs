use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

use super::model::{equilibrium, linear_block, Equilibrium};
use super::{TwoLayerError, TwoLayerParams};

/// Quadratic pencil `lambda^2 T + lambda B + V` whose determinant is
/// `eps theta` times the characteristic polynomial of `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPencil {
    pub t: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub v: Matrix2<f64>,
}

pub fn reduce_to_pencil(params: &TwoLayerParams, eq: &Equilibrium) -> QuadraticPencil {
    let (th, e, d) = (params.theta, params.eps_fric, params.delta());
    QuadraticPencil {
        t: Matrix2::new(e, 0.0, 0.0, th),
        b: Matrix2::new(th * e, -th * e, -th * e, th * d),
        v: Matrix2::new(2.0 * params.c1 * e, 0.0, 0.0, 2.0 * eq.c2bar * th),
    }
}

/// Extreme eigenvalues `(min, max)` of the symmetric pencil matrices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilBounds {
    pub t: (f64, f64),
    pub b: (f64, f64),
    pub v: (f64, f64),
}

fn sym_eigs(a: &Matrix2<f64>) -> (f64, f64) {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let hi = 0.5 * (tr + disc);
    // smaller root from the product to avoid cancellation
    let lo = if hi != 0.0 { det / hi } else { 0.5 * (tr - disc) };
    (lo, hi)
}

pub fn pencil_bounds(p: &QuadraticPencil) -> PencilBounds {
    PencilBounds {
        t: sym_eigs(&p.t),
        b: sym_eigs(&p.b),
        v: sym_eigs(&p.v),
    }
}

/// Monic coefficients `[a0, a1, a2, a3]` of
/// `(l^2 + theta l + 2c1)(l^2 + delta l + 2c2bar) - theta eps l^2`.
fn quartic(params: &TwoLayerParams, eq: &Equilibrium) -> [f64; 4] {
    let (th, e, d, c1, c2) = (params.theta, params.eps_fric, params.delta(), params.c1, eq.c2bar);
    [
        4.0 * c1 * c2,
        2.0 * th * c2 + 2.0 * c1 * d,
        2.0 * c2 + th * d + 2.0 * c1 - th * e,
        th + d,
    ]
}

fn eval_quartic(a: &[f64; 4], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in a.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of the characteristic quartic (companion matrix, Newton-polished),
/// without any admissibility checks.
pub fn characteristic_roots(params: &TwoLayerParams, eq: &Equilibrium) -> [Complex64; 4] {
    let a = quartic(params, eq);
    #[rustfmt::skip]
    let comp = Matrix4::new(
        0.0, 0.0, 0.0, -a[0],
        1.0, 0.0, 0.0, -a[1],
        0.0, 1.0, 0.0, -a[2],
        0.0, 0.0, 1.0, -a[3],
    );
    let ev = comp.complex_eigenvalues();
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (i, z0) in ev.iter().enumerate() {
        let mut z = *z0;
        for _ in 0..8 {
            let (p, dp) = eval_quartic(&a, z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            z -= step;
            if step.norm() <= 1e-17 * z.norm().max(1.0) {
                break;
            }
        }
        out[i] = z;
    }
    out
}

/// Eigen-decomposition of `L`, with conjugate pairs `(j, j + 2)`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// `[lambda_1, lambda_2, conj lambda_1, conj lambda_2]`: `Im > 0` first,
    /// ordered by increasing `|Im|`.
    pub eigenvalues: [Complex64; 4],
    /// Columns are eigenvectors normalized to unit max-modulus entry.
    pub b: DMatrix<Complex64>,
    pub b_inv: DMatrix<Complex64>,
    /// `|L b_j - lambda_j b_j|_inf`.
    pub residuals: [f64; 4],
    /// `[-l^B_+ / (2 l^T_-), -l^B_- / (2 l^T_+)]`.
    pub rayleigh_window: (f64, f64),
    /// `[-3 theta / 2, -ups / 3]`.
    pub stated_window: (f64, f64),
    pub stated_window_ok: bool,
    /// `-ups / 6`, the upper bound implied by the Rayleigh window.
    pub corrected_upper: f64,
    pub bounds: PencilBounds,
    pub min_separation: f64,
    /// `|b|_inf |b^{-1}|_inf`.
    pub condition: f64,
}

impl Spectrum {
    /// `|b|_inf`, the largest absolute row sum.
    pub fn b_norm(&self) -> f64 {
        inf_norm(&self.b)
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn inf_norm(a: &DMatrix<Complex64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn null_vector(l: &Matrix4<f64>, lambda: Complex64) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(4, 4, |i, j| {
        Complex64::new(l[(i, j)], 0.0) - if i == j { lambda } else { Complex64::new(0.0, 0.0) }
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let mut v = DMatrix::from_fn(4, 1, |i, _| v_t[(imin, i)].conj());
    let (jmax, _) = (0..4).fold((0, -1.0), |acc, i| {
        let r = v[(i, 0)].norm();
        if r > acc.1 { (i, r) } else { acc }
    });
    let pivot = v[(jmax, 0)];
    v.apply(|z| *z /= pivot);
    v[(jmax, 0)] = Complex64::new(1.0, 0.0);
    v
}

/// Eigenvalues and eigenvectors of `L`; fails on degenerate spectra and on
/// eigenvalues outside the Rayleigh window.
pub fn solve_spectrum(params: &TwoLayerParams) -> Result<Spectrum, TwoLayerError> {
    params.validate()?;
    let eq = equilibrium(params)?;
    let block = linear_block(params, &eq);
    let roots = characteristic_roots(params, &eq);
    let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-10 * scale;
    if let Some(r) = roots.iter().find(|z| z.im.abs() <= tol) {
        return Err(TwoLayerError::DegenerateSpectrum(format!("real eigenvalue {r}")));
    }
    let mut upper: Vec<Complex64> = roots.iter().copied().filter(|z| z.im > 0.0).collect();
    if upper.len() != 2 {
        return Err(TwoLayerError::DegenerateSpectrum(format!(
            "expected two eigenvalues in the upper half plane, found {}",
            upper.len()
        )));
    }
    upper.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
    let eigenvalues = [upper[0], upper[1], upper[0].conj(), upper[1].conj()];
    let mut min_sep = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            min_sep = min_sep.min((eigenvalues[i] - eigenvalues[j]).norm());
        }
    }
    if min_sep <= tol {
        return Err(TwoLayerError::DegenerateSpectrum(format!("eigenvalues coincide (separation {min_sep:.3e})")));
    }

    let mut b = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    for j in 0..2 {
        let v = null_vector(&block.l, eigenvalues[j]);
        for i in 0..4 {
            b[(i, j)] = v[(i, 0)];
            b[(i, j + 2)] = v[(i, 0)].conj();
        }
    }
    let lc = block.as_complex();
    let mut residuals = [0.0; 4];
    for j in 0..4 {
        let col = b.column(j).into_owned();
        let r = &lc * &col - &col * eigenvalues[j];
        residuals[j] = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let b_inv = b.clone().try_inverse().ok_or(TwoLayerError::SingularEigenbasis)?;

    let pencil = reduce_to_pencil(params, &eq);
    let bounds = pencil_bounds(&pencil);
    let rayleigh_window = (-bounds.b.1 / (2.0 * bounds.t.0), -bounds.b.0 / (2.0 * bounds.t.1));
    let stated_window = (-1.5 * params.theta, -params.ups_fric / 3.0);
    let wtol = 1e-12 * scale;
    for (index, l) in eigenvalues.iter().enumerate() {
        if l.re < rayleigh_window.0 - wtol || l.re > rayleigh_window.1 + wtol {
            return Err(TwoLayerError::WindowViolation {
                index,
                re: l.re,
                lo: rayleigh_window.0,
                hi: rayleigh_window.1,
            });
        }
    }
    let stated_window_ok = eigenvalues.iter().all(|l| l.re >= stated_window.0 && l.re <= stated_window.1);
    let condition = inf_norm(&b) * inf_norm(&b_inv);
    Ok(Spectrum {
        eigenvalues,
        b,
        b_inv,
        residuals,
        rayleigh_window,
        stated_window,
        stated_window_ok,
        corrected_upper: -params.ups_fric / 6.0,
        bounds,
        min_separation: min_sep,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_spectrum() {
        let p = TwoLayerParams::default();
        let s = solve_spectrum(&p).unwrap();
        assert!(s.residuals.iter().all(|r| *r < 1e-12), "{:?}", s.residuals);
        let slow = s.max_real();
        assert!((slow + 0.006358).abs() < 1e-5, "{slow}");
        assert!(!s.stated_window_ok);
        assert!(s.max_real() <= s.corrected_upper);
    }

    #[test]
    fn pencil_determinant_matches_quartic() {
        let p = TwoLayerParams {
            v0: 1.5,
            ..Default::default()
        };
        let eq = equilibrium(&p).unwrap();
        let pen = reduce_to_pencil(&p, &eq);
        let a = quartic(&p, &eq);
        for z in [Complex64::new(0.3, 0.7), Complex64::new(-1.0, 2.0)] {
            let m = |i: usize, j: usize| pen.t[(i, j)] * z * z + pen.b[(i, j)] * z + pen.v[(i, j)];
            let det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
            let q = eval_quartic(&a, z).0 * (p.eps_fric * p.theta);
            assert!((det - q).norm() < 1e-12 * q.norm().max(1.0));
        }
    }
}
