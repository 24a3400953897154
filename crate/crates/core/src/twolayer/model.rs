use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

use super::{TwoLayerError, TwoLayerParams};
use crate::normalform::Frequencies;
use crate::tfseries::{MultiIndex, TFComponent, TFVectorField};

/// Number of slow variables `(gamma, p_gamma, eta, p_eta)` and angles `(l)`.
pub const SLOW_DIM: usize = 4;
pub const ANGLE_DIM: usize = 1;

const IDX_PGAMMA: usize = 1;
const IDX_ETA: usize = 2;
const IDX_PETA: usize = 3;

/// Equilibrium `(0, 0, eta_0, 0)` with `sin 2 eta_0 = ups v_0 / c_2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equilibrium {
    pub eta0: f64,
    pub cos2eta0: f64,
    /// `c2_bar = c_2 cos 2 eta_0`.
    pub c2bar: f64,
}

pub fn equilibrium(params: &TwoLayerParams) -> Result<Equilibrium, TwoLayerError> {
    params.check_equilibrium()?;
    let s = params.ups_fric * params.v0 / params.c2;
    let eta0 = 0.5 * s.asin();
    let cos2eta0 = (1.0 - s * s).sqrt();
    Ok(Equilibrium {
        eta0,
        cos2eta0,
        c2bar: params.c2 * cos2eta0,
    })
}

/// Linear part `L` of the equilibrium-centred system.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearBlock {
    pub l: Matrix4<f64>,
}

impl LinearBlock {
    pub fn as_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(4, 4, |i, j| Complex64::new(self.l[(i, j)], 0.0))
    }
}

pub fn linear_block(params: &TwoLayerParams, eq: &Equilibrium) -> LinearBlock {
    let (th, e, d) = (params.theta, params.eps_fric, params.delta());
    #[rustfmt::skip]
    let l = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        -2.0 * params.c1, -th, 0.0, th,
        0.0, 0.0, 0.0, 1.0,
        0.0, e, -2.0 * eq.c2bar, -d,
    );
    LinearBlock { l }
}

/// External perturbations in equilibrium-centred coordinates
/// `(gamma, p_gamma, psi, p_psi; l)`: `tilde` has zero angle average, `hat`
/// is the remaining (slow) part.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSet {
    pub tilde: TFVectorField,
    pub hat: TFVectorField,
}

impl PerturbationSet {
    pub fn zero() -> Self {
        PerturbationSet {
            tilde: TFVectorField::zero(SLOW_DIM, ANGLE_DIM),
            hat: TFVectorField::zero(SLOW_DIM, ANGLE_DIM),
        }
    }

    pub fn validate(&self) -> Result<(), TwoLayerError> {
        for f in [&self.tilde, &self.hat] {
            if f.m() != SLOW_DIM || f.n() != ANGLE_DIM {
                return Err(crate::tfseries::SeriesError::DimensionMismatch {
                    expected: (SLOW_DIM, ANGLE_DIM),
                    found: (f.m(), f.n()),
                }
                .into());
            }
        }
        let avg = self.tilde.angle_average();
        for h in 0..avg.dim() {
            let size: f64 = avg.component(h).iter().map(|(_, z)| z.norm()).sum();
            if size > 0.0 {
                return Err(TwoLayerError::PerturbationAverageNonzero { component: h, size });
            }
        }
        Ok(())
    }
}

/// Coefficients of `sin(2x + c)` in powers of `x` up to order `cap`:
/// `2^p / p! sin(c + p pi/2)`.
fn sin2_series(c: f64, cap: u32) -> Vec<f64> {
    let (s, co) = c.sin_cos();
    let mut out = Vec::with_capacity(cap as usize + 1);
    let mut f = 1.0;
    for p in 0..=cap {
        if p > 0 {
            f *= 2.0 / p as f64;
        }
        let t = match p % 4 {
            0 => s,
            1 => co,
            2 => -s,
            _ => -co,
        };
        out.push(f * t);
    }
    out
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn power_term(var: usize, p: u32) -> MultiIndex {
    let mut a = [0u32; SLOW_DIM];
    a[var] = p;
    MultiIndex::new(&a, &[0])
}

fn add_linear(comp: &mut TFComponent, var: usize, c: f64) {
    if c != 0.0 {
        comp.add_term(power_term(var, 1), re(c));
    }
}

/// Full system in `(gamma, p_gamma, eta, p_eta; l)` with the sines expanded
/// to order `cap` about the origin.
pub fn build_full_field(
    params: &TwoLayerParams,
    perts: &PerturbationSet,
    cap: u32,
) -> Result<TFVectorField, TwoLayerError> {
    params.validate()?;
    perts.validate()?;
    let eq = equilibrium(params)?;
    let (m, n) = (SLOW_DIM, ANGLE_DIM);
    let mut comps: Vec<TFComponent> = (0..m + n).map(|_| TFComponent::zero(m, n)).collect();
    add_linear(&mut comps[0], IDX_PGAMMA, 1.0);
    add_linear(&mut comps[IDX_ETA], IDX_PETA, 1.0);
    for (p, c) in sin2_series(0.0, cap).into_iter().enumerate() {
        if c != 0.0 {
            comps[IDX_PGAMMA].add_term(power_term(0, p as u32), re(-params.c1 * c));
            comps[IDX_PETA].add_term(power_term(IDX_ETA, p as u32), re(-params.c2 * c));
        }
    }
    add_linear(&mut comps[IDX_PGAMMA], IDX_PGAMMA, -params.theta);
    add_linear(&mut comps[IDX_PGAMMA], IDX_PETA, params.theta);
    add_linear(&mut comps[IDX_PETA], IDX_PGAMMA, params.eps_fric);
    add_linear(&mut comps[IDX_PETA], IDX_PETA, -params.delta());
    comps[IDX_PETA].add_term(MultiIndex::zero(m, n), re(params.ups_fric * params.v0));
    comps[SLOW_DIM].add_term(MultiIndex::zero(m, n), re(params.omega));
    let base = TFVectorField::from_components(m, n, comps)?;
    let shift = re(-eq.eta0);
    let pert = perts.tilde.add(&perts.hat).shift_slow(IDX_ETA, shift);
    Ok(base.add(&pert).with_cap(Some(cap)))
}

/// Equilibrium-centred system `N_0 + L zeta + P_breve + P_tilde + P_hat`.
#[derive(Clone, Debug)]
pub struct LinearizedModel {
    pub params: TwoLayerParams,
    pub equilibrium: Equilibrium,
    pub block: LinearBlock,
    /// `N_0 = (0, omega)`.
    pub n0: Frequencies,
    pub linear: TFVectorField,
    pub breve: TFVectorField,
    pub tilde: TFVectorField,
    pub hat: TFVectorField,
    /// `P_0 = L zeta + P_breve + P_tilde + P_hat`.
    pub p0: TFVectorField,
    pub cap: u32,
}

pub fn build_linearized_field(
    params: &TwoLayerParams,
    perts: &PerturbationSet,
    cap: u32,
) -> Result<LinearizedModel, TwoLayerError> {
    params.validate()?;
    perts.validate()?;
    let eq = equilibrium(params)?;
    let block = linear_block(params, &eq);
    let (m, n) = (SLOW_DIM, ANGLE_DIM);
    let mut lmat = DMatrix::from_element(m, m, re(0.0));
    for i in 0..m {
        for j in 0..m {
            lmat[(i, j)] = re(block.l[(i, j)]);
        }
    }
    let linear = TFVectorField::linear(m, n, &lmat);

    let mut breve = TFVectorField::zero(m, n);
    let mut pg = TFComponent::zero(m, n);
    for (p, c) in sin2_series(0.0, cap).into_iter().enumerate().skip(2) {
        if c != 0.0 {
            pg.add_term(power_term(0, p as u32), re(-params.c1 * c));
        }
    }
    let mut pu = TFComponent::zero(m, n);
    let phase = 2.0 * eq.eta0;
    let residual = params.ups_fric * params.v0 - params.c2 * phase.sin();
    if residual != 0.0 {
        pu.add_term(MultiIndex::zero(m, n), re(residual));
    }
    for (p, c) in sin2_series(phase, cap).into_iter().enumerate().skip(2) {
        if c != 0.0 {
            pu.add_term(power_term(IDX_ETA, p as u32), re(-params.c2 * c));
        }
    }
    breve.set_component(IDX_PGAMMA, pg);
    breve.set_component(IDX_PETA, pu);

    let breve = breve.with_cap(Some(cap));
    let tilde = perts.tilde.clone().with_cap(Some(cap));
    let hat = perts.hat.clone().with_cap(Some(cap));
    let p0 = linear.add(&breve).add(&tilde).add(&hat).with_cap(Some(cap));
    Ok(LinearizedModel {
        params: params.clone(),
        equilibrium: eq,
        block,
        n0: Frequencies::new(vec![re(0.0); m], vec![params.omega]),
        linear,
        breve,
        tilde,
        hat,
        p0,
        cap,
    })
}

impl LinearizedModel {
    /// The whole field `N_0 + P_0`.
    pub fn field(&self) -> TFVectorField {
        self.n0.field().with_cap(Some(self.cap)).add(&self.p0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_series_matches_sin() {
        let c = 0.3;
        let coeffs = sin2_series(c, 25);
        let x: f64 = 0.2;
        let v: f64 = coeffs.iter().enumerate().map(|(p, a)| a * x.powi(p as i32)).sum();
        assert!((v - (2.0 * x + c).sin()).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = TwoLayerParams {
            v0: 3.0,
            ..Default::default()
        };
        let full = build_full_field(&p, &PerturbationSet::zero(), 21).unwrap();
        let eq = equilibrium(&p).unwrap();
        let x = [re(0.0), re(0.0), re(eq.eta0), re(0.0)];
        let v = full.eval(&x, &[re(0.4)]);
        for (h, x) in v.iter().take(4).enumerate() {
            assert!(x.norm() < 1e-14, "{h}: {x}");
        }
        assert_eq!(v[4], re(p.omega));
    }

    #[test]
    fn linearized_matches_full_after_shift() {
        let p = TwoLayerParams {
            v0: 2.0,
            ..Default::default()
        };
        let eq = equilibrium(&p).unwrap();
        let full = build_full_field(&p, &PerturbationSet::zero(), 25).unwrap();
        let lin = build_linearized_field(&p, &PerturbationSet::zero(), 25).unwrap().field();
        let z = [re(0.01), re(-0.02), re(0.015), re(0.005)];
        let x = [z[0], z[1], z[2] + eq.eta0, z[3]];
        let a = full.eval(&x, &[re(0.0)]);
        let b = lin.eval(&z, &[re(0.0)]);
        for h in 0..5 {
            assert!((a[h] - b[h]).norm() < 1e-13, "{h}: {} vs {}", a[h], b[h]);
        }
    }
}
