use std::fmt;
use std::str::FromStr;

use super::spectrum::solve_spectrum;
use super::{TwoLayerError, TwoLayerParams};

/// Which lower bound on `|Re lambda|` feeds the nonresonance constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Gamma1Rule {
    /// `gamma_1 = min{ups/3, omega}`; not implied by the spectral window at
    /// every admissible parameter set.
    Stated,
    /// `gamma_1 = min{ups/6, omega}`, implied by the Rayleigh window.
    #[default]
    Corrected,
}

impl fmt::Display for Gamma1Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gamma1Rule::Stated => "stated",
            Gamma1Rule::Corrected => "corrected",
        })
    }
}

impl FromStr for Gamma1Rule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stated" => Ok(Gamma1Rule::Stated),
            "corrected" => Ok(Gamma1Rule::Corrected),
            _ => Err(format!("unknown gamma1 rule '{s}' (expected stated|corrected)")),
        }
    }
}

/// Size constants of the perturbative scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetConstants {
    pub const_used: f64,
    pub eps_small: f64,
    pub mu0: f64,
    pub mu1: f64,
    /// `min{ups/3, omega}`.
    pub gamma1_stated: f64,
    /// The value selected by `rule`.
    pub gamma1: f64,
    pub rule: Gamma1Rule,
    /// `eps_0 / (4 |b|_inf)`, radius of the final slow domain.
    pub eps_star: f64,
    /// `const^{-1} (eps / (eps_* mu_1)) e^{gamma_1/mu_1}`.
    pub t_horizon: f64,
    pub ln_t_horizon: f64,
    /// `mu_0 / omega <= eps`.
    pub mu0_small: bool,
    /// `mu_1 / gamma_1 <= eps`.
    pub mu1_small: bool,
}

impl BudgetConstants {
    pub fn smallness_ok(&self) -> bool {
        self.mu0_small && self.mu1_small
    }
}

pub fn compute_budget(
    params: &TwoLayerParams,
    const_used: f64,
    eps_small: f64,
    rule: Gamma1Rule,
) -> Result<BudgetConstants, TwoLayerError> {
    params.validate()?;
    if !(const_used > 0.0 && const_used.is_finite()) {
        return Err(TwoLayerError::InvalidParams {
            condition: "positive budget constant".into(),
            detail: format!("const = {const_used}"),
        });
    }
    if !(eps_small > 0.0 && eps_small.is_finite()) {
        return Err(TwoLayerError::InvalidParams {
            condition: "positive smallness parameter".into(),
            detail: format!("eps = {eps_small}"),
        });
    }
    let p = params;
    let e0 = p.eps0;
    let tidal = p.r_over_a * p.r_over_a / (p.a_semi * e0 * p.c_min);
    let mu0 = const_used
        * [p.c1, p.c2, e0, p.eps_fric * e0, p.delta() * e0, p.v0.abs() * p.ups_fric, tidal]
            .into_iter()
            .fold(0.0, f64::max);
    let mu1 = const_used
        * [mu0 * mu0 / p.omega, mu0 * p.r_over_a, p.c1 * e0.powi(3), p.c2 * e0 * e0]
            .into_iter()
            .fold(0.0, f64::max);
    let gamma1_stated = (p.ups_fric / 3.0).min(p.omega);
    let gamma1 = match rule {
        Gamma1Rule::Stated => gamma1_stated,
        Gamma1Rule::Corrected => (p.ups_fric / 6.0).min(p.omega),
    };
    let spectrum = solve_spectrum(p)?;
    let eps_star = e0 / (4.0 * spectrum.b_norm());
    let ln_t_horizon = (eps_small / (eps_star * mu1 * const_used)).ln() + gamma1 / mu1;
    Ok(BudgetConstants {
        const_used,
        eps_small,
        mu0,
        mu1,
        gamma1_stated,
        gamma1,
        rule,
        eps_star,
        t_horizon: ln_t_horizon.exp(),
        ln_t_horizon,
        mu0_small: mu0 / p.omega <= eps_small,
        mu1_small: mu1 / gamma1 <= eps_small,
    })
}
