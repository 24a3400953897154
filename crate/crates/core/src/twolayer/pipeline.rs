use num_complex::Complex64;

use super::budget::{compute_budget, BudgetConstants, Gamma1Rule};
use super::model::{build_linearized_field, LinearizedModel, PerturbationSet, SLOW_DIM};
use super::spectrum::{solve_spectrum, Spectrum};
use super::{TwoLayerError, TwoLayerParams};
use crate::normalform::{
    default_c_star, iteration_step, normalize, time_one_map, Frequencies, Ledger, NormalFormError, NormalFormOutcome,
    StepOutcome,
};
use crate::tfseries::{tail_decay_rate, Domain, DomainWeights, Lattice, MultiIndex, TFVectorField};

/// Relative pruning threshold applied after the linear change of variables.
pub const DEFAULT_PRUNE_REL: f64 = 1e-16;
const MAP_RK4_STEPS: usize = 64;

/// Inputs of [`main_pipeline`].
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub params: TwoLayerParams,
    pub perturbations: PerturbationSet,
    pub const_used: f64,
    pub eps_small: f64,
    pub order_cap: u32,
    pub gamma1_rule: Gamma1Rule,
    pub c_star: f64,
    pub prune_rel: f64,
    /// Averaging order; `None` uses the smallest `K_0` with `e^{-K_0 tau_0} <= mu_0/omega`.
    pub k0: Option<u32>,
    /// Normal-form order; `None` uses `ceil(gamma_1 / (2 C_* mu_1 sigma_bar))`.
    pub k1: Option<u32>,
}

impl PipelineConfig {
    pub fn new(params: TwoLayerParams, perturbations: PerturbationSet) -> Self {
        PipelineConfig {
            params,
            perturbations,
            const_used: 1.0,
            eps_small: 5e-3,
            order_cap: 5,
            gamma1_rule: Gamma1Rule::default(),
            c_star: default_c_star(),
            prune_rel: DEFAULT_PRUNE_REL,
            k0: None,
            k1: None,
        }
    }
}

/// Per-stage summary.
#[derive(Clone, Debug, PartialEq)]
pub struct StageSummary {
    pub name: String,
    pub domain: Domain,
    pub shrink: Domain,
    pub k: u32,
    pub gamma: f64,
    pub p_in: f64,
    pub p_out: f64,
}

/// Output of the four-step pipeline: `X_3 = N_hat + P_3` on `final_domain`.
#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub model: LinearizedModel,
    pub budget: BudgetConstants,
    pub spectrum: Spectrum,
    pub stages: Vec<StageSummary>,
    /// Certified inequalities; the pipeline is certified when all pass.
    pub ledger: Ledger,
    /// Reported but not certified comparisons.
    pub diagnostics: Ledger,
    pub averaging: StepOutcome,
    pub normal_form: NormalFormOutcome,
    pub lambda_tilde: Vec<Complex64>,
    pub n_hat: Frequencies,
    pub p3: TFVectorField,
    pub final_domain: Domain,
    pub k0: u32,
    pub k1: u32,
    pub truncated: bool,
}

impl PipelineReport {
    pub fn certified(&self) -> bool {
        self.ledger.all_pass()
    }

    /// `N_hat + P_3`.
    pub fn final_field(&self) -> TFVectorField {
        self.n_hat.field().with_cap(self.p3.cap()).add(&self.p3)
    }

    /// Maps a point of the final chart to the equilibrium-centred chart:
    /// `zeta_0 = Phi^{Y_0}(b Phi_3(zeta_3))`.
    pub fn final_to_centred(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut z = x.to_vec();
        for g in self.normal_form.generators.iter().rev() {
            if !g.y.is_zero() {
                z = time_one_map(&g.y, &z, MAP_RK4_STEPS);
            }
        }
        let b = &self.spectrum.b;
        let mut lin: Vec<Complex64> = (0..SLOW_DIM)
            .map(|i| (0..SLOW_DIM).map(|j| b[(i, j)] * z[j]).sum())
            .collect();
        lin.extend_from_slice(&z[SLOW_DIM..]);
        let y0 = &self.averaging.generator.y;
        if y0.is_zero() {
            lin
        } else {
            time_one_map(y0, &lin, MAP_RK4_STEPS)
        }
    }
}

fn nf_err(stage: &str) -> impl Fn(NormalFormError) -> TwoLayerError + '_ {
    move |source| TwoLayerError::NormalForm {
        stage: stage.to_string(),
        source,
    }
}

fn append_prefixed(dst: &mut Ledger, src: &Ledger, stage: usize, prefix: &str) {
    for r in src.rows() {
        let label = format!("{prefix}: {}", r.label);
        if r.strict {
            dst.push_strict(stage, label, r.claimed, r.measured);
        } else {
            dst.push(stage, label, r.claimed, r.measured);
        }
    }
}

fn weights(u: &Domain, w: &Domain) -> DomainWeights {
    DomainWeights::new(*u, w.as_weights(SLOW_DIM, 1)).expect("positive domain")
}

/// Averaging, diagonalization, iterated normal form and frequency update.
pub fn main_pipeline(config: &PipelineConfig) -> Result<PipelineReport, TwoLayerError> {
    let p = &config.params;
    let cap = config.order_cap;
    let model = build_linearized_field(p, &config.perturbations, cap)?;
    let budget = compute_budget(p, config.const_used, config.eps_small, config.gamma1_rule)?;
    let spectrum = solve_spectrum(p)?;
    let mut ledger = Ledger::new();
    let mut diagnostics = Ledger::new();
    let mut stages = Vec::new();

    diagnostics.push(0, "mu_0 / omega <= eps", config.eps_small, budget.mu0 / p.omega);
    diagnostics.push(0, "mu_1 / gamma_1 <= eps", config.eps_small, budget.mu1 / budget.gamma1);

    // Step 1: average over the fast angle.
    let u0 = Domain::new(p.eps0, p.s0);
    let w0 = u0.scaled(0.25);
    let rates0 = tail_decay_rate(&u0, &w0)?;
    let k0 = config
        .k0
        .unwrap_or_else(|| ((p.omega / budget.mu0).ln() / rates0.tau).ceil().max(1.0) as u32);
    let g0 = model.p0.angle_average();
    let osc0 = model.p0.sub(&g0);
    let dw0 = weights(&u0, &w0);
    diagnostics.push(1, "[[P_0]] <= mu_0", budget.mu0, model.p0.weighted_norm(&dw0));
    let averaging = iteration_step(&model.n0, &g0, &osc0, &u0, &w0, &Lattice::AngleAverage, k0, p.omega)
        .map_err(nf_err("averaging"))?;
    append_prefixed(&mut ledger, &averaging.ledger, 1, "averaging");
    diagnostics.push(
        1,
        "[[P~_1]] <= const mu_0^2/omega",
        config.const_used * budget.mu0 * budget.mu0 / p.omega,
        averaging.p_plus_norm,
    );
    let u1 = u0.shrink(&w0.scaled(2.0))?;
    stages.push(StageSummary {
        name: "averaging".into(),
        domain: u0,
        shrink: w0,
        k: k0,
        gamma: p.omega,
        p_in: averaging.p_norm,
        p_out: averaging.p_plus_norm,
    });

    // Step 2: diagonalize the linear part, zeta_1 = b zeta_2.
    let g1 = averaging.g_plus.clone();
    let slow1 = g1.sub(&model.linear).add(&averaging.p_plus);
    let mut p2 = slow1.conjugate_linear(&spectrum.b, &spectrum.b_inv).with_cap(Some(cap));
    let b_norm = spectrum.b_norm();
    let u2 = Domain::new(u1.eps / b_norm, u1.s);
    let w2 = u2.scaled(0.125);
    p2.prune(&u2, config.prune_rel);
    let n2 = Frequencies::new(spectrum.eigenvalues.to_vec(), vec![p.omega]);
    let p2n = p2.weighted_norm(&weights(&u2, &w2));
    ledger.push(2, "diagonalize: [[P_2]] <= mu_1", budget.mu1, p2n);
    if !(p2n <= budget.mu1) {
        return Err(TwoLayerError::BudgetViolated {
            stage: "diagonalize".into(),
            condition: "smallness flag [[P_2]] <= mu_1".into(),
            value: p2n,
            bound: budget.mu1,
        });
    }
    stages.push(StageSummary {
        name: "diagonalize".into(),
        domain: u2,
        shrink: w2,
        k: 0,
        gamma: 0.0,
        p_in: p2n,
        p_out: p2n,
    });

    // Step 3: iterated normal form with Lambda = {0}.
    let rates2 = tail_decay_rate(&u2, &w2)?;
    let k1 = config.k1.unwrap_or_else(|| {
        (budget.gamma1 / (2.0 * config.c_star * budget.mu1 * rates2.sigma_bar))
            .ceil()
            .max(1.0) as u32
    });
    let normal_form = normalize(&n2, &p2, &u2, &w2, &Lattice::Zero, k1, budget.gamma1, config.c_star)
        .map_err(nf_err("normal form"))?;
    append_prefixed(&mut ledger, &normal_form.ledger, 3, "normal form");
    stages.push(StageSummary {
        name: "normal form".into(),
        domain: u2,
        shrink: w2,
        k: k1,
        gamma: budget.gamma1,
        p_in: normal_form.p_norm,
        p_out: normal_form.p_star_norm,
    });

    // Step 4: absorb the diagonal part of G_* into the frequencies.
    let (m, n) = (SLOW_DIM, 1);
    let g_star = &normal_form.g_star;
    let lambda_tilde: Vec<Complex64> = (0..m)
        .map(|h| g_star.component(h).get(&MultiIndex::slow_unit(m, n, h)))
        .collect();
    let omega_tilde = g_star.component(m).get(&MultiIndex::zero(m, n));
    let lambda_hat: Vec<Complex64> = spectrum.eigenvalues.iter().zip(&lambda_tilde).map(|(a, b)| a + b).collect();
    let n_hat = Frequencies::new(lambda_hat.clone(), vec![p.omega + omega_tilde.re]);
    let diag = n_hat.field().sub(&n2.field());
    let p3 = g_star.sub(&diag).add(&normal_form.p_star);
    let final_domain = normal_form.final_domain;
    for (j, lt) in lambda_tilde.iter().enumerate() {
        ledger.push(4, format!("final: |lambda~_{}| <= mu_1/2", j + 1), budget.mu1 / 2.0, lt.norm());
    }
    for (j, lh) in lambda_hat.iter().enumerate() {
        ledger.push_strict(4, format!("final: Re lambda^_{} < 0", j + 1), 0.0, lh.re);
    }
    let dw_f = weights(&final_domain, &w2);
    let tail = normal_form.p_star_norm - normal_form.p_star.weighted_norm(&dw_f);
    let p3n = p3.weighted_norm(&dw_f) + tail;
    let exp_bound = budget.mu1 * (-budget.gamma1 / (8.0 * config.c_star * budget.mu1)).exp();
    ledger.push(4, "final: [[P_3]] <= mu_1 exp(-gamma_1/(8 C_* mu_1))", exp_bound, p3n);
    diagnostics.push(4, "final: eps_* <= final slow radius", final_domain.eps, budget.eps_star);
    diagnostics.push(4, "final: omega correction", 0.0, omega_tilde.norm());
    stages.push(StageSummary {
        name: "frequency update".into(),
        domain: final_domain,
        shrink: w2,
        k: k1,
        gamma: budget.gamma1,
        p_in: normal_form.p_star_norm,
        p_out: p3n,
    });

    let truncated = model.p0.truncated() || averaging.p_plus.truncated() || normal_form.truncated;
    Ok(PipelineReport {
        config: config.clone(),
        model,
        budget,
        spectrum,
        stages,
        ledger,
        diagnostics,
        averaging,
        normal_form,
        lambda_tilde,
        n_hat,
        p3,
        final_domain,
        k0,
        k1,
        truncated,
    })
}

fn cos_term(alpha: &[u32], k: i32, amp: f64) -> Vec<(MultiIndex, Complex64)> {
    vec![
        (MultiIndex::new(alpha, &[k]), Complex64::new(amp / 2.0, 0.0)),
        (MultiIndex::new(alpha, &[-k]), Complex64::new(amp / 2.0, 0.0)),
    ]
}

fn sin_term(alpha: &[u32], k: i32, amp: f64) -> Vec<(MultiIndex, Complex64)> {
    vec![
        (MultiIndex::new(alpha, &[k]), Complex64::new(0.0, -amp / 2.0)),
        (MultiIndex::new(alpha, &[-k]), Complex64::new(0.0, amp / 2.0)),
    ]
}

/// Perturbations of the reference instance, multiplied by `scale`:
/// `P~ = (0, a g cos l + f sin 2l, 0, a psi cos 2l + f cos l, 0)`,
/// `P^ = (0, -a p_g, 0, a g^2, 0)` with `a = 2e-8`, `f = 2e-11`.
pub fn reference_perturbations(scale: f64) -> PerturbationSet {
    use crate::tfseries::TFComponent;
    let (m, n) = (SLOW_DIM, 1);
    let a = 2e-8 * scale;
    let f = 2e-11 * scale;
    let mut set = PerturbationSet::zero();
    let mut c1 = cos_term(&[1, 0, 0, 0], 1, a);
    c1.extend(sin_term(&[0, 0, 0, 0], 2, f));
    let mut c3 = cos_term(&[0, 0, 1, 0], 2, a);
    c3.extend(cos_term(&[0, 0, 0, 0], 1, f));
    set.tilde.set_component(1, TFComponent::from_terms(m, n, c1).expect("valid terms"));
    set.tilde.set_component(3, TFComponent::from_terms(m, n, c3).expect("valid terms"));
    let h1 = vec![(MultiIndex::new(&[0, 1, 0, 0], &[0]), Complex64::new(-a, 0.0))];
    let h3 = vec![(MultiIndex::new(&[2, 0, 0, 0], &[0]), Complex64::new(a, 0.0))];
    set.hat.set_component(1, TFComponent::from_terms(m, n, h1).expect("valid terms"));
    set.hat.set_component(3, TFComponent::from_terms(m, n, h3).expect("valid terms"));
    set
}

/// The reference instance: default parameters with `a = 1000`, `min{C, C'} = 10`,
/// `const = 0.01`, `eps = 5e-3`, order cap 5.
pub fn reference_config() -> PipelineConfig {
    let params = TwoLayerParams {
        a_semi: 1000.0,
        c_min: 10.0,
        ..Default::default()
    };
    PipelineConfig {
        const_used: 0.01,
        ..PipelineConfig::new(params, reference_perturbations(1.0))
    }
}
