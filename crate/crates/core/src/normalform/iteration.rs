use std::f64::consts::E;

use num_complex::Complex64;

use super::frequencies::{check_nonresonant, Frequencies, NonresonanceCertificate};
use super::homological::solve_homological;
use super::ledger::Ledger;
use super::lie::sample_close_to_identity;
use super::NormalFormError;
use crate::tfseries::{tail_decay_rate, Domain, DomainWeights, Lattice, TFVectorField};

/// Sample count and seed used to estimate `|phi - id|` by sampling.
pub const CLOSE_TO_ID_SAMPLES: usize = 8;
pub const CLOSE_TO_ID_SEED: u64 = 0x5eed_0001;
const CHAIN_MAX_TERMS: usize = 60;
const CHAIN_REL_TOL: f64 = 1e-14;

/// `C_* = 48 e / log 12`, the smallest constant for which every constant
/// requirement of the iterated scheme (`C >= 8`, `C >= 4 sqrt 3`, `C >= 48`
/// with `C = C_* log 12 / e`) holds.
pub fn default_c_star() -> f64 {
    48.0 * E / 12f64.ln()
}

/// Generator of one normalizing step.
#[derive(Clone, Debug)]
pub struct GeneratorStep {
    pub y: TFVectorField,
    /// `e [[Y]]^w_u`.
    pub q: f64,
    pub domain_before: DomainWeights,
    pub domain_after: DomainWeights,
}

/// Output of [`iteration_step`]: `X_+ = N + G_+ + P_+` on `u - 2w`.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub g_plus: TFVectorField,
    pub p_plus: TFVectorField,
    /// `Pi_Lambda P^{<2K}`, the part absorbed into `G_+`.
    pub p_bar: TFVectorField,
    pub generator: GeneratorStep,
    pub ledger: Ledger,
    pub tau: f64,
    /// `[[P]]^w_u`.
    pub p_norm: f64,
    /// Measured `[[P_+]]^w_{u-2w}` including the Lie-series tail estimate.
    pub p_plus_norm: f64,
    /// Analytic bound on the neglected part of the Lie series.
    pub lie_tail: f64,
    /// `[[ [Y, G] ]]^w_{u-w}`.
    pub bracket_yg: f64,
    /// Sampled `|phi_+ - id|^w_{u-2w}`.
    pub close_to_id: f64,
}

/// Result of the iterated normalization.
#[derive(Clone, Debug)]
pub struct NormalFormOutcome {
    pub n: Frequencies,
    pub g_star: TFVectorField,
    pub p_star: TFVectorField,
    pub generators: Vec<GeneratorStep>,
    pub ledger: Ledger,
    pub close_to_id: f64,
    pub certificate: NonresonanceCertificate,
    pub iterations: usize,
    pub sigma_bar: f64,
    pub tau: f64,
    pub early_exit: bool,
    /// Domain `u - 4w` on which `G_*`, `P_*` are measured.
    pub final_domain: Domain,
    pub p_norm: f64,
    pub p_star_norm: f64,
    pub truncated: bool,
}

impl NormalFormOutcome {
    pub fn certified(&self) -> bool {
        self.ledger.all_pass()
    }
}

fn weights(d: &Domain, w: &Domain, m: usize, n: usize) -> DomainWeights {
    DomainWeights::new(*d, w.as_weights(m, n)).expect("positive domain")
}

/// One normalizing step: removes the non-lattice part of `P` below order `2K`
/// by the Lie series of the solution of the homological equation.
#[allow(clippy::too_many_arguments)]
pub fn iteration_step(
    freq: &Frequencies,
    g: &TFVectorField,
    p: &TFVectorField,
    u: &Domain,
    w: &Domain,
    lattice: &Lattice,
    k: u32,
    gamma: f64,
) -> Result<StepOutcome, NormalFormError> {
    if k == 0 {
        return Err(NormalFormError::PreconditionViolated("K must be at least 1".into()));
    }
    if !(w.lt(&u.scaled(0.5))) {
        return Err(NormalFormError::PreconditionViolated(format!(
            "shrink (rho, sigma) = ({}, {}) must be below half the domain ({}, {})",
            w.eps, w.s, u.eps, u.s
        )));
    }
    check_nonresonant(freq, gamma, lattice, 2 * k)?;
    step_core(freq, g, p, u, w, lattice, k, gamma)
}

#[allow(clippy::too_many_arguments)]
fn step_core(
    freq: &Frequencies,
    g: &TFVectorField,
    p: &TFVectorField,
    u: &Domain,
    w: &Domain,
    lattice: &Lattice,
    k: u32,
    gamma: f64,
) -> Result<StepOutcome, NormalFormError> {
    let (m, n) = (p.m(), p.n());
    let u_w = u.shrink(w)?;
    let u_2w = u_w.shrink(w)?;
    let dw_u = weights(u, w, m, n);
    let dw_uw = weights(&u_w, w, m, n);
    let dw_u2w = weights(&u_2w, w, m, n);
    let rates = tail_decay_rate(u, w)?;

    let pn = p.weighted_norm(&dw_u);
    let small = E * pn / gamma;
    if !(small < 1.0) {
        return Err(NormalFormError::SmallnessViolated {
            condition: "one-step smallness e [[P]]/gamma < 1".into(),
            value: small,
        });
    }
    let mut ledger = Ledger::new();
    ledger.push_strict(0, "smallness e[[P]]/gamma < 1", 1.0, small);

    let (low, high) = p.ultraviolet_tail(k);
    let p_bar = low.project_lattice(lattice);
    let p_tilde = low.sub(&p_bar);
    let y = solve_homological(freq, &p_tilde.scale_re(-1.0), lattice, Some(2 * k - 1), gamma)?;
    let yn = y.weighted_norm(&dw_u);
    ledger.push(0, "generator [[Y]] <= [[P]]/gamma", pn / gamma, yn);
    let q = E * yn;
    ledger.push_strict(0, "lie contraction q = e[[Y]] < 1", 1.0, q);

    // P_+ = P^{>=2K} + sum_{k>=1} L_Y^k [ (G + P)/k! - P~/(k+1)! ]
    let gp = g.add(p);
    let scale = gp.weighted_norm(&dw_uw) + p_tilde.weighted_norm(&dw_uw);
    let target = CHAIN_REL_TOL * pn.max(f64::MIN_POSITIVE);
    let mut a = gp.clone();
    let mut b = p_tilde.clone();
    let mut p_plus = high.clone();
    let mut fact = 1.0;
    let mut lie_tail = 0.0;
    if !y.is_zero() {
        let mut terms = 0;
        loop {
            terms += 1;
            fact *= terms as f64;
            a = y.lie_bracket(&a);
            b = y.lie_bracket(&b);
            let term = a.scale_re(1.0 / fact).sub(&b.scale_re(1.0 / (fact * (terms + 1) as f64)));
            p_plus = p_plus.add(&term);
            if a.is_zero() && b.is_zero() {
                break;
            }
            let tail = q.powi(terms as i32 + 1) / (1.0 - q) * scale;
            if tail <= target || terms >= CHAIN_MAX_TERMS {
                lie_tail = tail;
                break;
            }
        }
    }
    let g_plus = g.add(&p_bar);

    let bracket_yg = y.lie_bracket(g).weighted_norm(&dw_uw);
    let claimed = (small * p.weighted_norm(&dw_uw) + bracket_yg + (-(k as f64) * rates.tau).exp() * pn) / (1.0 - small);
    let p_plus_norm = p_plus.weighted_norm(&dw_u2w) + lie_tail;
    ledger.push(0, "remainder [[P+]] <= one-step bound", claimed, p_plus_norm);

    let close_to_id = if y.is_zero() {
        0.0
    } else {
        sample_close_to_identity(&[&y], &u_2w, &dw_u2w.weights, CLOSE_TO_ID_SAMPLES, CLOSE_TO_ID_SEED)
    };
    ledger.push(0, "close-to-identity |phi+ - id| <= [[P]]/gamma", pn / gamma, close_to_id);

    Ok(StepOutcome {
        g_plus,
        p_plus,
        p_bar,
        generator: GeneratorStep {
            y,
            q,
            domain_before: dw_u,
            domain_after: dw_u2w,
        },
        ledger,
        tau: rates.tau,
        p_norm: pn,
        p_plus_norm,
        lie_tail,
        bracket_yg,
        close_to_id,
    })
}

/// Iterated normalization of `N + P` on `u` with shrink `w < u/4`.
#[allow(clippy::too_many_arguments)]
pub fn normalize(
    freq: &Frequencies,
    p: &TFVectorField,
    u: &Domain,
    w: &Domain,
    lattice: &Lattice,
    k: u32,
    gamma: f64,
    c_star: f64,
) -> Result<NormalFormOutcome, NormalFormError> {
    let (m, n) = (p.m(), p.n());
    if !(w.lt(&u.scaled(0.25))) {
        return Err(NormalFormError::PreconditionViolated(format!(
            "shrink (rho, sigma) = ({}, {}) must be below a quarter of the domain ({}, {})",
            w.eps, w.s, u.eps, u.s
        )));
    }
    if k == 0 {
        return Err(NormalFormError::PreconditionViolated("K must be at least 1".into()));
    }
    let rates = tail_decay_rate(u, w)?;
    let sigma_bar = rates.sigma_bar;
    let k_sigma = k as f64 * sigma_bar;
    let log12 = 12f64.ln();
    if k_sigma < log12 {
        return Err(NormalFormError::KSigmaTooSmall { k_sigma });
    }
    let dw_u = weights(u, w, m, n);
    let pn = p.weighted_norm(&dw_u);
    let smallness = c_star * k_sigma * pn / gamma;
    if !(smallness < 1.0) {
        return Err(NormalFormError::SmallnessViolated {
            condition: "iterated smallness C_* K sigma_bar [[P]]/gamma < 1".into(),
            value: smallness,
        });
    }
    let certificate = check_nonresonant(freq, gamma, lattice, 2 * k)?;

    let mut ledger = Ledger::new();
    ledger.push(0, "K sigma_bar >= log 12", k_sigma, log12);
    ledger.push_strict(0, "C_* K sigma_bar [[P]]/gamma < 1", 1.0, smallness);
    let c = c_star * log12 / E;
    ledger.push(0, "C_* log 12 >= e", c_star * log12, E);
    ledger.push(0, "constant C >= 8", c, 8.0);
    ledger.push(0, "constant C >= 4 sqrt 3", c, 4.0 * 3f64.sqrt());
    ledger.push(0, "constant C >= 48", c, 48.0);

    let u1 = u.shrink(&w.scaled(2.0))?;
    let final_domain = u.shrink(&w.scaled(4.0))?;
    let zero = TFVectorField::zero(m, n).with_cap(p.cap());
    let step0 = step_core(freq, &zero, p, u, w, lattice, k, gamma).map_err(|e| e.at_step(0))?;
    ledger.extend_with_step(&step0.ledger, 0);
    let p1n = step0.p_plus_norm;
    let exp_tau = (-(k as f64) * rates.tau).exp();
    ledger.push(
        0,
        "[[P1]] <= 2[[P0]](e[[P0]]/gamma + e^{-K tau})",
        2.0 * pn * (E * pn / gamma + exp_tau),
        p1n,
    );

    let mut generators = vec![step0.generator.clone()];
    let mut truncated = p.truncated();
    let mut g = step0.g_plus.clone();
    let p_bar0 = step0.p_bar.clone();
    let mut p_cur = step0.p_plus.clone();
    let mut tail_acc = step0.lie_tail;
    let early_exit = pn / gamma <= exp_tau;
    let mut iterations = 0;

    if early_exit {
        ledger.push(0, "early exit [[P1]] <= 4 e^{-K tau}[[P0]]", 4.0 * exp_tau * pn, p1n);
    } else {
        let pp = (k_sigma / log12).floor().max(1.0) as usize;
        iterations = pp;
        let pf = pp as f64;
        let w_p = w.scaled(1.0 / pf);
        ledger.push(0, "[[P1]] <= 4e[[P0]]^2/gamma", 4.0 * E * pn * pn / gamma, p1n);
        ledger.push(0, "[[P1]] <= [[P0]]/2", pn / 2.0, p1n);
        ledger.push_strict(0, "e[[P1]]^{w/p}/gamma < 1", 1.0, E * p1n * pf / gamma);
        let mut pbar_norms = vec![p_bar0.weighted_norm(&dw_u)];
        let mut p_norms = vec![pn, p1n];
        for j in 1..=pp {
            let uj = u1.shrink(&w.scaled(2.0 * (j - 1) as f64 / pf))?;
            let dw_j = weights(&uj, &w_p, m, n);
            let dw_jw = weights(&uj.shrink(&w_p)?, &w_p, m, n);
            let pj_wp = p_cur.weighted_norm(&dw_j);
            let step = step_core(freq, &g, &p_cur, &uj, &w_p, lattice, k, gamma).map_err(|e| e.at_step(j))?;
            ledger.extend_with_step(&step.ledger, j);
            let g_next = g.add(&step.p_bar);
            let bracket_all = step.generator.y.lie_bracket(&g_next).weighted_norm(&dw_jw);
            let tau_p = (w.s / pf).min(-(-(w.eps / (pf * u.eps))).ln_1p());
            ledger.push(j, "2e[[Pj]]^{w/p}/gamma <= 1/6", 1.0 / 6.0, 2.0 * E * pj_wp / gamma);
            ledger.push(j, "2e^{-K tau(p)} <= 1/6", 1.0 / 6.0, 2.0 * (-(k as f64) * tau_p).exp());
            ledger.push(j, "2[[ [Yj, sum Pbar_i] ]] <= [[Pj]]/6", pj_wp / 6.0, 2.0 * bracket_all);
            let uj1 = uj.shrink(&w_p.scaled(2.0))?;
            let next_w = step.p_plus.weighted_norm(&weights(&uj1, w, m, n)) + step.lie_tail;
            ledger.push(j, "halving [[P_{j+1}]] <= [[Pj]]/2", p_norms[j] / 2.0, next_w);
            ledger.push_strict(j, "e[[P_{j+1}]]^{w/p}/gamma < 1", 1.0, E * next_w * pf / gamma);
            pbar_norms.push(step.p_bar.weighted_norm(&weights(&uj, w, m, n)));
            p_norms.push(next_w);
            tail_acc += step.lie_tail;
            truncated |= step.p_plus.truncated() || step.generator.y.truncated();
            generators.push(step.generator.clone());
            g = g_next;
            p_cur = step.p_plus;
        }
    }

    let dw_f = weights(&final_domain, w, m, n);
    let p_star_norm = p_cur.weighted_norm(&dw_f) + tail_acc;
    ledger.push(
        usize::MAX,
        "[[P*]] <= e^{-K sigma_bar/4}[[P]]",
        (-k_sigma / 4.0).exp() * pn,
        p_star_norm,
    );
    ledger.push(
        usize::MAX,
        "[[G* - Pbar_0]] <= 8e[[P]]^2/gamma",
        8.0 * E * pn * pn / gamma,
        g.sub(&p_bar0).weighted_norm(&dw_f),
    );
    let gens: Vec<&TFVectorField> = generators.iter().map(|s| &s.y).collect();
    let close_to_id = sample_close_to_identity(&gens, &final_domain, &dw_f.weights, CLOSE_TO_ID_SAMPLES, CLOSE_TO_ID_SEED);
    ledger.push(usize::MAX, "|phi* - id| <= 2[[P]]/gamma", 2.0 * pn / gamma, close_to_id);
    let g_proj = g.project_lattice(lattice).project_order(2 * k - 1);
    ledger.push(
        usize::MAX,
        "G* = Pi_Lambda T_{2K-1} G*",
        0.0,
        g.sub(&g_proj).weighted_norm(&dw_f),
    );

    truncated |= g.truncated() || p_cur.truncated();
    Ok(NormalFormOutcome {
        n: freq.clone(),
        g_star: g,
        p_star: p_cur,
        generators,
        ledger,
        close_to_id,
        certificate,
        iterations,
        sigma_bar,
        tau: rates.tau,
        early_exit,
        final_domain,
        p_norm: pn,
        p_star_norm,
        truncated,
    })
}

/// Helper for tests and examples: the single-harmonic perturbation `mu e^{i phi}`.
pub fn single_harmonic(mu: f64) -> TFVectorField {
    use crate::tfseries::{MultiIndex, TFComponent};
    let mut p = TFVectorField::zero(0, 1);
    p.set_component(0, TFComponent::monomial(MultiIndex::new(&[], &[1]), Complex64::new(mu, 0.0)));
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_star_value() {
        let c = default_c_star();
        assert!((c - 52.508).abs() < 1e-3, "{c}");
        assert!((c * 12f64.ln() / E - 48.0).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_step() {
        let f = Frequencies::new(vec![], vec![1.0]);
        let z = TFVectorField::zero(0, 1);
        let out = iteration_step(&f, &z, &z, &Domain::new(1.0, 1.0), &Domain::new(0.1, 0.1), &Lattice::Zero, 3, 1.0)
            .unwrap();
        assert!(out.generator.y.is_zero());
        assert!(out.p_plus.is_zero());
        assert!(out.g_plus.is_zero());
        assert!(out.ledger.all_pass());
    }

    #[test]
    fn single_harmonic_step_bound() {
        let omega = 1.0;
        let f = Frequencies::new(vec![], vec![omega]);
        let p = single_harmonic(1e-3 * omega);
        let z = TFVectorField::zero(0, 1);
        let out = iteration_step(&f, &z, &p, &Domain::new(1.0, 1.0), &Domain::new(0.2, 0.2), &Lattice::Zero, 4, omega)
            .unwrap();
        assert!(out.ledger.all_pass(), "{}", out.ledger.to_table());
    }

    #[test]
    fn k_sigma_too_small() {
        let f = Frequencies::new(vec![], vec![1.0]);
        let p = single_harmonic(1e-3);
        let err = normalize(&f, &p, &Domain::new(1.0, 1.0), &Domain::new(0.1, 0.1), &Lattice::Zero, 10, 1.0, default_c_star())
            .unwrap_err();
        assert!(matches!(err, NormalFormError::KSigmaTooSmall { .. }));
    }
}
