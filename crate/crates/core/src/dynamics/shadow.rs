use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::CompiledField;
use super::integrate::{integrate, IntegratorOptions, Trajectory};
use super::DynamicsError;
use crate::twolayer::{PipelineReport, TwoLayerError};

/// `x(t) = sum_j b_j c_j e^{lambda_j t}` with `b c = x(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DampedReference {
    pub b: DMatrix<Complex64>,
    pub coefficients: Vec<Complex64>,
    pub exponents: Vec<Complex64>,
}

impl DampedReference {
    pub fn eval(&self, t: f64) -> Vec<Complex64> {
        let e: Vec<Complex64> = self
            .coefficients
            .iter()
            .zip(&self.exponents)
            .map(|(c, l)| c * (l * t).exp())
            .collect();
        (0..self.b.nrows())
            .map(|i| (0..self.b.ncols()).map(|j| self.b[(i, j)] * e[j]).sum())
            .collect()
    }
}

pub fn damped_reference(
    b: &DMatrix<Complex64>,
    exponents: &[Complex64],
    x0: &[Complex64],
) -> Result<DampedReference, DynamicsError> {
    let rhs = DVector::from_column_slice(x0);
    let c = b.clone().lu().solve(&rhs).ok_or(TwoLayerError::SingularEigenbasis)?;
    Ok(DampedReference {
        b: b.clone(),
        coefficients: c.iter().copied().collect(),
        exponents: exponents.to_vec(),
    })
}

/// Settings of [`shadowing_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowOptions {
    /// `|zeta_3(0)|_inf = x0_frac * eps_*`.
    pub x0_frac: f64,
    /// Real initial direction in `(gamma, p_gamma, psi, p_psi)`; `None` draws one.
    pub direction: Option<[f64; 4]>,
    /// Horizon cap; the experiment runs to `min(T, cap)`.
    pub cap_horizon: f64,
    pub n_out: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ShadowOptions {
    fn default() -> Self {
        ShadowOptions {
            x0_frac: 0.5,
            direction: None,
            cap_horizon: 1e3,
            n_out: 400,
            tol: 1e-10,
            seed: 1,
        }
    }
}

/// Deviations from the damped references in the final and original charts.
#[derive(Clone, Debug)]
pub struct ShadowReport {
    pub epsilon: f64,
    /// Formula-level horizon `T` (never integrated to when above the cap).
    pub t_horizon: f64,
    pub ln_t_horizon: f64,
    /// Horizon of the final-chart estimate, `(4 eps/(eps_3 mu_1)) e^{gamma_1/(8 C_* mu_1)}`.
    pub t_step4: f64,
    pub t_used: f64,
    pub eps_star: f64,
    pub max_deviation_zeta3: f64,
    pub max_deviation_gamma: f64,
    pub max_deviation_psi: f64,
    pub pass: bool,
    pub zeta3_0: Vec<Complex64>,
    pub chart3: Trajectory,
    pub original: Trajectory,
    pub reference: DampedReference,
    pub lambda_hat: Vec<Complex64>,
}

impl ShadowReport {
    /// `t, Re/Im zeta_3, deviation` with a header naming the chart.
    pub fn chart3_csv(&self) -> String {
        let mut out = String::from("# chart: final normal-form coordinates zeta_3\nt");
        for j in 1..=4 {
            let _ = write!(out, ",re_zeta{j},im_zeta{j}");
        }
        out.push_str(",l,deviation\n");
        for (t, x) in self.chart3.times.iter().zip(&self.chart3.states) {
            let _ = write!(out, "{t:.9e}");
            let mut dev: f64 = 0.0;
            for ((xj, z0), l) in x.iter().zip(&self.zeta3_0).zip(&self.lambda_hat).take(4) {
                let _ = write!(out, ",{:.12e},{:.12e}", xj.re, xj.im);
                dev = dev.max((xj - z0 * (l * *t).exp()).norm());
            }
            let _ = writeln!(out, ",{:.9e},{dev:.6e}", x[4].re);
        }
        out
    }

    /// `t, gamma, p_gamma, psi, p_psi, l, gamma_ref, psi_ref`.
    pub fn original_csv(&self) -> String {
        let mut out = String::from(
            "# chart: equilibrium-centred coordinates (gamma, p_gamma, psi, p_psi; l)\nt,gamma,p_gamma,psi,p_psi,l,gamma_ref,psi_ref\n",
        );
        for (t, x) in self.original.times.iter().zip(&self.original.states) {
            let r = self.reference.eval(*t);
            let _ = writeln!(
                out,
                "{t:.9e},{:.12e},{:.12e},{:.12e},{:.12e},{:.9e},{:.12e},{:.12e}",
                x[0].re, x[1].re, x[2].re, x[3].re, x[4].re, r[0].re, r[2].re
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[shadowing]");
        let _ = writeln!(out, "epsilon = {:.6e}", self.epsilon);
        let _ = writeln!(out, "T_horizon = {:.6e}", self.t_horizon);
        let _ = writeln!(out, "ln_T_horizon = {:.6e}", self.ln_t_horizon);
        let _ = writeln!(out, "T_step4 = {:.6e}", self.t_step4);
        let _ = writeln!(out, "t_integrated = {:.6e}", self.t_used);
        let _ = writeln!(out, "eps_star = {:.6e}", self.eps_star);
        for (j, (z, l)) in self.zeta3_0.iter().zip(&self.lambda_hat).enumerate() {
            let _ = writeln!(out, "zeta3_0[{}] = {:.12e} {:+.12e}i", j + 1, z.re, z.im);
            let _ = writeln!(out, "lambda_hat[{}] = {:.12e} {:+.12e}i", j + 1, l.re, l.im);
        }
        let _ = writeln!(out, "max_deviation_zeta3 = {:.6e}", self.max_deviation_zeta3);
        let _ = writeln!(out, "max_deviation_gamma = {:.6e}", self.max_deviation_gamma);
        let _ = writeln!(out, "max_deviation_psi = {:.6e}", self.max_deviation_psi);
        let _ = writeln!(out, "steps_chart3 = {} accepted, {} rejected", self.chart3.accepted, self.chart3.rejected);
        let _ = writeln!(
            out,
            "steps_original = {} accepted, {} rejected",
            self.original.accepted, self.original.rejected
        );
        let _ = writeln!(out, "pass = {}", self.pass);
        out
    }
}

/// Companion plotting script for the CSV files written by `shadow`.
pub const PLOT_SCRIPT: &str = r##"# Plot the shadowing experiment: python3 plot_shadow.py
import csv
import matplotlib.pyplot as plt

def load(path):
    with open(path) as f:
        rows = [r for r in f if not r.startswith("#")]
    reader = csv.DictReader(rows)
    return [{k: float(v) for k, v in r.items()} for r in reader]

final = load("shadow_chart3.csv")
orig = load("shadow_original.csv")
fig, ax = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
ax[0].semilogy([r["t"] for r in final], [max(r["deviation"], 1e-300) for r in final])
ax[0].set_ylabel("|zeta_3(t) - zeta_3(0) e^(lambda t)|")
ax[1].plot([r["t"] for r in orig], [r["gamma"] for r in orig], label="gamma")
ax[1].plot([r["t"] for r in orig], [r["gamma_ref"] for r in orig], "--", label="gamma reference")
ax[1].legend()
ax[2].plot([r["t"] for r in orig], [r["psi"] for r in orig], label="psi")
ax[2].plot([r["t"] for r in orig], [r["psi_ref"] for r in orig], "--", label="psi reference")
ax[2].legend()
ax[2].set_xlabel("t")
fig.tight_layout()
fig.savefig("shadow.png", dpi=120)
"##;

/// Integrates the final normal form and the equilibrium-centred system from
/// corresponding initial points and measures the deviations from the damped
/// references over `[0, min(T, cap)]`.
pub fn shadowing_experiment(report: &PipelineReport, opts: &ShadowOptions) -> Result<ShadowReport, DynamicsError> {
    if !(opts.x0_frac > 0.0 && opts.x0_frac < 1.0) {
        return Err(DynamicsError::InvalidOption(format!(
            "initial radius fraction {} must lie in (0, 1)",
            opts.x0_frac
        )));
    }
    if !(opts.cap_horizon > 0.0 && opts.tol > 0.0 && opts.n_out > 0) {
        return Err(DynamicsError::InvalidOption("horizon cap, tolerance and output count must be positive".into()));
    }
    let budget = &report.budget;
    let spectrum = &report.spectrum;
    let dir = match opts.direction {
        Some(d) => d,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            [(); 4].map(|_| rng.gen_range(-1.0..1.0))
        }
    };
    let xr = DVector::from_iterator(4, dir.iter().map(|v| Complex64::new(*v, 0.0)));
    let z2 = &spectrum.b_inv * xr;
    let zmax = z2.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if zmax == 0.0 {
        return Err(DynamicsError::InvalidOption("initial direction must be nonzero".into()));
    }
    let radius = budget.eps_star.min(report.final_domain.eps);
    let scale = opts.x0_frac * radius / zmax;
    let mut zeta3_0: Vec<Complex64> = z2.iter().map(|z| z * scale).collect();
    // enforce the conjugate pairing (j, j + 2) exactly
    for j in 0..2 {
        zeta3_0[j + 2] = zeta3_0[j].conj();
    }
    let lambda_hat = report.n_hat.lambda.clone();

    let t_used = budget.t_horizon.min(opts.cap_horizon);
    let outputs: Vec<f64> = (1..opts.n_out).map(|i| t_used * i as f64 / opts.n_out as f64).collect();

    let mut x3 = zeta3_0.clone();
    x3.push(Complex64::new(0.0, 0.0));
    let f3 = CompiledField::new(&report.final_field());
    let opts3 = IntegratorOptions {
        rtol: opts.tol,
        atol: opts.tol * 1e-3 * radius,
        slow_radius: Some((4, report.final_domain.eps)),
        ..Default::default()
    };
    let chart3 = integrate(|_, s| f3.eval(s), &x3, 0.0, t_used, &outputs, &opts3)?;
    let mut dev3: f64 = 0.0;
    for (t, x) in chart3.times.iter().zip(&chart3.states) {
        for j in 0..4 {
            dev3 = dev3.max((x[j] - zeta3_0[j] * (lambda_hat[j] * *t).exp()).norm());
        }
    }

    let x0c: Vec<Complex64> = report
        .final_to_centred(&x3)
        .into_iter()
        .map(|z| Complex64::new(z.re, 0.0))
        .collect();
    let reference = damped_reference(&spectrum.b, &lambda_hat, &x0c[..4])?;
    let f0 = CompiledField::new(&report.model.field());
    let opts0 = IntegratorOptions {
        rtol: opts.tol,
        atol: opts.tol * 1e-3 * radius,
        slow_radius: Some((4, report.config.params.eps0)),
        ..Default::default()
    };
    let original = integrate(|_, s| f0.eval(s), &x0c, 0.0, t_used, &outputs, &opts0)?;
    let (mut dev_g, mut dev_p): (f64, f64) = (0.0, 0.0);
    for (t, x) in original.times.iter().zip(&original.states) {
        let r = reference.eval(*t);
        dev_g = dev_g.max((x[0] - r[0]).norm());
        dev_p = dev_p.max((x[2] - r[2]).norm());
    }

    let c_star = report.config.c_star;
    let t_step4 = 4.0 * budget.eps_small / (report.final_domain.eps * budget.mu1)
        * (budget.gamma1 / (8.0 * c_star * budget.mu1)).exp();
    let eps = budget.eps_small;
    Ok(ShadowReport {
        epsilon: eps,
        t_horizon: budget.t_horizon,
        ln_t_horizon: budget.ln_t_horizon,
        t_step4,
        t_used,
        eps_star: budget.eps_star,
        max_deviation_zeta3: dev3,
        max_deviation_gamma: dev_g,
        max_deviation_psi: dev_p,
        pass: dev3 <= eps && dev_g < eps && dev_p < eps,
        zeta3_0,
        chart3,
        original,
        reference,
        lambda_hat,
    })
}
