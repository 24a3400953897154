use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::config::{NormalizeField, NormalizeSpec, PerturbationSource, RunConfig};
use super::verify::{run_suite, Suite};
use super::{CliError, EXIT_PASS, EXIT_VIOLATION};
use crate::dynamics::{
    integrate, shadowing_experiment, CompiledField, IntegratorOptions, ShadowOptions, PLOT_SCRIPT,
};
use crate::normalform::{normalize, single_harmonic, Frequencies, Ledger, LedgerRow};
use crate::tfseries::io::{read_field, write_field};
use crate::tfseries::TFVectorField;
use crate::twolayer::{
    build_full_field, build_linearized_field, equilibrium, linear_block, main_pipeline, reference_perturbations,
    solve_spectrum, PerturbationSet, PipelineConfig, PipelineReport, TwoLayerParams, SLOW_DIM,
};

/// Tolerance of the route-A/route-B comparison in `verify conjugation`.
pub const VERIFY_CONJUGATION_TOL: f64 = 1e-8;

/// Result of a command: exit code, a one-line summary, the main report and
/// every file written.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutcome {
    pub code: i32,
    pub summary: String,
    pub report: String,
    pub files: Vec<PathBuf>,
}

struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn new(dir: &'a Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Output { dir, files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, code: i32, summary: String, report: String) -> CommandOutcome {
        CommandOutcome {
            code,
            summary,
            report,
            files: self.files,
        }
    }
}

fn failed_row(prefix: &str, row: &LedgerRow) -> String {
    format!(
        "{prefix}{} (measured {:.6e}, claimed {}{:.6e})",
        row.label,
        row.measured,
        if row.strict { "< " } else { "<= " },
        row.claimed
    )
}

/// Exit code and summary for a ledger: 0 when every row passes, else 2
/// naming the first failing row.
fn ledger_verdict(ledger: &Ledger, what: &str) -> (i32, String) {
    match ledger.failures().first() {
        None => (EXIT_PASS, format!("{what}: all {} checks pass", ledger.rows().len())),
        Some(r) => (EXIT_VIOLATION, failed_row(&format!("{what}: violated condition: "), r)),
    }
}

fn params_text(p: &TwoLayerParams) -> String {
    let mut out = String::from("[parameters]\n");
    for (k, v) in [
        ("c1", p.c1),
        ("c2", p.c2),
        ("theta", p.theta),
        ("eps_fric", p.eps_fric),
        ("ups_fric", p.ups_fric),
        ("omega", p.omega),
        ("v0", p.v0),
        ("eps0", p.eps0),
        ("s0", p.s0),
        ("r_over_a", p.r_over_a),
        ("a_semi", p.a_semi),
        ("c_min", p.c_min),
        ("a_k", p.a_k),
    ] {
        let _ = writeln!(out, "{k} = {v:e}");
    }
    let _ = writeln!(out, "k_res = {}", p.k_res);
    out
}

fn complex(z: Complex64) -> String {
    format!("{:.12e} {:+.12e}i", z.re, z.im)
}

/// Resolves the configured perturbations, multiplied by `perturbation_scale`.
pub fn load_perturbations(cfg: &RunConfig) -> Result<PerturbationSet, CliError> {
    let scale = cfg.perturbation_scale;
    Ok(match &cfg.perturbations {
        PerturbationSource::Reference => reference_perturbations(scale),
        PerturbationSource::Zero => PerturbationSet::zero(),
        PerturbationSource::Files { tilde, hat } => {
            let mut set = PerturbationSet::zero();
            if let Some(p) = tilde {
                set.tilde = read_field(p)?.scale_re(scale);
            }
            if let Some(p) = hat {
                set.hat = read_field(p)?.scale_re(scale);
            }
            set
        }
    })
}

fn pipeline_config(cfg: &RunConfig) -> Result<PipelineConfig, CliError> {
    Ok(PipelineConfig {
        const_used: cfg.const_used,
        eps_small: cfg.eps_small,
        order_cap: cfg.order_cap,
        gamma1_rule: cfg.gamma1_rule,
        c_star: cfg.c_star,
        prune_rel: cfg.prune_rel,
        k0: cfg.k0,
        k1: cfg.k1,
        ..PipelineConfig::new(cfg.params.clone(), load_perturbations(cfg)?)
    })
}

/// `spectrum`: eigenvalues, eigenvectors and window checks of `L`.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<CommandOutcome, CliError> {
    let p = &cfg.params;
    let spec = solve_spectrum(p)?;
    let eq = equilibrium(p)?;
    let l = linear_block(p, &eq).l;
    let l_norm = (0..4).map(|i| (0..4).map(|j| l[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let b = &spec.bounds;
    let mut ledger = Ledger::new();
    for (j, r) in spec.residuals.iter().enumerate() {
        ledger.push(0, format!("eigen-residual |L b_{0} - lambda_{0} b_{0}| <= 1e-10 |L|", j + 1), 1e-10 * l_norm, *r);
    }
    let closure = (0..2)
        .map(|j| (spec.eigenvalues[j].conj() - spec.eigenvalues[j + 2]).norm())
        .fold(0.0, f64::max);
    ledger.push(0, "conjugate closure of the spectrum", 0.0, closure);
    for (j, z) in spec.eigenvalues.iter().enumerate() {
        ledger.push(0, format!("Rayleigh window Re lambda_{} <= upper", j + 1), spec.rayleigh_window.1, z.re);
        ledger.push(0, format!("Rayleigh window lower <= Re lambda_{}", j + 1), -spec.rayleigh_window.0, -z.re);
        ledger.push(0, format!("Re lambda_{} <= -ups/6", j + 1), spec.corrected_upper, z.re);
    }
    let lower = 8.0 * p.eps_fric.powi(2) * p.c1.min(eq.c2bar) - 9.0 * p.theta.powi(2) * p.eps_fric.powi(2);
    ledger.push(0, "pencil bound 8 eps^2 min{c} - 9 theta^2 eps^2 <= 4 lT- lV- - (lB+)^2", 4.0 * b.t.0 * b.v.0 - b.b.1 * b.b.1, lower);
    ledger.push_strict(0, "pencil lower bound positive", lower, 0.0);

    let mut report = params_text(p);
    let _ = writeln!(report, "\n[equilibrium]\neta0 = {:.12e}\nc2bar = {:.12e}", eq.eta0, eq.c2bar);
    let _ = writeln!(report, "\n[eigenvalues]");
    for (j, z) in spec.eigenvalues.iter().enumerate() {
        let _ = writeln!(report, "lambda_{} = {}", j + 1, complex(*z));
    }
    let _ = writeln!(report, "\n[eigenvectors]");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| complex(spec.b[(i, j)])).collect();
        let _ = writeln!(report, "b[{}] = {}", i + 1, row.join(", "));
    }
    let _ = writeln!(report, "\n[windows]");
    let _ = writeln!(
        report,
        "rayleigh_window = [{:.12e}, {:.12e}]",
        spec.rayleigh_window.0, spec.rayleigh_window.1
    );
    let _ = writeln!(
        report,
        "stated_window = [{:.12e}, {:.12e}]  (informational)",
        spec.stated_window.0, spec.stated_window.1
    );
    let _ = writeln!(report, "stated_window_holds = {}", spec.stated_window_ok);
    let _ = writeln!(report, "corrected_upper = {:.12e}", spec.corrected_upper);
    let _ = writeln!(report, "min_separation = {:.6e}", spec.min_separation);
    let _ = writeln!(report, "condition_b = {:.6e}", spec.condition);
    let _ = writeln!(report, "\n[checks]\n{}", ledger.to_table());
    let (code, summary) = ledger_verdict(&ledger, "spectrum");
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("spectrum.txt", &report)?;
    Ok(out.finish(code, summary, report))
}

fn normalize_field(spec: &NormalizeSpec) -> Result<TFVectorField, CliError> {
    let (m, n) = (spec.lambda.len(), spec.omega.len());
    let p = match &spec.field {
        NormalizeField::Zero => TFVectorField::zero(m, n),
        NormalizeField::SingleHarmonic(mu) => single_harmonic(*mu),
        NormalizeField::File(path) => read_field(path)?,
    };
    if (p.m(), p.n()) != (m, n) {
        return Err(CliError::Setting(format!(
            "perturbation has (m, n) = ({}, {}) but nf_lambda/nf_omega give ({m}, {n})",
            p.m(),
            p.n()
        )));
    }
    Ok(p)
}

/// `normalize`: the iterated normal form of `N + P` from the `nf_*` keys, or
/// the two-layer pipeline ledger when none are given.
pub fn cmd_normalize(cfg: &RunConfig) -> Result<CommandOutcome, CliError> {
    let Some(spec) = &cfg.normalize else {
        let report = main_pipeline(&pipeline_config(cfg)?)?;
        let mut out = Output::new(&cfg.out_dir)?;
        let text = report.ledger.to_table();
        out.write("ledger.txt", &text)?;
        let (code, summary) = ledger_verdict(&report.ledger, "normalize");
        return Ok(out.finish(code, summary, text));
    };
    let p = normalize_field(spec)?;
    let freq = Frequencies::new(spec.lambda.clone(), spec.omega.clone());
    let nf = normalize(
        &freq,
        &p,
        &spec.domain,
        &spec.shrink,
        &spec.lattice,
        spec.k,
        spec.gamma,
        cfg.c_star,
    )?;
    let mut report = String::from("[normalize]\n");
    let _ = writeln!(report, "m = {}\nn = {}", freq.m(), freq.n());
    let _ = writeln!(report, "domain = ({:e}, {:e})", spec.domain.eps, spec.domain.s);
    let _ = writeln!(report, "shrink = ({:e}, {:e})", spec.shrink.eps, spec.shrink.s);
    let _ = writeln!(report, "lattice = {}", spec.lattice);
    let _ = writeln!(report, "K = {}\ngamma = {:e}", spec.k, spec.gamma);
    let _ = writeln!(report, "K_sigma_bar = {:.6e}", spec.k as f64 * nf.sigma_bar);
    let _ = writeln!(report, "iterations = {}\nearly_exit = {}", nf.iterations, nf.early_exit);
    let _ = writeln!(report, "p_norm = {:.6e}\np_star_norm = {:.6e}", nf.p_norm, nf.p_star_norm);
    if nf.p_norm > 0.0 {
        let _ = writeln!(report, "decay_ratio = {:.6e}", nf.p_star_norm / nf.p_norm);
    }
    let _ = writeln!(report, "decay_bound = {:.6e}", (-(spec.k as f64) * nf.sigma_bar / 4.0).exp());
    let _ = writeln!(report, "truncated = {}", nf.truncated);
    let _ = writeln!(report, "\n[ledger]\n{}", nf.ledger.to_table());
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("ledger.txt", &report)?;
    out.write("g_star.field", &write_field(&nf.g_star))?;
    out.write("p_star.field", &write_field(&nf.p_star))?;
    let (code, summary) = ledger_verdict(&nf.ledger, "normalize");
    Ok(out.finish(code, summary, report))
}

/// Text form of a pipeline report.
pub fn pipeline_text(r: &PipelineReport) -> String {
    let mut out = params_text(&r.config.params);
    let b = &r.budget;
    let _ = writeln!(out, "\n[budget]");
    let _ = writeln!(out, "const = {:e}\neps = {:e}", b.const_used, b.eps_small);
    let _ = writeln!(out, "mu0 = {:.6e}\nmu1 = {:.6e}", b.mu0, b.mu1);
    let _ = writeln!(out, "gamma1_rule = {}", b.rule);
    let _ = writeln!(out, "gamma1 = {:.6e}\ngamma1_stated = {:.6e}", b.gamma1, b.gamma1_stated);
    let _ = writeln!(out, "eps_star = {:.6e}", b.eps_star);
    let _ = writeln!(out, "ln_T = {:.6e}", b.ln_t_horizon);
    let _ = writeln!(out, "flag mu0/omega <= eps = {}", b.mu0_small);
    let _ = writeln!(out, "flag mu1/gamma1 <= eps = {}", b.mu1_small);
    let _ = writeln!(out, "\n[stages]");
    for s in &r.stages {
        let _ = writeln!(
            out,
            "{}: domain = ({:.6e}, {:.6e}), shrink = ({:.6e}, {:.6e}), K = {}, gamma = {:.6e}, in = {:.6e}, out = {:.6e}",
            s.name, s.domain.eps, s.domain.s, s.shrink.eps, s.shrink.s, s.k, s.gamma, s.p_in, s.p_out
        );
    }
    let _ = writeln!(out, "K0 = {}\nK1 = {}", r.k0, r.k1);
    let _ = writeln!(out, "\n[frequencies]");
    for j in 0..r.lambda_tilde.len() {
        let _ = writeln!(out, "lambda_{} = {}", j + 1, complex(r.spectrum.eigenvalues[j]));
        let _ = writeln!(out, "lambda_tilde_{} = {}", j + 1, complex(r.lambda_tilde[j]));
        let _ = writeln!(out, "lambda_hat_{} = {}", j + 1, complex(r.n_hat.lambda[j]));
    }
    let _ = writeln!(out, "omega_hat = {:.12e}", r.n_hat.omega[0]);
    let _ = writeln!(out, "final_domain = ({:.6e}, {:.6e})", r.final_domain.eps, r.final_domain.s);
    let _ = writeln!(out, "p3_terms = {}", r.p3.num_terms());
    let _ = writeln!(out, "truncated = {}", r.truncated);
    let _ = writeln!(out, "\n[ledger]\n{}", r.ledger.to_table());
    let _ = writeln!(out, "[diagnostics]\n{}", r.diagnostics.to_table());
    out
}

/// Runs the pipeline and checks the smallness flags and the ledger.
fn checked_pipeline(cfg: &RunConfig) -> Result<(PipelineReport, i32, String), CliError> {
    let report = main_pipeline(&pipeline_config(cfg)?)?;
    let b = &report.budget;
    let flag = if !b.mu0_small {
        Some(format!(
            "smallness flag mu_0/omega <= eps (mu_0/omega = {:.6e}, eps = {:.6e})",
            b.mu0 / report.config.params.omega,
            b.eps_small
        ))
    } else if !b.mu1_small {
        Some(format!(
            "smallness flag mu_1/gamma_1 <= eps (mu_1/gamma_1 = {:.6e}, eps = {:.6e})",
            b.mu1 / b.gamma1,
            b.eps_small
        ))
    } else {
        None
    };
    let (code, summary) = match flag {
        Some(f) => (EXIT_VIOLATION, format!("pipeline: violated condition: {f}")),
        None => ledger_verdict(&report.ledger, "pipeline"),
    };
    Ok((report, code, summary))
}

/// `pipeline`: the four normalization steps with their ledger.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<CommandOutcome, CliError> {
    let (report, code, summary) = checked_pipeline(cfg)?;
    let text = pipeline_text(&report);
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("pipeline.txt", &text)?;
    out.write("p3.field", &write_field(&report.p3))?;
    Ok(out.finish(code, summary, text))
}

/// `shadow`: pipeline plus the shadowing experiment, with CSVs and a plot script.
pub fn cmd_shadow(cfg: &RunConfig) -> Result<CommandOutcome, CliError> {
    let (report, code, summary) = checked_pipeline(cfg)?;
    let mut out = Output::new(&cfg.out_dir)?;
    let mut text = pipeline_text(&report);
    if code != EXIT_PASS {
        out.write("shadow_report.txt", &text)?;
        return Ok(out.finish(code, summary, text));
    }
    let opts = ShadowOptions {
        x0_frac: cfg.x0_frac,
        direction: None,
        cap_horizon: cfg.cap_horizon,
        n_out: cfg.n_out,
        tol: cfg.tol,
        seed: cfg.seed,
    };
    let s = shadowing_experiment(&report, &opts)?;
    text.push('\n');
    text.push_str(&s.to_text());
    let _ = writeln!(text, "\n[damped reference]");
    for (j, (c, l)) in s.reference.coefficients.iter().zip(&s.reference.exponents).enumerate() {
        let _ = writeln!(text, "c_{} = {}  exponent = {}", j + 1, complex(*c), complex(*l));
    }
    out.write("shadow_report.txt", &text)?;
    out.write("shadow_chart3.csv", &s.chart3_csv())?;
    out.write("shadow_original.csv", &s.original_csv())?;
    out.write("plot_shadow.py", PLOT_SCRIPT)?;
    let (code, summary) = if s.pass {
        (
            EXIT_PASS,
            format!(
                "shadow: pass (max deviation {:.3e} <= eps = {:.3e} over t <= {:.3e})",
                s.max_deviation_zeta3, s.epsilon, s.t_used
            ),
        )
    } else {
        (
            EXIT_VIOLATION,
            format!(
                "shadow: violated condition: deviation <= eps (zeta3 {:.3e}, gamma {:.3e}, psi {:.3e}, eps {:.3e})",
                s.max_deviation_zeta3, s.max_deviation_gamma, s.max_deviation_psi, s.epsilon
            ),
        )
    };
    Ok(out.finish(code, summary, text))
}

/// `verify <suite>`: a seeded property suite; the report lists every case.
pub fn cmd_verify(cfg: &RunConfig, suite: &str) -> Result<CommandOutcome, CliError> {
    let suite: Suite = suite.parse()?;
    let r = run_suite(suite, cfg.seed, cfg.instances, VERIFY_CONJUGATION_TOL)?;
    let text = r.to_text();
    let mut out = Output::new(&cfg.out_dir)?;
    out.write(&format!("verify_{suite}.txt"), &text)?;
    let (code, summary) = match r.cases.iter().find(|c| !c.pass()) {
        None => (
            EXIT_PASS,
            format!("verify {suite}: {} cases, 0 violations", r.cases.len()),
        ),
        Some(c) => (
            EXIT_VIOLATION,
            format!(
                "verify {suite}: violated condition: {} in instance {} ({} violations)",
                c.label,
                c.instance,
                r.violations()
            ),
        ),
    };
    Ok(out.finish(code, summary, text))
}

/// `simulate`: the full nonlinear system with exact sines, in `(gamma, p_gamma, eta, p_eta, l)`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<CommandOutcome, CliError> {
    let p = &cfg.params;
    p.validate()?;
    let eq = equilibrium(p)?;
    let perts = load_perturbations(cfg)?;
    perts.validate()?;
    let pert = CompiledField::new(&perts.tilde.add(&perts.hat));
    let x0 = [
        cfg.sim_x0[0],
        cfg.sim_x0[1],
        eq.eta0 + cfg.sim_x0[2],
        cfg.sim_x0[3],
        0.0,
    ];
    let state: Vec<Complex64> = x0.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let rhs = |_t: f64, x: &[Complex64]| -> Vec<Complex64> {
        let (g, pg, eta, pe) = (x[0].re, x[1].re, x[2].re, x[3].re);
        let centred = [x[0], x[1], x[2] - eq.eta0, x[3], x[4]];
        let e = pert.eval(&centred);
        let c = |v: f64| Complex64::new(v, 0.0);
        vec![
            c(pg),
            c(-p.c1 * (2.0 * g).sin() - p.theta * (pg - pe)) + c(e[1].re),
            c(pe),
            c(-p.c2 * (2.0 * eta).sin() + p.eps_fric * (pg - pe) - p.ups_fric * (pe - p.v0)) + c(e[3].re),
            c(p.omega),
        ]
    };
    let n_out = cfg.n_out;
    let outputs: Vec<f64> = (1..n_out).map(|i| cfg.sim_t1 * i as f64 / n_out as f64).collect();
    let traj = integrate(rhs, &state, 0.0, cfg.sim_t1, &outputs, &IntegratorOptions::with_tol(cfg.tol))?;
    let mut csv = String::from("# chart: full system (gamma, p_gamma, eta, p_eta; l)\nt,gamma,p_gamma,eta,p_eta,l\n");
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let _ = writeln!(
            csv,
            "{t:.9e},{:.12e},{:.12e},{:.12e},{:.12e},{:.9e}",
            x[0].re, x[1].re, x[2].re, x[3].re, x[4].re
        );
    }
    let last = traj.last();
    let mut report = params_text(p);
    let _ = writeln!(report, "\n[simulate]\nt1 = {:e}\ntol = {:e}", cfg.sim_t1, cfg.tol);
    let _ = writeln!(report, "eta0 = {:.12e}", eq.eta0);
    let names = ["gamma", "p_gamma", "eta", "p_eta", "l"];
    for (name, (a, b)) in names.iter().zip(x0.iter().zip(last)) {
        let _ = writeln!(report, "{name}: initial = {a:.12e}, final = {:.12e}", b.re);
    }
    let _ = writeln!(report, "steps = {} accepted, {} rejected", traj.accepted, traj.rejected);
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("simulate.csv", &csv)?;
    out.write("simulate.txt", &report)?;
    let summary = format!("simulate: integrated to t = {:e} in {} steps", cfg.sim_t1, traj.accepted);
    Ok(out.finish(EXIT_PASS, summary, report))
}

/// `export-field`: the resolved perturbations and the model fields in the
/// series text format.
pub fn cmd_export_field(cfg: &RunConfig) -> Result<CommandOutcome, CliError> {
    let perts = load_perturbations(cfg)?;
    let model = build_linearized_field(&cfg.params, &perts, cfg.order_cap)?;
    let full = build_full_field(&cfg.params, &perts, cfg.order_cap)?;
    let mut out = Output::new(&cfg.out_dir)?;
    out.write("perturbation_tilde.field", &write_field(&perts.tilde))?;
    out.write("perturbation_hat.field", &write_field(&perts.hat))?;
    out.write("linearized.field", &write_field(&model.field()))?;
    out.write("full.field", &write_field(&full))?;
    let mut report = String::new();
    for f in &out.files {
        let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(report, "{name}");
    }
    let summary = format!("export-field: wrote {} files (slow dimension {SLOW_DIM})", out.files.len());
    Ok(out.finish(EXIT_PASS, summary, report))
}
