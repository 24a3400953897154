use std::f64::consts::E;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CliError;
use crate::dynamics::verify_conjugation;
use crate::normalform::{contraction_factor, solve_homological, Frequencies, LEDGER_SLACK};
use crate::tfseries::{Domain, DomainWeights, Lattice, MultiIndex, TFComponent, TFVectorField, Var};
use crate::twolayer::{equilibrium, linear_block, sample_admissible, solve_spectrum};

/// Property suites run by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Cauchy,
    Bracket,
    LieTail,
    Homological,
    Conjugation,
    Pencil,
    Ultraviolet,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Cauchy,
        Suite::Bracket,
        Suite::LieTail,
        Suite::Homological,
        Suite::Conjugation,
        Suite::Pencil,
        Suite::Ultraviolet,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Cauchy => "cauchy",
            Suite::Bracket => "bracket",
            Suite::LieTail => "lie-tail",
            Suite::Homological => "homological",
            Suite::Conjugation => "conjugation",
            Suite::Pencil => "pencil",
            Suite::Ultraviolet => "ultraviolet",
        }
    }

    /// Number of random instances when none is configured; for `conjugation`
    /// this counts the nonlinear instances (the linear pair always runs).
    pub fn default_instances(&self) -> usize {
        match self {
            Suite::Homological => 200,
            Suite::Conjugation => 5,
            Suite::Pencil => 1000,
            _ => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::UnknownSuite(s.to_string()))
    }
}

/// One checked inequality `measured <= bound` (`<` when strict).
#[derive(Clone, Debug, PartialEq)]
pub struct CaseResult {
    pub instance: usize,
    pub label: String,
    pub measured: f64,
    pub bound: f64,
    pub strict: bool,
}

impl CaseResult {
    pub fn pass(&self) -> bool {
        if self.strict {
            self.measured < self.bound
        } else {
            self.measured <= self.bound + LEDGER_SLACK * self.bound.abs()
        }
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.measured
    }
}

/// Outcome of one suite; `to_text` is deterministic for a given seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub instances: usize,
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.cases.iter().filter(|c| !c.pass()).count()
    }

    pub fn pass(&self) -> bool {
        !self.cases.is_empty() && self.violations() == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite = {}", self.suite);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "instances = {}", self.instances);
        let _ = writeln!(out, "cases = {}", self.cases.len());
        let _ = writeln!(out, "# instance | check | measured | bound | margin | status");
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{:>5} | {} | {:.6e} | {:.6e} | {:+.3e} | {}",
                c.instance,
                c.label,
                c.measured,
                c.bound,
                c.margin(),
                if c.pass() { "ok" } else { "FAIL" }
            );
        }
        let min_margin = self
            .cases
            .iter()
            .filter(|c| c.bound != 0.0)
            .map(|c| c.margin() / c.bound.abs())
            .fold(f64::INFINITY, f64::min);
        let _ = writeln!(out, "min_relative_margin = {min_margin:.6e}");
        let _ = writeln!(out, "violations = {}", self.violations());
        let _ = writeln!(out, "pass = {}", self.pass());
        out
    }
}

/// Shape of a random Taylor–Fourier field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomFieldSpec {
    pub m: usize,
    pub n: usize,
    /// Largest `|alpha|_1`.
    pub max_alpha: u32,
    /// Largest `|k|_1`.
    pub max_k: u32,
    pub terms_per_component: usize,
    /// Real and imaginary parts are uniform in `[-amplitude, amplitude]`.
    pub amplitude: f64,
}

fn random_index<R: Rng + ?Sized>(rng: &mut R, spec: &RandomFieldSpec) -> MultiIndex {
    let mut alpha = vec![0u32; spec.m];
    if spec.m > 0 {
        for _ in 0..rng.gen_range(0..=spec.max_alpha) {
            alpha[rng.gen_range(0..spec.m)] += 1;
        }
    }
    let mut k = vec![0i32; spec.n];
    if spec.n > 0 {
        for _ in 0..rng.gen_range(0..=spec.max_k) {
            let j = rng.gen_range(0..spec.n);
            k[j] += if rng.gen::<bool>() { 1 } else { -1 };
        }
    }
    MultiIndex::new(&alpha, &k)
}

/// Field with `terms_per_component` random terms in every component.
pub fn random_field<R: Rng + ?Sized>(rng: &mut R, spec: &RandomFieldSpec) -> TFVectorField {
    let mut f = TFVectorField::zero(spec.m, spec.n);
    for h in 0..spec.m + spec.n {
        let mut c = TFComponent::zero(spec.m, spec.n);
        for _ in 0..spec.terms_per_component {
            let idx = random_index(rng, spec);
            let a = spec.amplitude;
            c.add_term(idx, Complex64::new(rng.gen_range(-a..a), rng.gen_range(-a..a)));
        }
        f.set_component(h, c);
    }
    f
}

fn wnorm(x: &TFVectorField, u: &Domain, w: &Domain) -> f64 {
    x.weighted_norm(&DomainWeights::new(*u, w.as_weights(x.m(), x.n())).expect("positive domain"))
}

fn sub(a: &Domain, b: &Domain) -> Domain {
    Domain::new(a.eps - b.eps, a.s - b.s)
}

struct Cases {
    instance: usize,
    cases: Vec<CaseResult>,
}

impl Cases {
    fn le(&mut self, label: impl Into<String>, measured: f64, bound: f64) {
        self.cases.push(CaseResult {
            instance: self.instance,
            label: label.into(),
            measured,
            bound,
            strict: false,
        });
    }

    fn lt(&mut self, label: impl Into<String>, measured: f64, bound: f64) {
        self.cases.push(CaseResult {
            instance: self.instance,
            label: label.into(),
            measured,
            bound,
            strict: true,
        });
    }

    /// Records a failure to evaluate an instance as a violated case.
    fn error(&mut self, label: &str, err: impl fmt::Display) {
        self.cases.push(CaseResult {
            instance: self.instance,
            label: format!("{label} ({err})"),
            measured: f64::INFINITY,
            bound: 0.0,
            strict: false,
        });
    }
}

/// Runs `suite` on `instances` seeded instances (the suite default when `None`).
pub fn run_suite(suite: Suite, seed: u64, instances: Option<usize>, tol: f64) -> Result<SuiteReport, CliError> {
    let count = instances.unwrap_or_else(|| suite.default_instances());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Cases {
        instance: 0,
        cases: Vec::new(),
    };
    if suite == Suite::Conjugation {
        conjugation_linear(&mut cases, tol)?;
    }
    for i in 1..=count {
        cases.instance = i;
        match suite {
            Suite::Cauchy => cauchy(&mut rng, &mut cases),
            Suite::Bracket => bracket(&mut rng, &mut cases),
            Suite::LieTail => lie_tail(&mut rng, &mut cases),
            Suite::Homological => homological(&mut rng, &mut cases),
            Suite::Conjugation => conjugation_nonlinear(&mut rng, &mut cases, tol, i as u64)?,
            Suite::Pencil => pencil(&mut rng, &mut cases),
            Suite::Ultraviolet => ultraviolet(&mut rng, &mut cases),
        }
    }
    Ok(SuiteReport {
        suite,
        seed,
        instances: count,
        cases: cases.cases,
    })
}

fn random_domain<R: Rng + ?Sized>(rng: &mut R) -> Domain {
    Domain::new(rng.gen_range(0.2..2.0), rng.gen_range(0.1..2.0))
}

fn cauchy<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases) {
    let spec = RandomFieldSpec {
        m: rng.gen_range(1..=2),
        n: rng.gen_range(1..=2),
        max_alpha: 6,
        max_k: 6,
        terms_per_component: 8,
        amplitude: 1.0,
    };
    let z = random_field(rng, &spec).component(0).clone();
    let u = random_domain(rng);
    let rho = u.eps * rng.gen_range(0.05..0.95);
    let sigma = u.s * rng.gen_range(0.05..0.95);
    let zn = z.norm(&u);
    for p in 1..=3u32 {
        let i = rng.gen_range(0..spec.n);
        let d = z.partial_derivative(Var::Angle(i), p);
        let bound = (p as f64 / (E * sigma)).powi(p as i32) * zn;
        out.le(format!("angle derivative p={p}"), d.norm(&Domain::new(u.eps, u.s - sigma)), bound);
        let i = rng.gen_range(0..spec.m);
        let d = z.partial_derivative(Var::Slow(i), p);
        let fact: f64 = (1..=p).map(f64::from).product();
        let bound = fact / rho.powi(p as i32) * zn;
        out.le(format!("slow derivative p={p}"), d.norm(&Domain::new(u.eps - rho, u.s)), bound);
    }
}

fn bracket<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases) {
    let spec = RandomFieldSpec {
        m: rng.gen_range(1..=2),
        n: rng.gen_range(1..=2),
        max_alpha: 3,
        max_k: 3,
        terms_per_component: 4,
        amplitude: 1.0,
    };
    let y = random_field(rng, &spec);
    let wf = random_field(rng, &spec);
    let u0 = random_domain(rng);
    let u = Domain::new(u0.eps * rng.gen_range(0.5..=1.0), u0.s * rng.gen_range(0.5..=1.0));
    let w = Domain::new(u.eps * rng.gen_range(0.05..0.5), u.s * rng.gen_range(0.05..0.5));
    let uw = sub(&u, &w);
    let v = sub(&u0, &uw);
    let lhs = wnorm(&y.lie_bracket(&wf), &uw, &v);
    let rhs = wnorm(&y, &uw, &w) * wnorm(&wf, &u, &v) + wnorm(&wf, &uw, &v) * wnorm(&y, &u0, &v);
    out.le("bracket [[L_Y W]]", lhs, rhs);
}

fn lie_tail<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases) {
    let m = rng.gen_range(1..=2);
    let y_spec = RandomFieldSpec {
        m,
        n: 1,
        max_alpha: 1,
        max_k: 1,
        terms_per_component: 3,
        amplitude: 1.0,
    };
    let w_spec = RandomFieldSpec {
        max_alpha: 2,
        max_k: 2,
        ..y_spec
    };
    let u = random_domain(rng);
    let w = Domain::new(u.eps * rng.gen_range(0.1..0.45), u.s * rng.gen_range(0.1..0.45));
    let mut y = random_field(rng, &y_spec);
    let q_target = rng.gen_range(0.05..0.35);
    let q0 = contraction_factor(&y, &u, &w);
    if q0 > 0.0 {
        y = y.scale_re(q_target / q0);
    }
    let q = contraction_factor(&y, &u, &w);
    let wf = random_field(rng, &w_spec);
    let big_m: i32 = rng.gen_range(1..=4);
    let uw = sub(&u, &w);
    let w_norm = wnorm(&wf, &u, &w);
    let mut term = wf.clone();
    let mut tail = TFVectorField::zero(wf.m(), wf.n());
    for k in 1..=60i32 {
        term = y.lie_bracket(&term).scale_re(1.0 / k as f64);
        let tn = wnorm(&term, &uw, &w);
        if k <= 3 {
            out.le(format!("iterated bracket k={k}"), tn, q.powi(k) * w_norm);
        }
        if k >= big_m {
            tail = tail.add(&term);
        }
        if k >= big_m && tn <= 1e-17 * w_norm {
            break;
        }
    }
    out.le(format!("Lie tail M={big_m}"), wnorm(&tail, &uw, &w), q.powi(big_m) / (1.0 - q) * w_norm);
}

fn homological<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases) {
    let (m, n) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
    let lambda: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(-rng.gen_range(0.01..1.0), rng.gen_range(-2.0..2.0)))
        .collect();
    let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let freq = Frequencies::new(lambda, omega);
    let lattice = if rng.gen::<bool>() { Lattice::Zero } else { Lattice::AngleAverage };
    let spec = RandomFieldSpec {
        m,
        n,
        max_alpha: 3,
        max_k: 3,
        terms_per_component: 6,
        amplitude: 1.0,
    };
    let z = random_field(rng, &spec).project_lattice_complement(&lattice);
    let mut gamma = f64::INFINITY;
    for (h, c) in z.components().iter().enumerate() {
        for (idx, _) in c.iter() {
            gamma = gamma.min(freq.divisor(idx, h).norm());
        }
    }
    if !gamma.is_finite() {
        out.le("empty right-hand side", 0.0, 0.0);
        return;
    }
    let gamma = gamma * (1.0 - 1e-12);
    let u = random_domain(rng);
    let y = match solve_homological(&freq, &z, &lattice, Some(6), gamma) {
        Ok(y) => y,
        Err(e) => return out.error("homological solve", e),
    };
    let wts = Domain::new(1.0, 1.0);
    let resid = y.lie_bracket(&freq.field()).sub(&z);
    out.le(
        format!("residual ({lattice})"),
        wnorm(&resid, &u, &wts),
        1e-10 * wnorm(&z, &u, &wts),
    );
    let worst = (0..z.dim())
        .map(|h| {
            let zn = z.component(h).norm(&u);
            let yn = y.component(h).norm(&u);
            (yn - zn / gamma, zn / gamma, yn)
        })
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    out.le("component bound |Y_h| <= |Z_h|/gamma", worst.2, worst.1);
}

fn ultraviolet<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases) {
    let spec = RandomFieldSpec {
        m: rng.gen_range(1..=2),
        n: rng.gen_range(1..=2),
        max_alpha: 8,
        max_k: 8,
        terms_per_component: 10,
        amplitude: 1.0,
    };
    let z = random_field(rng, &spec);
    let k: u32 = rng.gen_range(1..=4);
    let (_, tail) = z.ultraviolet_tail(k);
    let u = random_domain(rng);
    let w = Domain::new(u.eps * rng.gen_range(0.05..0.95), u.s * rng.gen_range(0.05..0.95));
    let tau = w.s.min(-(-w.eps / u.eps).ln_1p());
    let uw = sub(&u, &w);
    for h in 0..tail.dim() {
        let c = tail.component(h);
        out.le(
            format!("tail K={k} component {}", h + 1),
            c.norm(&uw),
            (-(k as f64) * tau).exp() * c.norm(&u),
        );
    }
}

fn pencil<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases) {
    let p = sample_admissible(rng);
    let spec = match solve_spectrum(&p) {
        Ok(s) => s,
        Err(e) => return out.error("spectrum", e),
    };
    let eq = equilibrium(&p).expect("admissible");
    let l_norm = (0..4)
        .map(|i| (0..4).map(|j| linear_block(&p, &eq).l[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let b = &spec.bounds;
    let (th, e) = (p.theta, p.eps_fric);
    let lower = 8.0 * e * e * p.c1.min(eq.c2bar) - 9.0 * th * th * e * e;
    out.le("pencil bound", lower, 4.0 * b.t.0 * b.v.0 - b.b.1 * b.b.1);
    out.lt("pencil lower bound positive", 0.0, lower);
    out.le("smallest B eigenvalue", th * e * p.ups_fric / (e + p.delta()), b.b.0);
    let max_re = spec.max_real();
    let min_re = spec.eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    out.le("Rayleigh window upper", max_re, spec.rayleigh_window.1 + 1e-12);
    out.le("Rayleigh window lower", spec.rayleigh_window.0 - 1e-12, min_re);
    out.le("Re lambda <= -ups/6", max_re, spec.corrected_upper + 1e-12);
    let resid = spec.residuals.iter().copied().fold(0.0, f64::max);
    out.le("eigen-residual", resid, 1e-10 * l_norm);
    let closure = (0..2)
        .map(|j| (spec.eigenvalues[j].conj() - spec.eigenvalues[j + 2]).norm())
        .fold(0.0, f64::max);
    out.le("conjugate closure", closure, 0.0);
}

fn conjugation_linear(out: &mut Cases, tol: f64) -> Result<(), CliError> {
    let c = |x: f64| Complex64::new(x, 0.0);
    let a = DMatrix::from_row_slice(2, 2, &[c(0.01), c(-0.02), c(0.015), c(0.005)]);
    let b = DMatrix::from_row_slice(2, 2, &[c(-0.1), c(1.0), c(-1.0), c(-0.2)]);
    let y = TFVectorField::linear(2, 0, &a);
    let x = TFVectorField::linear(2, 0, &b);
    let r = verify_conjugation(&y, &x, &Domain::new(1.0, 1.0), &Domain::new(0.5, 0.5), 5, tol, 1.0, 7)?;
    out.le("linear pair route A vs route B", r.max_discrepancy, r.threshold);
    Ok(())
}

fn conjugation_nonlinear<R: Rng + ?Sized>(rng: &mut R, out: &mut Cases, tol: f64, seed: u64) -> Result<(), CliError> {
    let (m, n) = (2, 1);
    let lambda: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(-rng.gen_range(0.05..0.5), rng.gen_range(0.5..2.0)))
        .collect();
    let freq = Frequencies::new(lambda, vec![rng.gen_range(0.5..3.0)]);
    let spec = RandomFieldSpec {
        m,
        n,
        max_alpha: 2,
        max_k: 1,
        terms_per_component: 3,
        amplitude: 0.05,
    };
    let mut p = random_field(rng, &spec);
    // keep the angle velocity real so that phases stay on the real torus
    for h in m..m + n {
        p.set_component(h, TFComponent::zero(m, n));
    }
    let x = freq.field().add(&p);
    let u = Domain::new(1.0, 1.0);
    let w = Domain::new(0.4, 0.4);
    let mut y = random_field(rng, &spec);
    for h in m..m + n {
        y.set_component(h, TFComponent::zero(m, n));
    }
    let q0 = contraction_factor(&y, &u, &w);
    let y = y.scale_re(rng.gen_range(0.05..0.3) / q0);
    let r = verify_conjugation(&y, &x, &u, &w, 1, tol, 1.0, seed)?;
    out.le("nonlinear route A vs route B", r.max_discrepancy, r.threshold);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("nope".parse::<Suite>(), Err(CliError::UnknownSuite(_))));
    }

    #[test]
    fn random_field_respects_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = RandomFieldSpec {
            m: 2,
            n: 2,
            max_alpha: 3,
            max_k: 2,
            terms_per_component: 10,
            amplitude: 1.0,
        };
        let f = random_field(&mut rng, &spec);
        for c in f.components() {
            for (idx, _) in c.iter() {
                assert!(idx.alpha_order() <= 3 && idx.k_order() <= 2);
            }
        }
    }
}
