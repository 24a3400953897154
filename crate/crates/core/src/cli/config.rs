use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use super::CliError;
use crate::normalform::default_c_star;
use crate::tfseries::{Domain, Lattice};
use crate::twolayer::{reference_config, Gamma1Rule, TwoLayerParams, DEFAULT_PRUNE_REL};

/// Where the perturbations `P~`, `P^` come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationSource {
    /// The built-in reference perturbations.
    Reference,
    Zero,
    /// Series files in equilibrium-centred coordinates; a missing side is zero.
    Files { tilde: Option<PathBuf>, hat: Option<PathBuf> },
}

/// Perturbation to normalize in `normalize` when no two-layer model is used.
#[derive(Clone, Debug, PartialEq)]
pub enum NormalizeField {
    Zero,
    /// `mu e^{i phi}` on `(m, n) = (0, 1)`.
    SingleHarmonic(f64),
    File(PathBuf),
}

/// Settings of a stand-alone `normalize` run on `N + P`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizeSpec {
    pub field: NormalizeField,
    pub lambda: Vec<Complex64>,
    pub omega: Vec<f64>,
    pub domain: Domain,
    pub shrink: Domain,
    pub k: u32,
    pub gamma: f64,
    pub lattice: Lattice,
}

/// Everything a command needs; the defaults reproduce the reference instance.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// The file this configuration was read from.
    pub source: Option<PathBuf>,
    pub params: TwoLayerParams,
    pub perturbations: PerturbationSource,
    pub perturbation_scale: f64,
    pub const_used: f64,
    pub eps_small: f64,
    pub order_cap: u32,
    pub gamma1_rule: Gamma1Rule,
    pub c_star: f64,
    pub prune_rel: f64,
    pub k0: Option<u32>,
    pub k1: Option<u32>,
    pub tol: f64,
    pub cap_horizon: f64,
    pub x0_frac: f64,
    pub n_out: usize,
    pub samples: usize,
    pub seed: u64,
    /// Instance count of `verify` suites; `None` uses each suite's default.
    pub instances: Option<usize>,
    pub out_dir: PathBuf,
    pub sim_t1: f64,
    /// Initial `(gamma, p_gamma, psi, p_psi)` of `simulate`.
    pub sim_x0: [f64; 4],
    pub normalize: Option<NormalizeSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let r = reference_config();
        RunConfig {
            source: None,
            params: r.params,
            perturbations: PerturbationSource::Reference,
            perturbation_scale: 1.0,
            const_used: r.const_used,
            eps_small: r.eps_small,
            order_cap: r.order_cap,
            gamma1_rule: r.gamma1_rule,
            c_star: default_c_star(),
            prune_rel: DEFAULT_PRUNE_REL,
            k0: None,
            k1: None,
            tol: 1e-10,
            cap_horizon: 1e3,
            x0_frac: 0.5,
            n_out: 400,
            samples: 5,
            seed: 1,
            instances: None,
            out_dir: PathBuf::from("out"),
            sim_t1: 100.0,
            sim_x0: [1e-3, 0.0, 1e-3, 0.0],
            normalize: None,
        }
    }
}

fn parse_num<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse '{value}': {e}"))
}

fn parse_auto(value: &str) -> Result<Option<u32>, String> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_num(value).map(Some)
    }
}

/// `re` or `re:im`.
fn parse_complex(value: &str) -> Result<Complex64, String> {
    match value.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse_num(re)?, parse_num(im)?)),
        None => Ok(Complex64::new(parse_num(value)?, 0.0)),
    }
}

fn parse_list<T>(value: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    value.split_whitespace().map(f).collect()
}

fn parse_lattice(value: &str) -> Result<Lattice, String> {
    match value {
        "zero" => Ok(Lattice::Zero),
        "average" => Ok(Lattice::AngleAverage),
        "full" => Ok(Lattice::Full),
        _ => Err(format!("unknown lattice '{value}' (expected zero|average|full)")),
    }
}

/// Raw `nf_*` keys, assembled into a [`NormalizeSpec`] after parsing.
#[derive(Default)]
struct NormalizeKeys {
    field: Option<String>,
    mu: Option<f64>,
    lambda: Option<Vec<Complex64>>,
    omega: Option<Vec<f64>>,
    eps: Option<f64>,
    s: Option<f64>,
    rho: Option<f64>,
    sigma: Option<f64>,
    k: Option<u32>,
    gamma: Option<f64>,
    lattice: Option<Lattice>,
}

impl NormalizeKeys {
    fn any(&self) -> bool {
        self.field.is_some()
    }

    fn build(self, base: &Path) -> Result<NormalizeSpec, String> {
        let field = match self.field.as_deref() {
            Some("zero") => NormalizeField::Zero,
            Some("single_harmonic") => NormalizeField::SingleHarmonic(self.mu.unwrap_or(1e-3)),
            Some(path) => NormalizeField::File(base.join(path)),
            None => unreachable!("checked by any()"),
        };
        let (lambda, omega) = match &field {
            NormalizeField::SingleHarmonic(_) => (self.lambda.unwrap_or_default(), self.omega.unwrap_or(vec![1.0])),
            _ => (
                self.lambda.unwrap_or_default(),
                self.omega.ok_or("nf_omega is required for this nf_field")?,
            ),
        };
        Ok(NormalizeSpec {
            field,
            lambda,
            omega,
            domain: Domain::new(self.eps.unwrap_or(1.0), self.s.unwrap_or(1.0)),
            shrink: Domain::new(self.rho.unwrap_or(0.2), self.sigma.unwrap_or(0.2)),
            k: self.k.unwrap_or(40),
            gamma: self.gamma.unwrap_or(1.0),
            lattice: self.lattice.unwrap_or(Lattice::Zero),
        })
    }
}

impl RunConfig {
    /// Reads a flat `key = value` file; `#` starts a comment. Paths are
    /// resolved relative to the file.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut cfg = RunConfig::parse(&text, &base).map_err(|(line, message)| CliError::Config {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        cfg.source = Some(path.to_path_buf());
        cfg.check()?;
        Ok(cfg)
    }

    /// Parses configuration text; errors carry the 1-based line number.
    pub fn parse(text: &str, base: &Path) -> Result<RunConfig, (usize, String)> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        let mut tilde = None;
        let mut hat = None;
        let mut kind: Option<String> = None;
        let mut nf = NormalizeKeys::default();
        let mut out_dir_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or((line_no, format!("expected `key = value`, found '{line}'")))?;
            if !seen.insert(key.to_string()) {
                return Err((line_no, format!("duplicate key '{key}'")));
            }
            let p = &mut cfg.params;
            let r: Result<(), String> = (|| {
                match key {
                    "c1" => p.c1 = parse_num(value)?,
                    "c2" => p.c2 = parse_num(value)?,
                    "theta" => p.theta = parse_num(value)?,
                    "eps_fric" => p.eps_fric = parse_num(value)?,
                    "ups_fric" => p.ups_fric = parse_num(value)?,
                    "omega" => p.omega = parse_num(value)?,
                    "v0" => p.v0 = parse_num(value)?,
                    "k_res" => p.k_res = parse_num(value)?,
                    "eps0" => p.eps0 = parse_num(value)?,
                    "s0" => p.s0 = parse_num(value)?,
                    "r_over_a" => p.r_over_a = parse_num(value)?,
                    "a_semi" => p.a_semi = parse_num(value)?,
                    "c_min" => p.c_min = parse_num(value)?,
                    "a_k" => p.a_k = parse_num(value)?,
                    "perturbations" => kind = Some(value.to_string()),
                    "perturbation_tilde" => tilde = Some(base.join(value)),
                    "perturbation_hat" => hat = Some(base.join(value)),
                    "perturbation_scale" => cfg.perturbation_scale = parse_num(value)?,
                    "const_used" => cfg.const_used = parse_num(value)?,
                    "eps_small" => cfg.eps_small = parse_num(value)?,
                    "order_cap" => cfg.order_cap = parse_num(value)?,
                    "gamma1_rule" => cfg.gamma1_rule = value.parse()?,
                    "c_star" => cfg.c_star = parse_num(value)?,
                    "prune_rel" => cfg.prune_rel = parse_num(value)?,
                    "k0" => cfg.k0 = parse_auto(value)?,
                    "k1" => cfg.k1 = parse_auto(value)?,
                    "tol" => cfg.tol = parse_num(value)?,
                    "cap_horizon" => cfg.cap_horizon = parse_num(value)?,
                    "x0_frac" => cfg.x0_frac = parse_num(value)?,
                    "n_out" => cfg.n_out = parse_num(value)?,
                    "samples" => cfg.samples = parse_num(value)?,
                    "seed" => cfg.seed = parse_num(value)?,
                    "instances" => cfg.instances = parse_auto(value)?.map(|v| v as usize),
                    "out_dir" => {
                        cfg.out_dir = base.join(value);
                        out_dir_set = true;
                    }
                    "sim_t1" => cfg.sim_t1 = parse_num(value)?,
                    "sim_x0" => {
                        let v: Vec<f64> = parse_list(value, parse_num)?;
                        cfg.sim_x0 = v
                            .try_into()
                            .map_err(|v: Vec<f64>| format!("sim_x0 needs 4 values, found {}", v.len()))?;
                    }
                    "nf_field" => nf.field = Some(value.to_string()),
                    "nf_mu" => nf.mu = Some(parse_num(value)?),
                    "nf_lambda" => nf.lambda = Some(parse_list(value, parse_complex)?),
                    "nf_omega" => nf.omega = Some(parse_list(value, parse_num)?),
                    "nf_eps" => nf.eps = Some(parse_num(value)?),
                    "nf_s" => nf.s = Some(parse_num(value)?),
                    "nf_rho" => nf.rho = Some(parse_num(value)?),
                    "nf_sigma" => nf.sigma = Some(parse_num(value)?),
                    "nf_k" => nf.k = Some(parse_num(value)?),
                    "nf_gamma" => nf.gamma = Some(parse_num(value)?),
                    "nf_lattice" => nf.lattice = Some(parse_lattice(value)?),
                    _ => return Err(format!("unknown key '{key}'")),
                }
                Ok(())
            })();
            r.map_err(|m| (line_no, m))?;
        }
        cfg.perturbations = match (kind.as_deref(), tilde.is_some() || hat.is_some()) {
            (None, false) | (Some("reference"), false) => PerturbationSource::Reference,
            (Some("zero"), false) => PerturbationSource::Zero,
            (None, true) | (Some("files"), _) => PerturbationSource::Files { tilde, hat },
            (Some(k), has_files) => {
                let msg = if has_files {
                    format!("perturbations = {k} conflicts with perturbation file keys")
                } else {
                    format!("unknown perturbations '{k}' (expected reference|zero|files)")
                };
                return Err((0, msg));
            }
        };
        if nf.any() {
            cfg.normalize = Some(nf.build(base).map_err(|m| (0, m))?);
        }
        if !out_dir_set {
            cfg.out_dir = base.join("out");
        }
        Ok(cfg)
    }

    /// Referenced files must exist and every tolerance must be positive.
    pub fn check(&self) -> Result<(), CliError> {
        let mut paths: Vec<&PathBuf> = Vec::new();
        if let PerturbationSource::Files { tilde, hat } = &self.perturbations {
            paths.extend(tilde.iter().chain(hat.iter()));
        }
        if let Some(NormalizeSpec {
            field: NormalizeField::File(p),
            ..
        }) = &self.normalize
        {
            paths.push(p);
        }
        for p in paths {
            if !p.is_file() {
                return Err(CliError::io(p, "file not found"));
            }
        }
        let positive = [
            ("tol", self.tol),
            ("cap_horizon", self.cap_horizon),
            ("const_used", self.const_used),
            ("eps_small", self.eps_small),
            ("c_star", self.c_star),
            ("prune_rel", self.prune_rel),
            ("sim_t1", self.sim_t1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Setting(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.perturbation_scale >= 0.0 && self.perturbation_scale.is_finite()) {
            return Err(CliError::Setting(format!(
                "perturbation_scale = {} must be non-negative",
                self.perturbation_scale
            )));
        }
        if self.n_out == 0 || self.samples == 0 {
            return Err(CliError::Setting("n_out and samples must be positive".into()));
        }
        if self.order_cap == 0 {
            return Err(CliError::Setting("order_cap must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let text = "# reference\nc1 = 1.5  # shell\nk1 = auto\nk0 = 12\nperturbations = zero\nnf_field = single_harmonic\nnf_lambda = -0.1:1 -0.1:-1\n";
        let cfg = RunConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.params.c1, 1.5);
        assert_eq!(cfg.k1, None);
        assert_eq!(cfg.k0, Some(12));
        assert_eq!(cfg.perturbations, PerturbationSource::Zero);
        let nf = cfg.normalize.unwrap();
        assert_eq!(nf.lambda[1], Complex64::new(-0.1, -1.0));
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/out"));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert_eq!(RunConfig::parse("bogus = 1", Path::new(".")).unwrap_err().0, 1);
        assert_eq!(RunConfig::parse("c1 = 1\nc1 = 2", Path::new(".")).unwrap_err().0, 2);
        assert!(RunConfig::parse("c1 = x", Path::new(".")).is_err());
    }
}
