use num_complex::Complex64;

use super::DynamicsError;

/// Tolerances and limits for [`integrate`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks `0.01 |t1 - t0|`.
    pub h0: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
    /// `(m, r)`: abort when `max_{i < m} |x_i| > r` after an accepted step.
    pub slow_radius: Option<(usize, f64)>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-10,
            atol: 1e-14,
            h0: None,
            h_min: 1e-14,
            max_steps: 10_000_000,
            slow_radius: None,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegratorOptions {
            rtol: tol,
            atol: tol * 1e-4,
            ..Default::default()
        }
    }
}

/// States sampled at the requested output times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub rtol: f64,
    pub atol: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[Complex64] {
        self.states.last().expect("non-empty trajectory")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb(x: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(k.iter()) {
                *o += v * (h * c);
            }
        }
    }
    out
}

/// Dormand–Prince 5(4) with step control; the state is reported at every
/// time in `outputs` (which must be increasing and lie in `(t0, t1]`) and at `t1`.
pub fn integrate<F>(
    mut f: F,
    x0: &[Complex64],
    t0: f64,
    t1: f64,
    outputs: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory, DynamicsError>
where
    F: FnMut(f64, &[Complex64]) -> Vec<Complex64>,
{
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(DynamicsError::InvalidOption(format!(
            "tolerances must be positive (rtol = {}, atol = {})",
            opts.rtol, opts.atol
        )));
    }
    if !(t1 > t0) {
        return Err(DynamicsError::InvalidOption(format!("empty time span [{t0}, {t1}]")));
    }
    let mut targets: Vec<f64> = outputs.iter().copied().filter(|t| *t > t0 && *t < t1).collect();
    if targets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DynamicsError::InvalidOption("output times must be increasing".into()));
    }
    targets.push(t1);
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![x0.to_vec()],
        rtol: opts.rtol,
        atol: opts.atol,
        accepted: 0,
        rejected: 0,
    };
    let mut t = t0;
    let mut x = x0.to_vec();
    let mut k1 = f(t, &x);
    let mut h = opts.h0.unwrap_or(0.01 * (t1 - t0));
    let mut next = 0;
    let mut steps = 0;
    while next < targets.len() {
        if steps >= opts.max_steps {
            return Err(DynamicsError::MaxSteps(opts.max_steps));
        }
        steps += 1;
        let target = targets[next];
        let hit = t + h >= target;
        let hs = if hit { target - t } else { h };
        let k2 = f(t + C2 * hs, &comb(&x, hs, &[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &comb(&x, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hs, &comb(&x, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * hs, &comb(&x, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(
            t + hs,
            &comb(&x, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let xn = comb(&x, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + hs, &xn);
        let mut err = 0.0;
        for i in 0..x.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let sc = opts.atol + opts.rtol * x[i].norm().max(xn[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / x.len().max(1) as f64).sqrt();
        if err <= 1.0 {
            t = if hit { target } else { t + hs };
            x = xn;
            k1 = k7;
            traj.accepted += 1;
            if let Some((m, r)) = opts.slow_radius {
                let norm = x[..m].iter().map(|z| z.norm()).fold(0.0, f64::max);
                if norm > r {
                    return Err(DynamicsError::DomainExit { t, norm, radius: r });
                }
            }
            if hit {
                traj.times.push(t);
                traj.states.push(x.clone());
                next += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // a shortened step that lands on an output time says little about h
            if !(hit && hs < h) {
                h = hs * fac;
            }
        } else {
            traj.rejected += 1;
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < opts.h_min * (1.0 + t.abs()) {
                return Err(DynamicsError::StepUnderflow { t, h });
            }
        }
    }
    Ok(traj)
}

/// Relative energy drift of `x'' = -omega^2 x` integrated over `periods` periods.
pub fn harmonic_drift(omega: f64, periods: f64, tol: f64) -> Result<f64, DynamicsError> {
    let t1 = periods * std::f64::consts::TAU / omega;
    let x0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let traj = integrate(
        |_, x| vec![x[1], -x[0] * (omega * omega)],
        &x0,
        0.0,
        t1,
        &[],
        &IntegratorOptions {
            rtol: tol,
            atol: tol,
            ..Default::default()
        },
    )?;
    let x = traj.last();
    let energy = |x: &[Complex64]| 0.5 * (x[1].norm_sqr() + omega * omega * x[0].norm_sqr());
    Ok((energy(x) - energy(&x0)).abs() / energy(&x0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_decay_is_exact() {
        let lam = -0.7;
        let traj = integrate(
            |_, x| vec![x[0] * lam],
            &[Complex64::new(1.0, 0.0)],
            0.0,
            3.0,
            &[1.0, 2.0],
            &IntegratorOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.times, vec![0.0, 1.0, 2.0, 3.0]);
        for (t, x) in traj.times.iter().zip(&traj.states) {
            assert!((x[0].re - (lam * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn domain_exit_is_reported() {
        let err = integrate(
            |_, x| vec![x[0]],
            &[Complex64::new(1.0, 0.0)],
            0.0,
            10.0,
            &[],
            &IntegratorOptions {
                slow_radius: Some((1, 2.0)),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, DynamicsError::DomainExit { .. }));
    }
}
