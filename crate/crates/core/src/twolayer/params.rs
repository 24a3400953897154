use rand::Rng;

use super::TwoLayerError;

/// Homogenized coefficients of the two-layer model and the analyticity radii
/// used by the normal-form pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoLayerParams {
    /// Shell restoring coefficient `c_1` (1/time^2).
    pub c1: f64,
    /// Core restoring coefficient `c_2` (1/time^2).
    pub c2: f64,
    /// `theta = beta / C'`.
    pub theta: f64,
    /// `eps = beta / C`.
    pub eps_fric: f64,
    /// `ups = beta' / C`.
    pub ups_fric: f64,
    /// Orbital mean motion `omega`.
    pub omega: f64,
    /// Drift velocity `v_0`.
    pub v0: f64,
    /// Resonance index `k`.
    pub k_res: i32,
    /// Slow-variable radius `eps_0`.
    pub eps0: f64,
    /// Angle strip width `s_0`.
    pub s0: f64,
    /// `r / a`.
    pub r_over_a: f64,
    /// Semi-major axis `a` (length unit of `r / a`).
    pub a_semi: f64,
    /// `min{C, C'}`.
    pub c_min: f64,
    /// Eccentricity-function value `a_k(e)`.
    pub a_k: f64,
}

impl Default for TwoLayerParams {
    fn default() -> Self {
        TwoLayerParams {
            c1: 1.0,
            c2: 1.0,
            theta: 0.1,
            eps_fric: 0.05,
            ups_fric: 0.02,
            omega: 10.0,
            v0: 0.0,
            k_res: 2,
            eps0: 5e-4,
            s0: 2.0,
            r_over_a: 0.1,
            a_semi: 1.0,
            c_min: 1.0,
            a_k: 1.0,
        }
    }
}

impl TwoLayerParams {
    /// `delta = eps + ups`.
    pub fn delta(&self) -> f64 {
        self.eps_fric + self.ups_fric
    }

    /// Checks friction ordering, existence of the equilibrium and the
    /// negativity condition `theta^2 < (8/9) min{c1, c2bar}`.
    pub fn validate(&self) -> Result<(), TwoLayerError> {
        let finite = [
            self.c1,
            self.c2,
            self.theta,
            self.eps_fric,
            self.ups_fric,
            self.omega,
            self.v0,
            self.eps0,
            self.s0,
            self.r_over_a,
            self.a_semi,
            self.c_min,
            self.a_k,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(TwoLayerError::InvalidParams {
                condition: "finite parameters".into(),
                detail: "all parameters must be finite".into(),
            });
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(TwoLayerError::InvalidParams {
                condition: "positive restoring coefficients c1, c2 > 0".into(),
                detail: format!("c1 = {}, c2 = {}", self.c1, self.c2),
            });
        }
        if !(self.theta > self.eps_fric && self.eps_fric > self.ups_fric && self.ups_fric > 0.0) {
            return Err(TwoLayerError::InvalidParams {
                condition: "friction ordering theta > eps > ups > 0".into(),
                detail: format!("theta = {}, eps = {}, ups = {}", self.theta, self.eps_fric, self.ups_fric),
            });
        }
        self.check_equilibrium()?;
        // c2 enters the linearization through c2bar = c2 cos 2 eta0
        let s = self.ups_fric * self.v0 / self.c2;
        let bound = 8.0 / 9.0 * self.c1.min(self.c2 * (1.0 - s * s).sqrt());
        if !(self.theta * self.theta < bound) {
            return Err(TwoLayerError::InvalidParams {
                condition: "negativity condition theta^2 < (8/9) min{c1, c2 cos 2 eta0}".into(),
                detail: format!("theta^2 = {}, bound = {bound}", self.theta * self.theta),
            });
        }
        if !(self.omega > 0.0) {
            return Err(TwoLayerError::InvalidParams {
                condition: "positive mean motion omega > 0".into(),
                detail: format!("omega = {}", self.omega),
            });
        }
        if !(self.eps0 > 0.0 && self.s0 > 0.0 && self.a_semi > 0.0 && self.c_min > 0.0 && self.r_over_a >= 0.0) {
            return Err(TwoLayerError::InvalidParams {
                condition: "positive radii eps0, s0 and scales a, min{C, C'}".into(),
                detail: format!(
                    "eps0 = {}, s0 = {}, a = {}, Cmin = {}, r/a = {}",
                    self.eps0, self.s0, self.a_semi, self.c_min, self.r_over_a
                ),
            });
        }
        Ok(())
    }

    pub(crate) fn check_equilibrium(&self) -> Result<(), TwoLayerError> {
        let ratio = self.ups_fric * self.v0.abs() / self.c2;
        if ratio < 1.0 {
            Ok(())
        } else {
            Err(TwoLayerError::NoEquilibrium { ratio })
        }
    }
}

/// `c = (3/4) ((B - A)/C) omega^2 e^k a_k(e)`.
pub fn restoring_coefficient(b_minus_a_over_c: f64, omega: f64, ecc: f64, k_res: i32, a_k: f64) -> f64 {
    0.75 * b_minus_a_over_c * omega * omega * ecc.powi(k_res) * a_k
}

/// Random parameters satisfying the friction ordering, the equilibrium
/// condition and the negativity condition; other fields keep their defaults.
pub fn sample_admissible<R: Rng + ?Sized>(rng: &mut R) -> TwoLayerParams {
    let c1: f64 = rng.gen_range(0.2..3.0);
    let c2: f64 = rng.gen_range(0.2..3.0);
    let ups_v0 = c2 * rng.gen_range(-0.8..0.8);
    let c2bar = c2 * (1.0 - (ups_v0 / c2).powi(2)).sqrt();
    let theta_max = (8.0 / 9.0 * c1.min(c2bar)).sqrt().min(1.0);
    let theta = theta_max * rng.gen_range(0.02..0.98);
    let eps_fric = theta * rng.gen_range(0.05..0.95);
    let ups_fric = eps_fric * rng.gen_range(0.05..0.95);
    TwoLayerParams {
        c1,
        c2,
        theta,
        eps_fric,
        ups_fric,
        omega: rng.gen_range(1.0..20.0),
        v0: ups_v0 / ups_fric,
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_admissible() {
        TwoLayerParams::default().validate().unwrap();
    }

    #[test]
    fn ordering_violation_is_named() {
        let p = TwoLayerParams {
            ups_fric: 0.06,
            ..Default::default()
        };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("theta > eps > ups"));
    }

    #[test]
    fn samples_are_admissible() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            sample_admissible(&mut rng).validate().unwrap();
        }
    }

    #[test]
    fn restoring_formula() {
        assert!((restoring_coefficient(1.0, 2.0, 0.5, 1, 1.0) - 1.5).abs() < 1e-15);
    }
}
