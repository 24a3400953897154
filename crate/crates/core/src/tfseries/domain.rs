use super::SeriesError;

/// Analyticity domain `u = (eps, s)`: polydisc radius `eps` for the slow
/// variables (sup-norm on `C^m`) and strip half-width `s` for the angles.
///
/// The same pair doubles as a domain shrink `w = (rho, sigma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub eps: f64,
    pub s: f64,
}

impl Domain {
    pub fn new(eps: f64, s: f64) -> Self {
        Domain { eps, s }
    }

    pub fn scaled(&self, factor: f64) -> Domain {
        Domain::new(self.eps * factor, self.s * factor)
    }

    pub fn grow(&self, by: &Domain) -> Domain {
        Domain::new(self.eps + by.eps, self.s + by.s)
    }

    /// `u - w`; fails unless both components stay positive.
    pub fn shrink(&self, by: &Domain) -> Result<Domain, SeriesError> {
        let out = Domain::new(self.eps - by.eps, self.s - by.s);
        if out.eps > 0.0 && out.s > 0.0 {
            Ok(out)
        } else {
            Err(SeriesError::DomainShrink {
                eps: self.eps,
                s: self.s,
                rho: by.eps,
                sigma: by.s,
            })
        }
    }

    /// Weight vector `(rho, .., rho, sigma, .., sigma)` with `m` copies of
    /// `eps` followed by `n` copies of `s`.
    pub fn as_weights(&self, m: usize, n: usize) -> Vec<f64> {
        std::iter::repeat_n(self.eps, m).chain(std::iter::repeat_n(self.s, n)).collect()
    }

    /// Component-wise strict comparison `self < other`.
    pub fn lt(&self, other: &Domain) -> bool {
        self.eps < other.eps && self.s < other.s
    }
}

/// A domain together with the weight vector used by the weighted norms.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainWeights {
    pub eps: f64,
    pub s: f64,
    pub weights: Vec<f64>,
}

impl DomainWeights {
    pub fn new(domain: Domain, weights: Vec<f64>) -> Result<Self, SeriesError> {
        if !(domain.eps > 0.0 && domain.s > 0.0) {
            return Err(SeriesError::InvalidDomain(format!(
                "eps = {}, s = {} must be positive",
                domain.eps, domain.s
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(SeriesError::InvalidDomain(format!(
                "weight {w} must be positive"
            )));
        }
        Ok(DomainWeights {
            eps: domain.eps,
            s: domain.s,
            weights,
        })
    }

    /// First `m` weights `rho`, last `n` weights `sigma`.
    pub fn from_rho_sigma(
        domain: Domain,
        m: usize,
        n: usize,
        rho: f64,
        sigma: f64,
    ) -> Result<Self, SeriesError> {
        Self::new(domain, Domain::new(rho, sigma).as_weights(m, n))
    }

    /// Domain `u` carrying the weights of the shrink `w` (the usual `[[.]]^w_u`).
    pub fn with_shrink_weights(domain: Domain, w: &Domain, m: usize, n: usize) -> Result<Self, SeriesError> {
        Self::new(domain, w.as_weights(m, n))
    }

    pub fn domain(&self) -> Domain {
        Domain::new(self.eps, self.s)
    }

    pub fn scale_weights(&self, c: f64) -> DomainWeights {
        DomainWeights {
            eps: self.eps,
            s: self.s,
            weights: self.weights.iter().map(|w| w * c).collect(),
        }
    }
}

/// Decay rate `tau = min{sigma, log(1 - rho/eps)^{-1}}` of ultraviolet tails
/// together with `sigma_bar = min{sigma, rho/eps}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailRates {
    pub tau: f64,
    pub sigma_bar: f64,
}

pub fn tail_decay_rate(u: &Domain, w: &Domain) -> Result<TailRates, SeriesError> {
    let (eps, s, rho, sigma) = (u.eps, u.s, w.eps, w.s);
    if !(rho > 0.0 && sigma > 0.0 && rho < eps && sigma < s) {
        return Err(SeriesError::DomainShrink { eps, s, rho, sigma });
    }
    let ratio = rho / eps;
    let tau = sigma.min(-(-ratio).ln_1p());
    Ok(TailRates {
        tau,
        sigma_bar: sigma.min(ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_branches() {
        let sigma: f64 = 0.3;
        let u = Domain::new(2.0, 1.0);
        let w = Domain::new(2.0 * (1.0 - (-sigma).exp()), sigma);
        let r = tail_decay_rate(&u, &w).unwrap();
        assert!((r.tau - sigma).abs() < 1e-15);

        let r = tail_decay_rate(&Domain::new(1.0, 1.0), &Domain::new(0.5, 0.1)).unwrap();
        assert_eq!(r.tau, 0.1);
        assert_eq!(r.sigma_bar, 0.1);
    }

    #[test]
    fn shrink_errors() {
        assert!(tail_decay_rate(&Domain::new(1.0, 1.0), &Domain::new(1.0, 0.1)).is_err());
        assert!(tail_decay_rate(&Domain::new(1.0, 1.0), &Domain::new(0.1, 1.0)).is_err());
        assert!(Domain::new(1.0, 1.0).shrink(&Domain::new(0.5, 1.5)).is_err());
    }

    #[test]
    fn weights_layout() {
        let dw = DomainWeights::from_rho_sigma(Domain::new(1.0, 2.0), 2, 1, 0.25, 0.5).unwrap();
        assert_eq!(dw.weights, vec![0.25, 0.25, 0.5]);
        assert!(DomainWeights::new(Domain::new(0.0, 1.0), vec![1.0]).is_err());
    }
}
