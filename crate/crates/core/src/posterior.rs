//! Normal-normal conjugate posterior and its local-mixture perturbation.
//!
//! With data `x_1..x_n ~ N(mu, sigma^2)` and prior `N(theta, s)` the base
//! posterior is `N(mu_pi, v_pi)`. Perturbing the prior by
//! `1 + sum l_j q_j` tilts that posterior by the same bracket and
//! renormalises it by `xi(l) = 1 + sum l_j E0[q_j]`. Every quantity here is a
//! polynomial expectation under the base posterior and is evaluated exactly
//! from normal moments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{poly_expectation_normal, Polynomial};
use crate::perturbation::{FeasibleRegion, PerturbationVector};
use crate::prior::{normal_q_closed_form, NefPrior, PriorFamily};

/// Highest posterior moment order served by [`PosteriorContext::perturbed_moment`].
pub const MAX_POSTERIOR_MOMENT: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorContext {
    prior: NefPrior,
    lik_var: f64,
    n: usize,
    sample_mean: f64,
    post_mean: f64,
    post_var: f64,
    /// `q_2, q_3, q_4` as polynomials in `mu`.
    #[serde(skip_serializing)]
    basis: [Polynomial; 3],
    /// `E0[q_j]`
    expect_q: [f64; 3],
    /// `Cov0(mu, q_j)`
    cov_q: [f64; 3],
}

impl PosteriorContext {
    /// Base posterior from raw observations; only `(n, mean)` is kept.
    pub fn base_posterior(prior: &NefPrior, lik_var: f64, data: &[f64]) -> Result<Self> {
        let n = data.len();
        let mean = if n == 0 {
            0.0
        } else {
            data.iter().sum::<f64>() / n as f64
        };
        Self::from_summary(prior, lik_var, n, mean)
    }

    pub fn from_summary(
        prior: &NefPrior,
        lik_var: f64,
        n: usize,
        sample_mean: f64,
    ) -> Result<Self> {
        if prior.family() != PriorFamily::Normal {
            return Err(Error::UnsupportedFamily(prior.family().name()));
        }
        if !(lik_var > 0.0 && lik_var.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "likelihood variance must be positive, got {lik_var}"
            )));
        }
        if n > 0 && !sample_mean.is_finite() {
            return Err(Error::InvalidConfig("sample mean is not finite".into()));
        }
        let theta = prior.mean();
        let s = prior.dispersion();
        let (post_mean, post_var) = if n == 0 {
            (theta, s)
        } else {
            let nf = n as f64;
            let den = nf * s + lik_var;
            (
                (theta * lik_var + nf * s * sample_mean) / den,
                lik_var * s / den,
            )
        };
        let basis: [Polynomial; 3] = std::array::from_fn(|i| normal_q_closed_form(theta, s, i + 2));
        let mut expect_q = [0.0; 3];
        let mut cov_q = [0.0; 3];
        let mu = Polynomial::linear(0.0, 1.0);
        for i in 0..3 {
            expect_q[i] = poly_expectation_normal(&basis[i], post_mean, post_var)?;
            let cross = poly_expectation_normal(&(&mu * &basis[i]), post_mean, post_var)?;
            cov_q[i] = cross - post_mean * expect_q[i];
        }
        Ok(Self {
            prior: *prior,
            lik_var,
            n,
            sample_mean: if n == 0 { f64::NAN } else { sample_mean },
            post_mean,
            post_var,
            basis,
            expect_q,
            cov_q,
        })
    }

    pub fn prior(&self) -> &NefPrior {
        &self.prior
    }

    pub fn lik_var(&self) -> f64 {
        self.lik_var
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `NaN` when there is no data.
    pub fn sample_mean(&self) -> f64 {
        self.sample_mean
    }

    pub fn post_mean(&self) -> f64 {
        self.post_mean
    }

    pub fn post_var(&self) -> f64 {
        self.post_var
    }

    pub fn post_sd(&self) -> f64 {
        self.post_var.sqrt()
    }

    pub fn region(&self) -> FeasibleRegion {
        FeasibleRegion::new(self.prior)
    }

    /// `q_j` in `mu` for `j` in `2..=4`.
    pub fn q(&self, j: usize) -> Result<&Polynomial> {
        basis_slot(j).map(|i| &self.basis[i])
    }

    /// `E0[q_j]` for `j` in `2..=4`.
    pub fn expect_q(&self, j: usize) -> Result<f64> {
        basis_slot(j).map(|i| self.expect_q[i])
    }

    pub fn expect_q_all(&self) -> [f64; 3] {
        self.expect_q
    }

    /// `Cov0(mu, q_j)` for `j` in `2..=4`; independent of the perturbation.
    pub fn cov_mu_q(&self, j: usize) -> Result<f64> {
        basis_slot(j).map(|i| self.cov_q[i])
    }

    /// Gradient of the direction function, `(Cov0(mu, q_2), Cov0(mu, q_3), Cov0(mu, q_4))`.
    pub fn cov_all(&self) -> [f64; 3] {
        self.cov_q
    }

    /// `xi(l) = 1 + sum l_j E0[q_j]`, without any feasibility check.
    pub fn xi(&self, lambda: PerturbationVector) -> f64 {
        1.0 + lambda.dot(self.expect_q)
    }

    /// `xi` on a feasible perturbation; a nonpositive value is an error.
    pub fn checked_xi(&self, lambda: PerturbationVector) -> Result<f64> {
        self.region().require(lambda)?;
        let xi = self.xi(lambda);
        if xi > 0.0 {
            Ok(xi)
        } else {
            Err(Error::NonPositiveXi(xi))
        }
    }

    pub fn base_density(&self, mu: f64) -> f64 {
        normal_pdf(mu, self.post_mean, self.post_var)
    }

    /// `1 + sum l_j q_j(mu)`
    pub fn bracket(&self, lambda: PerturbationVector, mu: f64) -> f64 {
        1.0 + lambda
            .to_array()
            .iter()
            .zip(&self.basis)
            .map(|(l, q)| l * q.eval(mu))
            .sum::<f64>()
    }

    /// Perturbed posterior `pi0_p(mu) (1 + sum l_j q_j(mu)) / xi(l)`.
    pub fn perturbed_posterior_density(&self, lambda: PerturbationVector, mu: f64) -> Result<f64> {
        let xi = self.checked_xi(lambda)?;
        Ok(self.base_density(mu) * self.bracket(lambda, mu) / xi)
    }

    /// `A_j^l = E0[mu^l q_j(mu)]`.
    pub fn a_coefficient(&self, j: usize, l: usize) -> Result<f64> {
        let q = self.q(j)?;
        poly_expectation_normal(
            &(&Polynomial::monomial(l, 1.0) * q),
            self.post_mean,
            self.post_var,
        )
    }

    /// `E_p[mu^l] = (E0[mu^l] + sum l_j A_j^l) / xi(l)` for `l <= 8`.
    pub fn perturbed_moment(&self, lambda: PerturbationVector, l: usize) -> Result<f64> {
        if l > MAX_POSTERIOR_MOMENT {
            return Err(Error::MomentOrderTooLarge {
                order: l,
                max: MAX_POSTERIOR_MOMENT,
            });
        }
        let xi = self.checked_xi(lambda)?;
        let base =
            poly_expectation_normal(&Polynomial::monomial(l, 1.0), self.post_mean, self.post_var)?;
        let mut num = base;
        for (j, lj) in (2..=4).zip(lambda.to_array()) {
            if lj != 0.0 {
                num += lj * self.a_coefficient(j, l)?;
            }
        }
        Ok(num / xi)
    }
}

fn basis_slot(j: usize) -> Result<usize> {
    if (2..=4).contains(&j) {
        Ok(j - 2)
    } else {
        Err(Error::QIndex(j))
    }
}

pub(crate) fn normal_pdf(x: f64, m: f64, v: f64) -> f64 {
    (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Prior N(2, 1), sigma^2 = 1, n = 15, mean 1.
    pub(crate) fn example_ctx() -> PosteriorContext {
        PosteriorContext::from_summary(&NefPrior::normal(2.0, 1.0).unwrap(), 1.0, 15, 1.0).unwrap()
    }

    #[test]
    fn base_posterior_examples() {
        let ctx = example_ctx();
        assert!((ctx.post_mean() - 1.0625).abs() < 1e-15);
        assert!((ctx.post_var() - 0.0625).abs() < 1e-15);

        let prior = NefPrior::normal(2.0, 1.0).unwrap();
        let empty = PosteriorContext::base_posterior(&prior, 1.0, &[]).unwrap();
        assert_eq!((empty.post_mean(), empty.post_var()), (2.0, 1.0));

        let flat =
            PosteriorContext::base_posterior(&NefPrior::normal(0.0, 1e12).unwrap(), 1.0, &[5.0])
                .unwrap();
        assert!((flat.post_mean() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn raw_data_reduces_to_summary() {
        let prior = NefPrior::normal(0.3, 2.0).unwrap();
        let a = PosteriorContext::base_posterior(&prior, 0.5, &[1.0, 2.0, 4.5]).unwrap();
        let b = PosteriorContext::from_summary(&prior, 0.5, 3, 2.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_non_normal_and_bad_variance() {
        let g = NefPrior::gamma_by_mean(1.0, 2.0).unwrap();
        assert!(PosteriorContext::from_summary(&g, 1.0, 1, 0.0).is_err());
        let n = NefPrior::normal(0.0, 1.0).unwrap();
        assert!(PosteriorContext::from_summary(&n, 0.0, 1, 0.0).is_err());
    }

    #[test]
    fn xi_examples() {
        let ctx = example_ctx();
        assert_eq!(ctx.xi(PerturbationVector::ZERO), 1.0);
        let xi = ctx
            .checked_xi(PerturbationVector::new(0.1, 0.0, 0.0))
            .unwrap();
        assert!((xi - 0.994140625).abs() < 1e-15);

        let prior_only = PosteriorContext::base_posterior(ctx.prior(), 1.0, &[]).unwrap();
        let xi = prior_only
            .checked_xi(PerturbationVector::new(1.2, -0.05, 0.3))
            .unwrap();
        assert!((xi - 1.0).abs() < 1e-14);
        assert!(ctx
            .checked_xi(PerturbationVector::new(0.0, 0.0, -1.0))
            .is_err());
    }

    #[test]
    fn moment_examples() {
        let ctx = example_ctx();
        let l = PerturbationVector::new(0.1, 0.0, 0.0);
        assert_eq!(
            ctx.perturbed_moment(PerturbationVector::ZERO, 1).unwrap(),
            ctx.post_mean()
        );
        assert!((ctx.perturbed_moment(l, 0).unwrap() - 1.0).abs() < 1e-15);
        let a21 = ctx.a_coefficient(2, 1).unwrap();
        assert!((a21 + 0.179_443_359_375).abs() < 1e-12);
        let m1 = ctx.perturbed_moment(l, 1).unwrap();
        assert!((m1 - (1.0625 + 0.1 * a21) / 0.994140625).abs() < 1e-14);
        assert!(ctx.perturbed_moment(l, 9).is_err());
    }

    #[test]
    fn covariance_examples() {
        let ctx = example_ctx();
        assert!((ctx.cov_mu_q(2).unwrap() + 0.1171875).abs() < 1e-15);
        assert!(ctx.cov_mu_q(5).is_err());
        let centred = PosteriorContext::from_summary(ctx.prior(), 1.0, 4, 2.0).unwrap();
        assert_eq!(centred.post_mean(), 2.0);
        assert!(centred.cov_mu_q(2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let ctx = example_ctx();
        let m = ctx.post_mean();
        assert_eq!(
            ctx.perturbed_posterior_density(PerturbationVector::ZERO, m)
                .unwrap(),
            ctx.base_density(m)
        );
        let l = PerturbationVector::new(0.1, 0.0, 0.0);
        let q2 = (m - 2.0f64).powi(2) - 1.0;
        let expected = ctx.base_density(m) * (1.0 + 0.1 * q2) / 0.994140625;
        assert!((ctx.perturbed_posterior_density(l, m).unwrap() - expected).abs() < 1e-14);
        // bracket touches zero at mu = theta for l = (1, 0, 0)
        let l = PerturbationVector::new(1.0, 0.0, 0.0);
        assert!(ctx.perturbed_posterior_density(l, 2.0).unwrap().abs() < 1e-15);
    }
}
