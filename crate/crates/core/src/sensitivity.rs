//! Local and global sensitivity of the posterior mean and the posterior
//! predictive to a local-mixture perturbation of the prior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    gauss_hermite, poly_expectation_normal, QuadratureRule, DEFAULT_HERMITE_NODES,
};
use crate::perturbation::{Feasibility, PerturbationVector};
use crate::posterior::{normal_pdf, PosteriorContext};
use crate::prior::{NefPrior, PriorFamily};

/// Agreement required between the default rule and its doubled size.
pub const KL_DOUBLING_TOL: f64 = 1e-8;

/// Slack below zero that is still reported as `D_KL = 0`.
const KL_CLAMP: f64 = -1e-12;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Gradient of the direction function: `Cov0(mu, q_j)` for `j = 2, 3, 4`.
pub fn grad_phi(ctx: &PosteriorContext) -> Vec3 {
    ctx.cov_all()
}

/// `phi(l) = sum l_j Cov0(mu, q_j)`; linear, defined for any `l`.
pub fn phi(ctx: &PosteriorContext, lambda: PerturbationVector) -> f64 {
    lambda.dot(ctx.cov_all())
}

/// `L^p(pi0)` norm of `sum l_j q_j`.
///
/// For normal priors with `p = 2` the `q_j` are scaled Hermite polynomials and
/// the norm is `sqrt(sum l_j^2 j! / s^j)`.
pub fn size_norm(prior: &NefPrior, lambda: PerturbationVector, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "norm order must lie in [1, inf), got {p}"
        )));
    }
    if lambda.is_zero() {
        return Ok(0.0);
    }
    if prior.family() == PriorFamily::Normal && p == 2.0 {
        let s = prior.dispersion();
        let l = lambda.to_array();
        let sq = l[0] * l[0] * 2.0 / (s * s)
            + l[1] * l[1] * 6.0 / s.powi(3)
            + l[2] * l[2] * 24.0 / s.powi(4);
        return Ok(sq.sqrt());
    }
    let basis = prior.perturbation_basis();
    let l = lambda.to_array();
    let integral = prior.expect(|_, t| {
        let v: f64 = basis
            .iter()
            .zip(&l)
            .map(|(q, c)| c * q.eval_variate(t))
            .sum();
        v.abs().powf(p)
    });
    Ok(integral.powf(1.0 / p))
}

/// `Psi(l) = phi(l) / xi(l)` without the feasibility check.
pub fn psi_unchecked(ctx: &PosteriorContext, lambda: PerturbationVector) -> f64 {
    phi(ctx, lambda) / ctx.xi(lambda)
}

/// Shift of the posterior mean, `E_l[mu] - E0[mu] = phi(l) / xi(l)`.
pub fn psi(ctx: &PosteriorContext, lambda: PerturbationVector) -> Result<f64> {
    let xi = ctx.checked_xi(lambda)?;
    Ok(phi(ctx, lambda) / xi)
}

pub fn psi_gradient(ctx: &PosteriorContext, lambda: PerturbationVector) -> Vec3 {
    let a = ctx.cov_all();
    let b = ctx.expect_q_all();
    let xi = ctx.xi(lambda);
    let f = lambda.dot(a);
    std::array::from_fn(|i| a[i] / xi - f * b[i] / (xi * xi))
}

pub fn psi_hessian(ctx: &PosteriorContext, lambda: PerturbationVector) -> Mat3 {
    let a = ctx.cov_all();
    let b = ctx.expect_q_all();
    let xi = ctx.xi(lambda);
    let f = lambda.dot(a);
    let xi2 = xi * xi;
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            -(a[i] * b[j] + b[i] * a[j]) / xi2 + 2.0 * f * b[i] * b[j] / (xi2 * xi)
        })
    })
}

/// `|Psi(l)| / sd0(mu)`
pub fn d_statistic(ctx: &PosteriorContext, lambda: PerturbationVector) -> Result<f64> {
    Ok(psi(ctx, lambda)?.abs() / ctx.post_sd())
}

/// Base predictive `N(mu_pi, v_pi + sigma^2)` at `y`.
pub fn base_predictive_density(ctx: &PosteriorContext, y: f64) -> f64 {
    normal_pdf(y, ctx.post_mean(), ctx.post_var() + ctx.lik_var())
}

/// `(E*_y[q_2], E*_y[q_3], E*_y[q_4])`, expectations under the posterior of
/// `mu` given one further observation `y`.
pub fn predictive_q_expectations(ctx: &PosteriorContext, y: f64) -> Vec3 {
    let (v, s2) = (ctx.post_var(), ctx.lik_var());
    let m = (v * y + s2 * ctx.post_mean()) / (v + s2);
    let var = v * s2 / (v + s2);
    std::array::from_fn(|i| {
        let q = ctx.q(i + 2).expect("index in range");
        poly_expectation_normal(q, m, var).expect("degree within moment table")
    })
}

/// Perturbed predictive `g0(y) (1 + sum l_j E*_y[q_j]) / xi(l)`.
pub fn predictive_density(
    ctx: &PosteriorContext,
    lambda: PerturbationVector,
    y: f64,
) -> Result<f64> {
    let xi = ctx.checked_xi(lambda)?;
    let c = predictive_q_expectations(ctx, y);
    Ok(base_predictive_density(ctx, y) * (1.0 + lambda.dot(c)) / xi)
}

/// Gauss–Hermite nodes of the base predictive with the per-node vectors
/// `c_k = E*_{y_k}[q]`, so that `D_KL` and its derivatives are cheap sums.
#[derive(Clone, Debug)]
pub struct PredictiveQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    c: Vec<Vec3>,
    b: Vec3,
}

impl PredictiveQuadrature {
    pub fn new(ctx: &PosteriorContext, rule: &QuadratureRule) -> Self {
        let (nodes, weights): (Vec<f64>, Vec<f64>) = rule
            .normal_nodes(ctx.post_mean(), ctx.post_var() + ctx.lik_var())
            .unzip();
        let c = nodes
            .iter()
            .map(|&y| predictive_q_expectations(ctx, y))
            .collect();
        Self {
            nodes,
            weights,
            c,
            b: ctx.expect_q_all(),
        }
    }

    pub fn with_nodes(ctx: &PosteriorContext, count: usize) -> Result<Self> {
        Ok(Self::new(ctx, &gauss_hermite(count)?))
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    /// `log xi(l) - sum_k w_k log(1 + c_k . l)`; no feasibility check and no clamping.
    pub fn kl_raw(&self, lambda: PerturbationVector) -> Result<f64> {
        let xi = 1.0 + lambda.dot(self.b);
        if xi <= 0.0 {
            return Err(Error::NonPositiveXi(xi));
        }
        let mut acc = 0.0;
        for ((&y, &w), c) in self.nodes.iter().zip(&self.weights).zip(&self.c) {
            let h = 1.0 + lambda.dot(*c);
            if h <= 0.0 {
                return Err(Error::NonPositivePredictive { node: y, value: h });
            }
            acc += w * h.ln();
        }
        Ok(xi.ln() - acc)
    }

    pub fn kl(&self, lambda: PerturbationVector) -> Result<f64> {
        let v = self.kl_raw(lambda)?;
        Ok(if (KL_CLAMP..0.0).contains(&v) { 0.0 } else { v })
    }

    pub fn kl_gradient(&self, lambda: PerturbationVector) -> Vec3 {
        let xi = 1.0 + lambda.dot(self.b);
        let mut g: Vec3 = std::array::from_fn(|i| self.b[i] / xi);
        for (&w, c) in self.weights.iter().zip(&self.c) {
            let h = 1.0 + lambda.dot(*c);
            for i in 0..3 {
                g[i] -= w * c[i] / h;
            }
        }
        g
    }

    pub fn kl_hessian(&self, lambda: PerturbationVector) -> Mat3 {
        let xi = 1.0 + lambda.dot(self.b);
        let b = self.b;
        let mut hm: Mat3 =
            std::array::from_fn(|i| std::array::from_fn(|j| -b[i] * b[j] / (xi * xi)));
        for (&w, c) in self.weights.iter().zip(&self.c) {
            let h = 1.0 + lambda.dot(*c);
            let f = w / (h * h);
            for i in 0..3 {
                for j in 0..3 {
                    hm[i][j] += f * c[i] * c[j];
                }
            }
        }
        hm
    }
}

/// `D_KL(g0 || g_l)` between the base and perturbed posterior predictives.
pub fn kl_divergence(
    ctx: &PosteriorContext,
    lambda: PerturbationVector,
    rule: &QuadratureRule,
) -> Result<f64> {
    ctx.checked_xi(lambda)?;
    PredictiveQuadrature::new(ctx, rule).kl(lambda)
}

/// `D_KL` with `count` nodes, confirmed against `2 * count` nodes.
pub fn kl_divergence_checked(
    ctx: &PosteriorContext,
    lambda: PerturbationVector,
    count: usize,
) -> Result<f64> {
    let coarse = kl_divergence(ctx, lambda, &gauss_hermite(count)?)?;
    let fine = kl_divergence(ctx, lambda, &gauss_hermite((2 * count).min(256))?)?;
    if (coarse - fine).abs() > KL_DOUBLING_TOL {
        return Err(Error::QuadratureMismatch { coarse, fine });
    }
    Ok(coarse)
}

/// All sensitivity measures at one perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub grad_phi: Vec3,
    pub lambda: PerturbationVector,
    pub feasibility: Feasibility,
    pub phi: f64,
    pub psi: f64,
    pub kl: f64,
    pub d: f64,
    pub norm_order: f64,
    pub size: f64,
    pub notes: Vec<String>,
}

impl SensitivityReport {
    /// Evaluate every measure at a feasible `lambda`; `D_KL` uses
    /// `quad_nodes` Gauss–Hermite nodes and the doubling check.
    pub fn evaluate(
        ctx: &PosteriorContext,
        lambda: PerturbationVector,
        quad_nodes: usize,
    ) -> Result<Self> {
        Self::evaluate_with_norm(ctx, lambda, quad_nodes, 2.0)
    }

    pub fn evaluate_with_norm(
        ctx: &PosteriorContext,
        lambda: PerturbationVector,
        quad_nodes: usize,
        norm_order: f64,
    ) -> Result<Self> {
        let check = ctx.region().require(lambda)?;
        let psi = psi(ctx, lambda)?;
        let mut notes = Vec::new();
        let kl = match kl_divergence_checked(ctx, lambda, quad_nodes) {
            Ok(v) => v,
            Err(Error::QuadratureMismatch { coarse, fine }) => {
                notes.push(format!(
                    "KL quadrature doubling disagreement: {quad_nodes} nodes {coarse:e}, doubled {fine:e}"
                ));
                fine
            }
            Err(e) => return Err(e),
        };
        if check.status == Feasibility::Boundary {
            notes.push("perturbation lies on the feasibility boundary".into());
        }
        Ok(Self {
            grad_phi: grad_phi(ctx),
            lambda,
            feasibility: check.status,
            phi: phi(ctx, lambda),
            psi,
            kl,
            d: psi.abs() / ctx.post_sd(),
            norm_order,
            size: size_norm(ctx.prior(), lambda, norm_order)?,
            notes,
        })
    }

    pub fn at_default_nodes(ctx: &PosteriorContext, lambda: PerturbationVector) -> Result<Self> {
        Self::evaluate(ctx, lambda, DEFAULT_HERMITE_NODES)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    fn example_ctx() -> PosteriorContext {
        let prior = NefPrior::normal(2.0, 1.0).unwrap();
        PosteriorContext::from_summary(&prior, 1.0, 15, 1.0).unwrap()
    }

    const L: PerturbationVector = PerturbationVector::new(0.1, 0.0, 0.0);

    #[test]
    fn phi_examples() {
        let ctx = example_ctx();
        assert_eq!(phi(&ctx, PerturbationVector::ZERO), 0.0);
        assert!((phi(&ctx, PerturbationVector::new(1.0, 0.0, 0.0)) + 0.1171875).abs() < 1e-14);
    }

    #[test]
    fn psi_and_d_examples() {
        let ctx = example_ctx();
        let want = -0.01171875 / 0.994140625;
        assert!((psi(&ctx, L).unwrap() - want).abs() < 1e-14);
        assert!((d_statistic(&ctx, L).unwrap() - want.abs() / 0.25).abs() < 1e-14);
        let m1 = ctx.perturbed_moment(L, 1).unwrap();
        assert!((psi(&ctx, L).unwrap() - (m1 - ctx.post_mean())).abs() < 1e-14);
        assert!(psi(&ctx, PerturbationVector::new(0.0, 0.0, -0.1)).is_err());
    }

    #[test]
    fn size_norm_examples() {
        let p = NefPrior::normal(0.0, 1.0).unwrap();
        let l = PerturbationVector::new(1.0, 0.0, 0.0);
        assert!((size_norm(&p, l, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        // quadrature path agrees with the Gram form
        let l = PerturbationVector::new(0.3, -0.2, 0.1);
        let q = size_norm(&p, l, 2.000_000_000_1).unwrap();
        assert!((q - size_norm(&p, l, 2.0).unwrap()).abs() < 1e-8);
        assert!(size_norm(&p, l, 0.5).is_err());
    }

    #[test]
    fn predictive_normalises_and_reduces() {
        let ctx = example_ctx();
        let y = 0.3;
        let base = predictive_density(&ctx, PerturbationVector::ZERO, y).unwrap();
        assert!((base - base_predictive_density(&ctx, y)).abs() < 1e-15);
        let lam = PerturbationVector::new(0.4, 0.05, 0.2);
        let total = integrate(
            |y| predictive_density(&ctx, lam, y).unwrap(),
            -15.0,
            17.0,
            200,
        );
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kl_derivatives_match_differences() {
        let ctx = example_ctx();
        let pq = PredictiveQuadrature::with_nodes(&ctx, 64).unwrap();
        let lam = PerturbationVector::new(0.5, -0.02, 0.2);
        let g = pq.kl_gradient(lam);
        let hm = pq.kl_hessian(lam);
        let h = 1e-5;
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = h;
            let e = PerturbationVector::from_array(e);
            let fd = (pq.kl_raw(lam + e).unwrap() - pq.kl_raw(lam - e).unwrap()) / (2.0 * h);
            assert!(
                (fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()),
                "{i}: {fd} vs {}",
                g[i]
            );
            let gp = pq.kl_gradient(lam + e);
            let gm = pq.kl_gradient(lam - e);
            for j in 0..3 {
                let fd = (gp[j] - gm[j]) / (2.0 * h);
                assert!((fd - hm[j][i]).abs() < 1e-6 * (1.0 + hm[j][i].abs()));
            }
        }
        assert_eq!(pq.kl(PerturbationVector::ZERO).unwrap(), 0.0);
    }

    #[test]
    fn psi_derivatives_match_differences() {
        let ctx = example_ctx();
        let lam = PerturbationVector::new(0.7, 0.03, 0.3);
        let g = psi_gradient(&ctx, lam);
        let hm = psi_hessian(&ctx, lam);
        let h = 1e-5;
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = h;
            let e = PerturbationVector::from_array(e);
            let fd = (psi_unchecked(&ctx, lam + e) - psi_unchecked(&ctx, lam - e)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
            let gp = psi_gradient(&ctx, lam + e);
            let gm = psi_gradient(&ctx, lam - e);
            for j in 0..3 {
                assert!(((gp[j] - gm[j]) / (2.0 * h) - hm[j][i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn report_is_zero_at_origin() {
        let ctx = example_ctx();
        let r = SensitivityReport::at_default_nodes(&ctx, PerturbationVector::ZERO).unwrap();
        assert_eq!((r.phi, r.psi, r.kl, r.d, r.size), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.feasibility, Feasibility::Interior);
    }
}
