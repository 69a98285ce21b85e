//! Mean-parameterised prior families and their density-derivative ratios.
//!
//! For a prior `pi0(mu; m)` indexed by its mean `m`, the q-functions are
//! `q_j = (d^j pi0 / dm^j) / pi0`. With `l_i = d^i log pi0 / dm^i` they obey
//! `q_1 = l_1` and `q_{j+1} = D q_j + q_j l_1`, where `D l_i = l_{i+1}`.
//! Every `l_i` is a polynomial of degree at most one in the family's natural
//! variate (the value itself for normal and gamma, `logit(rho)` for beta), so
//! each `q_j` is a polynomial of degree `j` in that variate.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{integrate, polygamma, Polynomial};

/// Highest perturbation order used anywhere in the crate.
pub const MAX_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    /// `N(mean, dispersion)`
    Normal,
    /// Gamma with shape `dispersion` and rate `dispersion / mean`.
    GammaByMean,
    /// Beta with `alpha = mean * dispersion`, `beta = (1 - mean) * dispersion`.
    BetaByMean,
}

impl PriorFamily {
    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::Normal => "normal",
            PriorFamily::GammaByMean => "gamma",
            PriorFamily::BetaByMean => "beta",
        }
    }
}

/// Coordinate in which the q-functions are polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variate {
    Identity,
    Logit,
}

impl Variate {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Variate::Identity => x,
            Variate::Logit => (x / (1.0 - x)).ln(),
        }
    }
}

/// A natural-exponential-family prior in its mean parameterisation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NefPrior {
    family: PriorFamily,
    mean: f64,
    dispersion: f64,
}

impl NefPrior {
    pub fn new(family: PriorFamily, mean: f64, dispersion: f64) -> Result<Self> {
        if !(dispersion > 0.0 && dispersion.is_finite()) {
            return Err(Error::InvalidPrior(format!(
                "dispersion must be positive and finite, got {dispersion}"
            )));
        }
        if !mean.is_finite() {
            return Err(Error::InvalidPrior(format!(
                "mean must be finite, got {mean}"
            )));
        }
        match family {
            PriorFamily::GammaByMean if mean <= 0.0 => {
                return Err(Error::InvalidPrior(format!(
                    "gamma mean must be positive, got {mean}"
                )))
            }
            PriorFamily::BetaByMean if !(mean > 0.0 && mean < 1.0) => {
                return Err(Error::InvalidPrior(format!(
                    "beta mean must lie in (0, 1), got {mean}"
                )))
            }
            _ => {}
        }
        Ok(Self {
            family,
            mean,
            dispersion,
        })
    }

    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        Self::new(PriorFamily::Normal, mean, variance)
    }

    pub fn gamma_by_mean(mean: f64, shape: f64) -> Result<Self> {
        Self::new(PriorFamily::GammaByMean, mean, shape)
    }

    /// Gamma with the given shape and rate.
    pub fn gamma_shape_rate(shape: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidPrior(format!(
                "gamma rate must be positive, got {rate}"
            )));
        }
        Self::gamma_by_mean(shape / rate, shape)
    }

    pub fn beta_by_mean(mean: f64, concentration: f64) -> Result<Self> {
        Self::new(PriorFamily::BetaByMean, mean, concentration)
    }

    /// Beta(alpha, beta).
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::InvalidPrior(format!(
                "beta parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Self::beta_by_mean(alpha / (alpha + beta), alpha + beta)
    }

    pub fn family(&self) -> PriorFamily {
        self.family
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    /// Same family and dispersion, different mean.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        Self::new(self.family, mean, self.dispersion)
    }

    pub fn variate(&self) -> Variate {
        match self.family {
            PriorFamily::BetaByMean => Variate::Logit,
            _ => Variate::Identity,
        }
    }

    /// Lower end of the variate's range (`Some(0)` for gamma), `None` for the real line.
    pub fn variate_lower_bound(&self) -> Option<f64> {
        match self.family {
            PriorFamily::GammaByMean => Some(0.0),
            _ => None,
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        match self.family {
            PriorFamily::Normal => x.is_finite(),
            PriorFamily::GammaByMean => x > 0.0 && x.is_finite(),
            PriorFamily::BetaByMean => x > 0.0 && x < 1.0,
        }
    }

    fn check_support(&self, x: f64) -> Result<()> {
        if self.in_support(x) {
            Ok(())
        } else {
            Err(Error::OutsideSupport {
                family: self.family.name(),
                value: x,
            })
        }
    }

    /// Variate value of a support point.
    pub fn to_variate(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(self.variate().apply(x))
    }

    pub fn ln_density(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        let (m, s) = (self.mean, self.dispersion);
        Ok(match self.family {
            PriorFamily::Normal => -0.5 * (2.0 * PI * s).ln() - (x - m).powi(2) / (2.0 * s),
            PriorFamily::GammaByMean => {
                s * (s / m).ln() + (s - 1.0) * x.ln() - s * x / m - ln_gamma(s)
            }
            PriorFamily::BetaByMean => {
                let (a, b) = (m * s, (1.0 - m) * s);
                (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)
            }
        })
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.ln_density(x)?.exp())
    }

    /// `l_1 ..= l_4`, the mean-derivatives of the log density, as polynomials in the variate.
    pub fn log_derivatives(&self) -> [Polynomial; MAX_ORDER] {
        let (m, s) = (self.mean, self.dispersion);
        match self.family {
            PriorFamily::Normal => [
                Polynomial::linear(-m / s, 1.0 / s),
                Polynomial::constant(-1.0 / s),
                Polynomial::zero(),
                Polynomial::zero(),
            ],
            PriorFamily::GammaByMean => std::array::from_fn(|idx| {
                // l_i = (-1)^i (i-1)! k / m^i + (-1)^(i+1) i! k x / m^(i+1)
                let i = idx as i32 + 1;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                let fact_im1: f64 = (1..i).map(f64::from).product();
                let fact_i = fact_im1 * f64::from(i);
                Polynomial::linear(
                    sign * fact_im1 * s / m.powi(i),
                    -sign * fact_i * s / m.powi(i + 1),
                )
            }),
            PriorFamily::BetaByMean => {
                let (a, b) = (m * s, (1.0 - m) * s);
                let shift = polygamma(0, a) - polygamma(0, b);
                std::array::from_fn(|idx| {
                    let i = idx as i32 + 1;
                    if i == 1 {
                        Polynomial::linear(-s * shift, s)
                    } else {
                        // -s^i [psi^(i-1)(a) - (-1)^(i-1) psi^(i-1)(b)]
                        let order = (i - 1) as u32;
                        let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
                        Polynomial::constant(
                            -s.powi(i) * (polygamma(order, a) - sign * polygamma(order, b)),
                        )
                    }
                })
            }
        }
    }

    /// `q_j` for `1 <= j <= 4`; closed form for the normal family, recursion otherwise.
    pub fn q_function(&self, j: usize) -> Result<QFunction> {
        check_index(j)?;
        match self.family {
            PriorFamily::Normal => Ok(QFunction {
                index: j,
                poly: normal_q_closed_form(self.mean, self.dispersion, j),
                variate: Variate::Identity,
            }),
            _ => self.q_by_recursion(j),
        }
    }

    /// `q_j` generated by `q_{j+1} = dq_j/dm + q_j q_1` for every family.
    pub fn q_by_recursion(&self, j: usize) -> Result<QFunction> {
        check_index(j)?;
        let jet = bell_jet(j);
        let ell = self.log_derivatives();
        let mut poly = Polynomial::zero();
        for (exps, coef) in &jet {
            let mut term = Polynomial::constant(*coef);
            for (i, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    term = &term * &ell[i];
                }
            }
            poly = &poly + &term;
        }
        Ok(QFunction {
            index: j,
            poly,
            variate: self.variate(),
        })
    }

    /// The perturbation polynomials `q_2, q_3, q_4`.
    pub fn perturbation_basis(&self) -> [QFunction; 3] {
        std::array::from_fn(|i| self.q_function(i + 2).expect("index in range"))
    }

    /// `E[f(x, variate(x))]` under the prior by composite Gauss–Legendre in a
    /// coordinate where the density is smooth with exponential tails.
    pub fn expect<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let (m, s) = (self.mean, self.dispersion);
        match self.family {
            PriorFamily::Normal => {
                let sd = s.sqrt();
                integrate(
                    |x| {
                        let dens = (-(x - m).powi(2) / (2.0 * s)).exp() / (2.0 * PI * s).sqrt();
                        if dens == 0.0 {
                            0.0
                        } else {
                            dens * f(x, x)
                        }
                    },
                    m - 40.0 * sd,
                    m + 40.0 * sd,
                    800,
                )
            }
            PriorFamily::GammaByMean => {
                let lo = m.ln() - 60.0 / s - 5.0;
                let hi = m.ln() + (3.0 + 100.0 / s).ln() + 1.0;
                let norm = s * (s / m).ln() - ln_gamma(s);
                integrate(
                    |u| {
                        let x = u.exp();
                        let ln_w = norm + s * u - s * x / m;
                        let w = ln_w.exp();
                        if w == 0.0 {
                            0.0
                        } else {
                            w * f(x, x)
                        }
                    },
                    lo,
                    hi,
                    1200,
                )
            }
            PriorFamily::BetaByMean => {
                let (a, b) = (m * s, (1.0 - m) * s);
                let centre = (m / (1.0 - m)).ln();
                let lo = centre - 60.0 / a - 5.0;
                let hi = centre + 60.0 / b + 5.0;
                let norm = -ln_beta(a, b);
                integrate(
                    |t| {
                        let ln_rho = -softplus(-t);
                        let ln_1m = -softplus(t);
                        let w = (norm + a * ln_rho + b * ln_1m).exp();
                        if w == 0.0 {
                            0.0
                        } else {
                            w * f(ln_rho.exp(), t)
                        }
                    },
                    lo,
                    hi,
                    1200,
                )
            }
        }
    }
}

fn check_index(j: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&j) {
        Ok(())
    } else {
        Err(Error::QIndex(j))
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `q_j` of `N(theta, s)` with `z = (mu - theta) / s`:
/// `z`, `z^2 - 1/s`, `z^3 - 3z/s`, `z^4 - 6z^2/s + 3/s^2`.
pub fn normal_q_closed_form(theta: f64, s: f64, j: usize) -> Polynomial {
    let in_z = normal_q_in_z(s, j);
    in_z.compose_linear(-theta / s, 1.0 / s)
}

/// The normal-family `q_j` written in the standardised coordinate `z`.
pub fn normal_q_in_z(s: f64, j: usize) -> Polynomial {
    match j {
        1 => Polynomial::new(vec![0.0, 1.0]),
        2 => Polynomial::new(vec![-1.0 / s, 0.0, 1.0]),
        3 => Polynomial::new(vec![0.0, -3.0 / s, 0.0, 1.0]),
        4 => Polynomial::new(vec![3.0 / (s * s), 0.0, -6.0 / s, 0.0, 1.0]),
        _ => Polynomial::zero(),
    }
}

/// Polynomial in `l_1..l_5` (exponent vectors) equal to `q_j`.
type Jet = BTreeMap<[u8; 5], f64>;

fn bell_jet(j: usize) -> Jet {
    let l1: [u8; 5] = [1, 0, 0, 0, 0];
    let mut q: Jet = BTreeMap::from([(l1, 1.0)]);
    for _ in 1..j {
        let mut next: Jet = BTreeMap::new();
        for (exps, &c) in &q {
            // D(term): product rule with D l_i = l_{i+1}
            for i in 0..4 {
                if exps[i] == 0 {
                    continue;
                }
                let mut e = *exps;
                e[i] -= 1;
                e[i + 1] += 1;
                *next.entry(e).or_insert(0.0) += c * f64::from(exps[i]);
            }
            // term * l_1
            let mut e = *exps;
            e[0] += 1;
            *next.entry(e).or_insert(0.0) += c;
        }
        q = next;
    }
    q
}

/// A q-function together with the variate it is polynomial in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QFunction {
    index: usize,
    poly: Polynomial,
    variate: Variate,
}

impl QFunction {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Coefficients in the variate.
    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn variate(&self) -> Variate {
        self.variate
    }

    /// Value at a support point.
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(self.variate.apply(x))
    }

    /// Value at a variate coordinate.
    pub fn eval_variate(&self, t: f64) -> f64 {
        self.poly.eval(t)
    }
}

/// `int q_1 q_j pi0`, which vanishes for every supported family.
pub fn score_orthogonality_check(prior: &NefPrior, j: usize) -> Result<f64> {
    if !(2..=MAX_ORDER).contains(&j) {
        return Err(Error::QIndex(j));
    }
    let q1 = prior.q_function(1)?;
    let qj = prior.q_function(j)?;
    Ok(prior.expect(|_, t| q1.eval_variate(t) * qj.eval_variate(t)))
}
