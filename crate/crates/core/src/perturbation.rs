//! The perturbed prior `pi0 (1 + l2 q2 + l3 q3 + l4 q4)` and its feasible region.
//!
//! A perturbation is feasible when the bracket is nonnegative on the whole
//! support. The bracket is a quartic in the family's variate, so membership is
//! decided exactly from its global minimum. For the normal family the quartic
//! is written in `z = (mu - theta) / s`, where its boundary has the smooth
//! chart `(z, l4) -> (l2, l3, l4)` obtained from `P(z) = P'(z) = 0`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{poly_min, Polynomial};
use crate::prior::{normal_q_in_z, NefPrior, PriorFamily};

/// Default half-width of the boundary band on the quartic minimum.
pub const DEFAULT_MARGIN: f64 = 1e-9;

/// Coordinates `(l2, l3, l4)` of a local-mixture perturbation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationVector {
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl PerturbationVector {
    pub const ZERO: Self = Self {
        l2: 0.0,
        l3: 0.0,
        l4: 0.0,
    };

    pub const fn new(l2: f64, l3: f64, l4: f64) -> Self {
        Self { l2, l3, l4 }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.l2, self.l3, self.l4]
    }

    pub fn dot(self, other: [f64; 3]) -> f64 {
        self.l2 * other[0] + self.l3 * other[1] + self.l4 * other[2]
    }

    pub fn norm(self) -> f64 {
        self.dot(self.to_array()).sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.l2 == 0.0 && self.l3 == 0.0 && self.l4 == 0.0
    }
}

impl Add for PerturbationVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.l2 + o.l2, self.l3 + o.l3, self.l4 + o.l4)
    }
}

impl Sub for PerturbationVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.l2 - o.l2, self.l3 - o.l3, self.l4 - o.l4)
    }
}

impl Mul<PerturbationVector> for f64 {
    type Output = PerturbationVector;
    fn mul(self, v: PerturbationVector) -> PerturbationVector {
        PerturbationVector::new(self * v.l2, self * v.l3, self * v.l4)
    }
}

impl fmt::Display for PerturbationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.l2, self.l3, self.l4)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    Interior,
    Boundary,
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(self) -> bool {
        self != Feasibility::Infeasible
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Feasibility::Interior => "interior",
            Feasibility::Boundary => "boundary",
            Feasibility::Infeasible => "infeasible",
        })
    }
}

/// Outcome of the exact membership test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCheck {
    pub status: Feasibility,
    /// Global minimum of the bracket; `-inf` when unbounded below.
    pub min_value: f64,
    /// Where the minimum is attained, in `z` (normal) or the family variate.
    pub argmin: Option<f64>,
}

/// The set of feasible perturbations for one prior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibleRegion {
    prior: NefPrior,
    margin: f64,
    symmetric: bool,
}

impl FeasibleRegion {
    pub fn new(prior: NefPrior) -> Self {
        Self {
            prior,
            margin: DEFAULT_MARGIN,
            symmetric: false,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin.abs();
        self
    }

    /// Cross-section `l3 = 0` (perturbed priors with zero skewness).
    pub fn restrict_symmetric(&self) -> Self {
        Self {
            symmetric: true,
            ..*self
        }
    }

    pub fn is_restricted(&self) -> bool {
        self.symmetric
    }

    pub fn prior(&self) -> &NefPrior {
        &self.prior
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// The bracket `1 + sum l_j q_j` as a polynomial in the test coordinate
    /// (`z` for normal priors, the family variate otherwise).
    pub fn bracket(&self, lambda: PerturbationVector) -> Polynomial {
        match self.prior.family() {
            PriorFamily::Normal => quartic_in_z(self.prior.dispersion(), lambda),
            _ => {
                let basis = self.prior.perturbation_basis();
                let mut p = Polynomial::constant(1.0);
                for (q, l) in basis.iter().zip(lambda.to_array()) {
                    p = &p + &q.poly().scale(l);
                }
                p
            }
        }
    }

    pub fn classify(&self, lambda: PerturbationVector) -> Result<FeasibilityCheck> {
        if self.symmetric && lambda.l3 != 0.0 {
            return Err(Error::OutsideRestriction(lambda.l3));
        }
        let m = poly_min(&self.bracket(lambda), self.prior.variate_lower_bound());
        let status = if m.value > self.margin {
            Feasibility::Interior
        } else if m.value >= -self.margin {
            Feasibility::Boundary
        } else {
            Feasibility::Infeasible
        };
        Ok(FeasibilityCheck {
            status,
            min_value: m.value,
            argmin: m.argmin,
        })
    }

    pub fn is_feasible(&self, lambda: PerturbationVector) -> Result<Feasibility> {
        Ok(self.classify(lambda)?.status)
    }

    /// Membership; points off the symmetric cross-section are not contained.
    pub fn contains(&self, lambda: PerturbationVector) -> bool {
        self.classify(lambda)
            .map(|c| c.status.is_feasible())
            .unwrap_or(false)
    }

    pub fn require(&self, lambda: PerturbationVector) -> Result<FeasibilityCheck> {
        let c = self.classify(lambda)?;
        if c.status.is_feasible() {
            Ok(c)
        } else {
            Err(Error::Infeasible {
                l2: lambda.l2,
                l3: lambda.l3,
                l4: lambda.l4,
            })
        }
    }

    /// Largest `alpha >= 0` with `origin + alpha * direction` feasible, by
    /// bisection on the exact membership test (tolerance 1e-10 in `alpha`).
    pub fn ray_from(
        &self,
        origin: PerturbationVector,
        direction: PerturbationVector,
    ) -> Result<RayHit> {
        if direction.is_zero() {
            return Err(Error::ZeroDirection);
        }
        if self.symmetric && direction.l3 != 0.0 {
            return Err(Error::OutsideRestriction(direction.l3));
        }
        self.require(origin)?;
        let inside = |a: f64| self.contains(origin + a * direction);
        let (mut lo, mut hi) = (0.0, 1.0);
        while inside(hi) {
            lo = hi;
            hi *= 2.0;
            if hi > RAY_CAP {
                return Ok(RayHit {
                    alpha_max: f64::INFINITY,
                    boundary: None,
                });
            }
        }
        while hi - lo > 1e-10 * lo.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(RayHit {
            alpha_max: lo,
            boundary: Some(origin + lo * direction),
        })
    }
}

const RAY_CAP: f64 = 1e6;

/// Exit point of a ray through the feasible region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    /// `inf` if the ray stayed feasible up to the search cap.
    pub alpha_max: f64,
    pub boundary: Option<PerturbationVector>,
}

impl RayHit {
    pub fn is_unbounded(&self) -> bool {
        self.alpha_max.is_infinite()
    }
}

/// Exit point of the ray from `0` along `direction`.
pub fn ray_to_boundary(region: &FeasibleRegion, direction: PerturbationVector) -> Result<RayHit> {
    region.ray_from(PerturbationVector::ZERO, direction)
}

fn quartic_in_z(s: f64, lambda: PerturbationVector) -> Polynomial {
    let mut p = Polynomial::constant(1.0);
    for (j, l) in [(2, lambda.l2), (3, lambda.l3), (4, lambda.l4)] {
        p = &p + &normal_q_in_z(s, j).scale(l);
    }
    p
}

fn require_normal(prior: &NefPrior) -> Result<()> {
    match prior.family() {
        PriorFamily::Normal => Ok(()),
        f => Err(Error::UnsupportedFamily(f.name())),
    }
}

/// `pi0(x) (1 + l2 q2(x) + l3 q3(x) + l4 q4(x))`; negative values are reported as-is.
pub fn perturbed_prior_density(
    prior: &NefPrior,
    lambda: PerturbationVector,
    x: f64,
) -> Result<f64> {
    let base = prior.density(x)?;
    let t = prior.to_variate(x)?;
    let basis = prior.perturbation_basis();
    let bracket = 1.0
        + basis
            .iter()
            .zip(lambda.to_array())
            .map(|(q, l)| l * q.eval_variate(t))
            .sum::<f64>();
    Ok(base * bracket)
}

/// Central moments `(m2, m3, m4)` of a perturbed normal prior.
pub fn prior_central_moments(
    prior: &NefPrior,
    lambda: PerturbationVector,
) -> Result<(f64, f64, f64)> {
    require_normal(prior)?;
    let s = prior.dispersion();
    Ok((
        s + 2.0 * lambda.l2,
        6.0 * lambda.l3,
        3.0 * s * s + 12.0 * s * lambda.l2 + 24.0 * lambda.l4,
    ))
}

/// `P(z) = (z^2 - 1/s) l2 + (z^3 - 3z/s) l3 + (z^4 - 6z^2/s + 3/s^2) l4 + 1`.
pub fn boundary_quartic(prior: &NefPrior, lambda: PerturbationVector) -> Result<Polynomial> {
    require_normal(prior)?;
    Ok(quartic_in_z(prior.dispersion(), lambda))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartValidity {
    OnBoundary,
    /// `P` touches zero at `z` but is negative elsewhere.
    TangentButInfeasible,
}

/// Image of a chart coordinate on the tangency surface `P(z) = P'(z) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryChartPoint {
    pub z: f64,
    pub lambda4: f64,
    pub lambda: PerturbationVector,
    pub validity: ChartValidity,
}

const SINGULAR_DET: f64 = 1e-12;

fn solve2(a: [[f64; 2]; 2], rhs: [f64; 2], z: f64) -> Result<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < SINGULAR_DET {
        return Err(Error::SingularChart { z, det });
    }
    Ok([
        (rhs[0] * a[1][1] - a[0][1] * rhs[1]) / det,
        (a[0][0] * rhs[1] - rhs[0] * a[1][0]) / det,
    ])
}

fn chart_validity(prior: &NefPrior, lambda: PerturbationVector) -> ChartValidity {
    if FeasibleRegion::new(*prior).contains(lambda) {
        ChartValidity::OnBoundary
    } else {
        ChartValidity::TangentButInfeasible
    }
}

/// Solve `P(z) = 0`, `P'(z) = 0` for `(l2, l3)` at fixed `(z, l4)`.
///
/// With `s = 1` this reproduces `l2 = (l4 (z^6 - 3z^4 + 9z^2 + 9) - 3z^2 + 3) / (z^4 + 3)`
/// and `l3 = 2z (1 - (z^4 - 2z^2 + 3) l4) / (z^4 + 3)`.
pub fn boundary_point(prior: &NefPrior, z: f64, lambda4: f64) -> Result<BoundaryChartPoint> {
    require_normal(prior)?;
    let s = prior.dispersion();
    let q: [Polynomial; 3] = std::array::from_fn(|i| normal_q_in_z(s, i + 2));
    let d: [Polynomial; 3] = std::array::from_fn(|i| q[i].derivative());
    let [l2, l3] = solve2(
        [[q[0].eval(z), q[1].eval(z)], [d[0].eval(z), d[1].eval(z)]],
        [-1.0 - lambda4 * q[2].eval(z), -lambda4 * d[2].eval(z)],
        z,
    )?;
    let lambda = PerturbationVector::new(l2, l3, lambda4);
    Ok(BoundaryChartPoint {
        z,
        lambda4,
        lambda,
        validity: chart_validity(prior, lambda),
    })
}

/// Tangency point inside the `l3 = 0` cross-section: solves `P(z) = P'(z) = 0`
/// for `(l2, l4)`. Singular at `z = 0`, where the cross-section boundary is
/// the face `boundary_point(prior, 0, l4)`.
pub fn symmetric_boundary_point(prior: &NefPrior, z: f64) -> Result<BoundaryChartPoint> {
    require_normal(prior)?;
    let s = prior.dispersion();
    let q2 = normal_q_in_z(s, 2);
    let q4 = normal_q_in_z(s, 4);
    let [l2, l4] = solve2(
        [
            [q2.eval(z), q4.eval(z)],
            [q2.derivative().eval(z), q4.derivative().eval(z)],
        ],
        [-1.0, 0.0],
        z,
    )?;
    let lambda = PerturbationVector::new(l2, 0.0, l4);
    Ok(BoundaryChartPoint {
        z,
        lambda4: l4,
        lambda,
        validity: chart_validity(prior, lambda),
    })
}

/// Point on the skew ridge of the boundary, where the bracket is
/// `l4 (u^2 - p u - 3)^2` in the standardised coordinate `u = z sqrt(s)`, so
/// it vanishes doubly at two places whose `u`-product is `-3`.
///
/// Together with the symmetric curve (`l3 = 0`) these are the only ways the
/// bracket can touch zero twice.
pub fn skew_ridge_point(prior: &NefPrior, p: f64) -> Result<BoundaryChartPoint> {
    require_normal(prior)?;
    let s = prior.dispersion();
    let k4 = 1.0 / (p * p + 6.0);
    let lambda = PerturbationVector::new(p * p * k4 * s, -2.0 * p * k4 * s.powf(1.5), k4 * s * s);
    let u = 0.5 * (p - (p * p + 12.0).sqrt());
    Ok(BoundaryChartPoint {
        z: u / s.sqrt(),
        lambda4: lambda.l4,
        lambda,
        validity: chart_validity(prior, lambda),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal() -> NefPrior {
        NefPrior::normal(0.0, 1.0).unwrap()
    }

    #[test]
    fn density_examples() {
        let p = std_normal();
        let base = p.density(0.4).unwrap();
        assert_eq!(
            perturbed_prior_density(&p, PerturbationVector::ZERO, 0.4).unwrap(),
            base
        );
        let v = perturbed_prior_density(&p, PerturbationVector::new(0.0, 0.0, 0.1), 0.0).unwrap();
        assert!((v - 0.398_942_280_401_432_7 * 1.3).abs() < 1e-15);
        let v = perturbed_prior_density(&p, PerturbationVector::new(1.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn central_moment_examples() {
        let p = std_normal();
        assert_eq!(
            prior_central_moments(&p, PerturbationVector::ZERO).unwrap(),
            (1.0, 0.0, 3.0)
        );
        assert_eq!(
            prior_central_moments(&p, PerturbationVector::new(0.5, 0.0, 0.0))
                .unwrap()
                .0,
            2.0
        );
        assert_eq!(
            prior_central_moments(&p, PerturbationVector::new(0.0, 0.0, 0.25))
                .unwrap()
                .2,
            9.0
        );
        let g = NefPrior::gamma_by_mean(1.0, 2.0).unwrap();
        assert_eq!(
            prior_central_moments(&g, PerturbationVector::ZERO),
            Err(Error::UnsupportedFamily("gamma"))
        );
    }

    #[test]
    fn quartic_examples() {
        let p = std_normal();
        assert_eq!(
            boundary_quartic(&p, PerturbationVector::ZERO)
                .unwrap()
                .coeffs(),
            &[1.0]
        );
        let q = boundary_quartic(&p, PerturbationVector::new(2.0, 0.0, 0.5)).unwrap();
        assert_eq!(q.coeffs(), &[0.5, 0.0, -1.0, 0.0, 0.5]);
        let q = boundary_quartic(&p, PerturbationVector::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(q.coeffs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn feasibility_examples() {
        let r = FeasibleRegion::new(std_normal());
        assert_eq!(
            r.is_feasible(PerturbationVector::ZERO).unwrap(),
            Feasibility::Interior
        );
        assert_eq!(
            r.is_feasible(PerturbationVector::new(0.0, 0.0, -0.01))
                .unwrap(),
            Feasibility::Infeasible
        );
        assert_eq!(
            r.is_feasible(PerturbationVector::new(2.0, 0.0, 0.5))
                .unwrap(),
            Feasibility::Boundary
        );
    }

    #[test]
    fn zero_lambda4_sliver() {
        let r = FeasibleRegion::new(std_normal());
        assert!(r.contains(PerturbationVector::new(0.5, 0.0, 0.0)));
        assert_eq!(
            r.is_feasible(PerturbationVector::new(1.0, 0.0, 0.0))
                .unwrap(),
            Feasibility::Boundary
        );
        assert!(!r.contains(PerturbationVector::new(1.1, 0.0, 0.0)));
        assert!(!r.contains(PerturbationVector::new(-0.1, 0.0, 0.0)));
        assert!(!r.contains(PerturbationVector::new(0.5, 1e-6, 0.0)));
    }

    #[test]
    fn chart_examples() {
        let p = std_normal();
        let a = boundary_point(&p, 0.0, 0.1).unwrap();
        assert!((a.lambda.l2 - 1.3).abs() < 1e-12 && a.lambda.l3 == 0.0);
        assert_eq!(a.validity, ChartValidity::OnBoundary);
        let b = boundary_point(&p, 1.0, 0.5).unwrap();
        assert!((b.lambda.l2 - 2.0).abs() < 1e-12 && b.lambda.l3.abs() < 1e-12);
        assert_eq!(b.validity, ChartValidity::OnBoundary);
        let c = boundary_point(&p, 1.0, 0.0).unwrap();
        assert!(c.lambda.l2.abs() < 1e-12 && (c.lambda.l3 - 0.5).abs() < 1e-12);
        assert_eq!(c.validity, ChartValidity::TangentButInfeasible);
    }

    #[test]
    fn chart_matches_unit_variance_closed_form() {
        let p = std_normal();
        for &z in &[-2.3, -0.7, 0.0, 0.4, 1.9] {
            for &l4 in &[0.0, 0.05, 0.3, 0.9] {
                let pt = boundary_point(&p, z, l4).unwrap();
                let z2 = z * z;
                let den = z2 * z2 + 3.0;
                let l2 =
                    (l4 * (z2 * z2 * z2 - 3.0 * z2 * z2 + 9.0 * z2 + 9.0) - 3.0 * z2 + 3.0) / den;
                let l3 = 2.0 * z * (1.0 - (z2 * z2 - 2.0 * z2 + 3.0) * l4) / den;
                assert!((pt.lambda.l2 - l2).abs() < 1e-12);
                assert!((pt.lambda.l3 - l3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_chart() {
        let p = std_normal();
        assert!(matches!(
            symmetric_boundary_point(&p, 0.0),
            Err(Error::SingularChart { .. })
        ));
        let pt = symmetric_boundary_point(&p, 1.0).unwrap();
        assert_eq!(pt.lambda.l3, 0.0);
        assert!((pt.lambda.l2 - 2.0).abs() < 1e-12 && (pt.lambda.l4 - 0.5).abs() < 1e-12);
        let quartic = boundary_quartic(&p, pt.lambda).unwrap();
        assert!(quartic.eval(1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_examples() {
        let r = FeasibleRegion::new(std_normal());
        let hit = ray_to_boundary(&r, PerturbationVector::new(1.0, 0.0, 0.0)).unwrap();
        assert!((hit.alpha_max - 1.0).abs() < 1e-8);
        // z^4 - 6 z^2 + 3 bottoms out at -6, so the l4 axis exits at 1/6
        let hit = ray_to_boundary(&r, PerturbationVector::new(0.0, 0.0, 1.0)).unwrap();
        assert!((hit.alpha_max - 1.0 / 6.0).abs() < 1e-8);
        let hit = ray_to_boundary(&r, PerturbationVector::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(hit.alpha_max, 0.0);
        assert_eq!(
            ray_to_boundary(&r, PerturbationVector::ZERO),
            Err(Error::ZeroDirection)
        );
    }

    #[test]
    fn restriction() {
        let full = FeasibleRegion::new(std_normal());
        let sym = full.restrict_symmetric();
        let l = PerturbationVector::new(1.837, 0.0, 0.494);
        assert_eq!(sym.is_feasible(l).unwrap(), full.is_feasible(l).unwrap());
        assert_eq!(
            sym.is_feasible(PerturbationVector::new(0.1, 0.2, 0.3)),
            Err(Error::OutsideRestriction(0.2))
        );
        assert_eq!(
            sym.is_feasible(PerturbationVector::ZERO).unwrap(),
            Feasibility::Interior
        );
    }

    #[test]
    fn gamma_and_beta_regions() {
        let g = FeasibleRegion::new(NefPrior::gamma_by_mean(1.0, 2.0).unwrap());
        assert!(g.contains(PerturbationVector::ZERO));
        assert!(!g.contains(PerturbationVector::new(0.0, 0.0, -0.01)));
        let b = FeasibleRegion::new(NefPrior::beta(1.0, 1.0).unwrap());
        assert!(b.contains(PerturbationVector::ZERO));
        assert!(!b.contains(PerturbationVector::new(0.0, 0.01, 0.0)));
    }

    #[test]
    fn skew_ridge_touches_twice() {
        for s in [0.5, 1.0, 2.0] {
            let prior = NefPrior::normal(0.3, s).unwrap();
            for p in [-2.0, 0.0, 1.2314, 4.0] {
                let b = skew_ridge_point(&prior, p).unwrap();
                assert_eq!(b.validity, ChartValidity::OnBoundary);
                let quartic = boundary_quartic(&prior, b.lambda).unwrap();
                let u2 = 0.5 * (p + (p * p + 12.0).sqrt());
                for z in [b.z, u2 / s.sqrt()] {
                    assert!(quartic.eval(z).abs() < 1e-12, "s={s} p={p}");
                    assert!(quartic.derivative().eval(z).abs() < 1e-11);
                }
            }
        }
        // p = 0 meets the symmetric curve at (0, 0, s^2 / 6)
        let prior = NefPrior::normal(0.0, 1.0).unwrap();
        let b = skew_ridge_point(&prior, 0.0).unwrap();
        assert!((b.lambda.l4 - 1.0 / 6.0).abs() < 1e-15 && b.lambda.l2 == 0.0);
    }
}
