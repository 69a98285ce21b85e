use super::Polynomial;
use crate::error::{Error, Result};

/// Highest raw moment order supported by [`normal_moment`].
pub const MAX_MOMENT_ORDER: usize = 12;

/// Raw moment `E[X^r]` of `X ~ N(m, v)`.
///
/// Uses `E_r = m E_{r-1} + (r-1) v E_{r-2}`; `v = 0` gives the point mass at `m`.
pub fn normal_moment(r: usize, m: f64, v: f64) -> Result<f64> {
    Ok(normal_moments(r, m, v)?[r])
}

/// All raw moments `E[X^0] ..= E[X^r]`.
pub fn normal_moments(r: usize, m: f64, v: f64) -> Result<Vec<f64>> {
    if r > MAX_MOMENT_ORDER {
        return Err(Error::MomentOrderTooLarge {
            order: r,
            max: MAX_MOMENT_ORDER,
        });
    }
    let mut out = Vec::with_capacity(r + 1);
    out.push(1.0);
    if r >= 1 {
        out.push(m);
    }
    for k in 2..=r {
        let e = m * out[k - 1] + (k - 1) as f64 * v * out[k - 2];
        out.push(e);
    }
    Ok(out)
}

/// `E[p(X)]` for `X ~ N(m, v)`.
pub fn poly_expectation_normal(p: &Polynomial, m: f64, v: f64) -> Result<f64> {
    let Some(deg) = p.degree() else {
        return Ok(0.0);
    };
    let moments = normal_moments(deg, m, v)?;
    Ok(p.coeffs().iter().zip(&moments).map(|(c, e)| c * e).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_examples() {
        assert_eq!(normal_moment(0, 3.0, 2.0).unwrap(), 1.0);
        assert_eq!(normal_moment(2, 0.0, 1.0).unwrap(), 1.0);
        // m^4 + 6 m^2 v + 3 v^2 at (1, 2)
        assert_eq!(normal_moment(4, 1.0, 2.0).unwrap(), 25.0);
    }

    #[test]
    fn order_cap() {
        assert!(normal_moment(12, 0.0, 1.0).is_ok());
        assert_eq!(
            normal_moment(13, 0.0, 1.0),
            Err(Error::MomentOrderTooLarge { order: 13, max: 12 })
        );
    }

    #[test]
    fn standard_normal_even_moments_are_double_factorials() {
        let mut df = 1.0;
        for r in (2..=12).step_by(2) {
            df *= (r - 1) as f64;
            assert_eq!(normal_moment(r, 0.0, 1.0).unwrap(), df);
            assert_eq!(normal_moment(r - 1, 0.0, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn monomials_agree_with_moments() {
        for r in 0..=12 {
            let p = Polynomial::monomial(r, 1.0);
            assert_eq!(
                poly_expectation_normal(&p, 0.7, 1.3).unwrap(),
                normal_moment(r, 0.7, 1.3).unwrap()
            );
        }
    }

    #[test]
    fn q2_expectation_example() {
        // q2 = (mu - 2)^2 - 1 under N(1.0625, 0.0625)
        let q2 =
            &Polynomial::monomial(2, 1.0).compose_linear(-2.0, 1.0) - &Polynomial::constant(1.0);
        let e = poly_expectation_normal(&q2, 1.0625, 0.0625).unwrap();
        assert!((e + 0.05859375).abs() < 1e-15);
    }

    #[test]
    fn point_mass_limit() {
        // q4 with sigma0 = 1, theta = 0 at a point mass in 0
        let q4 = Polynomial::new(vec![3.0, 0.0, -6.0, 0.0, 1.0]);
        assert_eq!(poly_expectation_normal(&q4, 0.0, 0.0).unwrap(), 3.0);
    }
}
