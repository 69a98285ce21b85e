use std::f64::consts::PI;

use super::Polynomial;

const DEDUP_TOL: f64 = 1e-10;

/// Real roots of `c2 x^2 + c1 x + c0`, ascending. Degrades to the linear case.
pub fn quadratic_real_roots(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c2 == 0.0 {
        if c1 == 0.0 {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-c1 / (2.0 * c2)];
    }
    // cancellation-free pair
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let (a, b) = if q == 0.0 {
        let r = (-c0 / c2).sqrt();
        (-r, r)
    } else {
        (q / c2, c0 / q)
    };
    let mut roots = vec![a.min(b), a.max(b)];
    dedup(&mut roots);
    roots
}

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0`, ascending and deduplicated.
///
/// Trigonometric form for three real roots, Cardano otherwise, each root
/// polished by Newton on the original cubic.
pub fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    if c3 == 0.0 {
        return quadratic_real_roots(c2, c1, c0);
    }
    let b = c2 / c3;
    let c = c1 / c3;
    let d = c0 / c3;
    if !(b.is_finite() && c.is_finite() && d.is_finite()) {
        // leading coefficient negligible at f64 scale
        return quadratic_real_roots(c2, c1, c0);
    }
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let mut ts = Vec::with_capacity(3);
    if p == 0.0 {
        ts.push((-q).cbrt());
    } else {
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if disc > 0.0 {
            let a = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
            let t = if a == 0.0 { 0.0 } else { a - p / (3.0 * a) };
            ts.push(t);
        } else {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            for k in 0..3 {
                ts.push(m * (phi - 2.0 * PI * k as f64 / 3.0).cos());
            }
        }
    }

    let cubic = |x: f64| ((x + b) * x + c) * x + d;
    let dcubic = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    let mut roots: Vec<f64> = ts
        .into_iter()
        .map(|t| {
            let mut x = t - shift;
            for _ in 0..8 {
                let f = cubic(x);
                let df = dcubic(x);
                if df == 0.0 || f == 0.0 {
                    break;
                }
                let next = x - f / df;
                if !next.is_finite() || cubic(next).abs() >= f.abs() {
                    break;
                }
                x = next;
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    dedup(&mut roots);
    roots
}

fn dedup(roots: &mut Vec<f64>) {
    roots.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL * (1.0 + b.abs()));
}

/// Global minimum of a polynomial of degree at most four.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyMin {
    /// `-inf` when the polynomial is unbounded below on the domain.
    pub value: f64,
    /// Location of the minimum; `None` when unbounded.
    pub argmin: Option<f64>,
}

/// Exact minimum of `p` (degree <= 4) over `[lower, inf)`, or the whole line
/// when `lower` is `None`.
///
/// Candidates are the real stationary points plus the roots of `p''`, so a
/// near-double stationary point lost to rounding is still sampled.
pub fn poly_min(p: &Polynomial, lower: Option<f64>) -> PolyMin {
    let Some(deg) = p.degree() else {
        return PolyMin {
            value: 0.0,
            argmin: Some(lower.unwrap_or(0.0)),
        };
    };
    assert!(deg <= 4, "poly_min supports degree <= 4, got {deg}");
    if deg == 0 {
        return PolyMin {
            value: p.coeff(0),
            argmin: Some(lower.unwrap_or(0.0)),
        };
    }
    let unbounded = match lower {
        None => deg % 2 == 1 || p.leading() < 0.0,
        Some(_) => p.leading() < 0.0,
    };
    if unbounded {
        return PolyMin {
            value: f64::NEG_INFINITY,
            argmin: None,
        };
    }
    let d1 = p.derivative();
    let d2 = d1.derivative();
    let mut candidates = cubic_real_roots(d1.coeff(3), d1.coeff(2), d1.coeff(1), d1.coeff(0));
    candidates.extend(quadratic_real_roots(d2.coeff(2), d2.coeff(1), d2.coeff(0)));
    if let Some(lo) = lower {
        candidates.retain(|&x| x >= lo);
        candidates.push(lo);
    }
    let mut best = PolyMin {
        value: f64::INFINITY,
        argmin: None,
    };
    for x in candidates {
        let v = p.eval(x);
        if v < best.value || best.argmin.is_none() {
            best = PolyMin {
                value: v,
                argmin: Some(x),
            };
        }
    }
    if best.value.is_nan() {
        best.value = f64::NEG_INFINITY;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn cubic_examples() {
        close(&cubic_real_roots(1.0, 0.0, 0.0, -1.0), &[1.0], 1e-14);
        close(
            &cubic_real_roots(1.0, 0.0, -1.0, 0.0),
            &[-1.0, 0.0, 1.0],
            1e-14,
        );
        close(
            &cubic_real_roots(1.0, 0.0, -3.0, 1.0),
            &[-1.8793852415718, 0.3472963553339, 1.5320888862380],
            1e-12,
        );
    }

    #[test]
    fn cubic_degrades() {
        close(&cubic_real_roots(0.0, 1.0, 0.0, -4.0), &[-2.0, 2.0], 1e-14);
        close(&cubic_real_roots(0.0, 0.0, 2.0, -4.0), &[2.0], 1e-14);
        assert!(cubic_real_roots(0.0, 0.0, 0.0, 1.0).is_empty());
        assert!(quadratic_real_roots(1.0, 0.0, 1.0).is_empty());
    }

    #[test]
    fn cubic_repeated_roots() {
        // (x - 1)^3
        close(&cubic_real_roots(1.0, -3.0, 3.0, -1.0), &[1.0], 1e-5);
        // x^2 (x - 2): double root at 0
        let r = cubic_real_roots(1.0, -2.0, 0.0, 0.0);
        assert!(r.iter().any(|x| (x - 2.0).abs() < 1e-12));
        assert!(r.iter().any(|x| x.abs() < 1e-6));
    }

    #[test]
    fn quartic_minimum() {
        // 0.5 (z^2 - 1)^2
        let p = Polynomial::new(vec![0.5, 0.0, -1.0, 0.0, 0.5]);
        let m = poly_min(&p, None);
        assert!(m.value.abs() < 1e-15);
        assert!((m.argmin.unwrap().abs() - 1.0).abs() < 1e-12);
        // z^4 - 6 z^2 + 3 has minimum -6 at z^2 = 3
        let q4 = Polynomial::new(vec![3.0, 0.0, -6.0, 0.0, 1.0]);
        assert!((poly_min(&q4, None).value + 6.0).abs() < 1e-12);
        // on [0, inf) with lower bound shifted past the well
        assert!((poly_min(&q4, Some(1.0)).value + 6.0).abs() < 1e-12);
        assert_eq!(poly_min(&q4, Some(2.0)).value, -5.0);
        assert_eq!(poly_min(&q4, Some(10.0)).value, q4.eval(10.0));
    }

    #[test]
    fn unbounded_cases() {
        let cubic = Polynomial::new(vec![1.0, -1.5, 0.0, 0.5]);
        assert_eq!(poly_min(&cubic, None).value, f64::NEG_INFINITY);
        let neg = Polynomial::new(vec![1.0, 0.0, 0.0, 0.0, -0.01]);
        assert_eq!(poly_min(&neg, None).value, f64::NEG_INFINITY);
        // increasing cubic is bounded on a half line
        let inc = Polynomial::new(vec![1.0, 1.0, 0.0, 1.0]);
        assert_eq!(poly_min(&inc, Some(0.0)).value, 1.0);
    }
}
