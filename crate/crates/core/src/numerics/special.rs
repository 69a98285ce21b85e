/// Polygamma function `psi^(n)(x)` for `n <= 3` and `x > 0`.
///
/// Recurrence up to `x >= 20`, then the asymptotic Bernoulli series.
pub fn polygamma(n: u32, x: f64) -> f64 {
    assert!(n <= 3, "polygamma order {n} not supported");
    if !(x > 0.0) {
        return f64::NAN;
    }
    let fact = [
        1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0, 362880.0,
    ];
    let sign_n = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut acc = 0.0;
    let mut y = x;
    while y < 20.0 {
        // psi^(n)(y) = psi^(n)(y+1) - (-1)^n n! / y^(n+1)
        acc -= sign_n * fact[n as usize] / y.powi(n as i32 + 1);
        y += 1.0;
    }
    // Bernoulli numbers B_2 .. B_14
    const B: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let asym = if n == 0 {
        let mut s = y.ln() - 0.5 / y;
        for (k, b) in B.iter().enumerate() {
            let two_k = 2 * (k as i32 + 1);
            s -= b / (two_k as f64 * y.powi(two_k));
        }
        s
    } else {
        let ni = n as i32;
        let mut s = fact[n as usize - 1] / y.powi(ni) + fact[n as usize] / (2.0 * y.powi(ni + 1));
        for (k, b) in B.iter().enumerate() {
            let two_k = 2 * (k + 1);
            // (2k + n - 1)! / (2k)!
            let ratio: f64 = ((two_k + 1)..=(two_k + n as usize - 1))
                .map(|v| v as f64)
                .product();
            s += b * ratio / y.powi(two_k as i32 + ni);
        }
        -sign_n * s
    };
    asym + acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    const ZETA3: f64 = 1.202_056_903_159_594_3;

    #[test]
    fn values_at_one() {
        assert!((polygamma(0, 1.0) + EULER_GAMMA).abs() < 1e-13);
        assert!((polygamma(1, 1.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((polygamma(2, 1.0) + 2.0 * ZETA3).abs() < 1e-12);
        assert!((polygamma(3, 1.0) - PI.powi(4) / 15.0).abs() < 1e-11);
    }

    #[test]
    fn digamma_half() {
        let expected = -EULER_GAMMA - 2.0 * 2f64.ln();
        assert!((polygamma(0, 0.5) - expected).abs() < 1e-13);
    }

    #[test]
    fn matches_statrs_digamma() {
        for x in [0.1, 0.7, 3.3, 19.9, 20.0, 150.0] {
            let d = statrs::function::gamma::digamma(x);
            assert!(
                (polygamma(0, x) - d).abs() < 1e-10 * (1.0 + d.abs()),
                "x = {x}"
            );
        }
    }

    #[test]
    fn derivatives_by_central_differences() {
        for n in 1..=3u32 {
            for x in [0.8, 2.5, 31.0] {
                let h = 1e-4 * x;
                let fd = (polygamma(n - 1, x + h) - polygamma(n - 1, x - h)) / (2.0 * h);
                let v = polygamma(n, x);
                assert!((fd - v).abs() < 1e-6 * (1.0 + v.abs()), "n = {n}, x = {x}");
            }
        }
    }
}
