//! Seeded synthetic data sets for the worked examples and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// `n` independent draws from `N(mean, sd^2)`.
pub fn normal_sample(n: usize, mean: f64, sd: f64, seed: u64) -> Result<Vec<f64>> {
    let dist = Normal::new(mean, sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

/// `n` draws from `rho N(means[0], sds[0]^2) + (1 - rho) N(means[1], sds[1]^2)`.
pub fn mixture_sample(
    n: usize,
    rho: f64,
    means: [f64; 2],
    sds: [f64; 2],
    seed: u64,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidConfig(format!(
            "mixing weight {rho} outside [0, 1]"
        )));
    }
    let comps = [
        Normal::new(means[0], sds[0]).map_err(|e| Error::InvalidConfig(e.to_string()))?,
        Normal::new(means[1], sds[1]).map_err(|e| Error::InvalidConfig(e.to_string()))?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let j = usize::from(rng.random::<f64>() >= rho);
            comps[j].sample(&mut rng)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_sized() {
        let a = normal_sample(15, 1.0, 1.0, 7).unwrap();
        assert_eq!(a.len(), 15);
        assert_eq!(a, normal_sample(15, 1.0, 1.0, 7).unwrap());
        assert_ne!(a, normal_sample(15, 1.0, 1.0, 8).unwrap());
        let m = mixture_sample(2000, 0.4, [-1.0, 1.0], [1.0, 1.0], 3).unwrap();
        let mean = m.iter().sum::<f64>() / m.len() as f64;
        assert!((mean - 0.2).abs() < 0.1, "{mean}");
        assert!(mixture_sample(3, 1.5, [0.0, 0.0], [1.0, 1.0], 0).is_err());
    }
}
