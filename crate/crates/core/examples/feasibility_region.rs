//! Membership tests, rays to the boundary and the tangency chart of the
//! feasible perturbation region for a standard normal prior.

use lmrobust::{
    boundary_point, boundary_quartic, ray_to_boundary, skew_ridge_point, symmetric_boundary_point,
    FeasibleRegion, NefPrior, PerturbationVector, Result,
};

fn main() -> Result<()> {
    let prior = NefPrior::normal(0.0, 1.0)?;
    let region = FeasibleRegion::new(prior);

    for l in [
        PerturbationVector::new(0.0, 0.0, 0.0),
        PerturbationVector::new(0.0, 0.0, 0.1),
        PerturbationVector::new(0.0, 0.0, -0.01),
        PerturbationVector::new(1.3, 0.0, 0.1),
        PerturbationVector::new(0.5, 0.4, 0.05),
    ] {
        let c = region.classify(l)?;
        println!("{l}: {} (quartic min {:.6})", c.status, c.min_value);
    }

    for dir in [
        PerturbationVector::new(0.0, 0.0, 1.0),
        PerturbationVector::new(1.0, 0.0, 0.0),
        PerturbationVector::new(1.0, 0.0, 0.25),
    ] {
        let hit = ray_to_boundary(&region, dir)?;
        println!("ray {dir}: alpha_max = {:.6}", hit.alpha_max);
    }

    println!("tangency chart");
    for (z, l4) in [(0.0, 0.1), (1.0, 0.5), (0.5, 0.2), (-1.5, 0.05)] {
        let b = boundary_point(&prior, z, l4)?;
        let p = boundary_quartic(&prior, b.lambda)?;
        println!(
            "  ({z:+.1}, {l4:.2}) -> {}  {:?}  P = {:.1e}  P' = {:.1e}",
            b.lambda,
            b.validity,
            p.eval(z),
            p.derivative().eval(z)
        );
    }

    println!("ridges");
    for z in [0.5, 1.0, 2.0] {
        println!(
            "  symmetric z = {z}: {}",
            symmetric_boundary_point(&prior, z)?.lambda
        );
    }
    for p in [-1.0, 0.0, 1.5] {
        println!("  skew p = {p}: {}", skew_ridge_point(&prior, p)?.lambda);
    }
    Ok(())
}
