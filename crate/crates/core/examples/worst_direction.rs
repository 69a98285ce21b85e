//! Local sensitivity: the steepest direction of the posterior mean and how
//! the mean shift grows along it.

use lmrobust::optimizer::{local_sweep, worst_direction, Constraint, DEFAULT_SWEEP};
use lmrobust::simulate::normal_sample;
use lmrobust::{NefPrior, PosteriorContext, Result};

fn main() -> Result<()> {
    let data = normal_sample(15, 1.0, 1.0, 3)?;
    let prior = NefPrior::normal(2.0, 1.0)?;
    let ctx = PosteriorContext::base_posterior(&prior, 1.0, &data)?;
    println!(
        "n = {}, xbar = {:.4}, posterior N({:.4}, {:.4})",
        ctx.n(),
        ctx.sample_mean(),
        ctx.post_mean(),
        ctx.post_var()
    );

    for constraint in [Constraint::None, Constraint::Lambda3Zero] {
        let w = worst_direction(&ctx, constraint)?;
        println!("{constraint:?}: grad phi = {:?}", w.grad_phi);
        println!(
            "  direction {} ({:?}), boundary at alpha = {:.4}",
            w.direction, w.status, w.alpha_max
        );
        println!("  {:>8} {:>10} {:>10} {:>10}", "alpha", "psi", "d", "kl");
        for e in local_sweep(&ctx, w.direction, &DEFAULT_SWEEP, 64)? {
            println!(
                "  {:>8.4} {:>10.5} {:>10.5} {:>10.6}  {:?}",
                e.alpha, e.psi, e.d, e.kl, e.point
            );
        }
    }
    Ok(())
}
