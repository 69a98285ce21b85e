//! Global worst cases over the whole feasible region: the largest negative
//! and positive mean shifts and the largest predictive divergence.

use std::time::Instant;

use lmrobust::optimizer::{extremize, Objective, OptimizerConfig};
use lmrobust::simulate::normal_sample;
use lmrobust::{NefPrior, PosteriorContext, Result};

fn main() -> Result<()> {
    let data = normal_sample(15, 1.0, 1.0, 3)?;
    let prior = NefPrior::normal(2.0, 1.0)?;
    let ctx = PosteriorContext::base_posterior(&prior, 1.0, &data)?;

    for objective in [Objective::PsiMin, Objective::PsiMax, Objective::KlMax] {
        let t = Instant::now();
        let cfg = OptimizerConfig {
            seed: 11,
            ..OptimizerConfig::new(objective)
        };
        let r = extremize(&ctx, &cfg)?;
        println!("{objective:?}");
        println!("  lambda_hat = {}", r.lambda_hat);
        println!("  value      = {:.6}", r.objective_value);
        println!(
            "  psi = {:.6}, d = {:.4}, kl = {:.6}",
            r.report.psi, r.report.d, r.report.kl
        );
        println!("  {:?} on {:?}", r.location, r.piece);
        println!(
            "  {} of {} starts converged, best from start {} ({:.0?})",
            r.starts_converged,
            cfg.n_starts,
            r.start_index,
            t.elapsed()
        );
    }
    Ok(())
}
