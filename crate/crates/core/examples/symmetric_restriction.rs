//! Worst cases restricted to perturbations that keep the prior symmetric
//! (`l3 = 0`), next to the unrestricted ones.

use lmrobust::optimizer::{extremize, Constraint, Objective, OptimizerConfig};
use lmrobust::simulate::normal_sample;
use lmrobust::{NefPrior, PosteriorContext, Result};

fn main() -> Result<()> {
    let prior = NefPrior::normal(2.0, 1.0)?;
    for seed in [3, 4, 5] {
        let data = normal_sample(15, 1.0, 1.0, seed)?;
        let ctx = PosteriorContext::base_posterior(&prior, 1.0, &data)?;
        println!("data seed {seed}, xbar = {:.4}", ctx.sample_mean());
        for objective in [Objective::PsiMin, Objective::KlMax] {
            for constraint in [Constraint::None, Constraint::Lambda3Zero] {
                let cfg = OptimizerConfig {
                    constraint,
                    ..OptimizerConfig::new(objective)
                };
                let r = extremize(&ctx, &cfg)?;
                println!(
                    "  {:<8} {:<12} {}  value {:+.6}  d {:.4}",
                    format!("{objective:?}"),
                    format!("{constraint:?}"),
                    r.lambda_hat,
                    r.objective_value,
                    r.report.d
                );
            }
        }
    }
    Ok(())
}
