//! Two-component normal mixture with all five priors perturbed: marginal
//! posterior shifts relative to the unperturbed model.
//!
//! Pass a chain length as the first argument to change the default of 50000.

use std::time::Instant;

use lmrobust::mixture::{marginal_d, marginal_d_se, run_chain, Hyper, MixtureSpec};
use lmrobust::simulate::mixture_sample;
use lmrobust::Result;

fn main() -> Result<()> {
    let data = mixture_sample(15, 0.4, [-1.0, 1.0], [1.0, 1.0], 2024)?;
    let mut spec = MixtureSpec::new(data, Hyper::reference());
    if let Some(n) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        spec.chain_length = n;
        spec.burn_in = n / 5;
    }

    let t = Instant::now();
    let base = run_chain(&spec.base())?;
    let pert = run_chain(&spec)?;
    let d = marginal_d(&base.summaries, &pert.summaries)?;
    let se = marginal_d_se(&base.summaries, &pert.summaries)?;

    println!(
        "{:<8} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8}",
        "param", "base", "sd", "perturbed", "sd", "d", "se"
    );
    for (i, (b, p)) in base.summaries.iter().zip(&pert.summaries).enumerate() {
        println!(
            "{:<8} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.3} {:>8.3}",
            b.name, b.mean, b.sd, p.mean, p.sd, d[i], se[i]
        );
    }
    println!(
        "parameter acceptance   {:.3?}",
        pert.acceptance_params.rates()
    );
    println!(
        "perturbation acceptance {:.3?}",
        pert.acceptance_lambda.rates()
    );
    println!(
        "infeasible perturbation draws: {}",
        pert.infeasible_lambda_draws
    );
    println!(
        "{} iterations per run in {:.1?}",
        spec.chain_length,
        t.elapsed()
    );
    Ok(())
}
