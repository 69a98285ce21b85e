//! The perturbation basis `q2, q3, q4` for the three supported prior families,
//! checked against the closed form and the orthogonality to the score.

use lmrobust::prior::{normal_q_closed_form, score_orthogonality_check};
use lmrobust::{NefPrior, Result};

fn main() -> Result<()> {
    let normal = NefPrior::normal(2.0, 1.5)?;
    println!("normal N(2, 1.5)");
    for j in 2..=4 {
        let q = normal.q_function(j)?;
        let closed = normal_q_closed_form(2.0, 1.5, j);
        println!("  q{j}(x) = {}", q.poly());
        println!("  closed form      {closed}");
        println!(
            "  E[q{j} * score]  = {:.2e}",
            score_orthogonality_check(&normal, j)?
        );
    }

    let priors = [
        ("gamma, mean 3, shape 4", NefPrior::gamma_by_mean(3.0, 4.0)?),
        (
            "beta, mean 0.3, concentration 8",
            NefPrior::beta_by_mean(0.3, 8.0)?,
        ),
    ];
    for (name, prior) in priors {
        println!("{name}");
        for j in 2..=4 {
            let q = prior.q_function(j)?;
            let rec = prior.q_by_recursion(j)?;
            let x = prior.mean() * 1.1;
            println!(
                "  q{j}({x:.3}) = {:+.6}  recursion {:+.6}  E[q] = {:+.1e}",
                q.eval(x),
                rec.eval(x),
                prior.expect(|_, t| q.eval_variate(t))
            );
        }
    }
    Ok(())
}
