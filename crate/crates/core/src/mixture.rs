//! Two-component normal mixture with independently perturbed conjugate priors.
//!
//! Model: `x_i ~ rho N(mu_1, 1/p_1) + (1 - rho) N(mu_2, 1/p_2)` with priors
//! `rho ~ Beta(alpha, beta)`, `mu_j ~ N(theta_j, s_j)`, `p_j ~ Gamma(k_j, tau_j)`
//! (shape, rate). Each of the five priors carries its own perturbation
//! `(1 + l2 q2 + l3 q3 + l4 q4)`, and the perturbation coordinates are
//! sampled alongside the parameters with a flat prior on their feasible
//! regions. Since every perturbed prior integrates to one, the conditional
//! of a perturbation block is its bracket at the current parameter value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::{FeasibleRegion, PerturbationVector};
use crate::prior::{NefPrior, QFunction};
use crate::sensitivity::size_norm;

/// Parameter order shared by summaries, samples and perturbation blocks.
pub const PARAMETERS: [&str; 5] = ["rho", "mu1", "mu2", "sigma1", "sigma2"];

pub const DEFAULT_HISTOGRAM_BINS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub theta: [f64; 2],
    /// Prior variances of the component means.
    pub mean_var: [f64; 2],
    /// Gamma shapes of the precisions.
    pub shape: [f64; 2],
    /// Gamma rates of the precisions.
    pub rate: [f64; 2],
    pub alpha: f64,
    pub beta: f64,
}

impl Hyper {
    /// Hyperparameters of the reference two-component example.
    pub fn reference() -> Self {
        Self {
            theta: [-1.5, 0.5],
            mean_var: [1.0, 1.0],
            shape: [2.0, 2.0],
            rate: [1.0, 1.0],
            alpha: 1.0,
            beta: 1.0,
        }
    }

    /// Labels of the two components exchanged.
    pub fn swapped(&self) -> Self {
        let sw = |a: [f64; 2]| [a[1], a[0]];
        Self {
            theta: sw(self.theta),
            mean_var: sw(self.mean_var),
            shape: sw(self.shape),
            rate: sw(self.rate),
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// The five priors in [`PARAMETERS`] order; precisions stand in for the
    /// standard deviations.
    pub fn priors(&self) -> Result<[NefPrior; 5]> {
        Ok([
            NefPrior::beta(self.alpha, self.beta)?,
            NefPrior::normal(self.theta[0], self.mean_var[0])?,
            NefPrior::normal(self.theta[1], self.mean_var[1])?,
            NefPrior::gamma_shape_rate(self.shape[0], self.rate[0])?,
            NefPrior::gamma_shape_rate(self.shape[1], self.rate[1])?,
        ])
    }
}

/// Parameters held fixed instead of sampled.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixed {
    pub rho: Option<f64>,
    pub precision: [Option<f64>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub data: Vec<f64>,
    pub hyper: Hyper,
    /// Which of the five priors are perturbed, in [`PARAMETERS`] order.
    pub perturb: [bool; 5],
    pub lambda_width: f64,
    #[serde(default)]
    pub lambda_scale: ProposalScale,
    pub chain_length: usize,
    pub burn_in: usize,
    pub seed: u64,
    #[serde(default)]
    pub fixed: Fixed,
}

impl MixtureSpec {
    pub fn new(data: Vec<f64>, hyper: Hyper) -> Self {
        Self {
            data,
            hyper,
            perturb: [true; 5],
            lambda_width: 1.0,
            lambda_scale: ProposalScale::Standardized,
            chain_length: 50_000,
            burn_in: 10_000,
            seed: 0,
            fixed: Fixed::default(),
        }
    }

    /// Same spec with every perturbation switched off.
    pub fn base(&self) -> Self {
        Self {
            perturb: [false; 5],
            ..self.clone()
        }
    }

    /// Component labels exchanged in the hyperparameters and fixed values.
    pub fn swapped(&self) -> Self {
        let p = self.perturb;
        Self {
            hyper: self.hyper.swapped(),
            perturb: [p[0], p[2], p[1], p[4], p[3]],
            fixed: Fixed {
                rho: self.fixed.rho.map(|r| 1.0 - r),
                precision: [self.fixed.precision[1], self.fixed.precision[0]],
            },
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.priors()?;
        if self.burn_in >= self.chain_length {
            return Err(Error::InvalidConfig(format!(
                "burn_in {} must be below chain_length {}",
                self.burn_in, self.chain_length
            )));
        }
        if !(self.lambda_width >= 0.0 && self.lambda_width.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda proposal width must be nonnegative, got {}",
                self.lambda_width
            )));
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(
                "data contain non-finite values".into(),
            ));
        }
        if let Some(r) = self.fixed.rho {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!(
                    "fixed rho must lie in [0, 1], got {r}"
                )));
            }
        }
        if self
            .fixed
            .precision
            .iter()
            .flatten()
            .any(|&p| !(p > 0.0 && p.is_finite()))
        {
            return Err(Error::InvalidConfig(
                "fixed precisions must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Units of the uniform perturbation proposal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalScale {
    /// Width applies to `l_j` directly.
    Raw,
    /// Width applies to `l_j ||q_j||`, the `L^2(pi0)` size of each term.
    #[default]
    Standardized,
}

/// One perturbed prior: its feasible region and q-functions.
#[derive(Clone, Debug)]
pub struct PerturbedPrior {
    region: FeasibleRegion,
    basis: [QFunction; 3],
    q_norms: [f64; 3],
}

impl PerturbedPrior {
    pub fn new(prior: NefPrior) -> Self {
        let q_norms = std::array::from_fn(|j| {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            size_norm(&prior, PerturbationVector::from_array(e), 2.0).expect("p = 2 is valid")
        });
        Self {
            region: FeasibleRegion::new(prior),
            basis: prior.perturbation_basis(),
            q_norms,
        }
    }

    /// `||q_j||` under the base prior.
    pub fn q_norms(&self) -> [f64; 3] {
        self.q_norms
    }

    fn proposal_widths(&self, width: f64, scale: ProposalScale) -> [f64; 3] {
        match scale {
            ProposalScale::Raw => [width; 3],
            ProposalScale::Standardized => self.q_norms.map(|n| width / n),
        }
    }

    pub fn region(&self) -> &FeasibleRegion {
        &self.region
    }

    /// `1 + sum l_j q_j(x)`
    pub fn bracket(&self, lambda: PerturbationVector, x: f64) -> f64 {
        1.0 + self
            .basis
            .iter()
            .zip(lambda.to_array())
            .map(|(q, l)| if l == 0.0 { 0.0 } else { l * q.eval(x) })
            .sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    /// Component of each observation, `1` or `2`.
    pub alloc: Vec<u8>,
    pub rho: f64,
    pub mu: [f64; 2],
    pub precision: [f64; 2],
    /// Perturbation blocks in [`PARAMETERS`] order (precisions for the sigmas).
    pub lambda: [PerturbationVector; 5],
}

impl ChainState {
    /// Prior means, with fixed values where given, and no perturbation.
    pub fn initial(spec: &MixtureSpec) -> Self {
        let h = &spec.hyper;
        Self {
            alloc: vec![1; spec.data.len()],
            rho: spec.fixed.rho.unwrap_or(h.alpha / (h.alpha + h.beta)),
            mu: h.theta,
            precision: [0, 1].map(|j| spec.fixed.precision[j].unwrap_or(h.shape[j] / h.rate[j])),
            lambda: [PerturbationVector::ZERO; 5],
        }
    }

    /// Parameter values in [`PARAMETERS`] order.
    pub fn params(&self) -> [f64; 5] {
        [
            self.rho,
            self.mu[0],
            self.mu[1],
            self.precision[0].powf(-0.5),
            self.precision[1].powf(-0.5),
        ]
    }

    /// Values at which each prior block is evaluated.
    fn prior_args(&self) -> [f64; 5] {
        [
            self.rho,
            self.mu[0],
            self.mu[1],
            self.precision[0],
            self.precision[1],
        ]
    }

    pub fn counts(&self) -> [usize; 2] {
        let n1 = self.alloc.iter().filter(|&&w| w == 1).count();
        [n1, self.alloc.len() - n1]
    }
}

fn normal_density(x: f64, m: f64, prec: f64) -> f64 {
    (prec / (2.0 * std::f64::consts::PI)).sqrt() * (-0.5 * prec * (x - m).powi(2)).exp()
}

/// Resample every allocation from its two-point conditional.
pub fn gibbs_allocations<R: Rng>(state: &mut ChainState, spec: &MixtureSpec, rng: &mut R) {
    for (w, &x) in state.alloc.iter_mut().zip(&spec.data) {
        let a = state.rho * normal_density(x, state.mu[0], state.precision[0]);
        let b = (1.0 - state.rho) * normal_density(x, state.mu[1], state.precision[1]);
        let p1 = if a + b > 0.0 {
            a / (a + b)
        } else {
            // both densities underflow; compare on the log scale
            let la = state.rho.ln() + 0.5 * state.precision[0].ln()
                - 0.5 * state.precision[0] * (x - state.mu[0]).powi(2);
            let lb = (1.0 - state.rho).ln() + 0.5 * state.precision[1].ln()
                - 0.5 * state.precision[1] * (x - state.mu[1]).powi(2);
            1.0 / (1.0 + (lb - la).exp())
        };
        *w = if rng.random::<f64>() < p1 { 1 } else { 2 };
    }
}

/// Draw from the conjugate conditional and, under a perturbation, accept
/// with the bracket ratio. Returns whether the move was accepted.
fn independence_step<R: Rng>(
    current: &mut f64,
    proposal: f64,
    block: &PerturbedPrior,
    lambda: PerturbationVector,
    rng: &mut R,
) -> bool {
    if lambda.is_zero() {
        *current = proposal;
        return true;
    }
    let num = block.bracket(lambda, proposal);
    let den = block.bracket(lambda, *current);
    let ratio = if den > 0.0 { num / den } else { 1.0 };
    if ratio >= 1.0 || rng.random::<f64>() < ratio {
        *current = proposal;
        true
    } else {
        false
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub proposed: [u64; 5],
    pub accepted: [u64; 5],
}

impl Acceptance {
    pub fn rates(&self) -> [f64; 5] {
        std::array::from_fn(|i| {
            if self.proposed[i] == 0 {
                f64::NAN
            } else {
                self.accepted[i] as f64 / self.proposed[i] as f64
            }
        })
    }
}

/// Conjugate updates of `rho`, the means and the precisions.
pub fn update_component_params<R: Rng>(
    state: &mut ChainState,
    spec: &MixtureSpec,
    blocks: &[PerturbedPrior; 5],
    rng: &mut R,
    stats: &mut Acceptance,
) {
    let h = &spec.hyper;
    let [n1, n2] = state.counts();
    let mut tally = |i: usize, ok: bool| {
        stats.proposed[i] += 1;
        stats.accepted[i] += u64::from(ok);
    };
    if spec.fixed.rho.is_none() {
        let draw = Beta::new(h.alpha + n1 as f64, h.beta + n2 as f64)
            .expect("positive beta parameters")
            .sample(rng)
            .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        let ok = independence_step(&mut state.rho, draw, &blocks[0], state.lambda[0], rng);
        tally(0, ok);
    }
    for j in 0..2 {
        let (mut sum, mut cnt) = (0.0, 0usize);
        for (&w, &x) in state.alloc.iter().zip(&spec.data) {
            if usize::from(w) == j + 1 {
                sum += x;
                cnt += 1;
            }
        }
        let prec0 = 1.0 / h.mean_var[j];
        let post_prec = prec0 + cnt as f64 * state.precision[j];
        let post_mean = (h.theta[j] * prec0 + state.precision[j] * sum) / post_prec;
        let draw = Normal::new(post_mean, post_prec.sqrt().recip())
            .expect("finite normal parameters")
            .sample(rng);
        let ok = independence_step(
            &mut state.mu[j],
            draw,
            &blocks[1 + j],
            state.lambda[1 + j],
            rng,
        );
        tally(1 + j, ok);

        if spec.fixed.precision[j].is_none() {
            let ss: f64 = state
                .alloc
                .iter()
                .zip(&spec.data)
                .filter(|(&w, _)| usize::from(w) == j + 1)
                .map(|(_, &x)| (x - state.mu[j]).powi(2))
                .sum();
            let shape = h.shape[j] + 0.5 * cnt as f64;
            let rate = h.rate[j] + 0.5 * ss;
            let draw = Gamma::new(shape, 1.0 / rate)
                .expect("positive gamma parameters")
                .sample(rng)
                .max(f64::MIN_POSITIVE);
            let ok = independence_step(
                &mut state.precision[j],
                draw,
                &blocks[3 + j],
                state.lambda[3 + j],
                rng,
            );
            tally(3 + j, ok);
        }
    }
}

/// One uniform random-walk Metropolis move of a perturbation block whose
/// unnormalised target is `target(l)` on `region`; proposals outside the
/// region are rejected.
pub fn metropolis_lambda_step<R: Rng, F: Fn(PerturbationVector) -> f64>(
    lambda: PerturbationVector,
    region: &FeasibleRegion,
    widths: [f64; 3],
    target: F,
    rng: &mut R,
) -> (PerturbationVector, bool) {
    let jitter: [f64; 3] = std::array::from_fn(|j| widths[j] * (rng.random::<f64>() - 0.5));
    let prop = lambda + PerturbationVector::from_array(jitter);
    if !region.contains(prop) {
        return (lambda, false);
    }
    let cur = target(lambda);
    let new = target(prop);
    let ratio = if cur > 0.0 { new / cur } else { 1.0 };
    if ratio >= 1.0 || rng.random::<f64>() < ratio {
        (prop, true)
    } else {
        (lambda, false)
    }
}

/// Update every enabled perturbation block given the current parameters.
pub fn metropolis_lambda<R: Rng>(
    state: &mut ChainState,
    spec: &MixtureSpec,
    blocks: &[PerturbedPrior; 5],
    rng: &mut R,
    stats: &mut Acceptance,
) {
    let args = state.prior_args();
    for i in 0..5 {
        if !spec.perturb[i] {
            continue;
        }
        let block = &blocks[i];
        let x = args[i];
        let widths = block.proposal_widths(spec.lambda_width, spec.lambda_scale);
        let (l, ok) = metropolis_lambda_step(
            state.lambda[i],
            block.region(),
            widths,
            |l| block.bracket(l, x),
            rng,
        );
        state.lambda[i] = l;
        stats.proposed[i] += 1;
        stats.accepted[i] += u64::from(ok);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_samples(xs: &[f64], bins: usize) -> Self {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; bins.max(1)];
        let nb = counts.len();
        let width = hi - lo;
        for &x in xs {
            let k = if width > 0.0 {
                (((x - lo) / width) * nb as f64) as usize
            } else {
                0
            };
            counts[k.min(nb - 1)] += 1;
        }
        Self { lo, hi, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// Batch-means Monte Carlo standard error of the mean.
    pub mcse: f64,
    pub ess: f64,
    pub histogram: Histogram,
}

impl ParamSummary {
    pub fn from_samples(name: &str, xs: &[f64], bins: usize) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let mcse = batch_means_se(xs);
        Self {
            name: name.to_string(),
            mean,
            sd: var.sqrt(),
            mcse,
            ess: if mcse > 0.0 { var / (mcse * mcse) } else { n },
            histogram: Histogram::from_samples(xs, bins),
        }
    }
}

/// Standard error of the mean from `floor(sqrt(n))` non-overlapping batches.
pub fn batch_means_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    let b = (n as f64).sqrt().floor() as usize;
    if b < 2 {
        return f64::NAN;
    }
    let size = n / b;
    let means: Vec<f64> = (0..b)
        .map(|k| xs[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / b as f64;
    let v = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (v / b as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    /// Post-burn-in draws in [`PARAMETERS`] order.
    pub samples: Vec<[f64; 5]>,
    pub lambda_samples: Vec<[PerturbationVector; 5]>,
    pub summaries: Vec<ParamSummary>,
    pub acceptance_params: Acceptance,
    pub acceptance_lambda: Acceptance,
    /// Retained iterations with an infeasible perturbation block; zero by construction.
    pub infeasible_lambda_draws: usize,
}

impl ChainOutput {
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[i]).collect()
    }
}

/// Alternate allocations, parameters and perturbation blocks for
/// `chain_length` sweeps and summarise the draws after `burn_in`.
pub fn run_chain(spec: &MixtureSpec) -> Result<ChainOutput> {
    spec.validate()?;
    let priors = spec.hyper.priors()?;
    let blocks: [PerturbedPrior; 5] = priors.map(PerturbedPrior::new);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = ChainState::initial(spec);
    let keep = spec.chain_length - spec.burn_in;
    let mut samples = Vec::with_capacity(keep);
    let mut lambda_samples = Vec::with_capacity(keep);
    let mut acc_p = Acceptance::default();
    let mut acc_l = Acceptance::default();
    for it in 0..spec.chain_length {
        gibbs_allocations(&mut state, spec, &mut rng);
        update_component_params(&mut state, spec, &blocks, &mut rng, &mut acc_p);
        metropolis_lambda(&mut state, spec, &blocks, &mut rng, &mut acc_l);
        if it >= spec.burn_in {
            samples.push(state.params());
            lambda_samples.push(state.lambda);
        }
    }
    let infeasible_lambda_draws = lambda_samples
        .iter()
        .filter(|ls| {
            ls.iter()
                .zip(&blocks)
                .any(|(l, b)| !b.region().contains(*l))
        })
        .count();
    let summaries = (0..5)
        .map(|i| {
            let col: Vec<f64> = samples.iter().map(|s| s[i]).collect();
            ParamSummary::from_samples(PARAMETERS[i], &col, DEFAULT_HISTOGRAM_BINS)
        })
        .collect();
    Ok(ChainOutput {
        samples,
        lambda_samples,
        summaries,
        acceptance_params: acc_p,
        acceptance_lambda: acc_l,
        infeasible_lambda_draws,
    })
}

/// Per-parameter `|mean_p - mean_0| / sd_0`.
pub fn marginal_d(base: &[ParamSummary], perturbed: &[ParamSummary]) -> Result<Vec<f64>> {
    check_lists(base, perturbed)?;
    Ok(base
        .iter()
        .zip(perturbed)
        .map(|(b, p)| (p.mean - b.mean).abs() / b.sd)
        .collect())
}

/// Monte Carlo standard error of each marginal `d`, from both runs' MCSEs.
pub fn marginal_d_se(base: &[ParamSummary], perturbed: &[ParamSummary]) -> Result<Vec<f64>> {
    check_lists(base, perturbed)?;
    Ok(base
        .iter()
        .zip(perturbed)
        .map(|(b, p)| b.mcse.hypot(p.mcse) / b.sd)
        .collect())
}

fn check_lists(base: &[ParamSummary], perturbed: &[ParamSummary]) -> Result<()> {
    if base.len() != perturbed.len() || base.iter().zip(perturbed).any(|(a, b)| a.name != b.name) {
        let names = |s: &[ParamSummary]| {
            s.iter()
                .map(|p| p.name.clone())
                .collect::<Vec<_>>()
                .join(",")
        };
        return Err(Error::SummaryMismatch(format!(
            "[{}] vs [{}]",
            names(base),
            names(perturbed)
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(data: Vec<f64>) -> MixtureSpec {
        MixtureSpec {
            chain_length: 2_000,
            burn_in: 500,
            ..MixtureSpec::new(data, Hyper::reference())
        }
    }

    #[test]
    fn allocation_examples() {
        let s = spec(vec![0.3, -2.0, 10.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut st = ChainState::initial(&s);
        st.rho = 1.0;
        for _ in 0..50 {
            gibbs_allocations(&mut st, &s, &mut rng);
            assert!(st.alloc.iter().all(|&w| w == 1));
        }
        st.rho = 0.5;
        st.mu = [-1.0, 10.0];
        st.precision = [1.0, 1.0];
        let mut twos = 0;
        for _ in 0..2000 {
            gibbs_allocations(&mut st, &s, &mut rng);
            twos += usize::from(st.alloc[2] == 2);
        }
        assert_eq!(twos, 2000);
    }

    #[test]
    fn zero_block_always_accepts() {
        let s = spec(vec![0.1, 0.5, -1.2]);
        let blocks = s.hyper.priors().unwrap().map(PerturbedPrior::new);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut st = ChainState::initial(&s);
        let mut acc = Acceptance::default();
        for _ in 0..100 {
            update_component_params(&mut st, &s, &blocks, &mut rng, &mut acc);
        }
        assert_eq!(acc.proposed, acc.accepted);
    }

    #[test]
    fn infeasible_proposals_are_rejected() {
        let region = FeasibleRegion::new(NefPrior::normal(0.0, 1.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let start = PerturbationVector::new(0.0, 0.0, 0.0);
        // every proposal with l4 < 0 is infeasible; a width-0 walk never moves
        let (l, ok) = metropolis_lambda_step(start, &region, [0.0; 3], |_| 1.0, &mut rng);
        assert!(ok && l == start);
        let edge = PerturbationVector::new(0.0, 0.0, 1e-12);
        let mut moved_below = 0;
        for _ in 0..200 {
            let (l, _) = metropolis_lambda_step(edge, &region, [0.2; 3], |_| 1.0, &mut rng);
            moved_below += usize::from(l.l4 < 0.0);
        }
        assert_eq!(moved_below, 0);
    }

    #[test]
    fn chain_is_deterministic_and_feasible() {
        let s = spec(vec![-1.3, -0.2, 0.8, 1.1, 1.9, -0.7, 0.4]);
        let a = run_chain(&s).unwrap();
        let b = run_chain(&s).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.infeasible_lambda_draws, 0);
        for sm in &a.summaries {
            assert_eq!(sm.histogram.total(), 1500);
        }
        assert_eq!(
            marginal_d(&a.summaries, &b.summaries).unwrap(),
            vec![0.0; 5]
        );
    }

    #[test]
    fn marginal_d_arithmetic() {
        let mk = |mean: f64| ParamSummary {
            name: "mu1".into(),
            mean,
            sd: 0.5,
            mcse: 0.01,
            ess: 100.0,
            histogram: Histogram::from_samples(&[0.0], 1),
        };
        assert_eq!(marginal_d(&[mk(1.0)], &[mk(1.25)]).unwrap(), vec![0.5]);
        let mut other = mk(1.0);
        other.name = "rho".into();
        assert!(matches!(
            marginal_d(&[mk(1.0)], &[other]),
            Err(Error::SummaryMismatch(_))
        ));
    }
}
