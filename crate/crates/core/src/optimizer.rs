//! Worst-case perturbations: the steepest local direction and global
//! extremizers of the posterior-mean shift and the predictive divergence.
//!
//! The global search runs damped Newton inside the feasible region from
//! seeded random starts. When a step wants to leave the region the iterate is
//! moved onto the boundary and Newton continues in boundary coordinates: the
//! tangency chart `(z, l4)` on the smooth part, and one-parameter curves on the
//! two ridges where the bracket vanishes at two places at once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DEFAULT_HERMITE_NODES;
use crate::perturbation::{
    boundary_point, skew_ridge_point, symmetric_boundary_point, BoundaryChartPoint, ChartValidity,
    Feasibility, FeasibleRegion, PerturbationVector,
};
use crate::posterior::PosteriorContext;
use crate::sensitivity::{
    grad_phi, kl_divergence_checked, psi, psi_gradient, psi_hessian, psi_unchecked, size_norm,
    Mat3, PredictiveQuadrature, SensitivityReport, Vec3,
};

/// `alpha` values of the default local sweep.
pub const DEFAULT_SWEEP: [f64; 5] = [0.05, 0.07, 0.10, 0.13, 0.15];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    PsiMin,
    PsiMax,
    KlMax,
    /// Larger `|Psi|` of the minimum and the maximum.
    PsiMaxAbs,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    #[default]
    None,
    Lambda3Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub objective: Objective,
    pub constraint: Constraint,
    pub quad_nodes: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            n_starts: 32,
            seed: 0,
            objective: Objective::PsiMin,
            constraint: Constraint::None,
            quad_nodes: DEFAULT_HERMITE_NODES,
        }
    }
}

impl OptimizerConfig {
    pub fn new(objective: Objective) -> Self {
        Self {
            objective,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.n_starts == 0 || self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "n_starts and max_iter must be at least 1".into(),
            ));
        }
        if !(1..=128).contains(&self.quad_nodes) {
            return Err(Error::InvalidConfig(format!(
                "quad_nodes must lie in 1..=128 so the doubling check fits, got {}",
                self.quad_nodes
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Interior,
    Boundary,
}

/// Boundary piece carrying the optimum, with its coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundaryPiece {
    /// Single tangency at `z`.
    Tangency { z: f64, lambda4: f64 },
    /// `l3 = 0`, tangent at `+-z`.
    SymmetricRidge { z: f64 },
    /// Tangent at two points whose standardised product is `-3`.
    SkewRidge { p: f64 },
    /// `l3 = 0` cross-section, tangent at `z = 0`.
    Face { lambda4: f64 },
}

impl BoundaryPiece {
    fn point(self, ctx: &PosteriorContext) -> Result<BoundaryChartPoint> {
        let prior = ctx.prior();
        match self {
            Self::Tangency { z, lambda4 } => boundary_point(prior, z, lambda4),
            Self::SymmetricRidge { z } => symmetric_boundary_point(prior, z),
            Self::SkewRidge { p } => skew_ridge_point(prior, p),
            Self::Face { lambda4 } => boundary_point(prior, 0.0, lambda4),
        }
    }

    fn coords(self) -> Vec<f64> {
        match self {
            Self::Tangency { z, lambda4 } => vec![z, lambda4],
            Self::SymmetricRidge { z } => vec![z],
            Self::SkewRidge { p } => vec![p],
            Self::Face { lambda4 } => vec![lambda4],
        }
    }

    fn with_coords(self, c: &[f64]) -> Self {
        match self {
            Self::Tangency { .. } => Self::Tangency {
                z: c[0],
                lambda4: c[1],
            },
            Self::SymmetricRidge { .. } => Self::SymmetricRidge { z: c[0] },
            Self::SkewRidge { .. } => Self::SkewRidge { p: c[0] },
            Self::Face { .. } => Self::Face { lambda4: c[0] },
        }
    }

    fn phase(self) -> Phase {
        match self {
            Self::Tangency { .. } => Phase::Chart,
            Self::SymmetricRidge { .. } | Self::SkewRidge { .. } | Self::Face { .. } => {
                Phase::Ridge
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Interior,
    Chart,
    Ridge,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub phase: Phase,
    pub iter: usize,
    pub lambda: PerturbationVector,
    /// Objective in its natural sign.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub lambda_hat: PerturbationVector,
    pub objective: Objective,
    pub objective_value: f64,
    pub location: Location,
    pub piece: Option<BoundaryPiece>,
    pub converged: bool,
    pub start_index: usize,
    pub starts_converged: usize,
    /// Steps of the winning start, including boundary pieces it tried and discarded.
    pub trace: Vec<TraceStep>,
    pub report: SensitivityReport,
}

/// The quantity being maximised; minimisation flips the sign.
struct Evaluator<'a> {
    ctx: &'a PosteriorContext,
    region: FeasibleRegion,
    kl: Option<PredictiveQuadrature>,
    sign: f64,
    restricted: bool,
}

impl<'a> Evaluator<'a> {
    fn new(
        ctx: &'a PosteriorContext,
        objective: Objective,
        constraint: Constraint,
        quad_nodes: usize,
    ) -> Result<Self> {
        let (kl, sign) = match objective {
            Objective::KlMax => (
                Some(PredictiveQuadrature::with_nodes(ctx, quad_nodes)?),
                1.0,
            ),
            Objective::PsiMax => (None, 1.0),
            Objective::PsiMin => (None, -1.0),
            Objective::PsiMaxAbs => unreachable!("split before evaluation"),
        };
        Ok(Self {
            ctx,
            region: ctx.region(),
            kl,
            sign,
            restricted: constraint == Constraint::Lambda3Zero,
        })
    }

    fn dim(&self) -> usize {
        if self.restricted {
            2
        } else {
            3
        }
    }

    fn embed(&self, x: &[f64]) -> PerturbationVector {
        if self.restricted {
            PerturbationVector::new(x[0], 0.0, x[1])
        } else {
            PerturbationVector::new(x[0], x[1], x[2])
        }
    }

    fn coords(&self, l: PerturbationVector) -> Vec<f64> {
        if self.restricted {
            vec![l.l2, l.l4]
        } else {
            l.to_array().to_vec()
        }
    }

    fn reduce_vec(&self, g: Vec3) -> Vec<f64> {
        if self.restricted {
            vec![g[0], g[2]]
        } else {
            g.to_vec()
        }
    }

    fn reduce_mat(&self, h: Mat3) -> Vec<Vec<f64>> {
        let idx: &[usize] = if self.restricted { &[0, 2] } else { &[0, 1, 2] };
        idx.iter()
            .map(|&i| idx.iter().map(|&j| h[i][j]).collect())
            .collect()
    }

    /// Maximised value, or `None` off the feasible region.
    fn value(&self, l: PerturbationVector) -> Option<f64> {
        if !self.region.contains(l) {
            return None;
        }
        let v = match &self.kl {
            Some(pq) => pq.kl_raw(l).ok()?,
            None => psi_unchecked(self.ctx, l),
        };
        v.is_finite().then_some(self.sign * v)
    }

    fn natural(&self, v: f64) -> f64 {
        self.sign * v
    }

    fn grad(&self, l: PerturbationVector) -> Vec<f64> {
        let g = match &self.kl {
            Some(pq) => pq.kl_gradient(l),
            None => psi_gradient(self.ctx, l),
        };
        self.reduce_vec(g.map(|x| self.sign * x))
    }

    fn hess(&self, l: PerturbationVector) -> Vec<Vec<f64>> {
        let h = match &self.kl {
            Some(pq) => pq.kl_hessian(l),
            None => psi_hessian(self.ctx, l),
        };
        self.reduce_mat(h.map(|r| r.map(|x| self.sign * x)))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Cholesky solve of `a x = b`; `None` unless `a` is positive definite.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Ascent direction `(-H + mu I)^{-1} g` with the smallest shift `mu` from
/// `0, 1e-10 scale, 1e-9 scale, ...` that makes the system positive definite.
fn newton_direction(g: &[f64], h: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let scale = h
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let mut mu = 0.0;
    for _ in 0..40 {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| -h[i][j] + if i == j { mu } else { 0.0 })
                    .collect()
            })
            .collect();
        if let Some(d) = cholesky_solve(&a, g) {
            return d;
        }
        mu = if mu == 0.0 { 1e-10 * scale } else { mu * 10.0 };
    }
    g.to_vec()
}

/// Outcome of one start.
#[derive(Clone, Debug)]
struct Candidate {
    lambda: PerturbationVector,
    value: f64,
    piece: Option<BoundaryPiece>,
    converged: bool,
    trace: Vec<TraceStep>,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        let tie = 1e-12 * (1.0 + self.value.abs().max(other.value.abs()));
        if self.value > other.value + tie {
            true
        } else if other.value > self.value + tie {
            false
        } else {
            self.lambda.norm() < other.lambda.norm()
        }
    }
}

fn best_of(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    cands
        .into_iter()
        .fold(None, |best: Option<Candidate>, c| match best {
            Some(b) if !c.beats(&b) => Some(b),
            _ => Some(c),
        })
}

struct Search<'a> {
    eval: Evaluator<'a>,
    tol: f64,
    max_iter: usize,
    /// Best grid point of each one-dimensional ridge, tried from every start.
    ridge_seeds: Vec<BoundaryPiece>,
}

impl Search<'_> {
    /// Coarse scan of each ridge so its Newton run starts in the right basin.
    fn scan_ridges(&mut self) {
        let s = self.eval.ctx.prior().dispersion();
        let mut grids: Vec<Vec<BoundaryPiece>> = vec![(1..=80)
            .map(|k| BoundaryPiece::SymmetricRidge {
                z: 0.05 * k as f64 / s.sqrt(),
            })
            .collect()];
        if !self.eval.restricted {
            grids.push(
                (-60..=60)
                    .map(|k| BoundaryPiece::SkewRidge { p: 0.1 * k as f64 })
                    .collect(),
            );
        }
        self.ridge_seeds = grids
            .into_iter()
            .filter_map(|grid| {
                grid.into_iter()
                    .filter_map(|p| self.chart_value(p).map(|(_, v)| (p, v)))
                    .fold(
                        None,
                        |best: Option<(BoundaryPiece, f64)>, (p, v)| match best {
                            Some((_, bv)) if bv >= v => best,
                            _ => Some((p, v)),
                        },
                    )
                    .map(|(p, _)| p)
            })
            .collect();
    }

    /// Feasible start: index 0 is the origin, the rest are uniform along a
    /// random direction inside the region.
    fn start(&self, seed: u64, index: usize) -> Result<PerturbationVector> {
        if index == 0 {
            return Ok(PerturbationVector::ZERO);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let k = self.eval.dim();
        loop {
            let dir: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm(&dir);
            if n < 1e-12 {
                continue;
            }
            let dir = self
                .eval
                .embed(&dir.iter().map(|x| x / n).collect::<Vec<_>>());
            let hit = self.eval.region.ray_from(PerturbationVector::ZERO, dir)?;
            if hit.alpha_max == 0.0 {
                continue;
            }
            let r = hit.alpha_max.min(1e3) * rng.random::<f64>().powf(1.0 / k as f64);
            return Ok(r * dir);
        }
    }

    fn run(&self, seed: u64, index: usize) -> Result<Candidate> {
        let start = self.start(seed, index)?;
        let mut trace = Vec::new();
        let (interior, exit) = self.interior(start, &mut trace)?;
        let Some(boundary) = exit else {
            return Ok(Candidate { trace, ..interior });
        };
        let mut cands = vec![interior];
        cands.extend(self.boundary(boundary, &mut trace)?);
        let best = best_of(cands).expect("non-empty");
        Ok(Candidate { trace, ..best })
    }

    /// Damped Newton inside the region; returns the last iterate and, if a
    /// step pressed against the boundary, the boundary point it reached.
    fn interior(
        &self,
        start: PerturbationVector,
        trace: &mut Vec<TraceStep>,
    ) -> Result<(Candidate, Option<PerturbationVector>)> {
        let ev = &self.eval;
        let mut x = ev.coords(start);
        let mut f = ev.value(start).ok_or(Error::Infeasible {
            l2: start.l2,
            l3: start.l3,
            l4: start.l4,
        })?;
        let mut converged = false;
        let mut exit = None;
        for iter in 0..self.max_iter {
            let l = ev.embed(&x);
            let g = ev.grad(l);
            let d = newton_direction(&g, &ev.hess(l));
            let slope = dot(&g, &d);
            if norm(&d) == 0.0 || !(slope > 0.0) {
                converged = true;
                break;
            }
            let mut t = 1.0;
            if ev.value(ev.embed(&axpy(&x, 1.0, &d))).is_none() {
                let hit = ev.region.ray_from(l, ev.embed(&d))?;
                let xb = axpy(&x, hit.alpha_max, &d);
                let lb = ev.embed(&xb);
                if let Some(fb) = ev.value(lb) {
                    // still ascending when it meets the boundary
                    if fb > f && dot(&ev.grad(lb), &d) > 0.0 {
                        trace.push(TraceStep {
                            phase: Phase::Interior,
                            iter,
                            lambda: lb,
                            value: ev.natural(fb),
                        });
                        x = xb;
                        f = fb;
                        exit = Some(lb);
                        break;
                    }
                }
                t = hit.alpha_max;
            }
            let mut accepted = None;
            while t > 1e-14 {
                let xn = axpy(&x, t, &d);
                if let Some(fn_) = ev.value(ev.embed(&xn)) {
                    if fn_ >= f + 1e-4 * t * slope {
                        accepted = Some((xn, fn_));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((xn, fn_)) = accepted else {
                converged = slope <= 1e-12 * (1.0 + f.abs());
                break;
            };
            let step = t * norm(&d);
            x = xn;
            f = fn_;
            trace.push(TraceStep {
                phase: Phase::Interior,
                iter,
                lambda: ev.embed(&x),
                value: ev.natural(f),
            });
            if step < self.tol * (1.0 + norm(&x)) {
                converged = true;
                break;
            }
        }
        let cand = Candidate {
            lambda: ev.embed(&x),
            value: f,
            piece: None,
            converged,
            trace: Vec::new(),
        };
        Ok((cand, exit))
    }

    /// Newton on every boundary piece reachable from `lb`.
    fn boundary(
        &self,
        lb: PerturbationVector,
        trace: &mut Vec<TraceStep>,
    ) -> Result<Vec<Candidate>> {
        let ev = &self.eval;
        let s = ev.ctx.prior().dispersion();
        let check = ev.region.classify(lb)?;
        let zs = check.argmin.unwrap_or(0.0);
        let u = zs * s.sqrt();
        let mut pieces = Vec::new();
        if ev.restricted {
            let z = if zs.abs() > 1e-6 {
                zs.abs()
            } else {
                1.0 / s.sqrt()
            };
            pieces.push(BoundaryPiece::SymmetricRidge { z });
            pieces.push(BoundaryPiece::Face { lambda4: lb.l4 });
        } else {
            pieces.push(BoundaryPiece::Tangency {
                z: zs,
                lambda4: lb.l4,
            });
            let z = if zs.abs() > 1e-6 {
                zs.abs()
            } else {
                1.0 / s.sqrt()
            };
            pieces.push(BoundaryPiece::SymmetricRidge { z });
            let p = if u.abs() > 1e-6 { u - 3.0 / u } else { 0.0 };
            pieces.push(BoundaryPiece::SkewRidge { p });
        }
        pieces.extend(self.ridge_seeds.iter().copied());
        let mut out = Vec::new();
        for piece in pieces {
            if let Some(c) = self.chart_newton(piece, trace) {
                out.push(c);
            }
        }
        Ok(out)
    }

    fn chart_value(&self, piece: BoundaryPiece) -> Option<(PerturbationVector, f64)> {
        let b = piece.point(self.eval.ctx).ok()?;
        if b.validity != ChartValidity::OnBoundary {
            return None;
        }
        let l = b.lambda;
        if self.eval.restricted && l.l3 != 0.0 {
            return None;
        }
        self.eval.value(l).map(|v| (l, v))
    }

    /// Newton in the coordinates of one boundary piece with central
    /// differences; points whose chart image leaves the boundary are rejected.
    fn chart_newton(&self, piece: BoundaryPiece, trace: &mut Vec<TraceStep>) -> Option<Candidate> {
        let mut x = piece.coords();
        let (mut l, mut f) = self.chart_value(piece)?;
        let n = x.len();
        let at = |c: &[f64]| self.chart_value(piece.with_coords(c)).map(|(_, v)| v);
        let mut converged = false;
        for iter in 0..self.max_iter {
            let h: Vec<f64> = x.iter().map(|c| 1e-4 * (1.0 + c.abs())).collect();
            let mut g = vec![0.0; n];
            let mut hm = vec![vec![0.0; n]; n];
            let mut ok = true;
            'fd: for i in 0..n {
                let mut xp = x.clone();
                xp[i] += h[i];
                let mut xm = x.clone();
                xm[i] -= h[i];
                let (Some(fp), Some(fm)) = (at(&xp), at(&xm)) else {
                    ok = false;
                    break 'fd;
                };
                g[i] = (fp - fm) / (2.0 * h[i]);
                hm[i][i] = (fp - 2.0 * f + fm) / (h[i] * h[i]);
                for j in 0..i {
                    let mut c = x.clone();
                    let mut vals = [0.0; 4];
                    for (k, (si, sj)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                        .into_iter()
                        .enumerate()
                    {
                        c[i] = x[i] + si * h[i];
                        c[j] = x[j] + sj * h[j];
                        match at(&c) {
                            Some(v) => vals[k] = v,
                            None => {
                                ok = false;
                                break 'fd;
                            }
                        }
                    }
                    let v = (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * h[i] * h[j]);
                    hm[i][j] = v;
                    hm[j][i] = v;
                }
            }
            if !ok {
                // pressed against the edge of this piece; another piece takes over
                break;
            }
            let d = newton_direction(&g, &hm);
            let slope = dot(&g, &d);
            if !(slope > 0.0) {
                converged = true;
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-12 {
                let xn = axpy(&x, t, &d);
                if let Some((ln, fn_)) = self.chart_value(piece.with_coords(&xn)) {
                    if fn_ >= f + 1e-4 * t * slope {
                        accepted = Some((xn, ln, fn_));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((xn, ln, fn_)) = accepted else {
                converged = slope <= 1e-10 * (1.0 + f.abs());
                break;
            };
            let step = t * norm(&d);
            x = xn;
            l = ln;
            f = fn_;
            trace.push(TraceStep {
                phase: piece.phase(),
                iter,
                lambda: l,
                value: self.eval.natural(f),
            });
            if step < self.tol * (1.0 + norm(&x)) {
                converged = true;
                break;
            }
        }
        Some(Candidate {
            lambda: l,
            value: f,
            piece: Some(piece.with_coords(&x)),
            converged,
            trace: Vec::new(),
        })
    }
}

/// Global extremum of the configured objective over the feasible region.
pub fn extremize(ctx: &PosteriorContext, config: &OptimizerConfig) -> Result<OptimizerResult> {
    config.validate()?;
    if config.objective == Objective::PsiMaxAbs {
        let lo = extremize(
            ctx,
            &OptimizerConfig {
                objective: Objective::PsiMin,
                ..config.clone()
            },
        )?;
        let hi = extremize(
            ctx,
            &OptimizerConfig {
                objective: Objective::PsiMax,
                ..config.clone()
            },
        )?;
        let mut best = if hi.objective_value.abs() > lo.objective_value.abs() {
            hi
        } else {
            lo
        };
        best.objective = Objective::PsiMaxAbs;
        return Ok(best);
    }
    let mut search = Search {
        eval: Evaluator::new(ctx, config.objective, config.constraint, config.quad_nodes)?,
        tol: config.tol,
        max_iter: config.max_iter,
        ridge_seeds: Vec::new(),
    };
    search.scan_ridges();
    let runs: Vec<Result<Candidate>> = (0..config.n_starts)
        .into_par_iter()
        .map(|i| search.run(config.seed, i))
        .collect();
    let mut starts_converged = 0;
    let mut best: Option<(usize, Candidate)> = None;
    for (i, run) in runs.into_iter().enumerate() {
        let c = run?;
        starts_converged += usize::from(c.converged);
        best = match best {
            Some((j, b)) if !c.beats(&b) => Some((j, b)),
            _ => Some((i, c)),
        };
    }
    let (start_index, best) = best.expect("n_starts >= 1");
    let status = ctx.region().classify(best.lambda)?.status;
    let report = SensitivityReport::evaluate(ctx, best.lambda, config.quad_nodes)?;
    Ok(OptimizerResult {
        lambda_hat: best.lambda,
        objective: config.objective,
        objective_value: search.eval.natural(best.value),
        location: if status == Feasibility::Interior && best.piece.is_none() {
            Location::Interior
        } else {
            Location::Boundary
        },
        piece: best.piece.map(|p| match p {
            BoundaryPiece::SymmetricRidge { z } => BoundaryPiece::SymmetricRidge { z: z.abs() },
            other => other,
        }),
        converged: best.converged,
        start_index,
        starts_converged,
        trace: best.trace,
        report,
    })
}

/// [`extremize`] confined to the `l3 = 0` cross-section.
pub fn extremize_restricted(
    ctx: &PosteriorContext,
    config: &OptimizerConfig,
) -> Result<OptimizerResult> {
    extremize(
        ctx,
        &OptimizerConfig {
            constraint: Constraint::Lambda3Zero,
            ..config.clone()
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Euclidean,
    /// Unit `L^2(pi0)` size.
    SizeNorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionStatus {
    /// `grad phi` itself enters the region.
    Gradient,
    /// `grad phi` leaves at once; its projection onto `l4 = 0` enters.
    ProjectedFeasible,
    /// Neither the gradient nor its projection enters the region.
    ProjectedInfeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstDirection {
    pub grad_phi: Vec3,
    pub direction: PerturbationVector,
    pub status: DirectionStatus,
    /// Exit distance along `direction`; `0` when the ray is infeasible.
    pub alpha_max: f64,
}

/// Direction of steepest local change of the posterior mean.
pub fn worst_direction(ctx: &PosteriorContext, constraint: Constraint) -> Result<WorstDirection> {
    worst_direction_with(ctx, constraint, Normalization::Euclidean)
}

pub fn worst_direction_with(
    ctx: &PosteriorContext,
    constraint: Constraint,
    normalization: Normalization,
) -> Result<WorstDirection> {
    let mut g = grad_phi(ctx);
    if constraint == Constraint::Lambda3Zero {
        g[1] = 0.0;
    }
    direction_from_gradient(ctx, g, normalization)
}

/// Direction choice for a given gradient of `phi`.
pub fn direction_from_gradient(
    ctx: &PosteriorContext,
    g: Vec3,
    normalization: Normalization,
) -> Result<WorstDirection> {
    let region = ctx.region();
    let unit = |v: PerturbationVector| -> Result<PerturbationVector> {
        let n = match normalization {
            Normalization::Euclidean => v.norm(),
            Normalization::SizeNorm => size_norm(ctx.prior(), v, 2.0)?,
        };
        if v.is_zero() || n == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok((1.0 / n) * v)
    };
    let grad = PerturbationVector::from_array(g);
    let dir = unit(grad)?;
    let hit = region.ray_from(PerturbationVector::ZERO, dir)?;
    if hit.alpha_max > 0.0 {
        return Ok(WorstDirection {
            grad_phi: g,
            direction: dir,
            status: DirectionStatus::Gradient,
            alpha_max: hit.alpha_max,
        });
    }
    let proj = unit(PerturbationVector::new(g[0], g[1], 0.0))?;
    let hit = region.ray_from(PerturbationVector::ZERO, proj)?;
    Ok(WorstDirection {
        grad_phi: g,
        direction: proj,
        status: if hit.alpha_max > 0.0 {
            DirectionStatus::ProjectedFeasible
        } else {
            DirectionStatus::ProjectedInfeasible
        },
        alpha_max: hit.alpha_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepPoint {
    Inside,
    /// Requested `alpha` lay beyond the boundary and was clipped to it.
    Clipped,
    /// Exit point of the ray.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub alpha: f64,
    pub lambda: PerturbationVector,
    pub psi: f64,
    pub d: f64,
    pub kl: f64,
    pub point: SweepPoint,
}

/// Sensitivity along `alpha * direction`, ending with the boundary exit point
/// when the ray leaves the region.
pub fn local_sweep(
    ctx: &PosteriorContext,
    direction: PerturbationVector,
    alphas: &[f64],
    quad_nodes: usize,
) -> Result<Vec<SweepEntry>> {
    let hit = ctx.region().ray_from(PerturbationVector::ZERO, direction)?;
    if hit.alpha_max == 0.0 {
        return Err(Error::Infeasible {
            l2: direction.l2,
            l3: direction.l3,
            l4: direction.l4,
        });
    }
    let entry = |alpha: f64, point| -> Result<SweepEntry> {
        let lambda = alpha * direction;
        let psi = psi(ctx, lambda)?;
        Ok(SweepEntry {
            alpha,
            lambda,
            psi,
            d: psi.abs() / ctx.post_sd(),
            kl: kl_divergence_checked(ctx, lambda, quad_nodes).or_else(|e| match e {
                Error::QuadratureMismatch { fine, .. } => Ok(fine),
                e => Err(e),
            })?,
            point,
        })
    };
    let mut out = Vec::with_capacity(alphas.len() + 1);
    for &a in alphas {
        if a < 0.0 || !a.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sweep alpha must be a nonnegative number, got {a}"
            )));
        }
        if a <= hit.alpha_max {
            out.push(entry(a, SweepPoint::Inside)?);
        } else {
            out.push(entry(hit.alpha_max, SweepPoint::Clipped)?);
        }
    }
    if hit.alpha_max.is_finite() {
        out.push(entry(hit.alpha_max, SweepPoint::Boundary)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::NefPrior;

    fn example_ctx() -> PosteriorContext {
        let prior = NefPrior::normal(2.0, 1.0).unwrap();
        PosteriorContext::from_summary(&prior, 1.0, 15, 1.0).unwrap()
    }

    #[test]
    fn direction_examples() {
        let ctx = example_ctx();
        let d = direction_from_gradient(&ctx, [0.0, 0.0, 1.0], Normalization::Euclidean).unwrap();
        assert_eq!(d.direction, PerturbationVector::new(0.0, 0.0, 1.0));
        assert_eq!(d.status, DirectionStatus::Gradient);
        let d = direction_from_gradient(&ctx, [1.0, 0.0, -2.0], Normalization::Euclidean).unwrap();
        assert_eq!(d.direction, PerturbationVector::new(1.0, 0.0, 0.0));
        assert_eq!(d.status, DirectionStatus::ProjectedFeasible);
        let d = direction_from_gradient(&ctx, [1.0, 0.5, -2.0], Normalization::Euclidean).unwrap();
        assert_eq!(d.status, DirectionStatus::ProjectedInfeasible);
        assert_eq!(
            direction_from_gradient(&ctx, [0.0, 0.0, 0.0], Normalization::Euclidean),
            Err(Error::ZeroDirection)
        );
    }

    #[test]
    fn sweep_increases_to_boundary() {
        let ctx = example_ctx();
        let w = worst_direction(&ctx, Constraint::None).unwrap();
        assert_eq!(w.status, DirectionStatus::Gradient);
        let sweep = local_sweep(&ctx, w.direction, &DEFAULT_SWEEP, 64).unwrap();
        assert!(sweep.windows(2).all(|p| p[1].d >= p[0].d));
        assert_eq!(sweep.last().unwrap().point, SweepPoint::Boundary);
    }

    #[test]
    fn cholesky_and_direction() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = cholesky_solve(&a, &[1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-15 && (x[0] + 3.0 * x[1] - 2.0).abs() < 1e-15);
        assert!(cholesky_solve(&[vec![1.0, 2.0], vec![2.0, 1.0]], &[1.0, 0.0]).is_none());
        // indefinite Hessian still gives an ascent direction
        let d = newton_direction(&[1.0, 1.0], &[vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert!(d[0] + d[1] > 0.0);
    }

    #[test]
    fn psi_min_lands_on_symmetric_ridge() {
        let ctx = example_ctx();
        let cfg = OptimizerConfig {
            n_starts: 8,
            ..OptimizerConfig::new(Objective::PsiMin)
        };
        let r = extremize(&ctx, &cfg).unwrap();
        assert_eq!(r.location, Location::Boundary);
        assert!(r.lambda_hat.l3.abs() < 1e-6, "{:?}", r.lambda_hat);
        assert!(
            (r.objective_value + 0.318343).abs() < 1e-5,
            "{}",
            r.objective_value
        );
        let rr = extremize_restricted(&ctx, &cfg).unwrap();
        assert_eq!(rr.lambda_hat.l3, 0.0);
        assert!((rr.objective_value - r.objective_value).abs() < 1e-8);
    }
}
