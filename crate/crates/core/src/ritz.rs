//! Variational (Ritz) losses for the two model problems, spectral exact
//! energies, the energy-excess / H^1 sandwich, and projected first-order
//! training of constrained two-layer networks.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::exact::{check_potential_positive, poisson_solve, schrodinger_solve};
use crate::field::Field;
use crate::index::MultiIndex;
use crate::net::{Activation, NetGrad, TwoLayerNet};
use crate::quad::{QuadratureRule, SampleGenerator, SampleSet};
use crate::rng;
use crate::series::CosineSeries;

const PI: f64 = std::f64::consts::PI;

/// Poincare constant of the unit cube: reciprocal of the smallest nonzero
/// Neumann eigenvalue pi^2.
pub const POINCARE_CONSTANT: f64 = 1.0 / (PI * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Poisson,
    Schrodinger,
}

/// Empirical Ritz loss over a fixed sample set. Poisson adds the squared
/// sample mean to pin down the constant mode; Schroedinger uses the
/// potential term instead.
pub fn empirical_loss(
    u: &dyn Field,
    samples: &SampleSet,
    f: &CosineSeries,
    v: Option<&CosineSeries>,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(CoreError::EmptySampleSet);
    }
    let n = samples.len() as f64;
    let mut acc = 0.0;
    let mut mean = 0.0;
    for x in samples.points() {
        let (uv, ug) = u.eval_grad(x)?;
        let grad_sq: f64 = ug.iter().map(|g| g * g).sum();
        acc += 0.5 * grad_sq - f.eval(x)? * uv;
        match v {
            Some(v) => acc += 0.5 * v.eval(x)? * uv * uv,
            None => mean += uv,
        }
    }
    let mut loss = acc / n;
    if v.is_none() {
        loss += 0.5 * (mean / n) * (mean / n);
    }
    Ok(loss)
}

/// Population Ritz loss by quadrature; see [`population_rules`] for the
/// default rule choice.
pub fn population_loss(
    u: &dyn Field,
    f: &CosineSeries,
    v: Option<&CosineSeries>,
    rule: &QuadratureRule,
) -> Result<f64> {
    let mut acc = 0.0;
    let mut mean = 0.0;
    for (x, wt) in rule.nodes() {
        let (uv, ug) = u.eval_grad(x)?;
        let grad_sq: f64 = ug.iter().map(|g| g * g).sum();
        acc += wt * (0.5 * grad_sq - f.eval(x)? * uv);
        match v {
            Some(v) => acc += wt * 0.5 * v.eval(x)? * uv * uv,
            None => mean += wt * uv,
        }
    }
    if v.is_none() {
        acc += 0.5 * mean * mean;
    }
    Ok(acc)
}

/// Quadrature rules for population integrals: a single tensor
/// Gauss-Legendre rule (48 nodes per axis) up to dimension 3, four
/// independently shifted low-discrepancy rules of 2^16 points above that.
pub fn population_rules(dim: usize, seed: u64) -> Vec<QuadratureRule> {
    if dim <= 3 {
        vec![QuadratureRule::tensor_gauss(dim, 48)]
    } else {
        (0..4)
            .map(|i| {
                QuadratureRule::halton(dim, 1 << 16, Some(rng::derive_key(seed, "pop-shift") + i))
            })
            .collect()
    }
}

/// Exact Ritz energy of the spectral minimizer: the diagonal identity
/// `-1/2 sum alpha_k pi^2 |k|^2 u^2` plus, for Schroedinger,
/// `-1/2 <V u, u>`.
pub fn exact_energy(u_star: &CosineSeries, v: Option<&CosineSeries>) -> Result<f64> {
    let mut dirichlet = 0.0;
    for (k, c) in u_star.terms() {
        dirichlet += k.alpha() * PI * PI * k.l2_sq() as f64 * c * c;
    }
    match v {
        None => {
            let mean = u_star.coeff(&MultiIndex::zero(u_star.dim()));
            if mean.abs() > 1e-12 {
                return Err(CoreError::NonzeroMean { mean });
            }
            Ok(-0.5 * dirichlet)
        }
        Some(v) => {
            let vu = v.product(u_star)?;
            let mut pairing = 0.0;
            for (k, c) in u_star.terms() {
                pairing += k.alpha() * vu.coeff(k) * c;
            }
            Ok(-0.5 * (dirichlet + pairing))
        }
    }
}

/// Outcome of the two-route energy-excess computation and the sandwich
/// between excess and squared H^1 error.
#[derive(Debug, Clone, Serialize)]
pub struct ExcessReport {
    /// `E(u) - E(u*)` via quadrature of the loss.
    pub excess_loss_route: f64,
    /// The same quantity via the explicit difference identity.
    pub excess_identity_route: f64,
    pub agreement: f64,
    pub h1_sq: f64,
    /// `lower_factor * excess <= h1_sq <= upper_factor * excess`.
    pub lower_factor: f64,
    pub upper_factor: f64,
    pub sandwich_ok: bool,
}

/// Computes the energy excess of `u` against the spectral minimizer
/// `u_star` two independent ways and checks the equivalence sandwich with
/// the squared H^1 error.
pub fn energy_excess(
    u: &dyn Field,
    u_star: &CosineSeries,
    f: &CosineSeries,
    v: Option<&CosineSeries>,
    rule: &QuadratureRule,
) -> Result<ExcessReport> {
    let loss_route = population_loss(u, f, v, rule)? - exact_energy(u_star, v)?;

    // identity route and H^1 distance share one sweep over the rule
    let mut grad_sq = 0.0;
    let mut val_sq = 0.0;
    let mut weighted_sq = 0.0;
    let mut mean_diff = 0.0;
    for (x, wt) in rule.nodes() {
        let (uv, ug) = u.eval_grad(x)?;
        let (sv, sg) = u_star.eval_grad(x)?;
        let dv = uv - sv;
        let dg: f64 = ug.iter().zip(&sg).map(|(a, b)| (a - b) * (a - b)).sum();
        grad_sq += wt * dg;
        val_sq += wt * dv * dv;
        match v {
            Some(v) => weighted_sq += wt * v.eval(x)? * dv * dv,
            None => mean_diff += wt * dv,
        }
    }
    let identity_route = match v {
        None => 0.5 * grad_sq + 0.5 * mean_diff * mean_diff,
        Some(_) => 0.5 * grad_sq + 0.5 * weighted_sq,
    };
    let h1_sq = grad_sq + val_sq;

    let (lower_factor, upper_factor) = match v {
        None => (2.0, 2.0 * (2.0 * POINCARE_CONSTANT + 1.0).max(2.0)),
        Some(v) => {
            let (v_min, v_max) = check_potential_positive(v, v.max_freq().max(8))?;
            (2.0 / v_max.max(1.0), 2.0 / v_min.min(1.0))
        }
    };
    let tol = 1e-6 * (1.0 + h1_sq.abs());
    let sandwich_ok = lower_factor * identity_route <= h1_sq + tol
        && h1_sq <= upper_factor * identity_route + tol;

    Ok(ExcessReport {
        excess_loss_route: loss_route,
        excess_identity_route: identity_route,
        agreement: (loss_route - identity_route).abs(),
        h1_sq,
        lower_factor,
        upper_factor,
        sandwich_ok,
    })
}

/// Exact parameter gradient of [`empirical_loss`] by reverse mode through
/// each sample; the Poisson mean term contributes through a first pass
/// computing the sample mean.
pub fn loss_gradient(
    net: &TwoLayerNet,
    samples: &SampleSet,
    f: &CosineSeries,
    v: Option<&CosineSeries>,
) -> Result<NetGrad> {
    if samples.is_empty() {
        return Err(CoreError::EmptySampleSet);
    }
    let n = samples.len() as f64;
    let mean = match v {
        None => {
            let mut acc = 0.0;
            for x in samples.points() {
                acc += net.eval(x)?;
            }
            acc / n
        }
        Some(_) => 0.0,
    };
    let mut grad = NetGrad::zeros(net.dim, net.m);
    for x in samples.points() {
        let (uv, ug) = net.eval_grad(x)?;
        let seed_value = match v {
            None => (mean - f.eval(x)?) / n,
            Some(v) => (v.eval(x)? * uv - f.eval(x)?) / n,
        };
        let seed_gradient: Vec<f64> = ug.iter().map(|g| g / n).collect();
        grad.add_scaled(&net.param_grad(x, seed_value, &seed_gradient)?, 1.0);
    }
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Plain,
    Momentum { beta: f64 },
    /// AdaGrad-style per-coordinate step scaling.
    Adaptive { eps: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Momentum { beta: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    #[default]
    Random,
    /// Start from the constructive approximant of the exact solution.
    Approximant,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ProblemKind,
    pub f: CosineSeries,
    #[serde(default)]
    pub v: Option<CosineSeries>,
    pub m: usize,
    pub budget: f64,
    /// Softplus temperature; `sqrt(m)` when unset.
    #[serde(default)]
    pub tau: Option<f64>,
    pub n: usize,
    #[serde(default)]
    pub optimizer: Optimizer,
    /// Step size; `1e-2 * budget` when unset.
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_cadence")]
    pub projection_cadence: usize,
    pub seed: u64,
    #[serde(default)]
    pub init: InitMode,
}

fn default_iters() -> usize {
    20_000
}

fn default_cadence() -> usize {
    1
}

impl TrainConfig {
    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or((self.m as f64).sqrt())
    }

    pub fn step(&self) -> f64 {
        self.step.unwrap_or(1e-2 * self.budget)
    }

    /// The spectral ground truth the configuration describes.
    pub fn exact_solution(&self) -> Result<CosineSeries> {
        match self.kind {
            ProblemKind::Poisson => poisson_solve(&self.f),
            ProblemKind::Schrodinger => {
                let v = self.v.as_ref().ok_or_else(|| {
                    CoreError::InvalidArgument("schrodinger config needs a potential".into())
                })?;
                let bound = self.f.max_freq() + v.max_freq() + 8;
                Ok(schrodinger_solve(&self.f, v, bound)?.u)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainDiagnostics {
    pub excess: ExcessReport,
    pub h1_error: f64,
    /// Population minus empirical loss at the returned iterate.
    pub gen_gap_proxy: f64,
    /// Energy excess of the constructive approximant at the same width,
    /// standing in for the (uncomputable) best-in-class minimizer.
    pub approx_excess_proxy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub net: TwoLayerNet,
    /// Empirical loss per iteration, entry 0 = initialization.
    pub trajectory: Vec<f64>,
    pub diagnostics: TrainDiagnostics,
}

/// Projected first-order minimization of the empirical Ritz loss. Retains
/// the feasible iterate with the lowest empirical loss (earliest wins
/// ties); aborts when the loss exceeds 1e6.
pub fn train(config: &TrainConfig) -> Result<TrainResult> {
    let dim = self_dim(config)?;
    let u_star = config.exact_solution()?;
    let activation = Activation::softplus(config.tau());
    let samples = SampleSet::generate(
        dim,
        config.n,
        rng::derive_key(config.seed, "train-samples"),
        SampleGenerator::IidUniform,
    );
    let f = &config.f;
    let v = config.v.as_ref();

    let mut net = match config.init {
        InitMode::Random => TwoLayerNet::init_random(
            dim,
            config.m,
            config.budget,
            activation,
            rng::derive_key(config.seed, "train-init"),
        ),
        InitMode::Approximant => {
            let mut approx = crate::approx::build_approximant(
                &u_star,
                config.m.max(2),
                crate::approx::ApproximantActivation::Softplus,
                rng::derive_key(config.seed, "train-init"),
            )?;
            approx.activation = activation;
            approx.budget = approx.budget.max(config.budget);
            approx
        }
    };

    let mut best = net.clone();
    let mut best_loss = empirical_loss(&net, &samples, f, v)?;
    let mut trajectory = vec![best_loss];
    let step = config.step();
    let cadence = config.projection_cadence.max(1);
    let mut velocity = NetGrad::zeros(net.dim, net.m);
    let mut second_moment = NetGrad::zeros(net.dim, net.m);

    for iter in 1..=config.iters {
        let g = loss_gradient(&net, &samples, f, v)?;
        match config.optimizer {
            Optimizer::Plain => apply_scaled_update(&mut net, &g, -step),
            Optimizer::Momentum { beta } => {
                velocity.scale(beta);
                velocity.add_scaled(&g, -step);
                apply_update(&mut net, &velocity);
            }
            Optimizer::Adaptive { eps } => {
                accumulate_squares(&mut second_moment, &g);
                let scaled = adaptive_direction(&g, &second_moment, eps);
                apply_scaled_update(&mut net, &scaled, -step);
            }
        }
        let projected = iter % cadence == 0;
        if projected {
            net = net.project();
        }
        let loss = empirical_loss(&net, &samples, f, v)?;
        if !loss.is_finite() || loss > 1e6 {
            return Err(CoreError::Diverged { iter, loss });
        }
        trajectory.push(loss);
        if projected && loss < best_loss {
            best_loss = loss;
            best = net.clone();
        }
    }

    let rule = &population_rules(dim, config.seed)[0];
    let excess = energy_excess(&best, &u_star, f, v, rule)?;
    let h1_error = excess.h1_sq.max(0.0).sqrt();
    let gen_gap_proxy = population_loss(&best, f, v, rule)? - best_loss;
    let approx_excess_proxy = {
        let reference = crate::approx::build_approximant(
            &u_star,
            config.m.max(2),
            crate::approx::ApproximantActivation::Softplus,
            rng::derive_key(config.seed, "approx-proxy"),
        )?;
        energy_excess(&reference, &u_star, f, v, rule)?.excess_identity_route
    };

    Ok(TrainResult {
        net: best,
        trajectory,
        diagnostics: TrainDiagnostics {
            excess,
            h1_error,
            gen_gap_proxy,
            approx_excess_proxy,
        },
    })
}

fn self_dim(config: &TrainConfig) -> Result<usize> {
    if let Some(v) = &config.v {
        if v.dim() != config.f.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: config.f.dim(),
                got: v.dim(),
            });
        }
    }
    Ok(config.f.dim())
}

fn apply_update(net: &mut TwoLayerNet, delta: &NetGrad) {
    net.c += delta.c;
    for i in 0..net.m {
        net.gamma[i] += delta.gamma[i];
        net.t[i] += delta.t[i];
        for a in 0..net.dim {
            net.w[i][a] += delta.w[i][a];
        }
    }
}

/// `theta += scale * g`, leaving feasibility to the caller's projection.
pub fn apply_scaled_update(net: &mut TwoLayerNet, g: &NetGrad, scale: f64) {
    let mut d = g.clone();
    d.scale(scale);
    apply_update(net, &d);
}

fn accumulate_squares(acc: &mut NetGrad, g: &NetGrad) {
    acc.c += g.c * g.c;
    for i in 0..g.gamma.len() {
        acc.gamma[i] += g.gamma[i] * g.gamma[i];
        acc.t[i] += g.t[i] * g.t[i];
        for a in 0..g.w[i].len() {
            acc.w[i][a] += g.w[i][a] * g.w[i][a];
        }
    }
}

fn adaptive_direction(g: &NetGrad, acc: &NetGrad, eps: f64) -> NetGrad {
    let mut d = g.clone();
    d.c /= acc.c.sqrt() + eps;
    for i in 0..d.gamma.len() {
        d.gamma[i] /= acc.gamma[i].sqrt() + eps;
        d.t[i] /= acc.t[i].sqrt() + eps;
        for a in 0..d.w[i].len() {
            d.w[i][a] /= acc.w[i][a].sqrt() + eps;
        }
    }
    d
}
