//! Constructive two-layer approximation of spectral Barron functions:
//! Maurey sampling of ridge cosine features, piecewise-linear-to-ReLU
//! conversion on `[-1,1]`, and the Softplus swap with its explicit error
//! budget.

use rand::Rng;

use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::index::MultiIndex;
use crate::net::{Activation, TwoLayerNet};
use crate::quad::QuadratureRule;
use crate::rng;
use crate::series::{CosineSeries, NormKind};

const PI: f64 = std::f64::consts::PI;

/// A one-dimensional ridge feature `g(z) = (gamma / (1 + pi^2 kappa^2))
/// cos(pi (kappa z + b))` composed with `z = w . x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeProfile {
    pub amplitude: f64,
    pub freq: u32,
    /// Phase `b` of the cosine; 0 or 1. Sign flips are folded into
    /// `amplitude`, so samples always carry 0.
    pub phase: u8,
    /// Direction with `|w|_1 = 1`.
    pub direction: Vec<f64>,
}

impl RidgeProfile {
    /// `g^{(order)}(z)`; every derivative up to order 2 is bounded by
    /// `|amplitude|`.
    pub fn profile_eval(&self, z: f64, order: u8) -> f64 {
        let kappa = self.freq as f64;
        let scale = self.amplitude / (1.0 + PI * PI * kappa * kappa);
        let arg = PI * (kappa * z + self.phase as f64);
        match order {
            0 => scale * arg.cos(),
            1 => -scale * PI * kappa * arg.sin(),
            2 => -scale * (PI * kappa).powi(2) * arg.cos(),
            _ => panic!("profile derivative order must be 0, 1 or 2"),
        }
    }

    /// Uniform bound for the profile and its first two derivatives.
    pub fn deriv_bound(&self) -> f64 {
        self.amplitude.abs()
    }

    fn ridge_coordinate(&self, x: &[f64]) -> f64 {
        self.direction.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// An equal-weight convex combination of ridge features plus a constant.
#[derive(Debug, Clone)]
pub struct MaureySample {
    pub base: f64,
    pub features: Vec<RidgeProfile>,
    pub normalizer: f64,
}

impl Field for MaureySample {
    fn dim(&self) -> usize {
        self.features
            .first()
            .map(|f| f.direction.len())
            .unwrap_or(0)
    }

    fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut value = self.base;
        let mut grad = vec![0.0; x.len()];
        let weight = 1.0 / self.features.len().max(1) as f64;
        for f in &self.features {
            let z = f.ridge_coordinate(x);
            value += weight * f.profile_eval(z, 0);
            let d = weight * f.profile_eval(z, 1);
            for (g, w) in grad.iter_mut().zip(&f.direction) {
                *g += d * w;
            }
        }
        Ok((value, grad))
    }
}

/// Draws `m1` i.i.d. ridge features whose average is an unbiased
/// reconstruction of `u - u\u{302}(0)`, with expected squared `H^1` error at
/// most `||u||_B^2 / m1`.
///
/// Each draw samples a mode `k` with probability proportional to
/// `|u\u{302}(k)| (1 + pi^2 |k|_1^2)` and an independent sign pattern on the
/// nonzero entries of `k`; the feature has direction `k_xi / |k|_1` and
/// signed amplitude `sign(u\u{302}(k)) Z_u`.
pub fn maurey_sample(u: &CosineSeries, m1: usize, seed: u64) -> Result<MaureySample> {
    let d = u.dim();
    let base = u.coeff(&MultiIndex::zero(d));
    let modes: Vec<(&MultiIndex, f64, f64)> = u
        .terms()
        .filter(|(k, _)| !k.is_zero())
        .map(|(k, v)| {
            let weight = v.abs() * (1.0 + PI * PI * (k.l1() as f64).powi(2));
            (k, v, weight)
        })
        .collect();
    let normalizer: f64 = modes.iter().map(|(_, _, w)| w).sum();
    if normalizer == 0.0 {
        return Ok(MaureySample {
            base,
            features: vec![],
            normalizer,
        });
    }
    let mut features = Vec::with_capacity(m1);
    for draw in 0..m1 {
        let mut r = rng::substream(seed, "maurey-feature", draw as u64);
        let mut target = r.gen::<f64>() * normalizer;
        let mut chosen = modes.len() - 1;
        for (i, (_, _, w)) in modes.iter().enumerate() {
            if target < *w {
                chosen = i;
                break;
            }
            target -= w;
        }
        let (k, coeff, _) = modes[chosen];
        let l1 = k.l1() as f64;
        let direction: Vec<f64> = k
            .entries()
            .iter()
            .map(|&e| {
                let sign = if e != 0 && r.gen::<bool>() { -1.0 } else { 1.0 };
                sign * e as f64 / l1
            })
            .collect();
        features.push(RidgeProfile {
            amplitude: coeff.signum() * normalizer,
            freq: k.l1() as u32,
            phase: 0,
            direction,
        });
    }
    Ok(MaureySample {
        base,
        features,
        normalizer,
    })
}

/// One hidden unit of a one-dimensional two-layer combination
/// `a * phi(eps z - b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeUnit {
    pub a: f64,
    pub eps: f64,
    pub b: f64,
}

/// `c + sum_i a_i phi(eps_i z - b_i)` on `[-1,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeCombination {
    pub c: f64,
    pub units: Vec<RidgeUnit>,
    pub activation: Activation,
}

impl RidgeCombination {
    pub fn eval(&self, z: f64, order: u8) -> f64 {
        let mut v = if order == 0 { self.c } else { 0.0 };
        for u in &self.units {
            let inner = u.eps * z - u.b;
            v += match order {
                0 => u.a * self.activation.eval(inner, 0),
                1 => u.a * u.eps * self.activation.eval(inner, 1),
                _ => panic!("ridge combination derivative order must be 0 or 1"),
            };
        }
        v
    }

    pub fn coeff_l1(&self) -> f64 {
        self.units.iter().map(|u| u.a.abs()).sum()
    }
}

/// Exact piecewise-linear interpolation of a `C^2` profile on the uniform
/// grid `z_j = -1 + j/m2`, written as a ReLU combination with
/// `|a_i| <= 2B/m2` and `|c| <= B`; the `W^{1,inf}` error is at most
/// `2B/m2` when `|g''| <= B` and `g'(0) = 0`.
pub fn relu_interpolate<G: Fn(f64) -> f64>(g: G, m2: usize) -> Result<RidgeCombination> {
    if m2 == 0 {
        return Err(CoreError::InvalidArgument(
            "interpolation grid needs m2 >= 1".into(),
        ));
    }
    let h = 1.0 / m2 as f64;
    let grid = |j: usize| -1.0 + j as f64 * h;
    let gv: Vec<f64> = (0..=2 * m2).map(|j| g(grid(j))).collect();
    if gv.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidArgument(
            "profile produced a non-finite value".into(),
        ));
    }
    let c = gv[m2];
    let mut units = Vec::with_capacity(2 * m2);
    // units i = 1..m2 act on the left half: phi(z_i - z)
    for i in 1..=m2 {
        let a = if i == m2 {
            (gv[m2 - 1] - gv[m2]) / h
        } else {
            (gv[i - 1] - 2.0 * gv[i] + gv[i + 1]) / h
        };
        units.push(RidgeUnit {
            a,
            eps: -1.0,
            b: -grid(i),
        });
    }
    // units i = m2+1..2m2 act on the right half: phi(z - z_{i-1})
    for i in m2 + 1..=2 * m2 {
        let a = if i == m2 + 1 {
            (gv[m2 + 1] - gv[m2]) / h
        } else {
            (gv[i] - 2.0 * gv[i - 1] + gv[i - 2]) / h
        };
        units.push(RidgeUnit {
            a,
            eps: 1.0,
            b: grid(i - 1),
        });
    }
    Ok(RidgeCombination {
        c,
        units,
        activation: Activation::Relu,
    })
}

/// The Softplus swap budget `delta_tau = (1/tau)(1 + 1/tau)(log(tau/3) + 1)`
/// for `tau > 3`; below that the trivial uniform-swap budget is reported.
pub fn delta_tau(tau: f64) -> f64 {
    if tau > 3.0 {
        (1.0 / tau) * (1.0 + 1.0 / tau) * ((tau / 3.0).ln() + 1.0)
    } else {
        // |ReLU - SP_tau| <= ln2/tau and |ReLU' - SP_tau'| <= 1/2, so the
        // swap of a combination with sum |a_i| <= 4B deviates by at most
        // 4B max(ln2/tau, 1/2) = 6B delta_tau with this fallback.
        (2.0 / 3.0) * (std::f64::consts::LN_2 / tau).max(0.5)
    }
}

/// Replaces ReLU by `SP_tau` with identical coefficients; returns the new
/// combination and the analytic deviation budget `6 B delta_tau`.
pub fn softplus_swap(
    combo: &RidgeCombination,
    tau: f64,
    profile_bound: f64,
) -> (RidgeCombination, f64) {
    let swapped = RidgeCombination {
        c: combo.c,
        units: combo.units.clone(),
        activation: Activation::softplus(tau),
    };
    (swapped, 6.0 * profile_bound * delta_tau(tau))
}

/// Grid `W^{1,inf}` distance between two scalar callables on `[-1,1]`.
pub fn w1inf_grid_distance<F, G>(f: F, g: G, points: usize) -> (f64, f64)
where
    F: Fn(f64, u8) -> f64,
    G: Fn(f64, u8) -> f64,
{
    let mut sup_val = 0.0f64;
    let mut sup_der = 0.0f64;
    for i in 0..points {
        let z = -1.0 + 2.0 * i as f64 / (points - 1) as f64;
        sup_val = sup_val.max((f(z, 0) - g(z, 0)).abs());
        sup_der = sup_der.max((f(z, 1) - g(z, 1)).abs());
    }
    (sup_val, sup_der)
}

/// Splits a unit budget `m` into `m1` Maurey features of `2 m2`
/// interpolation units each, with `2 m1 m2 <= m`.
pub fn width_split(m: usize) -> (usize, usize) {
    let m1 = ((m as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let m2 = (m / (2 * m1)).max(1);
    (m1, m2)
}

/// Composes Maurey sampling, ReLU interpolation and the optional Softplus
/// swap (`tau = sqrt(m)`) into a member of the constrained network class
/// with budget `B = ||u||_B`.
pub fn build_approximant(
    u: &CosineSeries,
    m: usize,
    activation_kind: ApproximantActivation,
    seed: u64,
) -> Result<TwoLayerNet> {
    if m < 2 {
        return Err(CoreError::InvalidArgument(
            "approximant needs a budget of at least 2 units".into(),
        ));
    }
    let budget = u.norm(NormKind::Barron(2.0))?;
    let activation = match activation_kind {
        ApproximantActivation::Relu => Activation::Relu,
        ApproximantActivation::Softplus => Activation::softplus((m as f64).sqrt()),
    };
    let (m1, m2) = width_split(m);
    let sample = maurey_sample(u, m1, seed)?;
    if sample.features.is_empty() {
        return Ok(TwoLayerNet::constant(u.dim(), sample.base, budget.max(1e-300), activation));
    }
    let weight = 1.0 / sample.features.len() as f64;
    let mut c = sample.base;
    let mut gamma = Vec::new();
    let mut w = Vec::new();
    let mut t = Vec::new();
    for feature in &sample.features {
        let combo = relu_interpolate(|z| feature.profile_eval(z, 0), m2)?;
        c += weight * combo.c;
        for unit in &combo.units {
            gamma.push(weight * unit.a);
            w.push(feature.direction.iter().map(|v| unit.eps * v).collect());
            t.push(unit.b);
        }
    }
    let net = TwoLayerNet {
        dim: u.dim(),
        m: gamma.len(),
        budget,
        activation,
        c,
        gamma,
        w,
        t,
    };
    debug_assert!(net.is_feasible(1e-9), "constructed net left the class");
    Ok(net)
}

/// Which activation the finished approximant should carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproximantActivation {
    Relu,
    Softplus,
}

/// `H^1(Omega)` distance between a field and a cosine series, both
/// integrands evaluated analytically pointwise.
pub fn h1_error(f: &dyn Field, u: &CosineSeries, rule: &QuadratureRule) -> Result<f64> {
    if rule.dim() != u.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: u.dim(),
            got: rule.dim(),
        });
    }
    let mut acc = 0.0;
    for (x, wt) in rule.nodes() {
        let (fv, fg) = f.eval_grad(x)?;
        let (uv, ug) = u.eval_grad(x)?;
        let dv = fv - uv;
        let dg: f64 = fg.iter().zip(&ug).map(|(a, b)| (a - b) * (a - b)).sum();
        acc += wt * (dv * dv + dg);
    }
    Ok(acc.max(0.0).sqrt())
}
