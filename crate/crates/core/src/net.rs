//! Two-layer networks `x -> c + sum_i gamma_i phi(w_i . x - t_i)` with
//! ReLU and rescaled-Softplus activations, constrained to the class
//! `|c| <= 2B`, `sum |gamma_i| <= 4B`, `|w_i|_1 = 1`, `|t_i| <= 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::Field;
use crate::rng;

/// Hidden-layer activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum Activation {
    Relu,
    /// `SP_tau(z) = ln(1 + e^{tau z}) / tau`
    Softplus { tau: f64 },
}

impl Activation {
    pub fn softplus(tau: f64) -> Self {
        assert!(tau > 0.0, "softplus scale must be positive");
        Activation::Softplus { tau }
    }

    /// Value (`order = 0`) or derivative (`order = 1, 2`) at `z`.
    ///
    /// Softplus uses `SP_tau(z) = max(z,0) + ln(1 + e^{-tau|z|})/tau`, which
    /// stays finite for `|tau z|` far beyond exp overflow. ReLU's second
    /// derivative is defined as 0 everywhere, including the kink.
    pub fn eval(&self, z: f64, order: u8) -> f64 {
        match (*self, order) {
            (Activation::Relu, 0) => z.max(0.0),
            (Activation::Relu, 1) => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            (Activation::Relu, 2) => 0.0,
            (Activation::Softplus { tau }, 0) => z.max(0.0) + (-tau * z.abs()).exp().ln_1p() / tau,
            (Activation::Softplus { tau }, 1) => sigmoid(tau * z),
            (Activation::Softplus { tau }, 2) => {
                let s = sigmoid(tau * z);
                tau * s * (1.0 - s)
            }
            _ => panic!("activation derivative order must be 0, 1 or 2"),
        }
    }
}

fn sigmoid(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

/// A two-layer network together with its class budget `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLayerNet {
    pub dim: usize,
    pub m: usize,
    #[serde(rename = "B")]
    pub budget: f64,
    pub activation: Activation,
    pub c: f64,
    pub gamma: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub t: Vec<f64>,
}

impl TwoLayerNet {
    /// The constant network `x -> c` with zero hidden units.
    pub fn constant(dim: usize, c: f64, budget: f64, activation: Activation) -> Self {
        TwoLayerNet {
            dim,
            m: 0,
            budget,
            activation,
            c,
            gamma: vec![],
            w: vec![],
            t: vec![],
        }
    }

    /// Deterministic feasible initialization: `c = 0`, `gamma_i` uniform in
    /// `[-4B/m, 4B/m]`, `w_i` uniform on the l1 sphere, `t_i` uniform in
    /// `[-1, 1]`.
    pub fn init_random(dim: usize, m: usize, budget: f64, activation: Activation, seed: u64) -> Self {
        let mut r = rng::stream(seed, "net-init");
        let gamma = (0..m)
            .map(|_| r.gen_range(-4.0 * budget / m as f64..=4.0 * budget / m as f64))
            .collect();
        let w = (0..m)
            .map(|_| {
                // signed Dirichlet: exponential magnitudes, random signs
                let mut v: Vec<f64> = (0..dim)
                    .map(|_| -(r.gen::<f64>().max(1e-300)).ln())
                    .collect();
                let s: f64 = v.iter().sum();
                for vi in v.iter_mut() {
                    *vi /= s;
                    if r.gen::<bool>() {
                        *vi = -*vi;
                    }
                }
                v
            })
            .collect();
        let t = (0..m).map(|_| r.gen_range(-1.0..=1.0)).collect();
        TwoLayerNet {
            dim,
            m,
            budget,
            activation,
            c: 0.0,
            gamma,
            w,
            t,
        }
    }

    fn pre_activations(&self, x: &[f64]) -> Vec<f64> {
        self.w
            .iter()
            .zip(&self.t)
            .map(|(wi, ti)| wi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - ti)
            .collect()
    }

    /// True when all class constraints hold up to `tol`.
    pub fn is_feasible(&self, tol: f64) -> bool {
        let gamma_l1: f64 = self.gamma.iter().map(|g| g.abs()).sum();
        self.c.abs() <= 2.0 * self.budget + tol
            && gamma_l1 <= 4.0 * self.budget + tol
            && self.t.iter().all(|t| t.abs() <= 1.0 + tol)
            && self
                .w
                .iter()
                .all(|wi| (wi.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs() <= tol)
    }

    /// Euclidean projection onto the class constraints: clamp `c` and `t`,
    /// project `gamma` onto the l1 ball of radius `4B`, rescale each `w_i`
    /// to unit l1 norm (degenerate directions are reset to a unit vector).
    pub fn project(&self) -> TwoLayerNet {
        let mut out = self.clone();
        out.c = out.c.clamp(-2.0 * self.budget, 2.0 * self.budget);
        for t in out.t.iter_mut() {
            *t = t.clamp(-1.0, 1.0);
        }
        project_l1_ball(&mut out.gamma, 4.0 * self.budget);
        for (i, wi) in out.w.iter_mut().enumerate() {
            let l1: f64 = wi.iter().map(|v| v.abs()).sum();
            if l1 < 1e-12 {
                for v in wi.iter_mut() {
                    *v = 0.0;
                }
                wi[i % self.dim] = 1.0;
            } else if (l1 - 1.0).abs() > 1e-14 {
                for v in wi.iter_mut() {
                    *v /= l1;
                }
            }
        }
        out
    }

    /// Gradient of `seed_value * u(x) + seed_gradient . grad u(x)` with
    /// respect to all parameters, in closed form.
    pub fn param_grad(&self, x: &[f64], seed_value: f64, seed_gradient: &[f64]) -> Result<NetGrad> {
        crate::index::check_point(x, self.dim)?;
        if seed_gradient.len() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: seed_gradient.len(),
            });
        }
        let z = self.pre_activations(x);
        let mut grad = NetGrad::zeros(self.dim, self.m);
        grad.c = seed_value;
        for i in 0..self.m {
            let phi = self.activation.eval(z[i], 0);
            let dphi = self.activation.eval(z[i], 1);
            let ddphi = self.activation.eval(z[i], 2);
            let gdotw: f64 = seed_gradient
                .iter()
                .zip(&self.w[i])
                .map(|(a, b)| a * b)
                .sum();
            grad.gamma[i] = seed_value * phi + dphi * gdotw;
            grad.t[i] = -self.gamma[i] * (seed_value * dphi + ddphi * gdotw);
            for j in 0..self.dim {
                grad.w[i][j] = self.gamma[i]
                    * (seed_value * dphi * x[j] + ddphi * x[j] * gdotw + dphi * seed_gradient[j]);
            }
        }
        Ok(grad)
    }
}

impl Field for TwoLayerNet {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        crate::index::check_point(x, self.dim)?;
        let z = self.pre_activations(x);
        let mut value = self.c;
        let mut grad = vec![0.0; self.dim];
        for i in 0..self.m {
            value += self.gamma[i] * self.activation.eval(z[i], 0);
            let d = self.gamma[i] * self.activation.eval(z[i], 1);
            for (gj, wj) in grad.iter_mut().zip(&self.w[i]) {
                *gj += d * wj;
            }
        }
        Ok((value, grad))
    }
}

/// Parameter-shaped gradient of a scalar functional of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrad {
    pub c: f64,
    pub gamma: Vec<f64>,
    pub w: Vec<Vec<f64>>,
    pub t: Vec<f64>,
}

impl NetGrad {
    pub fn zeros(dim: usize, m: usize) -> Self {
        NetGrad {
            c: 0.0,
            gamma: vec![0.0; m],
            w: vec![vec![0.0; dim]; m],
            t: vec![0.0; m],
        }
    }

    pub fn add_scaled(&mut self, other: &NetGrad, a: f64) {
        self.c += a * other.c;
        for (x, y) in self.gamma.iter_mut().zip(&other.gamma) {
            *x += a * y;
        }
        for (xi, yi) in self.w.iter_mut().zip(&other.w) {
            for (x, y) in xi.iter_mut().zip(yi) {
                *x += a * y;
            }
        }
        for (x, y) in self.t.iter_mut().zip(&other.t) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.c *= a;
        self.gamma.iter_mut().for_each(|x| *x *= a);
        self.w.iter_mut().flatten().for_each(|x| *x *= a);
        self.t.iter_mut().for_each(|x| *x *= a);
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = self.c.abs();
        for g in self.gamma.iter().chain(self.t.iter()) {
            m = m.max(g.abs());
        }
        for g in self.w.iter().flatten() {
            m = m.max(g.abs());
        }
        m
    }
}

/// Euclidean projection of `v` onto the l1 ball of radius `r`
/// (sort-and-threshold soft shrinkage).
pub fn project_l1_ball(v: &mut [f64], r: f64) {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= r {
        return;
    }
    if r <= 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - r) / (i as f64 + 1.0);
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        *x = x.signum() * (x.abs() - theta).max(0.0);
    }
}
