//! Quadrature rules and sample sets on `[0,1]^d`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::index::MultiIndex;
use crate::rng;
use crate::series::phi_eval;

/// Gauss-Legendre nodes and weights on `[0,1]`, weights summing to one.
pub fn gauss_legendre_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev initial guess, on [-1,1].
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n` and its derivative at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// First `n` terms of the base-`b` van der Corput sequence.
fn van_der_corput(index: u64, base: u64) -> f64 {
    let mut x = 0.0;
    let mut denom = 1.0;
    let mut i = index;
    while i > 0 {
        denom *= base as f64;
        x += (i % base) as f64 / denom;
        i /= base;
    }
    x
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// A finite set of nodes and weights for integrals over `[0,1]^d`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Tensor-product Gauss-Legendre rule with `n_axis` nodes per axis.
    pub fn tensor_gauss(dim: usize, n_axis: usize) -> Self {
        let (nodes, weights) = gauss_legendre_1d(n_axis);
        let total = n_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut w = Vec::with_capacity(total);
        for flat in 0..total {
            let mut p = Vec::with_capacity(dim);
            let mut weight = 1.0;
            let mut rem = flat;
            for _ in 0..dim {
                let j = rem % n_axis;
                rem /= n_axis;
                p.push(nodes[j]);
                weight *= weights[j];
            }
            points.push(p);
            w.push(weight);
        }
        QuadratureRule {
            dim,
            points,
            weights: w,
        }
    }

    /// Default rule for integrands with cosine content up to `max_freq`:
    /// `ceil(4*max_freq + 8)` Gauss nodes per axis.
    pub fn for_max_freq(dim: usize, max_freq: u32) -> Self {
        Self::tensor_gauss(dim, (4 * max_freq + 8) as usize)
    }

    /// Halton sequence with an optional random toroidal shift; equal weights.
    pub fn halton(dim: usize, n: usize, shift_seed: Option<u64>) -> Self {
        assert!(dim <= PRIMES.len(), "halton rule supports d <= 16");
        let shift: Vec<f64> = match shift_seed {
            Some(seed) => {
                let mut r = rng::stream(seed, "halton-shift");
                (0..dim).map(|_| r.gen::<f64>()).collect()
            }
            None => vec![0.0; dim],
        };
        let points = (0..n)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let v = van_der_corput(i as u64 + 1, PRIMES[j]) + shift[j];
                        v - v.floor()
                    })
                    .collect()
            })
            .collect();
        QuadratureRule {
            dim,
            points,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .map(|p| p.as_slice())
            .zip(self.weights.iter().copied())
    }

    /// Integrates `f` over the cube.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes().map(|(x, w)| w * f(x)).sum()
    }
}

/// Numeric estimate of the cosine coefficient
/// `u\u{302}(k) = <f, Phi_k> / alpha_k`; the independent oracle for
/// series products and network measurements.
pub fn project_coefficient<F: Fn(&[f64]) -> f64>(
    f: F,
    k: &MultiIndex,
    rule: &QuadratureRule,
) -> Result<f64> {
    if rule.dim() != k.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: k.dim(),
            got: rule.dim(),
        });
    }
    let inner = rule.integrate(|x| f(x) * phi_eval(k, x).expect("quadrature node in domain"));
    Ok(inner / k.alpha())
}

/// How a sample set was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleGenerator {
    IidUniform,
    LowDiscrepancy,
}

/// Reproducible evaluation points for empirical losses.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub dim: usize,
    pub seed: u64,
    pub generator: SampleGenerator,
    points: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn generate(dim: usize, n: usize, seed: u64, generator: SampleGenerator) -> Self {
        let points = match generator {
            SampleGenerator::IidUniform => {
                let mut r = rng::stream(seed, "sample-set");
                (0..n)
                    .map(|_| (0..dim).map(|_| r.gen::<f64>()).collect())
                    .collect()
            }
            SampleGenerator::LowDiscrepancy => {
                QuadratureRule::halton(dim, n, Some(seed)).points
            }
        };
        SampleSet {
            dim,
            seed,
            generator,
            points,
        }
    }

    /// Pinned points for fixtures and manufactured checks.
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>) -> Self {
        SampleSet {
            dim,
            seed: 0,
            generator: SampleGenerator::IidUniform,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(|p| p.as_slice())
    }
}
