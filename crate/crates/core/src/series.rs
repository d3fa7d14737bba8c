//! Sparse cosine series on `[0,1]^d`.
//!
//! A series is a finite map `k -> u\u{302}(k)` over the nonnegative lattice with
//! `u(x) = sum_k u\u{302}(k) Phi_k(x)` and `Phi_k(x) = prod_i cos(pi k_i x_i)`.
//! Products of series are computed through the even extension: the signed
//! table `u\u{303}_m = 2^{-j(m)} u\u{302}(|m|)` (with `j(m)` the number of nonzero
//! entries of `m`) satisfies `u_e(x) = sum_{m in Z^d} u\u{303}_m cos(pi m.x)`
//! exactly, and pointwise products become discrete convolutions of the
//! signed tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::index::{check_point, MultiIndex, SignedIndex};

const PI: f64 = std::f64::consts::PI;

/// Norms measurable from the coefficients alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    H1,
    /// Spectral Barron norm with weight `1 + pi^s |k|_1^s`.
    Barron(f64),
    /// `sum_k |u\u{302}(k)|`, an upper bound for the sup norm.
    LinfBound,
}

/// Evaluates `Phi_k(x) = prod_i cos(pi k_i x_i)`.
pub fn phi_eval(k: &MultiIndex, x: &[f64]) -> Result<f64> {
    check_point(x, k.dim())?;
    let mut p = 1.0;
    for (&ki, &xi) in k.entries().iter().zip(x) {
        p *= (PI * ki as f64 * xi).cos();
    }
    Ok(p)
}

/// A finite cosine series in canonical sparse form (no stored zeros).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct CosineSeries {
    dim: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

#[derive(Serialize, Deserialize)]
struct SeriesTerm {
    k: Vec<u32>,
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    dim: usize,
    coeffs: Vec<SeriesTerm>,
}

impl From<CosineSeries> for SeriesRepr {
    fn from(s: CosineSeries) -> Self {
        SeriesRepr {
            dim: s.dim,
            coeffs: s
                .coeffs
                .into_iter()
                .map(|(k, v)| SeriesTerm {
                    k: k.entries().to_vec(),
                    v,
                })
                .collect(),
        }
    }
}

impl TryFrom<SeriesRepr> for CosineSeries {
    type Error = CoreError;

    fn try_from(r: SeriesRepr) -> Result<Self> {
        let mut s = CosineSeries::zero(r.dim);
        for t in r.coeffs {
            if t.k.len() != r.dim {
                return Err(CoreError::DimensionMismatch {
                    expected: r.dim,
                    got: t.k.len(),
                });
            }
            s.add_term(MultiIndex::new(t.k), t.v);
        }
        Ok(s)
    }
}

impl CosineSeries {
    pub fn zero(dim: usize) -> Self {
        CosineSeries {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// The single basis function `Phi_k`.
    pub fn basis(k: MultiIndex) -> Self {
        let mut s = CosineSeries::zero(k.dim());
        s.add_term(k, 1.0);
        s
    }

    /// The constant series `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        let mut s = CosineSeries::zero(dim);
        s.add_term(MultiIndex::zero(dim), c);
        s
    }

    pub fn from_terms(dim: usize, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        let mut s = CosineSeries::zero(dim);
        for (k, v) in terms {
            if k.dim() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: k.dim(),
                });
            }
            s.add_term(k.clone(), *v);
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `v` to the coefficient at `k`, dropping exact zeros.
    pub fn add_term(&mut self, k: MultiIndex, v: f64) {
        assert_eq!(k.dim(), self.dim, "index dimension mismatch");
        let entry = self.coeffs.entry(k.clone()).or_insert(0.0);
        *entry += v;
        if *entry == 0.0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: &MultiIndex) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest single frequency entry over the support.
    pub fn max_freq(&self) -> u32 {
        self.coeffs
            .keys()
            .flat_map(|k| k.entries().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, a: f64) -> CosineSeries {
        let mut s = CosineSeries::zero(self.dim);
        if a != 0.0 {
            for (k, v) in self.terms() {
                s.add_term(k.clone(), a * v);
            }
        }
        s
    }

    pub fn add(&self, other: &CosineSeries) -> Result<CosineSeries> {
        if other.dim != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut s = self.clone();
        for (k, v) in other.terms() {
            s.add_term(k.clone(), v);
        }
        Ok(s)
    }

    pub fn sub(&self, other: &CosineSeries) -> Result<CosineSeries> {
        self.add(&other.scale(-1.0))
    }

    /// Value and exact analytic gradient at `x`.
    pub fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        check_point(x, self.dim)?;
        let d = self.dim;
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        let mut cosines = vec![0.0; d];
        let mut sines = vec![0.0; d];
        for (k, v) in self.terms() {
            for i in 0..d {
                let arg = PI * k.entries()[i] as f64 * x[i];
                cosines[i] = arg.cos();
                sines[i] = arg.sin();
            }
            let phi: f64 = cosines.iter().product();
            value += v * phi;
            for i in 0..d {
                let ki = k.entries()[i] as f64;
                if ki != 0.0 {
                    let mut partial = -PI * ki * sines[i];
                    for (j, &c) in cosines.iter().enumerate() {
                        if j != i {
                            partial *= c;
                        }
                    }
                    grad[i] += v * partial;
                }
            }
        }
        Ok((value, grad))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_grad(x)?.0)
    }

    /// Coefficient-space norm of the requested kind.
    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        match kind {
            NormKind::L2 => Ok(self
                .terms()
                .map(|(k, v)| k.alpha() * v * v)
                .sum::<f64>()
                .sqrt()),
            NormKind::H1 => Ok(self
                .terms()
                .map(|(k, v)| k.alpha() * (1.0 + PI * PI * k.l2_sq() as f64) * v * v)
                .sum::<f64>()
                .sqrt()),
            NormKind::Barron(s) => {
                if s < 0.0 {
                    return Err(CoreError::InvalidArgument(format!(
                        "Barron index must be nonnegative, got {s}"
                    )));
                }
                Ok(self
                    .terms()
                    .map(|(k, v)| k.barron_weight(s) * v.abs())
                    .sum())
            }
            NormKind::LinfBound => Ok(self.terms().map(|(_, v)| v.abs()).sum()),
        }
    }

    /// Even-extension table: `u\u{303}_m = 2^{-j(m)} u\u{302}(|m|)` over all sign
    /// patterns of each stored index.
    pub fn to_signed(&self) -> BTreeMap<SignedIndex, f64> {
        let mut table = BTreeMap::new();
        for (k, v) in self.terms() {
            let weight = 0.5f64.powi(k.nonzero_count() as i32);
            for m in sign_patterns(k) {
                table.insert(m, v * weight);
            }
        }
        table
    }

    /// Inverse of [`to_signed`]: `u\u{302}(|m|) = 2^{j(m)} u\u{303}_m`, with a
    /// consistency check across sign patterns.
    pub fn fold_signed(dim: usize, table: &BTreeMap<SignedIndex, f64>) -> Result<CosineSeries> {
        let mut folded: BTreeMap<MultiIndex, (f64, f64, f64)> = BTreeMap::new();
        for (m, &v) in table {
            if m.dim() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            let hat = 2f64.powi(m.nonzero_count() as i32) * v;
            folded
                .entry(m.abs())
                .and_modify(|(lo, hi, _)| {
                    *lo = lo.min(hat);
                    *hi = hi.max(hat);
                })
                .or_insert((hat, hat, 0.0));
        }
        let mut s = CosineSeries::zero(dim);
        for (k, (lo, hi, _)) in folded {
            let spread = hi - lo;
            if spread > 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
                return Err(CoreError::InconsistentSignTable {
                    index: SignedIndex::from(&k).entries().to_vec(),
                    spread,
                });
            }
            s.add_term(k, 0.5 * (lo + hi));
        }
        Ok(s)
    }

    /// Exact cosine series of the pointwise product `u * v`.
    pub fn product(&self, other: &CosineSeries) -> Result<CosineSeries> {
        if other.dim != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let a = self.to_signed();
        let b = other.to_signed();
        let mut conv: BTreeMap<SignedIndex, f64> = BTreeMap::new();
        for (ma, &va) in &a {
            for (mb, &vb) in &b {
                *conv.entry(ma.add(mb)).or_insert(0.0) += va * vb;
            }
        }
        conv.retain(|_, v| *v != 0.0);
        CosineSeries::fold_signed(self.dim, &conv)
    }

    /// Drops coefficients with magnitude at most `tol`.
    pub fn truncate(&self, tol: f64) -> CosineSeries {
        let mut s = CosineSeries::zero(self.dim);
        for (k, v) in self.terms() {
            if v.abs() > tol {
                s.add_term(k.clone(), v);
            }
        }
        s
    }
}

/// All signed indices `m` with `|m| = k`.
fn sign_patterns(k: &MultiIndex) -> Vec<SignedIndex> {
    let nonzero: Vec<usize> = (0..k.dim()).filter(|&i| k.entries()[i] != 0).collect();
    let base: Vec<i64> = k.entries().iter().map(|&e| e as i64).collect();
    let mut out = Vec::with_capacity(1 << nonzero.len());
    for mask in 0u32..(1 << nonzero.len()) {
        let mut m = base.clone();
        for (bit, &axis) in nonzero.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                m[axis] = -m[axis];
            }
        }
        out.push(SignedIndex::new(m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn phi_at_origin_is_one() {
        assert_eq!(phi_eval(&mi(&[1, 2]), &[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn phi_half_period_vanishes() {
        assert!(phi_eval(&mi(&[1]), &[0.5]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn phi_third() {
        let v = phi_eval(&mi(&[1, 1]), &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-14, "cos^2(pi/3) = 1/4, got {v}");
    }

    #[test]
    fn phi_rejects_bad_input() {
        assert!(phi_eval(&mi(&[1]), &[1.5]).is_err());
        assert!(phi_eval(&mi(&[1, 1]), &[0.5]).is_err());
    }

    #[test]
    fn eval_grad_constant() {
        let u = CosineSeries::basis(mi(&[0, 0]));
        let (v, g) = u.eval_grad(&[0.3, 0.7]).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn eval_grad_mode_one() {
        let u = CosineSeries::basis(mi(&[1]));
        let (v, g) = u.eval_grad(&[0.0]).unwrap();
        assert_eq!((v, g[0]), (1.0, 0.0));
        let (v, g) = u.eval_grad(&[0.25]).unwrap();
        let pi = std::f64::consts::PI;
        assert!((v - (pi / 4.0).cos()).abs() < 1e-15);
        assert!((g[0] + pi * (pi / 4.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn norms_of_single_mode() {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let u = CosineSeries::basis(mi(&[1, 1]));
        let b2 = u.norm(NormKind::Barron(2.0)).unwrap();
        assert!((b2 - (1.0 + 4.0 * pi2)).abs() < 1e-12);
        let h1 = u.norm(NormKind::H1).unwrap();
        assert!((h1 - ((1.0 + 2.0 * pi2) / 4.0).sqrt()).abs() < 1e-12);
        assert_eq!(CosineSeries::zero(2).norm(NormKind::H1).unwrap(), 0.0);
        assert!(u.norm(NormKind::Barron(-1.0)).is_err());
    }

    #[test]
    fn signed_table_examples() {
        let u0 = CosineSeries::basis(mi(&[0]));
        let t = u0.to_signed();
        assert_eq!(t.len(), 1);
        assert_eq!(t[&SignedIndex::new(vec![0])], 1.0);

        let u1 = CosineSeries::basis(mi(&[1]));
        let t = u1.to_signed();
        assert_eq!(t.len(), 2);
        assert_eq!(t[&SignedIndex::new(vec![1])], 0.5);
        assert_eq!(t[&SignedIndex::new(vec![-1])], 0.5);

        let u11 = CosineSeries::basis(mi(&[1, 1]));
        let t = u11.to_signed();
        assert_eq!(t.len(), 4);
        for v in t.values() {
            assert_eq!(*v, 0.25);
        }
    }

    #[test]
    fn fold_inverts_to_signed() {
        let u = CosineSeries::from_terms(
            2,
            &[(mi(&[1, 2]), 0.7), (mi(&[0, 1]), -1.5), (mi(&[0, 0]), 2.0)],
        )
        .unwrap();
        let back = CosineSeries::fold_signed(2, &u.to_signed()).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn fold_rejects_inconsistent_table() {
        let mut t = BTreeMap::new();
        t.insert(SignedIndex::new(vec![1]), 0.5);
        t.insert(SignedIndex::new(vec![-1]), 0.6);
        assert!(CosineSeries::fold_signed(1, &t).is_err());
    }

    #[test]
    fn product_cos_squared() {
        let u = CosineSeries::basis(mi(&[1]));
        let w = u.product(&u).unwrap();
        assert_eq!(w.num_terms(), 2);
        assert!((w.coeff(&mi(&[0])) - 0.5).abs() < 1e-15);
        assert!((w.coeff(&mi(&[2])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn product_separable() {
        let u = CosineSeries::basis(mi(&[1, 0]));
        let v = CosineSeries::basis(mi(&[0, 1]));
        let w = u.product(&v).unwrap();
        assert_eq!(w.num_terms(), 1);
        assert!((w.coeff(&mi(&[1, 1])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_identity() {
        let u = CosineSeries::from_terms(2, &[(mi(&[1, 2]), 0.3), (mi(&[2, 0]), -0.4)]).unwrap();
        let one = CosineSeries::constant(2, 1.0);
        let w = u.product(&one).unwrap();
        for (k, v) in u.terms() {
            assert!((w.coeff(k) - v).abs() < 1e-15);
        }
        assert_eq!(w.num_terms(), u.num_terms());
    }

    #[test]
    fn json_round_trip_and_ordering() {
        let u = CosineSeries::from_terms(2, &[(mi(&[2, 0]), -0.4), (mi(&[1, 2]), 0.3)]).unwrap();
        let js = serde_json::to_string(&u).unwrap();
        // lexicographic: [1,2] before [2,0]
        assert!(js.find("[1,2]").unwrap() < js.find("[2,0]").unwrap());
        let back: CosineSeries = serde_json::from_str(&js).unwrap();
        assert_eq!(back, u);
    }
}
