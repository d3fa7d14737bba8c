//! Lattice indices for cosine-spectral objects on `[0,1]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A point of the nonnegative lattice, indexing one cosine mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The index with a single nonzero entry `freq` on `axis`.
    pub fn axis(dim: usize, axis: usize, freq: u32) -> Self {
        let mut e = vec![0; dim];
        e[axis] = freq;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    /// `|k|_1`
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|&k| k as u64).sum()
    }

    /// `|k|^2` (squared Euclidean norm)
    pub fn l2_sq(&self) -> u64 {
        self.0.iter().map(|&k| (k as u64) * (k as u64)).sum()
    }

    /// Number of nonzero entries.
    pub fn nonzero_count(&self) -> u32 {
        self.0.iter().filter(|&&k| k != 0).count() as u32
    }

    /// `alpha_k = <Phi_k, Phi_k>_{L^2} = 2^{-#nonzero}`
    pub fn alpha(&self) -> f64 {
        0.5f64.powi(self.nonzero_count() as i32)
    }

    /// Barron weight `W_s(k) = 1 + pi^s |k|_1^s`, with the convention
    /// `0^0 := 0` so that `W_s(0) = 1` for every `s >= 0`.
    pub fn barron_weight(&self, s: f64) -> f64 {
        let l1 = self.l1() as f64;
        if l1 == 0.0 {
            1.0
        } else {
            1.0 + std::f64::consts::PI.powf(s) * l1.powf(s)
        }
    }
}

/// A point of the full integer lattice, used by the even-extension tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedIndex(Vec<i64>);

impl SignedIndex {
    pub fn new(entries: Vec<i64>) -> Self {
        SignedIndex(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn abs(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|&m| m.unsigned_abs() as u32).collect())
    }

    pub fn nonzero_count(&self) -> u32 {
        self.0.iter().filter(|&&m| m != 0).count() as u32
    }

    pub fn add(&self, other: &SignedIndex) -> SignedIndex {
        SignedIndex(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl From<&MultiIndex> for SignedIndex {
    fn from(k: &MultiIndex) -> Self {
        SignedIndex(k.0.iter().map(|&e| e as i64).collect())
    }
}

/// Checks that `x` lies in `[0,1]^d` up to a `1e-12` tolerance.
pub fn check_point(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    for (axis, &v) in x.iter().enumerate() {
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(CoreError::OutsideDomain { axis, value: v });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barron_weight_at_zero_is_one_for_all_s() {
        let k = MultiIndex::zero(3);
        for s in [0.0, 1.0, 2.0, 3.5] {
            assert_eq!(k.barron_weight(s), 1.0);
        }
    }

    #[test]
    fn barron_weight_s0_nonzero_is_two() {
        let k = MultiIndex::new(vec![2, 0, 1]);
        assert_eq!(k.barron_weight(0.0), 2.0);
    }

    #[test]
    fn alpha_counts_nonzeros() {
        assert_eq!(MultiIndex::new(vec![1, 1]).alpha(), 0.25);
        assert_eq!(MultiIndex::zero(2).alpha(), 1.0);
    }

    #[test]
    fn signed_abs_roundtrip() {
        let m = SignedIndex::new(vec![-2, 0, 3]);
        assert_eq!(m.abs(), MultiIndex::new(vec![2, 0, 3]));
        assert_eq!(m.nonzero_count(), 2);
    }

    #[test]
    fn point_check_tolerance() {
        assert!(check_point(&[0.0, 1.0 + 5e-13], 2).is_ok());
        assert!(check_point(&[1.1], 1).is_err());
        assert!(check_point(&[0.5], 2).is_err());
    }
}
