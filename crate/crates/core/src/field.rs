//! Common evaluation interface for spectral functions and networks.

use crate::error::Result;

/// Anything that can report a value and spatial gradient at a point of the
/// cube. Ritz losses and error measurements are generic over this.
pub trait Field {
    fn dim(&self) -> usize;
    fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_grad(x)?.0)
    }
}

impl Field for crate::series::CosineSeries {
    fn dim(&self) -> usize {
        crate::series::CosineSeries::dim(self)
    }

    fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        crate::series::CosineSeries::eval_grad(self, x)
    }
}
