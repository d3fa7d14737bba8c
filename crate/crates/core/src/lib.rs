//! Desk-scale laboratory for variational neural-network PDE solving on the
//! unit hypercube: sparse cosine-spectral ground truth, two-layer network
//! approximation with explicit constants, Ritz losses, and metric-entropy
//! complexity bounds.

pub mod approx;
pub mod complexity;
pub mod error;
pub mod exact;
pub mod field;
pub mod index;
pub mod report;
pub mod net;
pub mod quad;
pub mod ritz;
pub mod rng;
pub mod series;

pub use approx::{
    build_approximant, delta_tau, h1_error, maurey_sample, relu_interpolate, softplus_swap,
    w1inf_grid_distance, width_split, ApproximantActivation, MaureySample, RidgeCombination,
    RidgeProfile,
};
pub use complexity::{
    class_constants, covering_bound, entropy_bound, gsp_bounds, net_class_bound, rademacher_exact,
    rademacher_mc, ClassSpec, McClass, McEstimate, SearchStrategy,
};
pub use error::{CoreError, Result};
pub use field::Field;
pub use net::{Activation, NetGrad, TwoLayerNet};
pub use index::{MultiIndex, SignedIndex};
pub use quad::{project_coefficient, QuadratureRule, SampleGenerator, SampleSet};
pub use ritz::{
    empirical_loss, energy_excess, exact_energy, loss_gradient, population_loss, train,
    ExcessReport, InitMode, Optimizer, ProblemKind, TrainConfig, TrainResult,
};
pub use series::{phi_eval, CosineSeries, NormKind};
