//! Iteratively pre-conditioned gradient descent (IPG) for parameterized
//! quantum circuits, with an exact dense statevector simulator, exact
//! gradients and Hessians, and first-order and quasi-Newton baselines.
//!
//! ```
//! use ipgq::ansatz::{CircuitTemplate, EntanglerPattern};
//! use ipgq::sim::{ghz_state, GhzSign, StateVector};
//! use ipgq::cost::{CostFunction, CostKind};
//!
//! let template = CircuitTemplate::new(2, 1, EntanglerPattern::ChainEveryLayer).unwrap();
//! let cost = CostFunction::new(
//!     template,
//!     CostKind::StateInfidelity {
//!         target: ghz_state(2, GhzSign::Plus).unwrap(),
//!         input: StateVector::zero(2).unwrap(),
//!     },
//! )
//! .unwrap();
//! let c = cost.value(&template.zero_params()).unwrap();
//! assert!((c - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
//! ```

pub mod ansatz;
pub mod autodiff;
pub mod cost;
mod error;
pub mod optim;
pub mod sim;

pub use error::{Error, Result};
