//! Iteratively pre-conditioned gradient descent.
//!
//! The method keeps an estimate `x_t` and a pre-conditioner matrix `K_t`.
//! Every iteration, with `g_t` and `H_t` the gradient and Hessian at `x_t`:
//!
//! ```text
//! x_{t+1} = x_t - delta_t K_t g_t
//! K_{t+1} = K_t - alpha_t ((H_t + beta_t I) K_t - I)
//! ```
//!
//! The second line is a Richardson iteration on `(H_t + beta_t I) K = I`, so
//! with a fixed Hessian `K_t` converges to `(H + beta I)^{-1}` and the `x`
//! update approaches a damped Newton step. `K_t` is neither symmetrized nor
//! forced positive definite.
//!
//! The scalars must satisfy `delta_t <= 1`, `beta_t > -lambda_min(H_t)` and
//! `alpha_t < 1 / (lambda_max(H_t) + beta_t)`. [`IpgSchedule`] produces them
//! from the eigenvalue extremes of each Hessian:
//!
//! ```text
//! beta  = max(0, -lambda_min) + beta_margin
//! alpha = alpha_safety / (lambda_max + beta)
//! delta = configured constant
//! ```

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{Jet, Objective, Optimizer, StepOutcome};
use crate::error::{ensure, Error, Result};

/// How the Hessian eigenvalue extremes are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenBounds {
    /// Full symmetric eigendecomposition.
    #[default]
    Exact,
    /// Gershgorin discs; cheaper, and the constraints still hold because the
    /// bounds enclose the spectrum.
    Gershgorin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IpgSchedule {
    /// Step size on the estimate, in `(0, 1]`.
    pub delta: f64,
    /// Margin added above `-lambda_min`.
    pub beta_margin: f64,
    /// Fraction of the largest admissible `alpha`, in `(0, 1)`.
    pub alpha_safety: f64,
    pub bounds: EigenBounds,
}

impl Default for IpgSchedule {
    fn default() -> Self {
        Self { delta: 1.0, beta_margin: 1e-3, alpha_safety: 0.9, bounds: EigenBounds::Exact }
    }
}

/// Scalars for one iteration, with the eigenvalue extremes they came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleValues {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl ScheduleValues {
    /// Checks the three constraints strictly against the given extremes.
    pub fn satisfies_constraints(&self, lambda_min: f64, lambda_max: f64) -> bool {
        self.delta > 0.0
            && self.delta <= 1.0
            && self.beta >= 0.0
            && self.beta > -lambda_min
            && self.alpha >= 0.0
            && self.alpha < 1.0 / (lambda_max + self.beta)
    }
}

impl IpgSchedule {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.delta > 0.0 && self.delta <= 1.0, Config, "IPG delta must lie in (0, 1], got {}", self.delta);
        ensure!(self.beta_margin > 0.0, Config, "IPG beta margin must be positive, got {}", self.beta_margin);
        ensure!(
            self.alpha_safety > 0.0 && self.alpha_safety < 1.0,
            Config,
            "IPG alpha safety factor must lie in (0, 1), got {}",
            self.alpha_safety
        );
        Ok(())
    }

    /// `(alpha, beta, delta)` for a Hessian.
    pub fn evaluate(&self, hessian: &DMatrix<f64>) -> Result<ScheduleValues> {
        ensure!(hessian.is_square(), Argument, "Hessian is {}x{}", hessian.nrows(), hessian.ncols());
        if hessian.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("Hessian has non-finite entries".into()));
        }
        let (lambda_min, lambda_max) = match self.bounds {
            EigenBounds::Exact => eigen_extremes(hessian),
            EigenBounds::Gershgorin => gershgorin_bounds(hessian),
        };
        let beta = (-lambda_min).max(0.0) + self.beta_margin;
        let alpha = self.alpha_safety / (lambda_max + beta);
        let values = ScheduleValues { alpha, beta, delta: self.delta, lambda_min, lambda_max };
        debug_assert!(values.satisfies_constraints(lambda_min, lambda_max), "{values:?}");
        Ok(values)
    }
}

/// Smallest and largest eigenvalue of the symmetric part of `h`.
pub fn eigen_extremes(h: &DMatrix<f64>) -> (f64, f64) {
    if h.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    (eig.min(), eig.max())
}

/// Enclosing interval for the spectrum of the symmetric part of `h`.
pub fn gershgorin_bounds(h: &DMatrix<f64>) -> (f64, f64) {
    let n = h.nrows();
    if n == 0 {
        return (0.0, 0.0);
    }
    let sym = (h + h.transpose()) * 0.5;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| sym[(i, j)].abs()).sum();
        lo = lo.min(sym[(i, i)] - radius);
        hi = hi.max(sym[(i, i)] + radius);
    }
    (lo, hi)
}

/// `(alpha, beta, delta)` for `hessian` under `schedule`.
pub fn ipg_schedule(hessian: &DMatrix<f64>, schedule: &IpgSchedule) -> Result<ScheduleValues> {
    schedule.evaluate(hessian)
}

/// Initial pre-conditioner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionerInit {
    /// `I / (lambda_max(H_0) + beta_0)`: the first step is gradient descent
    /// at the inverse curvature scale.
    #[default]
    InverseScale,
    Identity,
    Zero,
}

/// Estimate and pre-conditioner.
#[derive(Clone, Debug, PartialEq)]
pub struct IpgState {
    pub x: Vec<f64>,
    pub k: DMatrix<f64>,
    pub iteration: usize,
}

impl IpgState {
    pub fn new(x: Vec<f64>, k: DMatrix<f64>) -> Result<Self> {
        ensure!(
            k.nrows() == x.len() && k.ncols() == x.len(),
            Argument,
            "pre-conditioner is {}x{} for {} parameters",
            k.nrows(),
            k.ncols(),
            x.len()
        );
        Ok(Self { x, k, iteration: 0 })
    }
}

/// One iteration: the estimate moves with the current `K_t`, then `K_t` is
/// updated with the Hessian taken at the pre-update estimate.
pub fn ipg_step(state: &mut IpgState, gradient: &[f64], hessian: &DMatrix<f64>, values: &ScheduleValues) -> Result<()> {
    let d = state.x.len();
    ensure!(gradient.len() == d, Argument, "gradient has {} entries for {d} parameters", gradient.len());
    ensure!(hessian.nrows() == d && hessian.ncols() == d, Argument, "Hessian shape does not match {d} parameters");

    let g = nalgebra::DVector::from_column_slice(gradient);
    let kg = &state.k * g;
    let x_next: Vec<f64> = state.x.iter().zip(kg.iter()).map(|(x, v)| x - values.delta * v).collect();

    // (H + beta I) K - I
    let mut residual = hessian * &state.k;
    residual += &state.k * values.beta;
    for i in 0..d {
        residual[(i, i)] -= 1.0;
    }
    let k_next = &state.k - residual * values.alpha;

    if x_next.iter().any(|v| !v.is_finite()) || k_next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("IPG update at iteration {} produced non-finite values", state.iteration)));
    }
    state.x = x_next;
    state.k = k_next;
    state.iteration += 1;
    Ok(())
}

/// Stateful IPG driver behind [`Optimizer`].
#[derive(Clone, Debug)]
pub struct Ipg {
    schedule: IpgSchedule,
    init: PreconditionerInit,
    preconditioner: Option<DMatrix<f64>>,
    iteration: usize,
    last_values: Option<ScheduleValues>,
}

impl Ipg {
    pub fn new(schedule: IpgSchedule, init: PreconditionerInit) -> Result<Self> {
        schedule.validate()?;
        Ok(Self { schedule, init, preconditioner: None, iteration: 0, last_values: None })
    }

    pub fn preconditioner(&self) -> Option<&DMatrix<f64>> {
        self.preconditioner.as_ref()
    }

    pub fn last_schedule(&self) -> Option<&ScheduleValues> {
        self.last_values.as_ref()
    }

    fn initial_k(&self, d: usize, values: &ScheduleValues) -> DMatrix<f64> {
        match self.init {
            PreconditionerInit::InverseScale => DMatrix::identity(d, d) / (values.lambda_max + values.beta),
            PreconditionerInit::Identity => DMatrix::identity(d, d),
            PreconditionerInit::Zero => DMatrix::zeros(d, d),
        }
    }
}

impl Optimizer for Ipg {
    fn name(&self) -> &'static str {
        "ipg"
    }

    fn needs_hessian(&self) -> bool {
        true
    }

    fn step(&mut self, _objective: &dyn Objective, x: &mut [f64], jet: &Jet) -> Result<StepOutcome> {
        let hessian = jet
            .hessian
            .as_ref()
            .ok_or_else(|| Error::Config("IPG step needs the Hessian".into()))?;
        let values = self.schedule.evaluate(hessian)?;
        let k = match self.preconditioner.take() {
            Some(k) => k,
            None => self.initial_k(x.len(), &values),
        };
        let mut state = IpgState { x: x.to_vec(), k, iteration: self.iteration };
        ipg_step(&mut state, &jet.gradient, hessian, &values)?;
        x.copy_from_slice(&state.x);
        self.preconditioner = Some(state.k);
        self.iteration = state.iteration;
        self.last_values = Some(values);
        Ok(StepOutcome::Moved)
    }
}
