//! Plain gradient descent and Adam.

use super::{Jet, Objective, Optimizer, StepOutcome};
use crate::error::{ensure, Result};

/// `x - learning_rate * g`.
pub fn gd_step(x: &[f64], gradient: &[f64], learning_rate: f64) -> Result<Vec<f64>> {
    ensure!(learning_rate > 0.0, Config, "learning rate must be positive, got {learning_rate}");
    ensure!(x.len() == gradient.len(), Argument, "gradient has {} entries for {} parameters", gradient.len(), x.len());
    Ok(x.iter().zip(gradient).map(|(x, g)| x - learning_rate * g).collect())
}

#[derive(Clone, Debug)]
pub struct GradientDescent {
    learning_rate: f64,
}

impl GradientDescent {
    pub fn new(learning_rate: f64) -> Result<Self> {
        ensure!(learning_rate > 0.0, Config, "learning rate must be positive, got {learning_rate}");
        Ok(Self { learning_rate })
    }
}

impl Optimizer for GradientDescent {
    fn name(&self) -> &'static str {
        "gd"
    }

    fn step(&mut self, _objective: &dyn Objective, x: &mut [f64], jet: &Jet) -> Result<StepOutcome> {
        let next = gd_step(x, &jet.gradient, self.learning_rate)?;
        x.copy_from_slice(&next);
        Ok(StepOutcome::Moved)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamParams {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.learning_rate > 0.0, Config, "learning rate must be positive, got {}", self.learning_rate);
        ensure!((0.0..1.0).contains(&self.beta1), Config, "beta1 must lie in [0, 1), got {}", self.beta1);
        ensure!((0.0..1.0).contains(&self.beta2), Config, "beta2 must lie in [0, 1), got {}", self.beta2);
        ensure!(self.epsilon > 0.0, Config, "epsilon must be positive, got {}", self.epsilon);
        Ok(())
    }
}

/// Moment buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }
}

/// Bias-corrected Adam update of `x` in place.
pub fn adam_step(state: &mut AdamState, params: &AdamParams, x: &mut [f64], gradient: &[f64]) -> Result<()> {
    ensure!(
        x.len() == gradient.len() && state.m.len() == x.len(),
        Argument,
        "Adam buffers, parameters and gradient disagree in length"
    );
    state.t += 1;
    let c1 = 1.0 - params.beta1.powi(state.t as i32);
    let c2 = 1.0 - params.beta2.powi(state.t as i32);
    for i in 0..x.len() {
        let g = gradient[i];
        state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * g;
        state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        x[i] -= params.learning_rate * m_hat / (v_hat.sqrt() + params.epsilon);
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Adam {
    params: AdamParams,
    state: Option<AdamState>,
}

impl Adam {
    pub fn new(params: AdamParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, state: None })
    }
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        "adam"
    }

    fn step(&mut self, _objective: &dyn Objective, x: &mut [f64], jet: &Jet) -> Result<StepOutcome> {
        let state = self.state.get_or_insert_with(|| AdamState::new(x.len()));
        adam_step(state, &self.params, x, &jet.gradient)?;
        Ok(StepOutcome::Moved)
    }
}
