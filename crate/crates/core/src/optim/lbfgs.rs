//! Limited-memory BFGS with Armijo backtracking.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Jet, Objective, Optimizer, StepOutcome};
use crate::error::{ensure, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbfgsParams {
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Halvings of the unit step before giving up.
    pub max_halvings: usize,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self { memory: 10, armijo: 1e-4, max_halvings: 30 }
    }
}

impl LbfgsParams {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.memory >= 1, Config, "L-BFGS memory must be at least 1");
        ensure!(self.armijo > 0.0 && self.armijo < 1.0, Config, "Armijo constant must lie in (0, 1), got {}", self.armijo);
        Ok(())
    }
}

/// Curvature pairs `(s, y, 1 / s.y)`, oldest first.
#[derive(Clone, Debug, Default)]
pub struct LbfgsHistory {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LbfgsHistory {
    pub fn new(memory: usize) -> Self {
        Self { memory, pairs: VecDeque::with_capacity(memory) }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Stores the pair unless `s.y` is not positive. Returns whether it was kept.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 0.0) || !sy.is_finite() {
            return false;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// Two-loop recursion: `-H_k g` with `H_0 = (s.y / y.y) I` from the newest
    /// pair, or `-g` when the history is empty.
    pub fn direction(&self, gradient: &[f64]) -> Vec<f64> {
        let mut q = gradient.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((_, y, rho)) = self.pairs.back() {
            let gamma = 1.0 / (rho * dot(y, y));
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

/// One L-BFGS iteration from `x` with value `f` and gradient `g`.
///
/// Backtracks from the unit step by halving until the Armijo condition holds.
/// When it never does, `x` is left unchanged and `Stagnated` is returned.
pub fn lbfgs_step(
    history: &LbfgsHistory,
    params: &LbfgsParams,
    objective: &dyn Objective,
    x: &mut [f64],
    value: f64,
    gradient: &[f64],
) -> Result<StepOutcome> {
    if gradient.iter().all(|g| *g == 0.0) {
        return Ok(StepOutcome::Moved);
    }
    let mut d = history.direction(gradient);
    let mut slope = dot(&d, gradient);
    if !(slope < 0.0) {
        d = gradient.iter().map(|g| -g).collect();
        slope = -dot(gradient, gradient);
    }
    let mut t = 1.0;
    let mut trial = vec![0.0; x.len()];
    for _ in 0..=params.max_halvings {
        trial.iter_mut().zip(x.iter().zip(&d)).for_each(|(o, (xi, di))| *o = xi + t * di);
        let f = objective.value(&trial)?;
        if f.is_finite() && f <= value + params.armijo * t * slope {
            x.copy_from_slice(&trial);
            return Ok(StepOutcome::Moved);
        }
        t *= 0.5;
    }
    Ok(StepOutcome::Stagnated)
}

#[derive(Clone, Debug)]
pub struct Lbfgs {
    params: LbfgsParams,
    history: LbfgsHistory,
    previous: Option<(Vec<f64>, Vec<f64>)>,
}

impl Lbfgs {
    pub fn new(params: LbfgsParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, history: LbfgsHistory::new(params.memory), previous: None })
    }
}

impl Optimizer for Lbfgs {
    fn name(&self) -> &'static str {
        "lbfgs"
    }

    fn step(&mut self, objective: &dyn Objective, x: &mut [f64], jet: &Jet) -> Result<StepOutcome> {
        if let Some((px, pg)) = self.previous.take() {
            let s = x.iter().zip(&px).map(|(a, b)| a - b).collect();
            let y = jet.gradient.iter().zip(&pg).map(|(a, b)| a - b).collect();
            self.history.push(s, y);
        }
        if !jet.value.is_finite() {
            return Err(Error::Numerical("L-BFGS started from a non-finite cost".into()));
        }
        self.previous = Some((x.to_vec(), jet.gradient.clone()));
        lbfgs_step(&self.history, &self.params, objective, x, jet.value, &jet.gradient)
    }
}
