//! Optimizers behind one step interface, and the run drivers.
//!
//! [`optimize`] evaluates the objective at the current point (with the
//! Hessian only for IPG), records the cost, and asks the optimizer for the
//! next point. The cost history therefore has one entry per iterate,
//! including the starting point.

mod first_order;
mod ipg;
mod lbfgs;

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::ParameterVector;
use crate::cost::CostFunction;
use crate::error::{ensure, Result};

pub use first_order::{adam_step, gd_step, Adam, AdamParams, AdamState, GradientDescent};
pub use ipg::{
    eigen_extremes, gershgorin_bounds, ipg_schedule, ipg_step, EigenBounds, Ipg, IpgSchedule, IpgState,
    PreconditionerInit, ScheduleValues,
};
pub use lbfgs::{lbfgs_step, Lbfgs, LbfgsHistory, LbfgsParams};

/// Cost value and derivatives at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Option<DMatrix<f64>>,
}

/// A twice-differentiable scalar function of `dim()` real parameters.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn jet(&self, x: &[f64], with_hessian: bool) -> Result<Jet>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Moved,
    /// The optimizer could not find an acceptable point; `x` is unchanged.
    Stagnated,
}

pub trait Optimizer {
    fn name(&self) -> &'static str;

    fn needs_hessian(&self) -> bool {
        false
    }

    /// Moves `x` away from the point at which `jet` was evaluated.
    fn step(&mut self, objective: &dyn Objective, x: &mut [f64], jet: &Jet) -> Result<StepOutcome>;
}

/// Optimizer selection and its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Algorithm {
    Gd {
        learning_rate: f64,
    },
    Adam {
        learning_rate: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    Lbfgs(LbfgsParams),
    Ipg {
        #[serde(default)]
        schedule: IpgSchedule,
        #[serde(default)]
        init: PreconditionerInit,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_epsilon() -> f64 {
    1e-8
}

impl Algorithm {
    pub fn gd(learning_rate: f64) -> Self {
        Algorithm::Gd { learning_rate }
    }

    pub fn adam(learning_rate: f64) -> Self {
        let p = AdamParams::with_learning_rate(learning_rate);
        Algorithm::Adam { learning_rate, beta1: p.beta1, beta2: p.beta2, epsilon: p.epsilon }
    }

    pub fn lbfgs() -> Self {
        Algorithm::Lbfgs(LbfgsParams::default())
    }

    pub fn ipg() -> Self {
        Algorithm::Ipg { schedule: IpgSchedule::default(), init: PreconditionerInit::default() }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Gd { .. } => "gd",
            Algorithm::Adam { .. } => "adam",
            Algorithm::Lbfgs(_) => "lbfgs",
            Algorithm::Ipg { .. } => "ipg",
        }
    }

    pub fn build(&self) -> Result<Box<dyn Optimizer>> {
        Ok(match *self {
            Algorithm::Gd { learning_rate } => Box::new(GradientDescent::new(learning_rate)?),
            Algorithm::Adam { learning_rate, beta1, beta2, epsilon } => {
                Box::new(Adam::new(AdamParams { learning_rate, beta1, beta2, epsilon })?)
            }
            Algorithm::Lbfgs(p) => Box::new(Lbfgs::new(p)?),
            Algorithm::Ipg { schedule, init } => Box::new(Ipg::new(schedule, init)?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(flatten)]
    pub algorithm: Algorithm,
    pub max_iterations: usize,
    /// Stop once the cost drops below this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, max_iterations: usize) -> Self {
        Self { algorithm, max_iterations, tolerance: None }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Converged,
    Stagnated,
    NumericalAbort { message: String },
}

impl Termination {
    pub fn is_abnormal(&self) -> bool {
        matches!(self, Termination::NumericalAbort { .. })
    }
}

/// Outcome of one optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Cost at every iterate, starting with the initial point.
    pub cost_history: Vec<f64>,
    pub final_params: ParameterVector,
    pub termination: Termination,
    /// Left out of serialized output so that records are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_secs: Option<f64>,
}

impl RunRecord {
    pub fn iterations(&self) -> usize {
        self.cost_history.len().saturating_sub(1)
    }

    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().expect("history holds the initial cost")
    }
}

/// Runs one optimizer from `init`.
///
/// Configuration and dimension errors are returned as `Err`. A non-finite
/// value during the run stops it and is reported through
/// [`Termination::NumericalAbort`], keeping the history up to that point.
pub fn optimize(objective: &dyn Objective, config: &OptimizerConfig, init: &ParameterVector) -> Result<RunRecord> {
    ensure!(
        init.len() == objective.dim(),
        Argument,
        "initial point has {} parameters, objective expects {}",
        init.len(),
        objective.dim()
    );
    let mut optimizer = config.algorithm.build()?;
    let with_hessian = optimizer.needs_hessian();
    let start = Instant::now();

    let mut x = init.to_vec();
    let mut history = Vec::with_capacity(config.max_iterations + 1);
    let mut termination = Termination::MaxIterations;

    let checked_jet = |x: &[f64]| -> std::result::Result<Jet, String> {
        let jet = objective.jet(x, with_hessian).map_err(|e| e.to_string())?;
        let finite = jet.value.is_finite()
            && jet.gradient.iter().all(|v| v.is_finite())
            && jet.hessian.as_ref().is_none_or(|h| h.iter().all(|v| v.is_finite()));
        if finite {
            Ok(jet)
        } else {
            Err("objective returned non-finite values".to_string())
        }
    };

    let mut jet = match checked_jet(&x) {
        Ok(j) => j,
        Err(message) => {
            return Ok(record(optimizer.name(), history, x, Termination::NumericalAbort { message }, start));
        }
    };
    history.push(jet.value);

    for _ in 0..config.max_iterations {
        if config.tolerance.is_some_and(|tol| jet.value < tol) {
            termination = Termination::Converged;
            break;
        }
        let before = x.clone();
        match optimizer.step(objective, &mut x, &jet) {
            Ok(StepOutcome::Moved) => {}
            Ok(StepOutcome::Stagnated) => {
                termination = Termination::Stagnated;
                break;
            }
            Err(e) => {
                x = before;
                termination = Termination::NumericalAbort { message: e.to_string() };
                break;
            }
        }
        jet = match checked_jet(&x) {
            Ok(j) => j,
            Err(message) => {
                x = before;
                termination = Termination::NumericalAbort { message };
                break;
            }
        };
        history.push(jet.value);
    }
    if termination == Termination::MaxIterations && config.tolerance.is_some_and(|tol| jet.value < tol) {
        termination = Termination::Converged;
    }
    Ok(record(optimizer.name(), history, x, termination, start))
}

fn record(name: &str, history: Vec<f64>, x: Vec<f64>, termination: Termination, start: Instant) -> RunRecord {
    RunRecord {
        algorithm: name.to_string(),
        template: None,
        seed: None,
        cost_history: history,
        final_params: x.into(),
        termination,
        wall_time_secs: Some(start.elapsed().as_secs_f64()),
    }
}

/// Independent seeded runs of one optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiRun {
    /// Run with the lowest final cost; the earliest seed wins ties.
    pub best: RunRecord,
    /// Per-iteration mean over runs. Runs that stopped early count with
    /// their last cost.
    pub average_history: Vec<f64>,
    pub runs: Vec<RunRecord>,
}

/// Runs `n_runs` optimizations from `template.random_init(base_seed + i)`.
/// Runs execute in parallel; results are ordered by seed.
pub fn multi_run(cost: &CostFunction, config: &OptimizerConfig, n_runs: usize, base_seed: u64) -> Result<MultiRun> {
    ensure!(n_runs >= 1, Argument, "multi_run needs at least one run");
    let template = *cost.template();
    let runs: Vec<RunRecord> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed + i as u64;
            let mut rec = optimize(cost, config, &template.random_init(seed))?;
            rec.seed = Some(seed);
            rec.template = Some(template.to_string());
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    aggregate(runs)
}

/// Picks the best run and averages the histories.
pub fn aggregate(runs: Vec<RunRecord>) -> Result<MultiRun> {
    ensure!(!runs.is_empty(), Argument, "no runs to aggregate");
    ensure!(runs.iter().all(|r| !r.cost_history.is_empty()), Argument, "a run has an empty cost history");
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.final_cost().total_cmp(&b.final_cost()).then(ia.cmp(ib)))
        .map(|(_, r)| r.clone())
        .expect("non-empty");
    let len = runs.iter().map(|r| r.cost_history.len()).max().unwrap_or(0);
    let average_history = (0..len)
        .map(|t| {
            let sum: f64 = runs.iter().map(|r| *r.cost_history.get(t).unwrap_or(&r.final_cost())).sum();
            sum / runs.len() as f64
        })
        .collect();
    Ok(MultiRun { best, average_history, runs })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// `f(x) = x^T A x / 2` for a fixed symmetric `A`.
    pub(crate) struct Quadratic {
        pub a: DMatrix<f64>,
    }

    impl Quadratic {
        pub fn diagonal(d: &[f64]) -> Self {
            Self { a: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)) }
        }
    }

    impl Objective for Quadratic {
        fn dim(&self) -> usize {
            self.a.nrows()
        }
        fn value(&self, x: &[f64]) -> Result<f64> {
            let v = nalgebra::DVector::from_column_slice(x);
            Ok(0.5 * v.dot(&(&self.a * &v)))
        }
        fn jet(&self, x: &[f64], with_hessian: bool) -> Result<Jet> {
            let v = nalgebra::DVector::from_column_slice(x);
            let g = &self.a * &v;
            Ok(Jet {
                value: 0.5 * v.dot(&g),
                gradient: g.iter().copied().collect(),
                hessian: with_hessian.then(|| self.a.clone()),
            })
        }
    }

    #[test]
    fn zero_iteration_budget() {
        let q = Quadratic::diagonal(&[1.0, 2.0]);
        let rec = optimize(&q, &OptimizerConfig::new(Algorithm::ipg(), 0), &vec![1.0, 1.0].into()).unwrap();
        assert_eq!(rec.cost_history, vec![1.5]);
        assert_eq!(rec.iterations(), 0);
        assert_eq!(rec.final_params.to_vec(), vec![1.0, 1.0]);
    }

    #[test]
    fn gd_decreases_convex_quadratic() {
        let q = Quadratic::diagonal(&[0.5, 2.0, 4.0]);
        let rec = optimize(&q, &OptimizerConfig::new(Algorithm::gd(0.2), 30), &vec![1.0, -1.0, 0.5].into()).unwrap();
        assert!(rec.cost_history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn stationary_point_is_fixed_for_every_optimizer() {
        let q = Quadratic::diagonal(&[1.0, 3.0]);
        for alg in [Algorithm::gd(0.1), Algorithm::adam(0.1), Algorithm::lbfgs(), Algorithm::ipg()] {
            let rec = optimize(&q, &OptimizerConfig::new(alg, 5), &vec![0.0, 0.0].into()).unwrap();
            assert_eq!(rec.final_params.to_vec(), vec![0.0, 0.0], "{}", alg.tag());
            assert_eq!(rec.cost_history, vec![0.0; 6]);
        }
    }

    #[test]
    fn tolerance_stops_early() {
        let q = Quadratic::diagonal(&[1.0, 1.0]);
        let cfg = OptimizerConfig::new(Algorithm::ipg(), 50).with_tolerance(1e-20);
        let rec = optimize(&q, &cfg, &vec![1.0, 1.0].into()).unwrap();
        assert_eq!(rec.termination, Termination::Converged);
        assert!(rec.iterations() < 50);
    }

    #[test]
    fn invalid_configs() {
        let q = Quadratic::diagonal(&[1.0]);
        let init: ParameterVector = vec![1.0].into();
        assert!(optimize(&q, &OptimizerConfig::new(Algorithm::gd(0.0), 3), &init).is_err());
        assert!(optimize(&q, &OptimizerConfig::new(Algorithm::Lbfgs(LbfgsParams { memory: 0, ..Default::default() }), 3), &init).is_err());
        assert!(optimize(&q, &OptimizerConfig::new(Algorithm::gd(0.1), 3), &vec![1.0, 2.0].into()).is_err());
    }

    #[test]
    fn diverging_run_is_flagged() {
        let q = Quadratic::diagonal(&[1.0]);
        let rec = optimize(&q, &OptimizerConfig::new(Algorithm::gd(1e300), 5), &vec![1e10].into()).unwrap();
        assert!(rec.termination.is_abnormal());
        assert!(rec.cost_history.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn aggregate_pads_short_runs() {
        let mk = |h: Vec<f64>| RunRecord {
            algorithm: "gd".into(),
            template: None,
            seed: None,
            cost_history: h,
            final_params: vec![].into(),
            termination: Termination::MaxIterations,
            wall_time_secs: None,
        };
        let m = aggregate(vec![mk(vec![4.0, 2.0, 1.0]), mk(vec![2.0, 0.5])]).unwrap();
        assert_eq!(m.average_history, vec![3.0, 1.25, 0.75]);
        assert_eq!(m.best.cost_history, vec![2.0, 0.5]);
        let single = aggregate(vec![mk(vec![1.0, 0.5])]).unwrap();
        assert_eq!(single.average_history, single.best.cost_history);
    }

    #[test]
    fn config_json_shape() {
        let cfg = OptimizerConfig::new(Algorithm::adam(0.09), 32);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"algorithm\":\"adam\""), "{s}");
        let back: OptimizerConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        let ipg: OptimizerConfig = serde_json::from_str(r#"{"algorithm":"ipg","max_iterations":10}"#).unwrap();
        assert_eq!(ipg.algorithm, Algorithm::ipg());
    }
}
