use ipgq::ansatz::CircuitTemplate;
use ipgq::cost::{fidelity_histogram, matrix_distance_floor, CostFunction, CostKind, HistogramSample};
use ipgq::optim::{multi_run, Algorithm, OptimizerConfig, RunRecord};
use ipgq::sim::{ghz_state, qft_unitary, w_state, GhzSign, StateVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;

/// Results of one optimizer across its seeded runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub optimizer: String,
    pub settings: Algorithm,
    pub seeds: Vec<u64>,
    pub final_costs: Vec<f64>,
    pub best: RunRecord,
    pub average_history: Vec<f64>,
    /// Some run stopped on a numerical abort.
    pub failed: bool,
}

/// Random-input comparison of an optimizer's best circuit with the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRecord {
    pub optimizer: String,
    pub sampling_seed: u64,
    pub samples: Vec<HistogramSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerAttempt {
    pub num_layers: usize,
    pub best_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRecord {
    pub version: String,
    pub config: ExperimentConfig,
    /// Cost function name, e.g. `matrix_distance`.
    pub cost: String,
    /// Layer count of the reported results, after any growth.
    pub num_layers: usize,
    pub results: Vec<OptimizerResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub histograms: Vec<HistogramRecord>,
    /// Lowest matrix distance allowed by the circuit's determinant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_distance_floor: Option<f64>,
    pub layer_attempts: Vec<LayerAttempt>,
    pub failed: bool,
}

impl AggregateRecord {
    pub fn result(&self, optimizer: &str) -> Option<&OptimizerResult> {
        self.results.iter().find(|r| r.optimizer == optimizer)
    }

    pub fn histogram(&self, optimizer: &str) -> Option<&HistogramRecord> {
        self.histograms.iter().find(|h| h.optimizer == optimizer)
    }

    /// Lowest final cost over all optimizers.
    pub fn best_cost(&self) -> f64 {
        self.results.iter().map(|r| r.best.final_cost()).fold(f64::INFINITY, f64::min)
    }
}

/// Cost function of an experiment for the given template.
pub fn experiment_cost(kind: ExperimentKind, template: CircuitTemplate) -> Result<CostFunction> {
    let q = template.num_qubits();
    let kind = match kind {
        ExperimentKind::GhzPrep => {
            CostKind::StateInfidelity { target: ghz_state(q, GhzSign::Minus)?, input: StateVector::zero(q)? }
        }
        ExperimentKind::WPrep => CostKind::StateInfidelity { target: w_state(q)?, input: StateVector::zero(q)? },
        ExperimentKind::QftMatrixDistance => CostKind::MatrixDistance { target: qft_unitary(q)? },
        ExperimentKind::QftFrobenius => CostKind::FrobeniusInfidelity { target: qft_unitary(q)? },
    };
    Ok(CostFunction::new(template, kind)?)
}

/// Runs every configured optimizer and aggregates the results.
///
/// Numerical aborts do not fail the call; they set `failed` on the affected
/// optimizer and on the record.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateRecord> {
    config.validate()?;
    let mut layers = config.num_layers;
    let mut attempts = Vec::new();
    loop {
        let cost = experiment_cost(config.experiment, CircuitTemplate::new(config.num_qubits, layers, config.entangler)?)?;
        let results = run_optimizers(config, &cost)?;
        let best_cost = results.iter().map(|r| r.best.final_cost()).fold(f64::INFINITY, f64::min);
        attempts.push(LayerAttempt { num_layers: layers, best_cost });
        let grow = config.grow_layers.is_some_and(|g| best_cost > g.threshold && attempts.len() <= g.max_rounds);
        if grow {
            layers += 2;
            continue;
        }
        return finish(config, &cost, results, attempts);
    }
}

fn run_optimizers(config: &ExperimentConfig, cost: &CostFunction) -> Result<Vec<OptimizerResult>> {
    config
        .optimizers
        .par_iter()
        .enumerate()
        .map(|(k, algorithm)| {
            let seeds = config.seeds_for(k);
            let opt = OptimizerConfig::new(*algorithm, config.iterations);
            let multi = multi_run(cost, &opt, config.n_runs, seeds.start)?;
            Ok(OptimizerResult {
                optimizer: algorithm.tag().to_string(),
                settings: *algorithm,
                seeds: seeds.collect(),
                final_costs: multi.runs.iter().map(RunRecord::final_cost).collect(),
                failed: multi.runs.iter().any(|r| r.termination.is_abnormal()),
                best: multi.best,
                average_history: multi.average_history,
            })
        })
        .collect()
}

fn finish(
    config: &ExperimentConfig,
    cost: &CostFunction,
    results: Vec<OptimizerResult>,
    layer_attempts: Vec<LayerAttempt>,
) -> Result<AggregateRecord> {
    let mut histograms = Vec::new();
    let mut floor = None;
    if let CostKind::MatrixDistance { target } | CostKind::FrobeniusInfidelity { target } = cost.kind() {
        let circuit = cost.circuit();
        for r in &results {
            let samples =
                fidelity_histogram(circuit, &r.best.final_params, target, config.histogram_samples, config.base_seed)?;
            histograms.push(HistogramRecord { optimizer: r.optimizer.clone(), sampling_seed: config.base_seed, samples });
        }
        if config.experiment == ExperimentKind::QftMatrixDistance {
            let det = circuit.unitary(&cost.template().zero_params())?.determinant();
            floor = Some(matrix_distance_floor(target, det)?);
        }
    }
    Ok(AggregateRecord {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        cost: cost.kind().name().to_string(),
        num_layers: cost.template().num_layers(),
        failed: results.iter().any(|r| r.failed),
        results,
        histograms,
        matrix_distance_floor: floor,
        layer_attempts,
    })
}
