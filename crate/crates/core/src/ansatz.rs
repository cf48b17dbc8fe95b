//! Layered rotation/CNOT circuit template and its parameter layout.
//!
//! Each layer applies `R_z(alpha) R_y(beta) R_z(gamma)` to every qubit, with
//! `R_z(gamma)` acting first, followed by a nearest-neighbour CNOT chain
//! `0 -> 1 -> ... -> q-1`. Parameters are laid out layer-major, then by
//! qubit, then by slot in application order `(gamma, beta, alpha)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Deref, DerefMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::sim::{Angle, Circuit, Gate};

/// Where the CNOT chains go.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglerPattern {
    /// A chain after every rotation layer.
    #[default]
    ChainEveryLayer,
    /// A chain after every rotation layer except the last.
    ChainBetweenLayers,
}

/// Position of an angle inside one `R_z R_y R_z` block, in application order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Gamma = 0,
    Beta = 1,
    Alpha = 2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitTemplate {
    num_qubits: usize,
    num_layers: usize,
    #[serde(default)]
    entangler: EntanglerPattern,
}

impl CircuitTemplate {
    pub fn new(num_qubits: usize, num_layers: usize, entangler: EntanglerPattern) -> Result<Self> {
        ensure!(
            (1..=crate::sim::MAX_QUBITS).contains(&num_qubits),
            Argument,
            "template qubit count {num_qubits} out of range"
        );
        ensure!(num_layers >= 1, Argument, "template needs at least one layer");
        Ok(Self { num_qubits, num_layers, entangler })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn entangler(&self) -> EntanglerPattern {
        self.entangler
    }

    /// `3 * q * layers`.
    pub fn param_count(&self) -> usize {
        3 * self.num_qubits * self.num_layers
    }

    /// Number of CNOT chains in the circuit.
    pub fn chain_count(&self) -> usize {
        if self.num_qubits < 2 {
            return 0;
        }
        match self.entangler {
            EntanglerPattern::ChainEveryLayer => self.num_layers,
            EntanglerPattern::ChainBetweenLayers => self.num_layers - 1,
        }
    }

    pub fn param_index(&self, layer: usize, qubit: usize, slot: Slot) -> Result<usize> {
        ensure!(layer < self.num_layers, Argument, "layer {layer} out of range for {} layers", self.num_layers);
        ensure!(qubit < self.num_qubits, Argument, "qubit {qubit} out of range for {} qubits", self.num_qubits);
        Ok((layer * self.num_qubits + qubit) * 3 + slot as usize)
    }

    pub fn gate_list(&self) -> Vec<Gate> {
        let q = self.num_qubits;
        let chains = self.chain_count();
        let mut gates = Vec::with_capacity(self.param_count() + chains * q.saturating_sub(1));
        for layer in 0..self.num_layers {
            for qubit in 0..q {
                let base = (layer * q + qubit) * 3;
                gates.push(Gate::Rz { qubit, angle: Angle::Param(base + Slot::Gamma as usize) });
                gates.push(Gate::Ry { qubit, angle: Angle::Param(base + Slot::Beta as usize) });
                gates.push(Gate::Rz { qubit, angle: Angle::Param(base + Slot::Alpha as usize) });
            }
            if layer < chains {
                for i in 0..q - 1 {
                    gates.push(Gate::Cnot { control: i, target: i + 1 });
                }
            }
        }
        gates
    }

    pub fn circuit(&self) -> Circuit {
        Circuit::new(self.num_qubits, self.gate_list()).expect("template gates are in range")
    }

    /// Independent `Uniform(-pi, pi)` angles from a ChaCha8 stream seeded with `seed`.
    pub fn random_init(&self, seed: u64) -> ParameterVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ParameterVector::new(uniform_angles(&mut rng, self.param_count()))
    }

    pub fn zero_params(&self) -> ParameterVector {
        ParameterVector::new(vec![0.0; self.param_count()])
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        ensure!(
            params.len() == self.param_count(),
            Argument,
            "expected {} parameters for {self}, got {}",
            self.param_count(),
            params.len()
        );
        Ok(())
    }
}

impl fmt::Display for CircuitTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pattern = match self.entangler {
            EntanglerPattern::ChainEveryLayer => "chain_every_layer",
            EntanglerPattern::ChainBetweenLayers => "chain_between_layers",
        };
        write!(f, "q={} layers={} {pattern}", self.num_qubits, self.num_layers)
    }
}

/// Draws from the open interval `(-pi, pi)`.
pub(crate) fn uniform_angles<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = rng.random_range(-PI..PI);
        if v > -PI {
            out.push(v);
        }
    }
    out
}

/// Rotation angles in radians.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParameterVector {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for ParameterVector {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}
