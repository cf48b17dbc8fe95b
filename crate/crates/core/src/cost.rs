//! Circuit cost functions and post-optimization diagnostics.
//!
//! All three costs are affine or quadratic in a single complex overlap, so
//! their derivatives come from the overlap derivatives of
//! [`crate::autodiff`] by the chain rule:
//!
//! | kind                  | overlap `z`                | cost          |
//! |-----------------------|----------------------------|---------------|
//! | `StateInfidelity`     | `<target\|U\|input>`        | `1 - Re z`    |
//! | `MatrixDistance`      | `sum conj(A) B / 2^q`      | `2 - 2 Re z`  |
//! | `FrobeniusInfidelity` | `sum conj(A) B / 2^q`      | `1 - \|z\|^2` |
//!
//! The matrix distance is evaluated directly as `sum |A - B|^2 / 2^q`; the
//! affine form is only used for derivatives. The identity between the two
//! holds because both matrices have squared Frobenius norm `2^q`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitTemplate;
use crate::autodiff::{state_overlap_jet, unitary_overlap_jet, OverlapJet};
use crate::error::{ensure, Error, Result};
use crate::optim::{Jet, Objective};
use crate::sim::{Circuit, StateVector, UnitaryMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostKind {
    /// `1 - Re <target|psi>` with `psi` the circuit applied to `input`.
    /// Sensitive to the phase of the output.
    StateInfidelity { target: StateVector, input: StateVector },
    /// `sum_mn |A_mn - B_mn|^2 / 2^q`.
    MatrixDistance { target: UnitaryMatrix },
    /// `1 - |sum_ij conj(A_ij) B_ij / 2^q|^2`; invariant under a global phase on `B`.
    FrobeniusInfidelity { target: UnitaryMatrix },
}

impl CostKind {
    pub fn name(&self) -> &'static str {
        match self {
            CostKind::StateInfidelity { .. } => "state_infidelity",
            CostKind::MatrixDistance { .. } => "matrix_distance",
            CostKind::FrobeniusInfidelity { .. } => "frobenius_infidelity",
        }
    }
}

/// A cost kind bound to a circuit template.
#[derive(Clone, Debug)]
pub struct CostFunction {
    template: CircuitTemplate,
    circuit: Circuit,
    kind: CostKind,
}

impl CostFunction {
    pub fn new(template: CircuitTemplate, kind: CostKind) -> Result<Self> {
        let q = template.num_qubits();
        let dims_ok = match &kind {
            CostKind::StateInfidelity { target, input } => target.num_qubits() == q && input.num_qubits() == q,
            CostKind::MatrixDistance { target } | CostKind::FrobeniusInfidelity { target } => target.num_qubits() == q,
        };
        ensure!(dims_ok, Argument, "{} target does not act on {q} qubits", kind.name());
        Ok(Self { template, circuit: template.circuit(), kind })
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn value(&self, params: &[f64]) -> Result<f64> {
        self.template.check_params(params)?;
        match &self.kind {
            CostKind::StateInfidelity { target, input } => {
                let out = self.circuit.run(params, input)?;
                Ok(1.0 - target.inner(&out)?.re)
            }
            CostKind::MatrixDistance { target } => {
                let b = self.circuit.unitary(params)?;
                let sum: f64 = target.entries().iter().zip(b.entries()).map(|(a, b)| (a - b).norm_sqr()).sum();
                Ok(sum / target.dim() as f64)
            }
            CostKind::FrobeniusInfidelity { target } => {
                let b = self.circuit.unitary(params)?;
                let z = target.inner(&b)? / target.dim() as f64;
                Ok(1.0 - z.norm_sqr())
            }
        }
    }

    pub fn state_infidelity(&self, params: &[f64]) -> Result<f64> {
        self.expect_kind("state_infidelity")?;
        self.value(params)
    }

    pub fn matrix_distance(&self, params: &[f64]) -> Result<f64> {
        self.expect_kind("matrix_distance")?;
        self.value(params)
    }

    pub fn frobenius_infidelity(&self, params: &[f64]) -> Result<f64> {
        self.expect_kind("frobenius_infidelity")?;
        self.value(params)
    }

    /// Circuit output for a state cost.
    pub fn output_state(&self, params: &[f64]) -> Result<StateVector> {
        match &self.kind {
            CostKind::StateInfidelity { input, .. } => self.circuit.run(params, input),
            other => Err(Error::KindMismatch { expected: "state_infidelity", found: other.name() }),
        }
    }

    pub fn gradient(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(self.evaluate(params, false)?.gradient)
    }

    pub fn hessian(&self, params: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.evaluate(params, true)?.hessian.expect("requested"))
    }

    /// Value, exact gradient and optionally the exact Hessian.
    pub fn evaluate(&self, params: &[f64], with_hessian: bool) -> Result<Jet> {
        self.template.check_params(params)?;
        let n = params.len();
        let (overlap, scale) = self.overlap(params, with_hessian)?;
        let dz = |k: usize| overlap.gradient[k] * scale;
        let d2z = |j: usize, k: usize| overlap.hessian.as_ref().map(|h| *h.get(j, k) * scale);
        let z = overlap.value * scale;

        // dcost = -w Re(dz) for the affine kinds
        let affine = |w: f64| -> (Vec<f64>, Option<DMatrix<f64>>) {
            let g = (0..n).map(|k| -w * dz(k).re).collect();
            let h = with_hessian.then(|| DMatrix::from_fn(n, n, |j, k| -w * d2z(j, k).unwrap().re));
            (g, h)
        };
        let (value, (gradient, hessian)) = match &self.kind {
            CostKind::StateInfidelity { .. } => (1.0 - z.re, affine(1.0)),
            CostKind::MatrixDistance { .. } => (self.value(params)?, affine(2.0)),
            CostKind::FrobeniusInfidelity { .. } => {
                let zc = z.conj();
                let g = (0..n).map(|k| -2.0 * (zc * dz(k)).re).collect();
                let h = with_hessian.then(|| {
                    DMatrix::from_fn(n, n, |j, k| -2.0 * (dz(j).conj() * dz(k) + zc * d2z(j, k).unwrap()).re)
                });
                (1.0 - z.norm_sqr(), (g, h))
            }
        };
        Ok(Jet { value, gradient, hessian })
    }

    fn overlap(&self, params: &[f64], with_hessian: bool) -> Result<(OverlapJet, f64)> {
        match &self.kind {
            CostKind::StateInfidelity { target, input } => {
                Ok((state_overlap_jet(&self.circuit, params, input, target, with_hessian)?, 1.0))
            }
            CostKind::MatrixDistance { target } | CostKind::FrobeniusInfidelity { target } => Ok((
                unitary_overlap_jet(&self.circuit, params, target, with_hessian)?,
                1.0 / target.dim() as f64,
            )),
        }
    }

    fn expect_kind(&self, expected: &'static str) -> Result<()> {
        let found = self.kind.name();
        if found == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch { expected, found })
        }
    }
}

impl Objective for CostFunction {
    fn dim(&self) -> usize {
        self.template.param_count()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        CostFunction::value(self, x)
    }

    fn jet(&self, x: &[f64], with_hessian: bool) -> Result<Jet> {
        self.evaluate(x, with_hessian)
    }
}

/// Smallest matrix distance to `target` reachable by any unitary whose
/// determinant is `circuit_determinant`.
///
/// With `det(A^dag B) = e^{i chi}`, the trace `Re tr(A^dag B)` is largest when
/// all eigenvalues of `A^dag B` share one phase `(chi + 2 pi k) / 2^q`, so the
/// floor is `2 - 2 max_k cos((chi + 2 pi k) / 2^q)`. Every circuit built from
/// `R_z`, `R_y` and CNOT has a determinant of `+1` or `-1`, which pins the
/// reachable global phases to a discrete set.
pub fn matrix_distance_floor(target: &UnitaryMatrix, circuit_determinant: C64) -> Result<f64> {
    ensure!(
        (circuit_determinant.norm() - 1.0).abs() < 1e-9,
        Argument,
        "determinant {circuit_determinant} does not have unit modulus"
    );
    let n = target.dim() as f64;
    let chi = (target.determinant().conj() * circuit_determinant).arg();
    let best = (0..target.dim())
        .map(|k| ((chi + 2.0 * std::f64::consts::PI * k as f64) / n).cos())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((2.0 - 2.0 * best).max(0.0))
}

/// `|acos(Re <ref|cand>) - asin(Im <ref|cand>)|`, zero when `cand` equals
/// `ref` up to a phase in `[0, pi/2]`.
///
/// Other phases give a nonzero value because of the principal branches of
/// `acos`/`asin`. Both arguments are clamped to `[-1, 1]` first.
pub fn delta_theta(reference: &StateVector, candidate: &StateVector) -> Result<f64> {
    let z = reference.inner(candidate)?;
    let theta1 = z.re.clamp(-1.0, 1.0).acos();
    let theta2 = z.im.clamp(-1.0, 1.0).asin();
    Ok((theta1 - theta2).abs())
}

/// Uniformly random pure state: a normalized vector of complex standard normals.
pub fn haar_random_state<R: rand::Rng>(num_qubits: usize, rng: &mut R) -> Result<StateVector> {
    ensure!(num_qubits >= 1, Argument, "random state needs at least one qubit");
    let dim = 1usize << num_qubits;
    let amps = (0..dim)
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let mut s = StateVector::from_amplitudes(amps)?;
    s.normalize()?;
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSample {
    /// `|<U_target x | U_circuit x>|`.
    pub fidelity: f64,
    pub delta_theta: f64,
}

/// Compares a circuit with a target unitary on `n_samples` random input
/// states. Sample `i` draws from ChaCha8 stream `i` of `seed`, so the result
/// does not depend on how the work is scheduled.
pub fn fidelity_histogram(
    circuit: &Circuit,
    params: &[f64],
    target: &UnitaryMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<HistogramSample>> {
    ensure!(n_samples >= 1, Argument, "histogram needs at least one sample");
    ensure!(
        target.num_qubits() == circuit.num_qubits(),
        Argument,
        "target matrix has {} qubits but the circuit has {}",
        target.num_qubits(),
        circuit.num_qubits()
    );
    let realized = circuit.unitary(params)?;
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x = haar_random_state(circuit.num_qubits(), &mut rng)?;
            let ideal = target.apply(&x)?;
            let got = realized.apply(&x)?;
            Ok(HistogramSample { fidelity: ideal.inner(&got)?.norm(), delta_theta: delta_theta(&ideal, &got)? })
        })
        .collect()
}
