//! Dense statevector and unitary arithmetic.
//!
//! A `q`-qubit register holds `2^q` complex amplitudes. Basis index `k` is
//! read as a bit string with qubit 0 in the most significant position, so
//! `|00000>` is index 0 and `|11111>` is index 31.
//!
//! Rotations follow `R_P(theta) = exp(-i theta P / 2)` for `P` in `{Y, Z}`:
//!
//! ```text
//! R_z(theta) = diag(e^{-i theta/2}, e^{+i theta/2})
//! R_y(theta) = [[cos theta/2, -sin theta/2],
//!               [sin theta/2,  cos theta/2]]
//! ```
//!
//! Unitaries are stored column-major. Column `j` of a circuit unitary is the
//! circuit applied to `|j>`, which lets every gate kernel run over a matrix
//! as a batch of `2^q` statevectors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Largest register the dense kernels accept.
pub const MAX_QUBITS: usize = 20;

#[inline]
fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Pure `q`-qubit state as `2^q` amplitudes.
///
/// Gate application preserves the norm; derivative states produced by
/// [`crate::autodiff`] reuse this type without being normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// The computational basis state `|k>`.
    pub fn basis(num_qubits: usize, k: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        ensure!(k < dim, Argument, "basis index {k} out of range for {num_qubits} qubits");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[k] = ONE;
        Ok(Self { num_qubits, amplitudes })
    }

    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Wraps raw amplitudes. The length must be a power of two; the norm is
    /// not checked.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        ensure!(
            dim >= 2 && dim.is_power_of_two(),
            Argument,
            "amplitude count {dim} is not a power of two >= 2"
        );
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubit_count(num_qubits)?;
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        ensure!(norm > 0.0 && norm.is_finite(), Argument, "cannot normalize a state of norm {norm}");
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn apply_rz(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        rz_kernel(&mut self.amplitudes, self.num_qubits, qubit, theta);
        Ok(())
    }

    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        ry_kernel(&mut self.amplitudes, self.num_qubits, qubit, theta);
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        ensure!(control != target, Argument, "CNOT control and target are both qubit {control}");
        cnot_kernel(&mut self.amplitudes, self.num_qubits, control, target);
        Ok(())
    }

    /// `<self|other> = sum_k conj(self_k) other_k`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        ensure!(
            self.num_qubits == other.num_qubits,
            Argument,
            "inner product between {} and {} qubit states",
            self.num_qubits,
            other.num_qubits
        );
        Ok(inner_slices(&self.amplitudes, &other.amplitudes))
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        ensure!(
            qubit < self.num_qubits,
            Argument,
            "qubit {qubit} out of range for {} qubits",
            self.num_qubits
        );
        Ok(())
    }
}

/// `2^q x 2^q` complex matrix, column-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryMatrix {
    num_qubits: usize,
    entries: Vec<C64>,
}

impl UnitaryMatrix {
    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        let mut entries = vec![ZERO; dim * dim];
        for j in 0..dim {
            entries[j * dim + j] = ONE;
        }
        Ok(Self { num_qubits, entries })
    }

    /// Builds a matrix from row-major nested rows. Unitarity is not checked.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        ensure!(dim >= 2 && dim.is_power_of_two(), Argument, "matrix dimension {dim} is not a power of two");
        ensure!(rows.iter().all(|r| r.len() == dim), Argument, "matrix rows are not all of length {dim}");
        let mut entries = vec![ZERO; dim * dim];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                entries[j * dim + i] = *v;
            }
        }
        Ok(Self { num_qubits: dim.trailing_zeros() as usize, entries })
    }

    pub(crate) fn from_column_major(num_qubits: usize, entries: Vec<C64>) -> Self {
        debug_assert_eq!(entries.len(), 1 << (2 * num_qubits));
        Self { num_qubits, entries }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Entry at `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[col * self.dim() + row]
    }

    pub fn column(&self, col: usize) -> StateVector {
        let dim = self.dim();
        StateVector {
            num_qubits: self.num_qubits,
            amplitudes: self.entries[col * dim..(col + 1) * dim].to_vec(),
        }
    }

    /// Column-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for c in 0..dim {
            for r in 0..dim {
                entries[r * dim + c] = self.entries[c * dim + r].conj();
            }
        }
        Self { num_qubits: self.num_qubits, entries }
    }

    pub fn matmul(&self, rhs: &UnitaryMatrix) -> Result<Self> {
        self.check_same(rhs)?;
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for c in 0..dim {
            for k in 0..dim {
                let b = rhs.entries[c * dim + k];
                if b == ZERO {
                    continue;
                }
                let col_a = &self.entries[k * dim..(k + 1) * dim];
                for (out, a) in entries[c * dim..(c + 1) * dim].iter_mut().zip(col_a) {
                    *out += a * b;
                }
            }
        }
        Ok(Self { num_qubits: self.num_qubits, entries })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        ensure!(
            state.num_qubits == self.num_qubits,
            Argument,
            "{} qubit matrix applied to {} qubit state",
            self.num_qubits,
            state.num_qubits
        );
        let dim = self.dim();
        let mut out = vec![ZERO; dim];
        for (c, x) in state.amplitudes.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(&self.entries[c * dim..(c + 1) * dim]) {
                *o += a * x;
            }
        }
        Ok(StateVector { num_qubits: self.num_qubits, amplitudes: out })
    }

    /// Frobenius inner product `sum_ij conj(self_ij) other_ij`.
    pub fn inner(&self, other: &UnitaryMatrix) -> Result<C64> {
        self.check_same(other)?;
        Ok(inner_slices(&self.entries, &other.entries))
    }

    /// Largest entry-wise deviation of `U^dagger U` from the identity.
    /// Complex determinant by LU decomposition.
    pub fn determinant(&self) -> C64 {
        nalgebra::DMatrix::from_column_slice(self.dim(), self.dim(), &self.entries).determinant()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for a in 0..dim {
            let col_a = &self.entries[a * dim..(a + 1) * dim];
            for b in 0..dim {
                let col_b = &self.entries[b * dim..(b + 1) * dim];
                let mut v = inner_slices(col_a, col_b);
                if a == b {
                    v -= ONE;
                }
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same(&self, other: &UnitaryMatrix) -> Result<()> {
        ensure!(
            self.num_qubits == other.num_qubits,
            Argument,
            "matrix dimension mismatch: {} vs {} qubits",
            self.num_qubits,
            other.num_qubits
        );
        Ok(())
    }
}

/// Where a rotation gate takes its angle from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Angle {
    /// Radians.
    Fixed(f64),
    /// Index into the parameter vector.
    Param(usize),
}

impl Angle {
    fn resolve(self, params: &[f64]) -> Result<f64> {
        match self {
            Angle::Fixed(v) => Ok(v),
            Angle::Param(i) => params.get(i).copied().ok_or_else(|| {
                Error::Config(format!(
                    "parameter index {i} is not resolvable in a vector of length {}",
                    params.len()
                ))
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Rz { qubit: usize, angle: Angle },
    Ry { qubit: usize, angle: Angle },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn param_index(&self) -> Option<usize> {
        match self {
            Gate::Rz { angle: Angle::Param(i), .. } | Gate::Ry { angle: Angle::Param(i), .. } => Some(*i),
            _ => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        !matches!(self, Gate::Cnot { .. })
    }

    /// Applies the gate to every `2^q` chunk of `amps`.
    pub(crate) fn apply_resolved(&self, amps: &mut [C64], num_qubits: usize, theta: f64) {
        match *self {
            Gate::Rz { qubit, .. } => rz_kernel(amps, num_qubits, qubit, theta),
            Gate::Ry { qubit, .. } => ry_kernel(amps, num_qubits, qubit, theta),
            Gate::Cnot { control, target } => cnot_kernel(amps, num_qubits, control, target),
        }
    }

    /// Applies the inverse gate.
    pub(crate) fn apply_inverse(&self, amps: &mut [C64], num_qubits: usize, theta: f64) {
        self.apply_resolved(amps, num_qubits, -theta)
    }

    /// Multiplies by the rotation generator `-i P / 2`. No-op contract for
    /// CNOT: it carries no angle and is never differentiated.
    pub(crate) fn apply_generator(&self, amps: &mut [C64], num_qubits: usize) {
        match *self {
            Gate::Rz { qubit, .. } => {
                let mask = qubit_mask(num_qubits, qubit);
                let lo = C64::new(0.0, -0.5);
                let hi = C64::new(0.0, 0.5);
                for (k, a) in amps.iter_mut().enumerate() {
                    *a *= if k & mask == 0 { lo } else { hi };
                }
            }
            Gate::Ry { qubit, .. } => {
                let mask = qubit_mask(num_qubits, qubit);
                for k in 0..amps.len() {
                    if k & mask == 0 {
                        let a0 = amps[k];
                        let a1 = amps[k | mask];
                        amps[k] = -0.5 * a1;
                        amps[k | mask] = 0.5 * a0;
                    }
                }
            }
            Gate::Cnot { .. } => unreachable!("CNOT has no generator"),
        }
    }

    fn qubits_in_range(&self, num_qubits: usize) -> Result<()> {
        match *self {
            Gate::Rz { qubit, .. } | Gate::Ry { qubit, .. } => {
                ensure!(qubit < num_qubits, Argument, "gate qubit {qubit} out of range for {num_qubits} qubits");
            }
            Gate::Cnot { control, target } => {
                ensure!(
                    control < num_qubits && target < num_qubits,
                    Argument,
                    "CNOT({control}, {target}) out of range for {num_qubits} qubits"
                );
                ensure!(control != target, Argument, "CNOT control and target are both qubit {control}");
            }
        }
        Ok(())
    }
}

/// A validated gate sequence on a fixed register width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        for g in &gates {
            g.qubits_in_range(num_qubits)?;
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// One past the largest parameter index referenced, 0 if none.
    pub fn min_param_len(&self) -> usize {
        self.gates.iter().filter_map(Gate::param_index).map(|i| i + 1).max().unwrap_or(0)
    }

    pub(crate) fn resolve_angles(&self, params: &[f64]) -> Result<Vec<f64>> {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::Rz { angle, .. } | Gate::Ry { angle, .. } => angle.resolve(params),
                Gate::Cnot { .. } => Ok(0.0),
            })
            .collect()
    }

    /// Runs the circuit over a batch of states packed in `amps`.
    pub(crate) fn apply_batch(&self, params: &[f64], amps: &mut [C64]) -> Result<()> {
        let angles = self.resolve_angles(params)?;
        for (g, theta) in self.gates.iter().zip(angles) {
            g.apply_resolved(amps, self.num_qubits, theta);
        }
        Ok(())
    }

    pub fn run(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        ensure!(
            input.num_qubits == self.num_qubits,
            Argument,
            "{} qubit circuit run on {} qubit state",
            self.num_qubits,
            input.num_qubits
        );
        let mut out = input.clone();
        self.apply_batch(params, &mut out.amplitudes)?;
        Ok(out)
    }

    /// The full matrix of the circuit; column `j` is the circuit applied to `|j>`.
    pub fn unitary(&self, params: &[f64]) -> Result<UnitaryMatrix> {
        let mut u = UnitaryMatrix::identity(self.num_qubits)?;
        self.apply_batch(params, &mut u.entries)?;
        Ok(u)
    }
}

/// Matrix of a gate sequence on `num_qubits` qubits.
pub fn circuit_unitary(gates: &[Gate], params: &[f64], num_qubits: usize) -> Result<UnitaryMatrix> {
    Circuit::new(num_qubits, gates.to_vec())?.unitary(params)
}

/// Quantum Fourier transform without the final qubit reversal:
/// entry `(k, j) = omega^{jk} / 2^{q/2}` with `omega = exp(2 pi i / 2^q)`.
pub fn qft_unitary(num_qubits: usize) -> Result<UnitaryMatrix> {
    check_qubit_count(num_qubits)?;
    let dim = 1usize << num_qubits;
    let norm = (dim as f64).sqrt().recip();
    let mut entries = vec![ZERO; dim * dim];
    for j in 0..dim {
        for k in 0..dim {
            // reduce the exponent first so large products keep full precision
            let phase = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
            entries[j * dim + k] = C64::from_polar(norm, phase);
        }
    }
    Ok(UnitaryMatrix { num_qubits, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzSign {
    Plus,
    Minus,
}

/// `(|0...0> +/- |1...1>) / sqrt(2)`.
pub fn ghz_state(num_qubits: usize, sign: GhzSign) -> Result<StateVector> {
    ensure!(num_qubits >= 2, Argument, "GHZ state needs at least 2 qubits, got {num_qubits}");
    let mut s = StateVector::zero(num_qubits)?;
    let last = s.dim() - 1;
    s.amplitudes[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    s.amplitudes[last] = match sign {
        GhzSign::Plus => C64::new(FRAC_1_SQRT_2, 0.0),
        GhzSign::Minus => C64::new(-FRAC_1_SQRT_2, 0.0),
    };
    Ok(s)
}

/// Equal superposition of the one-hot bit strings.
pub fn w_state(num_qubits: usize) -> Result<StateVector> {
    ensure!(num_qubits >= 2, Argument, "W state needs at least 2 qubits, got {num_qubits}");
    let mut s = StateVector::zero(num_qubits)?;
    s.amplitudes[0] = ZERO;
    let a = C64::new((num_qubits as f64).sqrt().recip(), 0.0);
    for b in 0..num_qubits {
        s.amplitudes[1 << b] = a;
    }
    Ok(s)
}

/// `<a|b>`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64> {
    a.inner(b)
}

pub(crate) fn inner_slices(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    ensure!(
        (1..=MAX_QUBITS).contains(&num_qubits),
        Argument,
        "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
    );
    Ok(())
}

fn rz_kernel(amps: &mut [C64], num_qubits: usize, qubit: usize, theta: f64) {
    let mask = qubit_mask(num_qubits, qubit);
    let lo = C64::from_polar(1.0, -0.5 * theta);
    let hi = lo.conj();
    for (k, a) in amps.iter_mut().enumerate() {
        *a *= if k & mask == 0 { lo } else { hi };
    }
}

fn ry_kernel(amps: &mut [C64], num_qubits: usize, qubit: usize, theta: f64) {
    let mask = qubit_mask(num_qubits, qubit);
    let (s, c) = (0.5 * theta).sin_cos();
    for k in 0..amps.len() {
        if k & mask == 0 {
            let a0 = amps[k];
            let a1 = amps[k | mask];
            amps[k] = c * a0 - s * a1;
            amps[k | mask] = s * a0 + c * a1;
        }
    }
}

fn cnot_kernel(amps: &mut [C64], num_qubits: usize, control: usize, target: usize) {
    let cmask = qubit_mask(num_qubits, control);
    let tmask = qubit_mask(num_qubits, target);
    for k in 0..amps.len() {
        if k & cmask != 0 && k & tmask == 0 {
            amps.swap(k, k | tmask);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_amps(s: &StateVector, expected: &[C64], tol: f64) {
        assert_eq!(s.dim(), expected.len());
        for (k, (a, e)) in s.amplitudes().iter().zip(expected).enumerate() {
            assert!((a - e).norm() <= tol, "amplitude {k}: {a} vs {e}");
        }
    }

    #[test]
    fn basis_states() {
        let s = StateVector::basis(5, 0).unwrap();
        assert_eq!(s.dim(), 32);
        assert_eq!(s.amplitudes()[0], ONE);
        assert_amps(&StateVector::basis(1, 1).unwrap(), &[ZERO, ONE], 0.0);
        assert_amps(&StateVector::basis(2, 3).unwrap(), &[ZERO, ZERO, ZERO, ONE], 0.0);
        assert!(matches!(StateVector::basis(2, 4), Err(Error::Argument(_))));
        assert!(StateVector::basis(0, 0).is_err());
    }

    #[test]
    fn rz_phases() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_rz(0, 0.0).unwrap();
        assert_amps(&s, &[ONE, ZERO], 1e-15);
        s.apply_rz(0, PI).unwrap();
        assert_amps(&s, &[c(0.0, -1.0), ZERO], 1e-15);
        let mut s = StateVector::basis(1, 1).unwrap();
        s.apply_rz(0, PI).unwrap();
        assert_amps(&s, &[ZERO, c(0.0, 1.0)], 1e-15);
    }

    #[test]
    fn ry_rotations() {
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_ry(0, 0.0).unwrap();
        assert_amps(&s, &[ONE, ZERO], 1e-15);
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_ry(0, PI).unwrap();
        assert_amps(&s, &[ZERO, ONE], 1e-15);
        let mut s = StateVector::basis(1, 0).unwrap();
        s.apply_ry(0, FRAC_PI_2).unwrap();
        let h = c(FRAC_1_SQRT_2, 0.0);
        assert_amps(&s, &[h, h], 1e-15);
    }

    #[test]
    fn cnot_truth_table() {
        let mut s = StateVector::basis(2, 0).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_amps(&s, &[ONE, ZERO, ZERO, ZERO], 0.0);
        // |10> is index 2 with qubit 0 as the high bit
        let mut s = StateVector::basis(2, 2).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_amps(&s, &[ZERO, ZERO, ZERO, ONE], 0.0);
        let h = c(FRAC_1_SQRT_2, 0.0);
        let mut s = StateVector::from_amplitudes(vec![h, ZERO, h, ZERO]).unwrap();
        s.apply_cnot(0, 1).unwrap();
        assert_amps(&s, &[h, ZERO, ZERO, h], 0.0);
        assert!(matches!(s.apply_cnot(1, 1), Err(Error::Argument(_))));
        assert!(s.apply_cnot(0, 2).is_err());
    }

    #[test]
    fn circuit_unitary_examples() {
        let id = circuit_unitary(&[], &[], 1).unwrap();
        assert_eq!(id, UnitaryMatrix::identity(1).unwrap());

        let ry = circuit_unitary(&[Gate::Ry { qubit: 0, angle: Angle::Fixed(PI) }], &[], 1).unwrap();
        let expected = UnitaryMatrix::from_rows(&[vec![ZERO, -ONE], vec![ONE, ZERO]]).unwrap();
        assert!(ry.max_abs_diff(&expected).unwrap() < 1e-15);

        let cx = circuit_unitary(&[Gate::Cnot { control: 0, target: 1 }], &[], 2).unwrap();
        for j in 0..4 {
            let col = cx.column(j);
            let image = match j {
                2 => 3,
                3 => 2,
                j => j,
            };
            assert_eq!(col.amplitudes()[image], ONE);
        }

        let missing = circuit_unitary(&[Gate::Rz { qubit: 0, angle: Angle::Param(3) }], &[0.0], 1);
        assert!(matches!(missing, Err(Error::Config(_))));
    }

    #[test]
    fn qft_examples() {
        let h = qft_unitary(1).unwrap();
        let r = c(FRAC_1_SQRT_2, 0.0);
        let expected = UnitaryMatrix::from_rows(&[vec![r, r], vec![r, -r]]).unwrap();
        assert!(h.max_abs_diff(&expected).unwrap() < 1e-15);

        let q2 = qft_unitary(2).unwrap();
        assert!((q2.get(1, 1) - c(0.0, 0.5)).norm() < 1e-15);

        for q in 1..=6 {
            assert!(qft_unitary(q).unwrap().unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn qft_of_vacuum_is_uniform() {
        for q in 1..=5 {
            let out = qft_unitary(q).unwrap().apply(&StateVector::zero(q).unwrap()).unwrap();
            let a = (1usize << q) as f64;
            for amp in out.amplitudes() {
                assert!((amp - c(a.sqrt().recip(), 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn target_states() {
        let g = ghz_state(2, GhzSign::Minus).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_amps(&g, &[c(r, 0.0), ZERO, ZERO, c(-r, 0.0)], 0.0);
        let g5 = ghz_state(5, GhzSign::Minus).unwrap();
        let nonzero: Vec<_> = (0..32).filter(|&k| g5.amplitudes()[k] != ZERO).collect();
        assert_eq!(nonzero, vec![0, 31]);
        let g3 = ghz_state(3, GhzSign::Plus).unwrap();
        assert_eq!(g3.amplitudes()[7], c(r, 0.0));
        assert!(ghz_state(1, GhzSign::Plus).is_err());

        assert_amps(&w_state(2).unwrap(), &[ZERO, c(r, 0.0), c(r, 0.0), ZERO], 1e-15);
        let w4 = w_state(4).unwrap();
        let nonzero: Vec<_> = (0..16).filter(|&k| w4.amplitudes()[k] != ZERO).collect();
        assert_eq!(nonzero, vec![1, 2, 4, 8]);
        let w3 = w_state(3).unwrap();
        for k in [1, 2, 4] {
            assert!((w3.amplitudes()[k].re - 3f64.sqrt().recip()).abs() < 1e-16);
        }
        assert!(w_state(1).is_err());
    }

    #[test]
    fn inner_products() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        let plus = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        assert!((inner_product(&plus, &plus).unwrap() - ONE).norm() < 1e-15);
        assert_eq!(inner_product(&zero, &one).unwrap(), ZERO);
        assert!((inner_product(&zero, &plus).unwrap() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!(inner_product(&zero, &StateVector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn gate_identities() {
        let a = 0.37;
        let b = -1.21;
        let g = |gates: Vec<Gate>| circuit_unitary(&gates, &[], 1).unwrap();
        let rz = |t| Gate::Rz { qubit: 0, angle: Angle::Fixed(t) };
        let ry = |t| Gate::Ry { qubit: 0, angle: Angle::Fixed(t) };
        assert!(g(vec![rz(a), rz(b)]).max_abs_diff(&g(vec![rz(a + b)])).unwrap() < 1e-12);
        assert!(g(vec![ry(a), ry(-a)]).max_abs_diff(&UnitaryMatrix::identity(1).unwrap()).unwrap() < 1e-12);
        let cx = Gate::Cnot { control: 1, target: 0 };
        let cc = circuit_unitary(&[cx, cx], &[], 2).unwrap();
        assert!(cc.max_abs_diff(&UnitaryMatrix::identity(2).unwrap()).unwrap() == 0.0);
    }

    #[test]
    fn generator_matches_derivative_of_rotation() {
        let theta = 0.8;
        let h = 1e-6;
        for gate in [Gate::Rz { qubit: 1, angle: Angle::Fixed(0.0) }, Gate::Ry { qubit: 0, angle: Angle::Fixed(0.0) }] {
            let mut base = StateVector::from_amplitudes(vec![c(0.1, 0.2), c(-0.3, 0.4), c(0.5, 0.1), c(0.2, -0.6)]).unwrap();
            base.normalize().unwrap();
            let mut plus = base.clone();
            let mut minus = base.clone();
            gate.apply_resolved(plus.amplitudes_mut(), 2, theta + h);
            gate.apply_resolved(minus.amplitudes_mut(), 2, theta - h);
            let mut analytic = base.clone();
            gate.apply_resolved(analytic.amplitudes_mut(), 2, theta);
            gate.apply_generator(analytic.amplitudes_mut(), 2);
            for k in 0..4 {
                let fd = (plus.amplitudes()[k] - minus.amplitudes()[k]) / (2.0 * h);
                assert!((fd - analytic.amplitudes()[k]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn matmul_and_adjoint() {
        let u = qft_unitary(2).unwrap();
        let p = u.adjoint().matmul(&u).unwrap();
        assert!(p.max_abs_diff(&UnitaryMatrix::identity(2).unwrap()).unwrap() < 1e-14);
    }
}
