//! Exact first and second derivatives of circuits by generator insertion.
//!
//! A rotation `R(theta) = exp(-i theta P / 2)` has derivative
//! `(-i P / 2) R(theta)`, so the derivative of a circuit output with respect
//! to an angle is the same circuit with `-i P / 2` inserted right after the
//! gate that reads it. Second derivatives insert at two positions; inserting
//! twice at the same gate gives `(-i P / 2)^2 = -1/4`.
//!
//! Two routes are provided:
//!
//! * [`state_jet`] / [`unitary_jet`] build the derivative states and
//!   matrices themselves by running the inserted circuits.
//! * [`state_overlap_jet`] / [`unitary_overlap_jet`] return only the
//!   derivatives of an overlap `<target|U(theta)|input>`. They use a forward
//!   sweep plus a stored backward (adjoint) sweep, so the gradient costs
//!   `O(n_gates)` gate applications and the Hessian `O(n_params * n_gates)`.
//!
//! Both routes sum over every gate that reads a given parameter, so circuits
//! that share an angle between gates are handled.
//!
//! [`fd_gradient`] and [`fd_hessian`] are central finite-difference oracles
//! for checking the above. They are not used by the optimizers.

use nalgebra::DMatrix;

use crate::error::{ensure, Result};
use crate::sim::{inner_slices, Circuit, StateVector, UnitaryMatrix, C64};

/// Upper triangle of a symmetric `n x n` array, row-major.
///
/// Each unordered pair is stored once, so `get(j, k) == get(k, j)` holds
/// exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedSymmetric<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> PackedSymmetric<T> {
    fn filled(n: usize, fill: T) -> Self {
        Self { n, data: vec![fill; n * (n + 1) / 2] }
    }
}

impl<T> PackedSymmetric<T> {
    pub fn dim(&self) -> usize {
        self.n
    }

    fn offset(&self, j: usize, k: usize) -> usize {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        assert!(b < self.n, "index ({j}, {k}) out of range for dimension {}", self.n);
        a * self.n - a * (a + 1) / 2 + b
    }

    pub fn get(&self, j: usize, k: usize) -> &T {
        &self.data[self.offset(j, k)]
    }

    fn get_mut(&mut self, j: usize, k: usize) -> &mut T {
        let i = self.offset(j, k);
        &mut self.data[i]
    }
}

impl PackedSymmetric<f64> {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |j, k| *self.get(j, k))
    }
}

/// Output state with its parameter derivatives.
#[derive(Clone, Debug)]
pub struct StateJet {
    pub value: StateVector,
    /// `d psi / d theta_k` for every entry of the parameter vector.
    pub gradient: Vec<StateVector>,
    /// `d^2 psi / d theta_j d theta_k`, when requested.
    pub hessian: Option<PackedSymmetric<StateVector>>,
}

/// Circuit matrix with its parameter derivatives.
#[derive(Clone, Debug)]
pub struct UnitaryJet {
    pub value: UnitaryMatrix,
    pub gradient: Vec<UnitaryMatrix>,
    pub hessian: Option<PackedSymmetric<UnitaryMatrix>>,
}

/// A complex overlap `z(theta)` with its derivatives.
#[derive(Clone, Debug)]
pub struct OverlapJet {
    pub value: C64,
    pub gradient: Vec<C64>,
    pub hessian: Option<PackedSymmetric<C64>>,
}

/// A rotation gate reading a parameter.
#[derive(Clone, Copy, Debug)]
struct Occurrence {
    position: usize,
    param: usize,
}

/// Resolved circuit ready for sweeps.
struct Sweep<'a> {
    circuit: &'a Circuit,
    angles: Vec<f64>,
    occurrences: Vec<Occurrence>,
    num_params: usize,
}

impl<'a> Sweep<'a> {
    fn new(circuit: &'a Circuit, params: &[f64]) -> Result<Self> {
        let angles = circuit.resolve_angles(params)?;
        let occurrences = circuit
            .gates()
            .iter()
            .enumerate()
            .filter_map(|(position, g)| g.param_index().map(|param| Occurrence { position, param }))
            .collect();
        Ok(Self { circuit, angles, occurrences, num_params: params.len() })
    }

    fn q(&self) -> usize {
        self.circuit.num_qubits()
    }

    fn apply_range(&self, amps: &mut [C64], range: std::ops::Range<usize>) {
        let gates = self.circuit.gates();
        for i in range {
            gates[i].apply_resolved(amps, self.q(), self.angles[i]);
        }
    }

    fn insert(&self, amps: &mut [C64], occ: Occurrence) {
        self.circuit.gates()[occ.position].apply_generator(amps, self.q());
    }

    /// State right after each occurrence's gate, plus the final output.
    fn forward(&self, input: &[C64]) -> (Vec<Vec<C64>>, Vec<C64>) {
        let mut cur = input.to_vec();
        let mut snaps = Vec::with_capacity(self.occurrences.len());
        let mut cursor = 0;
        for occ in &self.occurrences {
            self.apply_range(&mut cur, cursor..occ.position + 1);
            cursor = occ.position + 1;
            snaps.push(cur.clone());
        }
        self.apply_range(&mut cur, cursor..self.circuit.gates().len());
        (snaps, cur)
    }

    /// `S_o^dagger target` for every occurrence `o`, where `S_o` is the
    /// part of the circuit after that occurrence's gate.
    fn backward(&self, target: &[C64]) -> Vec<Vec<C64>> {
        let gates = self.circuit.gates();
        let mut lam = target.to_vec();
        let mut out = vec![Vec::new(); self.occurrences.len()];
        let mut next = self.occurrences.len();
        for i in (0..gates.len()).rev() {
            if next > 0 && self.occurrences[next - 1].position == i {
                next -= 1;
                out[next] = lam.clone();
            }
            gates[i].apply_inverse(&mut lam, self.q(), self.angles[i]);
        }
        out
    }

    /// Runs the inserted circuits and returns the derivative batches.
    #[allow(clippy::type_complexity)]
    fn insertion(
        &self,
        input: &[C64],
        with_hessian: bool,
    ) -> (Vec<C64>, Vec<Vec<C64>>, Option<PackedSymmetric<Vec<C64>>>) {
        let len = input.len();
        let n_gates = self.circuit.gates().len();
        let (snaps, value) = self.forward(input);
        let zero = vec![C64::new(0.0, 0.0); len];
        let accumulate = |dst: &mut Vec<C64>, src: &[C64], times: f64| {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * times;
            }
        };

        let mut gradient = vec![zero.clone(); self.num_params];
        for (occ, snap) in self.occurrences.iter().zip(&snaps) {
            let mut s = snap.clone();
            self.insert(&mut s, *occ);
            self.apply_range(&mut s, occ.position + 1..n_gates);
            accumulate(&mut gradient[occ.param], &s, 1.0);
        }

        let hessian = with_hessian.then(|| {
            let mut h = PackedSymmetric::filled(self.num_params, zero.clone());
            for (i, (o1, snap)) in self.occurrences.iter().zip(&snaps).enumerate() {
                let mut chi = snap.clone();
                self.insert(&mut chi, *o1);

                let mut twice = chi.clone();
                self.insert(&mut twice, *o1);
                self.apply_range(&mut twice, o1.position + 1..n_gates);
                accumulate(h.get_mut(o1.param, o1.param), &twice, 1.0);

                let mut cursor = o1.position + 1;
                for o2 in &self.occurrences[i + 1..] {
                    self.apply_range(&mut chi, cursor..o2.position + 1);
                    cursor = o2.position + 1;
                    let mut s = chi.clone();
                    self.insert(&mut s, *o2);
                    self.apply_range(&mut s, o2.position + 1..n_gates);
                    let times = if o1.param == o2.param { 2.0 } else { 1.0 };
                    accumulate(h.get_mut(o1.param, o2.param), &s, times);
                }
            }
            h
        });
        (value, gradient, hessian)
    }

    /// Adjoint-sweep derivatives of `<target|U|input>` over a batch.
    fn overlap(&self, input: &[C64], target: &[C64], with_hessian: bool) -> OverlapJet {
        let (snaps, out) = self.forward(input);
        let lams = self.backward(target);
        let value = inner_slices(target, &out);

        let mut gradient = vec![C64::new(0.0, 0.0); self.num_params];
        for ((occ, snap), lam) in self.occurrences.iter().zip(&snaps).zip(&lams) {
            let mut s = snap.clone();
            self.insert(&mut s, *occ);
            gradient[occ.param] += inner_slices(lam, &s);
        }

        let hessian = with_hessian.then(|| {
            let mut h = PackedSymmetric::filled(self.num_params, C64::new(0.0, 0.0));
            let mut scratch = vec![C64::new(0.0, 0.0); input.len()];
            for (i, (o1, snap)) in self.occurrences.iter().zip(&snaps).enumerate() {
                let mut chi = snap.clone();
                self.insert(&mut chi, *o1);

                scratch.copy_from_slice(&chi);
                self.insert(&mut scratch, *o1);
                *h.get_mut(o1.param, o1.param) += inner_slices(&lams[i], &scratch);

                let mut cursor = o1.position + 1;
                for (o2, lam) in self.occurrences[i + 1..].iter().zip(&lams[i + 1..]) {
                    self.apply_range(&mut chi, cursor..o2.position + 1);
                    cursor = o2.position + 1;
                    scratch.copy_from_slice(&chi);
                    self.insert(&mut scratch, *o2);
                    let times = if o1.param == o2.param { 2.0 } else { 1.0 };
                    *h.get_mut(o1.param, o2.param) += inner_slices(lam, &scratch) * times;
                }
            }
            h
        });
        OverlapJet { value, gradient, hessian }
    }
}

fn check_state(circuit: &Circuit, state: &StateVector, what: &str) -> Result<()> {
    ensure!(
        state.num_qubits() == circuit.num_qubits(),
        Argument,
        "{what} has {} qubits but the circuit has {}",
        state.num_qubits(),
        circuit.num_qubits()
    );
    Ok(())
}

fn wrap_state(q: usize, amps: Vec<C64>) -> StateVector {
    debug_assert_eq!(amps.len(), 1 << q);
    StateVector::from_amplitudes(amps).expect("power-of-two length")
}

/// Output state and its first (and optionally second) derivatives.
pub fn state_jet(circuit: &Circuit, params: &[f64], input: &StateVector, with_hessian: bool) -> Result<StateJet> {
    check_state(circuit, input, "input")?;
    let sweep = Sweep::new(circuit, params)?;
    let q = circuit.num_qubits();
    let (value, gradient, hessian) = sweep.insertion(input.amplitudes(), with_hessian);
    Ok(StateJet {
        value: wrap_state(q, value),
        gradient: gradient.into_iter().map(|g| wrap_state(q, g)).collect(),
        hessian: hessian.map(|h| PackedSymmetric {
            n: h.n,
            data: h.data.into_iter().map(|s| wrap_state(q, s)).collect(),
        }),
    })
}

/// `d psi / d theta_k` for every parameter.
pub fn state_gradient(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<Vec<StateVector>> {
    Ok(state_jet(circuit, params, input, false)?.gradient)
}

/// `d^2 psi / d theta_j d theta_k`.
pub fn state_hessian(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<PackedSymmetric<StateVector>> {
    Ok(state_jet(circuit, params, input, true)?.hessian.expect("requested"))
}

/// Circuit matrix and its derivatives. Column `j` of each derivative is the
/// state derivative for input `|j>`.
pub fn unitary_jet(circuit: &Circuit, params: &[f64], with_hessian: bool) -> Result<UnitaryJet> {
    let sweep = Sweep::new(circuit, params)?;
    let q = circuit.num_qubits();
    let identity = UnitaryMatrix::identity(q)?;
    let (value, gradient, hessian) = sweep.insertion(identity.entries(), with_hessian);
    let wrap = |e| UnitaryMatrix::from_column_major(q, e);
    Ok(UnitaryJet {
        value: wrap(value),
        gradient: gradient.into_iter().map(wrap).collect(),
        hessian: hessian.map(|h| PackedSymmetric { n: h.n, data: h.data.into_iter().map(wrap).collect() }),
    })
}

/// Derivatives of `<target|U(theta)|input>`.
pub fn state_overlap_jet(
    circuit: &Circuit,
    params: &[f64],
    input: &StateVector,
    target: &StateVector,
    with_hessian: bool,
) -> Result<OverlapJet> {
    check_state(circuit, input, "input")?;
    check_state(circuit, target, "target")?;
    let sweep = Sweep::new(circuit, params)?;
    Ok(sweep.overlap(input.amplitudes(), target.amplitudes(), with_hessian))
}

/// Derivatives of the unnormalized Frobenius overlap `sum_ij conj(A_ij) U_ij(theta)`.
pub fn unitary_overlap_jet(circuit: &Circuit, params: &[f64], target: &UnitaryMatrix, with_hessian: bool) -> Result<OverlapJet> {
    ensure!(
        target.num_qubits() == circuit.num_qubits(),
        Argument,
        "target matrix has {} qubits but the circuit has {}",
        target.num_qubits(),
        circuit.num_qubits()
    );
    let sweep = Sweep::new(circuit, params)?;
    let identity = UnitaryMatrix::identity(circuit.num_qubits())?;
    Ok(sweep.overlap(identity.entries(), target.entries(), with_hessian))
}

/// Central-difference gradient `(f(x + h e_k) - f(x - h e_k)) / 2h`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    ensure!(h > 0.0, Argument, "finite-difference step must be positive, got {h}");
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect())
}

/// Central-difference Hessian. Diagonal entries use the three-point stencil,
/// off-diagonal entries the four-point mixed stencil.
pub fn fd_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    ensure!(h > 0.0, Argument, "finite-difference step must be positive, got {h}");
    let n = x.len();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let mut eval = |shifts: &[(usize, f64)]| {
        for &(i, s) in shifts {
            probe[i] += s;
        }
        let v = f(&probe);
        probe.copy_from_slice(x);
        v
    };
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        out[(j, j)] = (eval(&[(j, h)]) - 2.0 * f0 + eval(&[(j, -h)])) / (h * h);
        for k in j + 1..n {
            let v = (eval(&[(j, h), (k, h)]) - eval(&[(j, h), (k, -h)]) - eval(&[(j, -h), (k, h)])
                + eval(&[(j, -h), (k, -h)]))
                / (4.0 * h * h);
            out[(j, k)] = v;
            out[(k, j)] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{CircuitTemplate, EntanglerPattern};
    use crate::sim::{Angle, Gate};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_dev(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// Central differences of the output state, amplitude by amplitude.
    fn fd_state(circuit: &Circuit, params: &[f64], input: &StateVector, k: usize, h: f64) -> Vec<C64> {
        let mut p = params.to_vec();
        p[k] += h;
        let up = circuit.run(&p, input).unwrap();
        p[k] -= 2.0 * h;
        let down = circuit.run(&p, input).unwrap();
        up.amplitudes().iter().zip(down.amplitudes()).map(|(u, d)| (u - d) / (2.0 * h)).collect()
    }

    fn fd_state_mixed(circuit: &Circuit, params: &[f64], input: &StateVector, j: usize, k: usize, h: f64) -> Vec<C64> {
        let run = |dj: f64, dk: f64| {
            let mut p = params.to_vec();
            p[j] += dj;
            p[k] += dk;
            circuit.run(&p, input).unwrap().into_amplitudes()
        };
        if j == k {
            let (up, mid, down) = (run(h, 0.0), run(0.0, 0.0), run(-h, 0.0));
            return (0..up.len()).map(|i| (up[i] - 2.0 * mid[i] + down[i]) / (h * h)).collect();
        }
        let (pp, pm, mp, mm) = (run(h, h), run(h, -h), run(-h, h), run(-h, -h));
        (0..pp.len()).map(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h)).collect()
    }

    #[test]
    fn single_ry_gradient() {
        let circuit = Circuit::new(1, vec![Gate::Ry { qubit: 0, angle: Angle::Param(0) }]).unwrap();
        let jet = state_jet(&circuit, &[FRAC_PI_2], &StateVector::zero(1).unwrap(), true).unwrap();
        let g = jet.gradient[0].amplitudes();
        assert!((g[0] - c(-SQRT_2 / 4.0, 0.0)).norm() < 1e-15);
        assert!((g[1] - c(SQRT_2 / 4.0, 0.0)).norm() < 1e-15);
        assert!((-FRAC_PI_4.sin() / 2.0 + SQRT_2 / 4.0).abs() < 1e-16);
        let h = jet.hessian.unwrap();
        let expected: Vec<_> = jet.value.amplitudes().iter().map(|a| -a / 4.0).collect();
        assert!(max_dev(h.get(0, 0).amplitudes(), &expected) < 1e-15);
    }

    #[test]
    fn rz_gradient_on_vacuum() {
        let theta = 0.9;
        let circuit = Circuit::new(1, vec![Gate::Rz { qubit: 0, angle: Angle::Param(0) }]).unwrap();
        let g = &state_gradient(&circuit, &[theta], &StateVector::zero(1).unwrap()).unwrap()[0];
        let expected = c(0.0, -0.5) * C64::from_polar(1.0, -theta / 2.0);
        assert!((g.amplitudes()[0] - expected).norm() < 1e-15);
        assert!((g.norm_sqr().sqrt() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn commuting_rz_mixed_derivative() {
        let (a, b) = (0.4, -1.3);
        let circuit = Circuit::new(
            2,
            vec![
                Gate::Ry { qubit: 0, angle: Angle::Fixed(0.7) },
                Gate::Ry { qubit: 1, angle: Angle::Fixed(1.1) },
                Gate::Rz { qubit: 0, angle: Angle::Param(0) },
                Gate::Rz { qubit: 1, angle: Angle::Param(1) },
            ],
        )
        .unwrap();
        let input = StateVector::zero(2).unwrap();
        let h = state_hessian(&circuit, &[a, b], &input).unwrap();
        // product rule: the output is a tensor product so the mixed derivative
        // multiplies each amplitude by (-i s0 / 2)(-i s1 / 2) with s = +/-1
        let psi = circuit.run(&[a, b], &input).unwrap();
        let expected: Vec<_> = (0..4)
            .map(|k| {
                let s0 = if k & 2 == 0 { 1.0 } else { -1.0 };
                let s1 = if k & 1 == 0 { 1.0 } else { -1.0 };
                psi.amplitudes()[k] * c(0.0, -0.5 * s0) * c(0.0, -0.5 * s1)
            })
            .collect();
        assert!(max_dev(h.get(0, 1).amplitudes(), &expected) < 1e-12);
        assert_eq!(h.get(0, 1), h.get(1, 0));
    }

    #[test]
    fn identity_circuit_gradient_matches_fd() {
        let t = CircuitTemplate::new(3, 2, EntanglerPattern::ChainEveryLayer).unwrap();
        let circuit = t.circuit();
        let params = t.zero_params();
        let input = StateVector::zero(3).unwrap();
        let grads = state_gradient(&circuit, &params, &input).unwrap();
        for (k, g) in grads.iter().enumerate() {
            let fd = fd_state(&circuit, &params, &input, k, 1e-5);
            assert!(max_dev(g.amplitudes(), &fd) < 1e-9, "parameter {k}");
        }
    }

    #[test]
    fn four_qubit_hessian_states_match_fd() {
        let t = CircuitTemplate::new(4, 2, EntanglerPattern::ChainEveryLayer).unwrap();
        let circuit = t.circuit();
        let params = t.random_init(3);
        let input = StateVector::zero(4).unwrap();
        let h = state_hessian(&circuit, &params, &input).unwrap();
        let mut worst = 0.0f64;
        for j in 0..params.len() {
            for k in j..params.len() {
                let fd = fd_state_mixed(&circuit, &params, &input, j, k, 1e-4);
                worst = worst.max(max_dev(h.get(j, k).amplitudes(), &fd));
            }
        }
        assert!(worst < 1e-6, "worst deviation {worst}");
    }

    #[test]
    fn gradient_states_are_bounded_and_tangent() {
        let t = CircuitTemplate::new(3, 3, EntanglerPattern::ChainBetweenLayers).unwrap();
        let circuit = t.circuit();
        let params = t.random_init(5);
        let jet = state_jet(&circuit, &params, &StateVector::zero(3).unwrap(), false).unwrap();
        for g in &jet.gradient {
            assert!(g.norm_sqr().sqrt() <= 0.5 + 1e-12);
            assert!(jet.value.inner(g).unwrap().re.abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_gradient_columns_match_state_gradient() {
        let t = CircuitTemplate::new(2, 2, EntanglerPattern::ChainEveryLayer).unwrap();
        let circuit = t.circuit();
        let params = t.random_init(9);
        let jet = unitary_jet(&circuit, &params, true).unwrap();
        for j in 0..4 {
            let s = state_jet(&circuit, &params, &StateVector::basis(2, j).unwrap(), true).unwrap();
            for k in 0..params.len() {
                assert!(max_dev(jet.gradient[k].column(j).amplitudes(), s.gradient[k].amplitudes()) < 1e-14);
            }
            let (hu, hs) = (jet.hessian.as_ref().unwrap(), s.hessian.unwrap());
            assert!(max_dev(hu.get(3, 7).column(j).amplitudes(), hs.get(3, 7).amplitudes()) < 1e-14);
        }
    }

    #[test]
    fn rz_only_unitary_derivative_magnitudes() {
        let circuit = Circuit::new(
            2,
            vec![Gate::Rz { qubit: 0, angle: Angle::Param(0) }, Gate::Rz { qubit: 1, angle: Angle::Param(1) }],
        )
        .unwrap();
        let jet = unitary_jet(&circuit, &[0.0, 0.0], false).unwrap();
        for g in &jet.gradient {
            for j in 0..4 {
                assert!((g.get(j, j).norm() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unitary_derivative_keeps_unitarity() {
        let t = CircuitTemplate::new(3, 2, EntanglerPattern::ChainEveryLayer).unwrap();
        let params = t.random_init(21);
        let jet = unitary_jet(&t.circuit(), &params, false).unwrap();
        let b = &jet.value;
        for db in &jet.gradient {
            // dB^dagger B + B^dagger dB = 0
            let s1 = db.adjoint().matmul(b).unwrap();
            let s2 = b.adjoint().matmul(db).unwrap();
            let worst = s1.entries().iter().zip(s2.entries()).map(|(x, y)| (x + y).norm()).fold(0.0, f64::max);
            assert!(worst < 1e-10);
        }
    }

    #[test]
    fn adjoint_overlap_agrees_with_insertion() {
        let t = CircuitTemplate::new(3, 3, EntanglerPattern::ChainEveryLayer).unwrap();
        let circuit = t.circuit();
        let params = t.random_init(13);
        let input = StateVector::basis(3, 2).unwrap();
        let target = crate::sim::w_state(3).unwrap();
        let jet = state_jet(&circuit, &params, &input, true).unwrap();
        let ov = state_overlap_jet(&circuit, &params, &input, &target, true).unwrap();
        assert!((ov.value - target.inner(&jet.value).unwrap()).norm() < 1e-12);
        let hj = jet.hessian.unwrap();
        let ho = ov.hessian.unwrap();
        for j in 0..params.len() {
            assert!((ov.gradient[j] - target.inner(&jet.gradient[j]).unwrap()).norm() < 1e-12);
            for k in j..params.len() {
                assert!((ho.get(j, k) - target.inner(hj.get(j, k)).unwrap()).norm() < 1e-12);
            }
        }

        let a = crate::sim::qft_unitary(3).unwrap();
        let uj = unitary_jet(&circuit, &params, true).unwrap();
        let uo = unitary_overlap_jet(&circuit, &params, &a, true).unwrap();
        assert!((uo.value - a.inner(&uj.value).unwrap()).norm() < 1e-12);
        let uh = uj.hessian.unwrap();
        for j in 0..params.len() {
            assert!((uo.gradient[j] - a.inner(&uj.gradient[j]).unwrap()).norm() < 1e-12);
            for k in j..params.len() {
                assert!((uo.hessian.as_ref().unwrap().get(j, k) - a.inner(uh.get(j, k)).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn shared_parameter_sums_over_gates() {
        // R_y(t) R_y(t) = R_y(2t)
        let shared = Circuit::new(
            1,
            vec![Gate::Ry { qubit: 0, angle: Angle::Param(0) }, Gate::Ry { qubit: 0, angle: Angle::Param(0) }],
        )
        .unwrap();
        let single = Circuit::new(1, vec![Gate::Ry { qubit: 0, angle: Angle::Param(0) }]).unwrap();
        let input = StateVector::zero(1).unwrap();
        let t = 0.3;
        let js = state_jet(&shared, &[t], &input, true).unwrap();
        let j1 = state_jet(&single, &[2.0 * t], &input, true).unwrap();
        let g1: Vec<_> = j1.gradient[0].amplitudes().iter().map(|a| a * 2.0).collect();
        assert!(max_dev(js.gradient[0].amplitudes(), &g1) < 1e-15);
        let h1: Vec<_> = j1.hessian.unwrap().get(0, 0).amplitudes().iter().map(|a| a * 4.0).collect();
        assert!(max_dev(js.hessian.unwrap().get(0, 0).amplitudes(), &h1) < 1e-15);
    }

    #[test]
    fn unused_parameters_have_zero_derivative() {
        let circuit = Circuit::new(1, vec![Gate::Ry { qubit: 0, angle: Angle::Param(1) }]).unwrap();
        let jet = state_jet(&circuit, &[0.5, 0.2, -0.1], &StateVector::zero(1).unwrap(), true).unwrap();
        assert_eq!(jet.gradient.len(), 3);
        assert_eq!(jet.gradient[0].norm_sqr(), 0.0);
        assert_eq!(jet.hessian.unwrap().get(0, 2).norm_sqr(), 0.0);
    }

    #[test]
    fn fd_oracles() {
        let g = fd_gradient(|x| x[0] * x[0], &[1.0], 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-9);
        assert_eq!(fd_gradient(|_| 3.0, &[1.0, 2.0], 1e-5).unwrap(), vec![0.0, 0.0]);
        assert!(fd_gradient(|_| 0.0, &[1.0], 0.0).is_err());
        let h = fd_hessian(|x| x[0] * x[0] * x[1] + 3.0 * x[1] * x[1], &[1.0, 2.0], 1e-4).unwrap();
        assert!((h[(0, 0)] - 4.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 2.0).abs() < 1e-6);
        assert!((h[(1, 1)] - 6.0).abs() < 1e-6);
    }

    #[test]
    fn packed_symmetric_layout() {
        let mut p = PackedSymmetric::filled(4, 0usize);
        let mut n = 0;
        for j in 0..4 {
            for k in j..4 {
                *p.get_mut(j, k) = n;
                n += 1;
            }
        }
        assert_eq!(p.data, (0..10).collect::<Vec<_>>());
        assert_eq!(p.get(3, 1), p.get(1, 3));
    }
}
