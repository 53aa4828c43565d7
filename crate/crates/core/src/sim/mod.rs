//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of the amplitude index. Rotations are
//! `R_P(θ) = exp(−iθP/2)`; `CRX` applies `RX` to the target when the control
//! is 1. Post-selection projects onto `|0⟩` without renormalizing, so the
//! squared norm left at the end is the post-selection probability.

mod oracle;

pub use oracle::{oracle_contract, oracle_probabilities, DEFAULT_ORACLE_CAP};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_complex::Complex64;

use crate::circuit::{BoundCircuit, Gate, GateKind, Op};
use crate::math;
use crate::multimodal::PredictionDistribution;

/// Default threshold below which a post-selection counts as impossible.
pub const DEFAULT_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("post-selection has squared norm {norm:e}, below {eps:e}")]
    NullPostSelection { norm: f64, eps: f64 },
    #[error("expected one measured qubit, circuit has {0}")]
    NotSingleOutput(usize),
    #[error("circuit has {n} qubits, over the oracle cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// Result of measuring the output qubit after post-selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub distribution: PredictionDistribution,
    /// Squared norm that survived every post-selection.
    pub post_selected_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Wraps raw amplitudes; `None` unless the length is a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Option<Self> {
        if !amps.len().is_power_of_two() {
            return None;
        }
        Some(StateVector {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    /// Applies a bound gate in place.
    pub fn apply(&mut self, g: &Gate<f64>) {
        let theta = g.angle.unwrap_or(0.0);
        let m = single_qubit_matrix(g.kind, theta);
        match *g.targets() {
            [q] => self.apply_1q(self.mask(q), 0, &m),
            [c, t] => {
                let cm = self.mask(c);
                self.apply_1q(self.mask(t), cm, &m)
            }
            _ => unreachable!("gates act on one or two qubits"),
        }
    }

    /// Applies `m` to the qubit at `bit` on every basis state whose `control`
    /// bits are all set.
    fn apply_1q(&mut self, bit: usize, control: usize, m: &[Complex64; 4]) {
        for i in 0..self.amps.len() {
            if i & bit != 0 || i & control != control {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = m[0] * a0 + m[1] * a1;
            self.amps[j] = m[2] * a0 + m[3] * a1;
        }
    }

    /// Projects qubit `q` onto `|0⟩` (no renormalization).
    pub fn post_select(&mut self, q: usize) {
        let bit = self.mask(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// `index,re,im` lines with a header, for inspecting final amplitudes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(out, "{i},{},{}", a.re, a.im);
        }
        out
    }
}

/// Row-major matrix of a gate. Two-qubit gates use the basis
/// `|control target⟩` with the control as the high bit.
pub fn gate_matrix(kind: GateKind, theta: f64) -> Vec<Complex64> {
    let m = single_qubit_matrix(kind, theta);
    if kind.arity() == 1 {
        return m.to_vec();
    }
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    alloc::vec![
        one, zero, zero, zero, //
        zero, one, zero, zero, //
        zero, zero, m[0], m[1], //
        zero, zero, m[2], m[3],
    ]
}

/// The one-qubit matrix of a gate; for controlled gates, the matrix applied
/// to the target.
fn single_qubit_matrix(kind: GateKind, theta: f64) -> [Complex64; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let (cos, sin) = (math::cos(theta / 2.0), math::sin(theta / 2.0));
    let h = core::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::X | GateKind::Cnot => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        GateKind::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        GateKind::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        GateKind::H => [c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)],
        GateKind::Rx | GateKind::Crx => [c(cos, 0.), c(0., -sin), c(0., -sin), c(cos, 0.)],
        GateKind::Ry => [c(cos, 0.), c(-sin, 0.), c(sin, 0.), c(cos, 0.)],
        GateKind::Rz => [c(cos, -sin), c(0., 0.), c(0., 0.), c(cos, sin)],
    }
}

/// Returns `state` with `g` applied.
pub fn apply_gate(state: &StateVector, g: &Gate<f64>) -> StateVector {
    let mut out = state.clone();
    out.apply(g);
    out
}

/// Runs every operation, post-selections included, from `|0…0⟩`.
pub fn run(c: &BoundCircuit) -> StateVector {
    let mut state = StateVector::zero(c.n_qubits);
    for op in &c.ops {
        match op {
            Op::Gate(g) => state.apply(g),
            Op::PostSelect(q) => state.post_select(*q),
        }
    }
    state
}

/// Joint distribution of `outputs` (first output = high bit of the pattern
/// index), renormalized over what survived post-selection, and the surviving
/// squared norm.
pub fn probabilities(
    state: &StateVector,
    outputs: &[usize],
    eps: f64,
) -> Result<(Vec<f64>, f64), SimError> {
    let mut probs = alloc::vec![0.0; 1 << outputs.len()];
    let masks: Vec<usize> = outputs.iter().map(|&q| state.mask(q)).collect();
    for (i, a) in state.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let pattern = masks
            .iter()
            .fold(0, |acc, &m| (acc << 1) | usize::from(i & m != 0));
        probs[pattern] += p;
    }
    let norm: f64 = probs.iter().sum();
    if !(norm >= eps) {
        return Err(SimError::NullPostSelection { norm, eps });
    }
    for p in &mut probs {
        *p /= norm;
    }
    Ok((probs, norm))
}

/// Measures the single output qubit of `c` on `state` (the result of
/// [`run`]).
pub fn post_select_and_measure(
    state: &StateVector,
    c: &BoundCircuit,
    eps: f64,
) -> Result<Outcome, SimError> {
    if c.outputs.len() != 1 {
        return Err(SimError::NotSingleOutput(c.outputs.len()));
    }
    let (probs, norm) = probabilities(state, &c.outputs, eps)?;
    Ok(Outcome {
        distribution: PredictionDistribution::from_weights(probs[0], probs[1]),
        post_selected_norm: norm,
    })
}

/// `run` followed by `post_select_and_measure` with the default threshold.
pub fn evaluate(c: &BoundCircuit) -> Result<Outcome, SimError> {
    post_select_and_measure(&run(c), c, DEFAULT_EPS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn g(kind: GateKind, qs: &[usize], theta: Option<f64>) -> Gate<f64> {
        Gate::new(kind, qs, theta)
    }

    fn circuit(n: usize, ops: Vec<Op<f64>>, outputs: Vec<usize>) -> BoundCircuit {
        BoundCircuit {
            n_qubits: n,
            ops,
            outputs,
        }
    }

    #[test]
    fn x_flips_and_cnot_targets_low_qubit() {
        let s = apply_gate(&StateVector::zero(1), &g(GateKind::X, &[0], None));
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        let mut s = StateVector::zero(2);
        s.apply(&g(GateKind::X, &[0], None));
        s.apply(&g(GateKind::Cnot, &[0, 1], None));
        assert_eq!(s.amplitudes()[3], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn bell_state_post_selection() {
        let c = circuit(
            2,
            alloc::vec![
                Op::Gate(g(GateKind::H, &[0], None)),
                Op::Gate(g(GateKind::Cnot, &[0, 1], None)),
                Op::PostSelect(1),
            ],
            alloc::vec![0],
        );
        let out = evaluate(&c).unwrap();
        assert!((out.post_selected_norm - 0.5).abs() < 1e-12);
        assert!((out.distribution.p_first - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_state_is_even() {
        let c = circuit(1, alloc::vec![Op::Gate(g(GateKind::H, &[0], None))], alloc::vec![0]);
        let out = evaluate(&c).unwrap();
        assert!((out.distribution.p_first - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_post_selection_is_null() {
        let c = circuit(
            2,
            alloc::vec![Op::Gate(g(GateKind::X, &[1], None)), Op::PostSelect(1)],
            alloc::vec![0],
        );
        assert!(matches!(
            evaluate(&c),
            Err(SimError::NullPostSelection { .. })
        ));
    }

    #[test]
    fn ry_pi_maps_zero_to_one() {
        let s = apply_gate(
            &StateVector::zero(1),
            &g(GateKind::Ry, &[0], Some(core::f64::consts::PI)),
        );
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_csv_has_header_and_rows() {
        let csv = StateVector::zero(1).to_csv();
        assert_eq!(csv, "index,re,im\n0,1,0\n1,0,0\n");
    }
}
