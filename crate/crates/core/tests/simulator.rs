//! Gate matrices, norm conservation and agreement with the contraction
//! oracle on random circuits.

use mqnlp_core::circuit::{BoundCircuit, Gate, GateKind, Op};
use mqnlp_core::sim::{self, gate_matrix, oracle_contract, oracle_probabilities, SimError, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_gate(rng: &mut ChaCha8Rng, n: usize) -> Gate<f64> {
    let kinds: Vec<GateKind> = GateKind::ALL
        .into_iter()
        .filter(|k| n >= 2 || k.arity() == 1)
        .collect();
    let kind = kinds[rng.random_range(0..kinds.len())];
    let a = rng.random_range(0..n);
    let targets = if kind.arity() == 2 {
        vec![a, (a + rng.random_range(1..n)) % n]
    } else {
        vec![a]
    };
    let angle = kind
        .is_parameterized()
        .then(|| rng.random_range(-std::f64::consts::TAU..std::f64::consts::TAU));
    Gate::new(kind, &targets, angle)
}

/// A random circuit on up to `max_qubits` qubits; when `post_select` is set,
/// about one operation in eight projects a non-output qubit.
fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, post_select: bool) -> BoundCircuit {
    let n = rng.random_range(1..=max_qubits);
    let output = rng.random_range(0..n);
    let len = rng.random_range(1..=8 * n);
    let ops = (0..len)
        .map(|_| {
            if post_select && n > 1 && rng.random_bool(0.125) {
                let q = (output + rng.random_range(1..n)) % n;
                Op::PostSelect(q)
            } else {
                Op::Gate(random_gate(rng, n))
            }
        })
        .collect();
    BoundCircuit {
        n_qubits: n,
        ops,
        outputs: vec![output],
    }
}

#[test]
fn fixed_gates_match_their_textbook_matrices_exactly() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (o, l) = (c(0., 0.), c(1., 0.));
    assert_eq!(gate_matrix(GateKind::X, 0.0), vec![o, l, l, o]);
    assert_eq!(gate_matrix(GateKind::Y, 0.0), vec![o, c(0., -1.), c(0., 1.), o]);
    assert_eq!(gate_matrix(GateKind::Z, 0.0), vec![l, o, o, c(-1., 0.)]);
    assert_eq!(gate_matrix(GateKind::H, 0.0), vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]);
    #[rustfmt::skip]
    let cnot = vec![
        l, o, o, o,
        o, l, o, o,
        o, o, o, l,
        o, o, l, o,
    ];
    assert_eq!(gate_matrix(GateKind::Cnot, 0.0), cnot);
}

#[test]
fn every_gate_kind_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in GateKind::ALL {
        for _ in 0..20 {
            let m = gate_matrix(kind, rng.random_range(-10.0..10.0));
            let d = if m.len() == 4 { 2 } else { 4 };
            for i in 0..d {
                for j in 0..d {
                    let dot: Complex64 = (0..d).map(|k| m[k * d + i].conj() * m[k * d + j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - c(want, 0.0)).norm() < 1e-12, "{kind} ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn rotations_follow_the_half_angle_convention() {
    // RY(θ)|0⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩
    for theta in [0.3, 1.0, 2.5, -1.2] {
        let s = sim::apply_gate(&StateVector::zero(1), &Gate::new(GateKind::Ry, &[0], Some(theta)));
        assert!((s.amplitudes()[0].re - (theta / 2.0).cos()).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - (theta / 2.0).sin()).abs() < 1e-15);
        // RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})
        let m = gate_matrix(GateKind::Rz, theta);
        assert!((m[0] - c(0.0, -theta / 2.0).exp()).norm() < 1e-15);
        assert!((m[3] - c(0.0, theta / 2.0).exp()).norm() < 1e-15);
    }
}

#[test]
fn qubit_zero_is_the_high_bit() {
    let s = sim::apply_gate(&StateVector::zero(3), &Gate::new(GateKind::X, &[0], None));
    assert_eq!(s.amplitudes()[0b100], c(1.0, 0.0));
    let s = sim::apply_gate(&s, &Gate::new(GateKind::Cnot, &[0, 2], None));
    assert_eq!(s.amplitudes()[0b101], c(1.0, 0.0));
}

#[test]
fn statevector_and_oracle_agree_on_random_circuits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut compared = 0;
    for _ in 0..500 {
        let circuit = random_circuit(&mut rng, 6, true);
        match (sim::evaluate(&circuit), oracle_contract(&circuit, 12)) {
            (Ok(a), Ok(b)) => {
                assert!(
                    (a.distribution.p_first - b.distribution.p_first).abs() < 1e-8,
                    "{circuit:?}"
                );
                assert!((a.post_selected_norm - b.post_selected_norm).abs() < 1e-8);
                compared += 1;
            }
            (Err(SimError::NullPostSelection { .. }), Err(SimError::NullPostSelection { .. })) => {}
            (a, b) => panic!("disagreement on {circuit:?}: {a:?} vs {b:?}"),
        }
    }
    assert!(compared > 400, "only {compared} circuits survived post-selection");
}

#[test]
fn joint_output_distributions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let mut circuit = random_circuit(&mut rng, 5, false);
        if circuit.n_qubits < 2 {
            continue;
        }
        circuit.outputs = vec![circuit.n_qubits - 1, 0];
        let (p, _) = sim::probabilities(&sim::run(&circuit), &circuit.outputs, 1e-12).unwrap();
        let (q, _) = oracle_probabilities(&circuit, 12).unwrap();
        for (x, y) in p.iter().zip(&q) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn unitary_prefixes_conserve_the_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let circuit = random_circuit(&mut rng, 8, false);
        let mut state = StateVector::zero(circuit.n_qubits);
        for op in &circuit.ops {
            let Op::Gate(g) = op else { unreachable!() };
            state.apply(g);
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn post_selecting_an_orthogonal_state_is_reported() {
    let circuit = BoundCircuit {
        n_qubits: 2,
        ops: vec![Op::Gate(Gate::new(GateKind::X, &[1], None)), Op::PostSelect(1)],
        outputs: vec![0],
    };
    assert!(matches!(sim::evaluate(&circuit), Err(SimError::NullPostSelection { .. })));
    assert!(matches!(oracle_contract(&circuit, 12), Err(SimError::NullPostSelection { .. })));
}
