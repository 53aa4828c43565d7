//! Independent evaluation by bra propagation.
//!
//! Shares nothing with the statevector path: gate matrices are assembled from
//! Pauli algebra and Kronecker products, and each amplitude `⟨x|M|0…0⟩` is
//! computed by pulling the bra `⟨x|` backwards through the circuit, one
//! permute–reshape–contract step per operation.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Outcome, SimError, DEFAULT_EPS};
use crate::circuit::{BoundCircuit, GateKind, Op};
use crate::math;
use crate::multimodal::PredictionDistribution;

pub const DEFAULT_ORACLE_CAP: usize = 12;

/// Square matrix, row-major.
#[derive(Clone, Debug)]
struct Mat {
    dim: usize,
    data: Vec<Complex64>,
}

impl Mat {
    fn from_real(dim: usize, entries: &[f64]) -> Mat {
        Mat {
            dim,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    fn identity(dim: usize) -> Mat {
        let mut m = Mat {
            dim,
            data: alloc::vec![Complex64::new(0.0, 0.0); dim * dim],
        };
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    fn scale(&self, s: Complex64) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    fn add(&self, other: &Mat) -> Mat {
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    fn kron(&self, other: &Mat) -> Mat {
        let d = self.dim * other.dim;
        let mut data = alloc::vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.data[i * self.dim + j];
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        data[(i * other.dim + k) * d + j * other.dim + l] =
                            a * other.data[k * other.dim + l];
                    }
                }
            }
        }
        Mat { dim: d, data }
    }
}

fn pauli_x() -> Mat {
    Mat::from_real(2, &[0., 1., 1., 0.])
}

fn pauli_y() -> Mat {
    Mat {
        dim: 2,
        data: alloc::vec![
            Complex64::new(0., 0.),
            Complex64::new(0., -1.),
            Complex64::new(0., 1.),
            Complex64::new(0., 0.),
        ],
    }
}

fn pauli_z() -> Mat {
    Mat::from_real(2, &[1., 0., 0., -1.])
}

/// `exp(−iθP/2) = cos(θ/2)·I − i·sin(θ/2)·P` for a Pauli `P`.
fn rotation(p: &Mat, theta: f64) -> Mat {
    Mat::identity(2)
        .scale(Complex64::new(math::cos(theta / 2.0), 0.0))
        .add(&p.scale(Complex64::new(0.0, -math::sin(theta / 2.0))))
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U`.
fn controlled(u: &Mat) -> Mat {
    let half = Complex64::new(0.5, 0.0);
    let p0 = Mat::identity(2).add(&pauli_z()).scale(half);
    let p1 = Mat::identity(2).add(&pauli_z().scale(Complex64::new(-1.0, 0.0))).scale(half);
    p0.kron(&Mat::identity(2)).add(&p1.kron(u))
}

fn matrix(kind: GateKind, theta: f64) -> Mat {
    match kind {
        GateKind::X => pauli_x(),
        GateKind::Y => pauli_y(),
        GateKind::Z => pauli_z(),
        GateKind::H => pauli_x()
            .add(&pauli_z())
            .scale(Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0)),
        GateKind::Cnot => controlled(&pauli_x()),
        GateKind::Rx => rotation(&pauli_x(), theta),
        GateKind::Ry => rotation(&pauli_y(), theta),
        GateKind::Rz => rotation(&pauli_z(), theta),
        GateKind::Crx => controlled(&rotation(&pauli_x(), theta)),
    }
}

fn projector_zero() -> Mat {
    Mat::identity(2)
        .add(&pauli_z())
        .scale(Complex64::new(0.5, 0.0))
}

/// Reorders the axes of a rank-`n` tensor of shape `2×…×2` (axis 0 is the
/// slowest index): axis `k` of the result is axis `perm[k]` of the input.
fn permute(t: &[Complex64], n: usize, perm: &[usize]) -> Vec<Complex64> {
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); t.len()];
    for (new_idx, slot) in out.iter_mut().enumerate() {
        let mut old_idx = 0;
        for (k, &axis) in perm.iter().enumerate() {
            let bit = (new_idx >> (n - 1 - k)) & 1;
            old_idx |= bit << (n - 1 - axis);
        }
        *slot = t[old_idx];
    }
    out
}

/// `bra ← bra · G` where `G` acts on `targets`.
fn pull_back(bra: &[Complex64], n: usize, targets: &[usize], g: &Mat) -> Vec<Complex64> {
    let mut perm: Vec<usize> = targets.to_vec();
    perm.extend((0..n).filter(|q| !targets.contains(q)));
    let t = permute(bra, n, &perm);
    // view as (2^k rows) × (2^(n−k) columns)
    let rows = g.dim;
    let cols = t.len() / rows;
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); t.len()];
    for r in 0..rows {
        for s in 0..rows {
            let w = g.data[s * rows + r];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for col in 0..cols {
                out[r * cols + col] += t[s * cols + col] * w;
            }
        }
    }
    let mut inverse = alloc::vec![0; n];
    for (k, &axis) in perm.iter().enumerate() {
        inverse[axis] = k;
    }
    permute(&out, n, &inverse)
}

/// `⟨x|M|0…0⟩` for the basis state `x`.
fn amplitude(c: &BoundCircuit, ops: &[(Vec<usize>, Mat)], x: usize) -> Complex64 {
    let n = c.n_qubits;
    let mut bra = alloc::vec![Complex64::new(0.0, 0.0); 1 << n];
    bra[x] = Complex64::new(1.0, 0.0);
    for (targets, m) in ops.iter().rev() {
        bra = pull_back(&bra, n, targets, m);
    }
    bra[0]
}

/// Output-pattern distribution (first output = high bit) and surviving norm,
/// computed independently of the statevector simulator.
pub fn oracle_probabilities(
    c: &BoundCircuit,
    cap: usize,
) -> Result<(Vec<f64>, f64), SimError> {
    let n = c.n_qubits;
    if n > cap {
        return Err(SimError::CapExceeded { n, cap });
    }
    let ops: Vec<(Vec<usize>, Mat)> = c
        .ops
        .iter()
        .map(|op| match op {
            Op::Gate(g) => (g.targets().to_vec(), matrix(g.kind, g.angle.unwrap_or(0.0))),
            Op::PostSelect(q) => (alloc::vec![*q], projector_zero()),
        })
        .collect();
    // qubits that can end in |1⟩: touched, not outputs, last op not a projection
    let mut last: Vec<Option<bool>> = alloc::vec![None; n];
    for op in &c.ops {
        match op {
            Op::Gate(g) => {
                for &q in g.targets() {
                    last[q] = Some(false);
                }
            }
            Op::PostSelect(q) => last[*q] = Some(true),
        }
    }
    let free: Vec<usize> = (0..n)
        .filter(|q| last[*q] == Some(false) && !c.outputs.contains(q))
        .collect();
    let k = c.outputs.len();
    let mut probs = alloc::vec![0.0; 1 << k];
    for pattern in 0..(1usize << k) {
        for rest in 0..(1usize << free.len()) {
            let mut x = 0;
            for (i, &q) in c.outputs.iter().enumerate() {
                x |= ((pattern >> (k - 1 - i)) & 1) << (n - 1 - q);
            }
            for (i, &q) in free.iter().enumerate() {
                x |= ((rest >> i) & 1) << (n - 1 - q);
            }
            probs[pattern] += amplitude(c, &ops, x).norm_sqr();
        }
    }
    let norm: f64 = probs.iter().sum();
    if !(norm >= DEFAULT_EPS) {
        return Err(SimError::NullPostSelection {
            norm,
            eps: DEFAULT_EPS,
        });
    }
    for p in &mut probs {
        *p /= norm;
    }
    Ok((probs, norm))
}

/// The [`Outcome`] of a single-output circuit, by contraction.
pub fn oracle_contract(c: &BoundCircuit, cap: usize) -> Result<Outcome, SimError> {
    if c.outputs.len() != 1 {
        return Err(SimError::NotSingleOutput(c.outputs.len()));
    }
    let (probs, norm) = oracle_probabilities(c, cap)?;
    Ok(Outcome {
        distribution: PredictionDistribution::from_weights(probs[0], probs[1]),
        post_selected_norm: norm,
    })
}
