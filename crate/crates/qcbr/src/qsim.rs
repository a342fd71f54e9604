//! Dense statevector simulator.
//!
//! Exactly the primitives the classifier and VQE consume: a handful of
//! parametric gates, basis fidelities, diagonal expectations and seeded
//! sampling. Qubit 0 is the least-significant bit of a basis index;
//! bitstrings print most-significant-first.

use crate::error::{QcbrError, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Practical bound for the dense representation (16 MiB of amplitudes).
pub const MAX_QUBITS: usize = 22;

/// Parametric gate kinds. Rotations use the half-angle convention
/// RX(θ)=exp(−iθX/2); CRZ applies the phase e^{iθ} on |11⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    Rx { target: usize, angle: f64 },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    Crz { control: usize, target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

impl GateOp {
    fn indices(&self) -> (usize, Option<usize>) {
        match *self {
            GateOp::Rx { target, .. } | GateOp::Ry { target, .. } | GateOp::Rz { target, .. } => {
                (target, None)
            }
            GateOp::Crz { control, target, .. }
            | GateOp::Cnot { control, target }
            | GateOp::Cz { control, target } => (target, Some(control)),
        }
    }
}

/// Pure state over `num_qubits` qubits as 2^n complex amplitudes.
#[derive(Debug, Clone)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits < 1 {
            return Err(QcbrError::invalid("num_qubits must be >= 1"));
        }
        if num_qubits > MAX_QUBITS {
            return Err(QcbrError::Capacity(format!(
                "{num_qubits} qubits exceeds the dense bound of {MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_gate(&self, gate: &GateOp) -> Result<()> {
        let (target, control) = gate.indices();
        if target >= self.num_qubits {
            return Err(QcbrError::invalid(format!(
                "target qubit {target} out of range for {} qubits",
                self.num_qubits
            )));
        }
        if let Some(c) = control {
            if c >= self.num_qubits {
                return Err(QcbrError::invalid(format!(
                    "control qubit {c} out of range for {} qubits",
                    self.num_qubits
                )));
            }
            if c == target {
                return Err(QcbrError::invalid("control equals target"));
            }
        }
        Ok(())
    }

    /// Apply one gate in place.
    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<()> {
        self.check_gate(gate)?;
        match *gate {
            GateOp::Rx { target, angle } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                let m = [
                    Complex64::new(c, 0.0),
                    Complex64::new(0.0, -s),
                    Complex64::new(0.0, -s),
                    Complex64::new(c, 0.0),
                ];
                self.apply_1q(target, &m);
            }
            GateOp::Ry { target, angle } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                let m = [
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ];
                self.apply_1q(target, &m);
            }
            GateOp::Rz { target, angle } => {
                let p0 = Complex64::from_polar(1.0, -angle / 2.0);
                let p1 = Complex64::from_polar(1.0, angle / 2.0);
                let mask = 1usize << target;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { p0 } else { p1 };
                }
            }
            GateOp::Crz { control, target, angle } => {
                let phase = Complex64::from_polar(1.0, angle);
                let both = (1usize << control) | (1usize << target);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a *= phase;
                    }
                }
            }
            GateOp::Cnot { control, target } => {
                let cmask = 1usize << control;
                let tmask = 1usize << target;
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
            GateOp::Cz { control, target } => {
                let both = (1usize << control) | (1usize << target);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & both == both {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    /// Apply an arbitrary single-qubit matrix [m00, m01, m10, m11].
    pub(crate) fn apply_1q(&mut self, target: usize, m: &[Complex64; 4]) {
        let mask = 1usize << target;
        for i0 in 0..self.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a0 = self.amps[i0];
            let a1 = self.amps[i1];
            self.amps[i0] = m[0] * a0 + m[1] * a1;
            self.amps[i1] = m[2] * a0 + m[3] * a1;
        }
    }

    /// |⟨basis_index|ψ⟩|².
    pub fn basis_fidelity(&self, basis_index: usize) -> Result<f64> {
        self.amps
            .get(basis_index)
            .map(|a| a.norm_sqr())
            .ok_or_else(|| {
                QcbrError::invalid(format!(
                    "basis index {basis_index} out of range for dimension {}",
                    self.amps.len()
                ))
            })
    }

    /// Σ_b |a_b|²·E_b for a diagonal observable given as its energy table.
    pub fn diagonal_expectation(&self, energies: &[f64]) -> Result<f64> {
        if energies.len() != self.amps.len() {
            return Err(QcbrError::invalid(format!(
                "energy table length {} does not match dimension {}",
                energies.len(),
                self.amps.len()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(energies)
            .map(|(a, e)| a.norm_sqr() * e)
            .sum())
    }

    /// Index of the highest-probability basis state.
    pub fn argmax_basis(&self) -> usize {
        let mut best = 0usize;
        let mut best_p = -1.0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > best_p {
                best_p = p;
                best = i;
            }
        }
        best
    }

    /// Seeded measurement sampling; counts sum to `shots`. Keys print the
    /// most significant qubit first.
    pub fn sample_bitstrings(&self, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>> {
        if shots < 1 {
            return Err(QcbrError::invalid("shots must be >= 1"));
        }
        let indices = self.sample_indices(shots, seed);
        let mut counts = BTreeMap::new();
        for idx in indices {
            *counts
                .entry(format!("{idx:0width$b}", width = self.num_qubits))
                .or_insert(0u64) += 1;
        }
        Ok(counts)
    }

    /// Raw basis-index samples backing `sample_bitstrings`.
    pub fn sample_indices(&self, shots: u64, seed: u64) -> Vec<usize> {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shots)
            .map(|_| {
                let u: f64 = rng.gen::<f64>() * total;
                match cumulative.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
                    Ok(i) | Err(i) => i.min(self.amps.len() - 1),
                }
            })
            .collect()
    }
}

/// Parse a most-significant-first bitstring into a basis index.
pub fn bitstring_to_index(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(QcbrError::Parse(format!("bad bitstring length {}", bits.len())));
    }
    usize::from_str_radix(bits, 2).map_err(|e| QcbrError::Parse(e.to_string()))
}

/// Bit value of `qubit` within a basis index (qubit 0 = LSB).
pub fn index_bit(index: usize, qubit: usize) -> u8 {
    ((index >> qubit) & 1) as u8
}
