//! Data re-uploading variational quantum classifier.
//!
//! Each qubit re-encodes every feature coordinate once per layer through a
//! building block RX(ω·x + θ)·RZ(θ'), optionally followed by an entangling
//! chain. Class scores are full-register basis fidelities weighted by
//! trainable per-class factors.

use crate::error::{QcbrError, Result};
use crate::optim::{self, OptimizerConfig};
use crate::qsim::{GateOp, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entanglement {
    None,
    Crz,
    Cnot,
    Cz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub num_qubits: usize,
    pub num_layers: usize,
    pub data_dim: usize,
    pub entanglement: Entanglement,
}

impl AnsatzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_layers == 0 || self.data_dim == 0 {
            return Err(QcbrError::invalid("ansatz dimensions must be positive"));
        }
        Ok(())
    }

    /// (number of rotation biases θ, number of data weights ω).
    ///
    /// Two biases and one data weight per coordinate per qubit per layer;
    /// CRZ entanglement adds one bias per chain gate per layer.
    pub fn param_count(&self) -> (usize, usize) {
        let blocks = self.num_qubits * self.num_layers * self.data_dim;
        let mut thetas = blocks * 2;
        if self.entanglement == Entanglement::Crz {
            thetas += self.chain_len() * self.num_layers;
        }
        (thetas, blocks)
    }

    fn chain_len(&self) -> usize {
        self.num_qubits.saturating_sub(1)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub config: AnsatzConfig,
    pub thetas: Vec<f64>,
    pub omegas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub num_classes: usize,
    /// class -> computational basis index used as its target state.
    pub class_basis: Vec<usize>,
    /// Per-coordinate normalization bounds learned from the training set.
    pub feat_min: Vec<f64>,
    pub feat_max: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl ClassifierModel {
    /// Zero-parameter model with identity class basis and identity
    /// normalization ([-1, 1] bounds).
    pub fn new(config: AnsatzConfig, num_classes: usize) -> Result<Self> {
        config.validate()?;
        if num_classes == 0 || num_classes > 1 << config.num_qubits {
            return Err(QcbrError::invalid(format!(
                "{num_classes} classes do not fit in {} qubits",
                config.num_qubits
            )));
        }
        let (nt, nw) = config.param_count();
        Ok(ClassifierModel {
            config,
            thetas: vec![0.0; nt],
            omegas: vec![0.0; nw],
            alphas: vec![1.0; num_classes],
            num_classes,
            class_basis: (0..num_classes).collect(),
            feat_min: vec![-1.0; config.data_dim],
            feat_max: vec![1.0; config.data_dim],
        })
    }

    /// Random U(−π, π) angles and weights, α all ones.
    pub fn random_init(config: AnsatzConfig, num_classes: usize, seed: u64) -> Result<Self> {
        let mut model = ClassifierModel::new(config, num_classes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in model.thetas.iter_mut() {
            *t = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        }
        for w in model.omegas.iter_mut() {
            *w = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        }
        Ok(model)
    }

    pub fn set_normalization_from(&mut self, dataset: &[LabeledSample]) -> Result<()> {
        let d = self.config.data_dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for s in dataset {
            if s.features.len() != d {
                return Err(QcbrError::invalid("sample dimension mismatch"));
            }
            for (k, &v) in s.features.iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        self.feat_min = lo;
        self.feat_max = hi;
        Ok(())
    }

    fn normalize(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (lo, hi) = (self.feat_min[k], self.feat_max[k]);
                if hi > lo {
                    2.0 * (v - lo) / (hi - lo) - 1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Extend the ansatz by `extra_layers` identity layers (all new angles and
    /// data weights zero), preserving the trained function exactly. Deep
    /// re-uploading circuits train poorly from a fully random start, so deeper
    /// configurations are fitted by growing a trained shallower model and
    /// fine-tuning.
    pub fn grow(&self, extra_layers: usize) -> Result<Self> {
        self.check_params()?;
        let cfg = &self.config;
        let new_cfg = AnsatzConfig { num_layers: cfg.num_layers + extra_layers, ..*cfg };
        let block = cfg.num_qubits * cfg.data_dim * 2;
        let old_block_total = block * cfg.num_layers;
        let mut thetas = Vec::with_capacity(new_cfg.param_count().0);
        thetas.extend_from_slice(&self.thetas[..old_block_total]);
        thetas.extend(std::iter::repeat(0.0).take(block * extra_layers));
        thetas.extend_from_slice(&self.thetas[old_block_total..]);
        let chain_per_layer = if cfg.entanglement == Entanglement::Crz { cfg.chain_len() } else { 0 };
        thetas.extend(std::iter::repeat(0.0).take(chain_per_layer * extra_layers));
        let mut omegas = self.omegas.clone();
        omegas.extend(std::iter::repeat(0.0).take(cfg.num_qubits * cfg.data_dim * extra_layers));
        let grown = ClassifierModel {
            config: new_cfg,
            thetas,
            omegas,
            alphas: self.alphas.clone(),
            num_classes: self.num_classes,
            class_basis: self.class_basis.clone(),
            feat_min: self.feat_min.clone(),
            feat_max: self.feat_max.clone(),
        };
        grown.check_params()?;
        Ok(grown)
    }

    fn check_params(&self) -> Result<()> {
        let (nt, nw) = self.config.param_count();
        if self.thetas.len() != nt || self.omegas.len() != nw {
            return Err(QcbrError::invalid(format!(
                "parameter vectors ({}, {}) do not match the declared layout ({nt}, {nw})",
                self.thetas.len(),
                self.omegas.len()
            )));
        }
        if self.alphas.len() != self.num_classes || self.class_basis.len() != self.num_classes {
            return Err(QcbrError::invalid("class vectors do not match num_classes"));
        }
        Ok(())
    }

    /// |0…0⟩ through L layers of re-uploading blocks plus the entangling chain.
    pub fn encode(&self, features: &[f64]) -> Result<StateVector> {
        self.check_params()?;
        let cfg = &self.config;
        if features.len() != cfg.data_dim {
            return Err(QcbrError::invalid(format!(
                "feature dimension {} != {}",
                features.len(),
                cfg.data_dim
            )));
        }
        let x = self.normalize(features);
        let mut state = StateVector::new(cfg.num_qubits)?;
        let mut theta_idx = 0usize;
        let mut omega_idx = 0usize;
        let chain_theta_base = cfg.num_qubits * cfg.num_layers * cfg.data_dim * 2;
        for layer in 0..cfg.num_layers {
            for qubit in 0..cfg.num_qubits {
                // Fold this qubit's run of RX(ω·x+θa)·RZ(θb) pairs into a
                // single 2×2 unitary before touching the state: the same
                // circuit with one state traversal instead of 2·data_dim.
                let mut m = [
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                ];
                for k in 0..cfg.data_dim {
                    let omega = self.omegas[omega_idx];
                    omega_idx += 1;
                    let bias = self.thetas[theta_idx];
                    let phase = self.thetas[theta_idx + 1];
                    theta_idx += 2;
                    let (sx, cx) = ((omega * x[k] + bias) / 2.0).sin_cos();
                    let rx = Complex64::new(cx, 0.0);
                    let rx_off = Complex64::new(0.0, -sx);
                    // RX then RZ, composed onto the accumulated product:
                    // m ← RZ·RX·m with RZ = diag(e^{-iθb/2}, e^{+iθb/2}).
                    let (sz, cz) = (phase / 2.0).sin_cos();
                    let p0 = Complex64::new(cz, -sz);
                    let p1 = Complex64::new(cz, sz);
                    m = [
                        p0 * (rx * m[0] + rx_off * m[2]),
                        p0 * (rx * m[1] + rx_off * m[3]),
                        p1 * (rx_off * m[0] + rx * m[2]),
                        p1 * (rx_off * m[1] + rx * m[3]),
                    ];
                }
                state.apply_1q(qubit, &m);
            }
            for i in 0..cfg.chain_len() {
                match cfg.entanglement {
                    Entanglement::None => {}
                    Entanglement::Crz => {
                        let angle = self.thetas[chain_theta_base + layer * cfg.chain_len() + i];
                        state.apply_gate(&GateOp::Crz { control: i, target: i + 1, angle })?;
                    }
                    Entanglement::Cnot => {
                        state.apply_gate(&GateOp::Cnot { control: i, target: i + 1 })?;
                    }
                    Entanglement::Cz => {
                        state.apply_gate(&GateOp::Cz { control: i, target: i + 1 })?;
                    }
                }
            }
        }
        debug_assert_eq!(theta_idx, chain_theta_base);
        debug_assert_eq!(omega_idx, self.omegas.len());
        Ok(state)
    }

    /// Per-class basis fidelities of the encoded state.
    pub fn fidelity_vector(&self, features: &[f64]) -> Result<Vec<f64>> {
        let state = self.encode(features)?;
        self.class_basis
            .iter()
            .map(|&b| state.basis_fidelity(b))
            .collect()
    }

    /// (1/2)·Σ_μ Σ_c (α_c·F_c(x_μ) − Y_c(x_μ))².
    pub fn cost(&self, dataset: &[LabeledSample]) -> Result<f64> {
        if dataset.is_empty() {
            return Err(QcbrError::invalid("empty dataset"));
        }
        let mut total = 0.0;
        for sample in dataset {
            if sample.label >= self.num_classes {
                return Err(QcbrError::invalid("label out of range"));
            }
            let fid = self.fidelity_vector(&sample.features)?;
            for (c, f) in fid.iter().enumerate() {
                let y = if c == sample.label { 1.0 } else { 0.0 };
                let r = self.alphas[c] * f - y;
                total += r * r;
            }
        }
        Ok(total / 2.0)
    }

    /// argmax_c α_c·F_c; ties break toward the lowest class index.
    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        let fid = self.fidelity_vector(features)?;
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (c, f) in fid.iter().enumerate() {
            let score = self.alphas[c] * f;
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        Ok(best)
    }

    pub fn accuracy(&self, dataset: &[LabeledSample]) -> Result<f64> {
        if dataset.is_empty() {
            return Err(QcbrError::invalid("empty dataset"));
        }
        let mut hits = 0usize;
        for s in dataset {
            if self.predict(&s.features)? == s.label {
                hits += 1;
            }
        }
        Ok(hits as f64 / dataset.len() as f64)
    }

    fn pack(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.thetas.len() + self.omegas.len() + self.alphas.len());
        v.extend_from_slice(&self.thetas);
        v.extend_from_slice(&self.omegas);
        v.extend_from_slice(&self.alphas);
        v
    }

    fn unpack(&mut self, v: &[f64]) {
        let nt = self.thetas.len();
        let nw = self.omegas.len();
        self.thetas.copy_from_slice(&v[..nt]);
        self.omegas.copy_from_slice(&v[nt..nt + nw]);
        self.alphas.copy_from_slice(&v[nt + nw..]);
    }
}

/// Minimize the fidelity cost over (θ, ω, α) starting from `model`.
///
/// Normalization bounds are taken from the dataset. Returns the trained
/// model and the per-iteration cost trace.
pub fn train(
    mut model: ClassifierModel,
    dataset: &[LabeledSample],
    optimizer: &OptimizerConfig,
) -> Result<(ClassifierModel, Vec<f64>)> {
    if dataset.is_empty() {
        return Err(QcbrError::invalid("empty dataset"));
    }
    for s in dataset {
        if s.label >= model.num_classes {
            return Err(QcbrError::invalid(format!(
                "label {} out of range for {} classes",
                s.label, model.num_classes
            )));
        }
    }
    model.set_normalization_from(dataset)?;
    let x0 = model.pack();
    let probe = model.clone();
    // Optimize the per-sample mean so the SPSA gains see an O(1) objective
    // regardless of dataset size; the public cost stays the summed form.
    let scale = dataset.len() as f64;
    let objective = |x: &[f64]| {
        let mut m = probe.clone();
        m.unpack(x);
        m.cost(dataset).map(|c| c / scale).unwrap_or(f64::NAN)
    };
    let mut result = optim::minimize(objective, &x0, optimizer)?;
    for v in result.trace.iter_mut() {
        *v *= scale;
    }
    model.unpack(&result.x_best);
    Ok((model, result.trace))
}
