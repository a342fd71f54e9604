//! Case memory and the four-phase reasoning cycle: classifier-backed
//! retrieve, warm-started shot-limited VQE reuse, threshold-rule revise and
//! a capped novelty/energy retain policy. A KNN baseline rides along for
//! the benchmark harness.

use crate::error::{QcbrError, Result};
use crate::optim::OptimizerConfig;
use crate::swp::{
    self, brute_force_solve, build_qubo, decode_routes, enumerate_partitions, partition_cost,
    qubo_to_ising, Dataset, RouteMatrix, ScheduleInstance,
};
use crate::vqc::{self, AnsatzConfig, ClassifierModel, Entanglement, LabeledSample};
use crate::vqe::{vqe_minimize_with, EnergyEval, VqeResult};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolvedBy {
    Oracle,
    VqeFull,
    VqeWarm,
    Retrieved,
}

/// A solved schedule retained in memory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Case {
    pub features: Vec<f64>,
    pub class_label: usize,
    /// VQE ansatz parameters used to warm start similar schedules.
    pub initial_point: Vec<f64>,
    /// Solved schedule cost in the route metric.
    pub energy: f64,
    pub routes: RouteMatrix,
    pub solved_by: SolvedBy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetainConfig {
    pub per_class_cap: usize,
    /// Minimum feature-space distance for a case to count as novel.
    pub novelty_min_distance: f64,
    /// Revise acceptance threshold as a fraction of the instance's
    /// brute-force cost range.
    pub delta_accept_fraction: f64,
}

impl Default for RetainConfig {
    fn default() -> Self {
        RetainConfig {
            per_class_cap: 32,
            novelty_min_distance: 0.1,
            delta_accept_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CaseMemory {
    pub cases: Vec<Case>,
    pub config: RetainConfig,
    /// class label -> indices into `cases`.
    #[serde(default)]
    index: BTreeMap<usize, Vec<usize>>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl CaseMemory {
    pub fn new(config: RetainConfig) -> Self {
        CaseMemory { cases: Vec::new(), config, index: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn cases_of_class(&self, label: usize) -> Vec<&Case> {
        self.index
            .get(&label)
            .map(|ids| ids.iter().map(|&i| &self.cases[i]).collect())
            .unwrap_or_default()
    }

    /// Rebuild the per-class index from scratch (used after deserialization).
    pub fn rebuild_index(&mut self) {
        self.index.clear();
        for (i, c) in self.cases.iter().enumerate() {
            self.index.entry(c.class_label).or_default().push(i);
        }
    }

    /// Classifier-backed retrieval: predicted label plus every retained
    /// case of that class.
    pub fn retrieve(
        &self,
        classifier: &ClassifierModel,
        features: &[f64],
    ) -> Result<(usize, Vec<&Case>)> {
        if self.is_empty() {
            return Err(QcbrError::NoExperience("case memory is empty".into()));
        }
        let label = classifier.predict(features)?;
        Ok((label, self.cases_of_class(label)))
    }

    /// Retain policy: always keep a novel case while the class is under its
    /// cap; otherwise keep it only by evicting a strictly worse same-class
    /// case.
    pub fn retain(&mut self, case: Case) -> bool {
        let ids = self.index.entry(case.class_label).or_default();
        let novel = ids.iter().all(|&i| {
            euclidean(&self.cases[i].features, &case.features)
                >= self.config.novelty_min_distance
        });
        if ids.len() < self.config.per_class_cap && novel {
            ids.push(self.cases.len());
            self.cases.push(case);
            return true;
        }
        let worst = ids
            .iter()
            .copied()
            .max_by(|&a, &b| self.cases[a].energy.partial_cmp(&self.cases[b].energy).unwrap());
        if let Some(w) = worst {
            if case.energy < self.cases[w].energy {
                self.cases[w] = case;
                return true;
            }
        }
        false
    }

    /// Element-wise mean of the class's stored initial points.
    pub fn mean_initial_point(&self, label: usize) -> Result<Vec<f64>> {
        let cases = self.cases_of_class(label);
        if cases.is_empty() {
            return Err(QcbrError::NoExperience(format!("class {label} has no retained case")));
        }
        let dim = cases[0].initial_point.len();
        if cases.iter().any(|c| c.initial_point.len() != dim) {
            return Err(QcbrError::invalid("stored initial points differ in length"));
        }
        let mut mean = vec![0.0; dim];
        for c in &cases {
            for (m, v) in mean.iter_mut().zip(&c.initial_point) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= cases.len() as f64;
        }
        Ok(mean)
    }
}

/// Solver knobs shared by the cycle phases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub vqe_depth: usize,
    pub vqe_full_iterations: usize,
    pub vqe_warm_iterations: usize,
    pub k_shots: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            vqe_depth: 3,
            vqe_full_iterations: 250,
            vqe_warm_iterations: 60,
            k_shots: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMode {
    VqeFull,
    BruteForce,
}

/// Revise acceptance gap: a fraction of the brute-force cost range.
pub fn delta_accept_for(instance: &ScheduleInstance, fraction: f64) -> Result<f64> {
    let partitions = enumerate_partitions(instance.num_patients(), instance.num_workers);
    if partitions.is_empty() {
        return Err(QcbrError::Infeasible("no feasible partition".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &partitions {
        let c = partition_cost(instance, p)?;
        lo = lo.min(c);
        hi = hi.max(c);
    }
    Ok(fraction * (hi - lo))
}

/// Build a Case from a VQE run on the instance's Ising problem. The route
/// cost is finite only when the bitstring decodes into exactly m groups.
fn case_from_vqe(
    instance: &ScheduleInstance,
    result: &VqeResult,
    features: &[f64],
    solved_by: SolvedBy,
) -> Result<Case> {
    let decode = decode_routes(instance, &result.best_bitstring)?;
    let m = instance.num_workers;
    let (label, energy) = match decode.partition(m) {
        Some(partition) => (
            swp::class_label(instance.num_patients(), m, &partition)?,
            partition_cost(instance, &partition)?,
        ),
        None => (usize::MAX, f64::INFINITY),
    };
    Ok(Case {
        features: features.to_vec(),
        class_label: label,
        initial_point: result.parameters.clone(),
        energy,
        routes: decode.matrix,
        solved_by,
    })
}

fn oracle_case(
    instance: &ScheduleInstance,
    features: &[f64],
    initial_point: Vec<f64>,
) -> Result<Case> {
    let sol = brute_force_solve(instance)?;
    Ok(Case {
        features: features.to_vec(),
        class_label: sol.class_label,
        initial_point,
        energy: sol.cost,
        routes: sol.routes,
        solved_by: SolvedBy::Oracle,
    })
}

/// Cold VQE with the full iteration budget; falls back to the exhaustive
/// oracle when the best bitstring violates the route constraints.
pub fn full_solve(
    instance: &ScheduleInstance,
    features: &[f64],
    solver: &SolverConfig,
    seed: u64,
) -> Result<Case> {
    let ising = qubo_to_ising(&build_qubo(instance)?);
    let opt = OptimizerConfig::spsa(solver.vqe_full_iterations, seed);
    let result = vqe_minimize_with(&ising, solver.vqe_depth, &opt, None, seed, EnergyEval::Exact)?;
    let case = case_from_vqe(instance, &result, features, SolvedBy::VqeFull)?;
    let decode = decode_routes(instance, &case.routes.bits)?;
    if case.class_label == usize::MAX || !decode.forms_path_cover(instance.num_workers) {
        return oracle_case(instance, features, result.parameters);
    }
    Ok(case)
}

/// Warm, shot-limited VQE from the mean initial point of the predicted class.
pub fn reuse(
    memory: &CaseMemory,
    predicted_label: usize,
    instance: &ScheduleInstance,
    features: &[f64],
    solver: &SolverConfig,
    seed: u64,
) -> Result<Case> {
    if solver.k_shots == 0 {
        return Err(QcbrError::invalid("k_shots must be >= 1"));
    }
    let warm_point = memory.mean_initial_point(predicted_label)?;
    let ising = qubo_to_ising(&build_qubo(instance)?);
    let expected = ising.num_vars * (solver.vqe_depth + 1);
    if warm_point.len() != expected {
        return Err(QcbrError::invalid(format!(
            "stored initial point length {} does not fit the ansatz ({expected})",
            warm_point.len()
        )));
    }
    let opt = OptimizerConfig::spsa(solver.vqe_warm_iterations, seed);
    let result = vqe_minimize_with(
        &ising,
        solver.vqe_depth,
        &opt,
        Some(&warm_point),
        seed,
        EnergyEval::Shots(solver.k_shots),
    )?;
    case_from_vqe(instance, &result, features, SolvedBy::VqeWarm)
}

/// Threshold revision: accept the proposal when its cost is within
/// `delta_accept` of the reference; otherwise return the reference.
pub fn revise(
    proposed: Case,
    instance: &ScheduleInstance,
    oracle_mode: OracleMode,
    solver: &SolverConfig,
    delta_accept: f64,
    seed: u64,
) -> Result<(Case, bool)> {
    let reference = match oracle_mode {
        OracleMode::BruteForce => oracle_case(instance, &proposed.features, proposed.initial_point.clone())?,
        OracleMode::VqeFull => full_solve(instance, &proposed.features, solver, seed)?,
    };
    if proposed.energy <= reference.energy + delta_accept {
        Ok((proposed, true))
    } else {
        Ok((reference, false))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleConfig {
    pub retain: RetainConfig,
    pub solver: SolverConfig,
    pub oracle_mode: OracleMode,
    /// Retrain the classifier every this many processed cases.
    pub retrain_interval: usize,
    pub classifier_layers: usize,
    pub classifier_train_iterations: usize,
    pub seed: u64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            retain: RetainConfig::default(),
            solver: SolverConfig::default(),
            oracle_mode: OracleMode::BruteForce,
            retrain_interval: 20,
            classifier_layers: 8,
            classifier_train_iterations: 6000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CyclePhase {
    Reused,
    FullSolve,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleRecord {
    pub case_id: usize,
    pub phase: CyclePhase,
    pub label_predicted: Option<usize>,
    pub label_true: usize,
    pub label_final: usize,
    pub energy_proposed: Option<f64>,
    pub energy_final: f64,
    pub accepted: bool,
    pub retained: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleLog {
    pub records: Vec<CycleRecord>,
}

impl CycleLog {
    /// CSV rows matching the persisted log schema.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "case_id,phase,label_predicted,label_true,label_final,energy_proposed,energy_final,accepted,retained\n",
        );
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.case_id,
                match r.phase {
                    CyclePhase::Reused => "reuse",
                    CyclePhase::FullSolve => "full_solve",
                },
                r.label_predicted.map_or(String::from(""), |l| l.to_string()),
                r.label_true,
                r.label_final,
                r.energy_proposed.map_or(String::from(""), |e| e.to_string()),
                r.energy_final,
                r.accepted,
                r.retained,
            ));
        }
        out
    }

    /// Fraction of records in [start, end) whose predicted label matches the
    /// oracle label (retrieval accuracy, measured before revision).
    pub fn prediction_accuracy(&self, start: usize, end: usize) -> f64 {
        let window = &self.records[start.min(self.records.len())..end.min(self.records.len())];
        if window.is_empty() {
            return 0.0;
        }
        let hits = window
            .iter()
            .filter(|r| r.label_predicted == Some(r.label_true))
            .count();
        hits as f64 / window.len() as f64
    }

    /// Same window metric on the revised (final) label.
    pub fn final_accuracy(&self, start: usize, end: usize) -> f64 {
        let window = &self.records[start.min(self.records.len())..end.min(self.records.len())];
        if window.is_empty() {
            return 0.0;
        }
        let hits = window.iter().filter(|r| r.label_final == r.label_true).count();
        hits as f64 / window.len() as f64
    }
}

/// Run the full reasoning cycle over a dataset stream.
pub fn cbr_cycle(dataset: &Dataset, config: &CycleConfig) -> Result<(CycleLog, CaseMemory)> {
    let n = dataset.params.num_patients;
    let m = dataset.params.num_workers;
    let num_classes = swp::num_solution_classes(n, m) as usize;
    let qubits = swp::classifier_qubits(n, m);
    let ansatz = AnsatzConfig {
        num_qubits: qubits,
        num_layers: config.classifier_layers,
        data_dim: 2 * n,
        entanglement: Entanglement::None,
    };

    let mut memory = CaseMemory::new(config.retain.clone());
    let mut classifier: Option<ClassifierModel> = None;
    let mut records = Vec::with_capacity(dataset.cases.len());
    // Every processed case contributes classifier experience through its
    // revised label; the capped memory governs retrieval and reuse only.
    let mut experience: Vec<LabeledSample> = Vec::with_capacity(dataset.cases.len());

    for (case_id, record) in dataset.cases.iter().enumerate() {
        let seed = config.seed.wrapping_add(case_id as u64 * 7919);
        let instance = &record.instance;
        let features = &record.features;

        let predicted = match &classifier {
            Some(model) if !memory.is_empty() => Some(model.predict(features)?),
            _ => None,
        };

        let proposal = match predicted {
            Some(label) => {
                match reuse(&memory, label, instance, features, &config.solver, seed) {
                    Ok(case) => Some((case, CyclePhase::Reused)),
                    Err(QcbrError::NoExperience(_)) => None,
                    Err(e) => return Err(e),
                }
            }
            None => None,
        };
        let (proposal, phase) = match proposal {
            Some(p) => p,
            None => (
                full_solve(instance, features, &config.solver, seed)?,
                CyclePhase::FullSolve,
            ),
        };

        let delta = delta_accept_for(instance, config.retain.delta_accept_fraction)?;
        let energy_proposed = proposal.energy;
        let (final_case, accepted) =
            revise(proposal, instance, config.oracle_mode, &config.solver, delta, seed)?;
        let retained = memory.retain(final_case.clone());
        if final_case.class_label < num_classes {
            experience.push(LabeledSample {
                features: features.clone(),
                label: final_case.class_label,
            });
        }
        records.push(CycleRecord {
            case_id,
            phase,
            label_predicted: predicted,
            label_true: record.label,
            label_final: final_case.class_label,
            energy_proposed: energy_proposed.is_finite().then_some(energy_proposed),
            energy_final: final_case.energy,
            accepted,
            retained,
        });

        // Periodic retraining over the retained memory. Deep re-uploading
        // ansatzes train poorly from a fully random start, so each retrain
        // fits a fresh two-layer model and grows it to the configured depth
        // with a gentler fine-tune; warm-chaining across retrains instead
        // repeatedly restarts the SPSA decay schedule at full step on a
        // converged model and destabilizes it.
        let due = (case_id + 1) % config.retrain_interval == 0;
        if due && memory.len() >= 2 {
            let samples = &experience;
            let distinct: std::collections::BTreeSet<usize> =
                samples.iter().map(|s| s.label).collect();
            if samples.len() >= 4 && distinct.len() >= 2 {
                let base = AnsatzConfig { num_layers: 2.min(config.classifier_layers), ..ansatz };
                // Random re-uploading inits vary widely in quality; a cheap
                // best-of-3 multi-start on the shallow base model removes
                // most of that variance before the grown stages.
                let mut best: Option<(f64, ClassifierModel)> = None;
                for start in 0..3u64 {
                    let start_seed = seed.wrapping_add(start);
                    let init = ClassifierModel::random_init(base, num_classes, start_seed)?;
                    let mut opt =
                        OptimizerConfig::spsa(config.classifier_train_iterations, start_seed);
                    // Fidelity costs are flat far from a solution; the
                    // default step scale barely moves the classifier.
                    opt.spsa_a = 5.0;
                    let (candidate, _) = vqc::train(init, samples, &opt)?;
                    let acc = candidate.accuracy(samples)?;
                    if best.as_ref().map_or(true, |(b, _)| acc > *b) {
                        best = Some((acc, candidate));
                    }
                }
                let mut trained = match best {
                    Some((_, model)) => model,
                    None => unreachable!("multi-start loop always yields a model"),
                };
                let mut layers = base.num_layers;
                while layers < config.classifier_layers {
                    let step = 2.min(config.classifier_layers - layers);
                    let grown = trained.grow(step)?;
                    let mut fine = OptimizerConfig::spsa(
                        config.classifier_train_iterations / 2,
                        seed ^ (0x5f5f + layers as u64),
                    );
                    fine.spsa_a = 3.0;
                    trained = vqc::train(grown, samples, &fine)?.0;
                    layers += step;
                }
                classifier = Some(trained);
            }
        }
    }
    Ok((CycleLog { records }, memory))
}

/// Majority label among the k nearest stored cases; ties break toward the
/// smallest label.
pub fn knn_baseline(
    train: &[LabeledSample],
    test_features: &[f64],
    k: usize,
) -> Result<usize> {
    if k < 1 {
        return Err(QcbrError::invalid("k must be >= 1"));
    }
    if train.is_empty() {
        return Err(QcbrError::NoExperience("empty training set".into()));
    }
    let mut dists: Vec<(f64, usize)> = train
        .iter()
        .map(|s| (euclidean(&s.features, test_features), s.label))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, label) in dists.iter().take(k) {
        *votes.entry(label).or_insert(0) += 1;
    }
    let best_count = votes.values().copied().max().unwrap();
    Ok(*votes.iter().find(|(_, &c)| c == best_count).unwrap().0)
}

/// Deterministic k-fold accuracy of the KNN baseline.
pub fn knn_kfold_accuracy(samples: &[LabeledSample], folds: usize, k: usize) -> Result<f64> {
    if folds < 2 || samples.len() < folds {
        return Err(QcbrError::invalid("need at least `folds` samples and folds >= 2"));
    }
    let mut hits = 0usize;
    for fold in 0..folds {
        let test: Vec<&LabeledSample> =
            samples.iter().enumerate().filter(|(i, _)| i % folds == fold).map(|(_, s)| s).collect();
        let train: Vec<LabeledSample> = samples
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds != fold)
            .map(|(_, s)| s.clone())
            .collect();
        for t in &test {
            if knn_baseline(&train, &t.features, k)? == t.label {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / samples.len() as f64)
}
