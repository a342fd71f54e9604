//! Command-line surface for the qcbr pipeline: dataset generation,
//! classifier training, schedule solving, the full reasoning cycle and the
//! warm-vs-cold VQE benchmark. Every run writes a manifest echoing the
//! resolved configuration so results can be reproduced from the output
//! directory alone.

use clap::{Parser, Subcommand, ValueEnum};
use qcbr::casemem::{self, CycleConfig, OracleMode, RetainConfig, SolverConfig};
use qcbr::io::{self, MemoryDocument, ModelDocument, FORMAT_VERSION};
use qcbr::optim::OptimizerConfig;
use qcbr::preprocess::{ica_fit, ica_transform, pca_fit, pca_transform};
use qcbr::swp::{
    self, brute_force_solve, build_qubo, decode_routes, instance_features, qubo_to_ising,
    DatasetParams, ScheduleInstance,
};
use qcbr::vqc::{self, AnsatzConfig, ClassifierModel, Entanglement, LabeledSample};
use qcbr::vqe::{vqe_minimize, warm_vs_cold_benchmark};
use qcbr::QcbrError;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qcbr", about = "Quantum case-based reasoning for weekly care schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum OptimizerArg {
    Spsa,
    Fd,
}

impl OptimizerArg {
    fn config(self, iterations: usize, seed: u64) -> OptimizerConfig {
        match self {
            OptimizerArg::Spsa => OptimizerConfig::spsa(iterations, seed),
            OptimizerArg::Fd => OptimizerConfig::fd(iterations, seed),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum EntanglementArg {
    None,
    Crz,
    Cnot,
    Cz,
}

impl From<EntanglementArg> for Entanglement {
    fn from(e: EntanglementArg) -> Self {
        match e {
            EntanglementArg::None => Entanglement::None,
            EntanglementArg::Crz => Entanglement::Crz,
            EntanglementArg::Cnot => Entanglement::Cnot,
            EntanglementArg::Cz => Entanglement::Cz,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
enum Command {
    /// Generate a labeled schedule dataset.
    Generate {
        #[arg(long)]
        patients: usize,
        #[arg(long)]
        workers: usize,
        #[arg(long)]
        cases: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Train the variational classifier on a dataset, with k-fold accuracy.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// One model per layer count; repeat the flag to sweep.
        #[arg(long, default_values_t = vec![5usize])]
        layers: Vec<usize>,
        #[arg(long, value_enum, default_value_t = EntanglementArg::Crz)]
        entanglement: EntanglementArg,
        #[arg(long, value_enum, default_value_t = OptimizerArg::Spsa)]
        optimizer: OptimizerArg,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        /// SPSA step-size numerator for the base training stage.
        #[arg(long, default_value_t = 5.0)]
        spsa_a: f64,
        /// 2 = PCA followed by ICA; omit (or pass 2n) for raw features.
        #[arg(long)]
        dims: Option<usize>,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Solve one schedule instance.
    Solve {
        /// Dataset file (see --case) or a bare instance JSON.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        case: usize,
        /// brute | vqe | warm:<memory-file>
        #[arg(long, default_value = "vqe")]
        mode: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = OptimizerArg::Spsa)]
        optimizer: OptimizerArg,
        #[arg(long, default_value_t = 300)]
        iterations: usize,
        #[arg(long, default_value_t = 50)]
        shots: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the retrieve/reuse/revise/retain cycle over a dataset stream.
    Cycle {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleArg::Brute)]
        oracle: OracleArg,
        #[arg(long, default_value_t = 20)]
        retrain_interval: usize,
        #[arg(long, default_value_t = 8)]
        layers: usize,
        #[arg(long, default_value_t = 6000)]
        train_iterations: usize,
        #[arg(long, default_value_t = 250)]
        full_iterations: usize,
        #[arg(long, default_value_t = 60)]
        warm_iterations: usize,
        #[arg(long, default_value_t = 50)]
        shots: u64,
        #[arg(long, default_value_t = 32)]
        cap: usize,
        #[arg(long, default_value_t = 0.1)]
        novelty: f64,
        #[arg(long, default_value_t = 0.05)]
        delta_fraction: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        window: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Warm-vs-cold VQE iteration benchmark on one instance.
    VqeBench {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        case: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, value_enum, default_value_t = OptimizerArg::Spsa)]
        optimizer: OptimizerArg,
        #[arg(long, default_value_t = 300)]
        iterations: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum OracleArg {
    Brute,
    Vqe,
}

fn exit_code_for(err: &QcbrError) -> u8 {
    match err {
        QcbrError::InvalidArgument(_) | QcbrError::Parse(_) => 2,
        QcbrError::Infeasible(_) | QcbrError::Degenerate(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Every command echoes its resolved arguments next to its outputs.
fn write_manifest(out: &Path, name: &str, command: &Command, extra: serde_json::Value) -> qcbr::Result<()> {
    std::fs::create_dir_all(out)?;
    let manifest = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "command": command,
        "resolved": extra,
    });
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| QcbrError::Parse(e.to_string()))?;
    std::fs::write(out.join(format!("{name}.manifest.json")), text)?;
    Ok(())
}

/// Accepts either a dataset document (then `case` selects a record) or a
/// bare instance JSON.
fn load_instance(path: &Path, case: usize) -> qcbr::Result<(ScheduleInstance, Vec<f64>)> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(doc) = io::parse_dataset_document(&text) {
        let record = doc.dataset.cases.get(case).ok_or_else(|| {
            QcbrError::invalid(format!("case {case} out of range ({} cases)", doc.dataset.cases.len()))
        })?;
        return Ok((record.instance.clone(), record.features.clone()));
    }
    let instance: ScheduleInstance =
        serde_json::from_str(&text).map_err(|e| QcbrError::Parse(e.to_string()))?;
    instance.validate()?;
    let features = instance_features(&instance);
    Ok((instance, features))
}

fn run(command: &Command) -> qcbr::Result<()> {
    match command {
        Command::Generate { patients, workers, cases, overlap, epsilon, seed, out } => {
            let params = DatasetParams {
                num_patients: *patients,
                num_workers: *workers,
                num_cases: *cases,
                seed: *seed,
                overlap_degree: *overlap,
                epsilon: *epsilon,
            };
            let dataset = swp::generate_dataset(&params)?;
            std::fs::create_dir_all(out)?;
            io::save_dataset(&out.join("dataset.json"), &dataset)?;
            std::fs::write(out.join("dataset.csv"), dataset.to_csv())?;
            write_manifest(out, "generate", command, serde_json::json!({
                "params": params,
                "num_classes": swp::num_solution_classes(*patients, *workers),
            }))?;
            println!("wrote {} cases to {}", dataset.cases.len(), out.join("dataset.json").display());
            println!("class histogram:");
            for (label, count) in dataset.class_histogram() {
                println!("  class {label}: {count}");
            }
            Ok(())
        }
        Command::Train {
            dataset, layers, entanglement, optimizer, iterations, spsa_a, dims, folds, seed, out,
        } => {
            let data = io::load_dataset(dataset)?;
            let dims = dims.unwrap_or(2 * data.params.num_patients);
            cmd_train(
                command, &data, layers, (*entanglement).into(), *optimizer, *iterations, *spsa_a,
                dims, *folds, *seed, out,
            )
        }
        Command::Solve { instance, case, mode, depth, optimizer, iterations, shots, seed, out } => {
            let (inst, features) = load_instance(instance, *case)?;
            cmd_solve(command, &inst, &features, mode, *depth, *optimizer, *iterations, *shots, *seed, out.as_deref())
        }
        Command::Cycle {
            dataset, oracle, retrain_interval, layers, train_iterations, full_iterations,
            warm_iterations, shots, cap, novelty, delta_fraction, seed, window, out,
        } => {
            let data = io::load_dataset(dataset)?;
            let config = CycleConfig {
                retain: RetainConfig {
                    per_class_cap: *cap,
                    novelty_min_distance: *novelty,
                    delta_accept_fraction: *delta_fraction,
                },
                solver: SolverConfig {
                    vqe_depth: 3,
                    vqe_full_iterations: *full_iterations,
                    vqe_warm_iterations: *warm_iterations,
                    k_shots: *shots,
                },
                oracle_mode: match oracle {
                    OracleArg::Brute => OracleMode::BruteForce,
                    OracleArg::Vqe => OracleMode::VqeFull,
                },
                retrain_interval: *retrain_interval,
                classifier_layers: *layers,
                classifier_train_iterations: *train_iterations,
                seed: *seed,
            };
            let (log, memory) = casemem::cbr_cycle(&data, &config)?;
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("cycle_log.csv"), log.to_csv())?;
            io::save_memory(
                &out.join("memory.json"),
                &MemoryDocument { version: FORMAT_VERSION, memory, classifier: None },
            )?;
            write_manifest(out, "cycle", command, serde_json::to_value(&config).unwrap())?;
            let n = log.records.len();
            let w = (*window).max(1);
            println!("processed {n} cases");
            println!(
                "prediction accuracy: first {w} = {:.3}, last {w} = {:.3}",
                log.prediction_accuracy(0, w),
                log.prediction_accuracy(n.saturating_sub(w), n)
            );
            println!(
                "final-label accuracy: first {w} = {:.3}, last {w} = {:.3}",
                log.final_accuracy(0, w),
                log.final_accuracy(n.saturating_sub(w), n)
            );
            Ok(())
        }
        Command::VqeBench { instance, case, trials, depth, optimizer, iterations, seed, out } => {
            let (inst, _) = load_instance(instance, *case)?;
            let ising = qubo_to_ising(&build_qubo(&inst)?);
            let opt = optimizer.config(*iterations, *seed);
            let report = warm_vs_cold_benchmark(&ising, *depth, &opt, *trials, *seed)?;
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("vqe_bench.csv"), report.to_csv())?;
            write_manifest(out, "vqe-bench", command, serde_json::json!({
                "num_vars": ising.num_vars,
                "ground_energy": report.ground_energy,
            }))?;
            println!(
                "median iterations to threshold: cold = {:.1}, warm = {:.1}",
                report.median_iterations(false),
                report.median_iterations(true)
            );
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    command: &Command,
    data: &swp::Dataset,
    layers: &[usize],
    entanglement: Entanglement,
    optimizer: OptimizerArg,
    iterations: usize,
    spsa_a: f64,
    dims: usize,
    folds: usize,
    seed: u64,
    out: &Path,
) -> qcbr::Result<()> {
    if data.cases.is_empty() {
        return Err(QcbrError::invalid("dataset has no cases"));
    }
    let n = data.params.num_patients;
    let m = data.params.num_workers;
    let raw_dim = 2 * n;
    if dims != raw_dim && dims != 2 {
        return Err(QcbrError::invalid(format!("dims must be 2 or {raw_dim} for this dataset")));
    }
    let raw: Vec<Vec<f64>> = data.cases.iter().map(|c| c.features.clone()).collect();
    let labels: Vec<usize> = data.cases.iter().map(|c| c.label).collect();

    // dims=2 path: PCA down to two axes, then ICA to unmix them.
    let (features, pca, ica) = if dims == 2 {
        let pca = pca_fit(&raw, 2)?;
        let reduced = pca_transform(&pca, &raw)?;
        let ica = ica_fit(&reduced, 2, seed)?;
        let unmixed = ica_transform(&ica, &reduced)?;
        (unmixed, Some(pca), Some(ica))
    } else {
        (raw, None, None)
    };
    let samples: Vec<LabeledSample> = features
        .into_iter()
        .zip(&labels)
        .map(|(f, &label)| LabeledSample { features: f, label })
        .collect();

    let num_classes = swp::num_solution_classes(n, m) as usize;
    let qubits = swp::classifier_qubits(n, m);
    std::fs::create_dir_all(out)?;

    // Deeper configurations are fitted by growing the trained shallower model
    // (identity layers + gentler fine-tune); deep re-uploading ansatzes train
    // poorly from a fully random start.
    let mut layer_chain: Vec<usize> = layers.to_vec();
    layer_chain.sort_unstable();
    layer_chain.dedup();
    let train_chain = |train_set: &[LabeledSample], base_seed: u64| -> qcbr::Result<Vec<ClassifierModel>> {
        let mut models: Vec<ClassifierModel> = Vec::new();
        for (stage, &num_layers) in layer_chain.iter().enumerate() {
            let model = match models.last() {
                None => {
                    let ansatz = AnsatzConfig {
                        num_qubits: qubits,
                        num_layers,
                        data_dim: dims,
                        entanglement,
                    };
                    let init = ClassifierModel::random_init(ansatz, num_classes, base_seed)?;
                    let mut opt = optimizer.config(iterations, base_seed);
                    opt.spsa_a = spsa_a;
                    vqc::train(init, train_set, &opt)?.0
                }
                Some(prev) => {
                    let grown = prev.grow(num_layers - prev.config.num_layers)?;
                    let mut opt = optimizer
                        .config((iterations / 2).max(1), base_seed.wrapping_add(stage as u64));
                    opt.spsa_a = spsa_a * 0.6;
                    vqc::train(grown, train_set, &opt)?.0
                }
            };
            models.push(model);
        }
        Ok(models)
    };

    let mut csv = String::from("layers,fold,train_accuracy,test_accuracy\n");
    if folds >= 2 && samples.len() >= folds {
        for fold in 0..folds {
            let test: Vec<LabeledSample> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| i % folds == fold)
                .map(|(_, s)| s.clone())
                .collect();
            let train_set: Vec<LabeledSample> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| i % folds != fold)
                .map(|(_, s)| s.clone())
                .collect();
            let models = train_chain(&train_set, seed.wrapping_add(fold as u64))?;
            for model in &models {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    model.config.num_layers,
                    fold,
                    model.accuracy(&train_set)?,
                    model.accuracy(&test)?
                ));
            }
        }
    }
    // final models on the full dataset
    for model in train_chain(&samples, seed)? {
        let num_layers = model.config.num_layers;
        let full_acc = model.accuracy(&samples)?;
        io::save_model(
            &out.join(format!("model_l{num_layers}.json")),
            &ModelDocument {
                version: FORMAT_VERSION,
                model,
                pca: pca.clone(),
                ica: ica.clone(),
            },
        )?;
        println!("layers {num_layers}: full-dataset accuracy {full_acc:.3}");
    }
    std::fs::write(out.join("accuracy.csv"), &csv)?;
    write_manifest(out, "train", command, serde_json::json!({
        "preprocess": if dims == 2 { "pca+ica" } else { "none" },
        "num_classes": num_classes,
        "classifier_qubits": qubits,
        "samples": samples.len(),
    }))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    command: &Command,
    instance: &ScheduleInstance,
    features: &[f64],
    mode: &str,
    depth: usize,
    optimizer: OptimizerArg,
    iterations: usize,
    shots: u64,
    seed: u64,
    out: Option<&Path>,
) -> qcbr::Result<()> {
    #[derive(Serialize)]
    struct SolveReport {
        mode: String,
        routes: Vec<Vec<usize>>,
        cost: f64,
        class_label: Option<usize>,
        clean_path_cover: bool,
    }

    let report = match mode {
        "brute" => {
            let sol = brute_force_solve(instance)?;
            SolveReport {
                mode: mode.into(),
                routes: sol.partition.clone(),
                cost: sol.cost,
                class_label: Some(sol.class_label),
                clean_path_cover: true,
            }
        }
        "vqe" => {
            let ising = qubo_to_ising(&build_qubo(instance)?);
            let opt = optimizer.config(iterations, seed);
            let result = vqe_minimize(&ising, depth, &opt, None, seed)?;
            let decode = decode_routes(instance, &result.best_bitstring)?;
            let partition = decode.partition(instance.num_workers);
            let class = partition
                .as_ref()
                .map(|p| swp::class_label(instance.num_patients(), instance.num_workers, p))
                .transpose()?;
            SolveReport {
                mode: mode.into(),
                routes: decode.routes.clone(),
                cost: result.energy,
                class_label: class,
                clean_path_cover: decode.forms_path_cover(instance.num_workers),
            }
        }
        warm if warm.starts_with("warm:") => {
            let memory_path = Path::new(&warm["warm:".len()..]);
            let doc = io::load_memory(memory_path)?;
            let solver = SolverConfig {
                vqe_depth: depth,
                vqe_full_iterations: iterations,
                vqe_warm_iterations: iterations,
                k_shots: shots,
            };
            let warm_case = match &doc.classifier {
                Some(model) if !doc.memory.is_empty() => {
                    let (label, _) = doc.memory.retrieve(model, features)?;
                    match casemem::reuse(&doc.memory, label, instance, features, &solver, seed) {
                        Ok(case) => Some(case),
                        Err(QcbrError::NoExperience(_)) => None,
                        Err(e) => return Err(e),
                    }
                }
                _ => None,
            };
            let case = match warm_case {
                Some(c) => c,
                None => {
                    println!("no experience in memory; falling back to a cold solve");
                    casemem::full_solve(instance, features, &solver, seed)?
                }
            };
            let decode = decode_routes(instance, &case.routes.bits)?;
            SolveReport {
                mode: mode.into(),
                routes: decode.routes.clone(),
                cost: case.energy,
                class_label: (case.class_label != usize::MAX).then_some(case.class_label),
                clean_path_cover: decode.forms_path_cover(instance.num_workers),
            }
        }
        other => {
            return Err(QcbrError::invalid(format!(
                "unknown mode '{other}' (expected brute, vqe, or warm:<memory-file>)"
            )))
        }
    };

    for (w, route) in report.routes.iter().enumerate() {
        println!("worker {w}: {route:?}");
    }
    println!("cost: {}", report.cost);
    match report.class_label {
        Some(c) => println!("class: {c}"),
        None => println!("class: undetermined (constraint violations)"),
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| QcbrError::Parse(e.to_string()))?;
        std::fs::write(dir.join("solution.json"), text)?;
        write_manifest(dir, "solve", command, serde_json::json!({"mode": mode}))?;
    }
    Ok(())
}
