use qcbr::casemem::*;
use qcbr::optim::OptimizerConfig;
use qcbr::swp::*;
use qcbr::vqc::*;

fn ds(n: usize, m: usize, cases: usize, overlap: f64, seed: u64) -> Dataset {
    generate_dataset(&DatasetParams {
        num_patients: n,
        num_workers: m,
        num_cases: cases,
        seed,
        overlap_degree: overlap,
        epsilon: 1.0,
    })
    .unwrap()
}

fn kfold_vqc(samples: &[LabeledSample], folds: usize, layers: usize, iters: usize, n: usize, m: usize) -> f64 {
    let num_classes = num_solution_classes(n, m) as usize;
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(n, m),
        num_layers: layers,
        data_dim: samples[0].features.len(),
        entanglement: Entanglement::Crz,
    };
    let mut hits = 0usize;
    for fold in 0..folds {
        let test: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % folds == fold).map(|(_, s)| s.clone()).collect();
        let train_set: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % folds != fold).map(|(_, s)| s.clone()).collect();
        let init = ClassifierModel::random_init(ansatz, num_classes, 7).unwrap();
        let (model, _) = train(init, &train_set, &OptimizerConfig::spsa(iters, 7 + fold as u64)).unwrap();
        hits += test.iter().filter(|s| model.predict(&s.features).unwrap() == s.label).count();
    }
    hits as f64 / samples.len() as f64
}

#[test]
fn probe_c7() {
    let d = ds(4, 3, 580, 0.5, 7);
    let samples = d.samples();
    let hist = d.class_histogram();
    let majority = *hist.values().max().unwrap() as f64 / samples.len() as f64;
    println!("majority baseline: {majority:.3} hist={hist:?}");
    for (layers, iters) in [(2usize, 250usize), (8, 250)] {
        let t0 = std::time::Instant::now();
        let acc = kfold_vqc(&samples, 10, layers, iters, 4, 3);
        println!("L={layers} iters={iters} acc={acc:.3} time={:.1}s", t0.elapsed().as_secs_f64());
    }
}

#[test]
fn probe_c10() {
    let d = ds(4, 3, 580, 0.5, 7);
    let config = CycleConfig::default();
    let t0 = std::time::Instant::now();
    let (log, mem) = cbr_cycle(&d, &config).unwrap();
    let n = log.records.len();
    println!(
        "cycle: pred first50={:.3} last50={:.3} final-label last50={:.3} mem={} time={:.1}s",
        log.prediction_accuracy(0, 50),
        log.prediction_accuracy(n - 50, n),
        log.final_accuracy(n - 50, n),
        mem.len(),
        t0.elapsed().as_secs_f64()
    );
}

#[test]
fn probe_c11() {
    let d = ds(4, 3, 580, 0.9, 7);
    let samples = d.samples();
    let knn = knn_kfold_accuracy(&samples, 10, 5).unwrap();
    let t0 = std::time::Instant::now();
    let q = kfold_vqc(&samples, 10, 8, 250, 4, 3);
    println!("overlap0.9: knn={knn:.3} quantum={q:.3} time={:.1}s", t0.elapsed().as_secs_f64());
}
