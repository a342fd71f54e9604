use qcbr::optim::OptimizerConfig;
use qcbr::swp::*;
use qcbr::vqc::*;

fn data() -> Dataset {
    generate_dataset(&DatasetParams {
        num_patients: 4,
        num_workers: 3,
        num_cases: 580,
        seed: 7,
        overlap_degree: 0.5,
        epsilon: 1.0,
    })
    .unwrap()
}

#[test]
fn gain_sweep() {
    let d = data();
    let samples = d.samples();
    let small: Vec<LabeledSample> = samples[..50].to_vec();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 4,
        data_dim: 8,
        entanglement: Entanglement::Crz,
    };
    for a in [0.2f64, 2.0, 5.0, 10.0, 20.0] {
        let init = ClassifierModel::random_init(ansatz, 6, 7).unwrap();
        let mut opt = OptimizerConfig::spsa(2000, 7);
        opt.spsa_a = a;
        let t0 = std::time::Instant::now();
        let (model, trace) = train(init, &small, &opt).unwrap();
        println!(
            "a={a} cost {:.1}->{:.1} train50={:.3} time={:.1}s",
            trace[0],
            trace.last().unwrap(),
            model.accuracy(&small).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}

#[test]
fn full_train_probe() {
    let d = data();
    let samples = d.samples();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 8,
        data_dim: 8,
        entanglement: Entanglement::Crz,
    };
    for (a, iters) in [(5.0f64, 1000usize), (10.0, 1000), (10.0, 3000)] {
        let init = ClassifierModel::random_init(ansatz, 6, 7).unwrap();
        let mut opt = OptimizerConfig::spsa(iters, 7);
        opt.spsa_a = a;
        let t0 = std::time::Instant::now();
        let (model, _) = train(init, &samples, &opt).unwrap();
        println!(
            "a={a} iters={iters} train580={:.3} time={:.1}s",
            model.accuracy(&samples).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}

#[test]
fn overlap_scan() {
    for overlap in [0.0f64, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9] {
        let d = generate_dataset(&DatasetParams {
            num_patients: 4,
            num_workers: 3,
            num_cases: 580,
            seed: 7,
            overlap_degree: overlap,
            epsilon: 1.0,
        })
        .unwrap();
        let s = d.samples();
        let mut hist = std::collections::BTreeMap::new();
        for smp in &s {
            *hist.entry(smp.label).or_insert(0usize) += 1;
        }
        let maj = hist.values().copied().max().unwrap() as f64 / s.len() as f64;
        let knn = qcbr::casemem::knn_kfold_accuracy(&s, 10, 5).unwrap();
        println!(
            "overlap={overlap} classes={} majority={maj:.3} knn5={knn:.3}",
            hist.len()
        );
    }
}

#[test]
fn knn_probe() {
    for overlap in [0.5f64, 0.9] {
        let d = generate_dataset(&DatasetParams {
            num_patients: 4,
            num_workers: 3,
            num_cases: 580,
            seed: 7,
            overlap_degree: overlap,
            epsilon: 1.0,
        })
        .unwrap();
        let s = d.samples();
        for k in [1usize, 5] {
            let acc = qcbr::casemem::knn_kfold_accuracy(&s, 10, k).unwrap();
            println!("overlap={overlap} k={k} knn={acc:.3}");
        }
    }
}

#[test]
fn fold_sweep() {
    let d = data();
    let samples = d.samples();
    let test: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 == 0).map(|(_, s)| s.clone()).collect();
    let tr: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 != 0).map(|(_, s)| s.clone()).collect();
    for ent in [Entanglement::None, Entanglement::Crz] {
        for layers in [2usize, 5, 8] {
            let ansatz = AnsatzConfig {
                num_qubits: classifier_qubits(4, 3),
                num_layers: layers,
                data_dim: 8,
                entanglement: ent,
            };
            let init = ClassifierModel::random_init(ansatz, 6, 7).unwrap();
            let mut opt = OptimizerConfig::spsa(2000, 7);
            opt.spsa_a = 5.0;
            let t0 = std::time::Instant::now();
            let (model, _) = train(init, &tr, &opt).unwrap();
            println!(
                "ent={ent:?} L={layers} train={:.3} test={:.3} time={:.0}s",
                model.accuracy(&tr).unwrap(),
                model.accuracy(&test).unwrap(),
                t0.elapsed().as_secs_f64()
            );
        }
    }
}

#[test]
fn probe_c10() {
    let overlap: f64 = std::env::var("OV").map(|v| v.parse().unwrap()).unwrap_or(0.15);
    let d = generate_dataset(&DatasetParams {
        num_patients: 4,
        num_workers: 3,
        num_cases: 580,
        seed: 7,
        overlap_degree: overlap,
        epsilon: 1.0,
    })
    .unwrap();
    let t0 = std::time::Instant::now();
    let mut cfg = qcbr::casemem::CycleConfig::default();
    if let Ok(l) = std::env::var("LAYERS") {
        cfg.classifier_layers = l.parse().unwrap();
    }
    if let Ok(s) = std::env::var("CSEED") {
        cfg.seed = s.parse().unwrap();
    }
    if std::env::var("VQEFULL").is_ok() {
        cfg.oracle_mode = qcbr::casemem::OracleMode::VqeFull;
    }
    let (log, mem) = qcbr::casemem::cbr_cycle(&d, &cfg).unwrap();
    println!("cycle time={:.0}s retained={}", t0.elapsed().as_secs_f64(), mem.len());
    for (s, e) in [(0usize, 50usize), (50, 100), (100, 200), (200, 400), (400, 530), (530, 580)] {
        println!(
            "window {s}..{e} pred={:.3} final={:.3}",
            log.prediction_accuracy(s, e),
            log.final_accuracy(s, e)
        );
    }
    // Can the retained set train a good classifier offline?
    let samples: Vec<LabeledSample> = mem
        .cases
        .iter()
        .map(|c| LabeledSample { features: c.features.clone(), label: c.class_label })
        .collect();
    let mut hist = std::collections::BTreeMap::new();
    for s in &samples {
        *hist.entry(s.label).or_insert(0usize) += 1;
    }
    println!("memory labels: {hist:?}");
    let all = d.samples();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 2,
        data_dim: 8,
        entanglement: Entanglement::None,
    };
    let init = ClassifierModel::random_init(ansatz, 6, 7).unwrap();
    let mut opt = OptimizerConfig::spsa(6000, 7);
    opt.spsa_a = 5.0;
    let (l2, _) = train(init, &samples, &opt).unwrap();
    println!(
        "offline L2 on memory: mem_acc={:.3} full_acc={:.3}",
        l2.accuracy(&samples).unwrap(),
        l2.accuracy(&all).unwrap()
    );
}

#[test]
fn start_only_probe() {
    let overlap: f64 = std::env::var("OV").map(|v| v.parse().unwrap()).unwrap_or(0.9);
    let d = generate_dataset(&DatasetParams {
        num_patients: 4,
        num_workers: 3,
        num_cases: 580,
        seed: 7,
        overlap_degree: overlap,
        epsilon: 1.0,
    })
    .unwrap();
    let samples: Vec<LabeledSample> = d
        .samples()
        .iter()
        .map(|s| LabeledSample {
            features: s.features.iter().step_by(2).copied().collect(),
            label: s.label,
        })
        .collect();
    let knn4 = qcbr::casemem::knn_kfold_accuracy(&samples, 10, 5).unwrap();
    println!("knn5 on 4D starts = {knn4:.3}");
    let test: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 == 0).map(|(_, s)| s.clone()).collect();
    let tr: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 != 0).map(|(_, s)| s.clone()).collect();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 2,
        data_dim: 4,
        entanglement: Entanglement::Crz,
    };
    let init = ClassifierModel::random_init(ansatz, 6, 7).unwrap();
    let mut opt = OptimizerConfig::spsa(8000, 7);
    opt.spsa_a = 5.0;
    let (l2, _) = train(init, &tr, &opt).unwrap();
    println!("4D L2 train={:.3} test={:.3}", l2.accuracy(&tr).unwrap(), l2.accuracy(&test).unwrap());
    let grown = l2.grow(6).unwrap();
    let mut fopt = OptimizerConfig::spsa(4000, 11);
    fopt.spsa_a = 3.0;
    let (l8, _) = train(grown, &tr, &fopt).unwrap();
    println!("4D L8 train={:.3} test={:.3}", l8.accuracy(&tr).unwrap(), l8.accuracy(&test).unwrap());
}

#[test]
fn grow_probe() {
    let overlap: f64 = std::env::var("OV").map(|v| v.parse().unwrap()).unwrap_or(0.2);
    let d = generate_dataset(&DatasetParams {
        num_patients: 4,
        num_workers: 3,
        num_cases: 580,
        seed: 7,
        overlap_degree: overlap,
        epsilon: 1.0,
    })
    .unwrap();
    let samples = d.samples();
    let test: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 == 0).map(|(_, s)| s.clone()).collect();
    let tr: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 != 0).map(|(_, s)| s.clone()).collect();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 2,
        data_dim: 8,
        entanglement: Entanglement::Crz,
    };
    let init = ClassifierModel::random_init(ansatz, 6, 7).unwrap();
    let mut opt = OptimizerConfig::spsa(8000, 7);
    opt.spsa_a = 5.0;
    let (l2, _) = train(init, &tr, &opt).unwrap();
    println!(
        "L2 base train={:.3} test={:.3}",
        l2.accuracy(&tr).unwrap(),
        l2.accuracy(&test).unwrap()
    );
    let grown4 = l2.grow(2).unwrap();
    let mut o4 = OptimizerConfig::spsa(4000, 11);
    o4.spsa_a = 3.0;
    let (l4, _) = train(grown4, &tr, &o4).unwrap();
    println!(
        "L4 grown train={:.3} test={:.3}",
        l4.accuracy(&tr).unwrap(),
        l4.accuracy(&test).unwrap()
    );
    for (a, iters, fseed) in [(3.0f64, 4000usize, 11u64), (3.0, 4000, 13), (5.0, 4000, 11)] {
        let grown = l4.grow(4).unwrap();
        let mut fopt = OptimizerConfig::spsa(iters, fseed);
        fopt.spsa_a = a;
        let t0 = std::time::Instant::now();
        let (l8, _) = train(grown, &tr, &fopt).unwrap();
        println!(
            "L8 grown a={a} iters={iters} train={:.3} test={:.3} time={:.0}s",
            l8.accuracy(&tr).unwrap(),
            l8.accuracy(&test).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}

#[test]
fn long_train_probe() {
    let overlap: f64 = std::env::var("OV").map(|v| v.parse().unwrap()).unwrap_or(0.5);
    let d = generate_dataset(&DatasetParams {
        num_patients: 4,
        num_workers: 3,
        num_cases: 580,
        seed: 7,
        overlap_degree: overlap,
        epsilon: 1.0,
    })
    .unwrap();
    let samples = d.samples();
    let test: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 == 0).map(|(_, s)| s.clone()).collect();
    let tr: Vec<LabeledSample> = samples.iter().enumerate().filter(|(i, _)| i % 10 != 0).map(|(_, s)| s.clone()).collect();
    for (layers, iters, seed, a, c) in [
        (8usize, 4000usize, 7u64, 5.0f64, 0.3f64),
        (8, 4000, 7, 5.0, 0.6),
        (8, 4000, 7, 5.0, 1.0),
        (8, 4000, 7, 2.0, 0.6),
        (8, 4000, 7, 10.0, 1.0),
    ] {
        let ent = Entanglement::Crz;
        let ansatz = AnsatzConfig {
            num_qubits: classifier_qubits(4, 3),
            num_layers: layers,
            data_dim: 8,
            entanglement: ent,
        };
        let init = ClassifierModel::random_init(ansatz, 6, seed).unwrap();
        let mut opt = OptimizerConfig::spsa(iters, seed);
        opt.spsa_a = a;
        opt.spsa_c = c;
        let t0 = std::time::Instant::now();
        let (model, _) = train(init, &tr, &opt).unwrap();
        println!(
            "L={layers} iters={iters} seed={seed} a={a} c={c} ent={ent:?} train={:.3} test={:.3} time={:.0}s",
            model.accuracy(&tr).unwrap(),
            model.accuracy(&test).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}
