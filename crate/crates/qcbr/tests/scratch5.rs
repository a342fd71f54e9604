use qcbr::optim::OptimizerConfig;
use qcbr::swp::{classifier_qubits, generate_dataset, DatasetParams};
use qcbr::vqc::{train, AnsatzConfig, ClassifierModel, Entanglement, LabeledSample};

#[test]
#[ignore]
fn multistart_probe() {
    let d = generate_dataset(&DatasetParams {
        num_patients: 4,
        num_workers: 3,
        num_cases: 580,
        seed: 7,
        overlap_degree: 0.05,
        epsilon: 1.0,
    })
    .unwrap();
    let samples = d.samples();
    let tr: Vec<LabeledSample> = samples[..530].to_vec();
    let test: Vec<LabeledSample> = samples[530..].to_vec();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 2,
        data_dim: 8,
        entanglement: Entanglement::Crz,
    };
    for seed in 1u64..=5 {
        let t0 = std::time::Instant::now();
        let mut best: Option<(f64, ClassifierModel)> = None;
        for s in 0..3u64 {
            let init = ClassifierModel::random_init(ansatz, 6, seed * 100 + s).unwrap();
            let mut b = OptimizerConfig::spsa(5000, seed * 100 + s);
            b.spsa_a = 5.0;
            let (l2, _) = train(init, &tr, &b).unwrap();
            let acc = l2.accuracy(&tr).unwrap();
            if best.as_ref().map_or(true, |(a, _)| acc > *a) {
                best = Some((acc, l2));
            }
        }
        let (base_acc, mut m) = best.unwrap();
        for stage in 0..3u64 {
            let mut f = OptimizerConfig::spsa(2500, seed * 100 + 0xa1 + stage);
            f.spsa_a = 3.0;
            m = train(m.grow(2).unwrap(), &tr, &f).unwrap().0;
        }
        println!(
            "seed={seed} best_l2_train={base_acc:.3} staged L8 test={:.3} ({:.0}s)",
            m.accuracy(&test).unwrap(),
            t0.elapsed().as_secs_f64()
        );
    }
}
