use qcbr::optim::OptimizerConfig;
use qcbr::swp::{classifier_qubits, generate_dataset, DatasetParams};
use qcbr::vqc::{train, AnsatzConfig, ClassifierModel, Entanglement, LabeledSample};

#[test]
#[ignore]
fn recipe_probe() {
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
    // Mimic the cycle's final retrain: train on the first 530, test on the last 50.
    let tr: Vec<LabeledSample> = samples[..530].to_vec();
    let test: Vec<LabeledSample> = samples[530..].to_vec();
    let ansatz = AnsatzConfig {
        num_qubits: classifier_qubits(4, 3),
        num_layers: 2,
        data_dim: 8,
        entanglement: Entanglement::Crz,
    };
    for seed in [1u64, 2, 3] {
        // Current cycle recipe: L2 6000 a5 -> grow(2) 3000 a3.
        let t0 = std::time::Instant::now();
        let init = ClassifierModel::random_init(ansatz, 6, seed).unwrap();
        let mut b = OptimizerConfig::spsa(6000, seed);
        b.spsa_a = 5.0;
        let (l2, _) = train(init, &tr, &b).unwrap();
        let mut f = OptimizerConfig::spsa(3000, seed ^ 0x5f5f);
        f.spsa_a = 3.0;
        let (l4, _) = train(l2.grow(2).unwrap(), &tr, &f).unwrap();
        println!(
            "seed={seed} current L4: test={:.3} ({:.0}s)",
            l4.accuracy(&test).unwrap(),
            t0.elapsed().as_secs_f64()
        );
        // Staged to L8: continue 3000 a3 per stage.
        let t1 = std::time::Instant::now();
        let mut m = l4.clone();
        for stage in 0..2 {
            let mut f2 = OptimizerConfig::spsa(3000, seed ^ (0xa1 + stage));
            f2.spsa_a = 3.0;
            m = train(m.grow(2).unwrap(), &tr, &f2).unwrap().0;
        }
        println!(
            "seed={seed} staged L8: test={:.3} (+{:.0}s)",
            m.accuracy(&test).unwrap(),
            t1.elapsed().as_secs_f64()
        );
        // Bigger L4 budget: 12000 base + 6000 fine.
        let t2 = std::time::Instant::now();
        let init2 = ClassifierModel::random_init(ansatz, 6, seed).unwrap();
        let mut b2 = OptimizerConfig::spsa(12000, seed);
        b2.spsa_a = 5.0;
        let (l2b, _) = train(init2, &tr, &b2).unwrap();
        let mut f3 = OptimizerConfig::spsa(6000, seed ^ 0x5f5f);
        f3.spsa_a = 3.0;
        let (l4b, _) = train(l2b.grow(2).unwrap(), &tr, &f3).unwrap();
        println!(
            "seed={seed} big L4: test={:.3} ({:.0}s)",
            l4b.accuracy(&test).unwrap(),
            t2.elapsed().as_secs_f64()
        );
    }
}
