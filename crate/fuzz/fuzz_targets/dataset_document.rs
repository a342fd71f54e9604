#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = qcbr::io::parse_dataset_document(text) {
        // anything accepted must be a usable dataset
        for case in &doc.dataset.cases {
            let _ = case.instance.distance_range();
            let _ = qcbr::swp::instance_features(&case.instance);
        }
        let again = serde_json::to_string(&doc).unwrap();
        qcbr::io::parse_dataset_document(&again).unwrap();
    }
});
