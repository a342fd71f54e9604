#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = qcbr::io::parse_memory_document(text) {
        // the rebuilt index must cover every stored case
        for case in &doc.memory.cases {
            assert!(!doc.memory.cases_of_class(case.class_label).is_empty());
        }
        let again = serde_json::to_string(&doc).unwrap();
        qcbr::io::parse_memory_document(&again).unwrap();
    }
});
