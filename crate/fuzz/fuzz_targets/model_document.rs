#![no_main]

use libfuzzer_sys::fuzz_target;

// Untrusted model files must parse-or-error, never panic; a document that
// parses must survive a serialize/parse round trip.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = qcbr::io::parse_model_document(text) {
        let again = serde_json::to_string(&doc).unwrap();
        qcbr::io::parse_model_document(&again).unwrap();
    }
});
