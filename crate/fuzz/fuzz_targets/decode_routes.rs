#![no_main]

use libfuzzer_sys::fuzz_target;
use qcbr::swp::{decode_routes, Patient, ScheduleInstance};

// Route decoding is diagnostic: any bit pattern of the right length must
// decode without panicking, and every patient must land in exactly one group.
fuzz_target!(|data: &[u8]| {
    if data.is_empty() {
        return;
    }
    let n = 2 + (data[0] as usize) % 5;
    let needed = n * (n - 1);
    if data.len() < 1 + needed {
        return;
    }
    let patients = (0..n)
        .map(|i| Patient {
            x: i as f64,
            y: (i * i % 7) as f64,
            tau_start: 480.0 + 30.0 * i as f64,
            tau_end: 510.0 + 30.0 * i as f64,
        })
        .collect();
    let instance = ScheduleInstance {
        patients,
        num_workers: 1 + (data[0] as usize / 8) % n,
        epsilon: 0.0,
        penalty_a: 10.0,
        include_depot: false,
        depot: (0.0, 0.0),
    };
    let bits: Vec<u8> = data[1..1 + needed].iter().map(|b| b & 1).collect();
    let decode = decode_routes(&instance, &bits).unwrap();
    let covered: usize = decode.routes.iter().map(Vec::len).sum();
    assert_eq!(covered, n);
});
