#![no_main]

use libfuzzer_sys::fuzz_target;
use tp53_classify::dataset::{fit_encoder, load_records, write_records};

fuzz_target!(|data: &[u8]| {
    let Ok(records) = load_records(data) else {
        return;
    };
    if let Ok(text) = write_records(&records) {
        assert_eq!(load_records(text.as_bytes()).expect("written CSV reloads"), records);
    }
    if let Ok(encoder) = fit_encoder(&records) {
        for r in &records {
            // unlabeled rows are featurized but have no target
            let x = encoder.encode_features(r).expect("fitted rows encode");
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
            if !r.cancer.is_empty() {
                let ex = encoder.encode(r).expect("labeled rows encode");
                assert_eq!(encoder.decode_label(ex.t), r.cancer);
            }
        }
    }
});
