#![no_main]

use libfuzzer_sys::fuzz_target;
use tp53_classify::pipeline::parse_manual_fields;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let assignments: Vec<&str> = text.split('\n').collect();
    let _ = parse_manual_fields(&assignments);
});
