#![no_main]

use libfuzzer_sys::fuzz_target;
use tp53_classify::bpnn::{load_model, save_model};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((net, encoder)) = load_model(text) else {
        return;
    };
    let saved = save_model(&net, &encoder).expect("loaded model saves");
    let (back, enc_back) = load_model(&saved).expect("saved model reloads");
    assert!(back.params().zip(net.params()).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(enc_back, encoder);
});
