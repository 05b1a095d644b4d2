#![no_main]

use ges_core::datagen::{parse_model, write_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(model) = parse_model(text) else { return };
    assert_eq!(parse_model(&write_model(&model)).unwrap(), model);
});
