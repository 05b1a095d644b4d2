#![no_main]

use ges_core::scoring::{read_schema, write_schema};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = read_schema(text) else { return };
    assert_eq!(read_schema(&write_schema(&spec)).unwrap(), spec);
});
