#![no_main]

use ges_core::graph::VariableSpec;
use ges_core::oracle::CiStatement;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let spec = VariableSpec::numbered(&[2, 3, 2, 2, 4, 2]);
    let Ok(s) = CiStatement::parse(text, &spec) else {
        return;
    };
    assert_eq!(CiStatement::parse(&s.format(&spec), &spec).unwrap(), s);
});
