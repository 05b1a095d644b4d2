#![no_main]

use ges_core::graph::{format_cpdag, format_dag, parse_cpdag, parse_dag, VariableSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let spec = VariableSpec::numbered(&[2, 3, 2, 2, 4, 2]);
    if let Ok(g) = parse_dag(text, &spec) {
        assert_eq!(parse_dag(&format_dag(&g, &spec), &spec).unwrap(), g);
    }
    if let Ok(c) = parse_cpdag(text, &spec) {
        assert_eq!(parse_cpdag(&format_cpdag(&c, &spec), &spec).unwrap(), c);
    }
});
