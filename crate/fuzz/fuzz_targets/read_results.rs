#![no_main]

use ges_core::experiment::{read_results, write_results};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_results(data) else { return };
    let mut buf = Vec::new();
    write_results(&mut buf, &rows).unwrap();
    assert_eq!(read_results(&buf[..]).unwrap(), rows);
});
