#![no_main]

use ges_core::scoring::{read_dataset, write_dataset, Cards};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(d) = read_dataset(data, Cards::Infer) else {
        return;
    };
    let mut buf = Vec::new();
    write_dataset(&mut buf, &d).unwrap();
    let back = read_dataset(&buf[..], Cards::Schema(d.spec())).unwrap();
    assert_eq!(back, d);
});
