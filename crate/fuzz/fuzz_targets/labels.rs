#![no_main]

use bethe::detect::{format_labels, parse_labels};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(labels) = parse_labels(text) {
        assert_eq!(parse_labels(&format_labels(&labels)).unwrap(), labels);
    }
});
