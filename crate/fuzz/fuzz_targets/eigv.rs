#![no_main]

use bethe::eig::io::{decode_eigv, encode_eigv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(m) = decode_eigv(data) else { return };
    let bytes = encode_eigv(&m).unwrap();
    let again = decode_eigv(&bytes).unwrap();
    assert_eq!(again.shape(), m.shape());
    assert!(again.iter().zip(m.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
});
