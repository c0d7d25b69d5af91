#![no_main]

use bethe::graph::io::write_matrix_market;
use bethe::graph::parse_matrix_market;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(g) = parse_matrix_market(text) else { return };
    let mut buf = Vec::new();
    write_matrix_market(&g, &mut buf).unwrap();
    let again = parse_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(again.n(), g.n());
    assert_eq!(again.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
});
