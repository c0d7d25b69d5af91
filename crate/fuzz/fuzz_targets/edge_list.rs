#![no_main]

use bethe::graph::io::write_edge_list;
use bethe::graph::parse_edge_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(g) = parse_edge_list(text) else { return };
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).unwrap();
    let again = parse_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(again.n(), g.n());
    assert_eq!(again.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
});
