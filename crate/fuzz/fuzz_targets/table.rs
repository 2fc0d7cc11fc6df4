#![no_main]
use aoi_core::shs::{dump_table, parse_table};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    // Anything accepted must survive a dump/parse round trip unchanged.
    if let Ok(m) = parse_table(s) {
        let text = dump_table(&m);
        let back = parse_table(&text).expect("dumped table parses");
        assert_eq!(dump_table(&back), text);
    }
});
