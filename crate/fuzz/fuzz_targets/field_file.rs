#![no_main]

use gtw_core::io::{read_field, write_field};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(field) = read_field(text) {
        // anything accepted must write back and re-read to the same text
        let again = write_field(&field).expect("accepted field writes");
        let back = read_field(&again).expect("written field reads");
        assert_eq!(write_field(&back).unwrap(), again);
    }
});
