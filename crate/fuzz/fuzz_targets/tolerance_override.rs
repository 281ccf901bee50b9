#![no_main]

use gtw_cli::config::Tolerances;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut t = Tolerances::default();
    if t.apply_override(text).is_err() {
        assert_eq!(t, Tolerances::default(), "a rejected override must not change anything");
    }
});
