#![no_main]

use gtw_cli::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        let again = cfg.to_toml().expect("accepted config serializes");
        assert_eq!(ExperimentConfig::from_toml(&again).expect("round trip parses"), cfg);
    }
});
