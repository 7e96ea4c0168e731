#![no_main]

use libfuzzer_sys::fuzz_target;
use pcf_spectral::functions::FunctionSpec;

fuzz_target!(|s: &str| {
    if let Ok(spec) = FunctionSpec::parse(s) {
        assert!(spec.level() <= pcf_spectral::pipeline::DEFAULT_MAX_LEVEL);
    }
});
