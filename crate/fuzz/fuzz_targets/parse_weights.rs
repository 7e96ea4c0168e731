#![no_main]

use libfuzzer_sys::fuzz_target;
use pcf_spectral::definition::parse_weights;
use pcf_spectral::spectra::MeasureWeights;

fuzz_target!(|s: &str| {
    if let Ok(w) = parse_weights(s) {
        assert!(w.iter().all(|x| x.is_finite()));
        let _ = MeasureWeights::new(w);
    }
});
