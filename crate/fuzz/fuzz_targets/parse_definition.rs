//! Definition documents, followed by the checks a CLI run performs on a
//! successfully parsed one.

#![no_main]

use libfuzzer_sys::fuzz_target;
use pcf_spectral::definition::parse_definition;
use pcf_spectral::pipeline::Model;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(def) = parse_definition(text) else {
        return;
    };
    // canonical form must parse back to the same document
    let canonical = def.canonical_json();
    let again = parse_definition(&canonical).expect("canonical form reparses");
    assert_eq!(again.canonical_json(), canonical);
    assert_eq!(again.structure, def.structure);

    if let Ok(model) = Model::from_definition(&def, None) {
        let _ = model.level(1);
    }
});
