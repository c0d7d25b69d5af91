#![no_main]

use bethe::model::{signal_spectrum, ModelFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(file) = ModelFile::from_json(text) else { return };
    assert_eq!(ModelFile::from_json(&file.to_json()).unwrap(), file);
    // Keep the spectrum small; validation alone covers larger models.
    if let Ok(params) = file.validate() {
        if params.r() <= 16 {
            let _ = signal_spectrum(&params);
        }
    }
});
