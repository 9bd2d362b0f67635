#![no_main]

use critnls::{AngularFunction, Preset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|name: &str| {
    let Ok(preset) = name.parse::<Preset>() else { return };
    assert_eq!(preset.to_string().parse::<Preset>().unwrap(), preset);
    for dim in [1, 2] {
        let _ = AngularFunction::from_preset(preset, dim);
    }
});
