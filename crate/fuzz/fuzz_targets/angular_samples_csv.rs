#![no_main]

use critnls::{fourier_coefficients, AngularFunction};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(nl) = AngularFunction::from_samples_csv(1, text) else { return };
    let _ = fourier_coefficients(&nl, 8);
});
