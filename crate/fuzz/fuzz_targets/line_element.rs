#![no_main]

use geosym_core::exprfield::Chart;
use geosym_core::geometry::parse_line_element;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let chart = Chart::with_trig(&["rho", "phi", "psi", "theta"], &["phi", "psi", "theta"]).unwrap();
    let _ = parse_line_element(&chart, text);
});
