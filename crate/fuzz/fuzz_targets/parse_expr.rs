#![no_main]

use geosym_core::exprfield::{Chart, Expr};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let chart = Chart::with_trig(&["rho", "phi", "x"], &["phi"]).unwrap();
    if let Ok(e) = Expr::parse(&chart, text) {
        let _ = e.diff(0);
    }
});
