#![no_main]

use gtw_cli::expr::Expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() < 8 {
        return;
    }
    let (x, rest) = data.split_at(8);
    let x = f64::from_le_bytes(x.try_into().unwrap());
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(e) = Expr::parse(text, &["x", "rho", "u"]) {
        let _ = e.eval(&[x, 1.0, -0.5]);
        let _ = e.eval_or_nan(&[x, x, x]);
    }
});
