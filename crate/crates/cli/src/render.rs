//! Number and set formatting shared by the text and JSON reports.

use serde_json::Value;

pub const SIGNIFICANT: usize = 9;

/// `v` with nine significant digits: fixed notation for moderate
/// magnitudes, scientific otherwise, trailing zeros dropped.
pub fn real(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding can carry into a new digit, e.g. 9.9999999996
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{:.*e}", SIGNIFICANT - 1, v);
        let (mantissa, e) = s.split_once('e').expect("scientific notation");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// The JSON number with exactly the digits [`real`] prints.
pub fn num(v: f64) -> Value {
    let text = real(v);
    text.parse::<f64>().ok().and_then(serde_json::Number::from_f64).map(Value::Number).unwrap_or(Value::Null)
}

pub fn set<S: AsRef<str>>(items: &[S]) -> String {
    let names: Vec<&str> = items.iter().map(AsRef::as_ref).collect();
    format!("{{{}}}", names.join(", "))
}
