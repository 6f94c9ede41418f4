//! Number formatting shared by every CSV and JSON writer.

use serde_json::{Number, Value};

/// Decimal scientific notation with 17 significant digits, enough to
/// round-trip any `f64`.
pub fn float17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// A JSON number printed with 17 significant digits; `null` when not finite.
pub fn json_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    match float17(x).parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::Null,
    }
}

/// `json_float` for optional values.
pub fn json_opt_float(x: Option<f64>) -> Value {
    x.map_or(Value::Null, json_float)
}
