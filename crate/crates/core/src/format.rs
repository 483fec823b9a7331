//! Number formatting shared by the CSV emitters.

/// Shortest decimal string that parses back to the same `f64`.
pub fn shortest(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else if value == f64::INFINITY {
        "inf".to_string()
    } else if value == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{value}")
    }
}
