//! Number formatting shared by the CSV and JSON writers.

/// Formats with 12 significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

/// Rounds to 12 significant digits, so that serializers emit at most that
/// many.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        sig12(x).parse().unwrap_or(x)
    } else {
        x
    }
}
