/// Formats a float with 17 significant digits (round-trip exact), e.g. `9.0909090909090906e-1`.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}
