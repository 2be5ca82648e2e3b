//! Deterministic decimal rendering of `f64` with 17 significant digits.

/// Renders `x` with exactly 17 significant digits.
///
/// Values with a decimal exponent in `[-5, 16]` use positional notation,
/// everything else scientific notation. Non-finite values render as `NaN`,
/// `inf` or `-inf`.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..=16).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}
