/// Rounds to `digits` significant decimal digits.
///
/// Goes through the decimal exponent form so the result is the binary64
/// nearest to the printed digits, which keeps JSON output byte-stable.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}
