use std::fmt::Write;

/// Appends `value` with six decimal places, trailing zeros and a trailing
/// dot removed. Absolute rounding error is at most 5e-7.
pub(crate) fn push_decimal(out: &mut String, value: f64) {
    let start = out.len();
    write!(out, "{value:.6}").expect("writing to a String cannot fail");
    if out[start..].contains('.') {
        let trimmed = out[start..].trim_end_matches('0').trim_end_matches('.').len();
        out.truncate(start + trimmed);
    }
    if &out[start..] == "-0" {
        out.truncate(start);
        out.push('0');
    }
}
