//! Lossless decimal formatting of doubles.

/// Formats `v` like C's `%.17g`: 17 significant digits, positional notation
/// for moderate exponents, trailing zeros removed.
///
/// Seventeen digits are enough for any `f64` to survive a text round trip.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }

    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");

    if (-4..17).contains(&exp) {
        let digits = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", digits, v))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", mantissa, sign, exp.abs())
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}
