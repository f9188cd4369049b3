//! `printf("%.12g")`-style float formatting, so CSV bytes do not depend on
//! Rust's shortest-round-trip `Display`.

/// Formats `x` like C's `%.{digits}g`.
pub fn format_g(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // the exponent after rounding to `digits` significant digits
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// `%.12g`, the precision used in every CSV.
pub fn g12(x: f64) -> String {
    format_g(x, 12)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (0.999999999999951, "1"),
            (0.9999999995123, "0.999999999512"),
            (0.9999999999999999, "1"),
            (9.9999999999995e-5, "0.0001"),
            (1e100, "1e+100"),
            (316.0, "316"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x, 12), want, "{x:e}");
        }
        assert_eq!(format_g(0.5, 1), "0.5");
        assert_eq!(format_g(1234.5, 3), "1.23e+03");
    }
}
