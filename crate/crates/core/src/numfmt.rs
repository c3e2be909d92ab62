//! printf-compatible float rendering (`%.Ne`, `%.17g`) for golden outputs.

/// `%.{precision}e`: mantissa with `precision` decimals, exponent with an
/// explicit sign and at least two digits.
pub fn sci(x: f64, precision: usize) -> String {
    if !x.is_finite() {
        return non_finite(x);
    }
    let s = format!("{:.*e}", precision, x);
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!(
        "{mantissa}e{}{:02}",
        if exp < 0 { '-' } else { '+' },
        exp.abs()
    )
}

/// `%.17g`
pub fn g17(x: f64) -> String {
    general(x, 17)
}

/// `%.{precision}g`
pub fn general(x: f64, precision: usize) -> String {
    if !x.is_finite() {
        return non_finite(x);
    }
    let p = precision.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    // Exponent after rounding to p significant digits.
    let rounded = format!("{:.*e}", p - 1, x);
    let exp: i32 = rounded.split_once('e').unwrap().1.parse().unwrap();
    if exp < -4 || exp >= p as i32 {
        let (mantissa, _) = rounded.split_once('e').unwrap();
        let mantissa = strip_zeros(mantissa);
        format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn non_finite(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
