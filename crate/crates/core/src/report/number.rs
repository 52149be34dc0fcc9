//! Decimal-string rounding for rendered values.

/// Formats `value` with `decimals` fraction digits, rounding half-up on the
/// shortest round-trip decimal representation. With `percent`, the decimal
/// point is shifted two places first, so no binary rounding is introduced
/// by the scaling.
pub fn format_fixed(value: f64, decimals: usize, percent: bool) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let repr = format!("{}", value.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes()).map(|b| b - b'0').collect();
    let mut point = int_part.len();
    if percent {
        point += 2;
        while digits.len() < point {
            digits.push(0);
        }
    }
    while digits.len() < point + decimals + 1 {
        digits.push(0);
    }

    let round_up = digits[point + decimals] >= 5;
    digits.truncate(point + decimals);
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                point += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }

    let mut int_digits: &[u8] = &digits[..point];
    while int_digits.len() > 1 && int_digits[0] == 0 {
        int_digits = &int_digits[1..];
    }
    let mut out = String::new();
    if value.is_sign_negative() && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    if int_digits.is_empty() {
        out.push('0');
    }
    out.extend(int_digits.iter().map(|d| char::from(b'0' + d)));
    if decimals > 0 {
        out.push('.');
        out.extend(digits[point..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

/// p-values: fixed 4 decimals, scientific below 1e-4.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}
