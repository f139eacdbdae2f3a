//! Exact text form of `f64` in C99 `%a` style, e.g. `0x1.8p+1` for 3.

use std::fmt::Write;

/// Shortest `%a` rendering; round-trips through [`parse`] bit for bit.
/// Non-finite values render as `inf`, `-inf` and `nan`.
pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    if x == 0.0 {
        return format!("{sign}0x0p+0");
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1 << 52) - 1);
    let (lead, exp) = if biased == 0 { (0, -1022) } else { (1, biased - 1023) };
    let mut out = format!("{sign}0x{lead}");
    if mantissa != 0 {
        let digits = format!("{mantissa:013x}");
        let _ = write!(out, ".{}", digits.trim_end_matches('0'));
    }
    let _ = write!(out, "p{exp:+}");
    out
}

pub fn parse(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => hexf_parse::parse_hexf64(s, false).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_renderings() {
        assert_eq!(format(3.0), "0x1.8p+1");
        assert_eq!(format(1.0), "0x1p+0");
        assert_eq!(format(-0.0), "-0x0p+0");
        assert_eq!(format(0.1), "0x1.999999999999ap-4");
        assert_eq!(format(f64::MIN_POSITIVE / 2.0), "0x0.8p-1022");
        assert_eq!(format(f64::MAX), "0x1.fffffffffffffp+1023");
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!(parse("0x1.8q+1"), None);
        assert_eq!(parse("1.5"), None);
    }

    proptest! {
        #[test]
        fn round_trips_every_bit_pattern(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let back = parse(&format(x)).unwrap();
            if x.is_nan() {
                prop_assert!(back.is_nan());
            } else {
                prop_assert_eq!(back.to_bits(), bits);
            }
        }
    }
}
