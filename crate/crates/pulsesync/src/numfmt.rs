//! Deterministic decimal formatting for output files.

/// Shortest decimal that parses back to the same `f64` (at most 17
/// significant digits). Scientific notation below 1e-5 and from 1e16 on.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 2.5e-7, -1.234e20, 1e16, 99999.5, f64::MIN_POSITIVE, f64::MAX] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn chooses_notation() {
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(3.0), "3");
        assert_eq!(fmt_f64(1e-6), "1e-6");
        assert_eq!(fmt_f64(1.5e17), "1.5e17");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn at_most_seventeen_digits() {
        let s = fmt_f64(0.1 + 0.2);
        assert!(s.chars().filter(|c| c.is_ascii_digit()).count() <= 18, "{s}");
    }
}
