//! Number rendering shared by every CSV and report writer.

/// `x` rounded to 12 significant digits, printed without trailing zeros.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    rounded.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders() {
        assert_eq!(sig12(2.5), "2.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(101.0 / 48.0), "2.10416666667");
        assert_eq!(sig12(3.0), "3");
        assert_eq!(sig12(f64::INFINITY), "inf");
        assert_eq!(sig12(-0.25), "-0.25");
    }
}
