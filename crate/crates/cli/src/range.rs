//! Numeric value lists accepted on the command line.
//!
//! `x` is one value, `a,b,c` an explicit list, `start:stop:count` an
//! inclusive linear grid and `log:start:stop:count` an inclusive log grid.

use thiserror::Error;

/// Guards against grids that would exhaust memory.
pub const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad range '{input}': {reason}")]
pub struct RangeError {
    pub input: String,
    pub reason: String,
}

fn err(input: &str, reason: impl Into<String>) -> RangeError {
    RangeError {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn number(input: &str, s: &str) -> Result<f64, RangeError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| err(input, format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(err(input, format!("'{s}' is not finite")));
    }
    Ok(v)
}

pub fn parse_range(input: &str) -> Result<Vec<f64>, RangeError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(err(input, "empty"));
    }
    let (log, body) = match s.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if !body.contains(':') {
        if log {
            return Err(err(input, "log ranges need start:stop:count"));
        }
        return s.split(',').map(|p| number(input, p)).collect();
    }
    let parts: Vec<&str> = body.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(err(input, "expected start:stop:count"));
    };
    let (start, stop) = (number(input, start)?, number(input, stop)?);
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| err(input, format!("count '{count}' is not a positive integer")))?;
    if count == 0 || count > MAX_POINTS {
        return Err(err(input, format!("count must be in 1..={MAX_POINTS}")));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(err(input, "log ranges need positive endpoints"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
    let step = (b - a) / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count)
        .map(|i| a + step * i as f64)
        .map(|x| if log { x.exp() } else { x })
        .collect();
    // Endpoints exactly as written.
    out[0] = start;
    out[count - 1] = stop;
    Ok(out)
}

/// Comma-separated positive integers, or an integer-valued range.
pub fn parse_counts(input: &str) -> Result<Vec<usize>, RangeError> {
    parse_range(input)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= MAX_POINTS as f64 {
                Ok(v as usize)
            } else {
                Err(err(input, format!("{v} is not a positive integer")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_range("2.5").unwrap(), vec![2.5]);
        assert_eq!(parse_range("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_range("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_range("0.1:0.9:1").unwrap(), vec![0.1]);
        let g = parse_range("log:0.001:1000:7").unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!((g[0], g[6]), (0.001, 1000.0));
        assert!((g[3] - 1.0).abs() < 1e-15);
        let lin = parse_range("0.001:0.05:50").unwrap();
        assert_eq!((lin.len(), lin[49]), (50, 0.05));
    }

    #[test]
    fn rejects() {
        for bad in [
            "",
            "x",
            "1:2",
            "1:2:0",
            "1:2:3:4",
            "log:0:1:3",
            "log:1",
            "1,,2",
            "nan",
            "inf:1:2",
            "1:2:-3",
            "1:2:1e9",
        ] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
        assert!(parse_counts("2.5").is_err());
        assert!(parse_counts("0").is_err());
        assert_eq!(parse_counts("10,20").unwrap(), vec![10, 20]);
        assert_eq!(parse_counts("20:60:3").unwrap(), vec![20, 40, 60]);
    }
}
