//! Plain-text SHS tables: one row per transition, `l, rate, from, to, reset`,
//! preceded by `#` metadata lines describing the states.
//!
//! ```text
//! # model: mm12-ps
//! # age_dim: 3
//! # source_of_interest: 1
//! # state 0: label=0 b=[1,0,0]
//! l, rate, from, to, reset
//! 0, 1, 0, 1, [x0,0,0]
//! ```

use std::fmt::Write as _;

use super::{Reset, ResetMap, ShsError, ShsModel, State, Transition};

pub const TABLE_HEADER: &str = "l, rate, from, to, reset";

pub fn dump_table(m: &ShsModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# model: {}", m.name());
    let _ = writeln!(s, "# age_dim: {}", m.age_dim());
    let _ = writeln!(s, "# source_of_interest: {}", m.source_of_interest());
    for (q, st) in m.states().iter().enumerate() {
        let b: Vec<&str> = st.growth.iter().map(|g| if *g { "1" } else { "0" }).collect();
        let _ = writeln!(s, "# state {q}: label={} b=[{}]", st.label, b.join(","));
    }
    let _ = writeln!(s, "{TABLE_HEADER}");
    for t in m.transitions() {
        let _ = writeln!(s, "{}, {}, {}, {}, {}", t.id, t.rate, t.from, t.to, t.reset);
    }
    s
}

fn err(line: usize, msg: impl Into<String>) -> ShsError {
    ShsError::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, ShsError> {
    s.trim()
        .parse()
        .map_err(|_| err(line, format!("invalid {what} '{}'", s.trim())))
}

fn parse_bracketed(line: usize, s: &str) -> Result<Vec<&str>, ShsError> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| err(line, format!("expected [..], got '{}'", s.trim())))?;
    Ok(inner.split(',').map(str::trim).collect())
}

fn parse_reset(line: usize, s: &str) -> Result<ResetMap, ShsError> {
    parse_bracketed(line, s)?
        .into_iter()
        .map(|tok| match tok {
            "0" => Ok(Reset::Zero),
            _ => tok
                .strip_prefix('x')
                .and_then(|i| i.parse().ok())
                .map(Reset::Copy)
                .ok_or_else(|| err(line, format!("invalid reset entry '{tok}'"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(ResetMap)
}

fn parse_state(line: usize, expected: usize, key: &str, value: &str) -> Result<State, ShsError> {
    let q: usize = parse_num(line, "state index", key.trim_start_matches("state"))?;
    if q != expected {
        return Err(err(line, format!("state {q} out of order, expected {expected}")));
    }
    let mut label = None;
    let mut growth = None;
    for field in value.split_whitespace() {
        if let Some(l) = field.strip_prefix("label=") {
            label = Some(l.to_string());
        } else if let Some(b) = field.strip_prefix("b=") {
            growth = Some(
                parse_bracketed(line, b)?
                    .into_iter()
                    .map(|t| match t {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        _ => Err(err(line, format!("growth entries must be 0 or 1, got '{t}'"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            );
        } else {
            return Err(err(line, format!("unexpected state field '{field}'")));
        }
    }
    Ok(State {
        label: label.ok_or_else(|| err(line, "state is missing label="))?,
        growth: growth.ok_or_else(|| err(line, "state is missing b="))?,
    })
}

/// Inverse of [`dump_table`]; the result is validated like any model.
pub fn parse_table(text: &str) -> Result<ShsModel, ShsError> {
    let mut name = String::from("table");
    let mut age_dim = None;
    let mut soi = 1usize;
    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut seen_header = false;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(comment) = s.strip_prefix('#') {
            let Some((key, value)) = comment.split_once(':') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "model" => name = value.to_string(),
                "age_dim" => age_dim = Some(parse_num(line, "age_dim", value)?),
                "source_of_interest" => soi = parse_num(line, "source_of_interest", value)?,
                _ if key.starts_with("state") => states.push(parse_state(line, states.len(), key, value)?),
                _ => {}
            }
            continue;
        }
        if !seen_header {
            let cols: Vec<&str> = s.split(',').map(str::trim).collect();
            if cols != ["l", "rate", "from", "to", "reset"] {
                return Err(err(line, format!("expected header '{TABLE_HEADER}'")));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = s.splitn(5, ',').collect();
        if fields.len() != 5 {
            return Err(err(line, "expected 5 columns"));
        }
        transitions.push(Transition {
            id: parse_num(line, "transition id", fields[0])?,
            rate: parse_num(line, "rate", fields[1])?,
            from: parse_num(line, "from state", fields[2])?,
            to: parse_num(line, "to state", fields[3])?,
            reset: parse_reset(line, fields[4])?,
        });
    }
    if !seen_header {
        return Err(err(text.lines().count().max(1), "missing transition header"));
    }
    let age_dim = age_dim.ok_or_else(|| err(1, "missing '# age_dim:' line"))?;
    ShsModel::new(name, states, age_dim, transitions, soi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{ClosedFormId, RateParams};
    use crate::shs::build_finite_model;

    #[test]
    fn table_one_layout() {
        let m = build_finite_model(ClosedFormId::Mm12Ps, &RateParams::new(1.0, 2.0).unwrap()).unwrap();
        let text = dump_table(&m);
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(
            rows,
            vec![
                "l, rate, from, to, reset",
                "0, 1, 0, 1, [x0,0,0]",
                "1, 2, 1, 0, [x1,0,0]",
                "2, 1, 1, 2, [x0,x1,0]",
                "3, 1, 2, 1, [x1,x2,0]",
                "4, 1, 2, 1, [x2,x2,0]",
                "5, 1, 2, 2, [x0,x1,x2]",
            ]
        );
        assert_eq!(parse_table(&text).unwrap(), m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "# age_dim: 2\n# state 0: label=a b=[1,1]\nl, rate, from, to, reset\n0, fast, 0, 0, [x0,x1]\n";
        assert_eq!(
            parse_table(bad),
            Err(ShsError::Parse {
                line: 4,
                msg: "invalid rate 'fast'".into()
            })
        );
        assert!(matches!(parse_table(""), Err(ShsError::Parse { .. })));
        let bad_reset = "# age_dim: 1\n# state 0: label=a b=[1]\nl, rate, from, to, reset\n0, 1, 0, 0, [y]\n";
        assert!(matches!(parse_table(bad_reset), Err(ShsError::Parse { line: 4, .. })));
    }
}
