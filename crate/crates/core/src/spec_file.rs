//! Line-oriented pair files.
//!
//! ```text
//! # binary expansion
//! dim 1
//! matrix
//! 2
//! digits
//! 0
//! 1
//! ```
//!
//! `#` starts a comment, blank lines are ignored. A file may instead hold the
//! single line `cantor N d`, shorthand for the pair `(N, {0, d})`.

use crate::cantor::CantorPair;
use crate::error::{Error, Result};
use crate::pair::{validate_pair, SelfAffinePair};

#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub pair: SelfAffinePair,
    /// Set when the file used the `cantor N d` shorthand.
    pub cantor: Option<CantorPair>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn numbers(line: usize, text: &str, expected: usize) -> Result<Vec<f64>> {
    let vals = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {t:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != expected {
        return Err(parse_err(line, format!("expected {expected} values, found {}", vals.len())));
    }
    if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
        return Err(parse_err(line, format!("value {v} is not finite")));
    }
    Ok(vals)
}

pub fn parse_spec_file(text: &str) -> Result<PairSpec> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let eof = text.lines().count() + 1;
    let Some(&(first_no, first)) = lines.first() else {
        return Err(parse_err(eof, "empty pair file"));
    };

    if let Some(rest) = first.strip_prefix("cantor") {
        let v = numbers(first_no, rest, 2)?;
        if let Some(&(no, _)) = lines.get(1) {
            return Err(parse_err(no, "unexpected content after cantor line"));
        }
        let cp = CantorPair::new(v[0], v[1])?;
        return Ok(PairSpec { pair: cp.to_pair(), cantor: Some(cp) });
    }

    let dim = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["dim", n] => n
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| parse_err(first_no, format!("invalid dimension {n:?}")))?,
        _ => return Err(parse_err(first_no, "expected `dim n` or `cantor N d`")),
    };
    let mut it = lines.iter().skip(1);
    match it.next() {
        Some(&(_, "matrix")) => {}
        Some(&(no, _)) => return Err(parse_err(no, "expected `matrix`")),
        None => return Err(parse_err(eof, "missing matrix section")),
    }
    let mut matrix = Vec::with_capacity(dim);
    for _ in 0..dim {
        match it.next() {
            Some(&(no, l)) if l != "digits" => matrix.push(numbers(no, l, dim)?),
            Some(&(no, _)) => return Err(parse_err(no, format!("matrix needs {dim} rows"))),
            None => return Err(parse_err(eof, format!("matrix needs {dim} rows"))),
        }
    }
    match it.next() {
        Some(&(_, "digits")) => {}
        Some(&(no, _)) => return Err(parse_err(no, "expected `digits`")),
        None => return Err(parse_err(eof, "missing digits section")),
    }
    let digits = it.map(|&(no, l)| numbers(no, l, dim)).collect::<Result<Vec<_>>>()?;
    if digits.is_empty() {
        return Err(parse_err(eof, "digits section is empty"));
    }
    Ok(PairSpec { pair: validate_pair(&matrix, &digits)?, cantor: None })
}

pub fn parse_pair_spec(text: &str) -> Result<SelfAffinePair> {
    parse_spec_file(text).map(|s| s.pair)
}

/// Renders a pair with shortest round-trip decimals, so parsing the output
/// gives back the same pair bit for bit.
pub fn render_pair(pair: &SelfAffinePair) -> String {
    let n = pair.dim();
    let line = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ");
    let mut out = format!("dim {n}\nmatrix\n");
    for row in pair.matrix().entries().chunks(n) {
        out.push_str(&line(row));
        out.push('\n');
    }
    out.push_str("digits\n");
    for d in pair.digits().digits() {
        out.push_str(&line(d));
        out.push('\n');
    }
    out
}
