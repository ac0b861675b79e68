//! Line-oriented chain text format:
//!
//! ```text
//! # comment
//! states <N>
//! pi <p_0> ... <p_{N-1}>
//! row <i> <P(i,0)> ... <P(i,N-1)>      (one line per state, i is 0-based)
//! ```

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::ReversibleChain;
use crate::error::{Error, Result};
use crate::export::fmt_f64;

pub fn load_chain(path: impl AsRef<Path>) -> Result<ReversibleChain> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_chain(&text, &path.display().to_string())
}

pub fn save_chain(chain: &ReversibleChain, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_chain(chain))?;
    Ok(())
}

pub fn write_chain(chain: &ReversibleChain) -> String {
    let n = chain.size();
    let mut out = format!("# {}\nstates {n}\npi", chain.label());
    for &p in chain.stationary() {
        out.push(' ');
        out.push_str(&fmt_f64(p));
    }
    out.push('\n');
    for x in 0..n {
        out.push_str(&format!("row {x}"));
        for y in 0..n {
            out.push(' ');
            out.push_str(&fmt_f64(chain.p(x, y)));
        }
        out.push('\n');
    }
    out
}

pub fn parse_chain(text: &str, label: &str) -> Result<ReversibleChain> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `states <N>` line".into()))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("states") {
        return Err(parse_err(line, format!("expected `states <N>`, found `{header}`")));
    }
    let n: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| parse_err(line, "state count must be a positive integer".into()))?;
    if tokens.next().is_some() {
        return Err(parse_err(line, "trailing tokens after state count".into()));
    }

    let (line, pi_line) = lines
        .next()
        .ok_or_else(|| parse_err(line + 1, "missing `pi` line".into()))?;
    let mut tokens = pi_line.split_whitespace();
    if tokens.next() != Some("pi") {
        return Err(parse_err(line, format!("expected `pi ...`, found `{pi_line}`")));
    }
    let pi = parse_floats(tokens, n, line)?;

    let mut matrix = DMatrix::zeros(n, n);
    let mut seen = vec![false; n];
    let mut last_line = line;
    for _ in 0..n {
        let (line, row_line) = lines
            .next()
            .ok_or_else(|| parse_err(last_line + 1, format!("expected {n} `row` lines")))?;
        last_line = line;
        let mut tokens = row_line.split_whitespace();
        if tokens.next() != Some("row") {
            return Err(parse_err(line, format!("expected `row <i> ...`, found `{row_line}`")));
        }
        let idx: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|&i| i < n)
            .ok_or_else(|| parse_err(line, format!("row index must be in 0..{n}")))?;
        if seen[idx] {
            return Err(parse_err(line, format!("duplicate row {idx}")));
        }
        seen[idx] = true;
        for (y, v) in parse_floats(tokens, n, line)?.into_iter().enumerate() {
            matrix[(idx, y)] = v;
        }
    }
    if let Some((line, extra)) = lines.next() {
        return Err(parse_err(line, format!("unexpected content `{extra}` after the last row")));
    }
    ReversibleChain::new(matrix, pi, label)
}

fn parse_floats<'a>(
    tokens: impl Iterator<Item = &'a str>,
    expected: usize,
    line: usize,
) -> Result<Vec<f64>> {
    let values = tokens
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{t}` is not a decimal number"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!("expected {expected} values, found {}", values.len()),
        });
    }
    Ok(values)
}
