//! Plain-text matrix format.
//!
//! ```text
//! 7 4
//! 1000110
//! 0100101
//! 0010011
//! 0001111
//! ```
//!
//! The header is `n k`; each of the `k` rows lists `x_1..x_n` left to right.

use super::{check_len, word_to_string, BinMatrix, GeneratorMatrix};
use crate::error::{Error, Result};

pub(crate) fn parse_row(s: &str, line: usize) -> Result<u32> {
    s.chars().try_fold(0u32, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::Parse {
            line,
            msg: format!("unexpected character {other:?}"),
        }),
    })
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse {
        line: 1,
        msg: format!("expected header \"n k\", got {line:?}"),
    };
    let (n, k) = line.split_once(' ').ok_or_else(bad)?;
    let n: usize = n.parse().map_err(|_| bad())?;
    let k: usize = k.parse().map_err(|_| bad())?;
    Ok((n, k))
}

/// Parses a matrix without any rank requirement.
pub fn parse_matrix(text: &str) -> Result<BinMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let (n, k) = parse_header(header)?;
    check_len(n)?;
    if k == 0 || k > n {
        return Err(Error::Parse {
            line: 1,
            msg: format!("need 1 <= k <= n, got n = {n}, k = {k}"),
        });
    }
    let mut rows = Vec::with_capacity(k);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        if rows.len() == k {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {k} rows, found more"),
            });
        }
        if line.len() != n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("row has {} characters, expected {n}", line.len()),
            });
        }
        rows.push(parse_row(line, lineno)?);
    }
    if rows.len() != k {
        return Err(Error::Parse {
            line: rows.len() + 2,
            msg: format!("expected {k} rows, found {}", rows.len()),
        });
    }
    BinMatrix::new(n, rows)
}

/// Parses a matrix and requires it to have full rank `k`.
pub fn parse_generator(text: &str) -> Result<GeneratorMatrix> {
    GeneratorMatrix::new(parse_matrix(text)?)
}

pub fn write_matrix(m: &BinMatrix) -> String {
    let mut out = format!("{} {}\n", m.n(), m.k());
    for &r in m.rows() {
        out.push_str(&word_to_string(r, m.n()));
        out.push('\n');
    }
    out
}
