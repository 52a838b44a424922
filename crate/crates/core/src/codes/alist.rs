//! The alist exchange format for sparse parity-check matrices.
//!
//! ```text
//! N M                      (columns, rows)
//! max_col_degree max_row_degree
//! col degrees (N values)
//! row degrees (M values)
//! N lines: 1-based row positions of each column, zero-padded
//! M lines: 1-based column positions of each row, zero-padded
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf2::BinaryMatrix;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    total: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            total: text.lines().count(),
        }
    }

    /// Next non-blank line as integers, with its 1-based line number.
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        loop {
            let Some((idx, line)) = self.inner.next() else {
                return Err(Error::Parse {
                    line: self.total + 1,
                    message: format!("unexpected end of input while reading {what}"),
                });
            };
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("`{tok}` is not a non-negative integer ({what})"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((line_no, values));
        }
    }

    fn expect_len(&mut self, what: &str, count: usize) -> Result<(usize, Vec<usize>)> {
        let (line, values) = self.next_ints(what)?;
        if values.len() != count {
            return Err(Error::Parse {
                line,
                message: format!("{what}: expected {count} values, found {}", values.len()),
            });
        }
        Ok((line, values))
    }
}

pub fn load_alist(text: &str) -> Result<BinaryMatrix> {
    let mut lines = Lines::new(text);
    let (_, dims) = lines.expect_len("dimensions", 2)?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "dimensions must be positive".into(),
        });
    }
    let (_, max_deg) = lines.expect_len("maximum degrees", 2)?;
    let (col_line, col_deg) = lines.expect_len("column degrees", n)?;
    let (row_line, row_deg) = lines.expect_len("row degrees", m)?;
    if col_deg.iter().max().copied().unwrap_or(0) > max_deg[0] {
        return Err(Error::InconsistentDegrees(format!(
            "column degree exceeds declared maximum {} (line {col_line})",
            max_deg[0]
        )));
    }
    if row_deg.iter().max().copied().unwrap_or(0) > max_deg[1] {
        return Err(Error::InconsistentDegrees(format!(
            "row degree exceeds declared maximum {} (line {row_line})",
            max_deg[1]
        )));
    }

    let mut from_cols = BTreeSet::new();
    for (c, &deg) in col_deg.iter().enumerate() {
        let (line, entries) = lines.next_ints("column adjacency")?;
        let rows = nonzero_entries(&entries, m, line)?;
        if rows.len() != deg {
            return Err(Error::InconsistentDegrees(format!(
                "column {} lists {} rows but its degree is {deg} (line {line})",
                c + 1,
                rows.len()
            )));
        }
        from_cols.extend(rows.into_iter().map(|r| (r, c)));
    }
    let mut from_rows = BTreeSet::new();
    for (r, &deg) in row_deg.iter().enumerate() {
        let (line, entries) = lines.next_ints("row adjacency")?;
        let cols = nonzero_entries(&entries, n, line)?;
        if cols.len() != deg {
            return Err(Error::InconsistentDegrees(format!(
                "row {} lists {} columns but its degree is {deg} (line {line})",
                r + 1,
                cols.len()
            )));
        }
        from_rows.extend(cols.into_iter().map(|c| (r, c)));
    }
    if from_cols != from_rows {
        return Err(Error::InconsistentDegrees(
            "column and row adjacency lists describe different matrices".into(),
        ));
    }

    let mut h = BinaryMatrix::zeros(m, n)?;
    for (r, c) in from_rows {
        h.set(r, c, true);
    }
    Ok(h)
}

fn nonzero_entries(entries: &[usize], bound: usize, line: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(entries.len());
    for &e in entries.iter().filter(|&&e| e != 0) {
        if e > bound {
            return Err(Error::Parse {
                line,
                message: format!("position {e} exceeds dimension {bound}"),
            });
        }
        if out.contains(&(e - 1)) {
            return Err(Error::Parse {
                line,
                message: format!("position {e} listed twice"),
            });
        }
        out.push(e - 1);
    }
    Ok(out)
}

/// Serializes `h` with zero padding up to the maximum degree.
pub fn save_alist(h: &BinaryMatrix) -> String {
    let (m, n) = (h.rows(), h.cols());
    let row_lists: Vec<Vec<usize>> = (0..m).map(|r| h.row(r).iter_ones().collect()).collect();
    let mut col_lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, cols) in row_lists.iter().enumerate() {
        for &c in cols {
            col_lists[c].push(r);
        }
    }
    let max_col = col_lists.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = row_lists.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(col_lists.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(row_lists.iter().map(Vec::len)));
    for (lists, width) in [(&col_lists, max_col), (&row_lists, max_row)] {
        for list in lists {
            let padded = list.iter().map(|&i| i + 1).chain(std::iter::repeat(0));
            let _ = writeln!(out, "{}", join(padded.take(width)));
        }
    }
    out
}

fn join(values: impl Iterator<Item = usize>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::rank;

    #[test]
    fn identity_round_trip() {
        let id = BinaryMatrix::identity(3).unwrap();
        let text = save_alist(&id);
        assert_eq!(text, "3 3\n1 1\n1 1 1\n1 1 1\n1\n2\n3\n1\n2\n3\n");
        assert_eq!(load_alist(&text).unwrap(), id);
    }

    #[test]
    fn zero_padding_is_ignored() {
        // 2×3 matrix [[1,1,0],[0,1,1]]
        let text = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let h = load_alist(text).unwrap();
        assert_eq!(h.to_dense(), vec![vec![1, 1, 0], vec![0, 1, 1]]);
        assert_eq!(load_alist(&save_alist(&h)).unwrap(), h);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let text = save_alist(&BinaryMatrix::identity(3).unwrap());
        let truncated: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(matches!(load_alist(&truncated), Err(Error::Parse { .. })));
        assert!(matches!(load_alist(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn garbage_token_reports_line() {
        let err = load_alist("3 3\n1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn disagreeing_lists_rejected() {
        // column lists say identity, row lists say anti-diagonal
        let text = "2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n";
        assert!(matches!(load_alist(text), Err(Error::InconsistentDegrees(_))));
    }

    #[test]
    fn degree_count_mismatch_rejected() {
        let text = "2 2\n1 1\n1 1\n1 1\n1 2\n2\n1\n2\n";
        assert!(load_alist(text).is_err());
    }

    #[test]
    fn shipped_5g_asset_loads_with_full_rank() {
        let h = load_alist(super::super::FIVEG_ALIST).unwrap();
        assert_eq!((h.rows(), h.cols()), (66, 132));
        assert_eq!(rank(&h), 66);
    }
}
