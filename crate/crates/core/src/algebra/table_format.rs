//! Text encoding of Cayley tables.
//!
//! ```text
//! group 3
//! 0 1 2
//! 1 2 0
//! 2 0 1
//! ```
//!
//! Rings use a `ring <order>` header followed by an `add` block and a `mul`
//! block in the same row format. Anything after the last row is an error.

use thiserror::Error;

use super::{AlgebraError, FiniteGroup, FiniteRing};

#[derive(Debug, Error)]
pub enum TableParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error(transparent)]
    Invalid(#[from] AlgebraError),
}

/// Either structure a table file can describe.
#[derive(Debug, Clone)]
pub enum TableStructure {
    Group(FiniteGroup),
    Ring(FiniteRing),
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), TableParseError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| TableParseError::Truncated(what.to_string()))
    }

    fn expect_end(&mut self) -> Result<(), TableParseError> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(TableParseError::Syntax {
                    line: i + 1,
                    message: format!("trailing content `{}`", l.trim()),
                });
            }
        }
        Ok(())
    }

    fn rows(&mut self, order: usize) -> Result<Vec<Vec<usize>>, TableParseError> {
        let mut rows = Vec::with_capacity(order);
        for r in 0..order {
            let (line, text) = self.next_line(&format!("row {r} of {order}"))?;
            let row = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| TableParseError::Syntax {
                        line,
                        message: format!("`{t}` is not an element index"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != order {
                return Err(TableParseError::Syntax {
                    line,
                    message: format!("expected {order} entries, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

fn header(line: usize, text: &str) -> Result<(String, usize), TableParseError> {
    let mut parts = text.split_whitespace();
    let kind = parts.next().unwrap_or_default().to_string();
    let order = parts
        .next()
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| TableParseError::Syntax { line, message: "expected `<kind> <order>`".into() })?;
    if parts.next().is_some() {
        return Err(TableParseError::Syntax { line, message: "trailing tokens in header".into() });
    }
    Ok((kind, order))
}

pub fn parse_table(text: &str) -> Result<TableStructure, TableParseError> {
    let mut lines = Lines::new(text);
    let (line, first) = lines.next_line("header")?;
    let (kind, order) = header(line, first)?;
    match kind.as_str() {
        "group" => {
            let rows = lines.rows(order)?;
            lines.expect_end()?;
            Ok(TableStructure::Group(FiniteGroup::from_table(order, &rows)?))
        }
        "ring" => {
            let mut block = |name: &str| -> Result<Vec<Vec<usize>>, TableParseError> {
                let (line, tag) = lines.next_line(name)?;
                if tag != name {
                    return Err(TableParseError::Syntax { line, message: format!("expected `{name}`") });
                }
                lines.rows(order)
            };
            let add = block("add")?;
            let mul = block("mul")?;
            lines.expect_end()?;
            Ok(TableStructure::Ring(FiniteRing::from_tables(format!("ring{order}"), order, &add, &mul)?))
        }
        other => Err(TableParseError::Syntax { line, message: format!("unknown structure kind `{other}`") }),
    }
}

pub fn parse_group(text: &str) -> Result<FiniteGroup, TableParseError> {
    match parse_table(text)? {
        TableStructure::Group(g) => Ok(g),
        TableStructure::Ring(_) => Err(TableParseError::Syntax { line: 1, message: "expected a group table".into() }),
    }
}

fn write_rows(out: &mut String, rows: &[Vec<usize>]) {
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

pub fn format_group(g: &FiniteGroup) -> String {
    let mut out = format!("group {}\n", g.order());
    write_rows(&mut out, &g.table_rows());
    out
}

pub fn format_ring(r: &FiniteRing) -> String {
    let mut out = format!("ring {}\nadd\n", r.order());
    write_rows(&mut out, &r.additive_group().table_rows());
    out.push_str("mul\n");
    write_rows(&mut out, &r.mul_rows());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{dihedral_group, ring_mod};

    #[test]
    fn group_round_trip() {
        let d = dihedral_group(3);
        let g = parse_group(&format_group(&d)).unwrap();
        assert_eq!(g.table_rows(), d.table_rows());
    }

    #[test]
    fn ring_round_trip() {
        let z6 = ring_mod(6).unwrap();
        match parse_table(&format_ring(&z6)).unwrap() {
            TableStructure::Ring(r) => assert_eq!(r.mul_rows(), z6.mul_rows()),
            _ => panic!("expected ring"),
        }
    }

    #[test]
    fn rejects_trailing_garbage() {
        let text = "group 1\n0\n\nextra\n";
        let err = parse_table(text).unwrap_err();
        assert!(matches!(err, TableParseError::Syntax { line: 4, .. }), "{err}");
    }

    #[test]
    fn rejects_short_rows_and_bad_tokens() {
        assert!(matches!(parse_table("group 2\n0 1\n1\n"), Err(TableParseError::Syntax { line: 3, .. })));
        assert!(matches!(parse_table("group 2\n0 x\n1 0\n"), Err(TableParseError::Syntax { line: 2, .. })));
        assert!(matches!(parse_table("group 2\n0 1\n"), Err(TableParseError::Truncated(_))));
        assert!(matches!(parse_table("monoid 2\n"), Err(TableParseError::Syntax { line: 1, .. })));
    }

    #[test]
    fn invalid_table_surfaces_axiom_error() {
        let err = parse_table("group 2\n0 1\n1 1\n").unwrap_err();
        assert!(matches!(err, TableParseError::Invalid(AlgebraError::NoInverse { .. })));
    }
}
