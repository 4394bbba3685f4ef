//! Text formats: center-instance files and `h` tables.
//!
//! Instance file: first line `n m`, then `n` lines of `m + 1` whitespace-separated reals,
//! each row unit to `1e-6`. Table file: two columns `r h(r)`, `r` ascending from 0.
//! Blank lines and lines starting with `#` are ignored in both.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sampler::HTable;
use crate::sphere::SpherePoint;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_reals(path: &Path, line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("`{tok}` is not a number"),
            })
        })
        .collect()
}

/// Parses an instance from file contents; `path` only labels errors.
pub fn parse_instance(text: &str, path: &Path) -> Result<Instance<f64>> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing `n m` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(hline, format!("header `{header}` is not two integers `n m`")))?;
    let [n, m] = dims[..] else {
        return Err(parse_err(hline, format!("header `{header}` is not two integers `n m`")));
    };
    let mut rows = Vec::with_capacity(n);
    for (row, (line, text)) in lines.by_ref().take(n).enumerate() {
        let v = parse_reals(path, line, text)?;
        if v.len() != m + 1 {
            return Err(parse_err(line, format!("row {} has {} entries, expected m + 1 = {}", row + 1, v.len(), m + 1)));
        }
        let p = SpherePoint::new(v).map_err(|e| match e {
            Error::NotUnit { norm, .. } => {
                parse_err(line, format!("row {} has norm {norm}, not unit to 1e-6", row + 1))
            }
            other => other,
        })?;
        rows.push(p);
    }
    if rows.len() != n {
        return Err(parse_err(hline, format!("header promises {n} rows, found {}", rows.len())));
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, format!("unexpected content after {n} rows")));
    }
    Instance::new(rows)
}

pub fn read_instance(path: &Path) -> Result<Instance<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, path)
}

/// Instance file text; values printed with round-trip precision.
pub fn format_instance(a: &Instance<f64>) -> String {
    let mut out = format!("{} {}\n", a.n(), a.m());
    for r in a.rows() {
        let cells: Vec<String> = r.coords().iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn write_instance(path: &Path, a: &Instance<f64>) -> Result<()> {
    std::fs::write(path, format_instance(a)).map_err(|e| Error::io(path, e))
}

pub fn parse_h_table(text: &str, path: &Path) -> Result<HTable> {
    let mut points = Vec::new();
    for (line, l) in content_lines(text) {
        let v = parse_reals(path, line, l)?;
        let [r, h] = v[..] else {
            return Err(Error::Parse { path: path.to_path_buf(), line, msg: "expected two columns `r h(r)`".into() });
        };
        points.push((r, h));
    }
    HTable::new(points).map_err(|e| Error::Parse { path: path.to_path_buf(), line: 0, msg: e.to_string() })
}

pub fn read_h_table(path: &Path) -> Result<HTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_h_table(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "4 1\n1 0\n-1 0\n0 1\n# comment\n0.6 0.8\n";
        let a = parse_instance(text, Path::new("t")).unwrap();
        assert_eq!((a.n(), a.m()), (4, 1));
        let b = parse_instance(&format_instance(&a), Path::new("t")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors_name_the_row() {
        let err = parse_instance("4 1\n1 0\n-1 0\n0 1.5\n0 1\n", Path::new("bad.txt")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("bad.txt:4"), "{msg}");
        assert!(parse_instance("4 1\n1 0\n-1 0\n0 1\n", Path::new("t")).is_err());
        assert!(parse_instance("4 1\n1 0 0\n", Path::new("t")).is_err());
        assert!(parse_instance("x\n", Path::new("t")).is_err());
    }

    #[test]
    fn h_table_parse() {
        let t = parse_h_table("# r h\n0 2\n0.25 1.5\n0.5 1\n", Path::new("h")).unwrap();
        assert_eq!(t.points().len(), 3);
        assert!((t.eval(0.125) - 1.75).abs() < 1e-15);
        assert!(parse_h_table("0 1 2\n", Path::new("h")).is_err());
        assert!(parse_h_table("0.1 1\n", Path::new("h")).is_err());
    }
}
