//! Self-describing text format for [`GridField`]s.
//!
//! ```text
//! #GTWFIELD
//! version 1
//! meta {"model":"barotropic",...}
//! columns x t rho u aux:eq_rho aux:eq_u
//! shape 201 101
//! -2 0 2.718281828459045 1.0367879441171443 0 0
//! ...
//! ```
//!
//! Rows run over `x` fastest, then `t`. Numbers are written in the
//! shortest form that parses back to the same `f64`.

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::field::GridField;

pub const MAGIC: &str = "#GTWFIELD";
pub const VERSION: u32 = 1;
const AUX: &str = "aux:";

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) || name.starts_with(AUX) {
        return Err(Error::invalid(format!("column name {name:?} cannot be written")));
    }
    Ok(())
}

pub fn write_field(field: &GridField) -> Result<String> {
    field.validate()?;
    let mut out = String::new();
    let meta = serde_json::to_string(&field.metadata).map_err(|e| Error::invalid(e.to_string()))?;
    let _ = writeln!(out, "{MAGIC}\nversion {VERSION}\nmeta {meta}");
    out.push_str("columns x t");
    for c in &field.components {
        check_name(c)?;
        let _ = write!(out, " {c}");
    }
    for (a, _) in &field.auxiliary {
        check_name(a)?;
        let _ = write!(out, " {AUX}{a}");
    }
    let _ = writeln!(out, "\nshape {} {}", field.nx(), field.nt());
    for it in 0..field.nt() {
        for ix in 0..field.nx() {
            let k = field.index(ix, it);
            let _ = write!(out, "{} {}", field.xs[ix], field.ts[it]);
            for c in 0..field.components.len() {
                let _ = write!(out, " {}", field.component(c)[k]);
            }
            for (_, a) in &field.auxiliary {
                let _ = write!(out, " {}", a[k]);
            }
            out.push('\n');
        }
    }
    Ok(out)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn keyed<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str, last: usize) -> Result<(usize, &'a str)> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| parse_err(last + 1, format!("missing `{key}` line")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
        .ok_or_else(|| parse_err(n, format!("expected `{key}`")))?;
    Ok((n, rest))
}

fn number(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {s:?}")))
}

/// Parse a field file. Line numbers in errors are 1-based.
pub fn read_field(text: &str) -> Result<GridField> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(parse_err(1, format!("missing `{MAGIC}` header"))),
    }
    let (n, v) = keyed(&mut lines, "version", 1)?;
    if v.trim() != VERSION.to_string() {
        return Err(parse_err(n, format!("unsupported version {v:?}")));
    }
    let (n, meta) = keyed(&mut lines, "meta", n)?;
    let metadata: Map<String, Value> = match serde_json::from_str(meta) {
        Ok(Value::Object(m)) => m,
        Ok(_) => return Err(parse_err(n, "metadata must be a JSON object")),
        Err(e) => return Err(parse_err(n, format!("bad metadata: {e}"))),
    };
    let (n, cols) = keyed(&mut lines, "columns", n)?;
    let cols: Vec<&str> = cols.split_whitespace().collect();
    if cols.len() < 3 || cols[0] != "x" || cols[1] != "t" {
        return Err(parse_err(n, "columns must start with `x t` and name at least one component"));
    }
    let mut components = Vec::new();
    let mut aux_names = Vec::new();
    for c in &cols[2..] {
        match c.strip_prefix(AUX) {
            Some("") => return Err(parse_err(n, "empty auxiliary name")),
            Some(a) => aux_names.push(a.to_string()),
            None if !aux_names.is_empty() => return Err(parse_err(n, "components must precede auxiliary columns")),
            None => components.push(c.to_string()),
        }
    }
    if components.is_empty() {
        return Err(parse_err(n, "no state components"));
    }
    let (n, shape) = keyed(&mut lines, "shape", n)?;
    let dims: Vec<usize> = shape
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|_| parse_err(n, format!("bad shape entry {s:?}"))))
        .collect::<Result<_>>()?;
    let (nx, nt) = match dims[..] {
        [nx, nt] if nx > 0 && nt > 0 => (nx, nt),
        _ => return Err(parse_err(n, "shape must be two positive integers")),
    };
    let total = nx.checked_mul(nt).ok_or_else(|| parse_err(n, "shape overflows"))?;

    let width = cols.len();
    let mut xs = Vec::new();
    let mut ts = Vec::new();
    let mut state: Vec<Vec<f64>> = vec![Vec::new(); components.len()];
    let mut aux: Vec<Vec<f64>> = vec![Vec::new(); aux_names.len()];
    let mut last = n;
    let mut row = 0usize;
    for (n, line) in lines.by_ref() {
        last = n;
        if line.trim().is_empty() {
            continue;
        }
        if row == total {
            return Err(parse_err(n, format!("more than {total} data rows")));
        }
        let values: Vec<f64> = line.split_whitespace().map(|s| number(s, n)).collect::<Result<_>>()?;
        if values.len() != width {
            return Err(parse_err(n, format!("expected {width} values, found {}", values.len())));
        }
        let (ix, it) = (row % nx, row / nx);
        if it == 0 {
            xs.push(values[0]);
        } else if values[0] != xs[ix] {
            return Err(parse_err(
                n,
                format!("x = {} does not match the grid column {}", values[0], xs[ix]),
            ));
        }
        if ix == 0 {
            ts.push(values[1]);
        } else if values[1] != ts[it] {
            return Err(parse_err(
                n,
                format!("t = {} does not match the grid row {}", values[1], ts[it]),
            ));
        }
        for (c, col) in state.iter_mut().enumerate() {
            col.push(values[2 + c]);
        }
        for (a, col) in aux.iter_mut().enumerate() {
            col.push(values[2 + components.len() + a]);
        }
        row += 1;
    }
    if row != total {
        return Err(parse_err(last + 1, format!("truncated: {row} of {total} data rows")));
    }
    let mut field = GridField::new(xs, ts, components, state).map_err(|e| parse_err(last, e.to_string()))?;
    field.metadata = metadata;
    for (name, data) in aux_names.into_iter().zip(aux) {
        field.push_auxiliary(name, data)?;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::linspace;

    fn sample() -> GridField {
        let xs = linspace(-1.0, 1.0, 4);
        let ts = vec![0.0, 0.1, 0.30000000000000004];
        let n = xs.len() * ts.len();
        let a: Vec<f64> = (0..n).map(|k| (k as f64 * 0.7).sin() / 3.0).collect();
        let b: Vec<f64> = (0..n).map(|k| 1e-300 * k as f64 - 7.25e12).collect();
        let mut g = GridField::new(xs, ts, vec!["rho".into(), "u".into()], vec![a.clone(), b]).unwrap();
        g.push_auxiliary("eq_rho", a.iter().map(|v| v * 1e-17).collect()).unwrap();
        g.metadata.insert("model".into(), Value::String("test".into()));
        g
    }

    #[test]
    fn round_trip_is_exact() {
        let g = sample();
        let text = write_field(&g).unwrap();
        assert_eq!(read_field(&text).unwrap(), g);
    }

    #[test]
    fn truncation_reports_line() {
        let text = write_field(&sample()).unwrap();
        let cut: String = text.lines().take(9).map(|l| format!("{l}\n")).collect();
        match read_field(&cut).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 10);
                assert!(message.contains("truncated"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(read_field(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            read_field("#GTWFIELD\nversion 2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = "#GTWFIELD\nversion 1\nmeta {}\ncolumns x t u\nshape 2 0\n";
        assert!(matches!(read_field(bad), Err(Error::Parse { line: 5, .. })));
        let bad = "#GTWFIELD\nversion 1\nmeta {}\ncolumns x t u\nshape 2 1\n0 0 1\n0 0 2\n";
        assert!(matches!(read_field(bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let bad = "#GTWFIELD\nversion 1\nmeta {}\ncolumns x t u\nshape 2 2\n0 0 1\n1 0 1\n0 1 1\n2 1 1\n";
        match read_field(bad).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 9),
            e => panic!("{e:?}"),
        }
    }
}
