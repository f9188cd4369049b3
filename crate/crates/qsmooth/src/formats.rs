//! Plain-text input formats.
//!
//! Truth tables: line 1 `n=<int>`, line 2 exactly `2^n` characters from
//! `{0,1}`, character `i` being the output on the code with index `i`.
//!
//! Graph files: one graph per line, `C(6,2) = 15` characters in the
//! lexicographic edge order `(0,1), (0,2), …, (4,5)`. Blank lines and `#`
//! comments are skipped.

use std::fmt::Write as _;
use std::path::Path;

use qsmooth_core::oracle::edge_count;
use qsmooth_core::{BitString, TruthTable};

use crate::error::{CliError, Result};

pub const GRAPH_VERTICES: usize = 6;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

pub fn parse_truth_table(text: &str, origin: &Path) -> Result<TruthTable> {
    let mut lines = text.lines().map(str::trim).enumerate().filter(|(_, l)| !l.is_empty());
    let (l1, header) = lines
        .next()
        .ok_or_else(|| parse_error(origin, 1, "empty truth-table file"))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| parse_error(origin, l1 + 1, format!("expected `n=<int>`, found `{header}`")))?;
    let (l2, body) = lines
        .next()
        .ok_or_else(|| parse_error(origin, l1 + 2, "missing output line"))?;
    if let Some((l3, _)) = lines.next() {
        return Err(parse_error(origin, l3 + 1, "unexpected content after the output line"));
    }
    let outputs = parse_bits(body).ok_or_else(|| parse_error(origin, l2 + 1, "outputs must be 0/1 characters"))?;
    let expected = 1usize.checked_shl(n as u32).unwrap_or(0);
    if outputs.len() != expected {
        return Err(parse_error(
            origin,
            l2 + 1,
            format!("expected 2^{n} = {expected} outputs, found {}", outputs.len()),
        ));
    }
    TruthTable::new(n, outputs).map_err(|e| parse_error(origin, l1 + 1, e.to_string()))
}

pub fn load_truth_table(path: &Path) -> Result<TruthTable> {
    parse_truth_table(&read(path)?, path)
}

pub fn format_truth_table(table: &TruthTable) -> String {
    let body: String = table.outputs().iter().map(|&b| if b { '1' } else { '0' }).collect();
    format!("n={}\n{body}\n", table.num_inputs())
}

pub fn parse_graphs(text: &str, origin: &Path) -> Result<Vec<BitString>> {
    let m = edge_count(GRAPH_VERTICES);
    let mut graphs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.len() != m {
            return Err(parse_error(
                origin,
                i + 1,
                format!("a graph line needs {m} characters, found {}", line.len()),
            ));
        }
        let bits = parse_bits(line).ok_or_else(|| parse_error(origin, i + 1, "edges must be 0/1 characters"))?;
        graphs.push(BitString::from_bits(&bits)?);
    }
    Ok(graphs)
}

pub fn load_graphs(path: &Path) -> Result<Vec<BitString>> {
    parse_graphs(&read(path)?, path)
}

pub fn format_graphs(graphs: &[BitString]) -> String {
    graphs.iter().fold(String::new(), |mut out, g| {
        let _ = writeln!(out, "{g}");
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table_round_trip() {
        let t = TruthTable::from_fn(3, |b| b.count_ones() == 2).unwrap();
        let text = format_truth_table(&t);
        assert_eq!(text, "n=3\n00010110\n");
        assert_eq!(parse_truth_table(&text, Path::new("t")).unwrap(), t);
    }

    #[test]
    fn truth_table_rejections() {
        let p = Path::new("t");
        assert!(parse_truth_table("n=2\n0110", p).is_ok());
        assert!(matches!(
            parse_truth_table("n=2\n011", p),
            Err(CliError::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_truth_table("n=2\n01a0", p), Err(CliError::Parse { .. })));
        assert!(matches!(
            parse_truth_table("m=2\n0110", p),
            Err(CliError::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_truth_table("", p), Err(CliError::Parse { .. })));
        assert!(matches!(
            parse_truth_table("n=1\n01\n10", p),
            Err(CliError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn graph_round_trip() {
        let graphs = vec![
            BitString::from_bits(&[true; 15]).unwrap(),
            "100000000000001".parse().unwrap(),
        ];
        let text = format_graphs(&graphs);
        assert_eq!(text, "111111111111111\n100000000000001\n");
        assert_eq!(
            parse_graphs(&format!("# header\n{text}\n"), Path::new("g")).unwrap(),
            graphs
        );
        assert!(parse_graphs("0101", Path::new("g")).is_err());
    }
}
