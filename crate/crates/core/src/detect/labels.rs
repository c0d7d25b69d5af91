//! Label files: one non-negative integer per line, 0-based.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses newline-delimited labels; blank lines and `#` comments are skipped.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let label = line
            .parse::<usize>()
            .map_err(|e| Error::parse(i + 1, format!("bad label {line:?}: {e}")))?;
        out.push(label);
    }
    Ok(out)
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut s = String::with_capacity(labels.len() * 2);
    for l in labels {
        s.push_str(&l.to_string());
        s.push('\n');
    }
    s
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    parse_labels(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_labels(labels)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_errors() {
        let labels = vec![0, 2, 1, 1, 0];
        assert_eq!(parse_labels(&format_labels(&labels)).unwrap(), labels);
        assert_eq!(parse_labels("# header\n3\n\n 4 \n5 # tail\n").unwrap(), vec![3, 4, 5]);
        assert!(matches!(parse_labels("1\n-2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_labels("1 2\n").is_err());
        assert_eq!(parse_labels("").unwrap(), Vec::<usize>::new());
    }
}
