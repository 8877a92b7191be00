//! `key = value` option files.
//!
//! One assignment per line. Blank lines and lines starting with `#` are
//! skipped; keys may use dashes or underscores.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parses an option file into `(key, value)` pairs in file order. Keys are
/// normalized to underscores.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ConfigError {
            line: i + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(err(format!("invalid key {key:?}")));
        }
        if value.is_empty() {
            return Err(err(format!("missing value for {key}")));
        }
        if out.iter().any(|(k, _)| *k == key) {
            return Err(err(format!("duplicate key {key}")));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_spacing() {
        let parsed = parse_config("# weights\n\nalpha2 = 0.5\nmax-iter=40\n").unwrap();
        assert_eq!(
            parsed,
            vec![
                ("alpha2".to_string(), "0.5".to_string()),
                ("max_iter".to_string(), "40".to_string())
            ]
        );
    }

    #[test]
    fn malformed_lines() {
        assert_eq!(parse_config("beta").unwrap_err().line, 1);
        assert_eq!(parse_config("\nbeta =").unwrap_err().line, 2);
        assert_eq!(parse_config("a b = 1").unwrap_err().line, 1);
        assert_eq!(parse_config("beta=1\nbeta=2").unwrap_err().line, 2);
    }
}
