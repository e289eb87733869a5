//! Named parameter sets and their checkpoint container.
//!
//! Checkpoint format (UTF-8 text, LF line endings):
//!
//! ```text
//! repurpose-params v1
//! <count>
//! <name> <rows> <cols>
//! <v0> <v1> ... <v(rows*cols-1)>
//! ...
//! ```
//!
//! Values are row-major and written with Rust's shortest round-trip `f64`
//! formatting, so a save/load cycle is bit-exact. Names may not contain
//! whitespace.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Matrix, NumericError};

const MAGIC: &str = "repurpose-params v1";

/// Ordered collection of named matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Matrix>,
    index: HashMap<String, usize>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a parameter, replacing any existing one with the same name.
    pub fn insert(&mut self, name: impl Into<String>, value: Matrix) -> usize {
        let name = name.into();
        debug_assert!(!name.chars().any(char::is_whitespace));
        if let Some(&i) = self.index.get(&name) {
            self.values[i] = value;
            return i;
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.values.push(value);
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Matrix> {
        self.index.get(name).map(|&i| &self.values[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Matrix] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Matrix] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Matrix)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    /// Keeps only the parameters whose names start with `prefix`.
    pub fn subset(&self, prefix: &str) -> ParamSet {
        let mut out = ParamSet::new();
        for (name, value) in self.iter() {
            if name.starts_with(prefix) {
                out.insert(name, value.clone());
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "{}", self.len());
        for (name, m) in self.iter() {
            let _ = writeln!(out, "{name} {} {}", m.rows(), m.cols());
            let line: Vec<String> = m.as_slice().iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NumericError> {
        let corrupt = |msg: String| NumericError::CorruptCheckpoint(msg);
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(corrupt("missing header".into()));
        }
        let count: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| corrupt("missing parameter count".into()))?;
        let mut set = ParamSet::new();
        for _ in 0..count {
            let head = lines.next().ok_or_else(|| corrupt("truncated".into()))?;
            let fields: Vec<&str> = head.split(' ').collect();
            let [name, rows, cols] = fields[..] else {
                return Err(corrupt(format!("bad parameter header `{head}`")));
            };
            let rows: usize = rows.parse().map_err(|_| corrupt(format!("bad rows in `{head}`")))?;
            let cols: usize = cols.parse().map_err(|_| corrupt(format!("bad cols in `{head}`")))?;
            let body = lines.next().ok_or_else(|| corrupt("truncated".into()))?;
            let values = body
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| corrupt(format!("{name}: {e}")))?;
            if values.len() != rows * cols {
                return Err(corrupt(format!(
                    "{name}: expected {} values, found {}",
                    rows * cols,
                    values.len()
                )));
            }
            set.insert(name, Matrix::from_vec(rows, cols, values)?);
        }
        Ok(set)
    }

    pub fn save(&self, path: &Path) -> Result<(), NumericError> {
        std::fs::write(path, self.to_text()).map_err(|e| NumericError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, NumericError> {
        let text = std::fs::read_to_string(path).map_err(|e| NumericError::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_is_exact() {
        let mut p = ParamSet::new();
        p.insert("a.w", Matrix::from_rows(&[[0.1, 1.0 / 3.0], [-2.5e-300, 7e22]]).unwrap());
        p.insert("b", Matrix::zeros(0, 4));
        p.insert("c", Matrix::scalar(f64::MIN_POSITIVE));
        let back = ParamSet::from_text(&p.to_text()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn corrupt_inputs() {
        assert!(ParamSet::from_text("").is_err());
        assert!(ParamSet::from_text("repurpose-params v1\n1\nx 1 2\n1.0\n").is_err());
        assert!(ParamSet::from_text("repurpose-params v1\n2\nx 1 1\n1.0\n").is_err());
    }

    #[test]
    fn insert_replaces_by_name() {
        let mut p = ParamSet::new();
        p.insert("w", Matrix::scalar(1.0));
        p.insert("w", Matrix::scalar(2.0));
        assert_eq!(p.len(), 1);
        assert_eq!(p.get("w").unwrap().item(), 2.0);
    }
}
