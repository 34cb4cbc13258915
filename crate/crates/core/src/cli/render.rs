use std::fmt::Write as _;

use crate::algebra::{Branch, LevelLabel};

/// Left-aligned text table, columns separated by two spaces.
pub(crate) struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub(crate) fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub(crate) fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    pub(crate) fn render(&self, out: &mut String) {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let mut text = String::new();
            for (i, (cell, w)) in line.iter().zip(&widths).enumerate() {
                if i + 1 == line.len() {
                    text.push_str(cell);
                } else {
                    write!(text, "{cell:<w$}  ").expect("write to string");
                }
            }
            out.push_str(text.trim_end());
            out.push('\n');
        }
    }
}

/// Comma-separated rows with LF endings.
pub(crate) struct Csv {
    out: String,
}

impl Csv {
    pub(crate) fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self { out }
    }

    pub(crate) fn row<S: AsRef<str>>(&mut self, cells: impl IntoIterator<Item = S>) {
        let cells: Vec<String> = cells.into_iter().map(|c| c.as_ref().to_string()).collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub(crate) fn finish(self) -> String {
        self.out
    }
}

/// Numeric encoding of a level label for CSV: `(m, branch)` with the
/// uncoupled ground level as `(-1, 0)` and branches as `-1` / `+1`.
pub(crate) fn label_columns(label: LevelLabel) -> (String, String) {
    match label {
        LevelLabel::Ground => ("-1".into(), "0".into()),
        LevelLabel::Dressed { m, branch } => (
            m.to_string(),
            match branch {
                Branch::Minus => "-1".into(),
                Branch::Plus => "1".into(),
            },
        ),
    }
}
