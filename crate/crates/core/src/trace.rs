use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// CSV trace with a fixed header row. Rows are formatted with Rust's
/// shortest round-trip float display, so identical runs produce identical
/// bytes.
#[derive(Debug, Clone)]
pub struct Trace {
    header: &'static str,
    rows: Vec<String>,
}

impl Trace {
    pub fn new(header: &'static str) -> Self {
        Trace {
            header,
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &'static str {
        self.header
    }

    pub fn push_row(&mut self, row: String) {
        debug_assert_eq!(
            row.matches(',').count(),
            self.header.matches(',').count(),
            "trace row column count must match the header"
        );
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * (self.rows.len() + 1));
        out.push_str(self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_fixed_header_and_rows() {
        let mut t = Trace::new("k,residual,metric");
        t.push_row(format!("{},{},{}", 1, 0.5, ""));
        t.push_row(format!("{},{},{}", 2, 0.25, 1.0));
        let csv = t.to_csv();
        assert!(csv.starts_with("k,residual,metric\n1,0.5,\n2,0.25,1\n"));
    }
}
