//! The CSV dialect shared by every artifact: comma separated, '.' decimal,
//! 17 significant digits, metadata on leading '#' lines.

use std::io::{self, Write};
use std::path::Path;

/// Format a float with 17 significant digits so it round-trips exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { meta: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, line: impl Into<String>) -> &mut Self {
        self.meta.push(line.into());
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            out.push_str("# ");
            out.push_str(m);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.render().as_bytes())?;
        f.flush()
    }

    /// Parse text in this dialect back into a table.
    pub fn parse(text: &str) -> Option<Self> {
        let mut table = CsvTable::default();
        let mut lines = text.lines();
        for line in lines.by_ref() {
            if let Some(m) = line.strip_prefix('#') {
                table.meta.push(m.trim_start().to_string());
            } else {
                table.header = line.split(',').map(str::to_string).collect();
                break;
            }
        }
        if table.header.is_empty() {
            return None;
        }
        for line in lines {
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if cells.len() != table.header.len() {
                return None;
            }
            table.rows.push(cells);
        }
        Some(table)
    }

    /// A numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[idx].parse().ok()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, std::f64::consts::PI] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn render_and_parse() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.meta("x=1").row(vec![fmt_f64(0.5), fmt_f64(f64::INFINITY)]);
        let text = t.render();
        assert_eq!(text, "# x=1\na,b\n5.0000000000000000e-1,inf\n");
        let back = CsvTable::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("b").unwrap()[0], f64::INFINITY);
        assert!(back.column("c").is_none());
    }
}
