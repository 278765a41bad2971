//! CSV table with trailing `#` summary lines.

use std::io::Write;

use relay_fbl::{Error, Result};

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

/// Shortest text that parses back to the same `f64`; scientific notation for
/// very small or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table {
            header,
            ..Default::default()
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    /// Writes the table and the notes to stdout.
    pub fn emit(&self) -> Result<()> {
        let io = |e: &dyn std::fmt::Display| Error::Invalid {
            field: "output".into(),
            reason: e.to_string(),
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| io(&e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| io(&e))?;
        }
        let mut bytes = w.into_inner().map_err(|e| io(&e))?;
        for n in &self.notes {
            bytes.extend_from_slice(b"# ");
            bytes.extend_from_slice(n.as_bytes());
            bytes.push(b'\n');
        }
        let mut out = std::io::stdout().lock();
        match out.write_all(&bytes).and_then(|_| out.flush()) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            Err(e) => Err(io(&e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 0.1, 2.5, 1e-10, 123_456.789, 6.02e23, -3.3e-7] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1e-10), "1e-10");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(opt(None), "");
    }
}
