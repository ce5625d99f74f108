//! Rectangular numeric result tables and their CSV form.
//!
//! Layout: leading `#` metadata lines (`# key = value`), one header row of
//! column names, then data rows in 17-significant-digit scientific notation,
//! which round-trips f64 bit-for-bit.

use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Ordered metadata; enough to reproduce the run (resolved config, tool
    /// version, command line).
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn meta<K: Into<String>, V: Into<String>>(&mut self, key: K, value: V) {
        self.metadata.push((key.into(), value.into()));
    }

    /// Append the resolved configuration under `config.` keys plus the tool
    /// version and command, making the table self-describing.
    pub fn describe_run(&mut self, command: &str, config: &crate::config::RunConfig) {
        self.meta("tool", "photocell");
        self.meta("tool_version", env!("CARGO_PKG_VERSION"));
        self.meta("command", command);
        self.meta(
            "timestamp_unix",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs().to_string())
                .unwrap_or_else(|_| "0".into()),
        );
        for line in config.serialize().lines() {
            let (k, v) = line.split_once(" = ").expect("canonical config line");
            // The output path has no bearing on the numbers.
            if k != "out" {
                self.meta(format!("config.{k}"), v);
            }
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "ragged row");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file =
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_csv(std::io::BufWriter::new(file))
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// Parse a table previously written by [`ResultTable::write_csv`].
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();

        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| anyhow!("line {line_no}: bad metadata line"))?;
                metadata.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            match &columns {
                None => columns = Some(line.split(',').map(|s| s.to_string()).collect()),
                Some(cols) => {
                    let row: Vec<f64> = line
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| anyhow!("line {line_no}: {e}"))?;
                    if row.len() != cols.len() {
                        bail!(
                            "line {line_no}: {} cells, expected {}",
                            row.len(),
                            cols.len()
                        );
                    }
                    rows.push(row);
                }
            }
        }
        Ok(Self {
            columns: columns.ok_or_else(|| anyhow!("missing header row"))?,
            rows,
            metadata,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_and_metadata_only() {
        let mut t = ResultTable::new(vec!["a", "b"]);
        t.meta("note", "empty");
        let csv = t.to_csv_string();
        assert_eq!(csv, "# note = empty\na,b\n");
    }

    #[test]
    fn values_round_trip_bit_for_bit() {
        let mut t = ResultTable::new(vec!["x", "y"]);
        t.push_row(vec![std::f64::consts::PI, 1.24e-6]);
        t.push_row(vec![-0.0, 6.02214076e23]);
        t.push_row(vec![f64::MIN_POSITIVE, 0.1 + 0.2]);
        let back = ResultTable::parse_csv(&t.to_csv_string()).unwrap();
        assert_eq!(back.columns, t.columns);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let text = "a,b\n1.0,2.0\n3.0\n";
        assert!(ResultTable::parse_csv(text).is_err());
    }
}
