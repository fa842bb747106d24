//! Numeric CSV tables: UTF-8, LF line endings, comma delimiter, mandatory
//! header row. Values render through Rust's shortest-round-trip `Display`,
//! so `parse(render(t))` reproduces the table bit for bit and diffs between
//! runs are meaningful. The columns are numeric only (integers such as
//! iteration counts and certificate bitmasks ride along exactly).

use crate::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<CsvTable, Failure> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Failure::Config("empty CSV".into()))?
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(header.len());
            for cell in line.split(',') {
                row.push(cell.parse::<f64>().map_err(|_| {
                    Failure::Config(format!("CSV row {}: non-numeric cell {cell:?}", k + 2))
                })?);
            }
            if row.len() != header.len() {
                return Err(Failure::Config(format!(
                    "CSV row {}: {} cells under a {}-column header",
                    k + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(CsvTable { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, Failure> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Config(format!("CSV has no column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn write_table(dir: &std::path::Path, name: &str, table: &CsvTable) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, table.render())
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}
