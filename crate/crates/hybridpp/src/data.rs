//! CSV tables with a header row; an empty cell is a missing value.

use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Values of one numeric column with the row each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericColumn {
    pub name: String,
    pub values: Vec<(usize, f64)>,
    pub missing: usize,
}

impl NumericColumn {
    pub fn data(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.1).collect()
    }
}

impl Table {
    pub fn read(path: &Path) -> Result<Table, CliError> {
        let file = std::fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Table::from_reader(file).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Table, CliError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = csv
            .headers()
            .map_err(|e| CliError::Input(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(CliError::Input("missing header row".into()));
        }
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record.map_err(|e| CliError::Input(e.to_string()))?;
            rows.push(record.iter().map(String::from).collect());
        }
        Ok(Table { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize, CliError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("no column `{name}`")))
    }

    /// Cell of `row` in column `col`; `None` when empty.
    pub fn cell(&self, row: usize, col: usize) -> Option<&str> {
        self.rows[row].get(col).map(String::as_str).filter(|s| !s.is_empty())
    }

    /// Parses a column as numbers, counting and skipping empty cells.
    pub fn numeric(&self, name: &str) -> Result<NumericColumn, CliError> {
        let col = self.column_index(name)?;
        let mut values = Vec::new();
        let mut missing = 0;
        for row in 0..self.rows.len() {
            match self.cell(row, col) {
                None => missing += 1,
                Some(s) => {
                    let x: f64 = s.parse().map_err(|_| {
                        CliError::Input(format!("column `{name}` row {}: `{s}` is not a number", row + 2))
                    })?;
                    if !x.is_finite() {
                        return Err(CliError::Input(format!(
                            "column `{name}` row {}: `{s}` is not finite",
                            row + 2
                        )));
                    }
                    values.push((row, x));
                }
            }
        }
        if values.is_empty() {
            return Err(CliError::Input(format!("column `{name}` has no values")));
        }
        Ok(NumericColumn {
            name: name.to_string(),
            values,
            missing,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_cells_are_counted() {
        let t = Table::from_reader("a,b\n1,x\n,y\n3.5,\n".as_bytes()).unwrap();
        let a = t.numeric("a").unwrap();
        assert_eq!(a.values, vec![(0, 1.0), (2, 3.5)]);
        assert_eq!(a.missing, 1);
        assert!(matches!(t.numeric("b"), Err(CliError::Input(_))));
        assert!(matches!(t.numeric("c"), Err(CliError::Input(_))));
    }
}
