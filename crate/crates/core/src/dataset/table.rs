use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::dataset::schema::FeatureSchema;
use crate::error::{Error, Result};

/// Text cells exactly as read from disk, columns in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(Error::RaggedRow {
                    line: i as u64 + 2,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }
        Ok(RawTable { header, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    }

    /// Writes the table with `delimiter`, quoting only where needed.
    pub fn write_delimited(&self, path: &Path, delimiter: char) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .delimiter(delimiter as u8)
            .from_path(path)?;
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Reads a delimited file with a header line and reorders its columns to
/// match `schema`.
pub fn load_table(path: &Path, schema: &FeatureSchema) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    read_table(file, schema)
}

pub fn read_table<R: std::io::Read>(input: R, schema: &FeatureSchema) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let file_header: Vec<String> = reader.headers()?.iter().map(clean_cell).collect();
    let order = match_header(&file_header, schema)?;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != file_header.len() {
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            return Err(Error::RaggedRow {
                line,
                expected: file_header.len(),
                found: record.len(),
            });
        }
        rows.push(order.iter().map(|&i| clean_cell(&record[i])).collect());
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let header = schema.column_names().into_iter().map(String::from).collect();
    Ok(RawTable { header, rows })
}

fn clean_cell(cell: &str) -> String {
    cell.trim().trim_matches('"').trim().to_string()
}

/// For each schema column, the index of the matching file column.
fn match_header(file_header: &[String], schema: &FeatureSchema) -> Result<Vec<usize>> {
    let positions: HashMap<&str, usize> = file_header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();
    let wanted: HashSet<&str> = schema.column_names().into_iter().collect();
    let missing: Vec<String> = schema
        .column_names()
        .into_iter()
        .filter(|n| !positions.contains_key(n))
        .map(String::from)
        .collect();
    let extra: Vec<String> = file_header
        .iter()
        .filter(|h| !wanted.contains(h.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() || positions.len() != file_header.len() {
        return Err(Error::HeaderMismatch { missing, extra });
    }
    Ok(schema.column_names().iter().map(|n| positions[n]).collect())
}

/// Replaces an integer grade column with `pass` (grade >= threshold) or
/// `fail`.
pub fn binarize_grade_target(raw: &RawTable, grade_column: &str, pass_threshold: i64) -> Result<RawTable> {
    let col = raw.column(grade_column)?;
    let mut out = raw.clone();
    for (row_idx, row) in out.rows.iter_mut().enumerate() {
        let grade: i64 = row[col].parse().map_err(|_| Error::NonIntegerGrade {
            row: row_idx,
            value: row[col].clone(),
        })?;
        row[col] = if grade >= pass_threshold { "pass" } else { "fail" }.to_string();
    }
    Ok(out)
}
