use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use super::CiTestError;

/// Forces a column's type instead of auto-detecting it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Continuous(Vec<f64>),
    /// Codes index into `levels`, which keeps first-appearance order.
    Categorical {
        codes: Vec<u32>,
        levels: Vec<String>,
    },
}

impl Column {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Continuous(_) => ColumnKind::Continuous,
            Column::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Continuous(v) => v.len(),
            Column::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn categorical(values: &[&str]) -> Self {
        let mut levels: Vec<String> = Vec::new();
        let mut index: HashMap<&str, u32> = HashMap::new();
        let codes = values
            .iter()
            .map(|&v| {
                *index.entry(v).or_insert_with(|| {
                    levels.push(v.to_string());
                    (levels.len() - 1) as u32
                })
            })
            .collect();
        Column::Categorical { codes, levels }
    }
}

/// Named, equal-length columns with missing rows already removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Column>,
    rows: usize,
    dropped: usize,
}

impl Dataset {
    pub fn from_columns(pairs: Vec<(String, Column)>) -> Result<Self, CiTestError> {
        let rows = pairs.first().map_or(0, |(_, c)| c.len());
        let mut seen = HashSet::new();
        for (name, c) in &pairs {
            if !seen.insert(name.as_str()) {
                return Err(CiTestError::DuplicateColumn(name.clone()));
            }
            if c.len() != rows {
                return Err(CiTestError::Ragged { line: 0 });
            }
        }
        let (names, columns) = pairs.into_iter().unzip();
        Ok(Self { names, columns, rows, dropped: 0 })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    /// Rows removed during loading because a cell was blank.
    pub fn dropped_rows(&self) -> usize {
        self.dropped
    }

    pub fn column(&self, name: &str) -> Result<&Column, CiTestError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| CiTestError::UnknownColumn(name.to_string()))
    }
}

pub fn load_csv(path: &Path, hints: &HashMap<String, ColumnKind>) -> Result<Dataset, CiTestError> {
    let file = std::fs::File::open(path).map_err(|e| CiTestError::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, hints)
}

/// Parses CSV with a header row. Columns whose every value is numeric and
/// which have more than ten distinct values are continuous; the rest are
/// categorical unless `hints` says otherwise.
pub fn read_csv<R: Read>(reader: R, hints: &HashMap<String, ColumnKind>) -> Result<Dataset, CiTestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(CiTestError::Empty);
    }
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    let mut dropped = 0;
    let mut any_row = false;
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        any_row = true;
        if record.iter().any(str::is_empty) {
            dropped += 1;
            continue;
        }
        for (col, value) in cells.iter_mut().zip(record.iter()) {
            col.push(value.to_string());
        }
    }
    if !any_row {
        return Err(CiTestError::Empty);
    }
    let mut pairs = Vec::with_capacity(header.len());
    for (name, raw) in header.into_iter().zip(cells) {
        let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
        let kind = match hints.get(&name) {
            Some(&k) => k,
            None => match &numeric {
                Some(v) if v.iter().map(|x| x.to_bits()).collect::<HashSet<_>>().len() > 10 => ColumnKind::Continuous,
                _ => ColumnKind::Categorical,
            },
        };
        let column = match kind {
            ColumnKind::Continuous => Column::Continuous(numeric.ok_or_else(|| CiTestError::NotNumeric(name.clone()))?),
            ColumnKind::Categorical => Column::categorical(&raw.iter().map(String::as_str).collect::<Vec<_>>()),
        };
        pairs.push((name, column));
    }
    let mut d = Dataset::from_columns(pairs)?;
    d.dropped = dropped;
    Ok(d)
}

fn csv_error(e: csv::Error) -> CiTestError {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { pos, .. } => {
            CiTestError::Ragged { line: pos.as_ref().map_or(0, |p| p.line()) }
        }
        _ => CiTestError::Csv(e.to_string()),
    }
}
