//! Width-`n` CSV datasets with censored entries written as `0`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::fsutil::write_atomic;
use crate::{Error, Result, Sequence};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub sequence: Sequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub rows: Vec<Row>,
}

impl Dataset {
    pub fn new(n: usize, rows: Vec<Row>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.sequence.n() != n) {
            return Err(Error::domain(format!(
                "row {} has width {}, dataset width is {n}",
                r.id,
                r.sequence.n()
            )));
        }
        Ok(Dataset { n, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.id.clone()).collect()
    }

    pub fn sequences(&self) -> Vec<Sequence> {
        self.rows.iter().map(|r| r.sequence.clone()).collect()
    }

    /// CSV text: header `id,x1,...,xn`, then one padded row per observation.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("id");
        for j in 1..=self.n {
            let _ = write!(s, ",x{j}");
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.id);
            for v in r.sequence.padded() {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }
}

/// Reads a dataset file. See [`parse_csv`].
pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_csv(&text, &path.display().to_string())
}

/// Parses dataset text. A first row whose first field is `id` is a header.
/// Each data row is an id followed by `n` nonnegative numbers, where zeros are
/// censored; the entries are sorted descending and must then be strictly
/// decreasing over the nonzero part, with at least one nonzero.
pub fn parse_csv(text: &str, source: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let mut n: Option<usize> = None;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if k == 0 && record.get(0) == Some("id") {
            n = Some(record.len() - 1);
            continue;
        }
        let id = record.get(0).unwrap_or("").to_string();
        let invalid = |message: String| Error::Validation {
            path: source.to_string(),
            line,
            id: id.clone(),
            message,
        };
        if id.is_empty() {
            return Err(parse_err(line, "missing row id".into()));
        }
        let width = record.len() - 1;
        match n {
            None => n = Some(width),
            Some(n) if n != width => {
                return Err(invalid(format!("expected {n} values, found {width}")));
            }
            _ => {}
        }
        if width == 0 {
            return Err(invalid("row has no values".into()));
        }
        let mut values = Vec::with_capacity(width);
        for (j, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                parse_err(line, format!("row `{id}`, column {}: `{field}` is not a number", j + 2))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(format!("value {field} must be finite and nonnegative")));
            }
            values.push(v);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let l = values.iter().take_while(|v| **v > 0.0).count();
        if l == 0 {
            return Err(invalid("every entry is censored; at least one value must be positive".into()));
        }
        values.truncate(l);
        if let Some(w) = values.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("tied values {} are not allowed", w[0])));
        }
        if !seen.insert(id.clone()) {
            return Err(invalid("duplicate row id".into()));
        }
        let sequence = Sequence::new(width, values).map_err(|e| invalid(e.to_string()))?;
        rows.push(Row { id, sequence });
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    Dataset::new(n.expect("set by first row"), rows)
}
