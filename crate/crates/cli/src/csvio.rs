//! CSV tables of `f64` columns with a mandatory header row.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Columns whose header is one of these are treated as row labels.
const LABEL_COLUMNS: [&str; 3] = ["index", "trial", "lag"];

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        let columns = vec![Vec::new(); headers.len()];
        Table { headers, columns }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.headers.len());
        for (c, &v) in self.columns.iter_mut().zip(row) {
            c.push(v);
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> CliResult<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|i| self.columns[i].as_slice()).ok_or_else(|| {
            CliError::validation("column", format!("no column named {name:?} (have {:?})", self.headers))
        })
    }

    /// Non-label columns in file order.
    pub fn value_columns(&self) -> Vec<&str> {
        self.headers.iter().map(String::as_str).filter(|h| !LABEL_COLUMNS.contains(h)).collect()
    }

    /// Named columns, or the first `count` value columns when `names` is empty.
    pub fn select(&self, names: &[String], count: usize) -> CliResult<Vec<&[f64]>> {
        if names.is_empty() {
            let vc = self.value_columns();
            if vc.len() < count {
                return Err(CliError::validation(
                    "columns",
                    format!("need {count} value column(s), table has {:?}", self.headers),
                ));
            }
            return vc[..count].iter().map(|n| self.column(n)).collect();
        }
        if names.len() != count {
            return Err(CliError::validation(
                "columns",
                format!("expected {count} column name(s), got {}", names.len()),
            ));
        }
        names.iter().map(|n| self.column(n)).collect()
    }

    pub fn write_to<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.headers)?;
        for i in 0..self.n_rows() {
            wr.write_record(self.columns.iter().map(|c| fmt_f64(c[i])))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Writes to `path`, or to stdout for `-`.
    pub fn write_path(&self, path: &Path) -> CliResult<()> {
        if path == Path::new("-") {
            return io::stdout().write_all(self.to_csv_string().as_bytes()).map_err(|e| CliError::io(path, e));
        }
        std::fs::write(path, self.to_csv_string()).map_err(|e| CliError::io(path, e))
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let parse_err = |line: u64, message: String| CliError::Parse { path: source.to_string(), line, message };
        let headers: Vec<String> =
            rd.headers().map_err(|e| parse_err(1, e.to_string()))?.iter().map(str::to_string).collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(parse_err(1, "missing header row".into()));
        }
        let mut table = Table::new(headers);
        let mut row = Vec::with_capacity(table.headers.len());
        for rec in rd.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            row.clear();
            for (field, name) in rec.iter().zip(&table.headers) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| parse_err(line, format!("column {name:?}: cannot parse {field:?} as a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(line, format!("column {name:?}: non-finite value {field:?}")));
                }
                row.push(v);
            }
            table.push_row(&row);
        }
        if table.n_rows() == 0 {
            return Err(parse_err(1, "no data rows".into()));
        }
        Ok(table)
    }

    /// Reads from `path`, or from stdin for `-`.
    pub fn read_path(path: &Path) -> CliResult<Self> {
        let mut text = String::new();
        if path == Path::new("-") {
            io::stdin().read_to_string(&mut text).map_err(|e| CliError::io(path, e))?;
        } else {
            File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(|e| CliError::io(path, e))?;
        }
        Self::parse(&text, &path.display().to_string())
    }
}

/// `index,value` table.
pub fn series_table(x: &[f64]) -> Table {
    let mut t = Table::new(vec!["index".into(), "value".into()]);
    t.columns[0] = (0..x.len()).map(|i| i as f64).collect();
    t.columns[1] = x.to_vec();
    t
}

/// `index,value1,value2` table.
pub fn pair_table(x1: &[f64], x2: &[f64]) -> Table {
    assert_eq!(x1.len(), x2.len());
    let mut t = Table::new(vec!["index".into(), "value1".into(), "value2".into()]);
    t.columns[0] = (0..x1.len()).map(|i| i as f64).collect();
    t.columns[1] = x1.to_vec();
    t.columns[2] = x2.to_vec();
    t
}
