//! Tables, 12-significant-digit number formatting, and the readers used to
//! check that every emitted file re-parses.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

pub const SIG_DIGITS: usize = 12;

/// Formats `v` with at most 12 significant digits, trailing zeros removed;
/// plain decimal for exponents in `[-5, 12)`, scientific otherwise.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if neg { "-" } else { "" };
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let body = if exp < 0 {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        } else {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                format!("{digits}{}", "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        };
        format!("{sign}{body}")
    } else {
        let rest = &digits[1..];
        if rest.is_empty() {
            format!("{sign}{}e{exp}", &digits[..1])
        } else {
            format!("{sign}{}.{rest}e{exp}", &digits[..1])
        }
    }
}

pub fn round_sig(v: f64) -> f64 {
    if v.is_finite() {
        fmt_sig(v).parse().unwrap()
    } else {
        v
    }
}

/// Rounds every floating-point number in a JSON tree to 12 significant
/// digits; non-finite numbers were already mapped to null by serde_json.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            serde_json::Number::from_f64(round_sig(n.as_f64().unwrap()))
                .map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Str(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => {
                serde_json::Number::from_f64(round_sig(*v)).map_or(Value::Null, Value::Number)
            }
            Cell::Int(i) => Value::from(*i),
            Cell::Str(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

/// Rows with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let err = |e: csv::Error| CliError::data(format!("writing csv: {e}"));
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(err)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::text)).map_err(err)?;
        }
        out.flush()
            .map_err(|e| CliError::data(format!("writing csv: {e}")))
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Long-format plot data: one row per (figure, series, x) point.
pub fn plot_table() -> Table {
    Table::new(&["figure", "series", "x_name", "x", "y_name", "y"])
}

pub fn plot_point(
    t: &mut Table,
    figure: &str,
    series: &str,
    x_name: &str,
    x: f64,
    y_name: &str,
    y: f64,
) {
    t.push(vec![
        figure.into(),
        series.into(),
        x_name.into(),
        x.into(),
        y_name.into(),
        y.into(),
    ]);
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub name: &'static str,
    /// Full structure, including the rows.
    pub json: Value,
    pub table: Table,
    pub plot: Option<Table>,
    /// Extra tables written alongside, keyed by file stem.
    pub extra: Vec<(String, Table)>,
    /// Write both JSON and CSV regardless of the selected format.
    pub both_formats: bool,
}

fn create(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, v)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    writeln!(f).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Writes the report under `dir` and returns the files written, or prints
/// the primary table to stdout when `dir` is `None`.
pub fn emit(report: &Report, dir: Option<&Path>, format: Format) -> Result<Vec<PathBuf>, CliError> {
    let Some(dir) = dir else {
        let stdout = std::io::stdout();
        match format {
            Format::Csv => report.table.write_csv(stdout.lock())?,
            Format::Json => {
                let mut lock = stdout.lock();
                serde_json::to_writer_pretty(&mut lock, &report.json)
                    .map_err(|e| CliError::data(format!("stdout: {e}")))?;
                writeln!(lock).map_err(|e| CliError::data(format!("stdout: {e}")))?;
            }
        }
        return Ok(Vec::new());
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    if report.both_formats || format == Format::Json {
        let p = dir.join(format!("{}.json", report.name));
        write_json(&p, &report.json)?;
        written.push(p);
    }
    if report.both_formats || format == Format::Csv {
        let p = dir.join(format!("{}.csv", report.name));
        report.table.write_csv(create(&p)?)?;
        written.push(p);
    }
    if let Some(plot) = &report.plot {
        let p = dir.join(format!("{}_plot.csv", report.name));
        plot.write_csv(create(&p)?)?;
        written.push(p);
    }
    for (stem, t) in &report.extra {
        let p = dir.join(format!("{stem}.csv"));
        t.write_csv(create(&p)?)?;
        written.push(p);
    }
    Ok(written)
}

/// A table read back from disk, values as text.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ReadTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn num(&self, row: usize, col: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column(col)?)?.parse().ok()
    }
}

pub fn read_csv(path: &Path) -> Result<ReadTable, CliError> {
    let err = |e: csv::Error| CliError::data(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let columns = r.headers().map_err(err)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    Ok(ReadTable { columns, rows })
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig(-0.000123456789012345), "-0.000123456789012");
        assert_eq!(fmt_sig(1234.5), "1234.5");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(2.5e15), "2.5e15");
        assert_eq!(fmt_sig(100.0), "100");
        assert_eq!(fmt_sig(0.1 + 0.2), "0.3");
    }

    #[test]
    fn rounding_is_idempotent() {
        for v in [
            0.1234567890123456,
            9.999999999999e-3,
            123456789.123456,
            1e300,
            -2.0 / 3.0,
        ] {
            let r = round_sig(v);
            assert_eq!(fmt_sig(r), fmt_sig(v));
            assert!((r - v).abs() <= 1e-11 * v.abs());
        }
    }
}
