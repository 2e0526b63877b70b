//! Text format for genotype tables and the bundled benchmark datasets.
//!
//! ```text
//! # optional comments
//! r=3
//! labels=A,B,C
//! 4
//! 1,2
//! 0,3,5
//! ```
//!
//! Row j (1-based) lists n_{j,1}, ..., n_{j,j}. Blank lines and everything
//! after `#` are ignored; the `labels=` line is optional.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::genotype::GenotypeTable;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub table: GenotypeTable,
    pub labels: Option<Vec<String>>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Content of a line with the comment stripped, plus the 1-based column of
/// its first non-blank character.
fn content(raw: &str) -> Option<(&str, usize)> {
    let body = raw.split('#').next().unwrap_or("");
    let trimmed = body.trim_start();
    let offset = body.len() - trimmed.len();
    let trimmed = trimmed.trim_end();
    (!trimmed.is_empty()).then(|| (trimmed, body[..offset].chars().count() + 1))
}

/// Splits `key=value`, returning the value and its column.
fn key_value<'a>(text: &'a str, column: usize, key: &str) -> Option<(&'a str, usize)> {
    let (k, v) = text.split_once('=')?;
    if !k.trim().eq_ignore_ascii_case(key) {
        return None;
    }
    let lead = v.len() - v.trim_start().len();
    Some((v.trim(), column + k.chars().count() + 1 + lead))
}

fn parse_count(field: &str, line: usize, column: usize) -> Result<u64> {
    if field.is_empty() {
        return Err(parse_error(line, column, "empty field"));
    }
    if field.starts_with('-') && field[1..].chars().all(|c| c.is_ascii_digit()) && field.len() > 1 {
        return Err(parse_error(line, column, format!("negative count `{field}`")));
    }
    if !field.chars().all(|c| c.is_ascii_digit()) {
        return Err(parse_error(
            line,
            column,
            format!("`{field}` is not a nonnegative integer"),
        ));
    }
    field
        .parse()
        .map_err(|_| parse_error(line, column, format!("count `{field}` is too large")))
}

impl Dataset {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, raw)| content(raw).map(|(c, col)| (i + 1, c, col)));

        let (line, header, col) = lines
            .next()
            .ok_or_else(|| parse_error(1, 1, "missing `r=<alleles>` header"))?;
        let (value, vcol) = key_value(header, col, "r")
            .ok_or_else(|| parse_error(line, col, "expected `r=<alleles>` header"))?;
        let alleles: usize = value
            .parse()
            .map_err(|_| parse_error(line, vcol, format!("`{value}` is not a valid allele count")))?;
        if alleles < 2 {
            return Err(parse_error(line, vcol, format!("at least 2 alleles are required, got {alleles}")));
        }

        let mut labels = None;
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(alleles);
        let mut last_line = line;
        for (line, text, col) in lines {
            last_line = line;
            if rows.is_empty() && labels.is_none() {
                if let Some((value, vcol)) = key_value(text, col, "labels") {
                    let names: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                    if names.len() != alleles {
                        return Err(parse_error(
                            line,
                            vcol,
                            format!("{} labels given for {alleles} alleles", names.len()),
                        ));
                    }
                    if names.iter().any(String::is_empty) {
                        return Err(parse_error(line, vcol, "empty allele label"));
                    }
                    labels = Some(names);
                    continue;
                }
            }
            let row = rows.len() + 1;
            if row > alleles {
                return Err(parse_error(
                    line,
                    col,
                    format!("row {row} is beyond the {alleles} rows declared by the header"),
                ));
            }
            let mut counts = Vec::with_capacity(row);
            let mut field_col = col;
            for field in text.split(',') {
                let lead = field.len() - field.trim_start().len();
                counts.push(parse_count(field.trim(), line, field_col + lead)?);
                field_col += field.chars().count() + 1;
            }
            if counts.len() != row {
                return Err(Error::RowLength {
                    row,
                    line,
                    expected: row,
                    found: counts.len(),
                });
            }
            rows.push(counts);
        }
        if rows.len() != alleles {
            return Err(parse_error(
                last_line + 1,
                1,
                format!("expected {alleles} rows, found {}", rows.len()),
            ));
        }
        Ok(Self {
            table: GenotypeTable::from_rows(&rows)?,
            labels,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Canonical text: header, optional labels, rows without spaces.
    pub fn to_text(&self) -> String {
        let mut out = format!("r={}\n", self.table.alleles());
        if let Some(labels) = &self.labels {
            let _ = writeln!(out, "labels={}", labels.join(","));
        }
        for row in self.table.rows() {
            let fields: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

impl From<GenotypeTable> for Dataset {
    fn from(table: GenotypeTable) -> Self {
        Self { table, labels: None }
    }
}

pub fn parse_dataset(text: &str) -> Result<GenotypeTable> {
    Ok(Dataset::parse(text)?.table)
}

pub fn serialize_dataset(table: &GenotypeTable) -> String {
    Dataset::from(table.clone()).to_text()
}

/// Benchmark tables addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Example1,
    Example2,
    Example3,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::Example1, Benchmark::Example2, Benchmark::Example3];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Example1 => "example1",
            Benchmark::Example2 => "example2",
            Benchmark::Example3 => "example3",
        }
    }

    /// File contents, if the table ships with this build.
    pub fn text(self) -> Option<&'static str> {
        match self {
            Benchmark::Example1 => Some(include_str!("../data/example1.txt")),
            Benchmark::Example2 => Some(include_str!("../data/example2.txt")),
            Benchmark::Example3 => None,
        }
    }

    pub fn dataset(self) -> Result<Dataset> {
        let text = self
            .text()
            .ok_or_else(|| Error::MissingBenchmark(self.name().to_string()))?;
        let dataset = Dataset::parse(text)?;
        self.check(&dataset.table)?;
        Ok(dataset)
    }

    pub fn table(self) -> Result<GenotypeTable> {
        Ok(self.dataset()?.table)
    }

    /// Known totals and anchor cells each table must reproduce.
    pub fn check(self, table: &GenotypeTable) -> Result<()> {
        let fail = |what: String| Err(Error::InvalidArgument(format!("{} consistency check: {what}", self.name())));
        let n = table.total_draws();
        match self {
            Benchmark::Example1 => {
                if n != 45 {
                    return fail(format!("n = {n}, expected 45"));
                }
                let m = table.model_counts()?.get(2, 1);
                if table.get(2, 1) != 18 || (m - 10.0).abs() > 0.5 {
                    return fail(format!("cell (3,2) has {} observed, {m:.2} expected", table.get(2, 1)));
                }
            }
            Benchmark::Example2 => {
                if n != 8297 {
                    return fail(format!("n = {n}, expected 8297"));
                }
                let m = table.model_counts()?.get(3, 0);
                if table.get(3, 0) != 982 || (m - 1057.6).abs() > 0.05 {
                    return fail(format!("cell (4,1) has {} observed, {m:.2} expected", table.get(3, 0)));
                }
            }
            Benchmark::Example3 => {
                if n != 30 {
                    return fail(format!("n = {n}, expected 30"));
                }
                if table.alleles() < 6 || table.get(5, 5) != 1 {
                    return fail("cell (6,6) must hold exactly one count".into());
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown benchmark `{s}`")))
    }
}

/// A benchmark name or a path to a dataset file.
pub fn load_dataset(spec: &str) -> Result<Dataset> {
    match spec.parse::<Benchmark>() {
        Ok(bench) => bench.dataset(),
        Err(_) => Dataset::from_path(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let t = parse_dataset("r=2\n1\n0,1\n").unwrap();
        assert_eq!(t.cells(), &[1, 0, 1]);
    }

    #[test]
    fn comments_labels_and_whitespace() {
        let text = "# header comment\n\n  r = 3 \nlabels= A, B ,C\n4   # first row\n 1 , 2\n\n0,3,5\n";
        let d = Dataset::parse(text).unwrap();
        assert_eq!(d.labels.as_deref().unwrap(), ["A", "B", "C"]);
        assert_eq!(d.table.cells(), &[4, 1, 2, 0, 3, 5]);
        assert_eq!(d.to_text(), "r=3\nlabels=A,B,C\n4\n1,2\n0,3,5\n");
    }

    #[test]
    fn ragged_row_names_the_row() {
        let err = parse_dataset("r=3\n1\n2,3\n4,5,6,7\n").unwrap_err();
        assert!(matches!(err, Error::RowLength { row: 3, line: 4, expected: 3, found: 4 }));
        assert!(err.to_string().contains("row 3"));
        assert!(matches!(
            parse_dataset("r=3\n1\n2\n"),
            Err(Error::RowLength { row: 2, .. })
        ));
    }

    #[test]
    fn bad_fields_carry_position() {
        match parse_dataset("r=2\n1\n0,-4\n").unwrap_err() {
            Error::Parse { line, column, message } => {
                assert_eq!((line, column), (3, 3));
                assert!(message.contains("negative"));
            }
            e => panic!("unexpected {e}"),
        }
        match parse_dataset("r=2\n1\n0, 2.5\n").unwrap_err() {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (3, 4)),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(parse_dataset("2\n1\n0,1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dataset("r=x\n"), Err(Error::Parse { line: 1, column: 3, .. })));
        assert!(matches!(parse_dataset("r=2\n1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_dataset("r=2\n1\n0,1\n5\n"), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(parse_dataset(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn bundled_examples() {
        let t = Benchmark::Example1.table().unwrap();
        assert_eq!(t.total_draws(), 45);
        assert_eq!(t.get(2, 1), 18);
        assert!((t.model_counts().unwrap().get(2, 1) - 10.0).abs() < 0.5);

        let t = Benchmark::Example2.table().unwrap();
        assert_eq!(t.total_draws(), 8297);
        assert!((t.model_counts().unwrap().get(3, 0) - 1057.6).abs() < 0.05);

        assert!(matches!(Benchmark::Example3.table(), Err(Error::MissingBenchmark(_))));
    }

    #[test]
    fn load_by_name_or_path() {
        assert_eq!(load_dataset("Example1").unwrap().table.total_draws(), 45);
        let err = load_dataset("/nonexistent/missing.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/missing.csv"));
    }
}
