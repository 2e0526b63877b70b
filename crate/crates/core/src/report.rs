//! Line-delimited JSON result records.
//!
//! Each record is one JSON object carrying `record` (its type) and `version`
//! next to the result's own fields. Floats use the shortest representation
//! that parses back to the same value; non-finite values become the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::io::Write;
use std::path::Path;

use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) fn float_or_string<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Reads back a number written by the record serializer.
pub fn value_as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

/// One record as a JSON line (no trailing newline).
pub fn to_record<T: Serialize>(record: &str, body: &T) -> Result<String> {
    let value = serde_json::to_value(body).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut map = Map::new();
    map.insert("record".into(), Value::String(record.into()));
    map.insert("version".into(), Value::String(VERSION.into()));
    match value {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("value".into(), other);
        }
    }
    serde_json::to_string(&Value::Object(map)).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Writes JSON lines to `path`, replacing any existing file.
pub fn write_records(path: &Path, lines: &[String]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for line in lines {
        writeln!(file, "{line}").map_err(io)?;
    }
    file.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        seed: u64,
        #[serde(serialize_with = "float_or_string")]
        x: f64,
        y: f64,
    }

    #[test]
    fn envelope_and_round_trip() {
        let y = 0.1 + 0.2;
        let line = to_record("sample", &Sample { seed: 3, x: f64::INFINITY, y }).unwrap();
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["record"], "sample");
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["seed"], 3);
        assert_eq!(value_as_f64(&v["x"]), Some(f64::INFINITY));
        assert_eq!(value_as_f64(&v["y"]).unwrap().to_bits(), y.to_bits());
        assert!(!line.contains('\n'));
    }
}
