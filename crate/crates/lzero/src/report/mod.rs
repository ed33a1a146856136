//! Deterministic report emission: JSON with every float printed at 12
//! significant digits, and CSV plot-data tables with a documenting
//! comment line. Equal inputs produce byte-identical output, so runs
//! can be diffed across machines.

use std::io;

use serde::Serialize;

use crate::error::{Error, Result};

/// Formats a float with 12 significant digits in scientific notation,
/// the one number format used in every emitted artifact.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

struct TwelveDigits;

impl serde_json::ser::Formatter for TwelveDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.11e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.11e}")
    }
}

/// Serializes any report to compact JSON with 12-significant-digit
/// floats (non-finite values become `null`, as usual for JSON).
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, TwelveDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(io::Error::other(e)))?;
    String::from_utf8(out).map_err(|e| Error::Io(io::Error::other(e)))
}

/// One CSV cell: numbers are printed via [`sig12`], text verbatim.
#[derive(Debug, Clone)]
pub enum Field {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Field {
    fn from(x: f64) -> Field {
        Field::Num(x)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Field {
        Field::Int(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Field {
        Field::Int(x as i64)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Field {
        Field::Text(x.to_owned())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Field {
        Field::Text(x)
    }
}

/// Builder for a CSV table: a `#`-prefixed comment documenting the
/// columns (and anything run-specific such as the seed), the header
/// row, then data rows with a fixed arity.
#[derive(Debug, Clone)]
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(comment: &str, columns: &[&str]) -> Csv {
        assert!(!columns.is_empty(), "a table needs at least one column");
        let mut buf = String::new();
        for line in comment.lines() {
            buf.push_str("# ");
            buf.push_str(line);
            buf.push('\n');
        }
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv {
            buf,
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, fields: &[Field]) -> Result<()> {
        if fields.len() != self.columns {
            return Err(Error::InvalidParameter(format!(
                "csv row has {} fields, table has {} columns",
                fields.len(),
                self.columns
            )));
        }
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match f {
                Field::Num(x) => self.buf.push_str(&sig12(*x)),
                Field::Int(x) => self.buf.push_str(&x.to_string()),
                Field::Text(s) => {
                    if s.contains(',') || s.contains('\n') || s.contains('"') {
                        return Err(Error::InvalidParameter(format!(
                            "csv text field needs quoting, which reports never do: {s:?}"
                        )));
                    }
                    self.buf.push_str(s);
                }
            }
        }
        self.buf.push('\n');
        Ok(())
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize)]
    struct Sample {
        pi: f64,
        tiny: f64,
        negative: f64,
        count: usize,
        name: &'static str,
    }

    fn sample() -> Sample {
        Sample {
            pi: std::f64::consts::PI,
            tiny: 1.5e-300,
            negative: -0.25,
            count: 7,
            name: "ball",
        }
    }

    #[test]
    fn json_floats_carry_twelve_significant_digits() {
        let s = to_json(&sample()).unwrap();
        assert!(s.contains("\"pi\":3.14159265359e0"), "{s}");
        assert!(s.contains("\"tiny\":1.50000000000e-300"), "{s}");
        assert!(s.contains("\"negative\":-2.50000000000e-1"), "{s}");
        assert!(s.contains("\"count\":7"), "{s}");
        // the output stays valid JSON and parses back to the same values
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let back = v["pi"].as_f64().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn json_output_is_byte_stable() {
        assert_eq!(to_json(&sample()).unwrap(), to_json(&sample()).unwrap());
    }

    #[test]
    fn nonfinite_floats_become_null() {
        #[derive(Serialize)]
        struct Bad {
            x: f64,
        }
        let s = to_json(&Bad { x: f64::NAN }).unwrap();
        assert_eq!(s, "{\"x\":null}");
    }

    #[test]
    fn csv_documents_columns_and_round_trips() {
        let mut t = Csv::new("sections profile\nseed: 42", &["t", "A"]);
        t.row(&[0.0.into(), std::f64::consts::PI.into()]).unwrap();
        t.row(&[0.5.into(), 2.35619449019.into()]).unwrap();
        let s = t.finish();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# sections profile");
        assert_eq!(lines[1], "# seed: 42");
        assert_eq!(lines[2], "t,A");
        assert_eq!(lines[3], "0.00000000000e0,3.14159265359e0");
        let a: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
        assert!((a - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn csv_empty_series_is_header_only() {
        let t = Csv::new("empty", &["t", "A"]);
        assert_eq!(t.finish(), "# empty\nt,A\n");
    }

    #[test]
    fn csv_rejects_arity_mismatch_and_unquotable_text() {
        let mut t = Csv::new("c", &["a", "b"]);
        assert!(t.row(&[1.0.into()]).is_err());
        assert!(t.row(&[1.0.into(), "x,y".into()]).is_err());
        assert!(t.row(&[1.0.into(), "fails".into()]).is_ok());
    }
}
