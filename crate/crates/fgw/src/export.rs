//! Deterministic JSON and CSV output. Every float is written with 17
//! significant digits, which round-trips `f64` exactly.

use std::fmt::Write as _;
use std::io;

use fgw_core::Matrix;
use serde::Serialize;

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Compact JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

/// Row-major CSV. The first line is a `#` comment carrying `key=value`
/// metadata; a second comment line lists the row names when given.
pub fn matrix_to_csv(m: &Matrix, metadata: &[(&str, String)], names: Option<&[String]>) -> String {
    let mut out = String::from("#");
    for (k, v) in metadata {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    if let Some(names) = names {
        let _ = writeln!(out, "# rows: {}", names.join(","));
    }
    for row in m.iter_rows() {
        let line: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses the numeric rows of [`matrix_to_csv`] output.
pub fn matrix_from_csv(text: &str) -> Option<Matrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|x| x.trim().parse::<f64>().ok())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<_>>()?;
    if rows.is_empty() {
        return Some(Matrix::zeros(0, 0));
    }
    Matrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1f64, 1.0 / 3.0, 2.0e-300, -7.5, 0.0, 123456789.123_456_79] {
            let s = to_json_string(&x);
            let back: f64 = serde_json::from_str(s.trim()).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(to_json_string(&f64::NAN), "null\n");
    }

    #[test]
    fn csv_round_trip() {
        let m = Matrix::from_rows(&[[1.0, 0.25], [1.0 / 3.0, -2.0]]).unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let text = matrix_to_csv(&m, &[("alpha", "0.5".into())], Some(&names));
        assert!(text.starts_with("# alpha=0.5\n# rows: a,b\n"));
        assert_eq!(matrix_from_csv(&text).unwrap(), m);
    }
}
