//! CSV emission and parse-back.
//!
//! Floats are written as `{:.5e}` (six significant digits), undefined values
//! as `NA`.

use std::io::{Read, Write};
use std::path::Path;

use super::sweep::ResultRow;
use crate::protocol::Scheme;

pub const HEADER: [&str; 14] = [
    "scheme",
    "snr_db",
    "n_units",
    "attacked_units",
    "rho_empirical",
    "rho_analytic",
    "gamma",
    "mse_empirical",
    "mse_analytic",
    "csk_bits",
    "csk_info",
    "kdr",
    "trials",
    "status",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}, column `{column}`: {message}")]
    Field { line: usize, column: &'static str, message: String },
}

fn float(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), float)
}

fn record(r: &ResultRow) -> [String; 14] {
    [
        r.scheme.key().to_string(),
        float(r.snr_db),
        r.n_units.to_string(),
        r.attacked_units.to_string(),
        float(r.rho_empirical),
        opt(r.rho_analytic),
        opt(r.gamma),
        float(r.mse_empirical),
        opt(r.mse_analytic),
        opt(r.csk_bits),
        opt(r.csk_info),
        float(r.kdr),
        r.trials.to_string(),
        r.status.clone(),
    ]
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), CsvError> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, CsvError> {
    let mut rd = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let err = |c: usize, m: String| CsvError::Field { line, column: HEADER[c], message: m };
        let num = |c: usize| -> Result<f64, CsvError> { field(c).parse().map_err(|e| err(c, format!("{e}"))) };
        let int = |c: usize| -> Result<usize, CsvError> { field(c).parse().map_err(|e| err(c, format!("{e}"))) };
        let maybe = |c: usize| -> Result<Option<f64>, CsvError> {
            if field(c) == "NA" {
                Ok(None)
            } else {
                num(c).map(Some)
            }
        };
        rows.push(ResultRow {
            scheme: field(0).parse::<Scheme>().map_err(|e| err(0, e.to_string()))?,
            snr_db: num(1)?,
            n_units: int(2)?,
            attacked_units: int(3)?,
            rho_empirical: num(4)?,
            rho_analytic: maybe(5)?,
            gamma: maybe(6)?,
            mse_empirical: num(7)?,
            mse_analytic: maybe(8)?,
            csk_bits: maybe(9)?,
            csk_info: maybe(10)?,
            kdr: num(11)?,
            trials: int(12)?,
            status: field(13).to_string(),
        });
    }
    Ok(rows)
}

pub fn load_csv(path: &Path) -> Result<Vec<ResultRow>, CsvError> {
    read_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize) -> ResultRow {
        ResultRow {
            scheme: Scheme::ALL[i % 3],
            snr_db: 5.0 * i as f64,
            n_units: 30,
            attacked_units: 5,
            rho_empirical: 0.123456789 * i as f64,
            rho_analytic: (i.is_multiple_of(2)).then_some(1.0 / 3.0),
            gamma: None,
            mse_empirical: 12345.6789,
            mse_analytic: Some(-2.5e-7),
            csk_bits: Some(1.75),
            csk_info: Some(0.9),
            kdr: 0.0625,
            trials: 1000,
            status: "ok".into(),
        }
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), HEADER.join(",") + "\n");
    }

    #[test]
    fn one_line_per_row() {
        let rows: Vec<_> = (0..21).map(row).collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 22);
    }

    #[test]
    fn parse_back_to_six_digits() {
        let rows: Vec<_> = (0..7).map(row).collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rows.len());
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-6 * a.abs().max(b.abs()) || (a == 0.0 && b == 0.0);
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.scheme, b.scheme);
            assert!(close(a.rho_empirical, b.rho_empirical));
            assert!(close(a.mse_empirical, b.mse_empirical));
            assert_eq!(a.rho_analytic.is_some(), b.rho_analytic.is_some());
            assert_eq!(b.gamma, None);
            assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn error_status_with_commas_survives() {
        let mut r = row(1);
        r.status = "error: bad, very bad".into();
        r.rho_empirical = f64::NAN;
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0].status, "error: bad, very bad");
        assert!(back[0].rho_empirical.is_nan());
    }
}
