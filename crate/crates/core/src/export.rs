//! Matrix and table serialization.
//!
//! JSON: `{"N": n, "entries": [[[re, im], ...], ...]}` with `entries[m][n]`
//! the coefficient of `e_m` in `W e_n`. Floats use shortest round-trip
//! formatting, so reading a written matrix gives back identical bits.
//!
//! CSV: one row per `m`, one cell per `n`, each cell the text `re,im`
//! (quoted, since it contains the delimiter).

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::GrowthReport;
use crate::linalg::CMatrix;
use crate::operator::OperatorMatrix;

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    #[serde(rename = "N")]
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

/// Writes `m` as JSON.
pub fn write_matrix_json<W: Write>(m: &OperatorMatrix<f64>, out: W) -> Result<()> {
    let e = m.entries();
    let doc = MatrixJson {
        n: m.trunc(),
        entries: (0..e.rows()).map(|i| e.row(i).iter().map(|z| [z.re, z.im]).collect()).collect(),
    };
    serde_json::to_writer(out, &doc).map_err(|e| Error::Format(e.to_string()))
}

/// Reads a matrix written by [`write_matrix_json`].
pub fn read_matrix_json<R: Read>(input: R) -> Result<OperatorMatrix<f64>> {
    let doc: MatrixJson = serde_json::from_reader(input).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.entries.len() != doc.n || doc.entries.iter().any(|r| r.len() != doc.n) {
        return Err(Error::Parse(format!("entries are not {0} x {0}", doc.n)));
    }
    let rows = doc.entries.into_iter().map(|r| r.into_iter().map(|[re, im]| Complex::new(re, im)).collect()).collect();
    OperatorMatrix::from_entries(CMatrix::from_rows(rows)?)
}

fn cell(z: Complex<f64>) -> String {
    format!("{:?},{:?}", z.re, z.im)
}

/// Writes `m` as CSV with `re,im` cells.
pub fn write_matrix_csv<W: Write>(m: &OperatorMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let e = m.entries();
    for i in 0..e.rows() {
        w.write_record(e.row(i).iter().map(|&z| cell(z))).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Reads a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv<R: Read>(input: R) -> Result<OperatorMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let row: Result<Vec<Complex<f64>>> = rec
            .iter()
            .map(|c| {
                let (re, im) = c.split_once(',').ok_or_else(|| Error::Parse(format!("cell '{c}' is not re,im")))?;
                let p = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
                Ok(Complex::new(p(re)?, p(im)?))
            })
            .collect();
        rows.push(row?);
    }
    OperatorMatrix::from_entries(CMatrix::from_rows(rows)?)
}

/// Plot-ready CSV of a growth probe: `N,norm,ratio` (ratio empty on the first row).
pub fn write_growth_csv<W: Write>(rep: &GrowthReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["N", "norm", "ratio"]).map_err(fmt)?;
    for (k, (n, norm)) in rep.truncations.iter().zip(&rep.norms).enumerate() {
        let ratio = if k == 0 { String::new() } else { format!("{:?}", rep.ratios[k - 1]) };
        w.write_record([n.to_string(), format!("{norm:?}"), ratio]).map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Plot-ready CSV of eigenvalue predictions: `m,predicted_re,predicted_im,computed_re,computed_im`.
pub fn write_eigen_csv<W: Write>(pairs: &[(Complex<f64>, Complex<f64>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["m", "predicted_re", "predicted_im", "computed_re", "computed_im"]).map_err(fmt)?;
    for (m, (p, e)) in pairs.iter().enumerate() {
        w.write_record([m.to_string(), format!("{:?}", p.re), format!("{:?}", p.im), format!("{:?}", e.re), format!("{:?}", e.im)])
            .map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// One sample of the kernel norms at `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSample {
    pub re: f64,
    pub im: f64,
    pub forward: f64,
    pub adjoint: f64,
}

/// Plot-ready CSV: `re,im,forward,adjoint`.
pub fn write_kernel_csv<W: Write>(samples: &[KernelSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::build_matrix;
    use crate::symbols::WcoSymbols;

    fn sample() -> OperatorMatrix<f64> {
        let s = WcoSymbols::new(Complex::new(0.3, 0.7), Complex::new(-1.1, 0.2), Complex::new(0.9, -0.4), Complex::new(0.1, 1.3))
            .unwrap();
        build_matrix(&s, 12).unwrap()
    }

    fn bits(m: &OperatorMatrix<f64>) -> Vec<(u64, u64)> {
        let e = m.entries();
        (0..e.rows()).flat_map(|i| e.row(i).iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>()).collect()
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let m = sample();
        let mut buf = Vec::new();
        write_matrix_json(&m, &mut buf).unwrap();
        let back = read_matrix_json(buf.as_slice()).unwrap();
        assert_eq!(bits(&m), bits(&back));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let m = sample();
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with('"'));
        assert_eq!(text.lines().count(), 12);
        assert_eq!(bits(&m), bits(&read_matrix_csv(buf.as_slice()).unwrap()));
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(matches!(read_matrix_json(&br#"{"N":2,"entries":[[[1,0]]]}"#[..]), Err(Error::Parse(_))));
        assert!(matches!(read_matrix_csv(&b"\"1;0\"\n"[..]), Err(Error::Parse(_))));
    }
}
