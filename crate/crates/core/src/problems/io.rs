//! Binary PGM images and CSV matrices. Files are row-major; vectors are column-major.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linops::Shape;
use crate::vector::C64;

/// Writes a 16-bit P5 image; values are clamped to [0, 1] and mapped to 0..=65535.
pub fn write_pgm(path: &Path, shape: Shape, values: &[f64]) -> Result<()> {
    crate::error::check_len(shape.len(), values.len())?;
    let mut buf = format!("P5\n{} {}\n65535\n", shape.cols, shape.rows).into_bytes();
    for i in 0..shape.rows {
        for j in 0..shape.cols {
            let v = values[i + shape.rows * j];
            let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
            buf.extend_from_slice(&((v * 65535.0).round() as u16).to_be_bytes());
        }
    }
    fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

fn header_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = Vec::new();
    loop {
        let mut byte = [0u8];
        if r.read(&mut byte)? == 0 {
            break;
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut line = Vec::new();
            r.read_until(b'\n', &mut line)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(c);
    }
    String::from_utf8(tok).map_err(|e| Error::Format(e.to_string()))
}

/// Reads an 8- or 16-bit P5 image into column-major values in [0, 1].
pub fn read_pgm(path: &Path) -> Result<(Shape, Vec<f64>)> {
    let mut r = BufReader::new(fs::File::open(path)?);
    if header_token(&mut r)? != "P5" {
        return Err(Error::Format("not a binary PGM (P5) file".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        let t = header_token(&mut r)?;
        t.parse().map_err(|_| Error::Format(format!("bad PGM {what}: {t:?}")))
    };
    let cols = num("width")?;
    let rows = num("height")?;
    let maxval = num("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    let wide = maxval > 255;
    let mut data = vec![0u8; rows * cols * if wide { 2 } else { 1 }];
    r.read_exact(&mut data)
        .map_err(|_| Error::Format("truncated PGM pixel data".into()))?;
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let p = i * cols + j;
            let v = if wide {
                u16::from_be_bytes([data[2 * p], data[2 * p + 1]]) as f64
            } else {
                data[p] as f64
            };
            out[i + rows * j] = v / maxval as f64;
        }
    }
    Ok((Shape::new(rows, cols), out))
}

/// Writes a column-major matrix as CSV rows; complex entries use the `a+bi` form.
pub fn write_matrix_csv(path: &Path, rows: usize, cols: usize, data: &[C64]) -> Result<()> {
    crate::error::check_len(rows * cols, data.len())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    for i in 0..rows {
        let rec: Vec<String> = (0..cols)
            .map(|j| {
                let v = data[i + rows * j];
                if v.im == 0.0 {
                    format!("{:e}", v.re)
                } else {
                    format!("{:e}{:+e}i", v.re, v.im)
                }
            })
            .collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV matrix into `(rows, cols, column-major data)`.
pub fn read_matrix_csv(path: &Path) -> Result<(usize, usize, Vec<C64>)> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut rows_data: Vec<Vec<C64>> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<C64>().map_err(|_| Error::Format(format!("bad matrix entry {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        rows_data.push(row);
    }
    let rows = rows_data.len();
    let cols = rows_data.first().map_or(0, |r| r.len());
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for (i, row) in rows_data.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i + rows * j] = *v;
        }
    }
    Ok((rows, cols, out))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("img.pgm");
        let shape = Shape::new(3, 2);
        let vals: Vec<f64> = (0..6).map(|k| k as f64 / 5.0).collect();
        write_pgm(&p, shape, &vals).unwrap();
        let (s, back) = read_pgm(&p).unwrap();
        assert_eq!(s, shape);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-15);
        }
        // header width is the column count
        let raw = std::fs::read(&p).unwrap();
        assert!(raw.starts_with(b"P5\n2 3\n65535\n"));
    }

    #[test]
    fn pgm_rejects_ascii() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pgm");
        std::fs::write(&p, b"P2\n1 1\n255\n0\n").unwrap();
        assert!(read_pgm(&p).is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let data = vec![C64::new(1.5, 0.0), C64::new(-2.0, 0.25), C64::new(0.0, -1.0), C64::new(3e-7, 0.0)];
        write_matrix_csv(&p, 2, 2, &data).unwrap();
        let (r, c, back) = read_matrix_csv(&p).unwrap();
        assert_eq!((r, c), (2, 2));
        assert_eq!(back, data);
    }
}
