//! Dataset CSV files: a header row, the response in a first column named
//! `y`, then one column per feature.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use l0pd::DenseMatrix;
use sha2::{Digest, Sha256};

pub struct Dataset {
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    /// Hex SHA-256 of the file bytes.
    pub hash: String,
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    let (x, y) = parse_dataset(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Dataset { x, y, hash })
}

pub fn parse_dataset(bytes: &[u8]) -> Result<(DenseMatrix, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = rdr.headers().context("line 1: unreadable header")?.clone();
    if header.get(0) != Some("y") {
        bail!("line 1: first column must be named `y`");
    }
    let width = header.len();
    if width < 2 {
        bail!("line 1: need at least one feature column after `y`");
    }

    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); width - 1];
    for rec in rdr.records() {
        let rec = rec.context("malformed CSV record")?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            bail!("line {line}: expected {width} fields, found {}", rec.len());
        }
        for (k, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .with_context(|| {
                    format!(
                        "line {line}, column {}: `{cell}` is not a finite number",
                        k + 1
                    )
                })?;
            if k == 0 {
                y.push(v);
            } else {
                cols[k - 1].push(v);
            }
        }
    }
    if y.is_empty() {
        bail!("dataset has no data rows");
    }
    let n = y.len();
    let data: Vec<f64> = cols.into_iter().flatten().collect();
    let x = DenseMatrix::from_col_major(n, width - 1, data)?;
    Ok((x, y))
}

pub fn write_dataset(path: &Path, x: &DenseMatrix, y: &[f64]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["y".to_string()];
    header.extend((1..=x.n_cols()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(x.n_cols() + 1);
    for (i, yi) in y.iter().enumerate() {
        row.clear();
        row.push(yi.to_string());
        row.extend((0..x.n_cols()).map(|j| x.get(i, j).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_column_major() {
        let (x, y) = parse_dataset(b"y,x1,x2\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(y, vec![1.0, 4.0]);
        assert_eq!(x.col(0), &[2.0, 5.0]);
        assert_eq!(x.col(1), &[3.0, 6.0]);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_dataset(b"y,x1\n1,2\n3\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 3"), "{e:#}");
        let e = parse_dataset(b"y,x1\n1,2\n3,4\nfoo,1\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 4"), "{e:#}");
        let e = parse_dataset(b"z,x1\n1,2\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 1"));
        assert!(parse_dataset(b"y,x1\n").is_err());
        assert!(parse_dataset(b"y,x1\n1,NaN\n").is_err());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let x = DenseMatrix::from_rows(&[vec![0.1, -2.5], vec![1e-17, 3.0]]).unwrap();
        let y = vec![0.3, -7.0];
        write_dataset(&path, &x, &y).unwrap();
        let d = read_dataset(&path).unwrap();
        assert_eq!(d.x, x);
        assert_eq!(d.y, y);
        assert_eq!(d.hash.len(), 64);
    }
}
