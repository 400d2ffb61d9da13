//! Plain-text dense complex matrix files: optional `#` header lines, a
//! `row,col,re,im` column line, then one entry per line.

use std::io::{BufRead, Write};

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

pub const COLUMNS: &str = "row,col,re,im";

/// Writes every entry with 17 significant digits so that reading back is exact.
pub fn write_entries<W: Write>(out: &mut W, header: Option<&str>, m: MatRef<'_, c64>) -> Result<()> {
    if let Some(h) = header {
        writeln!(out, "# {h}")?;
    }
    writeln!(out, "{COLUMNS}")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            writeln!(out, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
        }
    }
    Ok(())
}

/// Parsed file: header comment lines (without the leading `# `) and the matrix.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub header: Vec<String>,
    pub matrix: Mat<c64>,
}

pub fn read_entries<R: BufRead>(input: R) -> Result<MatrixFile> {
    let mut header = Vec::new();
    let mut entries = Vec::new();
    let (mut nrows, mut ncols) = (0usize, 0usize);
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line == COLUMNS {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            header.push(rest.trim().to_string());
            continue;
        }
        let bad = || Error::Format(format!("line {}: expected row,col,re,im", lineno + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let i: usize = fields[0].parse().map_err(|_| bad())?;
        let j: usize = fields[1].parse().map_err(|_| bad())?;
        let re: f64 = fields[2].parse().map_err(|_| bad())?;
        let im: f64 = fields[3].parse().map_err(|_| bad())?;
        nrows = nrows.max(i + 1);
        ncols = ncols.max(j + 1);
        entries.push((i, j, c64::new(re, im)));
    }
    if entries.len() != nrows * ncols {
        return Err(Error::Format(format!(
            "{} entries for a {nrows}x{ncols} matrix",
            entries.len()
        )));
    }
    let mut matrix = Mat::<c64>::zeros(nrows, ncols);
    let mut seen = vec![false; nrows * ncols];
    for (i, j, z) in entries {
        if std::mem::replace(&mut seen[i * ncols + j], true) {
            return Err(Error::Format(format!("duplicate entry ({i},{j})")));
        }
        matrix[(i, j)] = z;
    }
    Ok(MatrixFile { header, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let m = Mat::<c64>::from_fn(3, 2, |i, j| {
            c64::new((i as f64 + 0.1).sqrt() / 3.0, -(j as f64 + 1.0).ln() * 1e-300)
        });
        let mut buf = Vec::new();
        write_entries(&mut buf, Some("test v1 a=1"), m.as_ref()).unwrap();
        let back = read_entries(buf.as_slice()).unwrap();
        assert_eq!(back.header, vec!["test v1 a=1".to_string()]);
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(back.matrix[(i, j)].re.to_bits(), m[(i, j)].re.to_bits());
                assert_eq!(back.matrix[(i, j)].im.to_bits(), m[(i, j)].im.to_bits());
            }
        }
    }

    #[test]
    fn missing_entries_rejected() {
        let text = "row,col,re,im\n0,0,1,0\n1,1,1,0\n";
        assert!(matches!(read_entries(text.as_bytes()), Err(Error::Format(_))));
    }
}
