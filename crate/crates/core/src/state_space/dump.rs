use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::StateSpaceModel;
use crate::error::{Error, Result};

/// Write the nonzeros of `m` in MatrixMarket coordinate format (1-based).
pub fn write_matrix_market(m: &DMatrix<f64>, out: &mut impl Write) -> std::io::Result<()> {
    let nnz = m.iter().filter(|v| **v != 0.0).count();
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

/// Dump `H(mdot)`, `B` and the observation matrix as `H.mtx`, `B.mtx`,
/// `C.mtx` into `dir`.
pub fn dump_matrices(ssm: &StateSpaceModel, mdot: &[f64], dir: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let h = ssm.h(mdot)?;
    for (name, m) in [("H", &h), ("B", ssm.b()), ("C", &ssm.observation)] {
        let path = dir.join(format!("{name}.mtx"));
        let file = fs::File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        write_matrix_market(m, &mut w)
            .and_then(|_| w.flush())
            .map_err(|source| Error::Io { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_format() {
        let m = DMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, -2.0]);
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "2 2 2");
        assert_eq!(lines[2], "1 1 1.5e0");
        assert_eq!(lines[3], "2 2 -2e0");
    }
}
