//! Plain-text writers: OFF meshes, MatrixMarket matrices, gnuplot columns.

use std::io::{self, Write};

use lb_spectra_core::mesh::BaseMesh;
use lb_spectra_core::sparse::CsrMatrix;
use lb_spectra_core::CellKind;

/// Base mesh as an OFF polygon file. Curves have no faces and are refused.
pub fn write_off(mesh: &BaseMesh, out: &mut impl Write) -> io::Result<()> {
    if mesh.cell_kind == CellKind::Segment {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "OFF needs a surface mesh"));
    }
    writeln!(out, "OFF")?;
    writeln!(out, "{} {} 0", mesh.n_vertices(), mesh.n_cells())?;
    for v in &mesh.vertices {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
    }
    for c in 0..mesh.n_cells() {
        let vs = mesh.cell_vertices(c);
        write!(out, "{}", vs.len())?;
        for v in vs {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Lower triangle of a symmetric matrix in MatrixMarket coordinate format.
pub fn write_matrix_market(a: &CsrMatrix, out: &mut impl Write) -> io::Result<()> {
    let entries: Vec<(usize, usize, f64)> =
        (0..a.n).flat_map(|i| a.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v))).collect();
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", a.n, a.n, entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Whitespace-separated columns under a `#` header, for gnuplot.
pub fn write_dat(header: &[&str], rows: &[Vec<f64>], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "# {}", header.join(" "))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(())
}
