use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Field, Grid};
use crate::error::{CoreError, Result};

/// Writes `u64 dim | u64 M | f64 L` then `(re, im)` pairs, all little-endian.
pub fn write_field_dump<W: Write>(u: &Field, mut w: W) -> std::io::Result<()> {
    let g = u.grid();
    w.write_all(&(g.dim as u64).to_le_bytes())?;
    w.write_all(&(g.points_per_axis as u64).to_le_bytes())?;
    w.write_all(&g.half_length.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * u.values().len());
    for v in u.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_field_dump<R: Read>(mut r: R) -> Result<Field> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| CoreError::InvalidGrid(format!("reading field dump: {e}")))?;
    if bytes.len() < 24 {
        return Err(CoreError::InvalidGrid("field dump shorter than header".into()));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().unwrap() };
    let dim = u64::from_le_bytes(word(0)) as usize;
    let m = u64::from_le_bytes(word(1)) as usize;
    let l = f64::from_le_bytes(word(2));
    let grid = Grid::new(dim, l, m)?;
    let body = &bytes[24..];
    if body.len() != 16 * grid.len() {
        return Err(CoreError::InvalidGrid(format!(
            "field dump body has {} bytes, expected {}",
            body.len(),
            16 * grid.len()
        )));
    }
    let values = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Field::new(grid, values)
}

/// `radius,modulus` rows for every node, sorted by radius from the origin.
pub fn write_radial_csv<W: Write>(u: &Field, mut w: W) -> std::io::Result<()> {
    let g = u.grid();
    let mut rows: Vec<(f64, f64)> = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = g.point(i);
            ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(), v.norm())
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    writeln!(w, "radius,modulus")?;
    for (r, m) in rows {
        writeln!(w, "{r:.16e},{m:.16e}")?;
    }
    Ok(())
}
