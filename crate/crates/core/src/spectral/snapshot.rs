//! `NLSF` snapshot files: magic, version, `d`, `N` (u32 LE), `L`, `t` (f64 LE),
//! then `N^d` interleaved real/imaginary f64 LE values, row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::Field;
use super::grid::Grid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"NLSF";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, u: &Field, time: f64) -> Result<()> {
    let g = u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&g.half_width().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for z in u.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a snapshot, returning the field (on a freshly built grid) and its time.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(Field, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let half_width = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let grid = Grid::new(dim, half_width, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Ok((Field::from_values(&grid, values)?, time))
}

pub fn save_snapshot(path: &Path, u: &Field, time: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, u, time)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<(Field, f64)> {
    read_snapshot(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn header_layout() {
        let g = make_grid(1, 2.5, 16).unwrap();
        let u = Field::from_fn(&g, |p| Complex64::new(p[0], 1.0));
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &u, 0.75).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 4 + 4 + 8 + 8 + 16 * 16);
        assert_eq!(&bytes[0..4], b"NLSF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.5);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), 0.75);
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), -2.5);
        assert_eq!(f64::from_le_bytes(bytes[40..48].try_into().unwrap()), 1.0);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = make_grid(1, 1.0, 16).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &Field::zeros(&g), 0.0).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_snapshot(&bad[..]).is_err());
        assert!(read_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_snapshot(&long[..]).is_err());
    }
}
