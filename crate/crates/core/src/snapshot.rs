//! Binary field snapshots.
//!
//! Layout: magic `NCVF`, `u32` version, `u32` n, `f64` R, then `n^2`
//! little-endian `(re, im)` pairs in row-major order.

use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::field::{ScalarField, C64};
use crate::grid::{Grid2D, GridError};

const MAGIC: &[u8; 4] = b"NCVF";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a field snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub fn write_snapshot<W: Write>(f: &ScalarField, mut w: W) -> io::Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&g.half_extent().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for v in f.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<ScalarField, SnapshotError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != SNAPSHOT_VERSION {
        return Err(SnapshotError::Version(version));
    }
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let grid = Grid2D::new(f64::from_le_bytes(b8), n)?;
    let mut raw = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    Ok(ScalarField::new(grid, values)?)
}

pub fn save_snapshot(f: &ScalarField, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_snapshot(f, &mut w)?;
    w.flush()
}

pub fn load_snapshot(path: &Path) -> Result<ScalarField, SnapshotError> {
    let file = std::fs::File::open(path)?;
    read_snapshot(io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn roundtrip_is_bitwise() {
        let g = make_grid(3.5, 32).unwrap();
        let f = ScalarField::from_fn(g, |x, y| C64::new(x.sin() * y, -x / 3.0));
        let mut buf = Vec::new();
        write_snapshot(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 20 + 16 * 32 * 32);
        let back = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_snapshot(&b"XXXX0000"[..]), Err(SnapshotError::BadMagic)));
    }
}
