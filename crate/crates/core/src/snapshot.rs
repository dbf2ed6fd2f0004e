//! Binary field snapshots.
//!
//! Layout: magic `MHD3S`, version u32, nx ny nz u32, field count u32, then
//! per field a u32 length-prefixed UTF-8 name; after the header the physical
//! samples of each field as little-endian f64, x-fastest ordering. A 2D
//! snapshot has nz = 1.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::state::StateVector;

pub const MAGIC: &[u8; 5] = b"MHD3S";
pub const VERSION: u32 = 1;

/// Named physical fields on one grid, ready for writing.
pub struct Snapshot {
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn from_fields(names: &[&str], fields: &[&ScalarField]) -> Result<Self> {
        if names.len() != fields.len() || fields.is_empty() {
            return Err(Error::SnapshotFormat(
                "field names and data must match and be nonempty".into(),
            ));
        }
        let grid = fields[0].grid();
        for f in fields {
            grid.check_same_dims(f.grid())?;
        }
        Ok(Snapshot {
            nx: grid.nx as u32,
            ny: grid.ny as u32,
            nz: grid.nz as u32,
            names: names.iter().map(|s| s.to_string()).collect(),
            data: fields.iter().map(|f| f.to_physical()).collect(),
        })
    }

    pub fn from_state(v: &StateVector) -> Result<Self> {
        Snapshot::from_fields(
            &["r", "u1", "u2", "u3", "b1", "b2", "b3"],
            &[
                &v.r, &v.u[0], &v.u[1], &v.u[2], &v.b[0], &v.b[1], &v.b[2],
            ],
        )
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [self.nx, self.ny, self.nz, self.names.len() as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        for name in &self.names {
            let bytes = name.as_bytes();
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(bytes)?;
        }
        let n = (self.nx * self.ny * self.nz) as usize;
        for field in &self.data {
            if field.len() != n {
                return Err(Error::SnapshotFormat("field size mismatch".into()));
            }
            let mut buf = Vec::with_capacity(n * 8);
            for v in field {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::SnapshotFormat("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut dyn Read| -> Result<u32> {
            r.read_exact(&mut u32buf)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(Error::SnapshotFormat(format!(
                "unsupported version {version}"
            )));
        }
        let nx = read_u32(r)?;
        let ny = read_u32(r)?;
        let nz = read_u32(r)?;
        let count = read_u32(r)? as usize;
        if nx == 0 || ny == 0 || nz == 0 || count == 0 || count > 1024 {
            return Err(Error::SnapshotFormat("implausible header".into()));
        }
        let mut names = Vec::with_capacity(count);
        for _ in 0..count {
            let len = read_u32(r)? as usize;
            if len > 4096 {
                return Err(Error::SnapshotFormat("name too long".into()));
            }
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            names.push(
                String::from_utf8(buf)
                    .map_err(|_| Error::SnapshotFormat("name not UTF-8".into()))?,
            );
        }
        let n = (nx * ny * nz) as usize;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let mut buf = vec![0u8; n * 8];
            r.read_exact(&mut buf)?;
            let field: Vec<f64> = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            data.push(field);
        }
        Ok(Snapshot {
            nx,
            ny,
            nz,
            names,
            data,
        })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut f)
    }

    pub fn grid(&self) -> Result<Arc<GridSpec>> {
        GridSpec::new(self.nx as usize, self.ny as usize, self.nz as usize)
    }

    /// Reassemble a state vector from a seven-field snapshot.
    pub fn to_state(&self) -> Result<StateVector> {
        if self.names != ["r", "u1", "u2", "u3", "b1", "b2", "b3"] {
            return Err(Error::SnapshotFormat(format!(
                "expected the seven state fields, found {:?}",
                self.names
            )));
        }
        let grid = self.grid()?;
        let mut v = StateVector::zeros(&grid);
        for (c, data) in self.data.iter().enumerate() {
            *v.component_mut(c) = ScalarField::from_physical(&grid, data)?;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{random_state, seeded_rng};

    #[test]
    fn state_round_trip() {
        let grid = GridSpec::new(8, 8, 8).unwrap();
        let mut rng = seeded_rng(223);
        let v = random_state(&grid, &mut rng, 2.0);
        let snap = Snapshot::from_state(&v).unwrap();
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        let back = Snapshot::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back.names, snap.names);
        let v2 = back.to_state().unwrap();
        // Physical round trip is exact; the spectral comparison only sees
        // transform rounding.
        assert!(v2.sub(&v).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn header_layout_is_stable() {
        let grid = GridSpec::new_2d(4, 4).unwrap();
        let f = ScalarField::zeros(&grid).add_constant(1.0);
        let snap = Snapshot::from_fields(&["r"], &[&f]).unwrap();
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"MHD3S");
        assert_eq!(u32::from_le_bytes(buf[5..9].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[9..13].try_into().unwrap()), 4); // nx
        assert_eq!(u32::from_le_bytes(buf[17..21].try_into().unwrap()), 1); // nz
        assert_eq!(u32::from_le_bytes(buf[21..25].try_into().unwrap()), 1); // count
        assert_eq!(u32::from_le_bytes(buf[25..29].try_into().unwrap()), 1); // name len
        assert_eq!(buf[29], b'r');
        // 16 samples of 1.0 follow.
        assert_eq!(buf.len(), 30 + 16 * 8);
        assert_eq!(
            f64::from_le_bytes(buf[30..38].try_into().unwrap()),
            1.0
        );
    }

    #[test]
    fn rejects_corrupt_input() {
        let mut buf = b"NOTMH".to_vec();
        buf.extend_from_slice(&[0u8; 40]);
        assert!(Snapshot::read_from(&mut buf.as_slice()).is_err());
    }
}
