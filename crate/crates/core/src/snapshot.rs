//! CPMS snapshot files.
//!
//! Layout, little-endian, no padding:
//!
//! | offset | size        | content                    |
//! |--------|-------------|----------------------------|
//! | 0      | 4           | magic `b"CPMS"`            |
//! | 4      | 2           | version `u16` = 1          |
//! | 6      | 4           | width `u32`                |
//! | 10     | 4           | height `u32`               |
//! | 14     | 8           | mcs `u64`                  |
//! | 22     | 8           | seed `u64`                 |
//! | 30     | 4·w·h       | cell ids `u32`, row-major  |
//! | 30+4wh | 8·w·h       | field `f64`, row-major     |
//!
//! The two-channel view (binary occupancy, concentrations) is derived from the
//! cell ids and the field on read.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::diffusion::ChemField;
use crate::engine::SimState;
use crate::error::{Error, Result};
use crate::lattice::{CellId, Lattice};

pub const MAGIC: [u8; 4] = *b"CPMS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 30;
pub const EXTENSION: &str = "cpms";

/// Header fields of a CPMS file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotHeader {
    pub width: u32,
    pub height: u32,
    pub mcs: u64,
    pub seed: u64,
}

impl SnapshotHeader {
    pub fn sites(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Total file size implied by the header.
    pub fn file_len(&self) -> usize {
        HEADER_LEN + self.sites() * 12
    }

    fn parse(bytes: &[u8]) -> Result<Self> {
        let truncated = || Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        };
        if bytes.len() < 4 {
            return Err(truncated());
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes.len() < 6 {
            return Err(truncated());
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        if bytes.len() < HEADER_LEN {
            return Err(truncated());
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let header = SnapshotHeader {
            width: u32_at(6),
            height: u32_at(10),
            mcs: u64_at(14),
            seed: u64_at(22),
        };
        if header.width == 0 || header.height == 0 {
            return Err(Error::InvalidDimensions {
                width: header.width,
                height: header.height,
            });
        }
        Ok(header)
    }
}

/// A saved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub width: usize,
    pub height: usize,
    pub mcs: u64,
    pub seed: u64,
    pub cell_ids: Vec<CellId>,
    pub field: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(state: &SimState) -> Self {
        Snapshot {
            width: state.width(),
            height: state.height(),
            mcs: state.mcs(),
            seed: state.seed(),
            cell_ids: state.lattice().ids().to_vec(),
            field: state.field().values().to_vec(),
        }
    }

    /// Restores a runnable state; the cell table is recounted.
    pub fn to_state(&self) -> Result<SimState> {
        let lattice = Lattice::from_ids(self.width, self.height, self.cell_ids.clone())?;
        let field = ChemField::from_values(self.width, self.height, self.field.clone())?;
        SimState::new(lattice, field, self.mcs, self.seed)
    }

    pub fn header(&self) -> SnapshotHeader {
        SnapshotHeader {
            width: self.width as u32,
            height: self.height as u32,
            mcs: self.mcs,
            seed: self.seed,
        }
    }

    /// Channel 0: `true` where a cell sits.
    pub fn channel0(&self) -> Vec<bool> {
        self.cell_ids.iter().map(|&id| id != 0).collect()
    }

    /// Channel 1: concentrations.
    pub fn channel1(&self) -> &[f64] {
        &self.field
    }

    pub fn chem_field(&self) -> Result<ChemField> {
        ChemField::from_values(self.width, self.height, self.field.clone())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = self.header();
        let mut out = Vec::with_capacity(header.file_len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&header.width.to_le_bytes());
        out.extend_from_slice(&header.height.to_le_bytes());
        out.extend_from_slice(&header.mcs.to_le_bytes());
        out.extend_from_slice(&header.seed.to_le_bytes());
        for id in &self.cell_ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        for v in &self.field {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = SnapshotHeader::parse(bytes)?;
        let expected = header.file_len();
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(Error::TrailingData {
                extra: bytes.len() - expected,
            });
        }
        let n = header.sites();
        let ids_end = HEADER_LEN + 4 * n;
        let cell_ids = bytes[HEADER_LEN..ids_end]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let field: Vec<f64> = bytes[ids_end..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some((site, &value)) = field
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidField { site, value });
        }
        Ok(Snapshot {
            width: header.width as usize,
            height: header.height as usize,
            mcs: header.mcs,
            seed: header.seed,
            cell_ids,
            field,
        })
    }
}

/// Writes `snapshot` to `path` via a temporary file and rename.
pub fn export_snapshot(snapshot: &Snapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = tmp_path(path);
    let bytes = snapshot.to_bytes();
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn export_state(state: &SimState, path: impl AsRef<Path>) -> Result<()> {
    export_snapshot(&Snapshot::from_state(state), path)
}

pub fn import_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Snapshot::from_bytes(&bytes).map_err(|e| e.in_file(path))
}

/// Reads only the header and checks the file length against it.
pub fn read_header(path: impl AsRef<Path>) -> Result<SnapshotHeader> {
    let path = path.as_ref();
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let len = f.metadata().map_err(|e| Error::io(path, e))?.len() as usize;
    let mut buf = [0u8; HEADER_LEN];
    let got = read_up_to(&mut f, &mut buf).map_err(|e| Error::io(path, e))?;
    let header = SnapshotHeader::parse(&buf[..got]).map_err(|e| e.in_file(path))?;
    let expected = header.file_len();
    if len < expected {
        return Err(Error::Truncated { expected, found: len }.in_file(path));
    }
    if len > expected {
        return Err(Error::TrailingData { extra: len - expected }.in_file(path));
    }
    Ok(header)
}

fn read_up_to(f: &mut fs::File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match f.read(&mut buf[got..])? {
            0 => break,
            n => got += n,
        }
    }
    Ok(got)
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Canonical file name for a snapshot at `mcs`.
pub fn snapshot_file_name(mcs: u64) -> String {
    format!("snap_{mcs:08}.{EXTENSION}")
}

/// All `*.cpms` files in `dir`, sorted by name.
pub fn list_snapshots(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == EXTENSION) && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
