//! Frame archives: the density and momentum of a solution, one time slice
//! after another.
//!
//! Layout (all integers and floats little-endian):
//!
//! | bytes            | content                                         |
//! |------------------|-------------------------------------------------|
//! | 8                | magic `CMOTFRM\0`                               |
//! | 4 (u32)          | format version, currently 1                     |
//! | 3 × 4 (u32)      | `nt`, `nx`, `ny`                                |
//! | 3 × 8 (f64)      | `dt`, `dx`, `dy`                                |
//! | 1 (u8)           | spatial boundary: 0 periodic, 1 neumann         |
//! | 8 (u64)          | outer iterations                                |
//! | 8 (f64)          | final energy                                    |
//! | 4 (u32)          | number of fields `F`                            |
//! | per field        | u32 name length, UTF-8 name                     |
//! | `nt·F·nx·ny` × 8 | payload: for each time slice, each field's `nx·ny` values (`y` fastest) |
//!
//! The fields written by [`write_frames`] are `rho`, `mx`, `my`.

use std::path::Path;

use crate::error::OutputError;
use crate::field::{PairField, ScalarField};
use crate::grid::{GridSpec, SpaceBoundary};
use crate::solver::Solution;

pub const MAGIC: &[u8; 8] = b"CMOTFRM\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameArchive {
    pub grid: GridSpec,
    pub field_names: Vec<String>,
    pub iterations: u64,
    pub energy: f64,
    /// `payload[(k·F + f)·nx·ny + i·ny + j]`.
    pub payload: Vec<f64>,
}

impl FrameArchive {
    pub fn from_solution(solution: &Solution) -> Self {
        let g = solution.grid;
        let n = g.spatial_len();
        let comps = solution.mu.components();
        let mut payload = Vec::with_capacity(3 * g.len());
        for k in 0..g.nt {
            for c in comps {
                payload.extend_from_slice(&c[k * n..(k + 1) * n]);
            }
        }
        Self {
            grid: g,
            field_names: ["rho", "mx", "my"].map(String::from).to_vec(),
            iterations: solution.iterations as u64,
            energy: solution.energy,
            payload,
        }
    }

    /// Slice `k` of field `f`.
    pub fn frame(&self, k: usize, f: usize) -> &[f64] {
        let n = self.grid.spatial_len();
        let start = (k * self.field_names.len() + f) * n;
        &self.payload[start..start + n]
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.field_names.iter().position(|n| n == name)
    }

    /// Reassembles `(rho, mx, my)` when the archive holds those fields.
    pub fn to_pair_field(&self) -> Option<PairField> {
        let idx = [self.field_index("rho")?, self.field_index("mx")?, self.field_index("my")?];
        let mut comps = idx.map(|_| Vec::with_capacity(self.grid.len()));
        for k in 0..self.grid.nt {
            for (c, &f) in comps.iter_mut().zip(&idx) {
                c.extend_from_slice(self.frame(k, f));
            }
        }
        let [a, b, c] = comps.map(|v| ScalarField::from_vec(self.grid, v).ok());
        PairField::new(a?, b?, c?).ok()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(128 + 8 * self.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for d in [g.nt, g.nx, g.ny] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for h in [g.dt, g.dx, g.dy] {
            out.extend_from_slice(&h.to_le_bytes());
        }
        out.push(match g.space_bc {
            SpaceBoundary::Periodic => 0,
            SpaceBoundary::Neumann => 1,
        });
        out.extend_from_slice(&self.iterations.to_le_bytes());
        out.extend_from_slice(&self.energy.to_le_bytes());
        out.extend_from_slice(&(self.field_names.len() as u32).to_le_bytes());
        for name in &self.field_names {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
        }
        for v in &self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses an archive; `origin` only labels errors.
    pub fn from_bytes(bytes: &[u8], origin: &Path) -> Result<Self, OutputError> {
        let mut r = Reader { bytes, pos: 0, origin };
        if r.take(8)? != MAGIC {
            return Err(OutputError::format(origin, "not a frame archive (bad magic)"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(OutputError::format(origin, format!("unsupported archive version {version}")));
        }
        let (nt, nx, ny) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
        let (dt, dx, dy) = (r.f64()?, r.f64()?, r.f64()?);
        let bc = match r.take(1)?[0] {
            0 => SpaceBoundary::Periodic,
            1 => SpaceBoundary::Neumann,
            b => return Err(OutputError::format(origin, format!("unknown boundary code {b}"))),
        };
        let mut grid = GridSpec::with_spacing(nt, nx, ny, dx, dy, bc)
            .map_err(|e| OutputError::format(origin, format!("bad grid header: {e}")))?;
        grid.dt = dt;
        let iterations = r.u64()?;
        let energy = r.f64()?;
        let nfields = r.u32()? as usize;
        let mut field_names = Vec::new();
        for _ in 0..nfields {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| OutputError::format(origin, "field name is not UTF-8"))?;
            field_names.push(name.to_string());
        }
        let count = grid
            .len()
            .checked_mul(nfields)
            .ok_or_else(|| OutputError::format(origin, "payload size overflows"))?;
        let raw = r.take(count.checked_mul(8).ok_or_else(|| OutputError::format(origin, "payload size overflows"))?)?;
        let payload = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if r.pos != bytes.len() {
            return Err(OutputError::format(origin, format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self { grid, field_names, iterations, energy, payload })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    origin: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], OutputError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            OutputError::format(
                self.origin,
                format!("truncated archive: need {n} bytes at offset {}, file has {}", self.pos, self.bytes.len()),
            )
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, OutputError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, OutputError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, OutputError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn write_archive(archive: &FrameArchive, path: impl AsRef<Path>) -> Result<(), OutputError> {
    let path = path.as_ref();
    std::fs::write(path, archive.to_bytes()).map_err(|e| OutputError::io(path, e))
}

pub fn write_frames(solution: &Solution, path: impl AsRef<Path>) -> Result<(), OutputError> {
    write_archive(&FrameArchive::from_solution(solution), path)
}

pub fn read_frames(path: impl AsRef<Path>) -> Result<FrameArchive, OutputError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| OutputError::io(path, e))?;
    FrameArchive::from_bytes(&bytes, path)
}
