//! Live Yee-grid field arrays.
//!
//! Layout (row-major, x fastest):
//!   Ex at ((i + 1/2) d, k d)        -> (nz + 1) rows of nx
//!   Ez at (i d, (k + 1/2) d)        -> nz rows of nx + 1
//!   Hy at ((i + 1/2) d, (k + 1/2) d) -> nz rows of nx
//!
//! Polarization currents Jx, Jz live on the E positions but are stored only
//! for the contiguous row band that intersects material. The convolutional
//! boundary accumulators live in eight thin blocks hugging the four walls.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::CoreError;

#[derive(Debug, Clone)]
pub struct FieldState {
    pub nx: usize,
    pub nz: usize,
    pub(crate) ex: Vec<f64>,
    pub(crate) ez: Vec<f64>,
    pub(crate) hy: Vec<f64>,
    /// Polarization currents over rows [jband0, jband1).
    pub(crate) jx: Vec<f64>,
    pub(crate) jz: Vec<f64>,
    pub(crate) jband0: usize,
    pub(crate) jband1: usize,
    /// Boundary accumulators: z-layers store full-width rows, x-layers
    /// store per-row column stubs of width pml (+1 for E positions).
    pub(crate) psi_ex_z_lo: Vec<f64>,
    pub(crate) psi_ex_z_hi: Vec<f64>,
    pub(crate) psi_ez_x_lo: Vec<f64>,
    pub(crate) psi_ez_x_hi: Vec<f64>,
    pub(crate) psi_hy_z_lo: Vec<f64>,
    pub(crate) psi_hy_z_hi: Vec<f64>,
    pub(crate) psi_hy_x_lo: Vec<f64>,
    pub(crate) psi_hy_x_hi: Vec<f64>,
    pub(crate) pml_cells: usize,
}

impl FieldState {
    pub fn new(nx: usize, nz: usize, jband: (usize, usize), pml_cells: usize) -> Self {
        let (jband0, jband1) = jband;
        let jrows = jband1.saturating_sub(jband0);
        Self {
            nx,
            nz,
            ex: vec![0.0; (nz + 1) * nx],
            ez: vec![0.0; nz * (nx + 1)],
            hy: vec![0.0; nz * nx],
            jx: vec![0.0; jrows * nx],
            jz: vec![0.0; jrows * (nx + 1)],
            jband0,
            jband1,
            psi_ex_z_lo: vec![0.0; (pml_cells + 1) * nx],
            psi_ex_z_hi: vec![0.0; (pml_cells + 1) * nx],
            psi_ez_x_lo: vec![0.0; nz * (pml_cells + 1)],
            psi_ez_x_hi: vec![0.0; nz * (pml_cells + 1)],
            psi_hy_z_lo: vec![0.0; pml_cells * nx],
            psi_hy_z_hi: vec![0.0; pml_cells * nx],
            psi_hy_x_lo: vec![0.0; nz * pml_cells],
            psi_hy_x_hi: vec![0.0; nz * pml_cells],
            pml_cells,
        }
    }

    pub fn allocated_bytes(&self) -> u64 {
        let f = |v: &Vec<f64>| (v.capacity() * 8) as u64;
        f(&self.ex)
            + f(&self.ez)
            + f(&self.hy)
            + f(&self.jx)
            + f(&self.jz)
            + f(&self.psi_ex_z_lo)
            + f(&self.psi_ex_z_hi)
            + f(&self.psi_ez_x_lo)
            + f(&self.psi_ez_x_hi)
            + f(&self.psi_hy_z_lo)
            + f(&self.psi_hy_z_hi)
            + f(&self.psi_hy_x_lo)
            + f(&self.psi_hy_x_hi)
    }

    #[inline]
    pub fn ex_at(&self, i: usize, k: usize) -> f64 {
        self.ex[k * self.nx + i]
    }

    #[inline]
    pub fn ez_at(&self, i: usize, k: usize) -> f64 {
        self.ez[k * (self.nx + 1) + i]
    }

    #[inline]
    pub fn hy_at(&self, i: usize, k: usize) -> f64 {
        self.hy[k * self.nx + i]
    }

    pub fn ex_row(&self, k: usize) -> &[f64] {
        &self.ex[k * self.nx..(k + 1) * self.nx]
    }

    pub fn ez_row(&self, k: usize) -> &[f64] {
        &self.ez[k * (self.nx + 1)..(k + 1) * (self.nx + 1)]
    }

    pub fn hy_row(&self, k: usize) -> &[f64] {
        &self.hy[k * self.nx..(k + 1) * self.nx]
    }

    /// Hy averaged onto the integer z-level `k` (mean of the rows above and
    /// below the line).
    pub fn hy_line_average_into(&self, k: usize, buf: &mut Vec<f64>) {
        let lo = self.hy_row(k - 1);
        let hi = self.hy_row(k);
        buf.clear();
        buf.extend(lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)));
    }

    /// Ez averaged onto the integer z-level `k`.
    pub fn ez_line_average_into(&self, k: usize, buf: &mut Vec<f64>) {
        let lo = self.ez_row(k - 1);
        let hi = self.ez_row(k);
        buf.clear();
        buf.extend(lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)));
    }

    /// Largest absolute field value over E and H.
    pub fn max_abs(&self) -> f64 {
        self.ex
            .iter()
            .chain(&self.ez)
            .chain(&self.hy)
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// First non-finite value, as (field, i, k).
    pub fn find_non_finite(&self) -> Option<(&'static str, usize, usize)> {
        let scan = |name: &'static str, data: &[f64], stride: usize| {
            data.iter().position(|v| !v.is_finite()).map(|pos| {
                let k = pos / stride;
                let i = pos % stride;
                (name, i, k)
            })
        };
        scan("Ex", &self.ex, self.nx)
            .or_else(|| scan("Ez", &self.ez, self.nx + 1))
            .or_else(|| scan("Hy", &self.hy, self.nx))
            .or_else(|| scan("Jx", &self.jx, self.nx))
            .or_else(|| scan("Jz", &self.jz, self.nx + 1))
    }

    /// Write the documented flat binary snapshot: the magic `SWCHKP01`,
    /// little-endian u64 nx and nz, f64 cell size, dt and t, then the Ex,
    /// Ez, Hy, Jx, Jz arrays row-major (currents expanded to full size with
    /// zeros outside the stored band).
    pub fn write_checkpoint(
        &self,
        path: &Path,
        cell_size: f64,
        dt: f64,
        t: f64,
    ) -> Result<(), CoreError> {
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| CoreError::io(path.display().to_string(), e))?,
        );
        let io_err = |e: std::io::Error| CoreError::io(path.display().to_string(), e);
        w.write_all(b"SWCHKP01").map_err(io_err)?;
        for v in [self.nx as u64, self.nz as u64] {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
        for v in [cell_size, dt, t] {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
        let write_slice = |w: &mut dyn Write, s: &[f64]| -> std::io::Result<()> {
            for v in s {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok(())
        };
        write_slice(&mut w, &self.ex).map_err(io_err)?;
        write_slice(&mut w, &self.ez).map_err(io_err)?;
        write_slice(&mut w, &self.hy).map_err(io_err)?;
        // Currents expanded to the full grid.
        let zeros_x = vec![0.0; self.nx];
        let zeros_z = vec![0.0; self.nx + 1];
        for k in 0..=self.nz {
            let row = if k >= self.jband0 && k < self.jband1 {
                &self.jx[(k - self.jband0) * self.nx..(k - self.jband0 + 1) * self.nx]
            } else {
                &zeros_x[..]
            };
            write_slice(&mut w, row).map_err(io_err)?;
        }
        for k in 0..self.nz {
            let row = if k >= self.jband0 && k < self.jband1 {
                &self.jz[(k - self.jband0) * (self.nx + 1)..(k - self.jband0 + 1) * (self.nx + 1)]
            } else {
                &zeros_z[..]
            };
            write_slice(&mut w, row).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Header of a checkpoint file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub nx: u64,
    pub nz: u64,
    pub cell_size: f64,
    pub dt: f64,
    pub t: f64,
}

/// Read back a checkpoint header and the five field arrays.
pub fn read_checkpoint(path: &Path) -> Result<(CheckpointHeader, Vec<Vec<f64>>), CoreError> {
    let mut r = std::io::BufReader::new(
        std::fs::File::open(path).map_err(|e| CoreError::io(path.display().to_string(), e))?,
    );
    let io_err = |e: std::io::Error| CoreError::io(path.display().to_string(), e);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != b"SWCHKP01" {
        return Err(CoreError::io(path.display().to_string(), "bad magic"));
    }
    let mut u = [0u8; 8];
    let mut read_u64 = |r: &mut dyn Read| -> std::io::Result<u64> {
        r.read_exact(&mut u)?;
        Ok(u64::from_le_bytes(u))
    };
    let nx = read_u64(&mut r).map_err(io_err)?;
    let nz = read_u64(&mut r).map_err(io_err)?;
    let mut f = [0u8; 8];
    let mut read_f64 = |r: &mut dyn Read| -> std::io::Result<f64> {
        r.read_exact(&mut f)?;
        Ok(f64::from_le_bytes(f))
    };
    let cell_size = read_f64(&mut r).map_err(io_err)?;
    let dt = read_f64(&mut r).map_err(io_err)?;
    let t = read_f64(&mut r).map_err(io_err)?;
    let header = CheckpointHeader {
        nx,
        nz,
        cell_size,
        dt,
        t,
    };
    let (nx, nz) = (nx as usize, nz as usize);
    let sizes = [
        (nz + 1) * nx,
        nz * (nx + 1),
        nz * nx,
        (nz + 1) * nx,
        nz * (nx + 1),
    ];
    let mut arrays = Vec::new();
    for size in sizes {
        let mut data = vec![0.0_f64; size];
        let mut buf = vec![0u8; size * 8];
        r.read_exact(&mut buf).map_err(io_err)?;
        for (j, chunk) in buf.chunks_exact(8).enumerate() {
            data[j] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        arrays.push(data);
    }
    Ok((header, arrays))
}
