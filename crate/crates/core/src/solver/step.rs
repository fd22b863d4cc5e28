//! The leapfrog stencil kernel.
//!
//! One step advances Hy by half a step from the curl of E, then Ex and Ez
//! by a full step from the curl of H minus the polarization and source
//! currents, with the current update fused into the E update cell by cell.
//! Boundary accumulators are refreshed at the start of each phase from the
//! fields of the previous half-step, so every written value is a pure
//! function of the prior state: the row-parallel passes are bitwise
//! deterministic for any worker count.
//!
//! Rows are dispatched to a branch-free vacuum kernel unless they intersect
//! material; mixed rows take the per-cell coefficient path.

use rayon::prelude::*;

use super::field::FieldState;
use super::pml::PmlCoeffs;
use crate::materials::AdeCoefficients;

/// Immutable per-run tables the kernel reads.
pub(crate) struct StepTables {
    pub nx: usize,
    pub nz: usize,
    pub inv_delta: f64,
    pub dt: f64,
    /// Material id per Ex position, (nz + 1) rows of nx.
    pub mat_ex: Vec<u8>,
    /// Material id per Ez position, nz rows of nx + 1.
    pub mat_ez: Vec<u8>,
    /// Rows of Ex / Ez that contain any material.
    pub ex_row_mixed: Vec<bool>,
    pub ez_row_mixed: Vec<bool>,
    pub coeffs: Vec<AdeCoefficients>,
    pub pml: PmlCoeffs,
    /// Source row (Ex) index.
    pub k_src: usize,
}

pub(crate) fn step(state: &mut FieldState, tables: &StepTables, j_src: f64) {
    update_h(state, tables);
    update_e(state, tables, j_src);
}

fn update_h(state: &mut FieldState, t: &StepTables) {
    let nx = t.nx;
    let nz = t.nz;
    let inv_d = t.inv_delta;
    let dt = t.dt;
    let pml = state.pml_cells;

    // Refresh the boundary accumulators from the E field of this half-step.
    {
        let ex = &state.ex;
        let zh = &t.pml.z_h;
        state
            .psi_hy_z_lo
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(k, psi)| {
                let (b, c) = (zh.b[k], zh.c[k]);
                let lo = &ex[k * nx..(k + 1) * nx];
                let hi = &ex[(k + 1) * nx..(k + 2) * nx];
                for i in 0..nx {
                    psi[i] = b * psi[i] + c * (hi[i] - lo[i]) * inv_d;
                }
            });
        state
            .psi_hy_z_hi
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(r, psi)| {
                let k = nz - pml + r;
                let (b, c) = (zh.b[k], zh.c[k]);
                let lo = &ex[k * nx..(k + 1) * nx];
                let hi = &ex[(k + 1) * nx..(k + 2) * nx];
                for i in 0..nx {
                    psi[i] = b * psi[i] + c * (hi[i] - lo[i]) * inv_d;
                }
            });
        let ez = &state.ez;
        let xh = &t.pml.x_h;
        state
            .psi_hy_x_lo
            .par_chunks_mut(pml)
            .zip(state.psi_hy_x_hi.par_chunks_mut(pml))
            .enumerate()
            .for_each(|(k, (psi_lo, psi_hi))| {
                let row = &ez[k * (nx + 1)..(k + 1) * (nx + 1)];
                for j in 0..pml {
                    psi_lo[j] = xh.b[j] * psi_lo[j] + xh.c[j] * (row[j + 1] - row[j]) * inv_d;
                    let i = nx - pml + j;
                    psi_hi[j] = xh.b[i] * psi_hi[j] + xh.c[i] * (row[i + 1] - row[i]) * inv_d;
                }
            });
    }

    // Main Hy sweep plus accumulator corrections, one pass per row.
    let ex = &state.ex;
    let ez = &state.ez;
    let psi_z_lo = &state.psi_hy_z_lo;
    let psi_z_hi = &state.psi_hy_z_hi;
    let psi_x_lo = &state.psi_hy_x_lo;
    let psi_x_hi = &state.psi_hy_x_hi;
    state
        .hy
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(k, hy_row)| {
            let ez_row = &ez[k * (nx + 1)..(k + 1) * (nx + 1)];
            let ex_lo = &ex[k * nx..(k + 1) * nx];
            let ex_hi = &ex[(k + 1) * nx..(k + 2) * nx];
            let dtd = dt * inv_d;
            for i in 0..nx {
                hy_row[i] += dtd * ((ez_row[i + 1] - ez_row[i]) - (ex_hi[i] - ex_lo[i]));
            }
            if k < pml {
                let psi = &psi_z_lo[k * nx..(k + 1) * nx];
                for i in 0..nx {
                    hy_row[i] -= dt * psi[i];
                }
            } else if k >= nz - pml {
                let r = k - (nz - pml);
                let psi = &psi_z_hi[r * nx..(r + 1) * nx];
                for i in 0..nx {
                    hy_row[i] -= dt * psi[i];
                }
            }
            let lo = &psi_x_lo[k * pml..(k + 1) * pml];
            let hi = &psi_x_hi[k * pml..(k + 1) * pml];
            for j in 0..pml {
                hy_row[j] += dt * lo[j];
                hy_row[nx - pml + j] += dt * hi[j];
            }
        });
}

fn update_e(state: &mut FieldState, t: &StepTables, j_src: f64) {
    let nx = t.nx;
    let nz = t.nz;
    let inv_d = t.inv_delta;
    let dt = t.dt;
    let pml = state.pml_cells;

    // Refresh E-side accumulators from the just-updated Hy.
    {
        let hy = &state.hy;
        let ze = &t.pml.z_e;
        state.psi_ex_z_lo[nx..]
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(r, psi)| {
                let k = r + 1; // rows 1..=pml
                let (b, c) = (ze.b[k], ze.c[k]);
                let lo = &hy[(k - 1) * nx..k * nx];
                let hi = &hy[k * nx..(k + 1) * nx];
                for i in 0..nx {
                    psi[i] = b * psi[i] + c * (hi[i] - lo[i]) * inv_d;
                }
            });
        state.psi_ex_z_hi[..pml * nx]
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(r, psi)| {
                let k = nz - pml + r; // rows nz-pml..=nz-1
                let (b, c) = (ze.b[k], ze.c[k]);
                let lo = &hy[(k - 1) * nx..k * nx];
                let hi = &hy[k * nx..(k + 1) * nx];
                for i in 0..nx {
                    psi[i] = b * psi[i] + c * (hi[i] - lo[i]) * inv_d;
                }
            });
        let xe = &t.pml.x_e;
        let stub = pml + 1;
        state
            .psi_ez_x_lo
            .par_chunks_mut(stub)
            .zip(state.psi_ez_x_hi.par_chunks_mut(stub))
            .enumerate()
            .for_each(|(k, (psi_lo, psi_hi))| {
                let row = &hy[k * nx..(k + 1) * nx];
                for j in 1..=pml {
                    psi_lo[j] = xe.b[j] * psi_lo[j] + xe.c[j] * (row[j] - row[j - 1]) * inv_d;
                    let i = nx - pml + j - 1; // columns nx-pml..=nx-1
                    psi_hi[j - 1] =
                        xe.b[i] * psi_hi[j - 1] + xe.c[i] * (row[i] - row[i - 1]) * inv_d;
                }
            });
    }

    // Ex sweep: vacuum rows take the branch-free path, the material band is
    // processed zipped with its current rows.
    let hy = &state.hy;
    let psi_ex_lo = &state.psi_ex_z_lo;
    let psi_ex_hi = &state.psi_ex_z_hi;
    let jb0 = state.jband0;
    let jb1 = state.jband1;
    state
        .ex
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(k, ex_row)| {
            if k == 0 || k == nz {
                return; // tangential E pinned at the outer walls
            }
            if t.ex_row_mixed[k] {
                return; // handled in the band pass below
            }
            let lo = &hy[(k - 1) * nx..k * nx];
            let hi = &hy[k * nx..(k + 1) * nx];
            let dtd = dt * inv_d;
            for i in 0..nx {
                ex_row[i] -= dtd * (hi[i] - lo[i]);
            }
            if k <= pml {
                let psi = &psi_ex_lo[k * nx..(k + 1) * nx];
                for i in 0..nx {
                    ex_row[i] -= dt * psi[i];
                }
            } else if k >= nz - pml {
                let r = k - (nz - pml);
                let psi = &psi_ex_hi[r * nx..(r + 1) * nx];
                for i in 0..nx {
                    ex_row[i] -= dt * psi[i];
                }
            }
            if k == t.k_src {
                for v in ex_row.iter_mut() {
                    *v -= dt * j_src;
                }
            }
        });
    if jb1 > jb0 {
        let coeffs = &t.coeffs;
        state.ex[jb0 * nx..jb1 * nx]
            .par_chunks_mut(nx)
            .zip(state.jx.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(r, (ex_row, jx_row))| {
                let k = jb0 + r;
                if k == 0 || k == nz || !t.ex_row_mixed[k] {
                    return;
                }
                debug_assert!(k > pml && k < nz - pml, "material row inside z layers");
                let lo = &hy[(k - 1) * nx..k * nx];
                let hi = &hy[k * nx..(k + 1) * nx];
                let mat = &t.mat_ex[k * nx..(k + 1) * nx];
                for i in 0..nx {
                    let curl = -(hi[i] - lo[i]) * inv_d;
                    let m = mat[i];
                    if m == 0 {
                        ex_row[i] += dt * curl;
                    } else {
                        let c = &coeffs[m as usize];
                        let e_old = ex_row[i];
                        let e_new =
                            c.e_self * e_old + c.e_div * (curl - c.j_couple * jx_row[i]);
                        jx_row[i] = c.j_decay * jx_row[i] + c.j_drive * (e_new + e_old);
                        ex_row[i] = e_new;
                    }
                }
            });
    }

    // Ez sweep.
    let psi_ez_lo = &state.psi_ez_x_lo;
    let psi_ez_hi = &state.psi_ez_x_hi;
    let stub = pml + 1;
    state
        .ez
        .par_chunks_mut(nx + 1)
        .enumerate()
        .for_each(|(k, ez_row)| {
            if t.ez_row_mixed[k] {
                return;
            }
            let row = &hy[k * nx..(k + 1) * nx];
            let dtd = dt * inv_d;
            for i in 1..nx {
                ez_row[i] += dtd * (row[i] - row[i - 1]);
            }
            let lo = &psi_ez_lo[k * stub..(k + 1) * stub];
            let hi = &psi_ez_hi[k * stub..(k + 1) * stub];
            for j in 1..=pml {
                ez_row[j] += dt * lo[j];
                ez_row[nx - pml + j - 1] += dt * hi[j - 1];
            }
        });
    let jb1_ez = jb1.min(nz); // Ez has nz rows
    if jb1_ez > jb0 {
        let coeffs = &t.coeffs;
        state.ez[jb0 * (nx + 1)..jb1_ez * (nx + 1)]
            .par_chunks_mut(nx + 1)
            .zip(state.jz.par_chunks_mut(nx + 1))
            .enumerate()
            .for_each(|(r, (ez_row, jz_row))| {
                let k = jb0 + r;
                if !t.ez_row_mixed[k] {
                    return;
                }
                let row = &hy[k * nx..(k + 1) * nx];
                let mat = &t.mat_ez[k * (nx + 1)..(k + 1) * (nx + 1)];
                let lo = &psi_ez_lo[k * stub..(k + 1) * stub];
                let hi = &psi_ez_hi[k * stub..(k + 1) * stub];
                for i in 1..nx {
                    let mut curl = (row[i] - row[i - 1]) * inv_d;
                    if i <= pml {
                        curl += lo[i];
                    } else if i >= nx - pml {
                        curl += hi[i - (nx - pml)];
                    }
                    let m = mat[i];
                    if m == 0 {
                        ez_row[i] += dt * curl;
                    } else {
                        let c = &coeffs[m as usize];
                        let e_old = ez_row[i];
                        let e_new =
                            c.e_self * e_old + c.e_div * (curl - c.j_couple * jz_row[i]);
                        jz_row[i] = c.j_decay * jz_row[i] + c.j_drive * (e_new + e_old);
                        ez_row[i] = e_new;
                    }
                }
            });
    }
}
