//! The Yee-grid leapfrog core.
//!
//! Natural units: c = eps0 = mu0 = 1, time measured as ct. The time step is
//! snapped so one drive period is an integer number of steps (at most the
//! Courant bound times the safety factor), which makes the running-DFT
//! windows exact. Update order within a step: boundary accumulators for H,
//! Hy half-step, accumulators for E, then Ex/Ez full step with the soft
//! line-current source and the fused polarization-current update.
//!
//! Field values are checked for NaN/Inf at every period boundary; a hit
//! aborts the run naming the step and cell.

mod field;
mod pml;
mod step;

pub use field::{read_checkpoint, CheckpointHeader, FieldState};
pub use pml::{PmlCoeffs, PmlSpec};

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use crate::error::CoreError;
use crate::geometry::SceneSpec;
use crate::materials::{ade_coefficients, fit_drude, AdeCoefficients, DrudeMedium};
use crate::monitors::{PhasorField, PhasorMonitor};

/// Default Courant safety factor.
pub const DEFAULT_COURANT_SAFETY: f64 = 0.7;

/// Largest stable time step: safety * cell / (c sqrt(2)) in 2D.
pub fn courant_dt(cell_size: f64, safety: f64) -> Result<f64, CoreError> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(CoreError::Geometry(format!(
            "courant safety {safety} must lie in (0, 1)"
        )));
    }
    if cell_size <= 0.0 {
        return Err(CoreError::Geometry("cell size must be positive".into()));
    }
    Ok(safety * cell_size / std::f64::consts::SQRT_2)
}

/// Grid discretization constants.
#[derive(Debug, Clone, Copy)]
pub struct YeeGrid {
    pub nx: usize,
    pub nz: usize,
    pub cell_size: f64,
    pub dt: f64,
    /// Steps per drive period (the period is exactly this many steps).
    pub steps_per_period: usize,
    /// c dt / cell_size, below 1/sqrt(2) by construction.
    pub courant: f64,
}

impl YeeGrid {
    /// Discretize a scene: dt is the largest value of period/n that stays
    /// at or below the Courant-bounded step.
    pub fn for_scene(scene: &SceneSpec, safety: f64) -> Result<Self, CoreError> {
        let cell_size = scene.cell_size();
        let dt_max = courant_dt(cell_size, safety)?;
        let period = scene.wavelength; // c = 1
        let spp = (period / dt_max).ceil() as usize;
        let dt = period / spp as f64;
        Ok(Self {
            nx: scene.nx(),
            nz: scene.nz(),
            cell_size,
            dt,
            steps_per_period: spp,
            courant: dt / cell_size,
        })
    }
}

/// Ramped monochromatic line-current source.
#[derive(Debug, Clone, Copy)]
pub struct SourceSpec {
    /// Height of the source line (meters); must sit in vacuum between the
    /// lower absorbing layer and the first plate.
    pub z: f64,
    pub amplitude: f64,
    /// Raised-cosine turn-on, in drive periods.
    pub ramp_periods: u32,
}

impl SourceSpec {
    /// Source current at time t for drive frequency omega0 and period T.
    pub fn current(&self, t: f64, omega0: f64, period: f64) -> f64 {
        let ramp_len = self.ramp_periods as f64 * period;
        let ramp = if t >= ramp_len {
            1.0
        } else if t <= 0.0 {
            0.0
        } else {
            0.5 * (1.0 - (PI * t / ramp_len).cos())
        };
        self.amplitude * ramp * (omega0 * t).sin()
    }
}

/// Run control for the steady-state march.
#[derive(Debug, Clone)]
pub struct RunSchedule {
    /// Periods to wait after the ramp before accumulating phasors; `None`
    /// derives box-height transit plus ten periods.
    pub min_settle_periods: Option<u32>,
    /// Hard budget; exceeding it is a non-convergence error.
    pub max_periods: u32,
    /// Drift tolerance: steady after three consecutive periods below it.
    pub settle_tol: f64,
    /// Periods averaged into the final phasor.
    pub window_periods: usize,
    /// Optional field snapshots every this many periods.
    pub checkpoint_every_periods: Option<u32>,
    pub checkpoint_dir: Option<PathBuf>,
    pub courant_safety: f64,
}

impl Default for RunSchedule {
    fn default() -> Self {
        Self {
            min_settle_periods: None,
            max_periods: 500,
            settle_tol: 1e-6,
            window_periods: 3,
            checkpoint_every_periods: None,
            checkpoint_dir: None,
            courant_safety: DEFAULT_COURANT_SAFETY,
        }
    }
}

/// What one run did, for the manifest and the summary.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub periods: u32,
    pub steps: u64,
    pub settle_periods: u32,
    pub final_drift: f64,
    pub wall_seconds: f64,
    pub cell_updates_per_second: f64,
    pub allocated_bytes: u64,
    pub dt: f64,
    pub steps_per_period: usize,
    pub courant: f64,
    pub nx: usize,
    pub nz: usize,
}

/// One scene bound to its grid, tables and live state.
pub struct Simulation {
    grid: YeeGrid,
    state: FieldState,
    tables: step::StepTables,
    source: SourceSpec,
    omega0: f64,
    period: f64,
    step_index: u64,
}

impl Simulation {
    pub fn new(scene: &SceneSpec) -> Result<Self, CoreError> {
        Self::with_safety(scene, DEFAULT_COURANT_SAFETY)
    }

    pub fn with_safety(scene: &SceneSpec, safety: f64) -> Result<Self, CoreError> {
        scene.validate()?;
        let grid = YeeGrid::for_scene(scene, safety)?;
        let model = scene.solid_model()?;
        let (nx, nz) = (grid.nx, grid.nz);
        let omega0 = 2.0 * PI / scene.wavelength;

        // Per-material update coefficients from the Drude fits.
        let mut coeffs = vec![AdeCoefficients::vacuum(grid.dt)];
        for n in scene.materials.iter().skip(1) {
            let medium: DrudeMedium = fit_drude(*n, omega0, 1.0)?;
            coeffs.push(ade_coefficients(&medium, grid.dt));
        }

        // Component material maps. An edge-hosted component is material if
        // either adjacent cell is (metal wins): this keeps left/right slit
        // walls identical, so symmetric scenes evolve exactly symmetrically.
        let cells = crate::geometry::rasterize(scene)?;
        let cell = |i: usize, k: usize| cells.at(i.min(nx - 1), k.min(nz - 1));
        let mut mat_ex = vec![0u8; (nz + 1) * nx];
        let mut mat_ez = vec![0u8; nz * (nx + 1)];
        for k in 0..=nz {
            for i in 0..nx {
                let above = cell(i, k);
                let below = cell(i, k.saturating_sub(1));
                mat_ex[k * nx + i] = if above != 0 { above } else { below };
            }
        }
        for k in 0..nz {
            for i in 0..=nx {
                let right = cell(i, k);
                let left = cell(i.saturating_sub(1), k);
                mat_ez[k * (nx + 1) + i] = if right != 0 { right } else { left };
            }
        }
        let ex_row_mixed: Vec<bool> = (0..=nz)
            .map(|k| mat_ex[k * nx..(k + 1) * nx].iter().any(|&m| m != 0))
            .collect();
        let ez_row_mixed: Vec<bool> = (0..nz)
            .map(|k| {
                mat_ez[k * (nx + 1)..(k + 1) * (nx + 1)]
                    .iter()
                    .any(|&m| m != 0)
            })
            .collect();

        // Ex rows touched by material extend one past the cell band (the
        // top-face edge belongs to the metal below it).
        let jband = model
            .dispersive_row_range()
            .map(|(k0, k1)| (k0, (k1 + 1).min(nz + 1)))
            .unwrap_or((0, 0));
        let pml = PmlCoeffs::new(&scene.pml, nx, nz, grid.dt, grid.cell_size);
        let k_src = (scene.source.z / grid.cell_size).round() as usize;

        let state = FieldState::new(nx, nz, jband, scene.pml.cells);
        Ok(Self {
            grid,
            state,
            tables: step::StepTables {
                nx,
                nz,
                inv_delta: 1.0 / grid.cell_size,
                dt: grid.dt,
                mat_ex,
                mat_ez,
                ex_row_mixed,
                ez_row_mixed,
                coeffs,
                pml,
                k_src,
            },
            source: scene.source,
            omega0,
            period: scene.wavelength,
            step_index: 0,
        })
    }

    pub fn grid(&self) -> &YeeGrid {
        &self.grid
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    /// Simulation time after the last completed step.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.grid.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Advance one leapfrog iteration.
    pub fn step(&mut self) {
        let t_mid = self.time() + 0.5 * self.grid.dt;
        let j_src = self.source.current(t_mid, self.omega0, self.period);
        step::step(&mut self.state, &self.tables, j_src);
        self.step_index += 1;
    }

    /// Add a uniform increment to every Ex sample of one row. Lets test
    /// harnesses drive custom (for example pulsed) line currents.
    pub fn add_ex_row(&mut self, k: usize, dv: f64) {
        let nx = self.grid.nx;
        for v in &mut self.state.ex[k * nx..(k + 1) * nx] {
            *v += dv;
        }
    }

    /// Abort if any field value went non-finite.
    pub fn check_finite(&self) -> Result<(), CoreError> {
        if let Some((field, i, k)) = self.state.find_non_finite() {
            return Err(CoreError::NonFinite {
                field,
                step: self.step_index,
                i,
                k,
            });
        }
        Ok(())
    }
}

/// Time-march a scene to steady state and return the accumulated phasors.
pub fn run(scene: &SceneSpec, schedule: &RunSchedule) -> Result<(PhasorField, RunReport), CoreError> {
    let start = Instant::now();
    let mut sim = Simulation::with_safety(scene, schedule.courant_safety)?;
    let grid = *sim.grid();
    let spp = grid.steps_per_period;
    let k_mon = (scene.monitor.z / grid.cell_size).round() as usize;

    let transit = (scene.box_height / scene.wavelength).ceil() as u32;
    let settle = schedule
        .min_settle_periods
        .unwrap_or(transit + 10);
    let accum_start = scene.source.ramp_periods + settle;

    // Lines nine orders below the source amplitude count as converged to
    // zero (the drift of pure numerical noise never settles relatively).
    let power_floor =
        3.0 * grid.nx as f64 * (1e-9 * scene.source.amplitude).powi(2);
    let mut monitor = PhasorMonitor::new(
        grid.nx,
        grid.nx + 1,
        sim.omega0(),
        grid.dt,
        spp,
        scene.monitor.z,
        grid.cell_size,
        schedule.window_periods,
        power_floor,
    );
    let mut hy_buf = Vec::with_capacity(grid.nx);
    let mut ez_buf = Vec::with_capacity(grid.nx + 1);

    let mut converged = false;
    let mut period = 0u32;
    let mut final_drift = f64::INFINITY;
    while period < schedule.max_periods {
        let accumulating = period >= accum_start;
        for _ in 0..spp {
            sim.step();
            if accumulating {
                sim.state.hy_line_average_into(k_mon, &mut hy_buf);
                monitor.push_h(&hy_buf, sim.time() - monitor.half_dt());
                sim.state.ez_line_average_into(k_mon, &mut ez_buf);
                monitor.push_e(sim.state.ex_row(k_mon), &ez_buf, sim.time());
            }
        }
        period += 1;
        sim.check_finite()?;
        if let (Some(every), Some(dir)) = (
            schedule.checkpoint_every_periods,
            schedule.checkpoint_dir.as_ref(),
        ) {
            if every > 0 && period.is_multiple_of(every) {
                let path = dir.join(format!("checkpoint_p{period:05}.bin"));
                sim.state
                    .write_checkpoint(&path, grid.cell_size, grid.dt, sim.time())?;
            }
        }
        if accumulating {
            final_drift = monitor.finish_period();
            if monitor.steady(schedule.settle_tol) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(CoreError::NonConvergence {
            periods: period,
            drift: final_drift,
            tol: schedule.settle_tol,
        });
    }

    let wall = start.elapsed().as_secs_f64();
    let steps = sim.step_index();
    let cells = (grid.nx * grid.nz) as f64;
    let report = RunReport {
        periods: period,
        steps,
        settle_periods: settle,
        final_drift,
        wall_seconds: wall,
        cell_updates_per_second: cells * steps as f64 / wall.max(1e-9),
        allocated_bytes: sim.state.allocated_bytes(),
        dt: grid.dt,
        steps_per_period: spp,
        courant: grid.courant,
        nx: grid.nx,
        nz: grid.nz,
    };
    Ok((monitor.finalize(true), report))
}
