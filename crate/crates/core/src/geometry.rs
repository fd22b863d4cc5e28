//! Slit-device scenes and staircase rasterization.
//!
//! Scenes are described in physical units and snapped to the Yee grid at
//! build time: every plate boundary moves to the nearest cell edge, so all
//! material membership tests reduce to integer comparisons. A cell is plate
//! material iff its center lies inside a plate solid region (no subpixel
//! permittivity averaging); edge-hosted field components use the same
//! half-open rectangle test at their own staggered positions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::CoreError;
use crate::monitors::MonitorSpec;
use crate::solver::{PmlSpec, SourceSpec};

/// Open/closed state of a single slit in a plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlitState {
    Open,
    /// Filled with plate material across the full plate thickness.
    Closed,
    /// Filled from the top face down to the plate mid-plane.
    BlockedTopHalf,
    /// Filled from the bottom face up to the plate mid-plane.
    BlockedBottomHalf,
}

impl SlitState {
    pub fn as_char(self) -> char {
        match self {
            SlitState::Open => 'O',
            SlitState::Closed => 'C',
            SlitState::BlockedTopHalf => 'T',
            SlitState::BlockedBottomHalf => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'O' => Some(SlitState::Open),
            'C' => Some(SlitState::Closed),
            'T' => Some(SlitState::BlockedTopHalf),
            'B' => Some(SlitState::BlockedBottomHalf),
            _ => None,
        }
    }
}

/// Which slits of a three-slit device are open.
///
/// The label reads left to right: `OCO` means the outer slits are open and
/// the middle one closed. Eight values exist; the seven with at least one
/// open slit enter the three-slit interference combination, `CCC` is the
/// all-closed reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SlitConfiguration {
    open: [bool; 3],
}

impl SlitConfiguration {
    pub const OOO: Self = Self::new([true, true, true]);
    pub const OOC: Self = Self::new([true, true, false]);
    pub const OCO: Self = Self::new([true, false, true]);
    pub const COO: Self = Self::new([false, true, true]);
    pub const OCC: Self = Self::new([true, false, false]);
    pub const COC: Self = Self::new([false, true, false]);
    pub const CCO: Self = Self::new([false, false, true]);
    pub const CCC: Self = Self::new([false, false, false]);

    pub const fn new(open: [bool; 3]) -> Self {
        Self { open }
    }

    /// The seven configurations entering the three-slit interference term,
    /// in the order OOO, OOC, OCO, COO, OCC, COC, CCO.
    pub fn seven() -> [Self; 7] {
        [
            Self::OOO,
            Self::OOC,
            Self::OCO,
            Self::COO,
            Self::OCC,
            Self::COC,
            Self::CCO,
        ]
    }

    pub fn all_eight() -> [Self; 8] {
        [
            Self::OOO,
            Self::OOC,
            Self::OCO,
            Self::COO,
            Self::OCC,
            Self::COC,
            Self::CCO,
            Self::CCC,
        ]
    }

    pub fn is_open(&self, slit: usize) -> bool {
        self.open[slit]
    }

    pub fn label(&self) -> String {
        self.open
            .iter()
            .map(|&o| if o { 'O' } else { 'C' })
            .collect()
    }

    pub fn parse(s: &str) -> Option<Self> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != 3 {
            return None;
        }
        let mut open = [false; 3];
        for (j, c) in chars.iter().enumerate() {
            open[j] = match c {
                'O' => true,
                'C' => false,
                _ => return None,
            };
        }
        Some(Self { open })
    }

    /// Mirror image under exchanging the outer slits (1 <-> 3).
    pub fn mirrored(&self) -> Self {
        Self::new([self.open[2], self.open[1], self.open[0]])
    }

    /// Per-slit states for a plate in which closed means filled over the
    /// full thickness.
    pub fn to_states(&self) -> Vec<SlitState> {
        self.open
            .iter()
            .map(|&o| if o { SlitState::Open } else { SlitState::Closed })
            .collect()
    }
}

impl std::fmt::Display for SlitConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A single perforated plate, horizontal, spanning the full box width.
#[derive(Debug, Clone)]
pub struct SlitPlateSpec {
    /// Vertical position of the plate mid-plane (meters).
    pub center_z: f64,
    /// Plate thickness (meters).
    pub thickness: f64,
    /// Width of each slit opening (meters).
    pub slit_width: f64,
    /// Center-to-center slit separation (meters).
    pub pitch: f64,
    /// State of each slit, left to right; slits are centered on the box
    /// mid-line as a group.
    pub slit_states: Vec<SlitState>,
    /// Index into the scene material table.
    pub material_id: u8,
}

impl SlitPlateSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.thickness <= 0.0 || self.slit_width <= 0.0 {
            return Err(CoreError::Geometry(
                "plate thickness and slit width must be positive".into(),
            ));
        }
        if self.pitch <= self.slit_width {
            return Err(CoreError::Geometry(format!(
                "pitch {:.3e} must exceed slit width {:.3e}",
                self.pitch, self.slit_width
            )));
        }
        if self.slit_states.is_empty() {
            return Err(CoreError::Geometry("plate needs at least one slit".into()));
        }
        if self.material_id == 0 {
            return Err(CoreError::Geometry(
                "plate material id 0 is reserved for vacuum".into(),
            ));
        }
        Ok(())
    }

    fn z_min(&self) -> f64 {
        self.center_z - 0.5 * self.thickness
    }

    fn z_max(&self) -> f64 {
        self.center_z + 0.5 * self.thickness
    }
}

/// Full declarative description of one simulation.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    /// Vacuum wavelength (meters).
    pub wavelength: f64,
    pub box_width: f64,
    pub box_height: f64,
    pub cells_per_wavelength: u32,
    pub plates: Vec<SlitPlateSpec>,
    /// Complex refractive index per material id; entry 0 is vacuum.
    pub materials: Vec<Complex64>,
    pub source: SourceSpec,
    pub pml: PmlSpec,
    pub monitor: MonitorSpec,
}

/// One snapped solid rectangle in cell-index space, half-open on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub i0: usize,
    pub i1: usize,
    pub k0: usize,
    pub k1: usize,
    pub material: u8,
}

impl CellRect {
    fn contains(&self, i: usize, k: usize) -> bool {
        i >= self.i0 && i < self.i1 && k >= self.k0 && k < self.k1
    }

    pub fn cell_count(&self) -> usize {
        (self.i1 - self.i0) * (self.k1 - self.k0)
    }
}

/// Record of one length snapped to the grid.
#[derive(Debug, Clone)]
pub struct SnapEntry {
    pub name: String,
    pub requested: f64,
    pub snapped: f64,
}

/// Scene geometry resolved onto the grid: snapped solid rectangles plus the
/// bookkeeping needed to reproduce the snapping.
#[derive(Debug, Clone)]
pub struct SolidModel {
    pub nx: usize,
    pub nz: usize,
    pub cell_size: f64,
    pub rects: Vec<CellRect>,
    pub snaps: Vec<SnapEntry>,
}

impl SolidModel {
    /// Material id at integer cell-space point (i, k) under the half-open
    /// rectangle convention. Works for cell centers and edge components
    /// alike because all rectangle bounds sit on cell edges.
    #[inline]
    pub fn material_at(&self, i: usize, k: usize) -> u8 {
        for r in &self.rects {
            if r.contains(i, k) {
                return r.material;
            }
        }
        0
    }

    /// Rows [k0, k1) that intersect any solid rectangle.
    pub fn dispersive_row_range(&self) -> Option<(usize, usize)> {
        let k0 = self.rects.iter().map(|r| r.k0).min()?;
        let k1 = self.rects.iter().map(|r| r.k1).max()?;
        Some((k0, k1))
    }
}

/// Staircase-rasterized material grid, one material id per cell.
#[derive(Debug, Clone)]
pub struct MaterialGrid {
    pub nx: usize,
    pub nz: usize,
    pub cell_size: f64,
    cells: Vec<u8>,
}

impl MaterialGrid {
    #[inline]
    pub fn at(&self, i: usize, k: usize) -> u8 {
        self.cells[k * self.nx + i]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn material_cell_count(&self) -> usize {
        self.cells.iter().filter(|&&m| m != 0).count()
    }

    /// Rows in which every cell of the given column range is material.
    pub fn row_is_solid(&self, k: usize) -> bool {
        let row = &self.cells[k * self.nx..(k + 1) * self.nx];
        row.iter().all(|&m| m != 0)
    }
}

impl SceneSpec {
    pub fn cell_size(&self) -> f64 {
        self.wavelength / self.cells_per_wavelength as f64
    }

    pub fn nx(&self) -> usize {
        (self.box_width / self.cell_size()).round() as usize
    }

    pub fn nz(&self) -> usize {
        (self.box_height / self.cell_size()).round() as usize
    }

    /// Snap all plate boundaries to cell edges and emit solid rectangles.
    pub fn solid_model(&self) -> Result<SolidModel, CoreError> {
        let delta = self.cell_size();
        let nx = self.nx();
        let nz = self.nz();
        nx.checked_mul(nz)
            .filter(|&c| c < usize::MAX / 64)
            .ok_or_else(|| CoreError::Geometry("cell count overflows".into()))?;

        let snap = |len: f64| -> usize { (len / delta).round() as usize };
        let mut rects = Vec::new();
        let mut snaps = Vec::new();
        let mut record = |name: String, requested: f64, cells: usize| {
            snaps.push(SnapEntry {
                name,
                requested,
                snapped: cells as f64 * delta,
            });
            cells
        };

        for (p_idx, plate) in self.plates.iter().enumerate() {
            plate.validate()?;
            let k0 = record(format!("plate[{p_idx}].z_min"), plate.z_min(), snap(plate.z_min()));
            let k1 = record(format!("plate[{p_idx}].z_max"), plate.z_max(), snap(plate.z_max()));
            if k1 <= k0 || k1 > nz {
                return Err(CoreError::Geometry(format!(
                    "plate {p_idx} z-band [{k0}, {k1}) degenerate or outside box"
                )));
            }
            let k_mid = record(
                format!("plate[{p_idx}].z_mid"),
                plate.center_z,
                snap(plate.center_z),
            );

            let n_slits = plate.slit_states.len();
            let group_center = 0.5 * self.box_width;
            let first_center = group_center - 0.5 * (n_slits as f64 - 1.0) * plate.pitch;

            // Column boundaries of each slit opening in cell units.
            let mut openings = Vec::with_capacity(n_slits);
            for (s_idx, _) in plate.slit_states.iter().enumerate() {
                let cx = first_center + s_idx as f64 * plate.pitch;
                let x_lo = cx - 0.5 * plate.slit_width;
                let x_hi = cx + 0.5 * plate.slit_width;
                if x_lo < 0.0 || x_hi > self.box_width {
                    return Err(CoreError::Geometry(format!(
                        "plate {p_idx} slit {s_idx} does not fit in the box"
                    )));
                }
                let i_lo = record(format!("plate[{p_idx}].slit[{s_idx}].x_lo"), x_lo, snap(x_lo));
                let i_hi = record(format!("plate[{p_idx}].slit[{s_idx}].x_hi"), x_hi, snap(x_hi));
                if i_hi <= i_lo {
                    return Err(CoreError::Geometry(format!(
                        "plate {p_idx} slit {s_idx} snapped to zero cells"
                    )));
                }
                openings.push((i_lo, i_hi));
            }
            for w in openings.windows(2) {
                if w[1].0 < w[0].1 {
                    return Err(CoreError::Geometry(format!(
                        "plate {p_idx} slits overlap after snapping"
                    )));
                }
            }

            // Solid segments between openings, full plate thickness. The
            // plate body spans the full box width, through the side PML.
            let mut x_cursor = 0usize;
            for &(i_lo, i_hi) in &openings {
                if i_lo > x_cursor {
                    rects.push(CellRect {
                        i0: x_cursor,
                        i1: i_lo,
                        k0,
                        k1,
                        material: plate.material_id,
                    });
                }
                x_cursor = i_hi;
            }
            if x_cursor < nx {
                rects.push(CellRect {
                    i0: x_cursor,
                    i1: nx,
                    k0,
                    k1,
                    material: plate.material_id,
                });
            }

            // Fill closed and half-blocked openings.
            for (s_idx, state) in plate.slit_states.iter().enumerate() {
                let (i_lo, i_hi) = openings[s_idx];
                let fill = match state {
                    SlitState::Open => continue,
                    SlitState::Closed => (k0, k1),
                    SlitState::BlockedTopHalf => (k_mid, k1),
                    SlitState::BlockedBottomHalf => (k0, k_mid),
                };
                rects.push(CellRect {
                    i0: i_lo,
                    i1: i_hi,
                    k0: fill.0,
                    k1: fill.1,
                    material: plate.material_id,
                });
            }
        }

        Ok(SolidModel {
            nx,
            nz,
            cell_size: delta,
            rects,
            snaps,
        })
    }

    /// Check box layout, material references and monitor/source placement.
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.wavelength <= 0.0 || self.cells_per_wavelength == 0 {
            return Err(CoreError::Geometry(
                "wavelength and resolution must be positive".into(),
            ));
        }
        if self.materials.is_empty() || self.materials[0] != Complex64::new(1.0, 0.0) {
            return Err(CoreError::Geometry(
                "material table must start with vacuum (n = 1)".into(),
            ));
        }
        for plate in &self.plates {
            plate.validate()?;
            if plate.material_id as usize >= self.materials.len() {
                return Err(CoreError::Geometry(format!(
                    "plate references undefined material {}",
                    plate.material_id
                )));
            }
        }
        let model = self.solid_model()?;
        let delta = model.cell_size;
        let pml_lo = self.pml.cells as f64 * delta;

        let lam = self.wavelength;
        let plate_z_min = self
            .plates
            .iter()
            .map(|p| p.z_min())
            .fold(f64::INFINITY, f64::min);
        let plate_z_max = self.plates.iter().map(|p| p.z_max()).fold(0.0, f64::max);
        if !self.plates.is_empty() {
            if plate_z_min < pml_lo || plate_z_max > self.box_height - pml_lo {
                return Err(CoreError::Geometry(
                    "plate z-extent reaches into the absorbing layers".into(),
                ));
            }
            if self.source.z > plate_z_min - 5.0 * lam {
                return Err(CoreError::Geometry(
                    "source line closer than 5 wavelengths to the first plate".into(),
                ));
            }
            if self.monitor.z < plate_z_max + 10.0 * lam {
                return Err(CoreError::Geometry(
                    "monitor line closer than 10 wavelengths to the plate top".into(),
                ));
            }
        }
        if self.source.z <= pml_lo || self.source.z >= self.box_height - pml_lo {
            return Err(CoreError::Geometry(
                "source line must lie in the interior".into(),
            ));
        }
        if self.monitor.z <= pml_lo || self.monitor.z >= self.box_height - pml_lo {
            return Err(CoreError::Geometry(
                "monitor line must lie in the interior".into(),
            ));
        }
        // Nothing solid at or above the monitor line, nothing at the source row.
        let k_mon = (self.monitor.z / delta).round() as usize;
        let k_src = (self.source.z / delta).round() as usize;
        for r in &model.rects {
            if r.k1 > k_mon {
                return Err(CoreError::Geometry(
                    "material present at or above the monitor line".into(),
                ));
            }
            if k_src >= r.k0 && k_src < r.k1 {
                return Err(CoreError::Geometry(
                    "source row intersects material".into(),
                ));
            }
        }
        self.monitor.validate()?;
        Ok(())
    }

    /// Bytes the solver will allocate for this scene.
    pub fn memory_estimate_bytes(&self) -> u64 {
        let nx = self.nx() as u64;
        let nz = self.nz() as u64;
        let field = (nx + 1) * (nz + 1) * 8;
        let mats = 2 * (nx + 1) * (nz + 1);
        let disp_rows = self
            .solid_model()
            .ok()
            .and_then(|m| m.dispersive_row_range())
            .map(|(k0, k1)| (k1 - k0 + 1) as u64)
            .unwrap_or(0);
        let currents = 2 * disp_rows * (nx + 1) * 8;
        let psi = 4 * 2 * (self.pml.cells as u64 + 1) * (nx.max(nz) + 1) * 8;
        3 * field + mats + currents + psi
    }
}

/// Rasterize a scene onto its material grid.
///
/// Deterministic for identical input; rows are filled in parallel but each
/// cell depends only on the snapped rectangles.
pub fn rasterize(scene: &SceneSpec) -> Result<MaterialGrid, CoreError> {
    let model = scene.solid_model()?;
    let nx = model.nx;
    let mut cells = vec![0u8; nx * model.nz];
    cells
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(k, row)| {
            for (i, c) in row.iter_mut().enumerate() {
                *c = model.material_at(i, k);
            }
        });
    Ok(MaterialGrid {
        nx: model.nx,
        nz: model.nz,
        cell_size: model.cell_size,
        cells,
    })
}

/// Refractive index of the plate metal used throughout: steel at the drive
/// wavelengths considered here.
pub const STEEL_N: Complex64 = Complex64::new(2.29, 2.61);

/// Default absorbing-layer setup: 10 cells, cubic grading.
fn default_pml() -> PmlSpec {
    PmlSpec::default()
}

/// Which half of the middle slit stays open in the blocked-slit variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockedVariant {
    /// Middle slit open over its top half (filled from the bottom face).
    TopHalf,
    /// Middle slit open over its bottom half (filled from the top face).
    BottomHalf,
}

impl BlockedVariant {
    pub fn label(&self) -> &'static str {
        match self {
            BlockedVariant::TopHalf => "hole_top",
            BlockedVariant::BottomHalf => "hole_bottom",
        }
    }

    fn middle_state(&self) -> SlitState {
        match self {
            // Open half on top means the fill starts at the bottom face.
            BlockedVariant::TopHalf => SlitState::BlockedBottomHalf,
            BlockedVariant::BottomHalf => SlitState::BlockedTopHalf,
        }
    }
}

/// Build the three-slit scene: a single metallic plate in a 75λ x 40λ box,
/// illuminated from below, with the monitor line above.
pub fn build_three_slit_scene(
    wavelength: f64,
    slit_width: f64,
    pitch: f64,
    thickness: f64,
    config: SlitConfiguration,
    cells_per_wavelength: u32,
) -> Result<SceneSpec, CoreError> {
    if wavelength <= 0.0 || slit_width <= 0.0 || pitch <= 0.0 || thickness <= 0.0 {
        return Err(CoreError::Geometry(
            "scene parameters must be positive".into(),
        ));
    }
    let lam = wavelength;
    let box_width = 75.0 * lam;
    let box_height = (40.0 * lam).max(10.0 * lam + thickness + 14.0 * lam);
    let plate = SlitPlateSpec {
        center_z: 10.0 * lam + 0.5 * thickness,
        thickness,
        slit_width,
        pitch,
        slit_states: config.to_states(),
        material_id: 1,
    };
    let scene = SceneSpec {
        wavelength,
        box_width,
        box_height,
        cells_per_wavelength,
        plates: vec![plate],
        materials: vec![Complex64::new(1.0, 0.0), STEEL_N],
        source: SourceSpec {
            z: 4.0 * lam,
            amplitude: 1.0,
            ramp_periods: 10,
        },
        pml: default_pml(),
        monitor: MonitorSpec {
            z: 10.0 * lam + thickness + 12.0 * lam,
            angle_min_deg: -45.0,
            angle_max_deg: 45.0,
            angle_step_deg: 0.05,
            edge_taper_wl: 3.0,
        },
    };
    scene.validate()?;
    Ok(scene)
}

/// Blocked-slit variant: the three-slit device with the middle
/// slit half filled, leaving a hole one slit-width wide and half the plate
/// thickness deep.
pub fn build_blocked_slit_scene(
    variant: BlockedVariant,
    cells_per_wavelength: u32,
) -> Result<SceneSpec, CoreError> {
    let lam = 500e-9;
    let mut scene = build_three_slit_scene(
        lam,
        lam,
        3.0 * lam,
        4.0 * lam,
        SlitConfiguration::OOO,
        cells_per_wavelength,
    )?;
    scene.plates[0].slit_states[1] = variant.middle_state();
    scene.validate()?;
    Ok(scene)
}

/// Two-layer device modeled on the laboratory three-slit experiment: a
/// blocking mask below (60 um openings where the configuration is open),
/// a 50 um gap, and a three-slit plate above (30 um slits, always open),
/// both 25 um thick, at 405 nm.
pub fn build_sinha_scene(
    config: SlitConfiguration,
    cells_per_wavelength: u32,
    memory_budget_gb: f64,
) -> Result<SceneSpec, CoreError> {
    let um = 1e-6;
    let lam = 405e-9;
    let mask = SlitPlateSpec {
        center_z: 17.5 * um,
        thickness: 25.0 * um,
        slit_width: 60.0 * um,
        pitch: 100.0 * um,
        slit_states: config.to_states(),
        material_id: 1,
    };
    let plate = SlitPlateSpec {
        center_z: 92.5 * um,
        thickness: 25.0 * um,
        slit_width: 30.0 * um,
        pitch: 100.0 * um,
        slit_states: vec![SlitState::Open; 3],
        material_id: 1,
    };
    let scene = SceneSpec {
        wavelength: lam,
        box_width: 820.0 * um,
        box_height: 120.0 * um,
        cells_per_wavelength,
        plates: vec![mask, plate],
        materials: vec![Complex64::new(1.0, 0.0), STEEL_N],
        source: SourceSpec {
            z: 2.0 * um,
            amplitude: 1.0,
            ramp_periods: 10,
        },
        pml: default_pml(),
        monitor: MonitorSpec {
            z: 112.0 * um,
            angle_min_deg: -1.5,
            angle_max_deg: 1.5,
            angle_step_deg: 0.002,
            edge_taper_wl: 3.0,
        },
    };
    let budget = (memory_budget_gb * 1e9) as u64;
    let estimate = scene.memory_estimate_bytes();
    if estimate > budget {
        return Err(CoreError::ResourceGate {
            estimate_gb: estimate as f64 / 1e9,
            budget_gb: memory_budget_gb,
        });
    }
    scene.validate()?;
    Ok(scene)
}
