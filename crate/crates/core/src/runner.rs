//! Experiment orchestration: expand a config into its per-configuration
//! runs, execute them, persist spectra, and assemble the report.
//!
//! Output layout inside the chosen directory (file names are pure functions
//! of experiment kind, configuration label, and profile):
//!   manifest.txt          resolved plan, ending in its own sha256
//!   spectrum_<LABEL>.csv  far-field spectrum per configuration
//!   run_<LABEL>.txt       deterministic run facts + plan hash (skip marker)
//!   report.csv            interference metrics (three_slit, sinha)
//!   report_blocked.csv    variant comparison (blocked_slit)
//!   summary.txt           human-readable digest
//!   timing.log            wall-clock log, appended, not deterministic
//!
//! A configuration is skipped when its spectrum and run sidecar exist and
//! the sidecar's plan hash matches the current manifest; `force` reruns
//! everything. All spectra of one experiment share the solver's time origin
//! and one global phase rotation (psi(0; OOO) real and non-negative), so
//! cross-configuration amplitude arithmetic is meaningful.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::analysis::{InterferenceReport, SpectrumSet, KAPPA_FLOOR_FRAC};
use crate::config::{apply_scene_overrides, RawConfig};
use crate::error::CoreError;
use crate::geometry::{
    build_blocked_slit_scene, build_sinha_scene, build_three_slit_scene, BlockedVariant,
    SceneSpec, SlitConfiguration,
};
use crate::io;
use crate::monitors::{near_to_far, zero_index, AngularSpectrum};
use crate::solver::{run, RunReport, RunSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    ThreeSlit,
    BlockedSlit,
    Sinha,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "three_slit" => Some(Self::ThreeSlit),
            "blocked_slit" => Some(Self::BlockedSlit),
            "sinha" => Some(Self::Sinha),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ThreeSlit => "three_slit",
            Self::BlockedSlit => "blocked_slit",
            Self::Sinha => "sinha",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Ci,
    Paper,
}

impl Profile {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ci" => Some(Self::Ci),
            "paper" => Some(Self::Paper),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ci => "ci",
            Self::Paper => "paper",
        }
    }

    fn resolution(&self, kind: ExperimentKind) -> u32 {
        match (kind, self) {
            (ExperimentKind::Sinha, Profile::Ci) => 10,
            (ExperimentKind::Sinha, Profile::Paper) => 81,
            (_, Profile::Ci) => 25,
            (_, Profile::Paper) => 100,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// CLI-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct PlanOptions {
    pub profile: Option<Profile>,
    pub out_dir: Option<PathBuf>,
    pub max_periods: Option<u32>,
    pub settle_tol: Option<f64>,
    pub checkpoint_every: Option<u32>,
}

/// One configuration to simulate.
#[derive(Debug, Clone)]
pub struct PlannedRun {
    pub label: String,
    pub scene: SceneSpec,
    pub config: Option<SlitConfiguration>,
}

/// Fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub kind: ExperimentKind,
    pub profile: Profile,
    pub out_dir: PathBuf,
    pub runs: Vec<PlannedRun>,
    pub schedule: RunSchedule,
    pub include_ccc: bool,
    pub memory_budget_gb: f64,
    pub kappa_floor_frac: f64,
    pub manifest: String,
    pub manifest_hash: String,
}

/// Default memory gate protecting against paper-scale launches.
pub const DEFAULT_MEMORY_BUDGET_GB: f64 = 16.0;

/// Resolve a config file into an executable plan.
pub fn plan(config_text: &str, opts: &PlanOptions) -> Result<ExperimentPlan, CoreError> {
    let mut raw = RawConfig::parse(config_text)?;

    let kind_str = raw.take("experiment").ok_or(CoreError::Config {
        line: 0,
        message: "missing required key `experiment`".into(),
    })?;
    let kind = ExperimentKind::parse(&kind_str).ok_or(CoreError::Config {
        line: 0,
        message: format!("unknown experiment `{kind_str}` (three_slit, blocked_slit, sinha)"),
    })?;
    let config_profile = raw.take("profile");
    let profile = match opts.profile {
        Some(p) => p,
        None => match config_profile {
            Some(p) => Profile::parse(&p).ok_or(CoreError::Config {
                line: 0,
                message: format!("unknown profile `{p}` (ci, paper)"),
            })?,
            None => Profile::Ci,
        },
    };
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| raw.take("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("out_{}_{}", kind.name(), profile.name())));

    let mut schedule = RunSchedule::default();
    if let Some(v) = raw.take_u32("run.max_periods")? {
        schedule.max_periods = v;
    }
    if let Some(v) = raw.take_f64("run.settle_tol")? {
        schedule.settle_tol = v;
    }
    if let Some(v) = raw.take_u32("run.min_settle_periods")? {
        schedule.min_settle_periods = Some(v);
    }
    if let Some(v) = raw.take_usize("run.window_periods")? {
        schedule.window_periods = v;
    }
    if let Some(v) = raw.take_f64("run.courant_safety")? {
        schedule.courant_safety = v;
    }
    if let Some(v) = opts.max_periods {
        schedule.max_periods = v;
    }
    if let Some(v) = opts.settle_tol {
        schedule.settle_tol = v;
    }
    if let Some(v) = opts.checkpoint_every {
        schedule.checkpoint_every_periods = Some(v);
        schedule.checkpoint_dir = Some(out_dir.clone());
    }
    let include_ccc = raw.take_bool("run.include_ccc")?.unwrap_or(false);
    let memory_budget_gb = raw
        .take_f64("run.memory_budget_gb")?
        .unwrap_or(DEFAULT_MEMORY_BUDGET_GB);
    let kappa_floor_frac = raw.take_f64("run.kappa_floor")?.unwrap_or(KAPPA_FLOOR_FRAC);

    // Slit states are owned by the experiment expansion.
    if let Some(p) = raw.max_index("plate") {
        for i in 0..=p {
            if raw.take(&format!("plate[{i}].states")).is_some() {
                return Err(CoreError::Config {
                    line: 0,
                    message: format!(
                        "plate[{i}].states is set by the experiment expansion and cannot be overridden"
                    ),
                });
            }
        }
    }

    let resolution = profile.resolution(kind);
    let lam = 500e-9;
    let mut runs = Vec::new();
    match kind {
        ExperimentKind::ThreeSlit | ExperimentKind::Sinha => {
            let mut configs = SlitConfiguration::seven().to_vec();
            if include_ccc {
                configs.push(SlitConfiguration::CCC);
            }
            for cfg in configs {
                let mut scene = match kind {
                    ExperimentKind::ThreeSlit => build_three_slit_scene(
                        lam,
                        lam,
                        3.0 * lam,
                        4.0 * lam,
                        cfg,
                        resolution,
                    )?,
                    _ => build_sinha_scene(cfg, resolution, memory_budget_gb)?,
                };
                let mut overrides = raw.clone();
                apply_scene_overrides(&mut overrides, &mut scene)?;
                if runs.is_empty() {
                    raw = overrides; // record consumption once
                }
                runs.push(PlannedRun {
                    label: cfg.label(),
                    scene,
                    config: Some(cfg),
                });
            }
        }
        ExperimentKind::BlockedSlit => {
            for variant in [BlockedVariant::BottomHalf, BlockedVariant::TopHalf] {
                let mut scene = build_blocked_slit_scene(variant, resolution)?;
                let mut overrides = raw.clone();
                apply_scene_overrides(&mut overrides, &mut scene)?;
                if runs.is_empty() {
                    raw = overrides;
                }
                runs.push(PlannedRun {
                    label: variant.label().to_string(),
                    scene,
                    config: None,
                });
            }
        }
    }
    raw.reject_unknown()?;

    // Slit states come from the expansion, never from overrides.
    for r in &runs {
        r.scene.validate()?;
        let estimate = r.scene.memory_estimate_bytes();
        let budget = (memory_budget_gb * 1e9) as u64;
        if estimate > budget {
            return Err(CoreError::ResourceGate {
                estimate_gb: estimate as f64 / 1e9,
                budget_gb: memory_budget_gb,
            });
        }
    }

    let manifest = build_manifest(
        kind,
        profile,
        &runs,
        &schedule,
        include_ccc,
        memory_budget_gb,
        kappa_floor_frac,
    )?;
    let manifest_hash = io::sha256_hex(&manifest);
    Ok(ExperimentPlan {
        kind,
        profile,
        out_dir,
        runs,
        schedule,
        include_ccc,
        memory_budget_gb,
        kappa_floor_frac,
        manifest,
        manifest_hash,
    })
}

fn build_manifest(
    kind: ExperimentKind,
    profile: Profile,
    runs: &[PlannedRun],
    schedule: &RunSchedule,
    include_ccc: bool,
    memory_budget_gb: f64,
    kappa_floor_frac: f64,
) -> Result<String, CoreError> {
    use std::fmt::Write;
    let scene = &runs[0].scene;
    let lam = scene.wavelength;
    let grid = crate::solver::YeeGrid::for_scene(scene, schedule.courant_safety)?;
    let model = scene.solid_model()?;
    let omega0 = 2.0 * std::f64::consts::PI / lam;

    let mut m = String::new();
    let f = io::fmt_f64;
    let _ = writeln!(m, "experiment = {}", kind.name());
    let _ = writeln!(m, "profile = {}", profile.name());
    let _ = writeln!(m, "wavelength_nm = {}", f(lam * 1e9));
    let _ = writeln!(m, "cells_per_wavelength = {}", scene.cells_per_wavelength);
    let _ = writeln!(m, "box.width_wl = {}", f(scene.box_width / lam));
    let _ = writeln!(m, "box.height_wl = {}", f(scene.box_height / lam));
    for (p, plate) in scene.plates.iter().enumerate() {
        let _ = writeln!(m, "plate[{p}].center_z_wl = {}", f(plate.center_z / lam));
        let _ = writeln!(m, "plate[{p}].thickness_wl = {}", f(plate.thickness / lam));
        let _ = writeln!(m, "plate[{p}].slit_width_wl = {}", f(plate.slit_width / lam));
        let _ = writeln!(m, "plate[{p}].pitch_wl = {}", f(plate.pitch / lam));
        let _ = writeln!(m, "plate[{p}].material = {}", plate.material_id);
    }
    for (idx, n) in scene.materials.iter().enumerate().skip(1) {
        let _ = writeln!(m, "material[{idx}].n_real = {}", f(n.re));
        let _ = writeln!(m, "material[{idx}].n_imag = {}", f(n.im));
        let medium = crate::materials::fit_drude(*n, omega0, 1.0)?;
        let _ = writeln!(m, "drude[{idx}].eps_inf = {}", f(medium.eps_inf));
        let _ = writeln!(m, "drude[{idx}].omega_p_over_omega0 = {}", f(medium.omega_p / omega0));
        let _ = writeln!(m, "drude[{idx}].gamma_over_omega0 = {}", f(medium.gamma / omega0));
    }
    let _ = writeln!(m, "pml.cells = {}", scene.pml.cells);
    let _ = writeln!(m, "pml.grading_order = {}", f(scene.pml.grading_order));
    let _ = writeln!(m, "pml.target_reflection = {}", f(scene.pml.target_reflection));
    let _ = writeln!(m, "source.z_wl = {}", f(scene.source.z / lam));
    let _ = writeln!(m, "source.amplitude = {}", f(scene.source.amplitude));
    let _ = writeln!(m, "source.ramp_periods = {}", scene.source.ramp_periods);
    let _ = writeln!(m, "monitor.z_wl = {}", f(scene.monitor.z / lam));
    let _ = writeln!(m, "monitor.angle_min_deg = {}", f(scene.monitor.angle_min_deg));
    let _ = writeln!(m, "monitor.angle_max_deg = {}", f(scene.monitor.angle_max_deg));
    let _ = writeln!(m, "monitor.angle_step_deg = {}", f(scene.monitor.angle_step_deg));
    let _ = writeln!(m, "monitor.edge_taper_wl = {}", f(scene.monitor.edge_taper_wl));
    let _ = writeln!(m, "run.max_periods = {}", schedule.max_periods);
    let _ = writeln!(m, "run.settle_tol = {}", f(schedule.settle_tol));
    let _ = writeln!(
        m,
        "run.min_settle_periods = {}",
        schedule
            .min_settle_periods
            .map(|v| v.to_string())
            .unwrap_or_else(|| "auto".into())
    );
    let _ = writeln!(m, "run.window_periods = {}", schedule.window_periods);
    let _ = writeln!(m, "run.courant_safety = {}", f(schedule.courant_safety));
    let _ = writeln!(m, "run.include_ccc = {include_ccc}");
    let _ = writeln!(m, "run.memory_budget_gb = {}", f(memory_budget_gb));
    let _ = writeln!(m, "run.kappa_floor = {}", f(kappa_floor_frac));
    let _ = writeln!(m, "grid.nx = {}", grid.nx);
    let _ = writeln!(m, "grid.nz = {}", grid.nz);
    let _ = writeln!(m, "grid.steps_per_period = {}", grid.steps_per_period);
    let _ = writeln!(m, "grid.courant = {}", f(grid.courant));
    let _ = writeln!(m, "grid.dt_over_period = {}", f(grid.dt / lam));
    let _ = writeln!(m, "grid.memory_estimate_bytes = {}", scene.memory_estimate_bytes());
    for s in &model.snaps {
        let _ = writeln!(
            m,
            "snap.{} = {} -> {}",
            s.name,
            f(s.requested / lam),
            f(s.snapped / lam)
        );
    }
    for (i, r) in runs.iter().enumerate() {
        let states: String = r.scene.plates[0]
            .slit_states
            .iter()
            .map(|s| s.as_char())
            .collect();
        let _ = writeln!(m, "run[{i}].label = {}", r.label);
        let _ = writeln!(m, "run[{i}].plate0_states = {states}");
    }
    let _ = writeln!(m, "determinism = seed-free; bitwise-stable for any worker count");
    Ok(m)
}

/// Results of executing a plan.
#[derive(Debug)]
pub struct ExecutionOutcome {
    pub out_dir: PathBuf,
    pub ran: Vec<String>,
    pub skipped: Vec<String>,
    pub reports: Vec<(String, RunReport)>,
    pub report: Option<InterferenceReport>,
    pub blocked: Option<BlockedComparison>,
}

/// Metrics comparing the two blocked-slit variants.
#[derive(Debug, Clone)]
pub struct BlockedComparison {
    pub theta_deg: Vec<f64>,
    /// (I_bottom - I_top) / max(I_bottom(0), I_top(0)) pointwise.
    pub normalized_diff: Vec<f64>,
    pub l2_relative_diff: f64,
    pub max_normalized_diff: f64,
}

fn spectrum_path(out: &Path, label: &str) -> PathBuf {
    out.join(format!("spectrum_{label}.csv"))
}

fn run_sidecar_path(out: &Path, label: &str) -> PathBuf {
    out.join(format!("run_{label}.txt"))
}

/// Progress notifications emitted while executing a plan.
#[derive(Debug, Clone)]
pub enum RunEvent {
    Skipped(String),
    Started(String),
    Finished {
        label: String,
        periods: u32,
        wall_seconds: f64,
    },
}

/// Execute all configurations, skipping completed ones unless `force`.
pub fn execute(plan: &ExperimentPlan, force: bool) -> Result<ExecutionOutcome, CoreError> {
    execute_with_progress(plan, force, &mut |_| {})
}

/// `execute` with a per-configuration progress callback.
pub fn execute_with_progress(
    plan: &ExperimentPlan,
    force: bool,
    on_event: &mut dyn FnMut(RunEvent),
) -> Result<ExecutionOutcome, CoreError> {
    let out = &plan.out_dir;
    std::fs::create_dir_all(out).map_err(|e| CoreError::io(out.display().to_string(), e))?;
    io::write_text(
        &out.join("manifest.txt"),
        &format!("{}manifest_sha256 = {}\n", plan.manifest, plan.manifest_hash),
    )?;

    let mut ran = Vec::new();
    let mut skipped = Vec::new();
    let mut reports = Vec::new();
    let mut phase_rotation: Option<f64> = None;
    let mut timing = String::new();

    for planned in &plan.runs {
        let label = &planned.label;
        let spath = spectrum_path(out, label);
        let rpath = run_sidecar_path(out, label);
        if !force && spath.exists() && rpath.exists() {
            let kv = io::read_kv(&rpath)?;
            let stored_hash = kv
                .iter()
                .find(|(k, _)| k == "plan_hash")
                .map(|(_, v)| v.clone());
            if stored_hash.as_deref() == Some(plan.manifest_hash.as_str()) {
                if phase_rotation.is_none() {
                    phase_rotation = kv
                        .iter()
                        .find(|(k, _)| k == "phase_rotation")
                        .and_then(|(_, v)| v.parse().ok());
                }
                skipped.push(label.clone());
                on_event(RunEvent::Skipped(label.clone()));
                continue;
            }
        }

        on_event(RunEvent::Started(label.clone()));
        let scene = &planned.scene;
        let (phasors, report) = run(scene, &plan.schedule)?;
        on_event(RunEvent::Finished {
            label: label.clone(),
            periods: report.periods,
            wall_seconds: report.wall_seconds,
        });
        let theta = scene.monitor.angle_grid();
        let mut spectrum = near_to_far(
            &phasors,
            scene.wavelength,
            &theta,
            scene.monitor.edge_taper_wl,
            label,
        )?;
        let rotation = match phase_rotation {
            Some(r) => r,
            None => {
                let r = spectrum.phase_at(zero_index(&theta));
                phase_rotation = Some(r);
                r
            }
        };
        spectrum.rotate_phase(rotation);
        let spectrum = AngularSpectrum::from_psi(
            spectrum.theta_deg.clone(),
            spectrum.psi.clone(),
            label.clone(),
        );
        io::write_spectrum_csv(&spath, &spectrum)?;

        let mut sidecar = String::new();
        use std::fmt::Write;
        let f = io::fmt_f64;
        let _ = writeln!(sidecar, "label = {label}");
        let _ = writeln!(sidecar, "plan_hash = {}", plan.manifest_hash);
        let _ = writeln!(sidecar, "phase_rotation = {}", f(rotation));
        let _ = writeln!(sidecar, "periods = {}", report.periods);
        let _ = writeln!(sidecar, "steps = {}", report.steps);
        let _ = writeln!(sidecar, "settle_periods = {}", report.settle_periods);
        let _ = writeln!(sidecar, "final_drift = {}", f(report.final_drift));
        let _ = writeln!(sidecar, "dt_over_period = {}", f(report.dt / scene.wavelength));
        let _ = writeln!(sidecar, "steps_per_period = {}", report.steps_per_period);
        let _ = writeln!(sidecar, "courant = {}", f(report.courant));
        let _ = writeln!(sidecar, "nx = {}", report.nx);
        let _ = writeln!(sidecar, "nz = {}", report.nz);
        let _ = writeln!(sidecar, "allocated_bytes = {}", report.allocated_bytes);
        io::write_text(&rpath, &sidecar)?;

        let _ = writeln!(
            timing,
            "{label}: {:.1} s, {:.1} Mcell-updates/s, {} periods",
            report.wall_seconds,
            report.cell_updates_per_second / 1e6,
            report.periods
        );
        ran.push(label.clone());
        reports.push((label.clone(), report));
    }

    if !timing.is_empty() {
        use std::io::Write;
        let mut fh = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(out.join("timing.log"))
            .map_err(|e| CoreError::io("timing.log", e))?;
        let _ = fh.write_all(timing.as_bytes());
    }

    let (report, blocked) = assemble_reports(plan, out)?;
    Ok(ExecutionOutcome {
        out_dir: out.clone(),
        ran,
        skipped,
        reports,
        report,
        blocked,
    })
}

/// Rebuild report.csv / report_blocked.csv and summary.txt from the stored
/// spectra. Used by `execute` (so re-analysis is byte-identical) and by the
/// standalone `analyze` entry point.
pub fn assemble_reports(
    plan: &ExperimentPlan,
    out: &Path,
) -> Result<(Option<InterferenceReport>, Option<BlockedComparison>), CoreError> {
    match plan.kind {
        ExperimentKind::ThreeSlit | ExperimentKind::Sinha => {
            let mut entries = Vec::new();
            for planned in &plan.runs {
                let cfg = planned.config.expect("slit experiments carry configs");
                let path = spectrum_path(out, &planned.label);
                let spec = io::read_spectrum_csv(&path, &planned.label)?;
                entries.push((cfg, spec));
            }
            let set = SpectrumSet::new(entries).map_err(|e| match e {
                CoreError::Analysis(msg) => CoreError::Analysis(format!(
                    "{msg} (spectra under {})",
                    out.display()
                )),
                other => other,
            })?;
            let report = InterferenceReport::from_spectra(&set, plan.kappa_floor_frac)?;
            io::write_report_csv(&out.join("report.csv"), &report)?;
            io::write_text(&out.join("summary.txt"), &summarize(plan, &report))?;
            Ok((Some(report), None))
        }
        ExperimentKind::BlockedSlit => {
            let bottom =
                io::read_spectrum_csv(&spectrum_path(out, "hole_bottom"), "hole_bottom")?;
            let top = io::read_spectrum_csv(&spectrum_path(out, "hole_top"), "hole_top")?;
            if bottom.theta_deg != top.theta_deg {
                return Err(CoreError::Analysis(format!(
                    "angle grids differ between {} and {}",
                    spectrum_path(out, "hole_bottom").display(),
                    spectrum_path(out, "hole_top").display()
                )));
            }
            let norm = bottom.i_zero.max(top.i_zero);
            let diff: Vec<f64> = bottom
                .intensity
                .iter()
                .zip(&top.intensity)
                .map(|(a, b)| (a - b) / norm)
                .collect();
            let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let abs_diff: Vec<f64> = bottom
                .intensity
                .iter()
                .zip(&top.intensity)
                .map(|(a, b)| a - b)
                .collect();
            let comparison = BlockedComparison {
                theta_deg: bottom.theta_deg.clone(),
                l2_relative_diff: l2(&abs_diff) / l2(&bottom.intensity).max(l2(&top.intensity)),
                max_normalized_diff: diff.iter().map(|d| d.abs()).fold(0.0, f64::max),
                normalized_diff: diff,
            };
            let mut csv = String::from("theta_deg,i_hole_bottom,i_hole_top,normalized_diff\n");
            for i in 0..comparison.theta_deg.len() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    io::fmt_f64(comparison.theta_deg[i]),
                    io::fmt_f64(bottom.intensity[i]),
                    io::fmt_f64(top.intensity[i]),
                    io::fmt_f64(comparison.normalized_diff[i]),
                ));
            }
            io::write_text(&out.join("report_blocked.csv"), &csv)?;
            let mut s = String::new();
            use std::fmt::Write;
            let _ = writeln!(s, "experiment = {}", plan.kind.name());
            let _ = writeln!(s, "profile = {}", plan.profile.name());
            let _ = writeln!(s, "l2_relative_diff = {}", io::fmt_f64(comparison.l2_relative_diff));
            let _ = writeln!(
                s,
                "max_normalized_diff = {}",
                io::fmt_f64(comparison.max_normalized_diff)
            );
            let _ = writeln!(s, "timings: see timing.log");
            io::write_text(&out.join("summary.txt"), &s)?;
            Ok((None, Some(comparison)))
        }
    }
}

fn summarize(plan: &ExperimentPlan, report: &InterferenceReport) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let f = io::fmt_f64;
    let _ = writeln!(s, "experiment = {}", plan.kind.name());
    let _ = writeln!(s, "profile = {}", plan.profile.name());
    let _ = writeln!(s, "configurations = {}", plan.runs.len());
    let _ = writeln!(s, "i_zero_ooo = {}", f(report.i_zero_ooo));
    let _ = writeln!(s, "max_abs_sigma = {}", f(report.max_abs_sigma()));
    let _ = writeln!(
        s,
        "max_abs_sigma_within_30deg = {}",
        f(report.max_abs_sigma_within(30.0))
    );
    let _ = writeln!(
        s,
        "kappa_at_zero = {}",
        report
            .kappa_at_zero()
            .map(f)
            .unwrap_or_else(|| "masked".into())
    );
    let _ = writeln!(s, "max_abs_kappa_unmasked = {}", f(report.max_abs_kappa()));
    let _ = writeln!(s, "kappa_all_masked = {}", report.kappa_all_masked);
    let _ = writeln!(s, "max_superposition_residual = {}", f(report.residuals.max()));
    let _ = writeln!(s, "kappa_floor_frac = {}", f(report.kappa_floor_frac));
    let _ = writeln!(s, "timings: see timing.log");
    s
}

/// Re-derive the reports from stored spectra in a directory (the manifest
/// must be present to recover the plan).
pub fn analyze(dir: &Path) -> Result<ExecutionOutcome, CoreError> {
    let manifest = io::read_text(&dir.join("manifest.txt"))?;
    let mut kind = None;
    let mut profile = Profile::Ci;
    let mut include_ccc = false;
    let mut kappa_floor = KAPPA_FLOOR_FRAC;
    for line in manifest.lines() {
        if let Some((k, v)) = line.split_once('=') {
            let (k, v) = (k.trim(), v.trim());
            match k {
                "experiment" => kind = ExperimentKind::parse(v),
                "profile" => profile = Profile::parse(v).unwrap_or(Profile::Ci),
                "run.include_ccc" => include_ccc = v == "true",
                "run.kappa_floor" => kappa_floor = v.parse().unwrap_or(KAPPA_FLOOR_FRAC),
                _ => {}
            }
        }
    }
    let kind = kind.ok_or_else(|| {
        CoreError::io(dir.join("manifest.txt").display().to_string(), "missing experiment key")
    })?;
    // Rebuild a skeleton plan sufficient for assembly: labels and configs.
    let mut config = format!("experiment = {}\n", kind.name());
    config.push_str(&format!("profile = {}\n", profile.name()));
    config.push_str(&format!("run.include_ccc = {include_ccc}\n"));
    config.push_str(&format!("run.kappa_floor = {kappa_floor}\n"));
    let plan = plan(&config, &PlanOptions {
        out_dir: Some(dir.to_path_buf()),
        ..PlanOptions::default()
    })?;
    let (report, blocked) = assemble_reports(&plan, dir)?;
    Ok(ExecutionOutcome {
        out_dir: dir.to_path_buf(),
        ran: Vec::new(),
        skipped: plan.runs.iter().map(|r| r.label.clone()).collect(),
        reports: Vec::new(),
        report,
        blocked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_slit_ci_expands_to_seven() {
        let plan = plan("experiment = three_slit\n", &PlanOptions::default()).unwrap();
        assert_eq!(plan.runs.len(), 7);
        assert_eq!(plan.runs[0].label, "OOO");
        assert_eq!(plan.runs[0].scene.cells_per_wavelength, 25);
        assert_eq!(plan.profile, Profile::Ci);
        assert!(plan.manifest.contains("grid.nx = 1875"));
    }

    #[test]
    fn blocked_slit_expands_to_two() {
        let text = "experiment = blocked_slit\nprofile = paper\n";
        let plan = plan(text, &PlanOptions::default()).unwrap();
        assert_eq!(plan.runs.len(), 2);
        assert_eq!(plan.runs[0].label, "hole_bottom");
        assert_eq!(plan.runs[1].label, "hole_top");
        assert_eq!(plan.runs[0].scene.cells_per_wavelength, 100);
    }

    #[test]
    fn sinha_paper_refused_by_memory_gate() {
        let text = "experiment = sinha\nprofile = paper\n";
        let err = plan(text, &PlanOptions::default()).unwrap_err();
        assert!(matches!(err, CoreError::ResourceGate { .. }), "{err}");
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn sinha_ci_plans_seven_runs() {
        let plan = plan("experiment = sinha\n", &PlanOptions::default()).unwrap();
        assert_eq!(plan.runs.len(), 7);
        assert_eq!(plan.runs[0].scene.cells_per_wavelength, 10);
        assert_eq!(plan.runs[0].scene.plates.len(), 2);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let err = plan(
            "experiment = three_slit\nturbo = yes\n",
            &PlanOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn include_ccc_adds_eighth_run() {
        let plan = plan(
            "experiment = three_slit\nrun.include_ccc = true\n",
            &PlanOptions::default(),
        )
        .unwrap();
        assert_eq!(plan.runs.len(), 8);
        assert_eq!(plan.runs[7].label, "CCC");
    }

    #[test]
    fn cli_profile_overrides_config() {
        let plan = plan(
            "experiment = three_slit\nprofile = paper\n",
            &PlanOptions {
                profile: Some(Profile::Ci),
                ..PlanOptions::default()
            },
        )
        .unwrap();
        assert_eq!(plan.profile, Profile::Ci);
    }

    #[test]
    fn manifest_hash_tracks_content() {
        let a = plan("experiment = three_slit\n", &PlanOptions::default()).unwrap();
        let b = plan(
            "experiment = three_slit\nrun.settle_tol = 1e-7\n",
            &PlanOptions::default(),
        )
        .unwrap();
        assert_ne!(a.manifest_hash, b.manifest_hash);
        let c = plan("experiment = three_slit\n", &PlanOptions::default()).unwrap();
        assert_eq!(a.manifest_hash, c.manifest_hash);
    }

    #[test]
    fn scene_overrides_reach_all_runs() {
        let text = "experiment = three_slit\nmonitor.angle_max_deg = 40\nmonitor.angle_min_deg = -40\n";
        let plan = plan(text, &PlanOptions::default()).unwrap();
        for r in &plan.runs {
            assert_eq!(r.scene.monitor.angle_max_deg, 40.0);
        }
    }
}
