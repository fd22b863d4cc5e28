//! Flat key-value configuration files.
//!
//! Grammar (documented in full in docs/config.md): one `key = value` pair
//! per line, `#` starts a comment, keys are dotted paths with optional
//! `[index]` segments. Unknown and duplicate keys are rejected with the
//! offending line number. Lengths carry their unit in the key name:
//! `_wl` values are multiples of the configured wavelength, `_nm` values
//! are nanometers.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::geometry::{SceneSpec, SlitState};

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
    consumed: bool,
}

/// Parsed but not yet interpreted configuration.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: Vec<Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CoreError> {
        let mut entries: Vec<Entry> = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(CoreError::Config {
                    line,
                    message: format!("expected `key = value`, got `{stripped}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(CoreError::Config {
                    line,
                    message: "empty key or value".into(),
                });
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(CoreError::Config {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
            entries.push(Entry {
                line,
                key,
                value,
                consumed: false,
            });
        }
        Ok(Self { entries })
    }

    /// Fetch and mark a key consumed.
    pub fn take(&mut self, key: &str) -> Option<String> {
        let e = self.entries.iter_mut().find(|e| e.key == key)?;
        e.consumed = true;
        Some(e.value.clone())
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>, CoreError> {
        self.take_parsed(key, "number")
    }

    pub fn take_u32(&mut self, key: &str) -> Result<Option<u32>, CoreError> {
        self.take_parsed(key, "positive integer")
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>, CoreError> {
        self.take_parsed(key, "non-negative integer")
    }

    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>, CoreError> {
        self.take_parsed(key, "true or false")
    }

    fn take_parsed<T: std::str::FromStr>(
        &mut self,
        key: &str,
        what: &str,
    ) -> Result<Option<T>, CoreError> {
        let Some(e) = self.entries.iter_mut().find(|e| e.key == key) else {
            return Ok(None);
        };
        e.consumed = true;
        match e.value.parse() {
            Ok(v) => Ok(Some(v)),
            Err(_) => Err(CoreError::Config {
                line: e.line,
                message: format!("key `{key}`: expected {what}, got `{}`", e.value),
            }),
        }
    }

    /// Largest index used with the given `prefix[index]` pattern.
    pub fn max_index(&self, prefix: &str) -> Option<usize> {
        let mut max = None;
        for e in &self.entries {
            if let Some(rest) = e.key.strip_prefix(prefix) {
                if let Some(rest) = rest.strip_prefix('[') {
                    if let Some(close) = rest.find(']') {
                        if let Ok(idx) = rest[..close].parse::<usize>() {
                            max = Some(max.map_or(idx, |m: usize| m.max(idx)));
                        }
                    }
                }
            }
        }
        max
    }

    /// Error on the first key never consumed by the interpreter.
    pub fn reject_unknown(&self) -> Result<(), CoreError> {
        if let Some(e) = self.entries.iter().find(|e| !e.consumed) {
            return Err(CoreError::Config {
                line: e.line,
                message: format!("unknown key `{}`", e.key),
            });
        }
        Ok(())
    }
}

/// Apply any scene-level keys present in `raw` onto `scene`. Lengths in
/// `_wl` units refer to the (possibly overridden) wavelength.
pub fn apply_scene_overrides(raw: &mut RawConfig, scene: &mut SceneSpec) -> Result<(), CoreError> {
    if let Some(nm) = raw.take_f64("wavelength_nm")? {
        scene.wavelength = nm * 1e-9;
    }
    if let Some(res) = raw.take_u32("cells_per_wavelength")? {
        scene.cells_per_wavelength = res;
    }
    let lam = scene.wavelength;
    if let Some(v) = raw.take_f64("box.width_wl")? {
        scene.box_width = v * lam;
    }
    if let Some(v) = raw.take_f64("box.height_wl")? {
        scene.box_height = v * lam;
    }

    if let Some(max_idx) = raw.max_index("plate") {
        for p in 0..=max_idx {
            if p >= scene.plates.len() {
                return Err(CoreError::Config {
                    line: 0,
                    message: format!(
                        "plate[{p}] does not exist in this experiment ({} plates)",
                        scene.plates.len()
                    ),
                });
            }
            let prefix = format!("plate[{p}]");
            if let Some(v) = raw.take_f64(&format!("{prefix}.center_z_wl"))? {
                scene.plates[p].center_z = v * lam;
            }
            if let Some(v) = raw.take_f64(&format!("{prefix}.thickness_wl"))? {
                scene.plates[p].thickness = v * lam;
            }
            if let Some(v) = raw.take_f64(&format!("{prefix}.slit_width_wl"))? {
                scene.plates[p].slit_width = v * lam;
            }
            if let Some(v) = raw.take_f64(&format!("{prefix}.pitch_wl"))? {
                scene.plates[p].pitch = v * lam;
            }
            if let Some(states) = raw.take(&format!("{prefix}.states")) {
                let parsed: Option<Vec<SlitState>> =
                    states.chars().map(SlitState::from_char).collect();
                scene.plates[p].slit_states = parsed.ok_or_else(|| CoreError::Config {
                    line: 0,
                    message: format!(
                        "plate[{p}].states: expected characters from OCTB, got `{states}`"
                    ),
                })?;
            }
            if let Some(m) = raw.take_usize(&format!("{prefix}.material"))? {
                scene.plates[p].material_id = m as u8;
            }
        }
    }

    if let Some(max_idx) = raw.max_index("material") {
        for m in 1..=max_idx {
            let re = raw.take_f64(&format!("material[{m}].n_real"))?;
            let im = raw.take_f64(&format!("material[{m}].n_imag"))?;
            if re.is_some() || im.is_some() {
                while scene.materials.len() <= m {
                    scene.materials.push(Complex64::new(1.0, 0.0));
                }
                let cur = scene.materials[m];
                scene.materials[m] =
                    Complex64::new(re.unwrap_or(cur.re), im.unwrap_or(cur.im));
            }
        }
    }

    if let Some(v) = raw.take_usize("pml.cells")? {
        scene.pml.cells = v;
    }
    if let Some(v) = raw.take_f64("pml.grading_order")? {
        scene.pml.grading_order = v;
    }
    if let Some(v) = raw.take_f64("pml.target_reflection")? {
        scene.pml.target_reflection = v;
    }
    if let Some(v) = raw.take_f64("source.z_wl")? {
        scene.source.z = v * lam;
    }
    if let Some(v) = raw.take_f64("source.amplitude")? {
        scene.source.amplitude = v;
    }
    if let Some(v) = raw.take_u32("source.ramp_periods")? {
        scene.source.ramp_periods = v;
    }
    if let Some(v) = raw.take_f64("monitor.z_wl")? {
        scene.monitor.z = v * lam;
    }
    if let Some(v) = raw.take_f64("monitor.angle_min_deg")? {
        scene.monitor.angle_min_deg = v;
    }
    if let Some(v) = raw.take_f64("monitor.angle_max_deg")? {
        scene.monitor.angle_max_deg = v;
    }
    if let Some(v) = raw.take_f64("monitor.angle_step_deg")? {
        scene.monitor.angle_step_deg = v;
    }
    if let Some(v) = raw.take_f64("monitor.edge_taper_wl")? {
        scene.monitor.edge_taper_wl = v;
    }
    Ok(())
}
