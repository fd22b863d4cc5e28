//! On-disk artifact formats.
//!
//! Spectrum CSV: `theta_deg,intensity,re_amp,im_amp`, one header line, every
//! number printed with 17 significant digits so re-runs are byte-identical.
//! Report CSV: `theta_deg,sigma,delta,kappa,kappa_masked,r12,r13,r23` with
//! masked kappa values left empty. The manifest is the resolved plan in the
//! config grammar plus a sha256 content hash.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::analysis::InterferenceReport;
use crate::error::CoreError;
use crate::monitors::AngularSpectrum;

/// 17 significant digits, the fixed formatting of every artifact number.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_spectrum_csv(path: &Path, spec: &AngularSpectrum) -> Result<(), CoreError> {
    let mut out = String::with_capacity(spec.theta_deg.len() * 80 + 64);
    out.push_str("theta_deg,intensity,re_amp,im_amp\n");
    for i in 0..spec.theta_deg.len() {
        out.push_str(&fmt_f64(spec.theta_deg[i]));
        out.push(',');
        out.push_str(&fmt_f64(spec.intensity[i]));
        out.push(',');
        out.push_str(&fmt_f64(spec.psi[i].re));
        out.push(',');
        out.push_str(&fmt_f64(spec.psi[i].im));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CoreError::io(path.display().to_string(), e))
}

pub fn read_spectrum_csv(path: &Path, config_label: &str) -> Result<AngularSpectrum, CoreError> {
    let text =
        fs::read_to_string(path).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    if header != "theta_deg,intensity,re_amp,im_amp" {
        return Err(CoreError::io(
            path.display().to_string(),
            format!("unexpected header `{header}`"),
        ));
    }
    let mut theta = Vec::new();
    let mut psi = Vec::new();
    let mut intensity = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CoreError::io(
                path.display().to_string(),
                format!("line {}: expected 4 fields", idx + 2),
            ));
        }
        let parse = |s: &str| -> Result<f64, CoreError> {
            s.parse().map_err(|_| {
                CoreError::io(
                    path.display().to_string(),
                    format!("line {}: bad number `{s}`", idx + 2),
                )
            })
        };
        theta.push(parse(fields[0])?);
        intensity.push(parse(fields[1])?);
        psi.push(Complex64::new(parse(fields[2])?, parse(fields[3])?));
    }
    if theta.is_empty() {
        return Err(CoreError::io(path.display().to_string(), "empty spectrum"));
    }
    let zero_idx = crate::monitors::zero_index(&theta);
    let i_zero = intensity[zero_idx];
    Ok(AngularSpectrum {
        theta_deg: theta,
        psi,
        intensity,
        i_zero,
        config_label: config_label.to_string(),
    })
}

pub fn write_report_csv(path: &Path, report: &InterferenceReport) -> Result<(), CoreError> {
    let mut out = String::new();
    out.push_str("theta_deg,sigma,delta,kappa,kappa_masked,r12,r13,r23\n");
    for i in 0..report.theta_deg.len() {
        out.push_str(&fmt_f64(report.theta_deg[i]));
        out.push(',');
        out.push_str(&fmt_f64(report.sigma[i]));
        out.push(',');
        out.push_str(&fmt_f64(report.delta[i]));
        out.push(',');
        if let Some(k) = report.kappa[i] { out.push_str(&fmt_f64(k)) }
        out.push(',');
        out.push_str(if report.kappa[i].is_none() { "1" } else { "0" });
        out.push(',');
        out.push_str(&fmt_f64(report.residuals.r12[i]));
        out.push(',');
        out.push_str(&fmt_f64(report.residuals.r13[i]));
        out.push(',');
        out.push_str(&fmt_f64(report.residuals.r23[i]));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CoreError::io(path.display().to_string(), e))
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CoreError> {
    fs::write(path, text).map_err(|e| CoreError::io(path.display().to_string(), e))
}

pub fn read_text(path: &Path) -> Result<String, CoreError> {
    fs::read_to_string(path).map_err(|e| CoreError::io(path.display().to_string(), e))
}

/// Parse a `key = value` sidecar written by the runner.
pub fn read_kv(path: &Path) -> Result<Vec<(String, String)>, CoreError> {
    let text = read_text(path)?;
    Ok(text
        .lines()
        .filter_map(|l| {
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                return None;
            }
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect())
}
