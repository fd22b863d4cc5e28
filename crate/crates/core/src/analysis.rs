//! Analytic Fraunhofer oracle and the interference metrics.
//!
//! For normal incidence, N equal slits of dimensionless width s and
//! center-to-center separation d (both in wavelengths) diffract with
//!
//!   I(theta, s, d, N) = (sin(N pi d sin t) / sin(pi d sin t))^2
//!                     * (sin(pi s sin t) / (pi s sin t))^2
//!
//! with removable singularities at sin t = 0 and at the grating-lobe
//! angles evaluated by their limits. In this regime the three-slit
//! combination
//!
//!   I(t,s,d,3) - 2 I(t,s,d,2) - I(t,s,2d,2) + 3 I(t,s,d,1)
//!
//! vanishes identically; the solver quantifies how far real devices
//! deviate from it.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::CoreError;
use crate::geometry::SlitConfiguration;
use crate::monitors::{zero_index, AngularSpectrum};

/// Parameters of the N-slit Fraunhofer pattern.
#[derive(Debug, Clone, Copy)]
pub struct FraunhoferParams {
    /// Slit width in wavelengths.
    pub s: f64,
    /// Center-to-center slit separation in wavelengths.
    pub d: f64,
    /// Number of slits.
    pub n_slits: u32,
    /// Observation angle (radians).
    pub theta: f64,
}

impl FraunhoferParams {
    pub fn validate(&self) -> Result<(), CoreError> {
        if self.s <= 0.0 || self.d <= self.s || self.n_slits == 0 {
            return Err(CoreError::Analysis(format!(
                "invalid Fraunhofer parameters s={}, d={}, N={}",
                self.s, self.d, self.n_slits
            )));
        }
        Ok(())
    }
}

/// sin(x)/x with the removable singularity evaluated by series.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// sin(N x)/sin(x), reduced modulo pi so grating lobes evaluate by series.
fn grating_ratio(x: f64, n: u32) -> f64 {
    let nf = n as f64;
    let m = (x / PI).round();
    let delta = x - m * PI;
    if delta.abs() < 1e-4 {
        let d2 = delta * delta;
        let n2 = nf * nf;
        nf * (1.0 - (n2 - 1.0) * d2 / 6.0
            + (3.0 * n2 * n2 - 10.0 * n2 + 7.0) * d2 * d2 / 360.0)
    } else {
        (nf * delta).sin() / delta.sin()
    }
}

/// N-slit Fraunhofer intensity; exactly N^2 at theta = 0.
pub fn fraunhofer_intensity(theta: f64, s: f64, d: f64, n_slits: u32) -> f64 {
    let sin_t = theta.sin();
    let a = PI * sin_t;
    let g = grating_ratio(a * d, n_slits);
    let e = sinc(a * s);
    (g * g) * (e * e)
}

impl FraunhoferParams {
    pub fn intensity(&self) -> f64 {
        fraunhofer_intensity(self.theta, self.s, self.d, self.n_slits)
    }
}

/// The three-slit combination of Fraunhofer intensities; analytically zero
/// for every (theta, s, d).
pub fn fraunhofer_delta(theta: f64, s: f64, d: f64) -> f64 {
    fraunhofer_intensity(theta, s, d, 3) - 2.0 * fraunhofer_intensity(theta, s, d, 2)
        - fraunhofer_intensity(theta, s, 2.0 * d, 2)
        + 3.0 * fraunhofer_intensity(theta, s, d, 1)
}

/// Complex single-slit Fraunhofer amplitude for a slit centered at
/// `center_wl` wavelengths off axis.
pub fn slit_amplitude(theta: f64, s: f64, center_wl: f64) -> Complex64 {
    let sin_t = theta.sin();
    let env = sinc(PI * s * sin_t);
    Complex64::from_polar(1.0, -2.0 * PI * center_wl * sin_t) * env
}

/// Synthetic spectra in which every configuration's amplitude is the exact
/// sum of its open slits' single-slit amplitudes. Against these inputs all
/// interference metrics vanish identically.
pub fn synthetic_fraunhofer_spectra(
    s: f64,
    d: f64,
    theta_deg: &[f64],
    include_ccc: bool,
) -> Vec<(SlitConfiguration, AngularSpectrum)> {
    let centers = [-d, 0.0, d];
    let configs: Vec<SlitConfiguration> = if include_ccc {
        SlitConfiguration::all_eight().to_vec()
    } else {
        SlitConfiguration::seven().to_vec()
    };
    configs
        .into_iter()
        .map(|cfg| {
            let psi: Vec<Complex64> = theta_deg
                .iter()
                .map(|&th_deg| {
                    let th = th_deg.to_radians();
                    (0..3)
                        .filter(|&j| cfg.is_open(j))
                        .map(|j| slit_amplitude(th, s, centers[j]))
                        .sum()
                })
                .collect();
            let spec = AngularSpectrum::from_psi(theta_deg.to_vec(), psi, cfg.label());
            (cfg, spec)
        })
        .collect()
}

/// The seven (optionally eight) spectra of one experiment on a shared
/// angle grid and amplitude convention.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    pub theta_deg: Vec<f64>,
    entries: Vec<(SlitConfiguration, AngularSpectrum)>,
}

impl SpectrumSet {
    pub fn new(entries: Vec<(SlitConfiguration, AngularSpectrum)>) -> Result<Self, CoreError> {
        let mut seen = Vec::new();
        for (cfg, _) in &entries {
            if seen.contains(cfg) {
                return Err(CoreError::Analysis(format!("duplicate spectrum {cfg}")));
            }
            seen.push(*cfg);
        }
        for cfg in SlitConfiguration::seven() {
            if !seen.contains(&cfg) {
                return Err(CoreError::Analysis(format!("missing spectrum {cfg}")));
            }
        }
        let theta = entries[0].1.theta_deg.clone();
        for (cfg, spec) in &entries {
            if spec.theta_deg != theta {
                return Err(CoreError::Analysis(format!(
                    "spectrum {cfg} uses a different angle grid"
                )));
            }
        }
        Ok(Self {
            theta_deg: theta,
            entries,
        })
    }

    pub fn get(&self, cfg: SlitConfiguration) -> Option<&AngularSpectrum> {
        self.entries
            .iter()
            .find(|(c, _)| *c == cfg)
            .map(|(_, s)| s)
    }

    fn intensity(&self, cfg: SlitConfiguration) -> &[f64] {
        &self.get(cfg).expect("validated").intensity
    }

    /// Optional all-closed background; zero when absent.
    fn ccc_intensity(&self, idx: usize) -> f64 {
        self.get(SlitConfiguration::CCC)
            .map(|s| s.intensity[idx])
            .unwrap_or(0.0)
    }
}

/// Unnormalized three-slit interference term Delta(theta).
pub fn delta_curve(set: &SpectrumSet) -> Vec<f64> {
    use SlitConfiguration as C;
    let n = set.theta_deg.len();
    let (ooo, ooc, oco, coo) = (
        set.intensity(C::OOO),
        set.intensity(C::OOC),
        set.intensity(C::OCO),
        set.intensity(C::COO),
    );
    let (occ, coc, cco) = (
        set.intensity(C::OCC),
        set.intensity(C::COC),
        set.intensity(C::CCO),
    );
    (0..n)
        .map(|i| {
            ooo[i] - ooc[i] - oco[i] - coo[i] + occ[i] + coc[i] + cco[i] - set.ccc_intensity(i)
        })
        .collect()
}

/// Normalized three-slit interference term: Delta(theta) / I(0; OOO).
pub fn sigma(set: &SpectrumSet) -> Result<Vec<f64>, CoreError> {
    let i0 = set.get(SlitConfiguration::OOO).expect("validated").i_zero;
    if i0 <= 0.0 {
        return Err(CoreError::Analysis(
            "I(0; OOO) vanishes; cannot normalize".into(),
        ));
    }
    Ok(delta_curve(set).into_iter().map(|d| d / i0).collect())
}

/// Masked kappa(theta): Delta over the summed absolute two-slit
/// interference terms, absent where the denominator falls below
/// `floor_frac` of its maximum over the grid.
pub fn kappa(set: &SpectrumSet, floor_frac: f64) -> Vec<Option<f64>> {
    use SlitConfiguration as C;
    let n = set.theta_deg.len();
    let delta = delta_curve(set);
    let (ooc, oco, coo) = (
        set.intensity(C::OOC),
        set.intensity(C::OCO),
        set.intensity(C::COO),
    );
    let (occ, coc, cco) = (
        set.intensity(C::OCC),
        set.intensity(C::COC),
        set.intensity(C::CCO),
    );
    let denom: Vec<f64> = (0..n)
        .map(|i| {
            let b = set.ccc_intensity(i);
            (ooc[i] - occ[i] - coc[i] + b).abs()
                + (coo[i] - coc[i] - cco[i] + b).abs()
                + (oco[i] - occ[i] - cco[i] + b).abs()
        })
        .collect();
    let d_max = denom.iter().cloned().fold(0.0, f64::max);
    let floor = floor_frac * d_max;
    (0..n)
        .map(|i| {
            if denom[i] > floor && denom[i] > 0.0 {
                Some(delta[i] / denom[i])
            } else {
                None
            }
        })
        .collect()
}

/// Residuals of the pairwise amplitude-superposition assumption.
#[derive(Debug, Clone)]
pub struct SuperpositionResiduals {
    /// |psi(OOC) - psi(OCC) - psi(COC)| / max |psi(OOC)|
    pub r12: Vec<f64>,
    /// |psi(OCO) - psi(OCC) - psi(CCO)| / max |psi(OCO)|
    pub r13: Vec<f64>,
    /// |psi(COO) - psi(COC) - psi(CCO)| / max |psi(COO)|
    pub r23: Vec<f64>,
}

impl SuperpositionResiduals {
    pub fn max(&self) -> f64 {
        self.r12
            .iter()
            .chain(&self.r13)
            .chain(&self.r23)
            .cloned()
            .fold(0.0, f64::max)
    }
}

/// How far each two-open-slit amplitude deviates from the sum of its
/// single-slit amplitudes.
pub fn superposition_residual(set: &SpectrumSet) -> Result<SuperpositionResiduals, CoreError> {
    use SlitConfiguration as C;
    let psi = |cfg: C| -> &[Complex64] { &set.get(cfg).expect("validated").psi };
    let residual = |pair: C, lone_a: C, lone_b: C| -> Vec<f64> {
        let p = psi(pair);
        let a = psi(lone_a);
        let b = psi(lone_b);
        let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        (0..p.len())
            .map(|i| (p[i] - a[i] - b[i]).norm() / scale)
            .collect()
    };
    Ok(SuperpositionResiduals {
        r12: residual(C::OOC, C::OCC, C::COC),
        r13: residual(C::OCO, C::OCC, C::CCO),
        r23: residual(C::COO, C::COC, C::CCO),
    })
}

/// Everything derived from one experiment's spectra.
#[derive(Debug, Clone)]
pub struct InterferenceReport {
    pub theta_deg: Vec<f64>,
    pub sigma: Vec<f64>,
    pub delta: Vec<f64>,
    pub kappa: Vec<Option<f64>>,
    pub residuals: SuperpositionResiduals,
    /// Normalization constant I(0; OOO) and its configuration label.
    pub i_zero_ooo: f64,
    pub kappa_floor_frac: f64,
    /// Set when the kappa denominator is below the floor everywhere.
    pub kappa_all_masked: bool,
}

/// Default kappa denominator floor, as a fraction of its maximum.
pub const KAPPA_FLOOR_FRAC: f64 = 1e-3;

impl InterferenceReport {
    pub fn from_spectra(set: &SpectrumSet, kappa_floor_frac: f64) -> Result<Self, CoreError> {
        let sigma = sigma(set)?;
        let delta = delta_curve(set);
        let kappa = kappa(set, kappa_floor_frac);
        let residuals = superposition_residual(set)?;
        let kappa_all_masked = kappa.iter().all(|k| k.is_none());
        let i_zero_ooo = set.get(SlitConfiguration::OOO).expect("validated").i_zero;
        Ok(Self {
            theta_deg: set.theta_deg.clone(),
            sigma,
            delta,
            kappa,
            residuals,
            i_zero_ooo,
            kappa_floor_frac,
            kappa_all_masked,
        })
    }

    pub fn max_abs_sigma(&self) -> f64 {
        self.sigma.iter().map(|s| s.abs()).fold(0.0, f64::max)
    }

    /// Sigma restricted to |theta| <= limit (degrees).
    pub fn max_abs_sigma_within(&self, limit_deg: f64) -> f64 {
        self.theta_deg
            .iter()
            .zip(&self.sigma)
            .filter(|(th, _)| th.abs() <= limit_deg)
            .map(|(_, s)| s.abs())
            .fold(0.0, f64::max)
    }

    pub fn kappa_at_zero(&self) -> Option<f64> {
        self.kappa[zero_index(&self.theta_deg)]
    }

    pub fn max_abs_kappa(&self) -> f64 {
        self.kappa
            .iter()
            .flatten()
            .map(|k| k.abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn theta_zero_is_n_squared_exactly() {
        for n in 1..=3u32 {
            for (s, d) in [(1.0, 2.0), (0.3, 5.5), (2.0, 9.0)] {
                let i = fraunhofer_intensity(0.0, s, d, n);
                assert_eq!(i, (n * n) as f64, "N={n}, s={s}, d={d}");
            }
        }
    }

    #[test]
    fn single_slit_is_pure_envelope() {
        for th_deg in [-40.0_f64, -7.0, 3.0, 31.0] {
            let th: f64 = th_deg.to_radians();
            let i = fraunhofer_intensity(th, 1.3, 4.0, 1);
            let y = PI * 1.3 * th.sin();
            let env = (y.sin() / y).powi(2);
            assert!((i - env).abs() <= 1e-14 * env.max(1.0));
        }
    }

    #[test]
    fn grating_lobe_limit_matches_brute_force() {
        // At sin(theta) = 0.5 with d = 2 the grating factor hits the lobe
        // limit N^2 = 9 while the s = 1 envelope is (2/pi)^2. The limit is
        // pinned by approaching the lobe from both sides.
        let target = 36.0 / (PI * PI);
        let exact = fraunhofer_intensity(0.5_f64.asin(), 1.0, 2.0, 3);
        assert!((exact - target).abs() < 1e-12, "{exact} vs {target}");

        let mut eps: f64 = 1e-3;
        while eps > 1e-6 {
            let above = fraunhofer_intensity((0.5 + eps).asin(), 1.0, 2.0, 3);
            let below = fraunhofer_intensity((0.5 - eps).asin(), 1.0, 2.0, 3);
            assert!((above - target).abs() < 40.0 * eps, "eps {eps}: {above}");
            assert!((below - target).abs() < 40.0 * eps, "eps {eps}: {below}");
            eps *= 0.1;
        }
    }

    #[test]
    fn delta_vanishes_at_named_points() {
        // theta = 0: 9 - 2*4 - 4 + 3 = 0 from the N^2 limits.
        assert_eq!(fraunhofer_delta(0.0, 1.0, 2.0), 0.0);
        let th = 17.0_f64.to_radians();
        let scaled = fraunhofer_delta(th, 1.0, 2.0).abs()
            / (fraunhofer_intensity(th, 1.0, 2.0, 3) + 1.0);
        assert!(scaled <= 1e-10, "scaled {scaled:.3e}");
    }

    #[test]
    fn delta_vanishes_on_random_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let theta = rng.gen_range(-89.9_f64..89.9).to_radians();
            let s = rng.gen_range(0.1..3.0);
            let d = rng.gen_range(s + 0.1..10.0);
            let scaled =
                fraunhofer_delta(theta, s, d).abs() / (fraunhofer_intensity(theta, s, d, 3) + 1.0);
            assert!(
                scaled <= 1e-10,
                "theta={theta}, s={s}, d={d}: scaled {scaled:.3e}"
            );
        }
    }

    #[test]
    fn intensity_is_even_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let theta = rng.gen_range(0.0_f64..1.4);
            let s = rng.gen_range(0.1..2.0);
            let d = rng.gen_range(s + 0.1..8.0);
            let n = rng.gen_range(1..=3);
            let plus = fraunhofer_intensity(theta, s, d, n);
            let minus = fraunhofer_intensity(-theta, s, d, n);
            assert!(plus >= 0.0);
            assert!((plus - minus).abs() <= 1e-12 * plus.max(1.0));
        }
    }

    #[test]
    fn pairwise_expansion_identity() {
        // |p1+p2+p3|^2 expands exactly into pairwise and single terms.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for _ in 0..10_000 {
            let (p1, p2, p3) = (c(), c(), c());
            let lhs = (p1 + p2 + p3).norm_sqr();
            let rhs = (p1 + p2).norm_sqr() + (p1 + p3).norm_sqr() + (p2 + p3).norm_sqr()
                - p1.norm_sqr()
                - p2.norm_sqr()
                - p3.norm_sqr();
            assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    fn grid() -> Vec<f64> {
        (-90..=90).map(|i| i as f64 * 0.5).collect()
    }

    #[test]
    fn fraunhofer_amplitudes_give_zero_metrics() {
        let set = SpectrumSet::new(synthetic_fraunhofer_spectra(1.0, 3.0, &grid(), false)).unwrap();
        let report = InterferenceReport::from_spectra(&set, KAPPA_FLOOR_FRAC).unwrap();
        assert!(report.max_abs_sigma() <= 1e-12, "{}", report.max_abs_sigma());
        assert!(report.max_abs_kappa() <= 1e-9, "{}", report.max_abs_kappa());
        assert!(report.residuals.max() <= 1e-12);
        assert!(!report.kappa_all_masked);
    }

    #[test]
    fn synthetic_three_slit_sum_matches_intensity_formula() {
        // Cross-check: the summed slit amplitudes reproduce the N = 3
        // closed form.
        let (s, d) = (1.0, 3.0);
        for th_deg in [-25.0_f64, -3.2, 0.0, 11.0, 40.0] {
            let th = th_deg.to_radians();
            let psi: Complex64 = [-d, 0.0, d]
                .iter()
                .map(|&c0| slit_amplitude(th, s, c0))
                .sum();
            let i = fraunhofer_intensity(th, s, d, 3);
            assert!((psi.norm_sqr() - i).abs() <= 1e-11 * i.max(1.0));
        }
    }

    #[test]
    fn degenerate_inputs() {
        // All-zero spectra except OOO: Sigma reduces to the normalized OOO
        // intensity, r12 to the normalized |psi(OOC)| = 0 case.
        let theta = grid();
        let mut entries = Vec::new();
        for cfg in SlitConfiguration::seven() {
            let psi: Vec<Complex64> = if cfg == SlitConfiguration::OOO {
                theta
                    .iter()
                    .map(|&t| {
                        let th = t.to_radians();
                        Complex64::new(fraunhofer_intensity(th, 1.0, 3.0, 3).sqrt(), 0.0)
                    })
                    .collect()
            } else {
                vec![Complex64::new(0.0, 0.0); theta.len()]
            };
            entries.push((
                cfg,
                AngularSpectrum::from_psi(theta.clone(), psi, cfg.label()),
            ));
        }
        let set = SpectrumSet::new(entries).unwrap();
        let sg = sigma(&set).unwrap();
        let ooo = set.get(SlitConfiguration::OOO).unwrap();
        for (i, s) in sg.iter().enumerate() {
            let expect = ooo.intensity[i] / ooo.i_zero;
            assert!((s - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_pair_amplitudes_residual() {
        // psi(OCC) = psi(COC) = 0 makes r12 the normalized |psi(OOC)|.
        let theta = vec![-1.0, 0.0, 1.0];
        let mut entries = Vec::new();
        for cfg in SlitConfiguration::seven() {
            let psi: Vec<Complex64> = if cfg == SlitConfiguration::OOC {
                vec![
                    Complex64::new(0.5, 0.0),
                    Complex64::new(2.0, 0.0),
                    Complex64::new(1.0, 0.0),
                ]
            } else {
                vec![Complex64::new(0.0, 0.0); 3]
            };
            entries.push((
                cfg,
                AngularSpectrum::from_psi(theta.clone(), psi, cfg.label()),
            ));
        }
        let set = SpectrumSet::new(entries).unwrap();
        let r = superposition_residual(&set).unwrap();
        assert_eq!(r.r12, vec![0.25, 1.0, 0.5]);
    }

    #[test]
    fn metrics_invariant_under_common_rescale() {
        let theta = grid();
        let base = synthetic_fraunhofer_spectra(1.0, 3.0, &theta, false);
        // Perturb one spectrum so the metrics are nonzero, then rescale all.
        let perturb = |entries: &mut Vec<(SlitConfiguration, AngularSpectrum)>, factor: f64| {
            for (cfg, spec) in entries.iter_mut() {
                if *cfg == SlitConfiguration::OOO {
                    for p in spec.psi.iter_mut() {
                        *p *= 1.07;
                    }
                }
                for p in spec.psi.iter_mut() {
                    *p *= factor;
                }
                *spec = AngularSpectrum::from_psi(
                    spec.theta_deg.clone(),
                    spec.psi.clone(),
                    spec.config_label.clone(),
                );
            }
        };
        let mut a = base.clone();
        perturb(&mut a, 1.0);
        let mut b = base;
        perturb(&mut b, 13.7);
        let ra =
            InterferenceReport::from_spectra(&SpectrumSet::new(a).unwrap(), KAPPA_FLOOR_FRAC)
                .unwrap();
        let rb =
            InterferenceReport::from_spectra(&SpectrumSet::new(b).unwrap(), KAPPA_FLOOR_FRAC)
                .unwrap();
        for (ka, kb) in ra.sigma.iter().zip(&rb.sigma) {
            assert!((ka - kb).abs() <= 1e-9 * ka.abs().max(1e-6));
        }
        for (ka, kb) in ra.kappa.iter().zip(&rb.kappa) {
            match (ka, kb) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-6)),
                (None, None) => {}
                _ => panic!("mask changed under rescale"),
            }
        }
    }

    #[test]
    fn mirrored_spectra_reflect_metrics() {
        // Exchanging the outer slits and reversing theta leaves Sigma and
        // kappa curves mirrored.
        let theta = grid();
        let mut entries = synthetic_fraunhofer_spectra(1.0, 3.0, &theta, false);
        // Make the set asymmetric: perturb OCC only.
        for (cfg, spec) in entries.iter_mut() {
            if *cfg == SlitConfiguration::OCC {
                for (i, p) in spec.psi.iter_mut().enumerate() {
                    *p *= 1.0 + 0.05 * (i as f64 / 180.0);
                }
                *spec = AngularSpectrum::from_psi(
                    spec.theta_deg.clone(),
                    spec.psi.clone(),
                    spec.config_label.clone(),
                );
            }
        }
        let set = SpectrumSet::new(entries.clone()).unwrap();
        let sig = sigma(&set).unwrap();

        // Mirror: relabel cfg -> cfg.mirrored() and flip each curve in theta.
        let mirrored: Vec<(SlitConfiguration, AngularSpectrum)> = entries
            .iter()
            .map(|(cfg, spec)| {
                let mut psi = spec.psi.clone();
                psi.reverse();
                (
                    cfg.mirrored(),
                    AngularSpectrum::from_psi(theta.clone(), psi, cfg.mirrored().label()),
                )
            })
            .collect();
        let mset = SpectrumSet::new(mirrored).unwrap();
        let msig = sigma(&mset).unwrap();
        let n = sig.len();
        for i in 0..n {
            assert!(
                (sig[i] - msig[n - 1 - i]).abs() <= 1e-12,
                "mirror mismatch at {i}"
            );
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let theta = grid();
        let mut entries = synthetic_fraunhofer_spectra(1.0, 3.0, &theta, false);
        let bad_theta: Vec<f64> = theta.iter().map(|t| t + 0.001).collect();
        entries[3].1 = AngularSpectrum::from_psi(
            bad_theta,
            entries[3].1.psi.clone(),
            entries[3].0.label(),
        );
        assert!(SpectrumSet::new(entries).is_err());
    }

    #[test]
    fn all_masked_kappa_flagged() {
        let theta = vec![-1.0, 0.0, 1.0];
        let entries: Vec<_> = SlitConfiguration::seven()
            .into_iter()
            .map(|cfg| {
                let psi = vec![Complex64::new(0.0, 0.0); 3];
                (
                    cfg,
                    AngularSpectrum::from_psi(theta.clone(), psi, cfg.label()),
                )
            })
            .collect();
        let set = SpectrumSet::new(entries).unwrap();
        let k = kappa(&set, KAPPA_FLOOR_FRAC);
        assert!(k.iter().all(|v| v.is_none()));
    }

    #[test]
    fn ccc_background_subtracts() {
        // With a CCC spectrum supplied, a constant background added to all
        // intensities cancels out of Delta.
        let theta = grid();
        let clean = synthetic_fraunhofer_spectra(1.0, 3.0, &theta, true);
        let shifted: Vec<(SlitConfiguration, AngularSpectrum)> = clean
            .iter()
            .map(|(cfg, spec)| {
                let mut s = spec.clone();
                for v in s.intensity.iter_mut() {
                    *v += 0.25;
                }
                s.i_zero += 0.25;
                (*cfg, s)
            })
            .collect();
        let set = SpectrumSet::new(shifted).unwrap();
        let d = delta_curve(&set);
        assert!(d.iter().all(|v| v.abs() <= 1e-12), "background leaked");
    }
}
