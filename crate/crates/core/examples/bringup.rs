//! Bring-up probe: runs cheap scenes and prints the physics quantities the
//! acceptance suite will gate on. Not part of the test suite.

use slitwave_core::analysis::fraunhofer_intensity;
use slitwave_core::geometry::{build_three_slit_scene, SlitConfiguration, SlitPlateSpec, SlitState};
use slitwave_core::monitors::near_to_far;
use slitwave_core::solver::{run, RunSchedule};

fn main() {
    let lam = 500e-9;
    let which = std::env::args().nth(1).unwrap_or_else(|| "single".into());

    match which.as_str() {
        "single" => {
            // Single slit, width lambda: envelope vs sinc^2.
            let mut scene = build_three_slit_scene(
                lam,
                lam,
                3.0 * lam,
                4.0 * lam,
                SlitConfiguration::COC,
                25,
            )
            .unwrap();
            scene.plates[0] = SlitPlateSpec {
                slit_states: vec![SlitState::Open],
                ..scene.plates[0].clone()
            };
            let schedule = RunSchedule {
                max_periods: 300,
                ..Default::default()
            };
            let t0 = std::time::Instant::now();
            let (phasors, report) = run(&scene, &schedule).unwrap();
            println!(
                "single slit: {} periods, {:.1}s, {:.0} Mups, drift {:.2e}",
                report.periods,
                t0.elapsed().as_secs_f64(),
                report.cell_updates_per_second / 1e6,
                report.final_drift
            );
            let theta: Vec<f64> = (-600..=600).map(|i| i as f64 * 0.05).collect();
            let spec = near_to_far(&phasors, lam, &theta, 3.0, "single").unwrap();
            let i0 = spec.i_zero;
            println!("theta_deg, fdtd, sinc2, absdiff");
            let mut max_dev: f64 = 0.0;
            for (i, th) in theta.iter().enumerate() {
                let fdtd = spec.intensity[i] / i0;
                let oracle = fraunhofer_intensity(th.to_radians(), 1.0, 3.0, 1);
                if th.abs() <= 30.0 {
                    max_dev = max_dev.max((fdtd - oracle).abs());
                }
                if i % 60 == 0 {
                    println!("{th:7.2}, {fdtd:.5}, {oracle:.5}, {:.5}", (fdtd - oracle).abs());
                }
            }
            println!("max |fdtd - sinc2| over |theta|<=30deg: {max_dev:.5}");

            // Parseval: far-field power vs Poynting flux through the line.
            let wide: Vec<f64> = (-1780..=1780).map(|i| i as f64 * 0.05).collect();
            let full = near_to_far(&phasors, lam, &wide, 3.0, "single").unwrap();
            let p_far = full.total_power();
            let p_line = phasors.poynting_flux();
            println!(
                "parseval: far {p_far:.6e} vs line {p_line:.6e} (ratio {:.4})",
                p_far / p_line
            );
        }
        "ooo" => {
            let scene = build_three_slit_scene(
                lam,
                lam,
                3.0 * lam,
                4.0 * lam,
                SlitConfiguration::OOO,
                25,
            )
            .unwrap();
            let schedule = RunSchedule {
                max_periods: 300,
                ..Default::default()
            };
            let t0 = std::time::Instant::now();
            let (phasors, report) = run(&scene, &schedule).unwrap();
            println!(
                "OOO: {} periods, {:.1}s, {:.0} Mups, drift {:.2e}",
                report.periods,
                t0.elapsed().as_secs_f64(),
                report.cell_updates_per_second / 1e6,
                report.final_drift
            );
            let theta: Vec<f64> = (-900..=900).map(|i| i as f64 * 0.05).collect();
            let spec = near_to_far(&phasors, lam, &theta, 3.0, "OOO").unwrap();
            let i0 = spec.i_zero;
            // Find local maxima above 5% of peak.
            let norm: Vec<f64> = spec.intensity.iter().map(|v| v / i0).collect();
            println!("FDTD maxima (|theta| <= 31 deg):");
            for i in 1..norm.len() - 1 {
                if norm[i] > norm[i - 1] && norm[i] > norm[i + 1] && norm[i] > 0.05
                    && theta[i].abs() <= 31.0 {
                        println!("  theta = {:7.3} deg, I/I0 = {:.4}", theta[i], norm[i]);
                    }
            }
            println!("oracle maxima (s=1, d=3): 0, +-19.47 deg; (s=1, d=2): 0, +-30 deg");
            for (i, th) in theta.iter().enumerate() {
                if i % 80 == 0 && th.abs() <= 45.0 {
                    let o3 = fraunhofer_intensity(th.to_radians(), 1.0, 3.0, 3) / 9.0;
                    println!("{th:7.2}, fdtd {:.4}, fraunhofer_d3 {o3:.4}", norm[i]);
                }
            }
        }
        "sym" => {
            // Mirror symmetry of the raw phasors for a symmetric scene.
            let mut scene = build_three_slit_scene(
                lam,
                lam,
                3.0 * lam,
                4.0 * lam,
                SlitConfiguration::COC,
                25,
            )
            .unwrap();
            scene.plates[0] = SlitPlateSpec {
                slit_states: vec![SlitState::Open],
                ..scene.plates[0].clone()
            };
            let schedule = RunSchedule {
                max_periods: 300,
                ..Default::default()
            };
            let (phasors, _) = run(&scene, &schedule).unwrap();
            let n = phasors.ex.len();
            println!("i, |Ex|, |Ex_mirror|, ratio, |Hy|, |Hy_mirror|, ratio");
            for &i in &[0usize, 200, 400, 700, 900, 925, 937] {
                let j = n - 1 - i;
                println!(
                    "{i:5}: {:.4e} {:.4e} {:.4}   {:.4e} {:.4e} {:.4}",
                    phasors.ex[i].norm(),
                    phasors.ex[j].norm(),
                    phasors.ex[i].norm() / phasors.ex[j].norm(),
                    phasors.hy[i].norm(),
                    phasors.hy[j].norm(),
                    phasors.hy[i].norm() / phasors.hy[j].norm(),
                );
            }
            // Phase gradient across the center (should be ~0 for straight-up).
            for &i in &[935usize, 936, 937, 938, 939, 940] {
                println!(
                    "phase Ex[{i}] = {:+.4}, Hy = {:+.4}, arg(Ex/Hy) = {:+.4}",
                    phasors.ex[i].arg(),
                    phasors.hy[i].arg(),
                    (phasors.ex[i] / phasors.hy[i]).arg()
                );
            }
        }
        other => eprintln!("unknown probe {other}"),
    }
}
