//! Subcommand implementations: `flow`, `entropy`, `quantum`, `weyl`,
//! `verify-all`, `report`.

use crate::config::KeyValueConfig;
use crate::experiments::{self, preset_list, verify_all, Module};
use rfl_core::entropy;
use rfl_core::geometry::ConformalMetric;
use rfl_core::grid::Grid2D;
use rfl_core::io;
use rfl_core::presets;
use rfl_core::ricciflow::{self, FlowConfig};
use rfl_core::{Error, Result};
use std::path::{Path, PathBuf};

/// Output root: explicit flag, else `RFL_OUTPUT_DIR`, else `./rfl-out`.
pub fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("RFL_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rfl-out"))
}

/// `flow --geometry {torus|sphere} --config <file>`: integrate the flow and
/// write `trajectory/<k>.csv` plus `times.csv` under the output root.
pub fn flow(geometry: &str, config_path: &Path, out: &Path) -> Result<()> {
    let cfg = KeyValueConfig::load(config_path)?;
    std::fs::create_dir_all(out)?;
    match geometry {
        "torus" => {
            cfg.restrict_keys(&["nx", "ny", "lx", "ly", "dt", "t_end", "cfl_limit", "u0_expr"])?;
            let nx = cfg.require_usize("nx")?;
            let ny = cfg.require_usize("ny")?;
            let lx = cfg.require_f64("lx")?;
            let ly = cfg.require_f64("ly")?;
            let dt = cfg.require_f64("dt")?;
            let t_end = cfg.require_f64("t_end")?;
            let cfl_limit = cfg.f64_or("cfl_limit", 1.0)?;
            let grid = Grid2D::new(nx, ny, lx, ly)?;
            let u0 = presets::torus_u0(cfg.str_or("u0_expr", "flat"), grid)?;
            let m0 = ConformalMetric::new(u0);
            let flow_cfg = FlowConfig::new(dt, t_end, cfl_limit)?;
            // refuse unstable configs before any stepping
            let limit = cfl_limit * ricciflow::cfl_max_dt(&m0);
            if dt > limit {
                return Err(Error::ConfigInvalid {
                    key: "dt".into(),
                    reason: format!("violates the CFL bound at u0: dt = {dt:e} > {limit:e}"),
                });
            }
            let traj = ricciflow::run_ricci_flow_torus(&m0, &flow_cfg)?;
            io::write_torus_trajectory(out, &traj)?;
        }
        "sphere" => {
            cfg.restrict_keys(&["r0", "dt", "t_end"])?;
            let r0 = cfg.require_f64("r0")?;
            let dt = cfg.require_f64("dt")?;
            let t_end = cfg.require_f64("t_end")?;
            if t_end >= ricciflow::sphere_extinction_time(r0) {
                return Err(Error::ConfigInvalid {
                    key: "t_end".into(),
                    reason: format!(
                        "reaches sphere extinction at t = {}",
                        ricciflow::sphere_extinction_time(r0)
                    ),
                });
            }
            let flow_cfg = FlowConfig::new(dt, t_end, 1.0)?;
            let traj = ricciflow::run_ricci_flow_sphere(r0, &flow_cfg)?;
            io::write_sphere_trajectory(out, &traj)?;
        }
        other => {
            return Err(Error::ConfigInvalid {
                key: "geometry".into(),
                reason: format!("expected torus or sphere, got `{other}`"),
            })
        }
    }
    Ok(())
}

/// `entropy --trajectory <dir> --f-end <preset|csv>`: backward conjugate-heat
/// solve over a stored flow, writing `functionals.csv`.
pub fn entropy_cmd(trajectory_dir: &Path, f_end: &str, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let (series, report) = match io::read_trajectory(trajectory_dir)? {
        io::StoredTrajectory::Torus(flow) => {
            let last = flow.last_metric();
            let fe = match f_end {
                "vonmises" => presets::von_mises_f_end(last, 0.5)?,
                "uniform" => presets::uniform_f_end(last),
                path => {
                    let (field, _) = io::read_field_2d(Path::new(path))?;
                    field
                }
            };
            let ct = entropy::conjugate_heat_backward(&flow, &fe, 1.0)?;
            let series = ct.functional_series()?;
            let report = series.eq13_residuals()?;
            (series, report)
        }
        io::StoredTrajectory::Sphere(flow) => {
            let fe = match f_end {
                // constant chosen so ∫e^{−f}dV = 1 on the final sphere
                "uniform" | "vonmises" => {
                    let r_end = *flow.radii().last().unwrap();
                    (4.0 * std::f64::consts::PI * r_end * r_end).ln()
                }
                raw => raw.parse().map_err(|_| Error::ConfigInvalid {
                    key: "f_end".into(),
                    reason: format!("expected preset or constant, got `{raw}`"),
                })?,
            };
            let ct = entropy::conjugate_heat_backward_sphere(&flow, fe);
            let series = ct.functional_series()?;
            let report = series.eq13_residuals()?;
            (series, report)
        }
    };
    io::write_functionals_csv(&out.join("functionals.csv"), &series, &report)?;
    println!(
        "res_N = {:.6e}, res_F = {:.6e}, mass drift = {:.6e}",
        report.res_n,
        report.res_f,
        series.mass_drift()
    );
    Ok(())
}

/// `quantum --case <name> --n <points> --report <path>`.
pub fn quantum_cmd(case: &str, n: usize, report_path: &Path, out: &Path) -> Result<bool> {
    let name = match case {
        "gaussian" => "quantum-fisher",
        "ho-ground" | "free-packet" => "quantum-madelung",
        "coherent" => "quantum-weighted-fisher",
        other => {
            return Err(Error::ConfigInvalid {
                key: "case".into(),
                reason: format!(
                    "expected gaussian|ho-ground|coherent|free-packet, got `{other}`"
                ),
            })
        }
    };
    let mut cfg = experiments::ExperimentConfig::preset(name, Module::Quantum, out);
    cfg.parameters.insert("n".into(), n.to_string());
    let summary = experiments::run_experiment(&cfg)?;
    copy_report(&cfg.output_dir.join("quantum_report.json"), report_path)?;
    Ok(summary.pass)
}

/// `weyl --density <preset> --seed <int> --n <points> --report <path>`.
pub fn weyl_cmd(density: &str, seed: u64, n: usize, report_path: &Path, out: &Path) -> Result<bool> {
    let name = match density {
        "uniform" => "weyl-uniform",
        "bump1" | "bump2" => "weyl-two-ways",
        "random-smooth" => "weyl-decompose",
        other => {
            return Err(Error::ConfigInvalid {
                key: "density".into(),
                reason: format!(
                    "expected uniform|bump1|bump2|random-smooth, got `{other}`"
                ),
            })
        }
    };
    let mut cfg = experiments::ExperimentConfig::preset(name, Module::Weyl, out);
    cfg.parameters.insert("n".into(), n.to_string());
    if density == "random-smooth" {
        cfg.parameters.insert("seed".into(), seed.to_string());
    }
    let summary = experiments::run_experiment(&cfg)?;
    copy_report(&cfg.output_dir.join("weyl_report.json"), report_path)?;
    Ok(summary.pass)
}

fn copy_report(src: &Path, dst: &Path) -> Result<()> {
    if src != dst {
        if let Some(parent) = dst.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::copy(src, dst)?;
    }
    Ok(())
}

/// `verify-all`: run every preset; true iff all assertions pass.
pub fn verify_all_cmd(out: &Path) -> Result<bool> {
    std::fs::create_dir_all(out)?;
    let summaries = verify_all(&preset_list(out))?;
    Ok(summaries.iter().all(|s| s.pass))
}

/// `report --dir <dir>`: reprint stored summaries; true iff all pass.
pub fn report_cmd(dir: &Path) -> Result<bool> {
    let summaries = experiments::collect_reports(dir)?;
    if summaries.is_empty() {
        println!("no reports under {}", dir.display());
        return Ok(true);
    }
    let mut all_pass = true;
    for s in &summaries {
        println!(
            "{} {} [{}] hash={} wall={}ms",
            if s.pass { "PASS" } else { "FAIL" },
            s.experiment,
            s.grid,
            &s.config_hash[..12.min(s.config_hash.len())],
            s.wall_ms
        );
        for a in &s.assertions {
            println!(
                "    {} {}: measured {:.6e} ({} {:.6e})",
                if a.pass { "ok  " } else { "FAIL" },
                a.name,
                a.measured,
                a.kind,
                a.tolerance
            );
        }
        all_pass &= s.pass;
    }
    Ok(all_pass)
}
