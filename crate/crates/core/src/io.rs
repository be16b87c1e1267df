//! Field and metric serialization.
//!
//! Fields go to CSV (`index[,jndex],x[,y],value`) with a JSON sidecar holding
//! the grid descriptor. All floats are printed with 17 significant digits so
//! a round-trip through text is lossless.

use crate::entropy::{Eq13Report, FunctionalSeries};
use crate::error::{Error, Result};
use crate::geometry::{ConformalMetric, SphereMetric};
use crate::grid::{Grid1D, Grid2D, ScalarField1D, ScalarField2D};
use crate::ricciflow::{FlowTrajectory, SphereFlow};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar1D {
    n: usize,
    l: f64,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum MetricSidecar {
    #[serde(rename = "conformal2d")]
    Conformal2D { nx: usize, ny: usize, lx: f64, ly: f64, name: String },
    #[serde(rename = "sphere")]
    Sphere { r: f64 },
}

fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("json")
}

/// Write a 1-D field as CSV plus its JSON sidecar (same stem, `.json`).
pub fn write_field_1d(csv: &Path, field: &ScalarField1D, name: &str) -> Result<()> {
    let g = field.grid();
    let mut out = String::from("index,x,value\n");
    for (i, &v) in field.values().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i, fmt_f64(g.x(i)), fmt_f64(v)));
    }
    fs::write(csv, out)?;
    let sc = Sidecar1D { n: g.n(), l: g.length(), name: name.to_string() };
    write_json(&sidecar_path(csv), &sc)
}

/// Write a 2-D field as CSV plus its JSON sidecar.
pub fn write_field_2d(csv: &Path, field: &ScalarField2D, name: &str) -> Result<()> {
    let g = field.grid();
    let mut out = String::from("index,jndex,x,y,value\n");
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i,
                j,
                fmt_f64(g.x(i)),
                fmt_f64(g.y(j)),
                fmt_f64(field.at(i, j))
            ));
        }
    }
    fs::write(csv, out)?;
    let sc = Sidecar2D { nx: g.nx(), ny: g.ny(), lx: g.lx(), ly: g.ly(), name: name.to_string() };
    write_json(&sidecar_path(csv), &sc)
}

pub fn read_field_1d(csv: &Path) -> Result<(ScalarField1D, String)> {
    let sc: Sidecar1D = read_json(&sidecar_path(csv))?;
    let grid = Grid1D::new(sc.n, sc.l)?;
    let values = read_values(csv, 2)?;
    Ok((ScalarField1D::from_values(grid, values)?, sc.name))
}

pub fn read_field_2d(csv: &Path) -> Result<(ScalarField2D, String)> {
    let sc: Sidecar2D = read_json(&sidecar_path(csv))?;
    let grid = Grid2D::new(sc.nx, sc.ny, sc.lx, sc.ly)?;
    let values = read_values(csv, 4)?;
    Ok((ScalarField2D::from_values(grid, values)?, sc.name))
}

/// Write a conformal metric (its u field) with a `kind: conformal2d` sidecar.
pub fn write_conformal_metric(csv: &Path, m: &ConformalMetric) -> Result<()> {
    write_field_2d(csv, m.u(), "u")?;
    let g = m.grid();
    let sc = MetricSidecar::Conformal2D {
        nx: g.nx(),
        ny: g.ny(),
        lx: g.lx(),
        ly: g.ly(),
        name: "u".to_string(),
    };
    write_json(&sidecar_path(csv), &sc)
}

/// Write a sphere metric: a one-row CSV carrying the radius plus its sidecar.
pub fn write_sphere_metric(csv: &Path, m: &SphereMetric) -> Result<()> {
    let mut out = String::from("index,x,value\n");
    out.push_str(&format!("0,{},{}\n", fmt_f64(0.0), fmt_f64(m.radius())));
    fs::write(csv, out)?;
    write_json(&sidecar_path(csv), &MetricSidecar::Sphere { r: m.radius() })
}

/// Either kind of stored metric.
pub enum StoredMetric {
    Conformal(ConformalMetric),
    Sphere(SphereMetric),
}

pub fn read_metric(csv: &Path) -> Result<StoredMetric> {
    let sc: MetricSidecar = read_json(&sidecar_path(csv))?;
    match sc {
        MetricSidecar::Conformal2D { nx, ny, lx, ly, .. } => {
            let grid = Grid2D::new(nx, ny, lx, ly)?;
            let values = read_values(csv, 4)?;
            let u = ScalarField2D::from_values(grid, values)?;
            Ok(StoredMetric::Conformal(ConformalMetric::new(u)))
        }
        MetricSidecar::Sphere { r } => Ok(StoredMetric::Sphere(SphereMetric::new(r)?)),
    }
}

fn read_values(csv: &Path, value_col: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(csv)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.is_empty() {
            continue;
        }
        let field = line
            .split(',')
            .nth(value_col)
            .ok_or_else(|| Error::Parse(format!("{csv:?}:{}: missing column {value_col}", lineno + 1)))?;
        let v: f64 = field
            .parse()
            .map_err(|e| Error::Parse(format!("{csv:?}:{}: {e}", lineno + 1)))?;
        values.push(v);
    }
    Ok(values)
}

/// Write a stored torus flow as `trajectory/<k>.csv` (+ sidecars) and
/// `times.csv` under `dir`.
pub fn write_torus_trajectory(dir: &Path, flow: &FlowTrajectory) -> Result<()> {
    let traj = dir.join("trajectory");
    fs::create_dir_all(&traj)?;
    let mut times = String::from("k,t\n");
    for (k, m) in flow.metrics().iter().enumerate() {
        write_conformal_metric(&traj.join(format!("{k}.csv")), m)?;
        times.push_str(&format!("{},{}\n", k, fmt_f64(flow.times()[k])));
    }
    fs::write(dir.join("times.csv"), times)?;
    Ok(())
}

pub fn write_sphere_trajectory(dir: &Path, flow: &SphereFlow) -> Result<()> {
    let traj = dir.join("trajectory");
    fs::create_dir_all(&traj)?;
    let mut times = String::from("k,t\n");
    for k in 0..flow.len() {
        write_sphere_metric(&traj.join(format!("{k}.csv")), &flow.metric_at(k)?)?;
        times.push_str(&format!("{},{}\n", k, fmt_f64(flow.times()[k])));
    }
    fs::write(dir.join("times.csv"), times)?;
    Ok(())
}

fn read_times(dir: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(dir.join("times.csv"))?;
    let mut times = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.is_empty() {
            continue;
        }
        let t = line
            .split(',')
            .nth(1)
            .ok_or_else(|| Error::Parse(format!("times.csv:{}: missing t column", lineno + 1)))?;
        times.push(t.parse().map_err(|e| Error::Parse(format!("times.csv: {e}")))?);
    }
    Ok(times)
}

/// Either kind of stored stride-1 trajectory.
pub enum StoredTrajectory {
    Torus(FlowTrajectory),
    Sphere(SphereFlow),
}

pub fn read_trajectory(dir: &Path) -> Result<StoredTrajectory> {
    let times = read_times(dir)?;
    if times.len() < 2 {
        return Err(Error::Parse(format!("{dir:?}: trajectory needs at least two steps")));
    }
    let traj = dir.join("trajectory");
    match read_metric(&traj.join("0.csv"))? {
        StoredMetric::Conformal(first) => {
            let mut metrics = vec![first];
            for k in 1..times.len() {
                match read_metric(&traj.join(format!("{k}.csv")))? {
                    StoredMetric::Conformal(m) => metrics.push(m),
                    StoredMetric::Sphere(_) => {
                        return Err(Error::Parse(format!("{dir:?}: mixed metric kinds")))
                    }
                }
            }
            Ok(StoredTrajectory::Torus(FlowTrajectory::from_parts(times, metrics)?))
        }
        StoredMetric::Sphere(first) => {
            let mut radii = vec![first.radius()];
            for k in 1..times.len() {
                match read_metric(&traj.join(format!("{k}.csv")))? {
                    StoredMetric::Sphere(m) => radii.push(m.radius()),
                    StoredMetric::Conformal(_) => {
                        return Err(Error::Parse(format!("{dir:?}: mixed metric kinds")))
                    }
                }
            }
            Ok(StoredTrajectory::Sphere(SphereFlow::from_parts(times, radii)?))
        }
    }
}

/// Write the functional series with its residual report:
/// `t,F,N,mass,RHS13,dNdt,dFdt,res_N,res_F` (NaN at the excluded ends).
pub fn write_functionals_csv(path: &Path, series: &FunctionalSeries, report: &Eq13Report) -> Result<()> {
    let mut out = String::from("t,F,N,mass,RHS13,dNdt,dFdt,res_N,res_F\n");
    for i in 0..series.times().len() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(series.times()[i]),
            fmt_f64(series.f_values()[i]),
            fmt_f64(series.n_values()[i]),
            fmt_f64(series.mass_values()[i]),
            fmt_f64(series.rhs13_values()[i]),
            fmt_f64(report.dndt[i]),
            fmt_f64(report.dfdt[i]),
            fmt_f64(report.res_n_series[i]),
            fmt_f64(report.res_f_series[i]),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_1d_is_lossless() {
        let dir = std::env::temp_dir().join("rfl_io_test_1d");
        fs::create_dir_all(&dir).unwrap();
        let g = Grid1D::new(16, 1.0).unwrap();
        let f = ScalarField1D::from_fn(g, |x| (x * 12.3456789).sin() / 3.0 + 1e-17);
        let path = dir.join("f.csv");
        write_field_1d(&path, &f, "f").unwrap();
        let (back, name) = read_field_1d(&path).unwrap();
        assert_eq!(name, "f");
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn trajectory_roundtrip_is_lossless() {
        use crate::geometry::ConformalMetric;
        use crate::ricciflow::{run_ricci_flow_torus, FlowConfig};
        let dir = std::env::temp_dir().join("rfl_io_test_traj");
        fs::create_dir_all(&dir).unwrap();
        let grid = Grid2D::square(8, 1.0).unwrap();
        let m0 = ConformalMetric::new(ScalarField2D::from_fn(grid, |x, y| {
            0.05 * (2.0 * std::f64::consts::PI * (x + y)).sin()
        }));
        let cfg = FlowConfig::new(1e-5, 5e-5, 1.0).unwrap();
        let flow = run_ricci_flow_torus(&m0, &cfg).unwrap();
        write_torus_trajectory(&dir, &flow).unwrap();
        match read_trajectory(&dir).unwrap() {
            StoredTrajectory::Torus(back) => {
                assert_eq!(back.len(), flow.len());
                for (a, b) in back.metrics().iter().zip(flow.metrics()) {
                    for (x, y) in a.u().values().iter().zip(b.u().values()) {
                        assert_eq!(x.to_bits(), y.to_bits());
                    }
                }
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn roundtrip_2d_is_lossless() {
        let dir = std::env::temp_dir().join("rfl_io_test_2d");
        fs::create_dir_all(&dir).unwrap();
        let g = Grid2D::new(8, 12, 1.0, 2.0).unwrap();
        let f = ScalarField2D::from_fn(g, |x, y| (x * 3.7 - y).cos() * 0.123456789012345678);
        let path = dir.join("f2.csv");
        write_field_2d(&path, &f, "phi").unwrap();
        let (back, name) = read_field_2d(&path).unwrap();
        assert_eq!(name, "phi");
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
