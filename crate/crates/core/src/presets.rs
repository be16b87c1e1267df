//! Compiled-in named initial data shared by the CLI, the verification
//! presets and the test suites. Every preset is deterministic; the random
//! densities are seeded band-limited fields.

use crate::error::{Error, Result};
use crate::geometry::ConformalMetric;
use crate::grid::{Grid2D, ScalarField2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Named conformal-factor presets for the torus flow.
pub fn torus_u0(name: &str, grid: Grid2D) -> Result<ScalarField2D> {
    let (lx, ly) = (grid.lx(), grid.ly());
    match name {
        "flat" => Ok(ScalarField2D::constant(grid, 0.0)),
        "bump1" => Ok(ScalarField2D::from_fn(grid, |x, y| {
            0.1 * (2.0 * PI * x / lx).sin() * (2.0 * PI * y / ly).cos()
        })),
        "bump2" => Ok(ScalarField2D::from_fn(grid, |x, y| {
            0.08 * (2.0 * PI * x / lx).sin() * (2.0 * PI * y / ly).cos()
                + 0.04 * (4.0 * PI * x / lx).cos() * (2.0 * PI * y / ly).sin()
        })),
        other => Err(Error::ConfigInvalid {
            key: "u0_expr".into(),
            reason: format!("unknown preset `{other}` (expected flat|bump1|bump2)"),
        }),
    }
}

/// Default terminal potential for the torus: the negative log of a von
/// Mises–like bump density, normalized so ∫ e^{−f} dV = 1 under the metric.
pub fn von_mises_f_end(m: &ConformalMetric, kappa: f64) -> Result<ScalarField2D> {
    let grid = m.grid();
    let (lx, ly) = (grid.lx(), grid.ly());
    let raw = ScalarField2D::from_fn(grid, |x, y| {
        (kappa * (2.0 * PI * (x - 0.5 * lx) / lx).cos() + kappa * (2.0 * PI * (y - 0.5 * ly) / ly).cos())
            .exp()
    });
    let z = raw.integrate(&m.sqrt_g())?;
    Ok(raw.map(|p| -(p / z).ln()))
}

/// Constant potential with unit mass: f = ln(vol(g)).
pub fn uniform_f_end(m: &ConformalMetric) -> ScalarField2D {
    ScalarField2D::constant(m.grid(), m.volume().ln())
}

/// Named density presets for the Weyl module (positive, not yet normalized;
/// normalization against the metric happens in `WeylDensity::new`).
pub fn weyl_density(name: &str, seed: u64, grid: Grid2D) -> Result<ScalarField2D> {
    let (lx, ly) = (grid.lx(), grid.ly());
    match name {
        "uniform" => Ok(ScalarField2D::constant(grid, 1.0)),
        "bump1" => Ok(ScalarField2D::from_fn(grid, |x, _| 1.0 + 0.3 * (2.0 * PI * x / lx).cos())),
        "bump2" => Ok(ScalarField2D::from_fn(grid, |x, y| {
            1.0 + 0.22 * (2.0 * PI * x / lx).cos() * (2.0 * PI * y / ly).cos()
                + 0.13 * (4.0 * PI * y / ly).cos()
        })),
        "random-smooth" => Ok(random_smooth_density(grid, seed)),
        other => Err(Error::ConfigInvalid {
            key: "density".into(),
            reason: format!("unknown preset `{other}` (expected uniform|bump1|bump2|random-smooth)"),
        }),
    }
}

/// Random band-limited positive density: ρ ∝ exp(t) with t a trigonometric
/// polynomial of modes |k| ≤ 4, coefficients damped by 1/(1+|k|²).
pub fn random_smooth_density(grid: Grid2D, seed: u64) -> ScalarField2D {
    let t = random_band_limited(grid, seed, 4, 0.35);
    t.map(f64::exp)
}

/// Random band-limited conformal exponent for curved-background sweeps.
pub fn random_conformal_factor(grid: Grid2D, seed: u64) -> ScalarField2D {
    random_band_limited(grid, seed, 3, 0.12)
}

fn random_band_limited(grid: Grid2D, seed: u64, max_mode: i64, amplitude: f64) -> ScalarField2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lx, ly) = (grid.lx(), grid.ly());
    let mut terms: Vec<(f64, f64, f64, f64)> = Vec::new(); // (kx, ky, a_cos, a_sin)
    for kx in -max_mode..=max_mode {
        for ky in -max_mode..=max_mode {
            if kx == 0 && ky == 0 {
                continue;
            }
            // one representative per ± pair
            if ky < 0 || (ky == 0 && kx < 0) {
                continue;
            }
            let damp = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            terms.push((
                2.0 * PI * kx as f64 / lx,
                2.0 * PI * ky as f64 / ly,
                a * damp * amplitude,
                b * damp * amplitude,
            ));
        }
    }
    ScalarField2D::from_fn(grid, |x, y| {
        let mut s = 0.0;
        for &(kx, ky, ac, asn) in &terms {
            let phase = kx * x + ky * y;
            s += ac * phase.cos() + asn * phase.sin();
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_end_has_unit_mass() {
        let grid = Grid2D::square(32, 1.0).unwrap();
        let m = ConformalMetric::new(ScalarField2D::from_fn(grid, |x, y| {
            0.1 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos()
        }));
        let f = von_mises_f_end(&m, 0.8).unwrap();
        let mass = crate::entropy::mass(&m, &f).unwrap();
        assert!((mass - 1.0).abs() < 1e-12);
        let fu = uniform_f_end(&m);
        assert!((crate::entropy::mass(&m, &fu).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_density_is_positive_and_seed_stable() {
        let grid = Grid2D::square(16, 2.0 * PI).unwrap();
        let a = random_smooth_density(grid, 7);
        let b = random_smooth_density(grid, 7);
        let c = random_smooth_density(grid, 8);
        assert!(a.min() > 0.0);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn unknown_presets_are_config_errors() {
        let grid = Grid2D::square(16, 1.0).unwrap();
        assert!(torus_u0("wiggle", grid).is_err());
        assert!(weyl_density("spikes", 0, grid).is_err());
    }
}
