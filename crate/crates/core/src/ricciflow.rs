//! Time integration of the Ricci flow ∂ₜg = −2 Ric on the model geometries.
//!
//! On the conformal torus the flow reduces to the scalar equation
//! ∂ₜu = e^{−2u} Δ₀u; on the round sphere (homogeneous sector) it reduces to
//! the ODE d(r²)/dt = −2 with the closed form r²(t) = r0² − 2t. Stepping is
//! explicit RK4 behind a CFL guard that refuses (never clamps) unstable steps.

use crate::error::{Error, Result};
use crate::geometry::{ConformalMetric, SphereMetric};
use crate::grid::{laplace0_into, Grid2D, ScalarField2D};

/// Parameters of a flow run.
#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Dimensionless safety factor in (0, 1].
    pub cfl_limit: f64,
}

impl FlowConfig {
    pub fn new(dt: f64, t_end: f64, cfl_limit: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::ConfigInvalid { key: "dt".into(), reason: format!("must be > 0, got {dt}") });
        }
        if !(t_end > 0.0) {
            return Err(Error::ConfigInvalid { key: "t_end".into(), reason: format!("must be > 0, got {t_end}") });
        }
        if !(cfl_limit > 0.0 && cfl_limit <= 1.0) {
            return Err(Error::ConfigInvalid {
                key: "cfl_limit".into(),
                reason: format!("must lie in (0, 1], got {cfl_limit}"),
            });
        }
        Ok(Self { dt, t_end, cfl_limit })
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Largest stable dt at unit safety factor: min(hx,hy)² · min(e^{2u}) / 4.
/// The diffusivity of ∂ₜu = e^{−2u}Δ₀u is e^{−2u}, so the bound is set by the
/// smallest conformal factor on the grid.
pub fn cfl_max_dt(m: &ConformalMetric) -> f64 {
    let grid = m.grid();
    let h = grid.hx().min(grid.hy());
    let min_e2u = (2.0 * m.u().min()).exp();
    h * h * min_e2u / 4.0
}

/// du/dt = e^{-2u} lap0(u), writing into `out`; `scratch` holds lap0(u).
fn torus_rhs(grid: Grid2D, u: &[f64], scratch: &mut [f64], out: &mut [f64]) {
    laplace0_into(grid, u, scratch);
    for k in 0..u.len() {
        out[k] = (-2.0 * u[k]).exp() * scratch[k];
    }
}

/// One explicit RK4 step of ∂ₜu = e^{−2u}Δ₀u. The flat metric (and any
/// constant u) is an exact fixed point. `t` only labels the step in errors.
pub fn ricci_step_torus(m: &ConformalMetric, t: f64, dt: f64, cfl_limit: f64) -> Result<ConformalMetric> {
    let limit = cfl_limit * cfl_max_dt(m);
    if dt > limit {
        return Err(Error::CflViolation { time: t, dt, limit });
    }
    let grid = m.grid();
    let n = grid.len();
    let u0 = m.u().values();
    let mut scratch = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    torus_rhs(grid, u0, &mut scratch, &mut k1);
    for k in 0..n {
        stage[k] = u0[k] + 0.5 * dt * k1[k];
    }
    torus_rhs(grid, &stage, &mut scratch, &mut k2);
    for k in 0..n {
        stage[k] = u0[k] + 0.5 * dt * k2[k];
    }
    torus_rhs(grid, &stage, &mut scratch, &mut k3);
    for k in 0..n {
        stage[k] = u0[k] + dt * k3[k];
    }
    torus_rhs(grid, &stage, &mut scratch, &mut k4);

    let mut u1 = vec![0.0; n];
    for k in 0..n {
        u1[k] = u0[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    Ok(ConformalMetric::new(ScalarField2D::from_values(grid, u1)?))
}

/// Stored torus flow: metric at every step (stride 1), fixed dt.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    times: Vec<f64>,
    metrics: Vec<ConformalMetric>,
}

impl FlowTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn metrics(&self) -> &[ConformalMetric] {
        &self.metrics
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_metric(&self) -> &ConformalMetric {
        self.metrics.last().expect("trajectory is nonempty")
    }

    pub fn from_parts(times: Vec<f64>, metrics: Vec<ConformalMetric>) -> Result<Self> {
        if times.len() != metrics.len() || times.len() < 2 {
            return Err(Error::Parse("trajectory needs aligned times and metrics".into()));
        }
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-12 * dt.abs().max(1.0) {
                return Err(Error::Parse("trajectory time step is not uniform".into()));
            }
        }
        Ok(Self { times, metrics })
    }
}

/// Integrate the torus flow, storing every step. The CFL bound is re-checked
/// each step because the conformal factor evolves.
pub fn run_ricci_flow_torus(m0: &ConformalMetric, cfg: &FlowConfig) -> Result<FlowTrajectory> {
    let steps = cfg.steps();
    let mut metrics = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    metrics.push(m0.clone());
    times.push(0.0);
    let mut m = m0.clone();
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        m = ricci_step_torus(&m, t, cfg.dt, cfg.cfl_limit)?;
        times.push((k + 1) as f64 * cfg.dt);
        metrics.push(m.clone());
    }
    FlowTrajectory::from_parts(times, metrics)
}

/// Sphere extinction time r0²/2.
pub fn sphere_extinction_time(r0: f64) -> f64 {
    r0 * r0 / 2.0
}

/// Closed-form shrinking sphere radius r(t) = √(r0² − 2t).
pub fn ricci_flow_sphere(r0: f64, t: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::NonPositiveRadius(r0));
    }
    let s = r0 * r0 - 2.0 * t;
    if s <= 0.0 {
        return Err(Error::ExtinctionReached(t));
    }
    Ok(s.sqrt())
}

/// Stored sphere flow (homogeneous sector): radius per step.
#[derive(Debug, Clone)]
pub struct SphereFlow {
    times: Vec<f64>,
    radii: Vec<f64>,
}

impl SphereFlow {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn metric_at(&self, k: usize) -> Result<SphereMetric> {
        SphereMetric::new(self.radii[k])
    }

    pub fn from_parts(times: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if times.len() != radii.len() || times.len() < 2 {
            return Err(Error::Parse("sphere flow needs aligned times and radii".into()));
        }
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-12 * dt.abs().max(1.0) {
                return Err(Error::Parse("sphere flow time step is not uniform".into()));
            }
        }
        if let Some(&bad) = radii.iter().find(|&&r| !(r > 0.0)) {
            return Err(Error::NonPositiveRadius(bad));
        }
        Ok(Self { times, radii })
    }
}

/// Integrate d(r²)/dt = −2 with the same RK4 stepper used elsewhere (the
/// right-hand side is constant, so this reproduces the closed form to
/// round-off; it exercises the integrator plumbing rather than the algebra).
pub fn run_ricci_flow_sphere(r0: f64, cfg: &FlowConfig) -> Result<SphereFlow> {
    if !(r0 > 0.0) {
        return Err(Error::NonPositiveRadius(r0));
    }
    if cfg.t_end >= sphere_extinction_time(r0) {
        return Err(Error::ExtinctionReached(cfg.t_end));
    }
    let steps = cfg.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut radii = Vec::with_capacity(steps + 1);
    let mut s = r0 * r0;
    times.push(0.0);
    radii.push(r0);
    for k in 0..steps {
        // RK4 on s' = −2: all four stages are −2
        s += cfg.dt / 6.0 * (-2.0 - 4.0 - 4.0 - 2.0);
        if s <= 0.0 {
            return Err(Error::ExtinctionReached((k + 1) as f64 * cfg.dt));
        }
        times.push((k + 1) as f64 * cfg.dt);
        radii.push(s.sqrt());
    }
    Ok(SphereFlow { times, radii })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump_metric(n: usize, amp: f64) -> ConformalMetric {
        let grid = Grid2D::square(n, 1.0).unwrap();
        ConformalMetric::new(ScalarField2D::from_fn(grid, |x, _| amp * (2.0 * PI * x).sin()))
    }

    #[test]
    fn flat_and_constant_metrics_are_fixed_points() {
        let grid = Grid2D::square(16, 1.0).unwrap();
        let flat = ConformalMetric::flat(grid);
        let dt = 0.5 * cfl_max_dt(&flat);
        let next = ricci_step_torus(&flat, 0.0, dt, 1.0).unwrap();
        assert_eq!(next.u().max_abs(), 0.0);

        let c = ConformalMetric::new(ScalarField2D::constant(grid, 0.4));
        let next = ricci_step_torus(&c, 0.0, 0.5 * cfl_max_dt(&c), 1.0).unwrap();
        for &v in next.u().values() {
            assert_eq!(v, 0.4);
        }
    }

    #[test]
    fn cfl_violation_is_refused() {
        let m = bump_metric(16, 0.1);
        let dt = 1.1 * cfl_max_dt(&m);
        match ricci_step_torus(&m, 0.0, dt, 1.0) {
            Err(Error::CflViolation { .. }) => {}
            other => panic!("expected CflViolation, got {other:?}"),
        }
    }

    /// Decay plus Richardson self-convergence: halving dt must gain ≥ 3.5
    /// orders (RK4), measured against the dt/2 and dt/4 runs.
    #[test]
    fn torus_flow_decays_and_is_fourth_order_in_time() {
        let m0 = bump_metric(32, 0.1);
        let t_end = 0.002;
        let run = |dt: f64| {
            let cfg = FlowConfig::new(dt, t_end, 1.0).unwrap();
            run_ricci_flow_torus(&m0, &cfg).unwrap()
        };
        let base_dt = 0.8 * cfl_max_dt(&m0);
        let dt = t_end / (t_end / base_dt).ceil();
        let (c1, c2, c3) = (run(dt), run(dt / 2.0), run(dt / 4.0));

        // sup|u − mean(u)| is non-increasing along the trajectory
        let sup_dev = |m: &ConformalMetric| {
            let mean = m.u().mean();
            m.u().map(|v| v - mean).max_abs()
        };
        let mut prev = f64::INFINITY;
        for m in c1.metrics() {
            let s = sup_dev(m);
            assert!(s <= prev + 1e-13, "sup deviation grew: {s} after {prev}");
            prev = s;
        }

        let diff = |a: &ConformalMetric, b: &ConformalMetric| {
            a.u()
                .values()
                .iter()
                .zip(b.u().values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = diff(c1.last_metric(), c2.last_metric());
        let e2 = diff(c2.last_metric(), c3.last_metric());
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "temporal order {order} (e1 {e1}, e2 {e2})");
    }

    #[test]
    fn flat_run_stays_flat() {
        let grid = Grid2D::square(16, 1.0).unwrap();
        let flat = ConformalMetric::flat(grid);
        let dt = 0.5 * cfl_max_dt(&flat);
        let cfg = FlowConfig::new(dt, 100.0 * dt, 1.0).unwrap();
        let traj = run_ricci_flow_torus(&flat, &cfg).unwrap();
        for m in traj.metrics() {
            assert_eq!(m.u().max_abs(), 0.0);
        }
    }

    /// Hand-integrated closed form d(r²)/dt = −2.
    #[test]
    fn sphere_closed_form() {
        assert!((ricci_flow_sphere(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let r = ricci_flow_sphere(1.0, 0.25).unwrap();
        assert!((r - 0.7071067811865476).abs() < 1e-15);
        assert!(matches!(ricci_flow_sphere(2.0, 2.0), Err(Error::ExtinctionReached(_))));
        assert!(matches!(ricci_flow_sphere(2.0, 2.5), Err(Error::ExtinctionReached(_))));
        // radius shrinks to zero approaching extinction
        assert!(ricci_flow_sphere(2.0, 1.999999).unwrap() < 2e-3);
    }

    #[test]
    fn sphere_ode_run_matches_closed_form() {
        let cfg = FlowConfig::new(1e-4, 0.25, 1.0).unwrap();
        let flow = run_ricci_flow_sphere(1.0, &cfg).unwrap();
        let r_end = *flow.radii().last().unwrap();
        assert!((r_end - (0.5f64).sqrt()).abs() <= 1e-10, "r_end {r_end}");
        assert_eq!(flow.len(), 2501);
    }
}
