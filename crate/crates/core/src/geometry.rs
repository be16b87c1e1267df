//! Riemannian structure on the two model manifolds: the 2-D conformal torus
//! g = e^{2u}(dx² + dy²) and the round 2-sphere of radius r (handled in the
//! homogeneous sector, where its flow reduces to an ODE and no spherical grid
//! is needed).

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D, VectorField2D};

/// Conformal metric on the torus, stored through its exponent field u.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetric {
    u: ScalarField2D,
}

impl ConformalMetric {
    pub fn new(u: ScalarField2D) -> Self {
        Self { u }
    }

    pub fn flat(grid: Grid2D) -> Self {
        Self { u: ScalarField2D::constant(grid, 0.0) }
    }

    pub fn grid(&self) -> Grid2D {
        self.u.grid()
    }

    pub fn u(&self) -> &ScalarField2D {
        &self.u
    }

    /// Volume element √g = e^{2u}.
    pub fn sqrt_g(&self) -> ScalarField2D {
        self.u.map(|u| (2.0 * u).exp())
    }

    /// Total Riemannian area ∫ √g dA.
    pub fn volume(&self) -> f64 {
        self.sqrt_g().integrate_unweighted()
    }

    /// Scalar curvature R = −2 e^{−2u} Δ₀u.
    pub fn scalar_curvature(&self) -> ScalarField2D {
        let lap = self.u.laplace0();
        lap.zip_map(&self.u, |l, u| -2.0 * (-2.0 * u).exp() * l).expect("same grid")
    }

    /// Ricci tensor of a conformal surface metric: Ric = (R/2) g, i.e.
    /// components −(Δ₀u) δ_ij in the flat chart.
    pub fn ricci_tensor(&self) -> SymTensorField {
        let lap = self.u.laplace0();
        let xx = lap.map(|l| -l);
        SymTensorField {
            xx: xx.clone(),
            xy: ScalarField2D::constant(self.grid(), 0.0),
            yy: xx,
        }
    }

    /// Laplace–Beltrami Δ_g φ = e^{−2u} Δ₀φ.
    pub fn laplace_beltrami(&self, phi: &ScalarField2D) -> Result<ScalarField2D> {
        phi.check_same_grid(&self.u)?;
        let lap = phi.laplace0();
        lap.zip_map(&self.u, |l, u| (-2.0 * u).exp() * l)
    }

    /// Metric squared gradient |∇φ|²_g = e^{−2u}(φ_x² + φ_y²), centered stencil.
    pub fn grad_norm_sq(&self, phi: &ScalarField2D) -> Result<ScalarField2D> {
        phi.check_same_grid(&self.u)?;
        let g = phi.grad0();
        let flat = g.norm_sq_flat();
        flat.zip_map(&self.u, |s, u| (-2.0 * u).exp() * s)
    }

    /// Covariant Hessian of a scalar: (Hess f)_ij = ∂i∂j f − Γ^k_ij ∂k f with
    /// the conformal Christoffel symbols built from ∇₀u. The diagonal second
    /// derivatives use the same 3-point stencils as `laplace0`, so the trace
    /// identity g^{ij}(Hess f)_ij = Δ_g f holds to round-off.
    pub fn hessian(&self, f: &ScalarField2D) -> Result<SymTensorField> {
        f.check_same_grid(&self.u)?;
        let grid = self.grid();
        let (nx, ny) = (grid.nx(), grid.ny());
        let (hx, hy) = (grid.hx(), grid.hy());
        let v = f.values();
        let mut fxx = vec![0.0; v.len()];
        let mut fyy = vec![0.0; v.len()];
        let mut fxy = vec![0.0; v.len()];
        let inv_hx2 = 1.0 / (hx * hx);
        let inv_hy2 = 1.0 / (hy * hy);
        let inv_4hxy = 1.0 / (4.0 * hx * hy);
        for j in 0..ny {
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            let jm = if j == 0 { ny - 1 } else { j - 1 };
            for i in 0..nx {
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let im = if i == 0 { nx - 1 } else { i - 1 };
                let k = j * nx + i;
                fxx[k] = (v[j * nx + ip] - 2.0 * v[k] + v[j * nx + im]) * inv_hx2;
                fyy[k] = (v[jp * nx + i] - 2.0 * v[k] + v[jm * nx + i]) * inv_hy2;
                fxy[k] = (v[jp * nx + ip] - v[jp * nx + im] - v[jm * nx + ip] + v[jm * nx + im])
                    * inv_4hxy;
            }
        }
        let gf = f.grad0();
        let gu = self.u.grad0();
        let (fx, fy) = (gf.x.values(), gf.y.values());
        let (ux, uy) = (gu.x.values(), gu.y.values());
        // Γ^x_xx = u_x, Γ^y_xx = −u_y; Γ^x_xy = u_y, Γ^y_xy = u_x;
        // Γ^x_yy = −u_x, Γ^y_yy = u_y
        let mut hxx = vec![0.0; v.len()];
        let mut hxy = vec![0.0; v.len()];
        let mut hyy = vec![0.0; v.len()];
        for k in 0..v.len() {
            let cross = ux[k] * fx[k] - uy[k] * fy[k];
            hxx[k] = fxx[k] - cross;
            hyy[k] = fyy[k] + cross;
            hxy[k] = fxy[k] - (uy[k] * fx[k] + ux[k] * fy[k]);
        }
        Ok(SymTensorField {
            xx: ScalarField2D::from_values(grid, hxx)?,
            xy: ScalarField2D::from_values(grid, hxy)?,
            yy: ScalarField2D::from_values(grid, hyy)?,
        })
    }

    /// Pointwise squared tensor norm |T|²_g = g^{ik}g^{jl}T_ij T_kl
    /// = e^{−4u}(T_xx² + 2T_xy² + T_yy²).
    pub fn tensor_norm_sq(&self, t: &SymTensorField) -> Result<ScalarField2D> {
        t.xx.check_same_grid(&self.u)?;
        let u = self.u.values();
        let (xx, xy, yy) = (t.xx.values(), t.xy.values(), t.yy.values());
        let mut out = vec![0.0; u.len()];
        for k in 0..u.len() {
            out[k] = (-4.0 * u[k]).exp() * (xx[k] * xx[k] + 2.0 * xy[k] * xy[k] + yy[k] * yy[k]);
        }
        ScalarField2D::from_values(self.grid(), out)
    }

    /// Trace g^{ij} T_ij = e^{−2u}(T_xx + T_yy).
    pub fn trace(&self, t: &SymTensorField) -> Result<ScalarField2D> {
        t.xx.check_same_grid(&self.u)?;
        let sum = t.xx.zip_map(&t.yy, |a, b| a + b)?;
        sum.zip_map(&self.u, |s, u| (-2.0 * u).exp() * s)
    }

    /// Metric squared norm of a flat-chart covector field:
    /// |ω|²_g = g^{ij} ω_i ω_j = e^{−2u}(ω_x² + ω_y²).
    pub fn covector_norm_sq(&self, w: &VectorField2D) -> Result<ScalarField2D> {
        let flat = w.norm_sq_flat();
        flat.zip_map(&self.u, |s, u| (-2.0 * u).exp() * s)
    }
}

/// Symmetric 2-tensor on the torus chart; xy stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    pub xx: ScalarField2D,
    pub xy: ScalarField2D,
    pub yy: ScalarField2D,
}

impl SymTensorField {
    pub fn zero(grid: Grid2D) -> Self {
        Self {
            xx: ScalarField2D::constant(grid, 0.0),
            xy: ScalarField2D::constant(grid, 0.0),
            yy: ScalarField2D::constant(grid, 0.0),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.xx.grid()
    }

    /// Componentwise a + b.
    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            xx: self.xx.zip_map(&other.xx, |a, b| a + b)?,
            xy: self.xy.zip_map(&other.xy, |a, b| a + b)?,
            yy: self.yy.zip_map(&other.yy, |a, b| a + b)?,
        })
    }
}

/// Round 2-sphere of radius r, homogeneous sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMetric {
    radius: f64,
}

/// Closed-form curvature data of the round sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuantities {
    /// Scalar curvature R = 2/r².
    pub scalar_curvature: f64,
    /// Ric = ricci_coeff · g with ricci_coeff = 1/r².
    pub ricci_coeff: f64,
    /// Area 4πr².
    pub volume: f64,
}

impl SphereMetric {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::NonPositiveRadius(radius));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn quantities(&self) -> SphereQuantities {
        let r2 = self.radius * self.radius;
        SphereQuantities {
            scalar_curvature: 2.0 / r2,
            ricci_coeff: 1.0 / r2,
            volume: 4.0 * std::f64::consts::PI * r2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bumpy(n: usize) -> ConformalMetric {
        let grid = Grid2D::square(n, 1.0).unwrap();
        let u = ScalarField2D::from_fn(grid, |x, y| {
            0.1 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos()
        });
        ConformalMetric::new(u)
    }

    #[test]
    fn flat_torus_is_flat() {
        let m = ConformalMetric::flat(Grid2D::square(16, 1.0).unwrap());
        assert_eq!(m.scalar_curvature().max_abs(), 0.0);
        assert_eq!(m.ricci_tensor().xx.max_abs(), 0.0);
        // constant u stays flat too
        let mc = ConformalMetric::new(ScalarField2D::constant(m.grid(), 0.8));
        assert_eq!(mc.scalar_curvature().max_abs(), 0.0);
    }

    /// Oracle: R = −2e^{−2u}Δu with the analytic Δu of the bump, order ≥ 1.9.
    #[test]
    fn scalar_curvature_matches_analytic_oracle() {
        let err = |n: usize| {
            let grid = Grid2D::square(n, 1.0).unwrap();
            let k = 2.0 * PI;
            let u = ScalarField2D::from_fn(grid, |x, y| 0.1 * (k * x).sin() * (k * y).cos());
            let m = ConformalMetric::new(u.clone());
            let r = m.scalar_curvature();
            let mut worst = 0.0f64;
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (grid.x(i), grid.y(j));
                    let uv = 0.1 * (k * x).sin() * (k * y).cos();
                    let lap_u = -2.0 * k * k * uv;
                    let exact = -2.0 * (-2.0 * uv).exp() * lap_u;
                    worst = worst.max((r.at(i, j) - exact).abs());
                }
            }
            worst
        };
        let (e64, e128) = (err(64), err(128));
        assert!((e64 / e128).log2() >= 1.9, "order {}", (e64 / e128).log2());
    }

    /// Algebraic: g^{ij}Ric_ij = R pointwise.
    #[test]
    fn ricci_trace_is_scalar_curvature() {
        let m = bumpy(32);
        let r = m.scalar_curvature();
        let tr = m.trace(&m.ricci_tensor()).unwrap();
        let scale = r.max_abs().max(1.0);
        for (a, b) in tr.values().iter().zip(r.values()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn laplace_beltrami_divergence_theorem() {
        let m = bumpy(48);
        let phi = ScalarField2D::from_fn(m.grid(), |x, _| (2.0 * PI * x).sin());
        let lap = m.laplace_beltrami(&phi).unwrap();
        let total = lap.integrate(&m.sqrt_g()).unwrap().abs();
        let scale = lap.map(f64::abs).integrate(&m.sqrt_g()).unwrap();
        assert!(total <= 1e-12 * scale, "total {total}");
    }

    #[test]
    fn grad_norm_sq_flat_oracle_and_scaling() {
        let grid = Grid2D::square(64, 1.0).unwrap();
        let k = 2.0 * PI;
        let phi = ScalarField2D::from_fn(grid, |x, _| (k * x).sin());
        let flat = ConformalMetric::flat(grid);
        let gn = flat.grad_norm_sq(&phi).unwrap();
        let h = grid.hx();
        // centered stencil of a pure mode scales cos by sin(kh)/(kh)
        let damp = (k * h).sin() / (k * h);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let exact = (k * damp * (k * grid.x(i)).cos()).powi(2);
                assert!((gn.at(i, j) - exact).abs() < 1e-10);
            }
        }
        // conformal scaling law: u ≡ c divides |∇φ|² by e^{2c}
        let c = 0.37;
        let shifted = ConformalMetric::new(ScalarField2D::constant(grid, c));
        let gn_c = shifted.grad_norm_sq(&phi).unwrap();
        for (a, b) in gn_c.values().iter().zip(gn.values()) {
            assert!((a - b * (-2.0 * c).exp()).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn hessian_constant_is_zero_and_flat_oracle() {
        let m = bumpy(32);
        let c = ScalarField2D::constant(m.grid(), 2.0);
        let h = m.hessian(&c).unwrap();
        assert_eq!(h.xx.max_abs(), 0.0);
        assert_eq!(h.xy.max_abs(), 0.0);

        let grid = Grid2D::square(64, 1.0).unwrap();
        let k = 2.0 * PI;
        let f = ScalarField2D::from_fn(grid, |x, _| (k * x).sin());
        let flat = ConformalMetric::flat(grid);
        let hf = flat.hessian(&f).unwrap();
        let hstep = grid.hx();
        let c2 = 2.0 * (1.0 - (k * hstep).cos()) / (hstep * hstep); // discrete k² of the 3-pt stencil
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let exact = -c2 * (k * grid.x(i)).sin();
                assert!((hf.xx.at(i, j) - exact).abs() < 1e-9);
                assert!(hf.xy.at(i, j).abs() < 1e-9);
                assert!(hf.yy.at(i, j).abs() < 1e-9);
            }
        }
    }

    /// Self-consistency oracle: g^{ij}(Hess f)_ij = Δ_g f.
    #[test]
    fn hessian_trace_identity() {
        let m = bumpy(64);
        let f = ScalarField2D::from_fn(m.grid(), |x, y| {
            (2.0 * PI * x).sin() + 0.5 * (2.0 * PI * y).cos()
        });
        let tr = m.trace(&m.hessian(&f).unwrap()).unwrap();
        let lap = m.laplace_beltrami(&f).unwrap();
        let scale = lap.max_abs();
        for (a, b) in tr.values().iter().zip(lap.values()) {
            assert!((a - b).abs() <= 1e-8 * scale, "trace {a} vs lap {b}");
        }
    }

    #[test]
    fn tensor_norm_examples() {
        let grid = Grid2D::square(16, 1.0).unwrap();
        let flat = ConformalMetric::flat(grid);
        let zero = SymTensorField::zero(grid);
        assert_eq!(flat.tensor_norm_sq(&zero).unwrap().max_abs(), 0.0);

        let mut t = SymTensorField::zero(grid);
        t.xx = ScalarField2D::constant(grid, 1.0);
        let n = flat.tensor_norm_sq(&t).unwrap();
        for &v in n.values() {
            assert_eq!(v, 1.0);
        }
    }

    /// Hand algebra: |Ric|² on the round sphere is 2/r⁴ (g^{ij}g_ij = 2 in 2-D).
    #[test]
    fn sphere_quantities_closed_forms() {
        let s1 = SphereMetric::new(1.0).unwrap().quantities();
        assert!((s1.scalar_curvature - 2.0).abs() < 1e-15);
        assert!((s1.ricci_coeff - 1.0).abs() < 1e-15);
        assert!((s1.volume - 4.0 * PI).abs() < 1e-12);

        let s2 = SphereMetric::new(2.0).unwrap().quantities();
        assert!((s2.scalar_curvature - 0.5).abs() < 1e-15);
        assert!((s2.ricci_coeff - 0.25).abs() < 1e-15);
        assert!((s2.volume - 16.0 * PI).abs() < 1e-12);

        // R scales as 1/λ² under r → λr
        let lam = 3.0f64;
        let s3 = SphereMetric::new(lam).unwrap().quantities();
        assert!((s3.scalar_curvature - s1.scalar_curvature / (lam * lam)).abs() < 1e-15);

        // |Ric|² = ricci_coeff² · |g|² = 2/r⁴
        let r = 2.0f64;
        let q = SphereMetric::new(r).unwrap().quantities();
        let ric_norm_sq = q.ricci_coeff * q.ricci_coeff * 2.0;
        assert!((ric_norm_sq - 2.0 / r.powi(4)).abs() < 1e-15);
    }

    #[test]
    fn sphere_rejects_nonpositive_radius() {
        assert!(matches!(SphereMetric::new(0.0), Err(Error::NonPositiveRadius(_))));
        assert!(matches!(SphereMetric::new(-1.0), Err(Error::NonPositiveRadius(_))));
    }

    /// Gauss–Bonnet on the torus: ∫ R dV = 0 for any smooth u.
    #[test]
    fn gauss_bonnet_total_curvature_vanishes() {
        let m = bumpy(64);
        let total = m.scalar_curvature().integrate(&m.sqrt_g()).unwrap();
        assert!(total.abs() <= 1e-8, "total curvature {total}");
        // and is unchanged by u → u + c
        let shifted = ConformalMetric::new(m.u().map(|u| u + 0.3));
        let total_c = shifted.scalar_curvature().integrate(&shifted.sqrt_g()).unwrap();
        assert!(total_c.abs() <= 1e-8);
    }
}
