//! Orthogonal surface charts and the local geometry they induce.

use nalgebra::Vector3;

use super::domain::{Domain, P2};
use crate::error::{Error, Result};
use crate::expr::ExpressionAst;

pub type V3 = Vector3<f64>;

/// Relative tolerance for the orthogonality check `|x1·x2| < tol |x1||x2|`.
pub const TOL_ORTH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ConeForm {
    /// ω = (slant distance, azimuth). The apex is the edge ω1 = 0.
    Generator,
    /// Conformal chart ω ↦ developed point (ω1 + iω2)^k rolled onto the cone.
    /// The apex is the single parameter point ω = 0, where both metric
    /// coefficients vanish like k|ω|^(k-1).
    Conformal { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartFamily {
    /// x(ω) = (ω1, ω2, 0).
    Plane,
    /// x(θ, φ) = R (sinθ cosφ, sinθ sinφ, cosθ).
    Sphere { radius: f64 },
    /// x(t, φ) = (r(t) cosφ, r(t) sinφ, z(t)) with profile expressions in `t`.
    Revolution { r: ExpressionAst, z: ExpressionAst },
    Cone { half_angle: f64, form: ConeForm },
    /// Arbitrary map with components given as expressions in `w1`, `w2`.
    Expression {
        x: ExpressionAst,
        y: ExpressionAst,
        z: ExpressionAst,
    },
}

impl ChartFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ChartFamily::Plane => "plane",
            ChartFamily::Sphere { .. } => "sphere",
            ChartFamily::Revolution { .. } => "revolution",
            ChartFamily::Cone { .. } => "cone",
            ChartFamily::Expression { .. } => "expression",
        }
    }
}

/// The natural trihedron at a non-degenerate point.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x: V3,
    pub x1: V3,
    pub x2: V3,
    pub e1: V3,
    pub e2: V3,
    pub n: V3,
}

/// First-order metric data, the F vector and the second fundamental form.
#[derive(Debug, Clone, Copy)]
pub struct LocalGeometry {
    pub frame: Frame,
    /// |x¹|, |x²|.
    pub lengths: [f64; 2],
    /// ∂|x^i|/∂ω_j.
    pub length_grad: [[f64; 2]; 2],
    pub f: [f64; 2],
    /// L_ij = x^{ij}·N.
    pub l: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy)]
pub struct MetricData {
    pub lengths: [f64; 2],
    pub f: [f64; 2],
    pub l: [[f64; 2]; 2],
    /// Gaussian curvature from the F vector.
    pub k: f64,
}

/// A single orthogonal parametrization x: Ω → S.
#[derive(Debug, Clone)]
pub struct SurfaceChart {
    family: ChartFamily,
    domain: Domain,
    degenerate_points: Vec<P2>,
    h_fd: f64,
    metric_scale: f64,
}

fn fd5<T, F>(f: F, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    (f(-2.0 * h) - f(2.0 * h) + (f(h) - f(-h)) * 8.0) * (1.0 / (12.0 * h))
}

impl SurfaceChart {
    /// Builds a chart and validates orthogonality on a sample of Ω.
    pub fn new(family: ChartFamily, domain: Domain, degenerate_points: Vec<P2>) -> Result<Self> {
        domain.validate()?;
        let diam = domain.diameter();
        let mut chart = SurfaceChart {
            family,
            domain,
            degenerate_points,
            h_fd: 1e-5 * diam,
            metric_scale: 1.0,
        };
        let samples = chart.sample_points(12);
        let mut scale: f64 = 0.0;
        for &w in &samples {
            let [x1, x2] = chart.tangents(w);
            let (l1, l2) = (x1.norm(), x2.norm());
            if !(l1.is_finite() && l2.is_finite()) {
                return Err(Error::spec(
                    "chart",
                    format!("chart map is not finite at ({:.4}, {:.4})", w[0], w[1]),
                ));
            }
            scale = scale.max(l1).max(l2);
            if l1 * l2 > 0.0 {
                let ratio = x1.dot(&x2).abs() / (l1 * l2);
                if ratio > TOL_ORTH {
                    return Err(Error::NonOrthogonal {
                        w1: w[0],
                        w2: w[1],
                        ratio,
                    });
                }
            }
        }
        if scale <= 0.0 {
            return Err(Error::spec("chart", "chart is degenerate everywhere"));
        }
        chart.metric_scale = scale;
        Ok(chart)
    }

    /// Interior-ish sample points: an n×n grid over the bounding box clipped to Ω.
    pub fn sample_points(&self, n: usize) -> Vec<P2> {
        let (lo, hi) = self.domain.bbox();
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = [
                    lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n as f64,
                    lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n as f64,
                ];
                if self.domain.contains(p, 0.0) {
                    pts.push(p);
                }
            }
        }
        pts
    }

    pub fn family(&self) -> &ChartFamily {
        &self.family
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn degenerate_points(&self) -> &[P2] {
        &self.degenerate_points
    }

    pub fn h_fd(&self) -> f64 {
        self.h_fd
    }

    /// Largest metric coefficient seen on the domain sample.
    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    /// Degeneracy threshold for |x^i|.
    pub fn tol_deg(&self) -> f64 {
        1e-9 * self.metric_scale
    }

    fn domain_tol(&self) -> f64 {
        1e-9 * self.domain.diameter().max(1.0)
    }

    pub fn point(&self, w: P2) -> V3 {
        let [a, b] = w;
        match &self.family {
            ChartFamily::Plane => V3::new(a, b, 0.0),
            ChartFamily::Sphere { radius } => {
                V3::new(a.sin() * b.cos(), a.sin() * b.sin(), a.cos()) * *radius
            }
            ChartFamily::Revolution { r, z } => {
                let rr = r.eval_lossy(&[a]);
                V3::new(rr * b.cos(), rr * b.sin(), z.eval_lossy(&[a]))
            }
            ChartFamily::Cone { half_angle, form } => {
                let (sb, cb) = half_angle.sin_cos();
                match form {
                    ConeForm::Generator => V3::new(a * sb * b.cos(), a * sb * b.sin(), a * cb),
                    ConeForm::Conformal { exponent } => {
                        let r = a.hypot(b);
                        let s = r.powf(*exponent);
                        let az = exponent * b.atan2(a) / sb;
                        V3::new(s * sb * az.cos(), s * sb * az.sin(), s * cb)
                    }
                }
            }
            ChartFamily::Expression { x, y, z } => V3::new(
                x.eval_lossy(&w),
                y.eval_lossy(&w),
                z.eval_lossy(&w),
            ),
        }
    }

    fn profile_derivs(&self, e: &ExpressionAst, t: f64) -> (f64, f64, f64) {
        let h1 = self.h_fd;
        let h2 = 1e-3 * self.domain.diameter();
        let f = |s: f64| e.eval_lossy(&[t + s]);
        let d1 = fd5(f, h1);
        let d2 = (-f(2.0 * h2) + 16.0 * f(h2) - 30.0 * f(0.0) + 16.0 * f(-h2) - f(-2.0 * h2))
            / (12.0 * h2 * h2);
        (f(0.0), d1, d2)
    }

    /// Closed-form first derivatives, where the family provides them.
    fn tangents_analytic(&self, w: P2) -> Option<[V3; 2]> {
        let [a, b] = w;
        let (sb_, cb_) = b.sin_cos();
        Some(match &self.family {
            ChartFamily::Plane => [V3::x(), V3::y()],
            ChartFamily::Sphere { radius } => {
                let (sa, ca) = a.sin_cos();
                [
                    V3::new(ca * cb_, ca * sb_, -sa) * *radius,
                    V3::new(-sa * sb_, sa * cb_, 0.0) * *radius,
                ]
            }
            ChartFamily::Revolution { r, z } => {
                let (rr, dr, _) = self.profile_derivs(r, a);
                let (_, dz, _) = self.profile_derivs(z, a);
                [V3::new(dr * cb_, dr * sb_, dz), V3::new(-rr * sb_, rr * cb_, 0.0)]
            }
            ChartFamily::Cone {
                half_angle,
                form: ConeForm::Generator,
            } => {
                let (s, c) = half_angle.sin_cos();
                [V3::new(s * cb_, s * sb_, c), V3::new(-a * s * sb_, a * s * cb_, 0.0)]
            }
            _ => return None,
        })
    }

    fn second_analytic(&self, w: P2) -> Option<[[V3; 2]; 2]> {
        let [a, b] = w;
        let (sb_, cb_) = b.sin_cos();
        let (x11, x12, x22) = match &self.family {
            ChartFamily::Plane => (V3::zeros(), V3::zeros(), V3::zeros()),
            ChartFamily::Sphere { radius } => {
                let (sa, ca) = a.sin_cos();
                (
                    -V3::new(sa * cb_, sa * sb_, ca) * *radius,
                    V3::new(-ca * sb_, ca * cb_, 0.0) * *radius,
                    V3::new(-sa * cb_, -sa * sb_, 0.0) * *radius,
                )
            }
            ChartFamily::Revolution { r, z } => {
                let (rr, dr, ddr) = self.profile_derivs(r, a);
                let (_, _, ddz) = self.profile_derivs(z, a);
                (
                    V3::new(ddr * cb_, ddr * sb_, ddz),
                    V3::new(-dr * sb_, dr * cb_, 0.0),
                    V3::new(-rr * cb_, -rr * sb_, 0.0),
                )
            }
            ChartFamily::Cone {
                half_angle,
                form: ConeForm::Generator,
            } => {
                let s = half_angle.sin();
                (
                    V3::zeros(),
                    V3::new(-s * sb_, s * cb_, 0.0),
                    V3::new(-a * s * cb_, -a * s * sb_, 0.0),
                )
            }
            _ => return None,
        };
        Some([[x11, x12], [x12, x22]])
    }

    /// First derivatives by fourth-order central differences of the map.
    pub fn tangents_fd(&self, w: P2) -> [V3; 2] {
        let h = self.h_fd;
        [
            fd5(|s| self.point([w[0] + s, w[1]]), h),
            fd5(|s| self.point([w[0], w[1] + s]), h),
        ]
    }

    /// Second derivatives by fourth-order central differences of the tangents.
    pub fn second_fd(&self, w: P2) -> [[V3; 2]; 2] {
        let h = 1e-3 * self.domain.diameter();
        let d1 = fd5(|s| self.tangents_pair([w[0] + s, w[1]]), h);
        let d2 = fd5(|s| self.tangents_pair([w[0], w[1] + s]), h);
        let x11 = d1.0;
        let x22 = d2.1;
        let x12 = (d1.1 + d2.0) * 0.5;
        [[x11, x12], [x12, x22]]
    }

    fn tangents_pair(&self, w: P2) -> Pair {
        let [a, b] = self.tangents(w);
        Pair(a, b)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.tangents_analytic([0.5, 0.5]).is_some()
    }

    pub fn tangents(&self, w: P2) -> [V3; 2] {
        self.tangents_analytic(w)
            .unwrap_or_else(|| self.tangents_fd(w))
    }

    pub fn second(&self, w: P2) -> [[V3; 2]; 2] {
        self.second_analytic(w).unwrap_or_else(|| self.second_fd(w))
    }

    fn check_domain(&self, w: P2) -> Result<()> {
        if !self.domain.contains(w, self.domain_tol()) {
            return Err(Error::OutsideDomain(w[0], w[1]));
        }
        Ok(())
    }

    /// Frame without the domain check, for curves and loops that may graze ∂Ω.
    pub fn frame_unchecked(&self, w: P2) -> Result<Frame> {
        let x = self.point(w);
        let [x1, x2] = self.tangents(w);
        let (l1, l2) = (x1.norm(), x2.norm());
        let tol = self.tol_deg();
        if !(l1 >= tol && l2 >= tol) {
            return Err(Error::DegeneratePoint(w[0], w[1]));
        }
        let e1 = x1 / l1;
        let e2 = x2 / l2;
        let n = e1.cross(&e2).normalize();
        Ok(Frame {
            x,
            x1,
            x2,
            e1,
            e2,
            n,
        })
    }

    /// The natural trihedron (x, x¹, x², e¹, e², N) at ω.
    pub fn eval_frame(&self, w: P2) -> Result<Frame> {
        self.check_domain(w)?;
        self.frame_unchecked(w)
    }

    /// Metric lengths, their gradients, F and L at ω (no domain check).
    pub fn local(&self, w: P2) -> Result<LocalGeometry> {
        let frame = self.frame_unchecked(w)?;
        let sec = self.second(w);
        let lengths = [frame.x1.norm(), frame.x2.norm()];
        let xs = [frame.x1, frame.x2];
        let mut length_grad = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                length_grad[i][j] = xs[i].dot(&sec[i][j]) / lengths[i];
            }
        }
        let f = [
            -length_grad[0][1] / lengths[1],
            length_grad[1][0] / lengths[0],
        ];
        let mut l = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                l[i][j] = sec[i][j].dot(&frame.n);
            }
        }
        Ok(LocalGeometry {
            frame,
            lengths,
            length_grad,
            f,
            l,
        })
    }

    /// F = (−(1/|x²|) ∂|x¹|/∂ω2, (1/|x¹|) ∂|x²|/∂ω1).
    pub fn f_vector(&self, w: P2) -> Result<[f64; 2]> {
        self.check_domain(w)?;
        Ok(self.local(w)?.f)
    }

    /// L_ij = x^{ij}·N.
    pub fn second_fundamental(&self, w: P2) -> Result<[[f64; 2]; 2]> {
        self.check_domain(w)?;
        Ok(self.local(w)?.l)
    }

    /// Step for differentiating F: shrinks near coordinate singularities so
    /// the stencil never straddles one.
    fn curvature_step(&self, g: &LocalGeometry) -> f64 {
        let mut dist = f64::INFINITY;
        for i in 0..2 {
            let grad = g.length_grad[i][0].hypot(g.length_grad[i][1]);
            if grad > 0.0 {
                dist = dist.min(g.lengths[i] / grad);
            }
        }
        (1e-3 * self.domain.diameter()).min(0.25 * dist)
    }

    fn gaussian_from_local(&self, w: P2, g: &LocalGeometry) -> Result<f64> {
        let h = self.curvature_step(g);
        let fa = |s: f64| -> Result<[f64; 2]> { Ok(self.local([w[0] + s, w[1]])?.f) };
        let fb = |s: f64| -> Result<[f64; 2]> { Ok(self.local([w[0], w[1] + s])?.f) };
        let d = |f: &dyn Fn(f64) -> Result<[f64; 2]>, k: usize| -> Result<f64> {
            Ok((f(-2.0 * h)?[k] - f(2.0 * h)?[k] + 8.0 * (f(h)?[k] - f(-h)?[k])) / (12.0 * h))
        };
        let df2_d1 = d(&fa, 1)?;
        let df1_d2 = d(&fb, 0)?;
        Ok(-(df2_d1 - df1_d2) / (g.lengths[0] * g.lengths[1]))
    }

    /// K = −(∂F2/∂ω1 − ∂F1/∂ω2)/(|x¹||x²|), with F differentiated numerically.
    pub fn gaussian_curvature(&self, w: P2) -> Result<f64> {
        self.check_domain(w)?;
        let g = self.local(w)?;
        self.gaussian_from_local(w, &g)
    }

    /// K = det(L)/(|x¹|²|x²|²), the independent route.
    pub fn gaussian_curvature_from_l(&self, w: P2) -> Result<f64> {
        let g = self.local(w)?;
        let det = g.l[0][0] * g.l[1][1] - g.l[0][1] * g.l[1][0];
        Ok(det / (g.lengths[0] * g.lengths[0] * g.lengths[1] * g.lengths[1]))
    }

    pub fn metric(&self, w: P2) -> Result<MetricData> {
        self.check_domain(w)?;
        let g = self.local(w)?;
        let k = self.gaussian_from_local(w, &g)?;
        Ok(MetricData {
            lengths: g.lengths,
            f: g.f,
            l: g.l,
            k,
        })
    }

    /// |x¹|, |x²| at ω, defined also at degenerate points.
    pub fn metric_lengths(&self, w: P2) -> [f64; 2] {
        let [a, b] = self.tangents(w);
        [a.norm(), b.norm()]
    }
}

#[derive(Clone, Copy)]
struct Pair(V3, V3);

impl std::ops::Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl std::ops::Sub for Pair {
    type Output = Pair;
    fn sub(self, o: Pair) -> Pair {
        Pair(self.0 - o.0, self.1 - o.1)
    }
}

impl std::ops::Mul<f64> for Pair {
    type Output = Pair;
    fn mul(self, s: f64) -> Pair {
        Pair(self.0 * s, self.1 * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn plane() -> SurfaceChart {
        SurfaceChart::new(
            ChartFamily::Plane,
            Domain::Rectangle {
                min: [-1.0, -1.0],
                max: [1.0, 1.0],
            },
            vec![],
        )
        .unwrap()
    }

    fn sphere() -> SurfaceChart {
        SurfaceChart::new(
            ChartFamily::Sphere { radius: 1.0 },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [PI, 2.0 * PI],
            },
            vec![],
        )
        .unwrap()
    }

    fn cylinder() -> SurfaceChart {
        let e = |s: &str| ExpressionAst::parse(s, &["w1", "w2"]).unwrap();
        SurfaceChart::new(
            ChartFamily::Expression {
                x: e("cos(w1)"),
                y: e("sin(w1)"),
                z: e("w2"),
            },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            },
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn plane_frame() {
        let f = plane().eval_frame([0.3, -0.2]).unwrap();
        assert_eq!(f.e1, V3::x());
        assert_eq!(f.e2, V3::y());
        assert_eq!(f.n, V3::z());
    }

    #[test]
    fn sphere_frame_and_metric() {
        let s = sphere();
        let f = s.eval_frame([FRAC_PI_2, 0.0]).unwrap();
        assert!((f.x1.norm() - 1.0).abs() < 1e-15);
        assert!((f.x2.norm() - 1.0).abs() < 1e-15);
        assert!((f.n - V3::x()).norm() < 1e-15);
        let l = s.metric_lengths([FRAC_PI_4, 1.0]);
        assert!((l[1] - 2f64.sqrt() / 2.0).abs() < 1e-15);
        // right-handed orthonormal
        let f = s.eval_frame([1.1, 2.3]).unwrap();
        assert!((f.e1.cross(&f.e2) - f.n).norm() < 1e-14);
    }

    #[test]
    fn degenerate_and_outside() {
        let s = sphere();
        assert!(matches!(s.eval_frame([0.0, 1.0]), Err(Error::DegeneratePoint(..))));
        assert!(matches!(s.eval_frame([-0.5, 1.0]), Err(Error::OutsideDomain(..))));
    }

    #[test]
    fn f_vectors() {
        assert_eq!(plane().f_vector([0.1, 0.2]).unwrap(), [0.0, 0.0]);
        let f = sphere().f_vector([0.7, 1.0]).unwrap();
        assert!(f[0].abs() < 1e-14);
        assert!((f[1] - 0.7f64.cos()).abs() < 1e-14);
        let f = cylinder().f_vector([0.4, 0.6]).unwrap();
        assert!(f[0].abs() < 1e-7 && f[1].abs() < 1e-7, "{f:?}");
    }

    #[test]
    fn curvatures() {
        assert!(plane().gaussian_curvature([0.2, 0.3]).unwrap().abs() < 1e-12);
        let k = sphere().gaussian_curvature([FRAC_PI_3, 0.5]).unwrap();
        assert!((k - 1.0).abs() < 1e-9, "{k}");
        assert!(cylinder().gaussian_curvature([0.5, 0.5]).unwrap().abs() < 1e-5);
    }

    #[test]
    fn second_fundamental_forms() {
        assert_eq!(plane().second_fundamental([0.0, 0.0]).unwrap(), [[0.0; 2]; 2]);
        let s = sphere();
        let l = s.second_fundamental([FRAC_PI_3, 0.5]).unwrap();
        assert!((l[0][0].abs() - 1.0).abs() < 1e-14);
        let g = s.local([FRAC_PI_3, 0.5]).unwrap();
        let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
        let kl = det.abs() / (g.lengths[0].powi(2) * g.lengths[1].powi(2));
        assert!((kl - 1.0).abs() < 1e-12);
        // cylinder: principal curvatures 1 and 0
        let c = cylinder();
        let g = c.local([0.5, 0.5]).unwrap();
        let k1 = g.l[0][0] / g.lengths[0].powi(2);
        let k2 = g.l[1][1] / g.lengths[1].powi(2);
        assert!((k1.abs() - 1.0).abs() < 1e-6, "{k1}");
        assert!(k2.abs() < 1e-6);
        assert!(g.l[0][1].abs() < 1e-6);
    }

    #[test]
    fn non_orthogonal_rejected() {
        let e = |s: &str| ExpressionAst::parse(s, &["w1", "w2"]).unwrap();
        let r = SurfaceChart::new(
            ChartFamily::Expression {
                x: e("w1 + w2"),
                y: e("w2"),
                z: e("0"),
            },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            },
            vec![],
        );
        assert!(matches!(r, Err(Error::NonOrthogonal { .. })));
    }
}
