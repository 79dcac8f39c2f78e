//! Piecewise-smooth closed boundary curves on a charted surface.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ExpressionAst;
use crate::geometry::{SurfaceChart, P2, V3};
use crate::quadrature::{GaussLegendre, KahanSum, QuadratureLevel};

/// One smooth piece of a boundary loop, in parameter space, traversed for
/// `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Line {
        from: P2,
        to: P2,
    },
    /// Circular arc; counterclockwise when `end > start`.
    Arc {
        center: P2,
        radius: f64,
        start: f64,
        end: f64,
    },
    /// Curve `(w1(t), w2(t))` for `t ∈ [t0, t1]`.
    Expression {
        w1: ExpressionAst,
        w2: ExpressionAst,
        t0: f64,
        t1: f64,
    },
}

impl Segment {
    pub fn point(&self, t: f64) -> P2 {
        match self {
            Segment::Line { from, to } => [
                from[0] + t * (to[0] - from[0]),
                from[1] + t * (to[1] - from[1]),
            ],
            Segment::Arc {
                center,
                radius,
                start,
                end,
            } => {
                let a = start + t * (end - start);
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            Segment::Expression { w1, w2, t0, t1 } => {
                let s = t0 + t * (t1 - t0);
                [w1.eval_lossy(&[s]), w2.eval_lossy(&[s])]
            }
        }
    }

    /// dβ/dt.
    pub fn deriv(&self, t: f64) -> P2 {
        match self {
            Segment::Line { from, to } => [to[0] - from[0], to[1] - from[1]],
            Segment::Arc {
                radius, start, end, ..
            } => {
                let a = start + t * (end - start);
                let da = end - start;
                [-radius * a.sin() * da, radius * a.cos() * da]
            }
            Segment::Expression { .. } => {
                let h = 1e-5;
                let f = |s: f64| self.point(t + s);
                let (a, b, c, d) = (f(-2.0 * h), f(-h), f(h), f(2.0 * h));
                [
                    (a[0] - 8.0 * b[0] + 8.0 * c[0] - d[0]) / (12.0 * h),
                    (a[1] - 8.0 * b[1] + 8.0 * c[1] - d[1]) / (12.0 * h),
                ]
            }
        }
    }

    /// d²β/dt².
    pub fn deriv2(&self, t: f64) -> P2 {
        match self {
            Segment::Line { .. } => [0.0, 0.0],
            Segment::Arc {
                radius, start, end, ..
            } => {
                let a = start + t * (end - start);
                let da = end - start;
                [
                    -radius * a.cos() * da * da,
                    -radius * a.sin() * da * da,
                ]
            }
            Segment::Expression { .. } => {
                let h = 1e-3;
                let f = |s: f64| self.point(t + s);
                let (a, b, c, d, e) = (f(-2.0 * h), f(-h), f(0.0), f(h), f(2.0 * h));
                let k = 12.0 * h * h;
                [
                    (-a[0] + 16.0 * b[0] - 30.0 * c[0] + 16.0 * d[0] - e[0]) / k,
                    (-a[1] + 16.0 * b[1] - 30.0 * c[1] + 16.0 * d[1] - e[1]) / k,
                ]
            }
        }
    }
}

/// Derivatives of the surface curve γ = x∘β with respect to the segment
/// parameter.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub point: V3,
    pub d1: V3,
    pub d2: V3,
    pub normal: V3,
}

pub fn curve_jet(chart: &SurfaceChart, seg: &Segment, t: f64) -> Result<CurveJet> {
    let w = seg.point(t);
    let b1 = seg.deriv(t);
    let b2 = seg.deriv2(t);
    let frame = chart.frame_unchecked(w)?;
    let sec = chart.second(w);
    let d1 = frame.x1 * b1[0] + frame.x2 * b1[1];
    let mut d2 = frame.x1 * b2[0] + frame.x2 * b2[1];
    for i in 0..2 {
        for j in 0..2 {
            d2 += sec[i][j] * (b1[i] * b1[j]);
        }
    }
    Ok(CurveJet {
        point: frame.x,
        d1,
        d2,
        normal: frame.n,
    })
}

/// Geodesic curvature γ''·(N×γ') expressed in an arbitrary parameter.
fn kg_of(jet: &CurveJet) -> f64 {
    let speed = jet.d1.norm();
    jet.d2.dot(&jet.normal.cross(&jet.d1)) / (speed * speed * speed)
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexAngle {
    /// Index of the segment that starts at this vertex.
    pub segment: usize,
    /// Arclength position of the vertex along the component.
    pub arclength: f64,
    pub point: P2,
    pub tau: f64,
}

/// An arclength-parametrized closed boundary component.
#[derive(Debug, Clone)]
pub struct BoundaryComponent {
    pub segments: Vec<Segment>,
    /// Arclength at the start of each segment, plus the total at the end.
    cumulative: Vec<f64>,
    /// Per segment: panel edges in t and arclength at those edges.
    tables: Vec<Vec<(f64, f64)>>,
    rule: GaussLegendre,
}

const TABLE_PANELS: usize = 16;

fn speed(chart: &SurfaceChart, seg: &Segment, t: f64) -> f64 {
    let w = seg.point(t);
    let b = seg.deriv(t);
    let [x1, x2] = chart.tangents(w);
    (x1 * b[0] + x2 * b[1]).norm()
}

impl BoundaryComponent {
    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.cumulative.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Arclength position of parameter `t` on segment `k`.
    pub fn arclength_at(&self, chart: &SurfaceChart, k: usize, t: f64) -> f64 {
        self.cumulative[k] + self.seg_arclength(chart, k, t)
    }

    /// Arclength from the start of segment `k` to parameter `t` on it.
    fn seg_arclength(&self, chart: &SurfaceChart, k: usize, t: f64) -> f64 {
        let table = &self.tables[k];
        let p = ((t * TABLE_PANELS as f64).floor() as usize).min(TABLE_PANELS - 1);
        let (t_lo, s_lo) = table[p];
        s_lo + self
            .rule
            .integrate(t_lo, t, |u| speed(chart, &self.segments[k], u))
    }

    /// Locates arclength `s` (taken modulo the total) as (segment, t).
    pub fn locate(&self, chart: &SurfaceChart, s: f64) -> (usize, f64) {
        let total = self.total_length();
        let s = s.rem_euclid(total);
        let k = match self.cumulative[1..].iter().position(|&c| s < c) {
            Some(k) => k,
            None => self.segments.len() - 1,
        };
        let local = s - self.cumulative[k];
        let len = self.cumulative[k + 1] - self.cumulative[k];
        let mut t = (local / len).clamp(0.0, 1.0);
        for _ in 0..50 {
            let err = self.seg_arclength(chart, k, t) - local;
            let v = speed(chart, &self.segments[k], t);
            let step = err / v;
            t = (t - step).clamp(0.0, 1.0);
            if step.abs() < 1e-15 {
                break;
            }
        }
        (k, t)
    }

    /// γ(s), the surface point at arclength `s`.
    pub fn point_at(&self, chart: &SurfaceChart, s: f64) -> V3 {
        let (k, t) = self.locate(chart, s);
        chart.point(self.segments[k].point(t))
    }

    pub fn param_point_at(&self, chart: &SurfaceChart, s: f64) -> P2 {
        let (k, t) = self.locate(chart, s);
        self.segments[k].point(t)
    }

    /// Arclength positions of segment junctions (vertex candidates).
    pub fn junction_arclengths(&self) -> &[f64] {
        &self.cumulative[..self.segments.len()]
    }
}

/// Builds arclength tables for a loop of segments and checks closure on the
/// surface.
pub fn arclength_parametrize(
    chart: &SurfaceChart,
    index: usize,
    segments: Vec<Segment>,
) -> Result<BoundaryComponent> {
    if segments.is_empty() {
        return Err(Error::spec(
            format!("boundary[{index}]"),
            "component has no segments",
        ));
    }
    let rule = GaussLegendre::new(16);
    let scale = chart.metric_scale() * chart.domain().diameter().max(1e-300);
    let mut cumulative = vec![0.0];
    let mut tables = Vec::with_capacity(segments.len());
    for (k, seg) in segments.iter().enumerate() {
        let mut table = Vec::with_capacity(TABLE_PANELS + 1);
        let mut s = 0.0;
        for p in 0..TABLE_PANELS {
            let lo = p as f64 / TABLE_PANELS as f64;
            let hi = (p + 1) as f64 / TABLE_PANELS as f64;
            table.push((lo, s));
            s += rule.integrate(lo, hi, |t| speed(chart, seg, t));
        }
        table.push((1.0, s));
        if !(s > 1e-12 * scale) {
            return Err(Error::DegenerateCurve {
                component: index,
                segment: k,
            });
        }
        cumulative.push(cumulative[k] + s);
        tables.push(table);
    }
    let n = segments.len();
    for k in 0..n {
        let end = chart.point(segments[k].point(1.0));
        let start = chart.point(segments[(k + 1) % n].point(0.0));
        let gap = (end - start).norm();
        if gap > 1e-9 * scale.max(1.0) {
            return Err(Error::OpenBoundary {
                component: index,
                gap,
            });
        }
    }
    Ok(BoundaryComponent {
        segments,
        cumulative,
        tables,
        rule,
    })
}

/// Signed turning angle from unit tangent `a` to `b` about `n`, in (−π, π].
pub fn turning_angle(a: &V3, b: &V3, n: &V3) -> f64 {
    a.cross(b).dot(n).atan2(a.dot(b))
}

/// Exterior angle at every segment junction (smooth junctions give ≈ 0).
/// The sign is positive when the tangent turns counterclockwise about N.
pub fn exterior_angles(
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    index: usize,
) -> Result<Vec<VertexAngle>> {
    let n = component.segments.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let prev = &component.segments[(k + n - 1) % n];
        let next = &component.segments[k];
        let a = curve_jet(chart, prev, 1.0)?;
        let b = curve_jet(chart, next, 0.0)?;
        let ta = a.d1.normalize();
        let tb = b.d1.normalize();
        let cosv = ta.dot(&tb);
        if cosv <= -1.0 + 1e-12 {
            return Err(Error::CuspVertex {
                component: index,
                junction: k,
            });
        }
        let tau = turning_angle(&ta, &tb, &b.normal);
        out.push(VertexAngle {
            segment: k,
            arclength: component.cumulative[k],
            point: next.point(0.0),
            tau,
        });
    }
    Ok(out)
}

/// Geodesic curvature at arclength `s`.
pub fn geodesic_curvature(
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    s: f64,
) -> Result<f64> {
    let total = component.total_length();
    let sm = s.rem_euclid(total);
    for &c in component.junction_arclengths().iter().chain([&total]) {
        if (sm - c).abs() < 1e-12 * total {
            return Err(Error::VertexPoint(s));
        }
    }
    let (k, t) = component.locate(chart, s);
    Ok(kg_of(&curve_jet(chart, &component.segments[k], t)?))
}

/// ∮ kg ds over one component.
pub fn integrate_kg(
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    level: QuadratureLevel,
) -> Result<f64> {
    let rule = GaussLegendre::new(level.order());
    let panels = level.panels() * 2;
    let mut acc = KahanSum::default();
    for seg in &component.segments {
        for p in 0..panels {
            let lo = p as f64 / panels as f64;
            let hi = (p + 1) as f64 / panels as f64;
            for (t, w) in rule.on(lo, hi) {
                let jet = curve_jet(chart, seg, t)?;
                let sp = jet.d1.norm();
                acc.add(w * jet.d2.dot(&jet.normal.cross(&jet.d1)) / (sp * sp));
            }
        }
    }
    Ok(acc.value())
}

/// ∬ K dσ with dσ = |x¹||x²| dω.
pub fn integrate_gaussian_curvature(chart: &SurfaceChart, level: QuadratureLevel) -> Result<f64> {
    chart
        .domain()
        .integrate(level, chart.degenerate_points(), |w| {
            let g = chart.local(w)?;
            let k = chart.gaussian_curvature(w)?;
            Ok(k * g.lengths[0] * g.lengths[1])
        })
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussBonnetReport {
    pub chi: i64,
    pub two_pi_chi: f64,
    pub kg_integral: f64,
    pub curvature_integral: f64,
    pub exterior_angle_sum: f64,
    pub residual: f64,
    /// |residual(level) − residual(coarser level)|.
    pub error_estimate: f64,
}

fn gb_terms(
    chart: &SurfaceChart,
    components: &[BoundaryComponent],
    level: QuadratureLevel,
) -> Result<(f64, f64, f64)> {
    let mut kg = 0.0;
    let mut tau = 0.0;
    for (i, c) in components.iter().enumerate() {
        kg += integrate_kg(c, chart, level)?;
        tau += exterior_angles(c, chart, i)?.iter().map(|v| v.tau).sum::<f64>();
    }
    let k = integrate_gaussian_curvature(chart, level)?;
    Ok((kg, k, tau))
}

/// 2πχ − ∮kg ds − ∬K dσ − Σ τ_k.
pub fn gauss_bonnet_residual(
    chart: &SurfaceChart,
    components: &[BoundaryComponent],
    chi: i64,
    level: QuadratureLevel,
) -> Result<GaussBonnetReport> {
    let two_pi_chi = 2.0 * PI * chi as f64;
    let (kg, k, tau) = gb_terms(chart, components, level)?;
    let residual = two_pi_chi - kg - k - tau;
    let coarse = if level == QuadratureLevel::Q1 {
        residual
    } else {
        let (kg2, k2, tau2) = gb_terms(chart, components, level.coarser())?;
        two_pi_chi - kg2 - k2 - tau2
    };
    Ok(GaussBonnetReport {
        chi,
        two_pi_chi,
        kg_integral: kg,
        curvature_integral: k,
        exterior_angle_sum: tau,
        residual,
        error_estimate: (residual - coarse).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartFamily, Domain};

    fn plane(domain: Domain) -> SurfaceChart {
        SurfaceChart::new(ChartFamily::Plane, domain, vec![]).unwrap()
    }

    fn unit_square() -> Domain {
        Domain::Rectangle {
            min: [0.0, 0.0],
            max: [1.0, 1.0],
        }
    }

    fn polygon(n: usize) -> Domain {
        Domain::Polygon {
            vertices: (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    [t.cos(), t.sin()]
                })
                .collect(),
        }
    }

    fn circle(r: f64) -> Vec<Segment> {
        vec![Segment::Arc {
            center: [0.0, 0.0],
            radius: r,
            start: 0.0,
            end: 2.0 * PI,
        }]
    }

    #[test]
    fn lengths() {
        let c = plane(unit_square());
        let segs = c.domain().default_boundary().remove(0);
        let b = arclength_parametrize(&c, 0, segs).unwrap();
        assert!((b.total_length() - 4.0).abs() < 1e-13);

        let c = plane(Domain::Rectangle {
            min: [-3.0, -3.0],
            max: [3.0, 3.0],
        });
        let b = arclength_parametrize(&c, 0, circle(2.5)).unwrap();
        assert!((b.total_length() - 5.0 * PI).abs() < 1e-12);

        let s = SurfaceChart::new(
            ChartFamily::Sphere { radius: 1.0 },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [PI, 2.0 * PI],
            },
            vec![],
        )
        .unwrap();
        let eq = vec![Segment::Line {
            from: [PI / 2.0, 0.0],
            to: [PI / 2.0, 2.0 * PI],
        }];
        let b = arclength_parametrize(&s, 0, eq).unwrap();
        assert!((b.total_length() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn unit_speed_after_reparametrization() {
        let c = plane(Domain::Rectangle {
            min: [-2.0, -2.0],
            max: [2.0, 2.0],
        });
        let ellipse = vec![Segment::Expression {
            w1: ExpressionAst::parse("1.5*cos(t)", &["t"]).unwrap(),
            w2: ExpressionAst::parse("0.5*sin(t)", &["t"]).unwrap(),
            t0: 0.0,
            t1: 2.0 * PI,
        }];
        let b = arclength_parametrize(&c, 0, ellipse).unwrap();
        let l = b.total_length();
        let h = 1e-5;
        for k in 0..10 {
            let s = l * (k as f64 + 0.3) / 10.0;
            let d = (b.point_at(&c, s + h) - b.point_at(&c, s - h)) / (2.0 * h);
            assert!((d.norm() - 1.0).abs() < 1e-6, "s={s}: {}", d.norm());
        }
    }

    #[test]
    fn zero_length_segment_rejected() {
        let c = plane(unit_square());
        let segs = vec![
            Segment::Line {
                from: [0.0, 0.0],
                to: [0.0, 0.0],
            },
            Segment::Line {
                from: [0.0, 0.0],
                to: [1.0, 0.0],
            },
        ];
        assert!(matches!(
            arclength_parametrize(&c, 0, segs),
            Err(Error::DegenerateCurve { segment: 0, .. })
        ));
    }

    #[test]
    fn open_loop_rejected() {
        let c = plane(unit_square());
        let segs = vec![Segment::Line {
            from: [0.0, 0.0],
            to: [1.0, 0.0],
        }];
        assert!(matches!(
            arclength_parametrize(&c, 0, segs),
            Err(Error::OpenBoundary { .. })
        ));
    }

    #[test]
    fn polygon_exterior_angles() {
        for (n, expect) in [(4, PI / 2.0), (3, 2.0 * PI / 3.0), (6, PI / 3.0)] {
            let c = plane(if n == 4 { unit_square() } else { polygon(n) });
            let segs = c.domain().default_boundary().remove(0);
            let b = arclength_parametrize(&c, 0, segs).unwrap();
            let angles = exterior_angles(&b, &c, 0).unwrap();
            assert_eq!(angles.len(), n);
            for a in &angles {
                assert!((a.tau - expect).abs() < 1e-13, "{n}: {}", a.tau);
            }
            let sum: f64 = angles.iter().map(|a| a.tau).sum();
            assert!((sum - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn cusp_rejected() {
        let c = plane(unit_square());
        let segs = vec![
            Segment::Line {
                from: [0.0, 0.0],
                to: [1.0, 0.0],
            },
            Segment::Line {
                from: [1.0, 0.0],
                to: [0.0, 0.0],
            },
        ];
        let b = arclength_parametrize(&c, 0, segs).unwrap();
        assert!(matches!(
            exterior_angles(&b, &c, 0),
            Err(Error::CuspVertex { .. })
        ));
    }

    #[test]
    fn geodesic_curvatures() {
        let c = plane(unit_square());
        let segs = c.domain().default_boundary().remove(0);
        let b = arclength_parametrize(&c, 0, segs).unwrap();
        assert_eq!(geodesic_curvature(&b, &c, 0.5).unwrap(), 0.0);
        assert!(matches!(
            geodesic_curvature(&b, &c, 1.0),
            Err(Error::VertexPoint(_))
        ));

        let c = plane(Domain::Rectangle {
            min: [-3.0, -3.0],
            max: [3.0, 3.0],
        });
        let b = arclength_parametrize(&c, 0, circle(2.0)).unwrap();
        assert!((geodesic_curvature(&b, &c, 1.3).unwrap() - 0.5).abs() < 1e-13);

        let s = SurfaceChart::new(
            ChartFamily::Sphere { radius: 1.0 },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [PI, 2.0 * PI],
            },
            vec![],
        )
        .unwrap();
        let th0 = 0.9_f64;
        let lat = vec![Segment::Line {
            from: [th0, 0.0],
            to: [th0, 2.0 * PI],
        }];
        let b = arclength_parametrize(&s, 0, lat).unwrap();
        let kg = geodesic_curvature(&b, &s, 0.7).unwrap();
        assert!((kg - 1.0 / th0.tan()).abs() < 1e-12);
        let total = integrate_kg(&b, &s, QuadratureLevel::Q2).unwrap();
        assert!((total - 2.0 * PI * th0.cos()).abs() < 1e-12);
    }

    #[test]
    fn ellipse_kg_matches_plane_curvature() {
        let (a, bb) = (1.5_f64, 0.5_f64);
        let c = plane(Domain::Rectangle {
            min: [-2.0, -2.0],
            max: [2.0, 2.0],
        });
        let seg = Segment::Expression {
            w1: ExpressionAst::parse("1.5*cos(t)", &["t"]).unwrap(),
            w2: ExpressionAst::parse("0.5*sin(t)", &["t"]).unwrap(),
            t0: 0.0,
            t1: 2.0 * PI,
        };
        for k in 0..7 {
            let t = 0.1 + 0.13 * k as f64;
            let jet = curve_jet(&c, &seg, t).unwrap();
            let th = 2.0 * PI * t;
            let exact = a * bb / (a * a * th.sin().powi(2) + bb * bb * th.cos().powi(2)).powf(1.5);
            assert!((kg_of(&jet) - exact).abs() < 1e-6, "{} vs {exact}", kg_of(&jet));
        }
    }

    #[test]
    fn gauss_bonnet_planar() {
        let disk = plane(Domain::Sector {
            center: [0.0, 0.0],
            r_inner: 0.0,
            r_outer: 1.0,
            theta0: 0.0,
            theta1: 2.0 * PI,
        });
        let b = arclength_parametrize(&disk, 0, circle(1.0)).unwrap();
        let r = gauss_bonnet_residual(&disk, &[b], 1, QuadratureLevel::Q3).unwrap();
        assert!((r.kg_integral - 2.0 * PI).abs() < 1e-12);
        assert!(r.residual.abs() < 1e-12);

        let sq = plane(unit_square());
        let segs = sq.domain().default_boundary().remove(0);
        let b = arclength_parametrize(&sq, 0, segs).unwrap();
        let r = gauss_bonnet_residual(&sq, &[b], 1, QuadratureLevel::Q3).unwrap();
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn gauss_bonnet_spherical_cap() {
        let th0 = 1.1;
        let s = SurfaceChart::new(
            ChartFamily::Sphere { radius: 1.0 },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [th0, 2.0 * PI],
            },
            vec![],
        )
        .unwrap();
        let b = arclength_parametrize(
            &s,
            0,
            vec![Segment::Line {
                from: [th0, 0.0],
                to: [th0, 2.0 * PI],
            }],
        )
        .unwrap();
        let r = gauss_bonnet_residual(&s, &[b], 1, QuadratureLevel::Q3).unwrap();
        assert!((r.curvature_integral - 2.0 * PI * (1.0 - th0.cos())).abs() < 1e-8);
        assert!(r.residual.abs() < 1e-6, "{r:?}");
    }
}
