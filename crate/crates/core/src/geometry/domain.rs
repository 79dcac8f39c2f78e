//! Parameter domains and area quadrature over them.

use std::f64::consts::PI;

use crate::boundary::Segment;
use crate::error::{Error, Result};
use crate::quadrature::{triangle_rule, GaussLegendre, KahanSum, QuadratureLevel};

pub type P2 = [f64; 2];

/// A region Ω of parameter space.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Rectangle { min: P2, max: P2 },
    /// Counterclockwise simple polygon.
    Polygon { vertices: Vec<P2> },
    /// `r_inner <= |ω - center| <= r_outer`, polar angle in `[theta0, theta1]`.
    /// A full disk has `r_inner = 0` and `theta1 - theta0 = 2π`.
    Sector {
        center: P2,
        r_inner: f64,
        r_outer: f64,
        theta0: f64,
        theta1: f64,
    },
}

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

fn segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm([ap[0] - t * ab[0], ap[1] - t * ab[1]])
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Rectangle { min, max } => {
                if !(max[0] > min[0] && max[1] > min[1]) {
                    return Err(Error::spec("domain.rectangle", "max must exceed min"));
                }
            }
            Domain::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::spec("domain.polygon", "need at least 3 vertices"));
                }
                if self.signed_polygon_area() <= 0.0 {
                    return Err(Error::spec(
                        "domain.polygon",
                        "vertices must be listed counterclockwise",
                    ));
                }
            }
            Domain::Sector {
                r_inner,
                r_outer,
                theta0,
                theta1,
                ..
            } => {
                if !(*r_inner >= 0.0 && r_outer > r_inner) {
                    return Err(Error::spec("domain.sector", "need 0 <= r_inner < r_outer"));
                }
                let span = theta1 - theta0;
                if !(span > 0.0 && span <= 2.0 * PI + 1e-12) {
                    return Err(Error::spec(
                        "domain.sector",
                        "angular span must lie in (0, 2π]",
                    ));
                }
            }
        }
        Ok(())
    }

    fn signed_polygon_area(&self) -> f64 {
        match self {
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| cross(vertices[i], vertices[(i + 1) % n]))
                    .sum::<f64>()
                    / 2.0
            }
            _ => 0.0,
        }
    }

    pub fn is_full_circle(&self) -> bool {
        matches!(self, Domain::Sector { theta0, theta1, .. } if (theta1 - theta0 - 2.0 * PI).abs() < 1e-12)
    }

    pub fn bbox(&self) -> (P2, P2) {
        match self {
            Domain::Rectangle { min, max } => (*min, *max),
            Domain::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Domain::Sector {
                center, r_outer, ..
            } => (
                [center[0] - r_outer, center[1] - r_outer],
                [center[0] + r_outer, center[1] + r_outer],
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        norm(sub(hi, lo))
    }

    fn angle_in_span(theta: f64, theta0: f64, theta1: f64, tol: f64) -> bool {
        if theta1 - theta0 >= 2.0 * PI - 1e-12 {
            return true;
        }
        let rel = (theta - theta0).rem_euclid(2.0 * PI);
        rel <= theta1 - theta0 + tol || rel >= 2.0 * PI - tol
    }

    /// Membership in the closure of Ω, with absolute tolerance `tol`.
    pub fn contains(&self, p: P2, tol: f64) -> bool {
        match self {
            Domain::Rectangle { min, max } => {
                p[0] >= min[0] - tol
                    && p[0] <= max[0] + tol
                    && p[1] >= min[1] - tol
                    && p[1] <= max[1] + tol
            }
            Domain::Polygon { vertices } => {
                if self.boundary_distance(p) <= tol {
                    return true;
                }
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if p[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
            Domain::Sector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => {
                let d = sub(p, *center);
                let r = norm(d);
                if r > r_outer + tol || r < r_inner - tol {
                    return false;
                }
                if r <= tol {
                    return *r_inner <= tol;
                }
                Self::angle_in_span(d[1].atan2(d[0]), *theta0, *theta1, tol / r)
            }
        }
    }

    /// Distance from `p` to ∂Ω.
    pub fn boundary_distance(&self, p: P2) -> f64 {
        match self {
            Domain::Rectangle { min, max } => {
                let corners = [*min, [max[0], min[1]], *max, [min[0], max[1]]];
                (0..4)
                    .map(|i| segment_distance(p, corners[i], corners[(i + 1) % 4]))
                    .fold(f64::INFINITY, f64::min)
            }
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
            Domain::Sector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => {
                let d = sub(p, *center);
                let r = norm(d);
                let th = d[1].atan2(d[0]);
                let full = self.is_full_circle();
                let on_arc = |radius: f64| -> f64 {
                    if full || Self::angle_in_span(th, *theta0, *theta1, 0.0) {
                        (r - radius).abs()
                    } else {
                        let a = [
                            center[0] + radius * theta0.cos(),
                            center[1] + radius * theta0.sin(),
                        ];
                        let b = [
                            center[0] + radius * theta1.cos(),
                            center[1] + radius * theta1.sin(),
                        ];
                        norm(sub(p, a)).min(norm(sub(p, b)))
                    }
                };
                let mut best = on_arc(*r_outer);
                if *r_inner > 0.0 {
                    best = best.min(on_arc(*r_inner));
                }
                if !full {
                    for th_edge in [*theta0, *theta1] {
                        let dir = [th_edge.cos(), th_edge.sin()];
                        let a = [center[0] + r_inner * dir[0], center[1] + r_inner * dir[1]];
                        let b = [center[0] + r_outer * dir[0], center[1] + r_outer * dir[1]];
                        best = best.min(segment_distance(p, a, b));
                    }
                }
                best
            }
        }
    }

    /// Positively oriented boundary loops of the domain, as parameter-space
    /// segments. The outer loop comes first.
    pub fn default_boundary(&self) -> Vec<Vec<Segment>> {
        match self {
            Domain::Rectangle { min, max } => {
                let c = [*min, [max[0], min[1]], *max, [min[0], max[1]]];
                vec![(0..4)
                    .map(|i| Segment::Line {
                        from: c[i],
                        to: c[(i + 1) % 4],
                    })
                    .collect()]
            }
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                vec![(0..n)
                    .map(|i| Segment::Line {
                        from: vertices[i],
                        to: vertices[(i + 1) % n],
                    })
                    .collect()]
            }
            Domain::Sector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => {
                let outer = Segment::Arc {
                    center: *center,
                    radius: *r_outer,
                    start: *theta0,
                    end: *theta1,
                };
                if self.is_full_circle() {
                    let mut loops = vec![vec![outer]];
                    if *r_inner > 0.0 {
                        loops.push(vec![Segment::Arc {
                            center: *center,
                            radius: *r_inner,
                            start: *theta1,
                            end: *theta0,
                        }]);
                    }
                    loops
                } else {
                    let at = |r: f64, t: f64| [center[0] + r * t.cos(), center[1] + r * t.sin()];
                    let mut segs = vec![
                        Segment::Line {
                            from: at(*r_inner, *theta0),
                            to: at(*r_outer, *theta0),
                        },
                        outer,
                        Segment::Line {
                            from: at(*r_outer, *theta1),
                            to: at(*r_inner, *theta1),
                        },
                    ];
                    if *r_inner > 0.0 {
                        segs.push(Segment::Arc {
                            center: *center,
                            radius: *r_inner,
                            start: *theta1,
                            end: *theta0,
                        });
                    }
                    vec![segs]
                }
            }
        }
    }

    /// Ear-clipping triangulation of a polygon domain.
    fn triangulate(vertices: &[P2]) -> Vec<[P2; 3]> {
        let mut idx: Vec<usize> = (0..vertices.len()).collect();
        let mut tris = Vec::new();
        let mut guard = 0;
        while idx.len() > 3 && guard < 10_000 {
            guard += 1;
            let n = idx.len();
            let mut clipped = false;
            for i in 0..n {
                let (ia, ib, ic) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
                let (a, b, c) = (vertices[ia], vertices[ib], vertices[ic]);
                if cross(sub(b, a), sub(c, b)) <= 0.0 {
                    continue;
                }
                let blocked = idx.iter().any(|&j| {
                    if j == ia || j == ib || j == ic {
                        return false;
                    }
                    let p = vertices[j];
                    cross(sub(b, a), sub(p, a)) >= 0.0
                        && cross(sub(c, b), sub(p, b)) >= 0.0
                        && cross(sub(a, c), sub(p, c)) >= 0.0
                });
                if blocked {
                    continue;
                }
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
            if !clipped {
                break;
            }
        }
        if idx.len() == 3 {
            tris.push([vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]]);
        }
        tris
    }

    /// ∬_Ω f dω. Panels of a rectangle that contain a point of `refine_at`
    /// are subdivided geometrically toward it.
    pub fn integrate<F>(&self, level: QuadratureLevel, refine_at: &[P2], mut f: F) -> Result<f64>
    where
        F: FnMut(P2) -> Result<f64>,
    {
        let rule = GaussLegendre::new(level.order());
        let panels = level.panels();
        let mut acc = KahanSum::default();
        match self {
            Domain::Rectangle { min, max } => {
                let hx = (max[0] - min[0]) / panels as f64;
                let hy = (max[1] - min[1]) / panels as f64;
                for i in 0..panels {
                    for j in 0..panels {
                        let lo = [min[0] + hx * i as f64, min[1] + hy * j as f64];
                        let hi = [lo[0] + hx, lo[1] + hy];
                        acc.add(rect_panel(&rule, lo, hi, refine_at, 6, &mut f)?);
                    }
                }
            }
            Domain::Polygon { vertices } => {
                let tri_pts = triangle_rule(&rule);
                let depth = match level {
                    QuadratureLevel::Q1 => 0,
                    QuadratureLevel::Q2 => 1,
                    QuadratureLevel::Q3 => 2,
                };
                let mut tris = Self::triangulate(vertices);
                for _ in 0..depth {
                    tris = tris
                        .into_iter()
                        .flat_map(|[a, b, c]| {
                            let mid = |p: P2, q: P2| [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0];
                            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
                            [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
                        })
                        .collect();
                }
                for [a, b, c] in tris {
                    let e1 = sub(b, a);
                    let e2 = sub(c, a);
                    let jac = cross(e1, e2).abs();
                    for &(u, v, w) in &tri_pts {
                        let p = [a[0] + u * e1[0] + v * e2[0], a[1] + u * e1[1] + v * e2[1]];
                        acc.add(w * jac * f(p)?);
                    }
                }
            }
            Domain::Sector {
                center,
                r_inner,
                r_outer,
                theta0,
                theta1,
            } => {
                let hr = (r_outer - r_inner) / panels as f64;
                let ht = (theta1 - theta0) / (2 * panels) as f64;
                for i in 0..panels {
                    let r_lo = r_inner + hr * i as f64;
                    for (r, wr) in rule.on(r_lo, r_lo + hr) {
                        for j in 0..2 * panels {
                            let t_lo = theta0 + ht * j as f64;
                            for (t, wt) in rule.on(t_lo, t_lo + ht) {
                                let p = [center[0] + r * t.cos(), center[1] + r * t.sin()];
                                acc.add(wr * wt * r * f(p)?);
                            }
                        }
                    }
                }
            }
        }
        Ok(acc.value())
    }
}

fn rect_panel<F>(
    rule: &GaussLegendre,
    lo: P2,
    hi: P2,
    refine_at: &[P2],
    depth: usize,
    f: &mut F,
) -> Result<f64>
where
    F: FnMut(P2) -> Result<f64>,
{
    let touches = refine_at.iter().any(|p| {
        p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]
    });
    if touches && depth > 0 {
        let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let mut s = 0.0;
        for (a, b) in [
            (lo, mid),
            ([mid[0], lo[1]], [hi[0], mid[1]]),
            ([lo[0], mid[1]], [mid[0], hi[1]]),
            (mid, hi),
        ] {
            s += rect_panel(rule, a, b, refine_at, depth - 1, f)?;
        }
        return Ok(s);
    }
    let mut acc = KahanSum::default();
    for (x, wx) in rule.on(lo[0], hi[0]) {
        for (y, wy) in rule.on(lo[1], hi[1]) {
            acc.add(wx * wy * f([x, y])?);
        }
    }
    Ok(acc.value())
}
