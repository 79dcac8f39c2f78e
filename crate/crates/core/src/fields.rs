//! Tangent vector and director fields given by frame components, their
//! zeros, and winding indices.

use std::f64::consts::PI;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::boundary::Segment;
use crate::error::{Error, Result};
use crate::expr::ExpressionAst;
use crate::geometry::{Domain, SurfaceChart, P2};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    Vector,
    #[default]
    Director,
}

impl FieldMode {
    /// Admissible strength step: 1 for vectors, 1/2 for directors.
    pub fn step(self) -> Rational64 {
        match self {
            FieldMode::Vector => Rational64::from_integer(1),
            FieldMode::Director => Rational64::new(1, 2),
        }
    }

    /// Period of the field angle.
    pub fn period(self) -> f64 {
        match self {
            FieldMode::Vector => 2.0 * PI,
            FieldMode::Director => PI,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vector" => Some(FieldMode::Vector),
            "director" => Some(FieldMode::Director),
            _ => None,
        }
    }
}

/// Snaps `x` to the nearest multiple of `step`.
pub fn snap(x: f64, step: Rational64) -> Rational64 {
    let s = *step.numer() as f64 / *step.denom() as f64;
    Rational64::from_integer((x / s).round() as i64) * step
}

pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A = a1 e¹ + a2 e², normalized to u = A/|A| away from its zeros.
#[derive(Debug, Clone)]
pub struct TangentField {
    pub mode: FieldMode,
    pub a1: ExpressionAst,
    pub a2: ExpressionAst,
}

impl TangentField {
    pub fn new(mode: FieldMode, a1: &str, a2: &str) -> Result<Self> {
        Ok(TangentField {
            mode,
            a1: ExpressionAst::parse_w(a1)?,
            a2: ExpressionAst::parse_w(a2)?,
        })
    }

    pub fn raw(&self, w: P2) -> [f64; 2] {
        [self.a1.eval_lossy(&w), self.a2.eval_lossy(&w)]
    }

    /// (u1, u2), or `None` at a zero.
    pub fn unit(&self, w: P2) -> Option<[f64; 2]> {
        let [a, b] = self.raw(w);
        let n = a.hypot(b);
        if n > 0.0 && n.is_finite() {
            Some([a / n, b / n])
        } else {
            None
        }
    }

    /// Angle ψ of u against e¹.
    pub fn angle(&self, w: P2) -> Option<f64> {
        let [a, b] = self.raw(w);
        if (a == 0.0 && b == 0.0) || !a.is_finite() || !b.is_finite() {
            None
        } else {
            Some(b.atan2(a))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiteKind {
    Interior,
    BoundaryVertex,
    BoundarySmooth,
}

impl SiteKind {
    pub fn is_boundary(self) -> bool {
        self != SiteKind::Interior
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Zero {
    pub point: P2,
    pub kind: SiteKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    /// Separation radius: pairwise distances and distances of interior
    /// zeros to ∂Ω all exceed 2·r_sep.
    pub r_sep: f64,
}

const GRID: usize = 48;

fn lm_step(f: &TangentField, w: P2, h: f64) -> P2 {
    let a = f.raw(w);
    let d1a = f.raw([w[0] + h, w[1]]);
    let d1b = f.raw([w[0] - h, w[1]]);
    let d2a = f.raw([w[0], w[1] + h]);
    let d2b = f.raw([w[0], w[1] - h]);
    // J[i][j] = ∂a_i/∂ω_j
    let j = [
        [(d1a[0] - d1b[0]) / (2.0 * h), (d2a[0] - d2b[0]) / (2.0 * h)],
        [(d1a[1] - d1b[1]) / (2.0 * h), (d2a[1] - d2b[1]) / (2.0 * h)],
    ];
    let jtj = [
        [
            j[0][0] * j[0][0] + j[1][0] * j[1][0],
            j[0][0] * j[0][1] + j[1][0] * j[1][1],
        ],
        [
            j[0][1] * j[0][0] + j[1][1] * j[1][0],
            j[0][1] * j[0][1] + j[1][1] * j[1][1],
        ],
    ];
    let jta = [
        j[0][0] * a[0] + j[1][0] * a[1],
        j[0][1] * a[0] + j[1][1] * a[1],
    ];
    let lambda = 1e-12 * (jtj[0][0] + jtj[1][1]) + 1e-300;
    let m = [
        [jtj[0][0] + lambda, jtj[0][1]],
        [jtj[1][0], jtj[1][1] + lambda],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        (m[1][1] * jta[0] - m[0][1] * jta[1]) / det,
        (-m[1][0] * jta[0] + m[0][0] * jta[1]) / det,
    ]
}

fn polish(f: &TangentField, start: P2, h: f64, tol: f64, stop: f64) -> Option<P2> {
    let mut w = start;
    for _ in 0..300 {
        let s = lm_step(f, w, h);
        if !(s[0].is_finite() && s[1].is_finite()) {
            break;
        }
        w = [w[0] - s[0], w[1] - s[1]];
        if s[0].hypot(s[1]) <= stop {
            break;
        }
    }
    let a = f.raw(w);
    (a[0].hypot(a[1]) <= tol).then_some(w)
}

/// Finds the zero set of A on Ω̄: sign-change screening on a grid, then
/// damped Newton polish. `vertices` are the boundary corner points used to
/// classify boundary zeros.
pub fn locate_zeros(field: &TangentField, chart: &SurfaceChart, vertices: &[P2]) -> Result<ZeroSet> {
    let dom = chart.domain();
    let (lo, hi) = dom.bbox();
    let diam = dom.diameter();
    let hx = (hi[0] - lo[0]) / GRID as f64;
    let hy = (hi[1] - lo[1]) / GRID as f64;
    let cell = hx.hypot(hy);
    let in_tol = 1e-9 * diam;

    let mut amax: f64 = 0.0;
    for i in 0..=GRID {
        for j in 0..=GRID {
            let a = field.raw([lo[0] + i as f64 * hx, lo[1] + j as f64 * hy]);
            let n = a[0].hypot(a[1]);
            if n.is_finite() {
                amax = amax.max(n);
            }
        }
    }
    if amax == 0.0 {
        return Err(Error::CurveOfZeros(lo[0], lo[1]));
    }
    let ztol = 1e-10 * amax;

    let mut found: Vec<P2> = Vec::new();
    for i in 0..GRID {
        for j in 0..GRID {
            let x0 = lo[0] + i as f64 * hx;
            let y0 = lo[1] + j as f64 * hy;
            let pts: Vec<P2> = (0..3)
                .flat_map(|a| (0..3).map(move |b| [x0 + 0.5 * a as f64 * hx, y0 + 0.5 * b as f64 * hy]))
                .collect();
            if !pts.iter().any(|&p| dom.contains(p, in_tol)) {
                continue;
            }
            let vals: Vec<[f64; 2]> = pts.iter().map(|&p| field.raw(p)).collect();
            let spans = |k: usize| {
                let mn = vals.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
                let mx = vals.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
                mn <= 0.0 && mx >= 0.0
            };
            if !(spans(0) && spans(1)) {
                continue;
            }
            if vals.iter().all(|v| v[0].hypot(v[1]) <= ztol) {
                return Err(Error::CurveOfZeros(x0, y0));
            }
            let start = [x0 + 0.5 * hx, y0 + 0.5 * hy];
            if let Some(z) = polish(field, start, 1e-7 * diam, ztol, 1e-15 * diam) {
                if dom.contains(z, in_tol) && !found.iter().any(|p| dist(*p, z) < 1e-7 * diam) {
                    found.push(z);
                }
            }
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));

    for a in 0..found.len() {
        for b in a + 1..found.len() {
            let d = dist(found[a], found[b]);
            if d < 2.0 * cell {
                let mid = [(found[a][0] + found[b][0]) / 2.0, (found[a][1] + found[b][1]) / 2.0];
                let m = field.raw(mid);
                if m[0].hypot(m[1]) <= 1e-6 * amax {
                    return Err(Error::CurveOfZeros(mid[0], mid[1]));
                }
                return Err(Error::ZeroNotIsolated(
                    found[a][0], found[a][1], found[b][0], found[b][1],
                ));
            }
        }
    }

    let zeros: Vec<Zero> = found
        .iter()
        .map(|&p| Zero {
            point: p,
            kind: classify(dom, vertices, p),
        })
        .collect();
    let r_sep = separation_radius(dom, &zeros);
    Ok(ZeroSet { zeros, r_sep })
}

pub fn classify(dom: &Domain, vertices: &[P2], p: P2) -> SiteKind {
    let tol = 1e-7 * dom.diameter();
    if dom.boundary_distance(p) > tol {
        SiteKind::Interior
    } else if vertices.iter().any(|&v| dist(v, p) <= tol) {
        SiteKind::BoundaryVertex
    } else {
        SiteKind::BoundarySmooth
    }
}

pub fn separation_radius(dom: &Domain, zeros: &[Zero]) -> f64 {
    let mut r = 0.25 * dom.diameter();
    for (a, za) in zeros.iter().enumerate() {
        if za.kind == SiteKind::Interior {
            r = r.min(0.5 * dom.boundary_distance(za.point));
        }
        for zb in &zeros[a + 1..] {
            r = r.min(0.5 * dist(za.point, zb.point));
        }
    }
    0.999 * r
}

pub(crate) fn dist(a: P2, b: P2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A parameter-space contour for winding computations.
#[derive(Debug, Clone)]
pub enum Loop {
    /// Full counterclockwise circle.
    Circle { center: P2, radius: f64 },
    /// Open arc, counterclockwise when `end > start`.
    Arc {
        center: P2,
        radius: f64,
        start: f64,
        end: f64,
    },
    /// Chain of segments closed on the surface (possibly only up to a chart
    /// seam in parameter space).
    Path(Vec<Segment>),
}

impl Loop {
    pub fn segments(&self) -> Vec<Segment> {
        match self {
            Loop::Circle { center, radius } => vec![Segment::Arc {
                center: *center,
                radius: *radius,
                start: 0.0,
                end: 2.0 * PI,
            }],
            Loop::Arc {
                center,
                radius,
                start,
                end,
            } => vec![Segment::Arc {
                center: *center,
                radius: *radius,
                start: *start,
                end: *end,
            }],
            Loop::Path(s) => s.clone(),
        }
    }

    pub fn is_closed(&self) -> bool {
        !matches!(self, Loop::Arc { .. })
    }

    pub fn reversed(&self) -> Loop {
        match self {
            Loop::Circle { center, radius } => Loop::Path(vec![Segment::Arc {
                center: *center,
                radius: *radius,
                start: 2.0 * PI,
                end: 0.0,
            }]),
            Loop::Arc {
                center,
                radius,
                start,
                end,
            } => Loop::Arc {
                center: *center,
                radius: *radius,
                start: *end,
                end: *start,
            },
            Loop::Path(s) => Loop::Path(s.iter().rev().map(reverse_segment).collect()),
        }
    }
}

fn reverse_segment(s: &Segment) -> Segment {
    match s {
        Segment::Line { from, to } => Segment::Line { from: *to, to: *from },
        Segment::Arc {
            center,
            radius,
            start,
            end,
        } => Segment::Arc {
            center: *center,
            radius: *radius,
            start: *end,
            end: *start,
        },
        Segment::Expression { w1, w2, t0, t1 } => Segment::Expression {
            w1: w1.clone(),
            w2: w2.clone(),
            t0: *t1,
            t1: *t0,
        },
    }
}

/// Wraps an angle increment into (−period/2, period/2].
pub fn wrap(d: f64, period: f64) -> f64 {
    d - period * (d / period).round()
}

const INITIAL_STEPS: usize = 256;
const MAX_DEPTH: u32 = 40;

/// Unwrapped accumulation of an angle function along t ∈ [0, 1]. Steps are
/// halved until each increment is below period/8; a step still at or above
/// period/4 (π/2 for vectors) at maximum depth raises `UnresolvedWinding`.
pub(crate) fn accumulate<F>(angle: &F, at: &dyn Fn(f64) -> P2, period: f64) -> Result<(f64, f64, f64)>
where
    F: Fn(f64) -> Option<f64>,
{
    let eval = |t: f64| -> Result<f64> {
        angle(t).ok_or_else(|| {
            let p = at(t);
            Error::UnresolvedWinding(p[0], p[1])
        })
    };
    fn refine<F: Fn(f64) -> Option<f64>>(
        angle: &F,
        at: &dyn Fn(f64) -> P2,
        period: f64,
        ta: f64,
        tb: f64,
        fa: f64,
        fb: f64,
        depth: u32,
    ) -> Result<f64> {
        let d = wrap(fb - fa, period);
        if d.abs() < period / 8.0 {
            return Ok(d);
        }
        if depth >= MAX_DEPTH {
            if d.abs() < period / 4.0 {
                return Ok(d);
            }
            let p = at(ta);
            return Err(Error::UnresolvedWinding(p[0], p[1]));
        }
        let tm = 0.5 * (ta + tb);
        let fm = angle(tm).ok_or_else(|| {
            let p = at(tm);
            Error::UnresolvedWinding(p[0], p[1])
        })?;
        Ok(refine(angle, at, period, ta, tm, fa, fm, depth + 1)?
            + refine(angle, at, period, tm, tb, fm, fb, depth + 1)?)
    }
    let first = eval(0.0)?;
    let mut prev = first;
    let mut total = 0.0;
    for k in 1..=INITIAL_STEPS {
        let ta = (k - 1) as f64 / INITIAL_STEPS as f64;
        let tb = k as f64 / INITIAL_STEPS as f64;
        let next = eval(tb)?;
        total += refine(angle, at, period, ta, tb, prev, next, 0)?;
        prev = next;
    }
    Ok((total, first, prev))
}

/// Result of a winding computation.
#[derive(Debug, Clone, Serialize)]
pub struct IndexResult {
    /// (1/2π) × accumulated angle, plus any frame correction.
    pub raw: f64,
    /// Nearest admissible value for closed loops.
    #[serde(serialize_with = "crate::report::ser_opt_rational")]
    pub snapped: Option<Rational64>,
    pub snap_distance: f64,
    /// (1/2π)∮F·dβ, added for loops around coordinate singularities.
    pub frame_correction: f64,
}

/// Frame rotation (1/2π)∮(F1 dω1 + F2 dω2) along the segments.
pub fn frame_rotation(chart: &SurfaceChart, segments: &[Segment]) -> Result<f64> {
    let rule = GaussLegendre::new(24);
    let panels = 16;
    let mut acc = 0.0;
    for seg in segments {
        for p in 0..panels {
            let lo = p as f64 / panels as f64;
            let hi = (p + 1) as f64 / panels as f64;
            for (t, w) in rule.on(lo, hi) {
                let f = chart.local(seg.point(t))?.f;
                let d = seg.deriv(t);
                acc += w * (f[0] * d[0] + f[1] * d[1]);
            }
        }
    }
    Ok(acc / (2.0 * PI))
}

/// Winding of u along a loop, (1/2π)∮(u1 du2 − u2 du1). In director mode
/// the angle is tracked modulo π. With `degenerate` set, the loop encircles
/// a coordinate singularity and the frame's own rotation is added.
pub fn index_around(
    field: &TangentField,
    chart: &SurfaceChart,
    lp: &Loop,
    degenerate: bool,
) -> Result<IndexResult> {
    let period = field.mode.period();
    let segments = lp.segments();
    let mut total = 0.0;
    let mut first_angle = None;
    let mut last_angle: Option<f64> = None;
    for seg in &segments {
        let at = |t: f64| seg.point(t);
        let angle = |t: f64| field.angle(seg.point(t));
        let (inc, a0, a1) = accumulate(&angle, &at, period)?;
        if let Some(prev) = last_angle {
            total += wrap(a0 - prev, period);
        } else {
            first_angle = Some(a0);
        }
        total += inc;
        last_angle = Some(a1);
    }
    if lp.is_closed() {
        total += wrap(first_angle.unwrap() - last_angle.unwrap(), period);
    }
    let frame_correction = if degenerate {
        frame_rotation(chart, &segments)?
    } else {
        0.0
    };
    let raw = total / (2.0 * PI) + frame_correction;
    let (snapped, snap_distance) = if lp.is_closed() {
        let s = snap(raw, field.mode.step());
        (Some(s), (raw - to_f64(s)).abs())
    } else {
        (None, 0.0)
    };
    Ok(IndexResult {
        raw,
        snapped,
        snap_distance,
        frame_correction,
    })
}

/// The arc of the circle |ω − center| = radius lying in Ω, counterclockwise.
pub fn boundary_arc(dom: &Domain, center: P2, radius: f64) -> Result<Loop> {
    const N: usize = 1440;
    let pt = |a: f64| [center[0] + radius * a.cos(), center[1] + radius * a.sin()];
    let inside: Vec<bool> = (0..N)
        .map(|k| dom.contains(pt(2.0 * PI * (k as f64 + 0.5) / N as f64), 0.0))
        .collect();
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 || count == N {
        return Err(Error::spec(
            format!("zero at ({:.6}, {:.6})", center[0], center[1]),
            "boundary arc around the site is empty or a full circle",
        ));
    }
    // start of the inside run: inside[k] && !inside[k-1]
    let starts: Vec<usize> = (0..N).filter(|&k| inside[k] && !inside[(k + N - 1) % N]).collect();
    if starts.len() != 1 {
        return Err(Error::spec(
            format!("zero at ({:.6}, {:.6})", center[0], center[1]),
            "circle around the boundary site meets the domain in several arcs",
        ));
    }
    let k0 = starts[0];
    let ang = |k: isize| 2.0 * PI * (k as f64 + 0.5) / N as f64;
    let bisect = |mut a_in: f64, mut a_out: f64| {
        for _ in 0..60 {
            let m = 0.5 * (a_in + a_out);
            if dom.contains(pt(m), 0.0) {
                a_in = m;
            } else {
                a_out = m;
            }
        }
        0.5 * (a_in + a_out)
    };
    let start = bisect(ang(k0 as isize), ang(k0 as isize - 1));
    let last_in = k0 as isize + count as isize - 1;
    let end = bisect(ang(last_in), ang(last_in + 1));
    Ok(Loop::Arc {
        center,
        radius,
        start,
        end,
    })
}

/// Boundary defect strength in the minus convention, m − τ/2π.
pub fn boundary_defect_strength(tau: f64, m: f64) -> f64 {
    m - tau / (2.0 * PI)
}

/// The same in the plus convention, m + τ/2π.
pub fn boundary_defect_strength_plus(tau: f64, m: f64) -> f64 {
    m + tau / (2.0 * PI)
}

/// Exact strength m − a/2 for τ = aπ.
pub fn boundary_defect_strength_exact(tau_over_pi: Rational64, m: Rational64) -> Rational64 {
    m - tau_over_pi / 2
}

/// A located defect with its winding data.
#[derive(Debug, Clone, Serialize)]
pub struct DefectSite {
    pub location: P2,
    pub kind: SiteKind,
    pub degenerate: bool,
    pub loop_radius: Option<f64>,
    pub index: IndexResult,
    /// Exterior angle at the site (0 at smooth boundary points).
    pub tau: Option<f64>,
    /// Interior wedge angle π − τ.
    pub wedge: Option<f64>,
    /// Half-integer decomposition of a boundary strength.
    #[serde(serialize_with = "crate::report::ser_opt_rational")]
    pub m: Option<Rational64>,
    /// m − τ/2π.
    pub strength_minus: f64,
    /// m + τ/2π.
    pub strength_plus: f64,
}

impl DefectSite {
    /// Strength used by the rate functional.
    pub fn strength(&self) -> f64 {
        if self.kind.is_boundary() {
            self.strength_minus
        } else {
            self.index.snapped.map(to_f64).unwrap_or(self.index.raw)
        }
    }
}

/// Builds a site from a loop: interior sites get a snapped index, boundary
/// sites an arc index together with m = nearest half-integer to
/// (arc index + τ/2π).
pub fn make_site(
    field: &TangentField,
    chart: &SurfaceChart,
    location: P2,
    kind: SiteKind,
    lp: &Loop,
    degenerate: bool,
    tau: f64,
) -> Result<DefectSite> {
    let index = index_around(field, chart, lp, degenerate)?;
    let loop_radius = match lp {
        Loop::Circle { radius, .. } | Loop::Arc { radius, .. } => Some(*radius),
        Loop::Path(_) => None,
    };
    if kind.is_boundary() {
        let m = snap(index.raw + tau / (2.0 * PI), Rational64::new(1, 2));
        let mf = to_f64(m);
        Ok(DefectSite {
            location,
            kind,
            degenerate,
            loop_radius,
            index,
            tau: Some(tau),
            wedge: Some(PI - tau),
            m: Some(m),
            strength_minus: boundary_defect_strength(tau, mf),
            strength_plus: boundary_defect_strength_plus(tau, mf),
        })
    } else {
        let s = index.snapped.map(to_f64).unwrap_or(index.raw);
        Ok(DefectSite {
            location,
            kind,
            degenerate,
            loop_radius,
            index,
            tau: None,
            wedge: None,
            m: None,
            strength_minus: s,
            strength_plus: s,
        })
    }
}
