//! Euler characteristic and the defect conservation law
//! χ = Στ/2π + (1/2π)∮dθ + Σ interior indices + Σ boundary arc indices.

use std::f64::consts::PI;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::boundary::{exterior_angles, BoundaryComponent};
use crate::error::{Error, Result};
use crate::fields::{
    accumulate, boundary_arc, dist, locate_zeros, make_site, snap, to_f64, DefectSite,
    FieldMode, Loop, SiteKind, TangentField,
};
use crate::geometry::{SurfaceChart, P2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangulation {
    pub faces: i64,
    pub edges: i64,
    pub vertices: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyDescriptor {
    pub genus: u32,
    pub boundary_components: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangulation: Option<Triangulation>,
}

impl TopologyDescriptor {
    pub fn new(genus: u32, boundary_components: u32) -> Self {
        TopologyDescriptor {
            genus,
            boundary_components,
            triangulation: None,
        }
    }

    pub fn disk() -> Self {
        Self::new(0, 1)
    }

    pub fn sphere() -> Self {
        Self::new(0, 0)
    }
}

/// χ = F − E + V when a triangulation is given, else 2 − 2g − M; both must
/// agree when both are present.
pub fn euler_characteristic(d: &TopologyDescriptor) -> Result<i64> {
    let descriptor = 2 - 2 * d.genus as i64 - d.boundary_components as i64;
    match d.triangulation {
        Some(t) => {
            let tri = t.faces - t.edges + t.vertices;
            if tri != descriptor {
                return Err(Error::InconsistentTopology {
                    triangulated: tri,
                    descriptor,
                });
            }
            Ok(tri)
        }
        None => Ok(descriptor),
    }
}

/// Recognizes `x` as pπ/q with q ≤ 48.
pub fn pi_fraction(x: f64) -> Option<Rational64> {
    let r = x / PI;
    for q in 1..=48i64 {
        let p = (r * q as f64).round();
        if (r * q as f64 - p).abs() < 1e-9 {
            return Some(Rational64::new(p as i64, q));
        }
    }
    None
}

/// Direction angle of γ′ in the frame (e¹, e²).
fn tangent_angle(chart: &SurfaceChart, seg: &crate::boundary::Segment, t: f64) -> f64 {
    let w = seg.point(t);
    let d = seg.deriv(t);
    let [l1, l2] = chart.metric_lengths(w);
    (l2 * d[1]).atan2(l1 * d[0])
}

/// Splits a component into smooth pieces (segment, t_a, t_b), leaving out
/// the given arclength intervals.
fn pieces(
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    excluded: &[(f64, f64)],
) -> Vec<(usize, f64, f64)> {
    let total = component.total_length();
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in excluded {
        if a < 0.0 {
            cuts.push((a + total, total));
            cuts.push((0.0, b));
        } else if b > total {
            cuts.push((a, total));
            cuts.push((0.0, b - total));
        } else {
            cuts.push((a, b));
        }
    }
    let starts = component.junction_arclengths().to_vec();
    let mut out = Vec::new();
    for k in 0..component.segments.len() {
        let s0 = starts[k];
        let s1 = if k + 1 < starts.len() { starts[k + 1] } else { total };
        let mut keep = vec![(s0, s1)];
        for &(a, b) in &cuts {
            let mut next = Vec::new();
            for (lo, hi) in keep {
                if b <= lo || a >= hi {
                    next.push((lo, hi));
                    continue;
                }
                if a > lo {
                    next.push((lo, a));
                }
                if b < hi {
                    next.push((b, hi));
                }
            }
            keep = next;
        }
        for (lo, hi) in keep {
            if hi - lo <= 1e-14 * total {
                continue;
            }
            let ta = if lo == s0 { 0.0 } else { component.locate(chart, lo).1 };
            let tb = if hi == s1 { 1.0 } else { component.locate(chart, hi).1 };
            out.push((k, ta, tb));
        }
    }
    out
}

/// ∮ dθ along the smooth parts of a component, θ the angle from u to γ′.
/// Tangent jumps at vertices are left to Στ, and field jumps at boundary
/// zeros are skipped via `excluded` arclength intervals.
pub fn boundary_angle_integral(
    field: &TangentField,
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    excluded: &[(f64, f64)],
) -> Result<f64> {
    let period = field.mode.period();
    let mut total = 0.0;
    for (k, ta, tb) in pieces(component, chart, excluded) {
        let seg = &component.segments[k];
        let par = |u: f64| ta + u * (tb - ta);
        let at = |u: f64| seg.point(par(u));
        let angle = |u: f64| {
            let t = par(u);
            field
                .angle(seg.point(t))
                .map(|psi| tangent_angle(chart, seg, t) - psi)
        };
        total += accumulate(&angle, &at, period)?.0;
    }
    Ok(total)
}

/// Position of a parameter point on a component: (segment, t, arclength).
pub fn find_on_component(
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    p: P2,
    tol: f64,
) -> Option<(usize, f64, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    for (k, seg) in component.segments.iter().enumerate() {
        const N: usize = 400;
        let mut bt = 0.0;
        let mut bd = f64::INFINITY;
        for i in 0..=N {
            let t = i as f64 / N as f64;
            let d = dist(seg.point(t), p);
            if d < bd {
                bd = d;
                bt = t;
            }
        }
        let (mut lo, mut hi) = ((bt - 1.0 / N as f64).max(0.0), (bt + 1.0 / N as f64).min(1.0));
        for _ in 0..100 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if dist(seg.point(m1), p) < dist(seg.point(m2), p) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        let d = dist(seg.point(t), p);
        if best.is_none_or(|b| d < b.0) {
            best = Some((d, k, t));
        }
    }
    let (d, k, t) = best?;
    (d <= tol).then(|| (k, t, component.arclength_at(chart, k, t)))
}

/// Arclength interval of the component inside the parameter disk
/// |ω − p| < r, around arclength `s0`.
fn exclusion_interval(
    component: &BoundaryComponent,
    chart: &SurfaceChart,
    p: P2,
    r: f64,
    s0: f64,
) -> (f64, f64) {
    let total = component.total_length();
    let ds = total / 2000.0;
    let far = |s: f64| dist(component.param_point_at(chart, s), p) >= r;
    let bound = |dir: f64| {
        let mut inside = s0;
        let mut k = 1;
        while k <= 1000 {
            let s = s0 + dir * ds * k as f64;
            if far(s) {
                let mut out = s;
                for _ in 0..60 {
                    let m = 0.5 * (inside + out);
                    if far(m) {
                        out = m;
                    } else {
                        inside = m;
                    }
                }
                return 0.5 * (inside + out);
            }
            inside = s;
            k += 1;
        }
        s0 + dir * 0.5 * total
    };
    (bound(-1.0), bound(1.0))
}

/// A zero supplied by the user, possibly at a coordinate singularity.
#[derive(Debug, Clone)]
pub struct DeclaredZero {
    pub at: P2,
    pub lp: Option<Loop>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexTerm {
    pub point: P2,
    pub tau: f64,
    /// τ/π when it is a recognizable rational.
    #[serde(serialize_with = "crate::report::ser_opt_rational")]
    pub tau_over_pi: Option<Rational64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentTerms {
    pub component: usize,
    pub length: f64,
    pub vertices: Vec<VertexTerm>,
    pub tau_sum: f64,
    pub angle_integral: f64,
    pub arc_index_sum: f64,
    /// (Στ + ∮dθ)/2π + Σ arc indices for this component.
    pub total: f64,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub total_snapped: Rational64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConservationReport {
    pub chi: i64,
    pub mode: FieldMode,
    pub components: Vec<ComponentTerms>,
    pub sites: Vec<DefectSite>,
    pub separation_radius: f64,
    /// Στ/2π over all components.
    pub tau_term: f64,
    /// (1/2π)∮dθ over all components.
    pub angle_term: f64,
    pub interior_index_sum: f64,
    pub arc_index_sum: f64,
    pub residual: f64,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub residual_snapped: Rational64,
    pub max_snap_distance: f64,
}

/// Vertices (|τ| > 1e-9) of every component as (component, point, τ).
pub fn boundary_vertices(
    chart: &SurfaceChart,
    components: &[BoundaryComponent],
) -> Result<Vec<(usize, P2, f64)>> {
    let mut out = Vec::new();
    for (c, comp) in components.iter().enumerate() {
        for v in exterior_angles(comp, chart, c)? {
            if v.tau.abs() > 1e-9 {
                out.push((c, v.point, v.tau));
            }
        }
    }
    Ok(out)
}

/// Locates zeros, merges declared ones, and evaluates every site's index.
/// Boundary sites are those lying on a boundary component.
pub fn collect_sites(
    field: &TangentField,
    chart: &SurfaceChart,
    components: &[BoundaryComponent],
    declared: &[DeclaredZero],
) -> Result<(Vec<(DefectSite, Option<usize>)>, f64)> {
    let dom = chart.domain();
    let diam = dom.diameter();
    let tol = 1e-7 * diam;
    let vertices = boundary_vertices(chart, components)?;
    let vpoints: Vec<P2> = vertices.iter().map(|v| v.1).collect();
    let found = locate_zeros(field, chart, &vpoints)?;

    let mut points: Vec<(P2, Option<Loop>, bool)> = found
        .zeros
        .iter()
        .map(|z| (z.point, None, false))
        .collect();
    for d in declared {
        match points.iter_mut().find(|p| dist(p.0, d.at) <= 1e-6 * diam) {
            Some(p) => {
                p.1 = d.lp.clone();
                p.2 = d.degenerate;
            }
            None => points.push((d.at, d.lp.clone(), d.degenerate)),
        }
    }

    let mut r_sep = 0.25 * diam;
    for (p, _, _) in &points {
        let d = dom.boundary_distance(*p);
        if d > tol {
            r_sep = r_sep.min(0.5 * d);
        }
    }
    for (a, pa) in points.iter().enumerate() {
        for pb in &points[a + 1..] {
            r_sep = r_sep.min(0.5 * dist(pa.0, pb.0));
        }
    }
    let r_sep = (0.999 * r_sep).min(found.r_sep);

    let mut sites = Vec::with_capacity(points.len());
    for (p, lp, degenerate) in points {
        let on = components
            .iter()
            .enumerate()
            .find_map(|(c, comp)| find_on_component(comp, chart, p, tol).map(|hit| (c, hit)));
        let (kind, tau, comp) = match on {
            None => (SiteKind::Interior, 0.0, None),
            Some((c, _)) => match vertices.iter().find(|v| v.0 == c && dist(v.1, p) <= tol) {
                Some(v) => (SiteKind::BoundaryVertex, v.2, Some(c)),
                None => (SiteKind::BoundarySmooth, 0.0, Some(c)),
            },
        };
        let lp = match lp {
            Some(l) => l,
            None if degenerate => {
                return Err(Error::spec(
                    format!("field.zeros at ({:.6}, {:.6})", p[0], p[1]),
                    "a degenerate zero needs an explicit loop",
                ))
            }
            None if kind.is_boundary() => boundary_arc(dom, p, 0.5 * r_sep)?,
            None => Loop::Circle {
                center: p,
                radius: 0.5 * r_sep,
            },
        };
        let site = make_site(field, chart, p, kind, &lp, degenerate, tau)?;
        sites.push((site, comp));
    }
    Ok((sites, r_sep))
}

/// Itemized residual χ − Στ/2π − (1/2π)∮dθ − Σ indices, both raw and with
/// every quantized total snapped to its admissible lattice.
pub fn conservation_residual(
    chart: &SurfaceChart,
    components: &[BoundaryComponent],
    field: &TangentField,
    declared: &[DeclaredZero],
    chi: i64,
) -> Result<ConservationReport> {
    let (sites, r_sep) = collect_sites(field, chart, components, declared)?;
    let step = field.mode.step();
    let mut terms = Vec::with_capacity(components.len());
    for (c, comp) in components.iter().enumerate() {
        let vertices: Vec<VertexTerm> = exterior_angles(comp, chart, c)?
            .into_iter()
            .filter(|v| v.tau.abs() > 1e-9)
            .map(|v| VertexTerm {
                point: v.point,
                tau: v.tau,
                tau_over_pi: pi_fraction(v.tau),
            })
            .collect();
        let tau_sum: f64 = vertices.iter().map(|v| v.tau).sum();
        let mut excluded = Vec::new();
        let mut arc_index_sum = 0.0;
        for (site, sc) in &sites {
            if *sc != Some(c) {
                continue;
            }
            let r = site.loop_radius.ok_or_else(|| {
                Error::spec("field.zeros", "boundary sites need an arc loop")
            })?;
            let (_, _, s0) = find_on_component(comp, chart, site.location, f64::INFINITY).unwrap();
            excluded.push(exclusion_interval(comp, chart, site.location, r, s0));
            arc_index_sum += site.index.raw;
        }
        let angle_integral = boundary_angle_integral(field, comp, chart, &excluded)?;
        let total = (tau_sum + angle_integral) / (2.0 * PI) + arc_index_sum;
        terms.push(ComponentTerms {
            component: c,
            length: comp.total_length(),
            vertices,
            tau_sum,
            angle_integral,
            arc_index_sum,
            total,
            total_snapped: snap(total, step),
        });
    }
    let tau_term: f64 = terms.iter().map(|t| t.tau_sum).sum::<f64>() / (2.0 * PI);
    let angle_term: f64 = terms.iter().map(|t| t.angle_integral).sum::<f64>() / (2.0 * PI);
    let arc_index_sum: f64 = terms.iter().map(|t| t.arc_index_sum).sum();
    let interior: Vec<&DefectSite> = sites
        .iter()
        .filter(|(s, _)| !s.kind.is_boundary())
        .map(|(s, _)| s)
        .collect();
    let interior_index_sum: f64 = interior.iter().map(|s| s.index.raw).sum();
    let residual = chi as f64 - tau_term - angle_term - interior_index_sum - arc_index_sum;

    let mut snapped = Rational64::from_integer(chi);
    let mut max_snap_distance: f64 = 0.0;
    for t in &terms {
        snapped -= t.total_snapped;
        max_snap_distance = max_snap_distance.max((t.total - to_f64(t.total_snapped)).abs());
    }
    for s in &interior {
        snapped -= s.index.snapped.unwrap();
        max_snap_distance = max_snap_distance.max(s.index.snap_distance);
    }
    Ok(ConservationReport {
        chi,
        mode: field.mode,
        components: terms,
        sites: sites.into_iter().map(|(s, _)| s).collect(),
        separation_radius: r_sep,
        tau_term,
        angle_term,
        interior_index_sum,
        arc_index_sum,
        residual,
        residual_snapped: snapped,
        max_snap_distance,
    })
}
