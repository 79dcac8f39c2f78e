//! The five analyses behind the command line, returning text and JSON.

use std::f64::consts::PI;

use num_rational::Rational64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundary::{exterior_angles, gauss_bonnet_residual};
use crate::conservation::{boundary_vertices, collect_sites, conservation_residual, pi_fraction};
use crate::energy::{divergence_slope, EnergySweep, Schedule};
use crate::error::{Error, Result};
use crate::fields::{boundary_arc, dist, make_site, DefectSite, FieldMode, SiteKind};
use crate::geometry::{holder_fit, HolderData, SurfaceChart, P2};
use crate::predictor::{describe, enumerate_branches};
use crate::quadrature::QuadratureLevel;
use crate::rates::{
    boundary_rate, interior_rate, rate_table, rate_table_csv, weight_from_holder, QExponent, RateWeight,
    WeightSource,
};
use crate::report::rational_string;
use crate::spec::{Problem, SCHEMA};

/// Command-line overrides of the specification.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<FieldMode>,
    pub bound: Option<Rational64>,
    pub mod_symmetry: bool,
    pub q_exponent: Option<QExponent>,
    pub quadrature: Option<QuadratureLevel>,
    pub levels: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, p: &mut Problem) {
        if let Some(m) = self.mode {
            p.mode = m;
        }
        if let Some(b) = self.bound {
            p.predictor.bound = Some(b);
        }
        if self.mod_symmetry {
            p.predictor.mod_symmetry = true;
        }
        if let Some(e) = self.q_exponent {
            p.predictor.q_exponent = e;
        }
        if let Some(q) = self.quadrature {
            p.quadrature = q;
        }
        if let Some(l) = self.levels {
            p.predictor.levels = l;
        }
    }
}

/// Result of one command.
#[derive(Debug, Clone)]
pub struct Output {
    pub text: String,
    pub json: Value,
    pub csv: Option<String>,
}

fn header(command: &str, p: &Problem) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("name".into(), json!(p.name));
    m
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

fn holder_rho(p: &Problem) -> f64 {
    p.holder_radius.unwrap_or(0.25 * p.chart.domain().diameter())
}

/// q at a site: metric ratio where the chart is regular, Hölder ratio at a
/// degenerate point.
pub fn site_weight(chart: &SurfaceChart, at: P2, rho: f64) -> Result<(RateWeight, Option<HolderData>)> {
    let l = chart.metric_lengths(at);
    let (lo, hi) = (l[0].min(l[1]), l[0].max(l[1]));
    if hi > chart.tol_deg() {
        return Ok((
            RateWeight {
                q: lo / hi,
                source: WeightSource::MetricRatio,
                factor: 1.0,
            },
            None,
        ));
    }
    let h = holder_fit(chart, at, rho)?;
    Ok((weight_from_holder(&h, chart.tol_deg())?, Some(h)))
}

pub fn analyze(p: &Problem) -> Result<Output> {
    let chart = &p.chart;
    // the balance is undefined when the boundary runs through a degenerate point
    let gb = match gauss_bonnet_residual(chart, &p.components, p.chi, p.quadrature) {
        Ok(gb) => Some(gb),
        Err(Error::DegeneratePoint(..)) => None,
        Err(e) => return Err(e),
    };
    let mut comps = Vec::new();
    let mut text = format!(
        "chart: {}\nchi = {}\nboundary components: {}\n",
        chart.family().name(),
        p.chi,
        p.components.len()
    );
    for (c, comp) in p.components.iter().enumerate() {
        let angles = match exterior_angles(comp, chart, c) {
            Ok(a) => a,
            Err(Error::DegeneratePoint(..)) => vec![],
            Err(e) => return Err(e),
        };
        let verts: Vec<Value> = angles
            .into_iter()
            .filter(|v| v.tau.abs() > 1e-9)
            .map(|v| {
                json!({
                    "point": v.point,
                    "arclength": v.arclength,
                    "tau": v.tau,
                    "tau_over_pi": pi_fraction(v.tau).map(|r| rational_string(&r)),
                })
            })
            .collect();
        text.push_str(&format!(
            "  component {c}: length {:.9}, {} vertices\n",
            comp.total_length(),
            verts.len()
        ));
        comps.push(json!({"component": c, "length": comp.total_length(), "vertices": verts}));
    }
    match &gb {
        Some(gb) => text.push_str(&format!(
            "Gauss-Bonnet: 2*pi*chi = {:.12}\n  boundary kg = {:.12}\n  area K = {:.12}\n  exterior angles = {:.12}\n  residual = {:.3e} (estimate {:.3e})\n",
            gb.two_pi_chi, gb.kg_integral, gb.curvature_integral, gb.exterior_angle_sum, gb.residual, gb.error_estimate
        )),
        None => text.push_str("Gauss-Bonnet: undefined, the boundary meets a degenerate point\n"),
    }
    let mut degenerate = Vec::new();
    for &d in chart.degenerate_points() {
        let h = holder_fit(chart, d, holder_rho(p))?;
        let w = weight_from_holder(&h, chart.tol_deg())?;
        text.push_str(&format!(
            "degenerate point ({:.6}, {:.6}): alpha = {:.6}, h- = {:.6}, h+ = {:.6}, q = {:.6}\n",
            d[0], d[1], h.alpha, h.h_minus, h.h_plus, w.q
        ));
        degenerate.push(json!({"point": d, "holder": to_value(&h), "weight": to_value(&w)}));
    }
    let mut m = header("analyze", p);
    m.insert("chart".into(), json!(chart.family().name()));
    m.insert("chi".into(), json!(p.chi));
    m.insert("quadrature".into(), to_value(&p.quadrature));
    m.insert("components".into(), Value::Array(comps));
    m.insert("gauss_bonnet".into(), to_value(&gb));
    m.insert("degenerate_points".into(), Value::Array(degenerate));
    Ok(Output {
        text,
        json: Value::Object(m),
        csv: None,
    })
}

fn kind_name(k: SiteKind) -> &'static str {
    match k {
        SiteKind::Interior => "interior",
        SiteKind::BoundaryVertex => "boundary vertex",
        SiteKind::BoundarySmooth => "boundary",
    }
}

pub fn check(p: &Problem) -> Result<Output> {
    let (field, declared) = p.field()?;
    let r = conservation_residual(&p.chart, &p.components, &field, &declared, p.chi)?;
    let mut text = format!("chi = {}\nmode = {:?}\n", r.chi, r.mode);
    for c in &r.components {
        text.push_str(&format!(
            "component {}: tau sum/2pi = {:.9}, angle integral/2pi = {:.9}, arc indices = {:.9}, total = {:.9} -> {}\n",
            c.component,
            c.tau_sum / (2.0 * PI),
            c.angle_integral / (2.0 * PI),
            c.arc_index_sum,
            c.total,
            rational_string(&c.total_snapped)
        ));
    }
    for s in &r.sites {
        text.push_str(&format!(
            "site ({:.6}, {:.6}) {}: index {:.9}",
            s.location[0],
            s.location[1],
            kind_name(s.kind),
            s.index.raw
        ));
        if let Some(m) = s.m {
            text.push_str(&format!(", m = {}, strength = {:.9}", rational_string(&m), s.strength_minus));
        } else if let Some(n) = s.index.snapped {
            text.push_str(&format!(" -> {}", rational_string(&n)));
        }
        text.push('\n');
    }
    text.push_str(&format!(
        "residual = {:.3e} (snapped {})\n",
        r.residual,
        rational_string(&r.residual_snapped)
    ));
    let mut m = header("check", p);
    m.insert("report".into(), to_value(&r));
    Ok(Output {
        text,
        json: Value::Object(m),
        csv: None,
    })
}

/// Located zeros plus every boundary vertex that carries no zero.
pub fn rate_sites(p: &Problem) -> Result<Vec<DefectSite>> {
    let (field, declared) = p.field()?;
    let chart = &p.chart;
    let (found, r_sep) = collect_sites(&field, chart, &p.components, &declared)?;
    let mut sites: Vec<DefectSite> = found.into_iter().map(|s| s.0).collect();
    let tol = 1e-7 * chart.domain().diameter();
    let vertices = boundary_vertices(chart, &p.components)?;
    for (i, &(_, at, tau)) in vertices.iter().enumerate() {
        if sites.iter().any(|s| dist(s.location, at) <= tol) {
            continue;
        }
        let nearest = vertices
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| dist(v.1, at))
            .chain(sites.iter().map(|s| dist(s.location, at)))
            .fold(f64::INFINITY, f64::min);
        let radius = (0.5 * r_sep).min(0.25 * nearest);
        let lp = boundary_arc(chart.domain(), at, radius)?;
        sites.push(make_site(&field, chart, at, SiteKind::BoundaryVertex, &lp, false, tau)?);
    }
    Ok(sites)
}

pub fn rates(p: &Problem) -> Result<Output> {
    let sites = rate_sites(p)?;
    let rho = holder_rho(p);
    let weights = sites
        .iter()
        .map(|s| site_weight(&p.chart, s.location, rho).map(|w| Some(w.0)))
        .collect::<Result<Vec<_>>>()?;
    let e = p.predictor.q_exponent;
    let rows = rate_table(&sites, &weights, e)?;
    let total: f64 = rows.iter().map(|r| r.contribution).sum();
    let mut text = String::from("site  kind             location                  q         strength   rate\n");
    for r in &rows {
        text.push_str(&format!(
            "{:<5} {:<16} ({:>10.6}, {:>10.6})  {:<9.6} {:<10.6} {:.6}\n",
            r.site,
            kind_name(r.kind),
            r.location[0],
            r.location[1],
            r.q,
            r.strength,
            r.contribution
        ));
    }
    text.push_str(&format!("total Q = {total:.9}\n"));
    let mut m = header("rates", p);
    m.insert("q_exponent".into(), json!(e.value()));
    m.insert("sites".into(), to_value(&sites));
    m.insert("rows".into(), to_value(&rows));
    m.insert("total".into(), json!(total));
    Ok(Output {
        text,
        json: Value::Object(m),
        csv: Some(rate_table_csv(&rows)),
    })
}

pub fn predict(p: &Problem) -> Result<Output> {
    let problem = p.prediction_problem()?;
    let pred = enumerate_branches(&problem)?;
    let mut text = format!(
        "chi = {}, {} boundary vertices, mode {:?}, bound {}\n",
        problem.chi,
        problem.vertices.len(),
        problem.mode,
        rational_string(&pred.bound)
    );
    text.push_str(&describe(&pred));
    let mut m = header("predict", p);
    m.insert("chi".into(), json!(problem.chi));
    m.insert(
        "vertices".into(),
        Value::Array(
            problem
                .vertices
                .iter()
                .map(|v| {
                    json!({
                        "tau": rational_string(&v.tau),
                        "wedge": rational_string(&v.wedge),
                        "q": rational_string(&v.q),
                    })
                })
                .collect(),
        ),
    );
    m.insert("mode".into(), to_value(&problem.mode));
    m.insert("q_exponent".into(), json!(problem.q_exponent.value()));
    m.insert("mod_symmetry".into(), json!(problem.mod_symmetry));
    m.insert("prediction".into(), to_value(&pred));
    Ok(Output {
        text,
        json: Value::Object(m),
        csv: None,
    })
}

/// Energy sweep at the configured site with the rate it is compared to.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub sweep: EnergySweep,
    pub strength: f64,
    pub kind: SiteKind,
    pub q: f64,
    /// Lower-bound rate 2πq^e n² or (4π²n²/wedge) q^e.
    pub expected: f64,
    /// slope ≥ expected − 2%.
    pub lower_bound_ok: bool,
    pub separation_radius: f64,
}

pub fn energy_report(p: &Problem) -> Result<EnergyReport> {
    let es = p
        .energy
        .as_ref()
        .ok_or_else(|| Error::spec("$.energy", "this command needs an energy section"))?;
    let (field, declared) = p.field()?;
    let chart = &p.chart;
    let (found, r_sep) = collect_sites(&field, chart, &p.components, &declared)?;
    let tol = 1e-6 * chart.domain().diameter();
    let site = found
        .iter()
        .map(|s| &s.0)
        .find(|s| dist(s.location, es.site) <= tol)
        .ok_or_else(|| Error::spec("$.energy.site", "not a zero of the field"))?
        .clone();
    let radius = es.radius.unwrap_or(0.9 * r_sep);
    if radius > r_sep {
        return Err(Error::spec(
            "$.energy.radius",
            format!("outer radius {radius:.6} exceeds the separation radius {r_sep:.6}"),
        ));
    }
    let schedule = match &es.eps {
        Some(eps) => Schedule {
            radius,
            eps: eps.clone(),
        },
        None => Schedule::geometric(radius, es.count, es.ratio),
    };
    let others: Vec<P2> = found
        .iter()
        .map(|s| s.0.location)
        .filter(|l| dist(*l, site.location) > tol)
        .collect();
    let sweep = divergence_slope(&field, chart, site.location, &others, &schedule, p.quadrature)?;
    let (w, _) = site_weight(chart, site.location, holder_rho(p))?;
    let e = p.predictor.q_exponent;
    let n = site.strength();
    let expected = match site.wedge {
        Some(wedge) if site.kind.is_boundary() => boundary_rate(w.q, n, wedge, e)?.raw,
        _ => interior_rate(w.q, n, e).raw,
    };
    Ok(EnergyReport {
        lower_bound_ok: sweep.slope >= expected - 0.02 * expected.abs(),
        sweep,
        strength: n,
        kind: site.kind,
        q: w.q,
        expected,
        separation_radius: r_sep,
    })
}

pub fn energy(p: &Problem) -> Result<Output> {
    let r = energy_report(p)?;
    let mut text = format!(
        "site ({:.6}, {:.6}) {}: strength {:.6}, q = {:.6}\nR = {:.6e}\n     eps            E          running slope\n",
        r.sweep.site[0],
        r.sweep.site[1],
        kind_name(r.kind),
        r.strength,
        r.q,
        r.sweep.radius
    );
    for pt in &r.sweep.points {
        text.push_str(&format!(
            "{:>12.6e}  {:>14.9}  {}\n",
            pt.eps,
            pt.energy,
            pt.running_slope.map(|s| format!("{s:.9}")).unwrap_or_default()
        ));
    }
    text.push_str(&format!(
        "slope = {:.9} +/- {:.3e} ({} points), lemma rate = {:.9}, lower bound {}\n",
        r.sweep.slope,
        r.sweep.slope_halfwidth,
        r.sweep.fit_points,
        r.expected,
        if r.lower_bound_ok { "holds" } else { "VIOLATED" }
    ));
    let mut m = header("energy", p);
    m.insert("report".into(), to_value(&r));
    Ok(Output {
        text,
        csv: Some(r.sweep.to_csv()),
        json: Value::Object(m),
    })
}
