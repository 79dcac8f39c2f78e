//! JSON problem specifications.
//!
//! Every validation failure is reported as [`Error::Spec`] with a JSON path
//! such as `$.boundary[0][1].arc.radius`.

use std::path::Path;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde_json::{Map, Value};

use crate::boundary::{arclength_parametrize, exterior_angles, BoundaryComponent, Segment};
use crate::conservation::{euler_characteristic, pi_fraction, DeclaredZero, TopologyDescriptor, Triangulation};
use crate::error::{Error, Result};
use crate::expr::ExpressionAst;
use crate::fields::{FieldMode, Loop, TangentField};
use crate::geometry::{ChartFamily, ConeForm, Domain, SurfaceChart, P2};
use crate::predictor::PredictionProblem;
use crate::quadrature::QuadratureLevel;
use crate::rates::{QExponent, VertexData};

/// Version of the input and report format.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub field: TangentField,
    pub zeros: Vec<DeclaredZero>,
}

#[derive(Debug, Clone, Default)]
pub struct PredictorSpec {
    pub bound: Option<Rational64>,
    pub mod_symmetry: bool,
    pub q_exponent: QExponent,
    pub levels: usize,
    pub max_interior: Option<usize>,
    pub vertices: Option<Vec<VertexData>>,
    pub interior_q: Option<Rational64>,
}

#[derive(Debug, Clone)]
pub struct EnergySpec {
    pub site: P2,
    pub radius: Option<f64>,
    pub count: usize,
    pub ratio: f64,
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub chart: SurfaceChart,
    pub segments: Vec<Vec<Segment>>,
    pub components: Vec<BoundaryComponent>,
    pub topology: TopologyDescriptor,
    pub chi: i64,
    pub mode: FieldMode,
    pub field: Option<FieldSpec>,
    pub predictor: PredictorSpec,
    pub energy: Option<EnergySpec>,
    pub quadrature: QuadratureLevel,
    /// Radius of the Hölder fits at degenerate points.
    pub holder_radius: Option<f64>,
}

/// Cursor into the JSON document that remembers its path.
#[derive(Clone)]
struct Node<'a> {
    v: &'a Value,
    path: String,
}

impl<'a> Node<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::spec(self.path.clone(), msg)
    }

    fn obj(&self, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
        let m = self.v.as_object().ok_or_else(|| self.err("expected an object"))?;
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::spec(
                    format!("{}.{k}", self.path),
                    format!("unknown key (expected one of: {})", allowed.join(", ")),
                ));
            }
        }
        Ok(m)
    }

    fn opt(&self, key: &str) -> Option<Node<'a>> {
        self.v.get(key).filter(|v| !v.is_null()).map(|v| Node {
            v,
            path: format!("{}.{key}", self.path),
        })
    }

    fn get(&self, key: &str) -> Result<Node<'a>> {
        self.opt(key)
            .ok_or_else(|| Error::spec(format!("{}.{key}", self.path), "missing required key"))
    }

    fn array(&self) -> Result<Vec<Node<'a>>> {
        let a = self.v.as_array().ok_or_else(|| self.err("expected an array"))?;
        Ok(a.iter()
            .enumerate()
            .map(|(i, v)| Node {
                v,
                path: format!("{}[{i}]", self.path),
            })
            .collect())
    }

    fn string(&self) -> Result<&'a str> {
        self.v.as_str().ok_or_else(|| self.err("expected a string"))
    }

    fn boolean(&self) -> Result<bool> {
        self.v.as_bool().ok_or_else(|| self.err("expected true or false"))
    }

    fn uint(&self) -> Result<usize> {
        self.v
            .as_u64()
            .map(|u| u as usize)
            .ok_or_else(|| self.err("expected a non-negative integer"))
    }

    /// A number or a constant expression such as "pi/3".
    fn scalar(&self) -> Result<f64> {
        let x = match self.v {
            Value::Number(n) => n.as_f64().ok_or_else(|| self.err("number out of range"))?,
            Value::String(s) => ExpressionAst::constant(s).map_err(|e| self.err(e.to_string()))?,
            _ => return Err(self.err("expected a number or a constant expression")),
        };
        if !x.is_finite() {
            return Err(self.err("value is not finite"));
        }
        Ok(x)
    }

    fn positive(&self) -> Result<f64> {
        let x = self.scalar()?;
        if x <= 0.0 {
            return Err(self.err("must be positive"));
        }
        Ok(x)
    }

    fn point(&self) -> Result<P2> {
        let a = self.array()?;
        if a.len() != 2 {
            return Err(self.err("expected a point [w1, w2]"));
        }
        Ok([a[0].scalar()?, a[1].scalar()?])
    }

    fn points(&self) -> Result<Vec<P2>> {
        self.array()?.iter().map(|n| n.point()).collect()
    }

    /// An integer, a fraction string "p/q", or a number with a small exact
    /// denominator.
    fn rational(&self) -> Result<Rational64> {
        match self.v {
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    return Ok(Rational64::from_integer(i));
                }
                let x = n.as_f64().unwrap_or(f64::NAN);
                (1..=48)
                    .find_map(|d| {
                        let p = (x * d as f64).round();
                        ((x * d as f64 - p).abs() < 1e-12).then(|| Rational64::new(p as i64, d))
                    })
                    .ok_or_else(|| self.err("expected an exact fraction such as \"1/3\""))
            }
            Value::String(s) => s
                .trim()
                .parse::<Rational64>()
                .map_err(|_| self.err("expected a fraction such as \"1/3\"")),
            _ => Err(self.err("expected an integer or a fraction string")),
        }
    }

    fn expression(&self, vars: &[&str]) -> Result<ExpressionAst> {
        ExpressionAst::parse(self.string()?, vars).map_err(|e| self.err(e.to_string()))
    }
}

fn parse_chart_family(n: &Node) -> Result<ChartFamily> {
    let family = n.get("family")?;
    Ok(match family.string()? {
        "plane" => {
            n.obj(&["family"])?;
            ChartFamily::Plane
        }
        "sphere" => {
            n.obj(&["family", "radius"])?;
            let radius = match n.opt("radius") {
                Some(r) => r.positive()?,
                None => 1.0,
            };
            ChartFamily::Sphere { radius }
        }
        "revolution" => {
            n.obj(&["family", "r", "z"])?;
            ChartFamily::Revolution {
                r: n.get("r")?.expression(&["t"])?,
                z: n.get("z")?.expression(&["t"])?,
            }
        }
        "cone" => {
            n.obj(&["family", "half_angle", "form", "exponent"])?;
            let ha = n.get("half_angle")?;
            let half_angle = ha.scalar()?;
            if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
                return Err(ha.err("half angle must lie in (0, pi/2)"));
            }
            let form = match n.opt("form").map(|f| f.string().map(|s| (f.clone(), s))).transpose()? {
                None => ConeForm::Generator,
                Some((_, "generator")) => ConeForm::Generator,
                Some((_, "conformal")) => ConeForm::Conformal {
                    exponent: match n.opt("exponent") {
                        Some(e) => e.positive()?,
                        None => half_angle.sin(),
                    },
                },
                Some((f, _)) => return Err(f.err("expected \"generator\" or \"conformal\"")),
            };
            ChartFamily::Cone { half_angle, form }
        }
        "expression" => {
            n.obj(&["family", "x", "y", "z"])?;
            let w = ["w1", "w2"];
            ChartFamily::Expression {
                x: n.get("x")?.expression(&w)?,
                y: n.get("y")?.expression(&w)?,
                z: n.get("z")?.expression(&w)?,
            }
        }
        _ => {
            return Err(family.err(
                "unknown family (expected plane, sphere, revolution, cone or expression)",
            ))
        }
    })
}

fn parse_domain(n: &Node) -> Result<Domain> {
    let kind = n.get("type")?;
    let dom = match kind.string()? {
        "rectangle" => {
            n.obj(&["type", "min", "max"])?;
            Domain::Rectangle {
                min: n.get("min")?.point()?,
                max: n.get("max")?.point()?,
            }
        }
        "polygon" => {
            n.obj(&["type", "vertices"])?;
            Domain::Polygon {
                vertices: n.get("vertices")?.points()?,
            }
        }
        "regular_polygon" => {
            n.obj(&["type", "sides", "radius", "rotation", "center"])?;
            let sides_node = n.get("sides")?;
            let sides = sides_node.uint()?;
            if sides < 3 {
                return Err(sides_node.err("a polygon needs at least 3 sides"));
            }
            let radius = n.get("radius")?.positive()?;
            let rot = n.opt("rotation").map(|r| r.scalar()).transpose()?.unwrap_or(0.0);
            let c = n.opt("center").map(|c| c.point()).transpose()?.unwrap_or([0.0, 0.0]);
            Domain::Polygon {
                vertices: (0..sides)
                    .map(|k| {
                        let t = rot + 2.0 * std::f64::consts::PI * k as f64 / sides as f64;
                        [c[0] + radius * t.cos(), c[1] + radius * t.sin()]
                    })
                    .collect(),
            }
        }
        "sector" => {
            n.obj(&["type", "center", "r_inner", "r_outer", "theta0", "theta1"])?;
            Domain::Sector {
                center: n.opt("center").map(|c| c.point()).transpose()?.unwrap_or([0.0, 0.0]),
                r_inner: n.opt("r_inner").map(|r| r.scalar()).transpose()?.unwrap_or(0.0),
                r_outer: n.get("r_outer")?.positive()?,
                theta0: n.opt("theta0").map(|r| r.scalar()).transpose()?.unwrap_or(0.0),
                theta1: n
                    .opt("theta1")
                    .map(|r| r.scalar())
                    .transpose()?
                    .unwrap_or(2.0 * std::f64::consts::PI),
            }
        }
        _ => {
            return Err(kind.err(
                "unknown domain type (expected rectangle, polygon, regular_polygon or sector)",
            ))
        }
    };
    dom.validate().map_err(|e| match e {
        Error::Spec { message, .. } => n.err(message),
        other => n.err(other.to_string()),
    })?;
    Ok(dom)
}

fn parse_segment(n: &Node) -> Result<Segment> {
    let m = n.obj(&["line", "arc", "curve"])?;
    if m.len() != 1 {
        return Err(n.err("a segment has exactly one of: line, arc, curve"));
    }
    if let Some(l) = n.opt("line") {
        l.obj(&["from", "to"])?;
        return Ok(Segment::Line {
            from: l.get("from")?.point()?,
            to: l.get("to")?.point()?,
        });
    }
    if let Some(a) = n.opt("arc") {
        a.obj(&["center", "radius", "start", "end"])?;
        return Ok(Segment::Arc {
            center: a.get("center")?.point()?,
            radius: a.get("radius")?.positive()?,
            start: a.get("start")?.scalar()?,
            end: a.get("end")?.scalar()?,
        });
    }
    let c = n.get("curve")?;
    c.obj(&["w1", "w2", "t0", "t1"])?;
    Ok(Segment::Expression {
        w1: c.get("w1")?.expression(&["t"])?,
        w2: c.get("w2")?.expression(&["t"])?,
        t0: c.get("t0")?.scalar()?,
        t1: c.get("t1")?.scalar()?,
    })
}

fn parse_loop(n: &Node) -> Result<Loop> {
    let m = n.obj(&["circle", "arc", "path"])?;
    if m.len() != 1 {
        return Err(n.err("a loop has exactly one of: circle, arc, path"));
    }
    if let Some(c) = n.opt("circle") {
        c.obj(&["center", "radius"])?;
        return Ok(Loop::Circle {
            center: c.get("center")?.point()?,
            radius: c.get("radius")?.positive()?,
        });
    }
    if let Some(a) = n.opt("arc") {
        a.obj(&["center", "radius", "start", "end"])?;
        return Ok(Loop::Arc {
            center: a.get("center")?.point()?,
            radius: a.get("radius")?.positive()?,
            start: a.get("start")?.scalar()?,
            end: a.get("end")?.scalar()?,
        });
    }
    let p = n.get("path")?;
    let segs = p.array()?.iter().map(parse_segment).collect::<Result<Vec<_>>>()?;
    if segs.is_empty() {
        return Err(p.err("a path needs at least one segment"));
    }
    Ok(Loop::Path(segs))
}

fn parse_mode(n: &Node) -> Result<FieldMode> {
    FieldMode::parse(n.string()?).ok_or_else(|| n.err("expected \"vector\" or \"director\""))
}

fn parse_topology(n: &Node, components: usize) -> Result<TopologyDescriptor> {
    n.obj(&["genus", "boundary_components", "triangulation"])?;
    let genus = n.opt("genus").map(|g| g.uint()).transpose()?.unwrap_or(0) as u32;
    let bnode = n.opt("boundary_components");
    let b = bnode.as_ref().map(|b| b.uint()).transpose()?.unwrap_or(components) as u32;
    if b as usize != components {
        return Err(Error::spec(
            format!("{}.boundary_components", n.path),
            format!("declares {b} boundary components but the boundary has {components}"),
        ));
    }
    let triangulation = match n.opt("triangulation") {
        None => None,
        Some(t) => {
            t.obj(&["faces", "edges", "vertices"])?;
            Some(Triangulation {
                faces: t.get("faces")?.uint()? as i64,
                edges: t.get("edges")?.uint()? as i64,
                vertices: t.get("vertices")?.uint()? as i64,
            })
        }
    };
    Ok(TopologyDescriptor {
        genus,
        boundary_components: b,
        triangulation,
    })
}

fn in_closure(dom: &Domain, n: &Node, p: P2) -> Result<()> {
    if !dom.contains(p, 1e-9 * dom.diameter()) {
        return Err(n.err(format!(
            "point ({:.6}, {:.6}) lies outside the parameter domain",
            p[0], p[1]
        )));
    }
    Ok(())
}

fn parse_field(n: &Node, mode: FieldMode, dom: &Domain) -> Result<FieldSpec> {
    n.obj(&["a1", "a2", "zeros"])?;
    let a1 = n.get("a1")?;
    let a2 = n.get("a2")?;
    let field = TangentField {
        mode,
        a1: a1.expression(&["w1", "w2"])?,
        a2: a2.expression(&["w1", "w2"])?,
    };
    let mut zeros = Vec::new();
    if let Some(zs) = n.opt("zeros") {
        for z in zs.array()? {
            z.obj(&["at", "loop", "degenerate"])?;
            let at_node = z.get("at")?;
            let at = at_node.point()?;
            in_closure(dom, &at_node, at)?;
            let lp = z.opt("loop").map(|l| parse_loop(&l)).transpose()?;
            let degenerate = z.opt("degenerate").map(|d| d.boolean()).transpose()?.unwrap_or(false);
            if degenerate && lp.is_none() {
                return Err(z.err("a degenerate zero needs an explicit loop"));
            }
            zeros.push(DeclaredZero { at, lp, degenerate });
        }
    }
    Ok(FieldSpec { field, zeros })
}

fn parse_predictor(n: &Node) -> Result<PredictorSpec> {
    n.obj(&[
        "bound",
        "mod_symmetry",
        "q_exponent",
        "levels",
        "max_interior",
        "vertices",
        "interior_q",
    ])?;
    let mut p = PredictorSpec::default();
    if let Some(b) = n.opt("bound") {
        let v = b.rational()?;
        if v < Rational64::zero() {
            return Err(b.err("bound must be non-negative"));
        }
        p.bound = Some(v);
    }
    if let Some(s) = n.opt("mod_symmetry") {
        p.mod_symmetry = s.boolean()?;
    }
    if let Some(e) = n.opt("q_exponent") {
        p.q_exponent = e
            .v
            .as_i64()
            .and_then(QExponent::parse)
            .ok_or_else(|| e.err("expected 1 or 2"))?;
    }
    if let Some(l) = n.opt("levels") {
        p.levels = l.uint()?;
    }
    if let Some(m) = n.opt("max_interior") {
        p.max_interior = Some(m.uint()?);
    }
    if let Some(q) = n.opt("interior_q") {
        p.interior_q = Some(weight(&q)?);
    }
    if let Some(vs) = n.opt("vertices") {
        let mut out = Vec::new();
        for v in vs.array()? {
            v.obj(&["tau", "wedge", "q"])?;
            let tau = v.get("tau")?.rational()?;
            let wedge = match v.opt("wedge") {
                Some(w) => {
                    let x = w.rational()?;
                    if x <= Rational64::zero() {
                        return Err(w.err("wedge must be positive"));
                    }
                    x
                }
                None => Rational64::one() - tau,
            };
            let q = match v.opt("q") {
                Some(q) => weight(&q)?,
                None => Rational64::one(),
            };
            out.push(VertexData { tau, wedge, q });
        }
        p.vertices = Some(out);
    }
    Ok(p)
}

fn weight(n: &Node) -> Result<Rational64> {
    let q = n.rational()?;
    if q < Rational64::zero() || q > Rational64::one() {
        return Err(n.err("weight q must lie in [0, 1]"));
    }
    Ok(q)
}

fn parse_energy(n: &Node, dom: &Domain) -> Result<EnergySpec> {
    n.obj(&["site", "radius", "count", "ratio", "eps"])?;
    let site_node = n.get("site")?;
    let site = site_node.point()?;
    in_closure(dom, &site_node, site)?;
    let ratio = match n.opt("ratio") {
        Some(r) => {
            let x = r.positive()?;
            if x >= 1.0 {
                return Err(r.err("ratio must lie in (0, 1)"));
            }
            x
        }
        None => 10f64.powf(-0.5),
    };
    Ok(EnergySpec {
        site,
        radius: n.opt("radius").map(|r| r.positive()).transpose()?,
        count: n.opt("count").map(|c| c.uint()).transpose()?.unwrap_or(9),
        ratio,
        eps: n
            .opt("eps")
            .map(|e| e.array()?.iter().map(|x| x.positive()).collect::<Result<Vec<_>>>())
            .transpose()?,
    })
}

/// Parses and validates a problem from JSON text.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::spec(
            format!("$ (line {}, column {})", e.line(), e.column()),
            format!("invalid JSON: {e}"),
        )
    })?;
    let n = Node {
        v: &root,
        path: "$".into(),
    };
    n.obj(&[
        "schema",
        "name",
        "chart",
        "domain",
        "degenerate_points",
        "boundary",
        "topology",
        "mode",
        "field",
        "predictor",
        "energy",
        "quadrature",
        "holder_radius",
    ])?;
    let s = n.get("schema")?;
    if s.uint()? != SCHEMA as usize {
        return Err(s.err(format!("unsupported schema version (expected {SCHEMA})")));
    }
    let name = n.opt("name").map(|s| s.string().map(str::to_string)).transpose()?.unwrap_or_default();
    let domain_node = n.get("domain")?;
    let domain = parse_domain(&domain_node)?;
    let degenerate_points = match n.opt("degenerate_points") {
        Some(d) => {
            let pts = d.points()?;
            for (i, p) in pts.iter().enumerate() {
                let at = Node {
                    v: d.v,
                    path: format!("{}[{i}]", d.path),
                };
                in_closure(&domain, &at, *p)?;
            }
            pts
        }
        None => vec![],
    };
    let chart_node = n.get("chart")?;
    let family = parse_chart_family(&chart_node)?;
    let chart = SurfaceChart::new(family, domain, degenerate_points).map_err(|e| match e {
        Error::Spec { message, .. } => chart_node.err(message),
        other => other,
    })?;

    let segments = match n.opt("boundary") {
        Some(b) => {
            let mut comps = Vec::new();
            for c in b.array()? {
                let segs = c.array()?.iter().map(parse_segment).collect::<Result<Vec<_>>>()?;
                if segs.is_empty() {
                    return Err(c.err("a boundary component needs at least one segment"));
                }
                comps.push(segs);
            }
            comps
        }
        None => chart.domain().default_boundary(),
    };
    let components = segments
        .iter()
        .enumerate()
        .map(|(i, s)| arclength_parametrize(&chart, i, s.clone()))
        .collect::<Result<Vec<_>>>()?;

    let topology = match n.opt("topology") {
        Some(t) => parse_topology(&t, components.len())?,
        None => TopologyDescriptor::new(0, components.len() as u32),
    };
    let chi = euler_characteristic(&topology)?;

    let mode = n.opt("mode").map(|m| parse_mode(&m)).transpose()?.unwrap_or_default();
    let field = n
        .opt("field")
        .map(|f| parse_field(&f, mode, chart.domain()))
        .transpose()?;
    let predictor = n
        .opt("predictor")
        .map(|p| parse_predictor(&p))
        .transpose()?
        .unwrap_or_default();
    let energy = n.opt("energy").map(|e| parse_energy(&e, chart.domain())).transpose()?;
    let quadrature = match n.opt("quadrature") {
        Some(q) => QuadratureLevel::parse(q.string()?).ok_or_else(|| q.err("expected Q1, Q2 or Q3"))?,
        None => QuadratureLevel::default(),
    };
    let holder_radius = n.opt("holder_radius").map(|r| r.positive()).transpose()?;
    Ok(Problem {
        name,
        chart,
        segments,
        components,
        topology,
        chi,
        mode,
        field,
        predictor,
        energy,
        quadrature,
        holder_radius,
    })
}

/// Reads and parses a specification file.
pub fn load(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem(&text)
}

/// Smallest-denominator fraction within 1e-9 of `x` (denominator ≤ 48).
fn small_fraction(x: f64) -> Option<Rational64> {
    (1..=48).find_map(|d| {
        let p = (x * d as f64).round();
        ((x * d as f64 - p).abs() < 1e-9 * d as f64).then(|| Rational64::new(p as i64, d))
    })
}

impl Problem {
    /// Boundary vertex data for the predictor: explicit, or read off the
    /// geometry (τ/π and the metric ratio at each corner must be simple
    /// fractions).
    pub fn vertex_data(&self) -> Result<Vec<VertexData>> {
        if let Some(v) = &self.predictor.vertices {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        for (c, comp) in self.components.iter().enumerate() {
            for v in exterior_angles(comp, &self.chart, c)? {
                if v.tau.abs() <= 1e-9 {
                    continue;
                }
                let tau = pi_fraction(v.tau).ok_or_else(|| {
                    Error::spec(
                        "$.predictor.vertices",
                        format!(
                            "corner at ({:.6}, {:.6}) has τ = {:.9} which is not a simple multiple of π; list vertices explicitly",
                            v.point[0], v.point[1], v.tau
                        ),
                    )
                })?;
                let l = self.chart.metric_lengths(v.point);
                let (lo, hi) = (l[0].min(l[1]), l[0].max(l[1]));
                let q = if hi > self.chart.tol_deg() {
                    small_fraction(lo / hi).ok_or_else(|| {
                        Error::spec(
                            "$.predictor.vertices",
                            format!(
                                "metric ratio {:.9} at corner ({:.6}, {:.6}) is not a simple fraction; list vertices explicitly",
                                lo / hi,
                                v.point[0],
                                v.point[1]
                            ),
                        )
                    })?
                } else {
                    return Err(Error::spec(
                        "$.predictor.vertices",
                        "a corner sits at a degenerate point; list vertices explicitly",
                    ));
                };
                out.push(VertexData {
                    tau,
                    wedge: Rational64::one() - tau,
                    q,
                });
            }
        }
        Ok(out)
    }

    pub fn prediction_problem(&self) -> Result<PredictionProblem> {
        let mut p = PredictionProblem::new(self.chi, self.vertex_data()?, self.mode);
        if let Some(b) = self.predictor.bound {
            p.bound = b;
        }
        if let Some(m) = self.predictor.max_interior {
            p.max_interior = m;
        }
        if let Some(q) = self.predictor.interior_q {
            p.interior_q = q;
        }
        p.q_exponent = self.predictor.q_exponent;
        p.extra_levels = self.predictor.levels;
        p.mod_symmetry = self.predictor.mod_symmetry;
        Ok(p)
    }

    /// Field with the problem's current mode.
    pub fn field(&self) -> Result<(TangentField, Vec<DeclaredZero>)> {
        let f = self
            .field
            .as_ref()
            .ok_or_else(|| Error::spec("$.field", "this command needs a field"))?;
        let mut field = f.field.clone();
        field.mode = self.mode;
        Ok((field, f.zeros.clone()))
    }
}
