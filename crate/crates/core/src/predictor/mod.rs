//! Exact enumeration of defect configurations minimizing the total rate
//!
//! Q = Σ q^e n_i² + Σ (2π/wedge_j) q_j^e (m_j − τ_j/2π)²
//!
//! subject to χ = Σ n_i + Σ m_j, with strengths on the lattice of the field
//! mode. All arithmetic is rational so ties are detected exactly.

pub mod oracle;

pub use oracle::brute_force_oracle;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::FieldMode;
use crate::rates::{DefectConfiguration, QExponent, VertexData};
use crate::report::{rational_string, ser_rational, ser_rational_vec};

#[derive(Debug, Clone)]
pub struct PredictionProblem {
    pub chi: i64,
    /// Boundary vertices in cyclic order.
    pub vertices: Vec<VertexData>,
    pub interior_q: Rational64,
    pub mode: FieldMode,
    /// Bound on |m_j| and |n_i|.
    pub bound: Rational64,
    /// Maximum number of interior defects.
    pub max_interior: usize,
    pub q_exponent: QExponent,
    /// Suboptimal levels to report beyond the minimum.
    pub extra_levels: usize,
    /// Merge configurations related by a symmetry of the vertex data.
    pub mod_symmetry: bool,
}

impl PredictionProblem {
    pub fn new(chi: i64, vertices: Vec<VertexData>, mode: FieldMode) -> Self {
        PredictionProblem {
            chi,
            vertices,
            interior_q: Rational64::one(),
            mode,
            bound: Rational64::from_integer(2),
            max_interior: 8,
            q_exponent: QExponent::Two,
            extra_levels: 0,
            mod_symmetry: false,
        }
    }

    /// Regular planar n-gon with exterior angles 2π/n.
    pub fn regular_polygon(n: usize, mode: FieldMode) -> Self {
        let v = VertexData::planar(Rational64::new(2, n as i64));
        Self::new(1, vec![v; n], mode)
    }

    /// Admissible values −B, …, B on the mode lattice.
    pub fn lattice(&self, bound: Rational64) -> Vec<Rational64> {
        let step = self.mode.step();
        let k = (bound / step).floor().to_integer();
        (-k..=k).map(|i| step * i).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.bound < Rational64::zero() {
            return Err(Error::spec("predictor.bound", "bound must be non-negative"));
        }
        for (j, v) in self.vertices.iter().enumerate() {
            if v.wedge <= Rational64::zero() {
                return Err(Error::ZeroWedge(crate::fields::to_f64(v.wedge) * std::f64::consts::PI));
            }
            if v.q < Rational64::zero() || v.q > Rational64::one() {
                return Err(Error::spec(
                    format!("predictor.vertices[{j}].q"),
                    "weight q must lie in [0, 1]",
                ));
            }
        }
        Ok(())
    }
}

/// One labeled configuration of a level.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Branch {
    #[serde(serialize_with = "ser_rational_vec")]
    pub m: Vec<Rational64>,
    #[serde(serialize_with = "ser_rational_vec")]
    pub interior: Vec<Rational64>,
    /// Boundary strengths m − τ/2π.
    #[serde(serialize_with = "ser_rational_vec")]
    pub strengths: Vec<Rational64>,
    /// Boundary strengths in the plus convention, m + τ/2π.
    #[serde(serialize_with = "ser_rational_vec")]
    pub strengths_plus: Vec<Rational64>,
    /// Number of labeled configurations this entry stands for.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Level {
    #[serde(serialize_with = "ser_rational")]
    pub q: Rational64,
    pub q_float: f64,
    pub count: usize,
    pub configurations: Vec<Branch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational64,
    /// Minimal Q when the bound is enlarged by one lattice step.
    #[serde(serialize_with = "ser_rational")]
    pub verified_with: Rational64,
    pub levels: Vec<Level>,
}

impl Branch {
    pub fn configuration(&self) -> DefectConfiguration {
        DefectConfiguration {
            m: self.m.clone(),
            interior: self.interior.clone(),
        }
    }
}

impl Prediction {
    pub fn minimum(&self) -> &Level {
        &self.levels[0]
    }
}

/// All multisets of nonzero lattice values with |n| ≤ B and at most `cap`
/// members, grouped by sum and sorted by (Σn², members).
pub(crate) type InteriorTable = BTreeMap<Rational64, Vec<(Rational64, Vec<Rational64>)>>;

pub(crate) fn interior_table(values: &[Rational64], cap: usize) -> InteriorTable {
    let nonzero: Vec<Rational64> = values.iter().copied().filter(|v| !v.is_zero()).collect();
    let mut table: InteriorTable = BTreeMap::new();
    let mut stack: Vec<Rational64> = Vec::new();
    fn rec(
        vals: &[Rational64],
        start: usize,
        cap: usize,
        stack: &mut Vec<Rational64>,
        sum: Rational64,
        cost: Rational64,
        table: &mut InteriorTable,
    ) {
        table.entry(sum).or_default().push((cost, stack.clone()));
        if stack.len() == cap {
            return;
        }
        for i in start..vals.len() {
            stack.push(vals[i]);
            rec(vals, i, cap, stack, sum + vals[i], cost + vals[i] * vals[i], table);
            stack.pop();
        }
    }
    rec(
        &nonzero,
        0,
        cap,
        &mut stack,
        Rational64::zero(),
        Rational64::zero(),
        &mut table,
    );
    for list in table.values_mut() {
        list.sort();
    }
    table
}

/// The k smallest distinct values seen so far.
#[derive(Debug, Clone)]
struct TopLevels {
    k: usize,
    values: BTreeSet<Rational64>,
}

impl TopLevels {
    fn new(k: usize) -> Self {
        TopLevels {
            k,
            values: BTreeSet::new(),
        }
    }

    fn threshold(&self) -> Option<Rational64> {
        (self.values.len() >= self.k).then(|| *self.values.iter().next_back().unwrap())
    }

    fn admits(&self, q: Rational64) -> bool {
        self.threshold().is_none_or(|t| q <= t)
    }

    fn offer(&mut self, q: Rational64) {
        self.values.insert(q);
        while self.values.len() > self.k {
            let last = *self.values.iter().next_back().unwrap();
            self.values.remove(&last);
        }
    }
}

type Found = Vec<(Rational64, Vec<Rational64>, Vec<Rational64>)>;

struct Search<'a> {
    chi: Rational64,
    /// Per vertex, lattice values sorted by cost, with their costs.
    options: Vec<Vec<(Rational64, Rational64)>>,
    /// Σ over vertices ≥ d of the cheapest option.
    min_rest: Vec<Rational64>,
    table: &'a InteriorTable,
    interior_weight: Rational64,
}

impl Search<'_> {
    fn dfs(
        &self,
        d: usize,
        m: &mut Vec<Rational64>,
        sum: Rational64,
        cost: Rational64,
        top: &mut TopLevels,
        found: &mut Found,
    ) {
        if !top.admits(cost + self.min_rest[d]) {
            return;
        }
        if d == self.options.len() {
            let s = self.chi - sum;
            if let Some(list) = self.table.get(&s) {
                for (c, ms) in list {
                    let q = cost + self.interior_weight * c;
                    if !top.admits(q) {
                        break;
                    }
                    top.offer(q);
                    found.push((q, m.clone(), ms.clone()));
                }
            }
            if found.len() > 1 << 16 {
                if let Some(t) = top.threshold() {
                    found.retain(|f| f.0 <= t);
                }
            }
            return;
        }
        for &(v, c) in &self.options[d] {
            m.push(v);
            self.dfs(d + 1, m, sum + v, cost + c, top, found);
            m.pop();
        }
    }
}

fn solve(problem: &PredictionProblem, bound: Rational64, levels: usize) -> Result<Found> {
    let e = problem.q_exponent;
    let values = problem.lattice(bound);
    let table = interior_table(&values, problem.max_interior);
    let mut options = Vec::with_capacity(problem.vertices.len());
    for v in &problem.vertices {
        let f = v.factor()? * e.apply_exact(v.q);
        let mut opts: Vec<(Rational64, Rational64)> = values
            .iter()
            .map(|&m| {
                let s = v.strength(m);
                (m, f * s * s)
            })
            .collect();
        opts.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        options.push(opts);
    }
    let n = options.len();
    let mut min_rest = vec![Rational64::zero(); n + 1];
    for d in (0..n).rev() {
        min_rest[d] = min_rest[d + 1] + options[d][0].1;
    }
    let search = Search {
        chi: Rational64::from_integer(problem.chi),
        options,
        min_rest,
        table: &table,
        interior_weight: e.apply_exact(problem.interior_q),
    };
    let k = levels + 1;

    let parts: Vec<Found> = if n == 0 {
        let mut top = TopLevels::new(k);
        let mut found = Vec::new();
        search.dfs(0, &mut Vec::new(), Rational64::zero(), Rational64::zero(), &mut top, &mut found);
        vec![found]
    } else {
        search.options[0]
            .par_iter()
            .map(|&(v, c)| {
                let mut top = TopLevels::new(k);
                let mut found = Vec::new();
                let mut m = vec![v];
                search.dfs(1, &mut m, v, c, &mut top, &mut found);
                found
            })
            .collect()
    };
    let mut all: Found = parts.into_iter().flatten().collect();
    let distinct: BTreeSet<Rational64> = all.iter().map(|f| f.0).collect();
    let Some(&cut) = distinct.iter().nth(levels).or(distinct.iter().next_back()) else {
        return Err(Error::InfeasibleParity);
    };
    all.retain(|f| f.0 <= cut);
    all.sort();
    all.dedup();
    Ok(all)
}

/// Dihedral permutations of the vertex cycle that preserve vertex data.
pub fn vertex_symmetries(vertices: &[VertexData]) -> Vec<Vec<usize>> {
    let n = vertices.len();
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for k in 0..n {
        for reflect in [false, true] {
            let g: Vec<usize> = (0..n)
                .map(|i| if reflect { (k + n - i) % n } else { (i + k) % n })
                .collect();
            if (0..n).all(|i| vertices[g[i]] == vertices[i]) && !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out
}

fn canonical(m: &[Rational64], group: &[Vec<usize>]) -> Vec<Rational64> {
    group
        .iter()
        .map(|g| g.iter().map(|&i| m[i]).collect::<Vec<_>>())
        .min()
        .unwrap()
}

fn to_levels(problem: &PredictionProblem, found: Found) -> Vec<Level> {
    let group = vertex_symmetries(&problem.vertices);
    let mut grouped: BTreeMap<Rational64, Vec<(Vec<Rational64>, Vec<Rational64>)>> = BTreeMap::new();
    for (q, m, n) in found {
        grouped.entry(q).or_default().push((m, n));
    }
    grouped
        .into_iter()
        .map(|(q, configs)| {
            let count = configs.len();
            let mut branches: Vec<Branch> = Vec::new();
            let mut seen: BTreeMap<(Vec<Rational64>, Vec<Rational64>), usize> = BTreeMap::new();
            for (m, n) in configs {
                let key_m = if problem.mod_symmetry {
                    canonical(&m, &group)
                } else {
                    m.clone()
                };
                let key = (key_m.clone(), n.clone());
                if let Some(&idx) = seen.get(&key) {
                    branches[idx].multiplicity += 1;
                    continue;
                }
                seen.insert(key, branches.len());
                let strengths = key_m
                    .iter()
                    .zip(&problem.vertices)
                    .map(|(m, v)| v.strength(*m))
                    .collect();
                let strengths_plus = key_m
                    .iter()
                    .zip(&problem.vertices)
                    .map(|(m, v)| *m + v.tau / 2)
                    .collect();
                branches.push(Branch {
                    m: key_m,
                    interior: n,
                    strengths,
                    strengths_plus,
                    multiplicity: 1,
                });
            }
            branches.sort_by(|a, b| (&a.m, &a.interior).cmp(&(&b.m, &b.interior)));
            Level {
                q,
                q_float: crate::fields::to_f64(q),
                count,
                configurations: branches,
            }
        })
        .collect()
}

/// All global minimizers of Q (and `extra_levels` further levels), with the
/// bound certified by re-solving one lattice step larger.
pub fn enumerate_branches(problem: &PredictionProblem) -> Result<Prediction> {
    problem.validate()?;
    let found = solve(problem, problem.bound, problem.extra_levels)?;
    let q_min = found[0].0;
    let larger = problem.bound + problem.mode.step();
    let check = solve(problem, larger, 0)?;
    let q_check = check[0].0;
    if q_check != q_min {
        return Err(Error::BoundTooSmall {
            bound: rational_string(&problem.bound),
            at_bound: rational_string(&q_min),
            at_next: rational_string(&q_check),
        });
    }
    Ok(Prediction {
        bound: problem.bound,
        verified_with: larger,
        levels: to_levels(problem, found),
    })
}

/// Human-readable level summary.
pub fn describe(prediction: &Prediction) -> String {
    let mut out = String::new();
    for (i, level) in prediction.levels.iter().enumerate() {
        out.push_str(&format!(
            "level {i}: Q = {} ({:.6}), {} configuration(s)\n",
            rational_string(&level.q),
            level.q_float,
            level.count
        ));
        for b in &level.configurations {
            let fmt = |v: &[Rational64]| {
                v.iter().map(rational_string).collect::<Vec<_>>().join(", ")
            };
            out.push_str(&format!(
                "  m = [{}]  boundary strengths = [{}]  interior = [{}]",
                fmt(&b.m),
                fmt(&b.strengths),
                fmt(&b.interior)
            ));
            if b.multiplicity > 1 {
                out.push_str(&format!("  x{}", b.multiplicity));
            }
            out.push('\n');
        }
    }
    out
}

/// True if no interior strength has |n| ≥ 1.
pub fn only_half_interior(level: &Level) -> bool {
    level
        .configurations
        .iter()
        .all(|b| b.interior.iter().all(|n| n.abs() < Rational64::one()))
}
