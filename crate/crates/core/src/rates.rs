//! Logarithmic energy-divergence rates of defects and the total rate Q.
//!
//! Normalized rates drop the global 2π: an interior defect contributes
//! q^e n², a boundary defect (2π/wedge) q^e n². Raw rates are 2π times that.

use std::f64::consts::PI;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{to_f64, DefectSite, SiteKind};
use crate::geometry::HolderData;

/// Exponent applied to the weight q: 2 by default, 1 for the abbreviated
/// form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum QExponent {
    One,
    #[default]
    Two,
}

impl QExponent {
    pub fn value(self) -> i32 {
        match self {
            QExponent::One => 1,
            QExponent::Two => 2,
        }
    }

    pub fn parse(v: i64) -> Option<Self> {
        match v {
            1 => Some(QExponent::One),
            2 => Some(QExponent::Two),
            _ => None,
        }
    }

    pub fn apply(self, q: f64) -> f64 {
        q.powi(self.value())
    }

    pub fn apply_exact(self, q: Rational64) -> Rational64 {
        match self {
            QExponent::One => q,
            QExponent::Two => q * q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightSource {
    MetricRatio,
    HolderRatio,
    Uniform,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateWeight {
    pub q: f64,
    pub source: WeightSource,
    /// 2π/wedge for boundary sites, 1 in the interior.
    pub factor: f64,
}

/// q = m⁻/m⁺, or h⁻/h⁺ when m⁺ vanishes (below `tol_deg`).
pub fn weight_from_holder(h: &HolderData, tol_deg: f64) -> Result<RateWeight> {
    let (q, source) = if h.m_plus > tol_deg {
        (h.m_minus / h.m_plus, WeightSource::MetricRatio)
    } else {
        if !(h.h_plus > 0.0) {
            return Err(Error::FitFailed {
                violation: h.h_plus,
                radius: h.radius,
            });
        }
        (h.h_minus / h.h_plus, WeightSource::HolderRatio)
    };
    Ok(RateWeight {
        q: q.clamp(0.0, 1.0),
        source,
        factor: 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    pub normalized: f64,
    pub raw: f64,
}

impl Rate {
    fn from_normalized(normalized: f64) -> Rate {
        Rate {
            normalized,
            raw: 2.0 * PI * normalized,
        }
    }
}

/// q^e n².
pub fn interior_rate(q: f64, n: f64, e: QExponent) -> Rate {
    Rate::from_normalized(e.apply(q) * n * n)
}

/// (2π/wedge) q^e n².
pub fn boundary_rate(q: f64, n: f64, wedge: f64, e: QExponent) -> Result<Rate> {
    if !(wedge > 1e-12) {
        return Err(Error::ZeroWedge(wedge));
    }
    Ok(Rate::from_normalized(2.0 * PI / wedge * e.apply(q) * n * n))
}

/// Boundary vertex data with angles as rational multiples of π.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexData {
    /// τ/π.
    pub tau: Rational64,
    /// wedge/π; π − τ on planar polygons.
    pub wedge: Rational64,
    pub q: Rational64,
}

impl VertexData {
    pub fn planar(tau: Rational64) -> Self {
        VertexData {
            tau,
            wedge: Rational64::one() - tau,
            q: Rational64::one(),
        }
    }

    /// 2π/wedge as a rational (wedge = wπ gives 2/w).
    pub fn factor(&self) -> Result<Rational64> {
        if self.wedge <= Rational64::zero() {
            return Err(Error::ZeroWedge(to_f64(self.wedge) * PI));
        }
        Ok(Rational64::from_integer(2) / self.wedge)
    }

    /// m − τ/2π.
    pub fn strength(&self, m: Rational64) -> Rational64 {
        m - self.tau / 2
    }
}

/// Interior strengths and boundary m-values of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DefectConfiguration {
    pub m: Vec<Rational64>,
    pub interior: Vec<Rational64>,
}

#[derive(Debug, Clone)]
pub enum InteriorWeights {
    Uniform(Rational64),
    PerSite(Vec<Option<Rational64>>),
}

/// Q = Σ q^e n_i² + Σ (2π/wedge_j) q_j^e (m_j − τ_j/2π)², exactly.
pub fn total_rate(
    config: &DefectConfiguration,
    vertices: &[Option<VertexData>],
    interior: &InteriorWeights,
    e: QExponent,
) -> Result<Rational64> {
    let mut q_total = Rational64::zero();
    for (k, n) in config.interior.iter().enumerate() {
        let q = match interior {
            InteriorWeights::Uniform(q) => *q,
            InteriorWeights::PerSite(v) => v
                .get(k)
                .copied()
                .flatten()
                .ok_or(Error::MissingWeight(k))?,
        };
        q_total += e.apply_exact(q) * n * n;
    }
    if config.m.len() != vertices.len() {
        return Err(Error::MissingWeight(config.interior.len() + vertices.len()));
    }
    for (j, (m, v)) in config.m.iter().zip(vertices).enumerate() {
        let v = v.ok_or(Error::MissingWeight(config.interior.len() + j))?;
        let s = v.strength(*m);
        q_total += v.factor()? * e.apply_exact(v.q) * s * s;
    }
    Ok(q_total)
}

/// One row of a per-site rate table.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub site: usize,
    pub kind: SiteKind,
    pub location: [f64; 2],
    pub q: f64,
    pub source: WeightSource,
    pub factor: f64,
    pub strength: f64,
    pub contribution: f64,
    pub raw: f64,
}

/// Builds rate rows for located sites with their weights (same order).
pub fn rate_table(
    sites: &[DefectSite],
    weights: &[Option<RateWeight>],
    e: QExponent,
) -> Result<Vec<RateRow>> {
    let mut rows = Vec::with_capacity(sites.len());
    for (i, site) in sites.iter().enumerate() {
        let w = weights
            .get(i)
            .cloned()
            .flatten()
            .ok_or(Error::MissingWeight(i))?;
        let n = site.strength();
        let (rate, factor) = match site.wedge {
            Some(wedge) if site.kind.is_boundary() => {
                (boundary_rate(w.q, n, wedge, e)?, 2.0 * PI / wedge)
            }
            _ => (interior_rate(w.q, n, e), 1.0),
        };
        rows.push(RateRow {
            site: i,
            kind: site.kind,
            location: site.location,
            q: w.q,
            source: w.source,
            factor,
            strength: n,
            contribution: rate.normalized,
            raw: rate.raw,
        });
    }
    Ok(rows)
}

pub fn rate_table_csv(rows: &[RateRow]) -> String {
    let mut out = String::from("site,kind,w1,w2,q,source,factor,strength,contribution,raw\n");
    for r in rows {
        let kind = match r.kind {
            SiteKind::Interior => "interior",
            SiteKind::BoundaryVertex => "boundary-vertex",
            SiteKind::BoundarySmooth => "boundary-smooth",
        };
        let source = match r.source {
            WeightSource::MetricRatio => "metric-ratio",
            WeightSource::HolderRatio => "holder-ratio",
            WeightSource::Uniform => "uniform",
        };
        out.push_str(&format!(
            "{},{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.site,
            kind,
            r.location[0],
            r.location[1],
            r.q,
            source,
            r.factor,
            r.strength,
            r.contribution,
            r.raw
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn interior_examples() {
        let e = QExponent::Two;
        assert_eq!(interior_rate(1.0, 0.5, e).normalized, 0.25);
        assert_eq!(interior_rate(1.0, 1.0, e).normalized, 1.0);
        assert_eq!(2.0 * interior_rate(1.0, 0.5, e).normalized, 0.5);
        assert_eq!(interior_rate(0.0, 0.5, e).normalized, 0.0);
        assert!((interior_rate(1.0, 1.0, e).raw - 2.0 * PI).abs() < 1e-15);
        assert_eq!(interior_rate(0.5, 1.0, QExponent::One).normalized, 0.5);
        assert_eq!(interior_rate(0.5, 1.0, QExponent::Two).normalized, 0.25);
    }

    #[test]
    fn boundary_examples() {
        let e = QExponent::Two;
        let hex = boundary_rate(1.0, -1.0 / 6.0, 2.0 * PI / 3.0, e).unwrap();
        assert!((hex.normalized - 1.0 / 12.0).abs() < 1e-15);
        let tri = boundary_rate(1.0, 1.0 / 6.0, PI / 3.0, e).unwrap();
        assert!((tri.normalized - 1.0 / 6.0).abs() < 1e-15);
        let flat = boundary_rate(1.0, 0.5, PI, e).unwrap();
        assert!((flat.normalized - 0.5).abs() < 1e-15);
        assert!(matches!(boundary_rate(1.0, 0.5, 0.0, e), Err(Error::ZeroWedge(_))));
        let v = VertexData::planar(r(1, 3));
        assert_eq!(v.factor().unwrap(), r(3, 1));
    }

    #[test]
    fn total_rate_examples() {
        let e = QExponent::Two;
        let uni = InteriorWeights::Uniform(r(1, 1));
        let tri = vec![Some(VertexData::planar(r(2, 3))); 3];
        let c = DefectConfiguration {
            m: vec![r(1, 2); 3],
            interior: vec![r(-1, 2)],
        };
        assert_eq!(total_rate(&c, &tri, &uni, e).unwrap(), r(3, 4));

        let hex = vec![Some(VertexData::planar(r(1, 3))); 6];
        let ortho = DefectConfiguration {
            m: vec![r(1, 2), r(1, 2), r(0, 1), r(0, 1), r(0, 1), r(0, 1)],
            interior: vec![],
        };
        assert_eq!(total_rate(&ortho, &hex, &uni, e).unwrap(), r(1, 1));
        let ring = DefectConfiguration {
            m: vec![r(0, 1); 6],
            interior: vec![r(1, 1)],
        };
        assert_eq!(total_rate(&ring, &hex, &uni, e).unwrap(), r(3, 2));
    }

    #[test]
    fn missing_weights() {
        let c = DefectConfiguration {
            m: vec![r(1, 2)],
            interior: vec![r(1, 2)],
        };
        let per = InteriorWeights::PerSite(vec![None]);
        let v = vec![Some(VertexData::planar(r(0, 1)))];
        assert!(matches!(
            total_rate(&c, &v, &per, QExponent::Two),
            Err(Error::MissingWeight(0))
        ));
        let uni = InteriorWeights::Uniform(r(1, 1));
        assert!(matches!(
            total_rate(&c, &[None], &uni, QExponent::Two),
            Err(Error::MissingWeight(1))
        ));
    }

    /// Minimal Σ n² over multisets of nonzero half-integers with |n| ≤ 3
    /// summing to s, by exhaustive search over up to 8 members.
    fn min_multiset_cost(s: Rational64) -> Rational64 {
        let values: Vec<Rational64> = (-6..=6).filter(|&k| k != 0).map(|k| r(k, 2)).collect();
        let mut best: Option<Rational64> = if s.is_zero() { Some(Rational64::zero()) } else { None };
        fn rec(
            values: &[Rational64],
            start: usize,
            left: usize,
            sum: Rational64,
            cost: Rational64,
            target: Rational64,
            best: &mut Option<Rational64>,
        ) {
            if sum == target && best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            if left == 0 {
                return;
            }
            for i in start..values.len() {
                rec(values, i, left - 1, sum + values[i], cost + values[i] * values[i], target, best);
            }
        }
        rec(&values, 0, 8, Rational64::zero(), Rational64::zero(), s, &mut best);
        best.unwrap()
    }

    #[test]
    fn halves_minimize_interior_cost() {
        for k in -6..=6 {
            let s = r(k, 2);
            let halves = s.abs() / 2; // 2|s| defects of cost 1/4 each
            assert_eq!(min_multiset_cost(s), halves, "s = {s}");
        }
    }

    proptest! {
        #[test]
        fn doubling_scales_by_four(ms in proptest::collection::vec(-4i64..=4, 1..6),
                                   ns in proptest::collection::vec(-4i64..=4, 0..4),
                                   taus in proptest::collection::vec(-4i64..=4, 6)) {
            let vs: Vec<Option<VertexData>> = ms.iter().enumerate()
                .map(|(i, _)| Some(VertexData::planar(r(taus[i], 6)))).collect();
            let uni = InteriorWeights::Uniform(r(1, 1));
            // doubling strengths means doubling m and τ/2π together
            let c1 = DefectConfiguration {
                m: ms.iter().map(|&m| r(m, 2)).collect(),
                interior: ns.iter().map(|&n| r(n, 2)).collect(),
            };
            let strengths: Vec<Rational64> = c1.m.iter().zip(&vs).map(|(m, v)| v.unwrap().strength(*m)).collect();
            let base = total_rate(&c1, &vs, &uni, QExponent::Two).unwrap();
            let doubled: Rational64 = strengths.iter().zip(&vs)
                .map(|(s, v)| v.unwrap().factor().unwrap() * (s * 2) * (s * 2))
                .sum::<Rational64>()
                + c1.interior.iter().map(|n| (n * 2) * (n * 2)).sum::<Rational64>();
            prop_assert_eq!(doubled, base * 4);
        }

        #[test]
        fn permuting_equal_vertices(ms in proptest::collection::vec(-4i64..=4, 2..7), rot in 0usize..6) {
            let n = ms.len();
            let vs = vec![Some(VertexData::planar(r(1, 3))); n];
            let uni = InteriorWeights::Uniform(r(1, 1));
            let mut rotated = ms.clone();
            rotated.rotate_left(rot % n);
            let a = DefectConfiguration { m: ms.iter().map(|&m| r(m, 2)).collect(), interior: vec![] };
            let b = DefectConfiguration { m: rotated.iter().map(|&m| r(m, 2)).collect(), interior: vec![] };
            prop_assert_eq!(total_rate(&a, &vs, &uni, QExponent::Two).unwrap(),
                            total_rate(&b, &vs, &uni, QExponent::Two).unwrap());
        }
    }
}
