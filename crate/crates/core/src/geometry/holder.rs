//! Local Hölder bounds of the metric coefficients around a point.
//!
//! Near ω̂ each |x^i| is sandwiched as
//! `|x^i|(ω̂) + h⁻ r^α <= |x^i|(ω) <= |x^i|(ω̂) + h⁺ r^α`, `r = |ω − ω̂| <= ρ`.
//! The exponent comes from log–log regressions along rays; the bounds are
//! the extreme residual ratios, re-checked on a held-out sample.

use std::f64::consts::PI;

use serde::Serialize;

use super::chart::SurfaceChart;
use super::domain::P2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct HolderData {
    pub center: P2,
    pub radius: f64,
    pub alpha: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// min(|x¹|, |x²|) at the center.
    pub m_minus: f64,
    /// max(|x¹|, |x²|) at the center.
    pub m_plus: f64,
    /// Per-axis center values |x¹|(ω̂), |x²|(ω̂).
    pub center_lengths: [f64; 2],
    pub rays: usize,
}

impl HolderData {
    /// Largest sandwich violation over the given points (0 when satisfied).
    pub fn violation(&self, chart: &SurfaceChart, points: &[P2]) -> (f64, f64) {
        let slack = 1e-9 * chart.metric_scale();
        let mut worst = (0.0, 0.0);
        for &p in points {
            let r = (p[0] - self.center[0]).hypot(p[1] - self.center[1]);
            if r == 0.0 {
                continue;
            }
            let ra = r.powf(self.alpha);
            let lengths = chart.metric_lengths(p);
            for i in 0..2 {
                let lo = self.center_lengths[i] + self.h_minus * ra;
                let hi = self.center_lengths[i] + self.h_plus * ra;
                let tol = slack + 1e-6 * (self.h_plus - self.h_minus).abs().max(self.h_plus.abs()) * ra;
                let v = (lo - lengths[i] - tol).max(lengths[i] - hi - tol).max(0.0);
                if v > worst.0 {
                    worst = (v, r);
                }
            }
        }
        worst
    }
}

const RADII: usize = 16;
const MIN_RAYS: usize = 8;
const MAX_RAYS: usize = 16;

fn ray_angles(chart: &SurfaceChart, center: P2, rho: f64, offset: f64) -> Vec<f64> {
    let dom = chart.domain();
    let tol = 1e-12 * dom.diameter().max(1.0);
    let inside = |a: f64| {
        [rho / 100.0, rho / 10.0, rho].iter().all(|&r| {
            dom.contains([center[0] + r * a.cos(), center[1] + r * a.sin()], tol)
        })
    };
    let candidates: Vec<f64> = (0..64)
        .map(|k| 2.0 * PI * (k as f64 + offset) / 64.0)
        .filter(|&a| inside(a))
        .collect();
    if candidates.len() <= MAX_RAYS {
        return candidates;
    }
    let step = candidates.len() as f64 / MAX_RAYS as f64;
    (0..MAX_RAYS)
        .map(|k| candidates[((k as f64) * step) as usize])
        .collect()
}

fn radii(rho: f64, shift: f64) -> Vec<f64> {
    (0..RADII)
        .map(|k| {
            let t = (k as f64 + shift) / (RADII - 1) as f64;
            rho / 100.0 * 100f64.powf(t.min(1.0))
        })
        .collect()
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Fits the Hölder sandwich of both metric coefficients at `center` on
/// `B_ρ(center) ∩ Ω`.
pub fn holder_fit(chart: &SurfaceChart, center: P2, rho: f64) -> Result<HolderData> {
    if !(rho > 0.0) {
        return Err(Error::spec("holder_fit", "radius must be positive"));
    }
    let center_lengths = chart.metric_lengths(center);
    let m_minus = center_lengths[0].min(center_lengths[1]);
    let m_plus = center_lengths[0].max(center_lengths[1]);
    let angles = ray_angles(chart, center, rho, 0.0);
    if angles.len() < MIN_RAYS {
        return Err(Error::FitFailed {
            violation: f64::INFINITY,
            radius: rho,
        });
    }
    let rs = radii(rho, 0.0);
    let scale = chart.metric_scale();
    let flat_tol = 1e-10 * scale;

    // samples[(ray, axis)] = [(r, |x^i|(ω) − |x^i|(ω̂))]
    let mut series: Vec<Vec<(f64, f64)>> = Vec::new();
    for &a in &angles {
        let mut per_axis = [Vec::new(), Vec::new()];
        for &r in &rs {
            let p = [center[0] + r * a.cos(), center[1] + r * a.sin()];
            let l = chart.metric_lengths(p);
            for i in 0..2 {
                per_axis[i].push((r, l[i] - center_lengths[i]));
            }
        }
        series.extend(per_axis);
    }

    let mut slopes: Vec<f64> = series
        .iter()
        .filter(|s| s.iter().all(|(_, d)| d.abs() > flat_tol))
        .map(|s| {
            let xs: Vec<f64> = s.iter().map(|(r, _)| r.ln()).collect();
            let ys: Vec<f64> = s.iter().map(|(_, d)| d.abs().ln()).collect();
            ols_slope(&xs, &ys)
        })
        .collect();
    let alpha = if slopes.is_empty() {
        0.0
    } else {
        slopes.sort_by(|a, b| a.total_cmp(b));
        let med = slopes[slopes.len() / 2];
        // exponents within fit noise of an integer are reported as that integer
        if (med - med.round()).abs() < 0.02 {
            med.round()
        } else {
            med
        }
    };

    let mut h_minus = f64::INFINITY;
    let mut h_plus = f64::NEG_INFINITY;
    for s in &series {
        for &(r, d) in s {
            let ratio = d / r.powf(alpha);
            h_minus = h_minus.min(ratio);
            h_plus = h_plus.max(ratio);
        }
    }
    if alpha == 0.0 && h_minus.abs() <= flat_tol && h_plus.abs() <= flat_tol {
        h_minus = 0.0;
        h_plus = 0.0;
    }

    let data = HolderData {
        center,
        radius: rho,
        alpha,
        h_minus,
        h_plus,
        m_minus,
        m_plus,
        center_lengths,
        rays: angles.len(),
    };

    if m_plus <= chart.tol_deg() && !(h_minus > 0.0) {
        return Err(Error::FitFailed {
            violation: -h_minus,
            radius: rho,
        });
    }

    // held-out rays (half-step rotated) and radii (half-step shifted)
    let held_angles = ray_angles(chart, center, rho, 0.5);
    let held_radii = radii(rho, 0.5);
    let held: Vec<P2> = held_angles
        .iter()
        .flat_map(|&a| {
            held_radii
                .iter()
                .filter(|&&r| r <= rho)
                .map(move |&r| [center[0] + r * a.cos(), center[1] + r * a.sin()])
        })
        .collect();
    let (violation, radius) = data.violation(chart, &held);
    if violation > 0.0 {
        return Err(Error::FitFailed { violation, radius });
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ChartFamily, ConeForm, Domain};

    #[test]
    fn plane_is_flat() {
        let c = SurfaceChart::new(
            ChartFamily::Plane,
            Domain::Rectangle {
                min: [-1.0, -1.0],
                max: [1.0, 1.0],
            },
            vec![],
        )
        .unwrap();
        let h = holder_fit(&c, [0.1, 0.2], 0.3).unwrap();
        assert_eq!(h.alpha, 0.0);
        assert_eq!(h.h_minus, 0.0);
        assert_eq!(h.h_plus, 0.0);
        assert_eq!(h.m_minus, 1.0);
        assert_eq!(h.m_plus, 1.0);
    }

    #[test]
    fn sphere_pole_is_linear() {
        let c = SurfaceChart::new(
            ChartFamily::Sphere { radius: 1.0 },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [PI, 2.0 * PI],
            },
            vec![],
        )
        .unwrap();
        let h = holder_fit(&c, [0.0, PI], 0.1).unwrap();
        assert_eq!(h.alpha, 1.0);
        assert_eq!(h.m_plus, 1.0);
        assert!(h.m_minus.abs() < 1e-15);
        assert!(h.h_minus >= -1e-12 && h.h_plus <= 1.0 + 1e-12);
    }

    #[test]
    fn conformal_cone_apex() {
        let c = SurfaceChart::new(
            ChartFamily::Cone {
                half_angle: PI / 6.0,
                form: ConeForm::Conformal { exponent: 2.0 },
            },
            Domain::Rectangle {
                min: [0.0, 0.0],
                max: [1.0, 1.0],
            },
            vec![[0.0, 0.0]],
        )
        .unwrap();
        let h = holder_fit(&c, [0.0, 0.0], 0.2).unwrap();
        assert_eq!(h.alpha, 1.0);
        assert!(h.m_plus < 1e-9);
        assert!((h.h_minus - 2.0).abs() < 1e-4 && (h.h_plus - 2.0).abs() < 1e-4, "{h:?}");
    }
}
