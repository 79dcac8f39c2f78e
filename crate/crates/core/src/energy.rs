//! One-constant energy on punctured domains and its logarithmic divergence.
//!
//! Ω_ε is split by a smooth partition of unity: polar patches around each
//! puncture, integrated in the log-radial variable s = log r, and the
//! parameter domain grid carrying the complementary weight.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::fields::{boundary_arc, dist, Loop, TangentField};
use crate::geometry::{Domain, SurfaceChart, P2};
use crate::quadrature::{GaussLegendre, KahanSum, QuadratureLevel};

/// Which terms of the integrand to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyTerms {
    Full,
    /// Covariant derivative only, without the shape operator term.
    Intrinsic,
}

/// A removed disk B̄_ε(center) and the polar patch ε ≤ r ≤ radius around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Puncture {
    pub center: P2,
    pub eps: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    /// |E(level) − E(coarser level)|.
    pub estimate: f64,
    pub patches: Vec<f64>,
    pub background: f64,
}

/// Integrand (|Du/∂ω1|² + |Du/∂ω2|² + |B[u]|²)|x¹||x²| at ω.
///
/// With ψ the angle of u in the frame, Du/∂ωi = (∂ψ/∂ωi + F_i) N×u, and
/// B_j[u] = Σ_i u_i L_ij/|x^i|. ∂ψ is taken from the doubled vector
/// (cos 2ψ, sin 2ψ), which is smooth for directors too.
pub fn energy_density(
    field: &TangentField,
    chart: &SurfaceChart,
    w: P2,
    h: f64,
    terms: EnergyTerms,
) -> Result<f64> {
    let Some(u) = field.unit(w) else {
        return Ok(0.0);
    };
    let geo = chart.local(w)?;
    let doubled = |p: P2| -> [f64; 2] {
        match field.unit(p) {
            Some([c, s]) => [c * c - s * s, 2.0 * c * s],
            None => [0.0, 0.0],
        }
    };
    let d0 = [u[0] * u[0] - u[1] * u[1], 2.0 * u[0] * u[1]];
    let mut energy = 0.0;
    for (j, e) in [[h, 0.0], [0.0, h]].iter().enumerate() {
        let p = doubled([w[0] + e[0], w[1] + e[1]]);
        let m = doubled([w[0] - e[0], w[1] - e[1]]);
        let dw = [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)];
        let dpsi = 0.5 * (d0[0] * dw[1] - d0[1] * dw[0]);
        energy += (dpsi + geo.f[j]).powi(2);
    }
    if terms == EnergyTerms::Full {
        for j in 0..2 {
            let b: f64 = (0..2).map(|i| u[i] * geo.l[i][j] / geo.lengths[i]).sum();
            energy += b * b;
        }
    }
    Ok(energy * geo.lengths[0] * geo.lengths[1])
}

/// Smooth cutoff: 1 for r ≤ R/2, 0 for r ≥ R, C∞ in between. The patch
/// carries the weight φ and the background 1 − φ.
pub fn cutoff(r: f64, radius: f64) -> f64 {
    let t = 2.0 * r / radius - 1.0;
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let g = |x: f64| (-1.0 / x).exp();
    g(1.0 - t) / (g(1.0 - t) + g(t))
}

fn fd_step(chart: &SurfaceChart, punctures: &[Puncture], w: P2) -> f64 {
    let near = punctures
        .iter()
        .map(|p| dist(p.center, w))
        .fold(f64::INFINITY, f64::min);
    (1e-6 * chart.domain().diameter()).min(1e-4 * near)
}

/// Angular range of the patch around `p`, from the arc of the outer circle
/// inside Ω. Straight boundaries near the puncture keep it exact for all
/// smaller radii; nodes outside Ω are masked regardless.
fn patch_span(dom: &Domain, p: &Puncture) -> Result<(f64, f64)> {
    if dom.boundary_distance(p.center) > p.radius * (1.0 + 1e-9) {
        return Ok((0.0, 2.0 * PI));
    }
    match boundary_arc(dom, p.center, p.radius)? {
        Loop::Arc { start, end, .. } => {
            let end = if end <= start { end + 2.0 * PI } else { end };
            Ok((start, end))
        }
        _ => unreachable!(),
    }
}

fn patch_integral(
    field: &TangentField,
    chart: &SurfaceChart,
    all: &[Puncture],
    p: &Puncture,
    level: QuadratureLevel,
    terms: EnergyTerms,
) -> Result<f64> {
    let dom = chart.domain();
    let (t0, t1) = patch_span(dom, p)?;
    let rule = GaussLegendre::new(level.order());
    let width = 4.0 / level.panels() as f64;
    let smax = (p.radius / p.eps).ln();
    // φ = 1 up to s_half; the cutoff layer gets its own finer panels
    let s_half = (0.5 * p.radius / p.eps).ln().max(0.0);
    let mut intervals = Vec::new();
    let n_in = (s_half / width).ceil() as usize;
    for i in 0..n_in {
        let h = s_half / n_in as f64;
        intervals.push((h * i as f64, h * (i + 1) as f64));
    }
    let n_cut = level.panels();
    for i in 0..n_cut {
        let h = (smax - s_half) / n_cut as f64;
        intervals.push((s_half + h * i as f64, s_half + h * (i + 1) as f64));
    }
    let nt = ((level.panels() as f64 * (t1 - t0) / (2.0 * PI)).ceil() as usize).max(1);
    let ht = (t1 - t0) / nt as f64;
    let tol = 1e-12 * dom.diameter();
    let panel = |&(s_lo, s_hi): &(f64, f64)| -> Result<f64> {
        let mut acc = KahanSum::default();
        for (s, ws) in rule.on(s_lo, s_hi) {
            let r = p.eps * s.exp();
            for j in 0..nt {
                let a = t0 + ht * j as f64;
                for (t, wt) in rule.on(a, a + ht) {
                    let w = [p.center[0] + r * t.cos(), p.center[1] + r * t.sin()];
                    if !dom.contains(w, tol) {
                        continue;
                    }
                    let h = fd_step(chart, all, w);
                    let phi = cutoff(r, p.radius);
                    acc.add(ws * wt * r * r * phi * energy_density(field, chart, w, h, terms)?);
                }
            }
        }
        Ok(acc.value())
    };
    let parts: Vec<Result<f64>> = intervals.par_iter().map(panel).collect();
    let mut acc = KahanSum::default();
    for v in parts {
        acc.add(v?);
    }
    Ok(acc.value())
}

fn background_integral(
    field: &TangentField,
    chart: &SurfaceChart,
    punctures: &[Puncture],
    level: QuadratureLevel,
    terms: EnergyTerms,
) -> Result<f64> {
    let centers: Vec<P2> = punctures.iter().map(|p| p.center).collect();
    chart.domain().integrate(level, &centers, |w| {
        let mut keep = 1.0;
        for p in punctures {
            keep *= 1.0 - cutoff(dist(p.center, w), p.radius);
        }
        if keep == 0.0 {
            return Ok(0.0);
        }
        Ok(keep * energy_density(field, chart, w, fd_step(chart, punctures, w), terms)?)
    })
}

fn energy_at(
    field: &TangentField,
    chart: &SurfaceChart,
    punctures: &[Puncture],
    level: QuadratureLevel,
    terms: EnergyTerms,
) -> Result<(f64, Vec<f64>, f64)> {
    let patches = punctures
        .iter()
        .map(|p| patch_integral(field, chart, punctures, p, level, terms))
        .collect::<Result<Vec<f64>>>()?;
    let background = background_integral(field, chart, punctures, level, terms)?;
    let value = patches.iter().sum::<f64>() + background;
    Ok((value, patches, background))
}

fn check_resolved(value: f64, estimate: f64) -> Result<()> {
    if estimate > 0.01 * value.abs() + 1e-12 {
        return Err(Error::QuadratureUnresolved { estimate, value });
    }
    Ok(())
}

fn validate_punctures(chart: &SurfaceChart, punctures: &[Puncture]) -> Result<()> {
    for (k, p) in punctures.iter().enumerate() {
        if !(p.eps > 0.0 && p.radius > 0.0 && p.eps.is_finite() && p.radius.is_finite()) {
            return Err(Error::spec(
                format!("punctures[{k}]"),
                "radii must be positive and finite",
            ));
        }
        if p.eps >= 0.5 * p.radius {
            return Err(Error::spec(
                format!("punctures[{k}]"),
                "ε must lie below half the patch radius",
            ));
        }
        if !chart.domain().contains(p.center, 1e-9 * chart.domain().diameter()) {
            return Err(Error::OutsideDomain(p.center[0], p.center[1]));
        }
        for q in &punctures[k + 1..] {
            if dist(p.center, q.center) < p.radius + q.radius {
                return Err(Error::spec(
                    format!("punctures[{k}]"),
                    "patch disks overlap",
                ));
            }
        }
    }
    Ok(())
}

/// E over Ω with the closed disks B̄_ε removed around each puncture.
pub fn dirichlet_energy(
    field: &TangentField,
    chart: &SurfaceChart,
    punctures: &[Puncture],
    level: QuadratureLevel,
    terms: EnergyTerms,
) -> Result<EnergyValue> {
    validate_punctures(chart, punctures)?;
    let (value, patches, background) = energy_at(field, chart, punctures, level, terms)?;
    let (coarse, _, _) = energy_at(field, chart, punctures, level.coarser(), terms)?;
    let estimate = (value - coarse).abs();
    check_resolved(value, estimate)?;
    Ok(EnergyValue {
        value,
        estimate,
        patches,
        background,
    })
}

/// Radii for a divergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// Outer radius R of the patch around the site.
    pub radius: f64,
    /// ε_1 > … > ε_K.
    pub eps: Vec<f64>,
}

impl Schedule {
    /// ε_k = R·ratio^k for k = 1..=count.
    pub fn geometric(radius: f64, count: usize, ratio: f64) -> Self {
        Schedule {
            radius,
            eps: (1..=count).map(|k| radius * ratio.powi(k as i32)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::spec("energy.radius", "must be positive"));
        }
        if self.eps.len() < 7 {
            return Err(Error::spec(
                "energy.eps",
                "at least 7 radii are needed (5 after discarding the two largest)",
            ));
        }
        if self.eps[0] >= 0.5 * self.radius {
            return Err(Error::spec("energy.eps", "radii must lie below half the outer radius"));
        }
        if self.eps.iter().any(|e| !(*e > 0.0)) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::spec("energy.eps", "radii must be positive and strictly decreasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub energy: f64,
    pub estimate: f64,
    /// Slope against the previous point, if any.
    pub running_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySweep {
    pub site: P2,
    pub radius: f64,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of E against log(1/ε), two largest ε discarded.
    pub slope: f64,
    pub intercept: f64,
    /// 95% half-width of the slope.
    pub slope_halfwidth: f64,
    /// Root-mean-square fit residual.
    pub fit_residual: f64,
    pub fit_points: usize,
}

impl EnergySweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,energy,running_slope\n");
        for p in &self.points {
            let slope = p.running_slope.map(|s| format!("{s:.10e}")).unwrap_or_default();
            out.push_str(&format!("{:.10e},{:.10e},{}\n", p.eps, p.energy, slope));
        }
        out
    }
}

/// Least-squares fit y = a + b x. Returns (b, a, 95% half-width of b, rms residual).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let dof = n - 2.0;
    let half = if dof > 0.0 {
        let se = (sse / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        t * se
    } else {
        f64::NAN
    };
    (b, a, half, (sse / n).sqrt())
}

/// E(ε) for a shrinking puncture at `site` (others fixed at the smallest ε
/// of the schedule) and the fitted divergence rate.
pub fn divergence_slope(
    field: &TangentField,
    chart: &SurfaceChart,
    site: P2,
    others: &[P2],
    schedule: &Schedule,
    level: QuadratureLevel,
) -> Result<EnergySweep> {
    schedule.validate()?;
    let eps_min = *schedule.eps.last().unwrap();
    let mut punctures = vec![Puncture {
        center: site,
        eps: schedule.eps[0],
        radius: schedule.radius,
    }];
    punctures.extend(others.iter().map(|&c| Puncture {
        center: c,
        eps: eps_min,
        radius: schedule.radius,
    }));
    validate_punctures(chart, &punctures)?;
    let terms = EnergyTerms::Full;
    // everything except the site patch is independent of ε
    let mut fixed = [0.0; 2];
    for (slot, lv) in [level, level.coarser()].into_iter().enumerate() {
        let mut acc = background_integral(field, chart, &punctures, lv, terms)?;
        for p in &punctures[1..] {
            acc += patch_integral(field, chart, &punctures, p, lv, terms)?;
        }
        fixed[slot] = acc;
    }
    let mut points: Vec<SweepPoint> = Vec::with_capacity(schedule.eps.len());
    for &eps in &schedule.eps {
        punctures[0].eps = eps;
        let fine = fixed[0] + patch_integral(field, chart, &punctures, &punctures[0], level, terms)?;
        let coarse = fixed[1]
            + patch_integral(field, chart, &punctures, &punctures[0], level.coarser(), terms)?;
        let estimate = (fine - coarse).abs();
        check_resolved(fine, estimate)?;
        let running_slope = points
            .last()
            .map(|prev| (fine - prev.energy) / (prev.eps / eps).ln());
        points.push(SweepPoint {
            eps,
            energy: fine,
            estimate,
            running_slope,
        });
    }
    let used = &points[2..];
    let x: Vec<f64> = used.iter().map(|p| (1.0 / p.eps).ln()).collect();
    let y: Vec<f64> = used.iter().map(|p| p.energy).collect();
    let (slope, intercept, slope_halfwidth, fit_residual) = fit_line(&x, &y);
    let fit_points = used.len();
    Ok(EnergySweep {
        site,
        radius: schedule.radius,
        points,
        slope,
        intercept,
        slope_halfwidth,
        fit_residual,
        fit_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldMode;
    use crate::geometry::ChartFamily;

    fn disk(r: f64, t1: f64) -> SurfaceChart {
        SurfaceChart::new(
            ChartFamily::Plane,
            Domain::Sector {
                center: [0.0, 0.0],
                r_inner: 0.0,
                r_outer: r,
                theta0: 0.0,
                theta1: t1,
            },
            vec![],
        )
        .unwrap()
    }

    fn at_origin(eps: f64, radius: f64) -> Vec<Puncture> {
        vec![Puncture {
            center: [0.0, 0.0],
            eps,
            radius,
        }]
    }

    #[test]
    fn degree_one_annulus() {
        let chart = disk(1.0, 2.0 * PI);
        let u = TangentField::new(FieldMode::Vector, "w1", "w2").unwrap();
        for eps in [1e-1, 1e-3] {
            let e = dirichlet_energy(&u, &chart, &at_origin(eps, 0.5), QuadratureLevel::Q2, EnergyTerms::Full)
                .unwrap();
            let exact = 2.0 * PI * (1.0 / eps).ln();
            assert!((e.value - exact).abs() < 0.01 * exact, "{} vs {exact}", e.value);
        }
    }

    #[test]
    fn constant_field_has_no_energy() {
        let chart = SurfaceChart::new(
            ChartFamily::Plane,
            Domain::Rectangle {
                min: [-1.0, -1.0],
                max: [1.0, 1.0],
            },
            vec![],
        )
        .unwrap();
        let u = TangentField::new(FieldMode::Vector, "1", "0").unwrap();
        let p = vec![Puncture {
            center: [0.2, 0.1],
            eps: 0.01,
            radius: 0.3,
        }];
        let e = dirichlet_energy(&u, &chart, &p, QuadratureLevel::Q2, EnergyTerms::Full).unwrap();
        assert!(e.value.abs() < 1e-12);
    }

    #[test]
    fn sphere_band_meridian_field() {
        let (a, b) = (0.4, 2.5);
        let chart = SurfaceChart::new(
            ChartFamily::Sphere { radius: 1.0 },
            Domain::Rectangle {
                min: [a, 0.0],
                max: [b, 2.0 * PI],
            },
            vec![],
        )
        .unwrap();
        let u = TangentField::new(FieldMode::Vector, "1", "0").unwrap();
        let e = dirichlet_energy(&u, &chart, &[], QuadratureLevel::Q3, EnergyTerms::Full).unwrap();
        // |Du/∂ω2|² = F2² = cos²θ, |B|² = L11² = 1, weight sinθ:
        // 2π ∫ (cos²θ + 1) sinθ dθ
        let prim = |t: f64| -t.cos().powi(3) / 3.0 - t.cos();
        let exact = 2.0 * PI * (prim(b) - prim(a));
        assert!((e.value - exact).abs() < 1e-8 * exact, "{} vs {exact}", e.value);
        // the 1D reduction integrated numerically agrees as well
        let one_d = 2.0 * PI * GaussLegendre::new(24).integrate(a, b, |t| (t.cos().powi(2) + 1.0) * t.sin());
        assert!((one_d - exact).abs() < 1e-12);
        let intrinsic =
            dirichlet_energy(&u, &chart, &[], QuadratureLevel::Q3, EnergyTerms::Intrinsic).unwrap();
        assert!(intrinsic.value < e.value);
        let prim_k = |t: f64| -t.cos().powi(3) / 3.0;
        assert!((intrinsic.value - 2.0 * PI * (prim_k(b) - prim_k(a))).abs() < 1e-8);
    }

    #[test]
    fn monotone_in_eps() {
        let chart = SurfaceChart::new(
            ChartFamily::Plane,
            Domain::Rectangle {
                min: [-1.0, -1.0],
                max: [1.0, 1.0],
            },
            vec![],
        )
        .unwrap();
        let u = TangentField::new(FieldMode::Director, "w1^2 - w2^2 + 0.3*w1", "2*w1*w2 + 0.1").unwrap();
        let zs = crate::fields::locate_zeros(&u, &chart, &[]).unwrap();
        let mut last = 0.0;
        for eps in [0.05, 0.02, 0.01, 0.005] {
            let p: Vec<Puncture> = zs
                .zeros
                .iter()
                .map(|z| Puncture {
                    center: z.point,
                    eps,
                    radius: 0.9 * zs.r_sep,
                })
                .collect();
            let e = dirichlet_energy(&u, &chart, &p, QuadratureLevel::Q3, EnergyTerms::Full).unwrap();
            assert!(e.value > last);
            last = e.value;
        }
    }

    fn sweep(chart: &SurfaceChart, u: &TangentField) -> EnergySweep {
        let s = Schedule::geometric(0.5, 9, 10f64.powf(-0.5));
        divergence_slope(u, chart, [0.0, 0.0], &[], &s, QuadratureLevel::Q2).unwrap()
    }

    #[test]
    fn interior_slopes() {
        let chart = disk(1.0, 2.0 * PI);
        let one = TangentField::new(FieldMode::Vector, "w1", "w2").unwrap();
        let s = sweep(&chart, &one);
        assert!((s.slope - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{}", s.slope);
        assert_eq!(s.fit_points, 7);
        let half = TangentField::new(
            FieldMode::Director,
            "cos(atan2(w2, w1)/2)",
            "sin(atan2(w2, w1)/2)",
        )
        .unwrap();
        let s = sweep(&chart, &half);
        assert!((s.slope - PI / 2.0).abs() < 0.02 * PI / 2.0, "{}", s.slope);
    }

    #[test]
    fn boundary_half_defect_slope() {
        // u = (cosϑ, sinϑ) on the half-disk is tangent to the diameter on
        // both sides; the arc index is 1/2 and the rate is 4π²n²/π = π
        let chart = disk(1.0, PI);
        let u = TangentField::new(FieldMode::Director, "w1", "w2").unwrap();
        let s = sweep(&chart, &u);
        assert!((s.slope - PI).abs() < 0.02 * PI, "{}", s.slope);
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..6).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (b, a, half, res) = fit_line(&x, &y);
        assert!((b - 3.0).abs() < 1e-12 && (a + 1.0).abs() < 1e-12);
        assert!(half.abs() < 1e-9 && res < 1e-12);
    }

    #[test]
    fn schedule_checks() {
        assert!(Schedule::geometric(0.5, 6, 0.5).validate().is_err());
        assert!(Schedule::geometric(0.5, 8, 0.4).validate().is_ok());
        assert!(Schedule::geometric(0.5, 8, 0.6).validate().is_err());
        let s = Schedule {
            radius: 0.5,
            eps: vec![0.1, 0.2, 0.05, 0.01, 0.005, 0.001, 0.0005],
        };
        assert!(s.validate().is_err());
    }
}
