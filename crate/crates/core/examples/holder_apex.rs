//! Hölder bounds of the metric at a cone apex and the resulting weight.

use std::f64::consts::PI;

use defectscope::geometry::{holder_fit, ChartFamily, ConeForm, Domain, SurfaceChart};
use defectscope::rates::weight_from_holder;

fn main() -> defectscope::Result<()> {
    let beta = PI / 6.0;
    let chart = SurfaceChart::new(
        ChartFamily::Cone {
            half_angle: beta,
            form: ConeForm::Conformal { exponent: 2.0 },
        },
        Domain::Sector {
            center: [0.0, 0.0],
            r_inner: 0.0,
            r_outer: 1.0,
            theta0: 0.0,
            theta1: PI / 2.0,
        },
        vec![[0.0, 0.0]],
    )?;
    let h = holder_fit(&chart, [0.0, 0.0], 0.5)?;
    let w = weight_from_holder(&h, chart.tol_deg())?;
    println!("alpha = {:.6}, h- = {:.6}, h+ = {:.6}, m+ = {:.2e}", h.alpha, h.h_minus, h.h_plus, h.m_plus);
    println!("q = {:.6} ({:?})", w.q, w.source);
    Ok(())
}
