//! Gauss-Bonnet balance for a spherical cap and a planar hexagon.

use std::f64::consts::PI;

use defectscope::boundary::{arclength_parametrize, gauss_bonnet_residual, Segment};
use defectscope::geometry::{ChartFamily, Domain, SurfaceChart};
use defectscope::quadrature::QuadratureLevel;

fn main() -> defectscope::Result<()> {
    let th0 = 1.0;
    let cap = SurfaceChart::new(
        ChartFamily::Sphere { radius: 1.0 },
        Domain::Rectangle {
            min: [0.0, 0.0],
            max: [th0, 2.0 * PI],
        },
        vec![],
    )?;
    let rim = arclength_parametrize(
        &cap,
        0,
        vec![Segment::Line {
            from: [th0, 0.0],
            to: [th0, 2.0 * PI],
        }],
    )?;
    let gb = gauss_bonnet_residual(&cap, &[rim], 1, QuadratureLevel::Q3)?;
    println!("cap:     kg = {:.12}  K = {:.12}  residual = {:.2e}", gb.kg_integral, gb.curvature_integral, gb.residual);

    let hex = Domain::Polygon {
        vertices: (0..6).map(|k| [(PI / 3.0 * k as f64).cos(), (PI / 3.0 * k as f64).sin()]).collect(),
    };
    let chart = SurfaceChart::new(ChartFamily::Plane, hex.clone(), vec![])?;
    let comps = hex
        .default_boundary()
        .into_iter()
        .enumerate()
        .map(|(i, s)| arclength_parametrize(&chart, i, s))
        .collect::<defectscope::Result<Vec<_>>>()?;
    let gb = gauss_bonnet_residual(&chart, &comps, 1, QuadratureLevel::Q3)?;
    println!("hexagon: corners = {:.12}  residual = {:.2e}", gb.exterior_angle_sum, gb.residual);
    Ok(())
}
