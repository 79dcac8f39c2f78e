//! Logarithmic energy divergence around a degree-one defect.

use std::f64::consts::PI;

use defectscope::energy::{divergence_slope, Schedule};
use defectscope::fields::{FieldMode, TangentField};
use defectscope::geometry::{ChartFamily, Domain, SurfaceChart};
use defectscope::quadrature::QuadratureLevel;

fn main() -> defectscope::Result<()> {
    let chart = SurfaceChart::new(
        ChartFamily::Plane,
        Domain::Rectangle {
            min: [-1.0, -1.0],
            max: [1.0, 1.0],
        },
        vec![],
    )?;
    let u = TangentField::new(FieldMode::Vector, "w1 - 0.1", "w2")?;
    let schedule = Schedule::geometric(0.4, 9, 10f64.powf(-0.5));
    let sweep = divergence_slope(&u, &chart, [0.1, 0.0], &[], &schedule, QuadratureLevel::Q3)?;
    print!("{}", sweep.to_csv());
    println!("slope = {:.6} +/- {:.1e} (2 pi = {:.6})", sweep.slope, sweep.slope_halfwidth, 2.0 * PI);
    Ok(())
}
