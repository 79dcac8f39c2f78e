//! Indices of isolated zeros for vector and director fields.

use defectscope::fields::{index_around, FieldMode, Loop, TangentField};
use defectscope::geometry::{ChartFamily, Domain, SurfaceChart};
use defectscope::report::rational_string;

fn main() -> defectscope::Result<()> {
    let chart = SurfaceChart::new(
        ChartFamily::Plane,
        Domain::Rectangle {
            min: [-1.0, -1.0],
            max: [1.0, 1.0],
        },
        vec![],
    )?;
    let around = |r| Loop::Circle {
        center: [0.0, 0.0],
        radius: r,
    };
    let z2 = TangentField::new(FieldMode::Vector, "w1^2 - w2^2", "2*w1*w2")?;
    for r in [0.01, 0.1, 0.5] {
        let i = index_around(&z2, &chart, &around(r), false)?;
        println!("z^2, r = {r}: raw {:.12}  index {}", i.raw, rational_string(&i.snapped.unwrap()));
    }
    let half = TangentField::new(FieldMode::Director, "cos(atan2(w2, w1)/2)", "sin(atan2(w2, w1)/2)")?;
    let i = index_around(&half, &chart, &around(0.3), false)?;
    println!("director half angle: raw {:.12}  index {}", i.raw, rational_string(&i.snapped.unwrap()));
    Ok(())
}
