//! Minimal-rate strength configurations for polygons and the sphere.

use defectscope::fields::FieldMode;
use defectscope::predictor::{describe, enumerate_branches, PredictionProblem};

fn main() -> defectscope::Result<()> {
    for n in [3, 4, 6] {
        let mut p = PredictionProblem::regular_polygon(n, FieldMode::Director);
        p.mod_symmetry = n == 6;
        let pred = enumerate_branches(&p)?;
        println!("{n}-gon");
        print!("{}", describe(&pred));
    }
    let mut sphere = PredictionProblem::new(2, vec![], FieldMode::Director);
    sphere.extra_levels = 1;
    println!("sphere");
    print!("{}", describe(&enumerate_branches(&sphere)?));
    Ok(())
}
