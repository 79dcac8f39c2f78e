//! Cross-check the pruned search against exhaustive enumeration.

use defectscope::fields::FieldMode;
use defectscope::predictor::oracle::brute_force_oracle;
use defectscope::predictor::{enumerate_branches, PredictionProblem};
use defectscope::rates::VertexData;
use num_rational::Rational64;

fn main() -> defectscope::Result<()> {
    let taus = [(1, 3), (1, 6), (1, 2), (-1, 6), (2, 3)];
    let p = PredictionProblem::new(
        1,
        taus.iter().map(|&(a, b)| VertexData::planar(Rational64::new(a, b))).collect(),
        FieldMode::Director,
    );
    let fast = enumerate_branches(&p)?;
    let slow = brute_force_oracle(&p)?;
    println!("search: Q = {} with {} configurations", fast.minimum().q, fast.minimum().count);
    println!("oracle: Q = {} with {} configurations", slow.q, slow.count);
    assert_eq!(fast.minimum().configurations, slow.configurations);
    Ok(())
}
