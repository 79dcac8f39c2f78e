//! Per-site divergence rates for a radial director in a triangle.

use defectscope::commands;
use defectscope::spec::parse_problem;

fn main() -> defectscope::Result<()> {
    let p = parse_problem(
        r#"{"schema": 1, "chart": {"family": "plane"},
            "domain": {"type": "regular_polygon", "sides": 3, "radius": 1, "rotation": "pi/2"},
            "mode": "director",
            "field": {"a1": "w1", "a2": "w2"}}"#,
    )?;
    let out = commands::rates(&p)?;
    print!("{}", out.text);
    print!("{}", out.csv.unwrap_or_default());
    Ok(())
}
