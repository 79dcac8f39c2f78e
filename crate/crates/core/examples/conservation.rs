//! Itemized conservation law for a vector field with a zero in a corner.

use defectscope::commands;
use defectscope::spec::parse_problem;

fn main() -> defectscope::Result<()> {
    let p = parse_problem(
        r#"{"schema": 1, "chart": {"family": "plane"},
            "domain": {"type": "rectangle", "min": [0, 0], "max": [1, 1]},
            "mode": "vector",
            "field": {"a1": "w1", "a2": "w2"}}"#,
    )?;
    print!("{}", commands::check(&p)?.text);
    Ok(())
}
