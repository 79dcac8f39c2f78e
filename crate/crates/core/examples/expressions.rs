//! Parse and evaluate expressions over the chart parameters.

use defectscope::expr::ExpressionAst;

fn main() {
    for (text, at) in [
        ("sin(w1)*cos(w2)", [std::f64::consts::FRAC_PI_2, 0.0]),
        ("w1^2 - w2^2", [2.0, 1.0]),
        ("atan2(w2, w1)", [0.0, 1.0]),
        ("-2^2", [0.0, 0.0]),
    ] {
        let e = ExpressionAst::parse_w(text).expect("valid expression");
        println!("{text:>18} at ({}, {}) = {}", at[0], at[1], e.eval(&at).unwrap());
    }
    match ExpressionAst::parse_w("w1 + * 2") {
        Err(err) => println!("error: {err}"),
        Ok(_) => unreachable!(),
    }
}
