//! Output formatting shared by the library reports and the CLI.

use num_rational::Rational64;
use serde::Serializer;

/// "p/q", or "p" for integers.
pub fn rational_string(r: &Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ser_rational<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational_string(r))
}

pub fn ser_opt_rational<S: Serializer>(r: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&rational_string(r)),
        None => s.serialize_none(),
    }
}

pub fn ser_rational_vec<S: Serializer>(v: &[Rational64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational_string))
}
