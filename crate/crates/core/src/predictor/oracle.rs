//! Exhaustive reference enumeration for small instances.
//!
//! Walks the full product grid of boundary values with an odometer and
//! pairs each grid point with every explicit interior multiset of the
//! matching sum. Only whole subtrees whose boundary cost alone already
//! exceeds the best value are skipped.

use std::collections::HashMap;

use num_rational::Rational64;
use num_traits::Zero;

use super::{Branch, Level, PredictionProblem};
use crate::error::{Error, Result};

fn multisets(values: &[Rational64], cap: usize) -> HashMap<Rational64, Vec<Vec<Rational64>>> {
    let nonzero: Vec<Rational64> = values.iter().copied().filter(|v| !v.is_zero()).collect();
    let mut out: HashMap<Rational64, Vec<Vec<Rational64>>> = HashMap::new();
    // iterative generation of non-decreasing index sequences
    let mut seqs: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..cap {
        let mut next = Vec::new();
        for s in &frontier {
            let lo = s.last().copied().unwrap_or(0);
            for i in lo..nonzero.len() {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        seqs.extend(next.iter().cloned());
        frontier = next;
    }
    for s in seqs {
        let ms: Vec<Rational64> = s.iter().map(|&i| nonzero[i]).collect();
        let sum = ms.iter().copied().sum::<Rational64>();
        out.entry(sum).or_default().push(ms);
    }
    out
}

/// Minimal level of `problem` by exhaustive search. Instances are limited
/// to 8 vertices and bound 2.
pub fn brute_force_oracle(problem: &PredictionProblem) -> Result<Level> {
    let n = problem.vertices.len();
    if n > 8 {
        return Err(Error::InstanceTooLarge(format!("{n} vertices (at most 8)")));
    }
    if problem.bound > Rational64::from_integer(2) {
        return Err(Error::InstanceTooLarge(format!(
            "bound {} (at most 2)",
            problem.bound
        )));
    }
    let e = problem.q_exponent;
    let values = problem.lattice(problem.bound);
    let inner = multisets(&values, problem.max_interior);
    let wq = e.apply_exact(problem.interior_q);
    let cost_of = |j: usize, m: Rational64| -> Result<Rational64> {
        let v = &problem.vertices[j];
        let s = m - v.tau / 2;
        Ok(Rational64::from_integer(2) / v.wedge * e.apply_exact(v.q) * s * s)
    };
    for v in &problem.vertices {
        if v.wedge <= Rational64::zero() {
            return Err(Error::ZeroWedge(0.0));
        }
    }
    let chi = Rational64::from_integer(problem.chi);
    let k = values.len();

    let mut best: Option<Rational64> = None;
    let mut hits: Vec<(Vec<Rational64>, Vec<Rational64>)> = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        // boundary cost of the current grid point, tracking the first digit
        // at which the partial cost already exceeds the best value
        let mut cost = Rational64::zero();
        let mut cut = None;
        for j in 0..n {
            cost += cost_of(j, values[digits[j]])?;
            if best.is_some_and(|b| cost > b) {
                cut = Some(j);
                break;
            }
        }
        let advance_from = match cut {
            Some(j) => {
                for d in digits.iter_mut().skip(j + 1) {
                    *d = k - 1;
                }
                j
            }
            None => {
                let m: Vec<Rational64> = digits.iter().map(|&d| values[d]).collect();
                let s = chi - m.iter().copied().sum::<Rational64>();
                if let Some(list) = inner.get(&s) {
                    for ms in list {
                        let q = cost + wq * ms.iter().map(|x| x * x).sum::<Rational64>();
                        match best {
                            Some(b) if q > b => {}
                            Some(b) if q == b => hits.push((m.clone(), ms.clone())),
                            _ => {
                                best = Some(q);
                                hits.clear();
                                hits.push((m.clone(), ms.clone()));
                            }
                        }
                    }
                }
                n.saturating_sub(1)
            }
        };
        if n == 0 {
            break;
        }
        // odometer increment at position `advance_from` (last digit fastest)
        let mut pos = advance_from as isize;
        for d in digits.iter_mut().skip(advance_from + 1) {
            *d = 0;
        }
        loop {
            if pos < 0 {
                break;
            }
            let p = pos as usize;
            digits[p] += 1;
            if digits[p] < k {
                break;
            }
            digits[p] = 0;
            pos -= 1;
        }
        if pos < 0 {
            break;
        }
    }
    let Some(q) = best else {
        return Err(Error::InfeasibleParity);
    };
    let mut configurations: Vec<Branch> = hits
        .into_iter()
        .map(|(m, mut interior)| {
            interior.sort();
            let strengths = m
                .iter()
                .zip(&problem.vertices)
                .map(|(m, v)| v.strength(*m))
                .collect();
            let strengths_plus = m
                .iter()
                .zip(&problem.vertices)
                .map(|(m, v)| *m + v.tau / 2)
                .collect();
            Branch {
                m,
                interior,
                strengths,
                strengths_plus,
                multiplicity: 1,
            }
        })
        .collect();
    configurations.sort_by(|a, b| (&a.m, &a.interior).cmp(&(&b.m, &b.interior)));
    configurations.dedup();
    Ok(Level {
        q,
        q_float: crate::fields::to_f64(q),
        count: configurations.len(),
        configurations,
    })
}
