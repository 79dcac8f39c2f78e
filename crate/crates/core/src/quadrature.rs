//! Gauss–Legendre rules and the composite schemes built on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Quadrature presets. Higher levels use higher order and more panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum QuadratureLevel {
    Q1,
    Q2,
    #[default]
    Q3,
}

impl QuadratureLevel {
    /// Gauss points per panel.
    pub fn order(self) -> usize {
        match self {
            QuadratureLevel::Q1 => 8,
            QuadratureLevel::Q2 => 16,
            QuadratureLevel::Q3 => 24,
        }
    }

    /// Panels per unit direction of a tensor grid or per line segment.
    pub fn panels(self) -> usize {
        match self {
            QuadratureLevel::Q1 => 2,
            QuadratureLevel::Q2 => 4,
            QuadratureLevel::Q3 => 8,
        }
    }

    /// The next coarser preset, used for error estimates.
    pub fn coarser(self) -> QuadratureLevel {
        match self {
            QuadratureLevel::Q3 => QuadratureLevel::Q2,
            _ => QuadratureLevel::Q1,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Q1" | "q1" => Some(QuadratureLevel::Q1),
            "Q2" | "q2" => Some(QuadratureLevel::Q2),
            "Q3" | "q3" => Some(QuadratureLevel::Q3),
            _ => None,
        }
    }
}

/// An `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre on `[a, b]` with `panels` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = KahanSum::default();
    for p in 0..panels {
        let lo = a + h * p as f64;
        acc.add(rule.integrate(lo, lo + h, &mut f));
    }
    acc.value()
}

/// Quadrature points `(u, v, weight)` on the reference triangle
/// `{u, v >= 0, u + v <= 1}` from a collapsed tensor rule.
pub fn triangle_rule(rule: &GaussLegendre) -> Vec<(f64, f64, f64)> {
    let mut pts = Vec::with_capacity(rule.nodes.len().pow(2));
    for (s, ws) in rule.on(0.0, 1.0) {
        for (t, wt) in rule.on(0.0, 1.0) {
            // (s, t) in the unit square -> (u, v) = (s (1 - t), s t), Jacobian s.
            pts.push((s * (1.0 - t), s * t, ws * wt * s));
        }
    }
    pts
}

/// Compensated summation for reproducible reductions.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}
