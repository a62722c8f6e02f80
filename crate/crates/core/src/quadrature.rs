//! Adaptive Gauss-Legendre integration of complex integrands on a finite
//! interval.
//!
//! Each panel is integrated with a 16- and a 32-node rule; a panel is accepted
//! when the two agree to the relative tolerance, measured against the panel
//! value or against the panel's share of a coarse estimate of ∫|f|, whichever
//! is larger, with a floor of 10⁻³ of the whole estimate so that integrable
//! endpoint singularities terminate. The accepted panel layout is returned so
//! that a family of integrands can be evaluated later on exactly the same
//! nodes.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { rel_tol: 1e-8, max_depth: 40 }
    }
}

fn rule(n: usize) -> &'static [(f64, f64)] {
    static LOW: OnceLock<GaussLegendre> = OnceLock::new();
    static HIGH: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = if n == 16 { &LOW } else { &HIGH };
    cell.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(n).expect("nonzero")))
        .as_node_weight_pairs()
}

fn apply<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64, nodes: &[(f64, f64)]) -> Complex64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut s = Complex64::new(0.0, 0.0);
    for &(x, w) in nodes {
        s += f(mid + half * x) * w;
    }
    s * half
}

/// Integral together with the accepted panels `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct Integral {
    pub value: Complex64,
    pub panels: Vec<(f64, f64)>,
}

pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::arg(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: Complex64::new(0.0, 0.0), panels: vec![] });
    }
    let hi_rule = rule(32);
    let scale = apply(&|x| Complex64::new(f(x).norm(), 0.0), a, b, hi_rule).re;
    let width = b - a;

    let mut value = Complex64::new(0.0, 0.0);
    let mut panels = Vec::new();
    // depth-first, left to right, so panels come out sorted
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = apply(&f, lo, hi, rule(16));
        let fine = apply(&f, lo, hi, hi_rule);
        if !(fine.re.is_finite() && fine.im.is_finite()) {
            return Err(Error::Quadrature { lo, hi });
        }
        let reference = fine.norm().max(scale * (hi - lo) / width).max(1e-3 * scale);
        if (fine - coarse).norm() <= opts.rel_tol * reference {
            value += fine;
            panels.push((lo, hi));
            continue;
        }
        if depth >= opts.max_depth {
            return Err(Error::Quadrature { lo, hi });
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    Ok(Integral { value, panels })
}

/// 32-node rule on each of the given panels.
pub fn integrate_on<F: Fn(f64) -> Complex64>(f: F, panels: &[(f64, f64)]) -> Complex64 {
    let nodes = rule(32);
    panels.iter().map(|&(lo, hi)| apply(&f, lo, hi, nodes)).sum()
}
