//! Legendre polynomials on `[-1, 1]` and Gauss–Legendre quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const NODE_TOL: f64 = 1e-15;
const NODE_MAX_ITER: usize = 100;

/// `p_m(x)` by the three-term recurrence.
pub fn legendre(m: usize, x: f64) -> f64 {
    legendre_pair(m, x).0
}

/// Returns `(p_m(x), p_{m-1}(x))`, with `p_{-1} = 0`.
fn legendre_pair(m: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Values `p_0(x), ..., p_{count-1}(x)`.
pub fn legendre_all(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..count {
        out.push(cur);
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * x * cur - jf * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n`-point rule. Nodes are the roots of `p_n`, found by Newton's method
    /// from Chebyshev-type starting guesses; weights are
    /// `2 / ((1 - x²) p_n'(x)²)`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "quadrature needs at least one point".into(),
            ));
        }
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots come in ± pairs; solve for the positive half and mirror.
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut converged = false;
            for _ in 0..NODE_MAX_ITER {
                let (p, dp) = value_and_slope(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= NODE_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::QuadratureNoConvergence { n });
            }
            if n % 2 == 1 && i == n / 2 {
                x = 0.0;
            }
            let (_, dp) = value_and_slope(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ₐᵇ f(x) dx` with the rule mapped affinely onto `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn value_and_slope(n: usize, x: f64) -> (f64, f64) {
    let (p, pm1) = legendre_pair(n, x);
    let nf = n as f64;
    (p, nf * (x * p - pm1) / (x * x - 1.0))
}
