//! Operational matrices on the hybrid basis.
//!
//! `P` integrates (`∫₀ᵗ B ≃ P B(t)`), `L` is the Gram matrix, `J = (Pᵀ)⁻¹`
//! differentiates in the sense of the derivative lift, and the triple-product
//! tensor yields the coefficient matrix `C̃` (`B Bᵀ C = C̃ B`) and the vector
//! `Ŝ` (`Bᵀ S B = Ŝ B`) after Galerkin truncation to degree `r - 1`.

use nalgebra::{DMatrix, DVector};

use crate::basis::{BasisConfig, CoeffVector, OperatorMatrix};
use crate::error::{Error, Result};
use crate::legendre::{legendre_all, QuadratureRule};

const PIVOT_TOL: f64 = 1e-14;

/// Operational matrix of integration: `E` blocks on the diagonal, `H` blocks
/// (a single `1/q` in the corner) strictly above.
pub fn build_p(config: &BasisConfig) -> OperatorMatrix {
    let (q, r) = (config.q(), config.r());
    let scale = 1.0 / (2.0 * q as f64);
    let mut e = DMatrix::zeros(r, r);
    e[(0, 0)] = scale;
    if r > 1 {
        e[(0, 1)] = scale;
    }
    for i in 1..r {
        let d = scale / (2 * i + 1) as f64;
        e[(i, i - 1)] = -d;
        if i + 1 < r {
            e[(i, i + 1)] = d;
        }
    }
    let n = config.dim();
    let mut p = DMatrix::zeros(n, n);
    for k in 0..q {
        let at = config.index(k, 0);
        p.view_mut((at, at), (r, r)).copy_from(&e);
        for l in k + 1..q {
            p[(at, config.index(l, 0))] = 1.0 / q as f64;
        }
    }
    OperatorMatrix::from_raw(*config, p)
}

/// `L = ∫₀¹ B Bᵀ dt`, diagonal with `1 / ((2m + 1) q)`.
pub fn build_l(config: &BasisConfig) -> OperatorMatrix {
    let diag = DVector::from_fn(config.dim(), |i, _| config.norm_sq(i % config.r()));
    OperatorMatrix::from_raw(*config, DMatrix::from_diagonal(&diag))
}

/// `J = (Pᵀ)⁻¹` by LU with partial pivoting.
pub fn build_j(config: &BasisConfig) -> Result<OperatorMatrix> {
    let pt = build_p(config).into_matrix().transpose();
    invert(pt).map(|j| OperatorMatrix::from_raw(*config, j))
}

pub(crate) fn invert(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = a.lu();
    let pivot = lu.u().diagonal().amin();
    if pivot < PIVOT_TOL {
        return Err(Error::Singular { pivot });
    }
    lu.try_inverse().ok_or(Error::Singular { pivot })
}

/// Block-local normalized triple products
/// `t[i][j][m] = ∫ b_i b_j b_m / ⟨b_m, b_m⟩ = (2m + 1)/2 ∫₋₁¹ p_i p_j p_m dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleTensor {
    config: BasisConfig,
    values: Vec<f64>,
}

impl TripleTensor {
    pub fn new(config: &BasisConfig) -> Self {
        let r = config.r();
        // degree 3(r - 1) integrands need ⌈(3(r-1) + 1) / 2⌉ points
        let points = (3 * (r - 1) + 1).div_ceil(2).max(1);
        let rule = QuadratureRule::gauss_legendre(points).expect("points >= 1");
        let table: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| legendre_all(r, x)).collect();
        let mut values = vec![0.0; r * r * r];
        for i in 0..r {
            for j in 0..r {
                for m in 0..r {
                    // odd parity or a side longer than the other two: zero
                    if (i + j + m) % 2 == 1 || i + j < m || j + m < i || i + m < j {
                        continue;
                    }
                    let (lo, hi) = (i.min(j), i.max(j));
                    let s: f64 = rule
                        .weights()
                        .iter()
                        .zip(&table)
                        .map(|(w, p)| w * p[lo] * p[hi] * p[m])
                        .sum();
                    values[(i * r + j) * r + m] = (2 * m + 1) as f64 / 2.0 * s;
                }
            }
        }
        Self {
            config: *config,
            values,
        }
    }

    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn get(&self, i: usize, j: usize, m: usize) -> f64 {
        let r = self.config.r();
        self.values[(i * r + j) * r + m]
    }
}

/// `C̃` for a coefficient vector `C`: block diagonal with
/// `C̃[i][m] = Σ_j C_j t[i][j][m]` inside each block.
pub fn coeff_matrix(c: &CoeffVector, tensor: &TripleTensor) -> Result<OperatorMatrix> {
    let config = *c.config();
    config.ensure_same(tensor.config(), "coefficient matrix")?;
    let r = config.r();
    let n = config.dim();
    let mut out = DMatrix::zeros(n, n);
    for k in 0..config.q() {
        let base = config.index(k, 0);
        for i in 0..r {
            for m in 0..r {
                out[(base + i, base + m)] = (0..r).map(|j| c[base + j] * tensor.get(i, j, m)).sum();
            }
        }
    }
    Ok(OperatorMatrix::from_raw(config, out))
}

/// `Ŝ` for a matrix `S`: `Ŝ[m] = Σ_{i,j} S[i][j] t[i][j][m]` over the diagonal
/// block containing `m`. Off-diagonal blocks pair disjoint supports and drop out.
pub fn hat_vector(s: &OperatorMatrix, tensor: &TripleTensor) -> Result<CoeffVector> {
    let config = *s.config();
    config.ensure_same(tensor.config(), "hat vector")?;
    let r = config.r();
    let mut out = DVector::zeros(config.dim());
    for k in 0..config.q() {
        let base = config.index(k, 0);
        for m in 0..r {
            let mut acc = 0.0;
            for i in 0..r {
                for j in 0..r {
                    acc += s[(base + i, base + j)] * tensor.get(i, j, m);
                }
            }
            out[base + m] = acc;
        }
    }
    Ok(CoeffVector::from_raw(config, out))
}
