//! Hybrid block-pulse/Legendre basis on `[0, 1)`.
//!
//! Coefficients are stored block-major: index `(k - 1) * r + m` holds the
//! coefficient of `b_km`, with `k = 1..=q` and `m = 0..r`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::legendre::{legendre_all, QuadratureRule};

pub const DEFAULT_QUAD_POINTS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisConfig {
    q: usize,
    r: usize,
    quad_points: usize,
}

impl BasisConfig {
    /// `q` subintervals with Legendre orders `0..r` on each. Uses
    /// [`DEFAULT_QUAD_POINTS`] per subinterval, or `r` if that is larger.
    pub fn new(q: usize, r: usize) -> Result<Self> {
        Self::with_quad_points(q, r, DEFAULT_QUAD_POINTS.max(r))
    }

    pub fn with_quad_points(q: usize, r: usize, quad_points: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("q must be at least 1".into()));
        }
        if r == 0 {
            return Err(Error::InvalidConfig("r must be at least 1".into()));
        }
        if quad_points < r {
            return Err(Error::InvalidConfig(format!(
                "quad_points = {quad_points} must be at least r = {r}"
            )));
        }
        Ok(Self { q, r, quad_points })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    /// Basis dimension `r·q`.
    pub fn dim(&self) -> usize {
        self.r * self.q
    }

    /// Flat index of `b_km` for a zero-based block `k0 = k - 1`.
    pub fn index(&self, k0: usize, m: usize) -> usize {
        k0 * self.r + m
    }

    /// `⟨b_km, b_km⟩ = 1 / ((2m + 1) q)`.
    pub fn norm_sq(&self, m: usize) -> f64 {
        1.0 / ((2 * m + 1) as f64 * self.q as f64)
    }

    /// Zero-based block containing `t`, and the local coordinate `2qt - 2k + 1`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(t));
        }
        let qf = self.q as f64;
        let k0 = ((t * qf).floor() as usize).min(self.q - 1);
        Ok((k0, 2.0 * qf * t - 2.0 * k0 as f64 - 1.0))
    }

    /// Left and right end of the zero-based block `k0`.
    pub fn block_bounds(&self, k0: usize) -> (f64, f64) {
        let qf = self.q as f64;
        (k0 as f64 / qf, (k0 + 1) as f64 / qf)
    }

    pub(crate) fn ensure_same(&self, other: &BasisConfig, what: &str) -> Result<()> {
        if self.q != other.q || self.r != other.r {
            return Err(Error::ConfigMismatch(format!(
                "{what}: (q={}, r={}) vs (q={}, r={})",
                self.q, self.r, other.q, other.r
            )));
        }
        Ok(())
    }

    fn rule(&self) -> QuadratureRule {
        // Only fails for zero points, which the constructor rules out.
        QuadratureRule::gauss_legendre(self.quad_points).expect("quad_points >= 1")
    }
}

/// Hybrid coefficients of a function of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    config: BasisConfig,
    coeffs: DVector<f64>,
}

impl CoeffVector {
    pub fn new(config: BasisConfig, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != config.dim() {
            return Err(Error::ConfigMismatch(format!(
                "coefficient vector has length {}, basis dimension is {}",
                coeffs.len(),
                config.dim()
            )));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "coefficient",
                value: coeffs[i],
                location: format!("index {i}"),
            });
        }
        Ok(Self { config, coeffs })
    }

    pub fn from_slice(config: BasisConfig, coeffs: &[f64]) -> Result<Self> {
        Self::new(config, DVector::from_column_slice(coeffs))
    }

    pub fn zeros(config: BasisConfig) -> Self {
        Self {
            config,
            coeffs: DVector::zeros(config.dim()),
        }
    }

    /// Wraps a vector computed internally from already-validated inputs.
    pub(crate) fn from_raw(config: BasisConfig, coeffs: DVector<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), config.dim());
        Self { config, coeffs }
    }

    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coeffs.as_slice()
    }

    pub fn into_vector(self) -> DVector<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.amax()
    }
}

impl std::ops::Index<usize> for CoeffVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coeffs[i]
    }
}

/// An `rq × rq` matrix acting on hybrid coefficients (`K`, `G`, `P`, `L`, `J`, `C̃`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    config: BasisConfig,
    entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn new(config: BasisConfig, entries: DMatrix<f64>) -> Result<Self> {
        let n = config.dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::ConfigMismatch(format!(
                "matrix is {}×{}, basis dimension is {n}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Some(i) = entries.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "matrix entry",
                value: entries[i],
                location: format!("row {}, column {}", i % n, i / n),
            });
        }
        Ok(Self { config, entries })
    }

    pub(crate) fn from_raw(config: BasisConfig, entries: DMatrix<f64>) -> Self {
        debug_assert_eq!(entries.shape(), (config.dim(), config.dim()));
        Self { config, entries }
    }

    pub fn zeros(config: BasisConfig) -> Self {
        let n = config.dim();
        Self::from_raw(config, DMatrix::zeros(n, n))
    }

    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn transpose(&self) -> Self {
        Self::from_raw(self.config, self.entries.transpose())
    }

    pub fn mul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.config.ensure_same(&other.config, "matrix product")?;
        Ok(Self::from_raw(self.config, &self.entries * &other.entries))
    }

    pub fn apply(&self, v: &CoeffVector) -> Result<CoeffVector> {
        self.config
            .ensure_same(&v.config, "matrix-vector product")?;
        Ok(CoeffVector::from_raw(
            self.config,
            &self.entries * &v.coeffs,
        ))
    }
}

impl std::ops::Index<(usize, usize)> for OperatorMatrix {
    type Output = f64;

    fn index(&self, ij: (usize, usize)) -> &f64 {
        &self.entries[ij]
    }
}

/// `B(t)`: the `rq` basis values at `t`. Exactly one block is nonzero.
pub fn eval_basis(config: &BasisConfig, t: f64) -> Result<DVector<f64>> {
    let (k0, x) = config.locate(t)?;
    let mut out = DVector::zeros(config.dim());
    for (m, p) in legendre_all(config.r, x).into_iter().enumerate() {
        out[config.index(k0, m)] = p;
    }
    Ok(out)
}

/// `Yᵀ B(t)`.
pub fn reconstruct(y: &CoeffVector, t: f64) -> Result<f64> {
    let config = y.config;
    let (k0, x) = config.locate(t)?;
    Ok(legendre_all(config.r, x)
        .into_iter()
        .enumerate()
        .map(|(m, p)| y.coeffs[config.index(k0, m)] * p)
        .sum())
}

/// L² projection of `f` onto the hybrid basis:
/// `f_km = q(2m + 1) ∫_block f(t) p_m(2qt - 2k + 1) dt`.
pub fn project_function(config: &BasisConfig, f: impl Fn(f64) -> f64) -> Result<CoeffVector> {
    try_project_function(config, |t| Ok(f(t)))
}

/// [`project_function`] for fallible samplers such as parsed expressions.
pub fn try_project_function(
    config: &BasisConfig,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<CoeffVector> {
    let rule = config.rule();
    let legendre_at_nodes = legendre_table(config.r, &rule);
    let mut coeffs = DVector::zeros(config.dim());
    for k0 in 0..config.q {
        let (a, b) = config.block_bounds(k0);
        let values = sample_block(&rule, a, b, &f)?;
        for m in 0..config.r {
            // ∫_block = (1 / 2q) Σ w_i (...), so the q factors cancel.
            let s: f64 = rule
                .weights()
                .iter()
                .zip(&values)
                .zip(&legendre_at_nodes[m])
                .map(|((w, v), p)| w * v * p)
                .sum();
            coeffs[config.index(k0, m)] = (2 * m + 1) as f64 * s / 2.0;
        }
    }
    Ok(CoeffVector::from_raw(*config, coeffs))
}

/// Projection of a two-variable kernel: `g(t, s) ≃ Bᵀ(t) G B(s)`.
pub fn project_kernel(config: &BasisConfig, g: impl Fn(f64, f64) -> f64) -> Result<OperatorMatrix> {
    try_project_kernel(config, |t, s| Ok(g(t, s)))
}

pub fn try_project_kernel(
    config: &BasisConfig,
    g: impl Fn(f64, f64) -> Result<f64>,
) -> Result<OperatorMatrix> {
    let rule = config.rule();
    let nq = rule.len();
    let legendre_at_nodes = legendre_table(config.r, &rule);
    let points: Vec<Vec<f64>> = (0..config.q)
        .map(|k0| {
            let (a, b) = config.block_bounds(k0);
            rule.nodes()
                .iter()
                .map(|x| 0.5 * (a + b) + 0.5 * (b - a) * x)
                .collect()
        })
        .collect();

    let n = config.dim();
    let mut entries = DMatrix::zeros(n, n);
    let mut grid = vec![0.0; nq * nq];
    // Partial sums over s for one fixed t node: Σ_j w_j g(t_i, s_j) p_m'(s_j).
    let mut inner = vec![0.0; nq * config.r];
    for kt in 0..config.q {
        for ks in 0..config.q {
            for (i, &t) in points[kt].iter().enumerate() {
                for (j, &s) in points[ks].iter().enumerate() {
                    let v = g(t, s)?;
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            what: "kernel value",
                            value: v,
                            location: format!("(t, s) = ({t}, {s})"),
                        });
                    }
                    grid[i * nq + j] = v;
                }
            }
            for i in 0..nq {
                for ms in 0..config.r {
                    inner[i * config.r + ms] = (0..nq)
                        .map(|j| rule.weights()[j] * grid[i * nq + j] * legendre_at_nodes[ms][j])
                        .sum();
                }
            }
            for mt in 0..config.r {
                for ms in 0..config.r {
                    let s: f64 = (0..nq)
                        .map(|i| {
                            rule.weights()[i] * legendre_at_nodes[mt][i] * inner[i * config.r + ms]
                        })
                        .sum();
                    entries[(config.index(kt, mt), config.index(ks, ms))] =
                        (2 * mt + 1) as f64 * (2 * ms + 1) as f64 * s / 4.0;
                }
            }
        }
    }
    Ok(OperatorMatrix::from_raw(*config, entries))
}

/// `table[m][i] = p_m(x_i)` at the rule's nodes.
fn legendre_table(r: usize, rule: &QuadratureRule) -> Vec<Vec<f64>> {
    let mut table = vec![Vec::with_capacity(rule.len()); r];
    for &x in rule.nodes() {
        for (m, p) in legendre_all(r, x).into_iter().enumerate() {
            table[m].push(p);
        }
    }
    table
}

fn sample_block(
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    f: &impl Fn(f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    rule.nodes()
        .iter()
        .map(|x| {
            let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let v = f(t)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    what: "function value",
                    value: v,
                    location: format!("quadrature node t = {t}"),
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn cfg(q: usize, r: usize) -> BasisConfig {
        BasisConfig::new(q, r).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(BasisConfig::new(0, 2).is_err());
        assert!(BasisConfig::new(2, 0).is_err());
        assert!(BasisConfig::with_quad_points(2, 5, 4).is_err());
        let c = cfg(4, 3);
        assert_eq!(c.dim(), 12);
        assert_eq!(c.quad_points(), 24);
        assert_eq!(cfg(1, 30).quad_points(), 30);
    }

    #[test]
    fn basis_single_block() {
        let c = cfg(1, 2);
        let b = eval_basis(&c, 0.3).unwrap();
        assert_abs_diff_eq!(b[0], 1.0);
        assert_abs_diff_eq!(b[1], 2.0 * 0.3 - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn basis_second_block() {
        let c = cfg(4, 3);
        let b = eval_basis(&c, 0.3).unwrap();
        let expected = [0.0, 0.0, 0.0, 1.0, -0.6, 0.04, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (got, e) in b.iter().zip(expected) {
            assert_abs_diff_eq!(*got, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn basis_at_zero() {
        let c = cfg(3, 5);
        let b = eval_basis(&c, 0.0).unwrap();
        assert_eq!(&b.as_slice()[..5], &[1.0, -1.0, 1.0, -1.0, 1.0]);
        assert!(b.as_slice()[5..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn basis_domain() {
        let c = cfg(2, 2);
        assert_eq!(eval_basis(&c, 1.0), Err(Error::Domain(1.0)));
        assert!(eval_basis(&c, -1e-12).is_err());
        assert!(eval_basis(&c, f64::NAN).is_err());
        assert!(reconstruct(&CoeffVector::zeros(c), 1.5).is_err());
    }

    #[test]
    fn exactly_one_nonzero_block() {
        let c = cfg(5, 3);
        for i in 0..200 {
            let t = i as f64 / 200.0;
            let b = eval_basis(&c, t).unwrap();
            let nonzero_blocks = (0..5)
                .filter(|&k| (0..3).any(|m| b[c.index(k, m)] != 0.0))
                .count();
            assert_eq!(nonzero_blocks, 1, "t = {t}");
        }
    }

    #[test]
    fn project_exponential() {
        let f = project_function(&cfg(1, 2), |t| (t + 1.0).exp()).unwrap();
        assert_abs_diff_eq!(f[0], E * E - E, epsilon = 1e-13);
        assert_abs_diff_eq!(f[1], -3.0 * E * E + 9.0 * E, epsilon = 1e-13);
    }

    #[test]
    fn project_linear_and_constant() {
        let f = project_function(&cfg(1, 2), |t| t).unwrap();
        assert_abs_diff_eq!(f[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f[1], 0.5, epsilon = 1e-15);

        let c = cfg(3, 4);
        let one = project_function(&c, |_| 1.0).unwrap();
        for k in 0..3 {
            for m in 0..4 {
                let expected = if m == 0 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(one[c.index(k, m)], expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn project_example_two_forcing() {
        let f = project_function(&cfg(4, 3), |t| {
            2.0 * t.powi(3) + t * t - 12.0 * t + 12.0 * t.sin()
        })
        .unwrap();
        let displayed = [
            0.0208496, 0.0312848, 0.0104457, 0.146854, 0.0951443, 0.0109877, 0.406543, 0.166108,
            0.0129514, 0.824576, 0.255306, 0.0171862,
        ];
        for (got, e) in f.as_slice().iter().zip(displayed) {
            assert_abs_diff_eq!(*got, e, epsilon = 1e-6);
        }
    }

    #[test]
    fn project_rejects_non_finite() {
        let err = project_function(&cfg(2, 2), |t| if t > 0.5 { f64::NAN } else { t }).unwrap_err();
        match err {
            Error::NonFinite { location, .. } => assert!(location.contains("t = 0.5")),
            e => panic!("unexpected {e:?}"),
        }
        assert!(
            project_kernel(&cfg(1, 1), |t, s| if t > s { f64::INFINITY } else { 0.0 }).is_err()
        );
    }

    #[test]
    fn kernel_exponential() {
        let k = project_kernel(&cfg(1, 2), |t, s| (t - s).exp()).unwrap();
        let expected = [
            [E + 1.0 / E - 2.0, 3.0 * (E + 3.0 / E - 4.0)],
            [3.0 * (-E + 4.0 - 3.0 / E), 9.0 * (6.0 - E - 9.0 / E)],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(k[(i, j)], expected[i][j], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kernel_constant() {
        let k = project_kernel(&cfg(1, 2), |_, _| 1.0).unwrap();
        assert_abs_diff_eq!(k[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k[(0, 1)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k[(1, 0)], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k[(1, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn kernel_sine() {
        let c = cfg(4, 3);
        let g = project_kernel(&c, |t, s| (t - s).sin()).unwrap();
        assert_abs_diff_eq!(g[(0, 1)], -0.1245, epsilon = 5e-5);
        assert_abs_diff_eq!(g[(0, 3)], -0.2461, epsilon = 5e-5);
        assert_abs_diff_eq!(g[(9, 0)], 0.6781, epsilon = 5e-5);
        for k in 0..4 {
            let d = c.index(k, 0);
            assert_abs_diff_eq!(g[(d, d)], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_symmetry() {
        let c = cfg(3, 3);
        let g = project_kernel(&c, |t, s| (t * s).cos() + t + s).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                assert_abs_diff_eq!(g[(i, j)], g[(j, i)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reconstruct_linear() {
        let c = cfg(1, 2);
        let y = CoeffVector::from_slice(c, &[E - 1.0, 9.0 - 3.0 * E]).unwrap();
        for i in 0..10 {
            let t = i as f64 / 10.0;
            let expected = 4.0 * E - 10.0 + (18.0 - 6.0 * E) * t;
            assert_abs_diff_eq!(reconstruct(&y, t).unwrap(), expected, epsilon = 1e-14);
        }
        assert_eq!(
            reconstruct(&CoeffVector::zeros(cfg(3, 3)), 0.7).unwrap(),
            0.0
        );
    }

    #[test]
    fn reconstruct_in_space_polynomial() {
        let c = cfg(3, 4);
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3);
        let y = project_function(&c, f).unwrap();
        for i in 0..50 {
            let t = i as f64 / 50.0;
            assert_abs_diff_eq!(reconstruct(&y, t).unwrap(), f(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn hybrid_orthogonality() {
        // Gram entries by fine composite quadrature over all of [0, 1).
        let rule = QuadratureRule::gauss_legendre(30).unwrap();
        for q in 1..=6 {
            for r in 1..=6 {
                let c = cfg(q, r);
                let n = c.dim();
                let mut gram = DMatrix::<f64>::zeros(n, n);
                for k0 in 0..q {
                    let (a, b) = c.block_bounds(k0);
                    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                        let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
                        let bt = eval_basis(&c, t).unwrap();
                        gram += &bt * bt.transpose() * (w * 0.5 * (b - a));
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let expected = if i == j { c.norm_sq(i % r) } else { 0.0 };
                        assert_abs_diff_eq!(gram[(i, j)], expected, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn coeff_vector_validation() {
        let c = cfg(2, 2);
        assert!(CoeffVector::from_slice(c, &[1.0, 2.0]).is_err());
        assert!(CoeffVector::from_slice(c, &[1.0, 2.0, f64::INFINITY, 0.0]).is_err());
        assert!(OperatorMatrix::new(c, DMatrix::zeros(3, 3)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn projection_is_idempotent(
                a in -2.0f64..2.0, b in -2.0f64..2.0, w in 0.5f64..6.0,
                q in 1usize..5, r in 1usize..5,
            ) {
                let c = cfg(q, r);
                let f = project_function(&c, |t| a * (w * t).sin() + b * (t * t).exp()).unwrap();
                let again = project_function(&c, |t| reconstruct(&f, t).unwrap()).unwrap();
                for (x, y) in f.as_slice().iter().zip(again.as_slice()) {
                    prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
                }
            }
        }
    }
}
