//! Coefficients of `y⁽ⁿ⁾` from those of `y` and its initial conditions.
//!
//! Writing `y = ∫₀ᵗ y' + y(0)` in the basis gives `Y = Pᵀ Y⁽¹⁾ + Y₀`, hence
//! `Y⁽¹⁾ = J (Y - Y₀)` with `J = (Pᵀ)⁻¹`. Iterating,
//! `Y⁽ⁿ⁾ = Jⁿ Y - Σ_{k=1}^{n} Jᵏ Y₀⁽ⁿ⁻ᵏ⁾`.

use nalgebra::DVector;

use crate::basis::{BasisConfig, CoeffVector, OperatorMatrix};
use crate::error::{Error, Result};

/// `y(0), y'(0), ..., y⁽ˡ⁾(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialConditions {
    values: Vec<f64>,
}

impl InitialConditions {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fails unless conditions up to order `order - 1` are present.
    pub fn require(&self, order: usize) -> Result<()> {
        if self.values.len() < order {
            return Err(Error::InsufficientInitialConditions {
                order,
                required: order,
                supplied: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Projection of the constant `a`: `a` in each `m = 0` slot.
pub fn project_initial(a: f64, config: &BasisConfig) -> CoeffVector {
    let r = config.r();
    CoeffVector::from_raw(
        *config,
        DVector::from_fn(config.dim(), |i, _| if i % r == 0 { a } else { 0.0 }),
    )
}

/// `Y⁽ⁿ⁾` via `Y⁽ⁱ⁺¹⁾ = J (Y⁽ⁱ⁾ - Y₀⁽ⁱ⁾)`; `n = 0` returns `Y`.
pub fn lift(
    y: &CoeffVector,
    n: usize,
    ics: &InitialConditions,
    j: &OperatorMatrix,
) -> Result<CoeffVector> {
    ics.require(n)?;
    let config = *y.config();
    config.ensure_same(j.config(), "derivative lift")?;
    let r = config.r();
    let mut cur = y.as_vector().clone();
    for &a in &ics.values()[..n] {
        for k in 0..config.q() {
            cur[k * r] -= a;
        }
        cur = j.as_matrix() * cur;
    }
    Ok(CoeffVector::from_raw(config, cur))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::project_function;
    use crate::opmat::build_j;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::E;

    fn cfg(q: usize, r: usize) -> BasisConfig {
        BasisConfig::new(q, r).unwrap()
    }

    /// `Jⁿ Y - Σ Jᵏ Y₀⁽ⁿ⁻ᵏ⁾` with explicit matrix powers.
    fn closed_form(y: &CoeffVector, n: usize, ics: &[f64], j: &DMatrix<f64>) -> DVector<f64> {
        let c = *y.config();
        let pow = |k: usize| (0..k).fold(DMatrix::identity(c.dim(), c.dim()), |acc, _| &acc * j);
        let mut out = pow(n) * y.as_vector();
        for k in 1..=n {
            out -= pow(k) * project_initial(ics[n - k], &c).as_vector();
        }
        out
    }

    #[test]
    fn project_initial_values() {
        assert_eq!(project_initial(1.0, &cfg(1, 2)).as_slice(), &[1.0, 0.0]);
        assert_eq!(
            project_initial(1.0, &cfg(4, 3)).as_slice(),
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
        assert!(project_initial(0.0, &cfg(4, 3))
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn zeroth_lift_is_identity() {
        let c = cfg(3, 3);
        let j = build_j(&c).unwrap();
        let y = project_function(&c, |t| t.cos()).unwrap();
        assert_eq!(lift(&y, 0, &InitialConditions::new(vec![]), &j).unwrap(), y);
    }

    #[test]
    fn first_lift_of_linear_approximation() {
        let c = cfg(1, 2);
        let j = build_j(&c).unwrap();
        let y = CoeffVector::from_slice(c, &[E - 1.0, 9.0 - 3.0 * E]).unwrap();
        let d = lift(&y, 1, &InitialConditions::new(vec![1.0]), &j).unwrap();
        // [[0, 2], [-6, 6]] · (e - 2, 9 - 3e)
        assert_abs_diff_eq!(d[0], 2.0 * (9.0 - 3.0 * E), epsilon = 1e-12);
        assert_abs_diff_eq!(
            d[1],
            -6.0 * (E - 2.0) + 6.0 * (9.0 - 3.0 * E),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(d[0], 1.69031, epsilon = 1e-5);
        assert_abs_diff_eq!(d[1], 0.761236, epsilon = 1e-6);
    }

    #[test]
    fn missing_initial_conditions() {
        let c = cfg(2, 2);
        let j = build_j(&c).unwrap();
        let err = lift(
            &CoeffVector::zeros(c),
            2,
            &InitialConditions::new(vec![1.0]),
            &j,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientInitialConditions {
                order: 2,
                required: 2,
                supplied: 1
            }
        );
    }

    #[test]
    fn second_lift_is_two_first_lifts() {
        let c = cfg(3, 4);
        let j = build_j(&c).unwrap();
        let y = project_function(&c, |t| (2.0 * t).sin() + 1.0).unwrap();
        let ics = InitialConditions::new(vec![1.0, 2.0]);
        let twice = lift(&y, 2, &ics, &j).unwrap();
        let once = lift(&y, 1, &ics, &j).unwrap();
        let again = lift(&once, 1, &InitialConditions::new(vec![2.0]), &j).unwrap();
        for (a, b) in twice.as_slice().iter().zip(again.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn iterated_matches_closed_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for (q, r) in [(1, 2), (2, 3), (4, 3), (3, 5)] {
            let c = cfg(q, r);
            let j = build_j(&c).unwrap();
            for n in 0..=4 {
                let y = CoeffVector::from_slice(
                    c,
                    &(0..c.dim())
                        .map(|_| rng.random_range(-1.0..1.0))
                        .collect::<Vec<_>>(),
                )
                .unwrap();
                let ics: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let got = lift(&y, n, &InitialConditions::new(ics.clone()), &j).unwrap();
                let want = closed_form(&y, n, &ics, j.as_matrix());
                let scale = want.amax().max(1.0);
                assert!(
                    (got.as_vector() - &want).amax() <= 1e-10 * scale,
                    "q={q} r={r} n={n}"
                );
            }
        }
    }

    #[test]
    fn exact_on_in_space_polynomials() {
        // y = 1 + 2t - t² + 0.5t³ with r = 5 > deg y, q = 1
        let c = cfg(1, 5);
        let j = build_j(&c).unwrap();
        let y = project_function(&c, |t| 1.0 + 2.0 * t - t * t + 0.5 * t.powi(3)).unwrap();
        let dy = project_function(&c, |t| 2.0 - 2.0 * t + 1.5 * t * t).unwrap();
        let got = lift(&y, 1, &InitialConditions::new(vec![1.0]), &j).unwrap();
        for (a, b) in got.as_slice().iter().zip(dy.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }
}
