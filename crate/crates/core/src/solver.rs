//! Algebraic systems for the Fredholm and Volterra problems and their Newton
//! solution.
//!
//! Fredholm, `y + λ ∫₀¹ k(t,s) y⁽ᵐ⁾(s) y⁽ⁿ⁾(s) ds = f`:
//!
//! ```text
//! R(Y) = Y + λ K C̃(Y⁽ᵐ⁾) L Y⁽ⁿ⁾ - F
//! ```
//!
//! Volterra, `y + β ∫₀ᵗ g(t,s) y⁽ᵐ⁾(s) y⁽ⁿ⁾(s) ds = f`:
//!
//! ```text
//! R(Y) = Y + β Ŝ - F,   S = G C̃(Y⁽ᵐ⁾) C̃(Y⁽ⁿ⁾) P
//! ```

use nalgebra::{DMatrix, DVector};

use crate::basis::{
    try_project_function, try_project_kernel, BasisConfig, CoeffVector, OperatorMatrix,
};
use crate::error::{Error, Result};
use crate::lift::{lift, InitialConditions};
use crate::opmat::{build_j, build_l, build_p, coeff_matrix, hat_vector, TripleTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationKind {
    Fredholm,
    Volterra,
}

impl EquationKind {
    pub fn name(self) -> &'static str {
        match self {
            EquationKind::Fredholm => "fredholm",
            EquationKind::Volterra => "volterra",
        }
    }
}

impl std::fmt::Display for EquationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to evaluate the residual of one discretized problem.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    kind: EquationKind,
    scalar: f64,
    kernel: OperatorMatrix,
    forcing: CoeffVector,
    m: usize,
    n: usize,
    ics: InitialConditions,
    tensor: TripleTensor,
    p: OperatorMatrix,
    l: OperatorMatrix,
    j: OperatorMatrix,
}

impl AssembledSystem {
    /// Builds `P`, `L`, `J` and the triple tensor for the kernel's basis.
    pub fn new(
        kind: EquationKind,
        scalar: f64,
        kernel: OperatorMatrix,
        forcing: CoeffVector,
        m: usize,
        n: usize,
        ics: InitialConditions,
    ) -> Result<Self> {
        let config = *kernel.config();
        config.ensure_same(forcing.config(), "forcing vs kernel")?;
        if !scalar.is_finite() {
            return Err(Error::NonFinite {
                what: "equation scalar",
                value: scalar,
                location: "system assembly".into(),
            });
        }
        ics.require(m.max(n))?;
        Ok(Self {
            kind,
            scalar,
            kernel,
            forcing,
            m,
            n,
            ics,
            tensor: TripleTensor::new(&config),
            p: build_p(&config),
            l: build_l(&config),
            j: build_j(&config)?,
        })
    }

    /// Projects a kernel `g(t, s)` and forcing `f(t)` and assembles.
    #[allow(clippy::too_many_arguments)]
    pub fn from_functions(
        config: &BasisConfig,
        kind: EquationKind,
        scalar: f64,
        kernel: impl Fn(f64, f64) -> Result<f64>,
        forcing: impl Fn(f64) -> Result<f64>,
        m: usize,
        n: usize,
        ics: InitialConditions,
    ) -> Result<Self> {
        let k = try_project_kernel(config, kernel)?;
        let f = try_project_function(config, forcing)?;
        Self::new(kind, scalar, k, f, m, n, ics)
    }

    pub fn config(&self) -> &BasisConfig {
        self.kernel.config()
    }

    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    pub fn kernel(&self) -> &OperatorMatrix {
        &self.kernel
    }

    pub fn forcing(&self) -> &CoeffVector {
        &self.forcing
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn initial_conditions(&self) -> &InitialConditions {
        &self.ics
    }

    pub fn p(&self) -> &OperatorMatrix {
        &self.p
    }

    pub fn l(&self) -> &OperatorMatrix {
        &self.l
    }

    pub fn j(&self) -> &OperatorMatrix {
        &self.j
    }

    pub fn tensor(&self) -> &TripleTensor {
        &self.tensor
    }

    pub fn residual(&self, y: &CoeffVector) -> Result<CoeffVector> {
        match self.kind {
            EquationKind::Fredholm => self.residual_fredholm(y),
            EquationKind::Volterra => self.residual_volterra(y),
        }
    }

    pub fn residual_fredholm(&self, y: &CoeffVector) -> Result<CoeffVector> {
        self.expect_kind(EquationKind::Fredholm)?;
        let (ym, yn) = self.lifts(y)?;
        let cm = coeff_matrix(&ym, &self.tensor)?;
        let integral =
            self.kernel.as_matrix() * (cm.as_matrix() * (self.l.as_matrix() * yn.as_vector()));
        Ok(self.finish(y, integral))
    }

    pub fn residual_volterra(&self, y: &CoeffVector) -> Result<CoeffVector> {
        self.expect_kind(EquationKind::Volterra)?;
        let (ym, yn) = self.lifts(y)?;
        let cm = coeff_matrix(&ym, &self.tensor)?;
        let cn = coeff_matrix(&yn, &self.tensor)?;
        let s = self.kernel.as_matrix() * cm.as_matrix() * cn.as_matrix() * self.p.as_matrix();
        let s_hat = hat_vector(&OperatorMatrix::from_raw(*self.config(), s), &self.tensor)?;
        Ok(self.finish(y, s_hat.into_vector()))
    }

    fn lifts(&self, y: &CoeffVector) -> Result<(CoeffVector, CoeffVector)> {
        self.config().ensure_same(y.config(), "unknown vs system")?;
        let ym = lift(y, self.m, &self.ics, &self.j)?;
        let yn = if self.n == self.m {
            ym.clone()
        } else {
            lift(y, self.n, &self.ics, &self.j)?
        };
        Ok((ym, yn))
    }

    fn finish(&self, y: &CoeffVector, integral: DVector<f64>) -> CoeffVector {
        let r = y.as_vector() + integral * self.scalar - self.forcing.as_vector();
        CoeffVector::from_raw(*self.config(), r)
    }

    fn expect_kind(&self, requested: EquationKind) -> Result<()> {
        if self.kind != requested {
            return Err(Error::WrongKind {
                requested: requested.name(),
                actual: self.kind.name(),
            });
        }
        Ok(())
    }

    fn residual_raw(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.residual(&CoeffVector::from_raw(*self.config(), y.clone()))
            .map(CoeffVector::into_vector)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub y: CoeffVector,
    /// Newton steps taken by the attempt that produced `y`.
    pub iterations: usize,
    /// `‖R(y)‖∞`.
    pub residual_norm: f64,
    pub converged: bool,
}

const MAX_HALVINGS: usize = 20;

/// Damped Newton iteration from `Y = F`, falling back to `Y = 0`.
///
/// Non-convergence is reported through [`SolveReport::converged`]; a singular
/// Jacobian is an error.
pub fn solve(sys: &AssembledSystem, opts: SolveOptions) -> Result<SolveReport> {
    let first = newton(sys, sys.forcing.as_vector().clone(), opts)?;
    if first.converged {
        return Ok(first);
    }
    let second = newton(sys, DVector::zeros(sys.config().dim()), opts)?;
    if second.converged || second.residual_norm < first.residual_norm {
        Ok(second)
    } else {
        Ok(first)
    }
}

fn newton(sys: &AssembledSystem, mut y: DVector<f64>, opts: SolveOptions) -> Result<SolveReport> {
    let mut r = sys.residual_raw(&y)?;
    let mut norm = r.amax();
    let mut iterations = 0;
    while norm > opts.tol && iterations < opts.max_iter {
        let jac = fd_jacobian_raw(sys, &y, &r)?;
        let step = jac.lu().solve(&(-&r)).ok_or(Error::SingularJacobian {
            iteration: iterations,
        })?;
        iterations += 1;

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &y + &step * alpha;
            let tr = sys.residual_raw(&trial)?;
            let tn = tr.amax();
            if tn < norm {
                accepted = Some((trial, tr, tn));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((ny, nr, nn)) => {
                y = ny;
                r = nr;
                norm = nn;
            }
            // stalled: no step length reduces the residual
            None => break,
        }
    }
    Ok(SolveReport {
        y: CoeffVector::from_raw(*sys.config(), y),
        iterations,
        residual_norm: norm,
        converged: norm <= opts.tol,
    })
}

/// Forward-difference Jacobian of the residual with step
/// `1e-7 · max(1, |Yᵢ|)` in column `i`.
pub fn fd_jacobian(sys: &AssembledSystem, y: &CoeffVector) -> Result<DMatrix<f64>> {
    let r = sys.residual(y)?.into_vector();
    fd_jacobian_raw(sys, y.as_vector(), &r)
}

fn fd_jacobian_raw(
    sys: &AssembledSystem,
    y: &DVector<f64>,
    r: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = y.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = y.clone();
    for i in 0..n {
        let h = 1e-7 * y[i].abs().max(1.0);
        probe[i] = y[i] + h;
        let ri = sys.residual_raw(&probe)?;
        jac.set_column(i, &((ri - r) / h));
        probe[i] = y[i];
    }
    Ok(jac)
}

/// A-priori bound `M / (2^(2μ+1) (μ+1)!)`.
pub fn error_bound(mu: usize, m: f64) -> f64 {
    let factorial: f64 = (1..=mu + 1).map(|k| k as f64).product();
    m / (2f64.powi(2 * mu as i32 + 1) * factorial)
}

/// Largest `|f⁽ᵏ⁾(t)|` over `points` equally spaced `t` in `[0, 1]`.
///
/// Central differences of step `h` and `h/2` combined by one Richardson
/// step. `f` is sampled up to `k·h/2` outside `[0, 1]`.
pub fn max_abs_derivative(
    f: impl Fn(f64) -> Result<f64>,
    order: usize,
    points: usize,
    h: f64,
) -> Result<f64> {
    let binom: Vec<f64> = (0..=order)
        .scan(1.0, |c, i| {
            let out = *c;
            *c = *c * (order - i) as f64 / (i + 1) as f64;
            Some(out)
        })
        .collect();
    let central = |t: f64, h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for (i, c) in binom.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * c * f(t + (order as f64 / 2.0 - i as f64) * h)?;
        }
        Ok(acc / h.powi(order as i32))
    };
    let mut best: f64 = 0.0;
    for p in 0..points.max(2) {
        let t = p as f64 / (points.max(2) - 1) as f64;
        let d = if order == 0 {
            f(t)?
        } else {
            let coarse = central(t, h)?;
            let fine = central(t, h / 2.0)?;
            (4.0 * fine - coarse) / 3.0
        };
        if !d.is_finite() {
            return Err(Error::NonFinite {
                what: "derivative estimate",
                value: d,
                location: format!("t = {t}"),
            });
        }
        best = best.max(d.abs());
    }
    Ok(best)
}
