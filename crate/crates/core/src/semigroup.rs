//! Generator analysis and evaluation of the matrix semigroup
//! `S(t) = exp(-t (A + C I))`.
//!
//! `-A` generates `T(t) = exp(-t A)`; the nonnegative shift `C` makes the
//! shifted semigroup exponentially stable when the candidate constant alone
//! does not. In finite dimension `T(t)` is entrywise nonnegative for all
//! `t >= 0` exactly when every off-diagonal entry of `A` is `<= 0`
//! (equivalently, `-A` is a Metzler matrix).

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 10_000;

/// Max-row-sum operator norm (induced by the max vector norm).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum())
        .fold(0.0, f64::max)
}

/// True iff every off-diagonal entry of `a` is `<= 0`, the finite-dimensional
/// criterion for `exp(-t a)` to be entrywise nonnegative for all `t >= 0`.
pub fn is_positivity_generator(a: &DMatrix<f64>) -> Result<bool> {
    if a.nrows() != a.ncols() {
        return Err(SolverError::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    Ok(a.row_iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| i == j || v <= 0.0)))
}

fn eigenvalue_real_parts(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(SolverError::EigenFailure)?;
    Ok(schur.complex_eigenvalues().iter().map(|z| z.re).collect())
}

/// Growth exponent of `T(t) = exp(-t a)`: the infimal rate `nu` with
/// `||T(t)|| <= M e^{nu t}`, evaluated as `-min_k Re(lambda_k(a))`.
pub fn growth_exponent(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(SolverError::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let re = eigenvalue_real_parts(a)?;
    Ok(-re.into_iter().fold(f64::INFINITY, f64::min))
}

/// Spectral radius, by dense Schur decomposition.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(SolverError::EigenFailure)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// An `n x n` generator `A` together with a nonnegative spectral shift `C`
/// and cached spectral data. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Generator {
    matrix: DMatrix<f64>,
    shift: f64,
    nu0: f64,
    positivity: bool,
}

impl Generator {
    /// Analyze `a` (eigenvalues, positivity sign pattern); shift starts at 0.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let positivity = is_positivity_generator(&a)?;
        let nu0 = growth_exponent(&a)?;
        Ok(Self {
            matrix: a,
            shift: 0.0,
            nu0,
            positivity,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The shift constant `C` currently applied.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Growth exponent `nu0` of the unshifted semigroup `exp(-t A)`.
    pub fn growth_exponent(&self) -> f64 {
        self.nu0
    }

    /// Growth exponent `nu1 = nu0 - C` of the shifted semigroup.
    pub fn shifted_growth_exponent(&self) -> f64 {
        self.nu0 - self.shift
    }

    /// Whether `exp(-t A)` is entrywise nonnegative for all `t >= 0`.
    pub fn is_positivity(&self) -> bool {
        self.positivity
    }

    pub fn is_stable(&self) -> bool {
        self.shifted_growth_exponent() < 0.0
    }

    /// Choose the final shift: keep `c_candidate` when it already makes the
    /// shifted semigroup exponentially stable, otherwise bump it by
    /// `|nu0| + margin`. The result always satisfies `nu1 < 0`.
    pub fn finalize_shift(&self, c_candidate: f64, margin: f64) -> Result<Self> {
        if c_candidate < 0.0 {
            return Err(SolverError::InvalidArgument(format!(
                "shift candidate must be >= 0, got {c_candidate}"
            )));
        }
        if !(margin > 0.0) {
            return Err(SolverError::InvalidArgument(format!(
                "shift margin must be > 0, got {margin}"
            )));
        }
        let shift = if self.nu0 - c_candidate < 0.0 {
            c_candidate
        } else {
            c_candidate + self.nu0.abs() + margin
        };
        Ok(Self {
            matrix: self.matrix.clone(),
            shift,
            nu0: self.nu0,
            positivity: self.positivity,
        })
    }

    /// Default shift margin: `0.1 * max(1, |nu0|)`. Any positive margin
    /// works; the stability requirement is only a strict inequality.
    pub fn default_margin(&self) -> f64 {
        0.1 * self.nu0.abs().max(1.0)
    }

    /// The matrix of `S(t) = exp(-t (A + C I))`.
    pub fn propagator(&self, t: f64) -> Result<DMatrix<f64>> {
        if t < 0.0 {
            return Err(SolverError::InvalidArgument(format!(
                "semigroup time must be >= 0, got {t}"
            )));
        }
        let n = self.dim();
        let mut m = &self.matrix * (-t);
        for i in 0..n {
            m[(i, i)] -= t * self.shift;
        }
        Ok(m.exp())
    }

    /// `S(t) x`.
    pub fn apply(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.propagator(t)? * x)
    }

    /// Upper estimate of `sup_{t >= 0} ||S(t)||` in the max-row-sum norm.
    ///
    /// Maximizes over a grid of `substeps` points per period on
    /// `[0, omega * ceil((10/|nu1|)/omega)]`; past that horizon the decayed
    /// endpoint times the first-period maximum bounds the tail. Always
    /// `>= 1` since `S(0) = I`.
    pub fn sup_norm_bound(&self, omega: f64, substeps: usize) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(SolverError::InvalidArgument(format!(
                "period must be > 0, got {omega}"
            )));
        }
        if substeps == 0 {
            return Err(SolverError::InvalidArgument("substeps must be >= 1".into()));
        }
        let nu1 = self.shifted_growth_exponent();
        if nu1 >= 0.0 {
            return Err(SolverError::NotStable { nu1 });
        }
        let periods = ((10.0 / nu1.abs()) / omega).ceil().max(1.0) as usize;
        let step = self.propagator(omega / substeps as f64)?;
        let mut power = DMatrix::identity(self.dim(), self.dim());
        let mut grid_max: f64 = 1.0;
        let mut first_period_max: f64 = 1.0;
        let total = periods * substeps;
        for k in 1..=total {
            power = &step * power;
            let norm = inf_norm(&power);
            grid_max = grid_max.max(norm);
            if k <= substeps {
                first_period_max = first_period_max.max(norm);
            }
        }
        let tail = inf_norm(&power) * first_period_max;
        Ok(grid_max.max(tail))
    }
}
