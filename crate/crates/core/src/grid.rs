//! Periodic vector-valued functions sampled on a uniform time grid.

use nalgebra::DVector;

use crate::error::{Result, SolverError};

/// Snap threshold (in node-index units) below which an evaluation point is
/// treated as lying exactly on a node. Keeps node evaluation and zero-delay
/// sampling bit-exact.
const NODE_SNAP: f64 = 1e-9;

/// An `omega`-periodic function `R -> R^n` represented by its values on the
/// uniform grid `t_j = j * omega / m`, `j = 0..m`. Indexing is periodic:
/// index `j` means `j mod m`, and evaluation at any real `t` reduces
/// `t mod omega` with linear interpolation between adjacent nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGridFunction {
    period: f64,
    dim: usize,
    values: Vec<DVector<f64>>,
}

impl PeriodicGridFunction {
    pub fn new(period: f64, values: Vec<DVector<f64>>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(SolverError::InvalidArgument(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if values.len() < 2 {
            return Err(SolverError::InvalidArgument(format!(
                "need at least 2 grid nodes, got {}",
                values.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(SolverError::InvalidArgument("zero-dimensional values".into()));
        }
        if let Some(v) = values.iter().find(|v| v.len() != dim) {
            return Err(SolverError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        Ok(Self { period, dim, values })
    }

    /// Constant function `t -> x` on `m` nodes.
    pub fn constant(period: f64, m: usize, x: &DVector<f64>) -> Result<Self> {
        Self::new(period, vec![x.clone(); m])
    }

    /// Sample `f` at the grid nodes.
    pub fn from_fn(period: f64, m: usize, f: impl Fn(f64) -> DVector<f64>) -> Result<Self> {
        let step = period / m as f64;
        Self::new(period, (0..m).map(|j| f(j as f64 * step)).collect())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid spacing `omega / m`.
    pub fn step(&self) -> f64 {
        self.period / self.nodes() as f64
    }

    pub fn node_time(&self, j: usize) -> f64 {
        j as f64 * self.step()
    }

    /// Value at node `j`, periodically wrapped.
    pub fn value(&self, j: i64) -> &DVector<f64> {
        let m = self.values.len() as i64;
        &self.values[j.rem_euclid(m) as usize]
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [DVector<f64>] {
        &mut self.values
    }

    /// Evaluate at an arbitrary time by periodic linear interpolation.
    /// Points within `1e-9` node-index units of a node return that node's
    /// value exactly.
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let m = self.values.len();
        let s = (t / self.step()).rem_euclid(m as f64);
        let base = s.floor();
        let frac = s - base;
        let j = base as i64;
        if frac <= NODE_SNAP {
            self.value(j).clone()
        } else if frac >= 1.0 - NODE_SNAP {
            self.value(j + 1).clone()
        } else {
            self.value(j) * (1.0 - frac) + self.value(j + 1) * frac
        }
    }

    /// The grid function `t_j -> self(t_j - delay)`.
    ///
    /// Linear interpolation is used when the delay is not a grid multiple; it
    /// preserves the componentwise order of ordered functions, which the
    /// monotone iteration relies on.
    pub fn sample_delayed(&self, delay: f64) -> Self {
        let m = self.values.len();
        let offset = delay.rem_euclid(self.period) / self.step();
        let k = offset.floor();
        let frac = offset - k;
        let k = k as i64;
        let values: Vec<DVector<f64>> = if frac <= NODE_SNAP {
            (0..m).map(|j| self.value(j as i64 - k).clone()).collect()
        } else if frac >= 1.0 - NODE_SNAP {
            (0..m).map(|j| self.value(j as i64 - k - 1).clone()).collect()
        } else {
            (0..m)
                .map(|j| {
                    self.value(j as i64 - k) * (1.0 - frac)
                        + self.value(j as i64 - k - 1) * frac
                })
                .collect()
        };
        Self {
            period: self.period,
            dim: self.dim,
            values,
        }
    }

    /// `max_j max_i |u(t_j)_i|`: the sup norm over one period, with the max
    /// norm on `R^n`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// `||self - other||_C`.
    pub fn sup_dist(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max))
    }

    /// Smallest entry of `other - self` over all nodes and components.
    /// Nonnegative (up to slack) iff `self <= other` nodewise.
    pub fn min_diff_entry(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let mut min = f64::INFINITY;
        for (a, b) in self.values.iter().zip(&other.values) {
            for i in 0..self.dim {
                min = min.min(b[i] - a[i]);
            }
        }
        Ok(min)
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.zip_map(b, &f))
            .collect();
        Ok(Self {
            period: self.period,
            dim: self.dim,
            values,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            period: self.period,
            dim: self.dim,
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.nodes() != other.nodes() {
            return Err(SolverError::GridMismatch(format!(
                "node counts differ: {} vs {}",
                self.nodes(),
                other.nodes()
            )));
        }
        if self.dim != other.dim {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let scale = self.period.abs().max(1.0);
        if (self.period - other.period).abs() > 1e-12 * scale {
            return Err(SolverError::GridMismatch(format!(
                "periods differ: {} vs {}",
                self.period, other.period
            )));
        }
        Ok(())
    }
}
