//! Componentwise partial order on `R^n` induced by the nonnegative cone.
//!
//! Under the max norm this cone is normal with normal constant 1: order
//! intervals are norm-bounded by their endpoints with no inflation factor.

use nalgebra::DVector;

use crate::error::{Result, SolverError};
use crate::grid::PeriodicGridFunction;

/// Slack used by solver-facing order checks; absorbs matrix-exponential
/// roundoff (harmless `-1e-15`-sized entries).
pub const SOLVER_ORDER_TOL: f64 = 1e-10;

/// The componentwise order on `R^n`, with a nonnegative slack `tol` for
/// inequality tests. `tol = 0` gives the exact order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOrder {
    dim: usize,
    tol: f64,
}

impl ConeOrder {
    pub fn new(dim: usize, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(SolverError::InvalidArgument("dimension must be >= 1".into()));
        }
        if !(tol >= 0.0) {
            return Err(SolverError::InvalidArgument(format!(
                "order tolerance must be >= 0, got {tol}"
            )));
        }
        Ok(Self { dim, tol })
    }

    /// Exact order (zero slack).
    pub fn exact(dim: usize) -> Result<Self> {
        Self::new(dim, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `x >= 0` componentwise, up to slack: `min_j x_j >= -tol`.
    pub fn contains(&self, x: &DVector<f64>) -> Result<bool> {
        self.check_dim(x)?;
        Ok(x.iter().all(|&v| v >= -self.tol))
    }

    /// `x <= y` in the componentwise order: `y - x` lies in the cone.
    pub fn leq(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<bool> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(x.iter().zip(y.iter()).all(|(&a, &b)| b - a >= -self.tol))
    }
}

/// `v(t_j) <= u(t_j) <= w(t_j)` at every grid node.
pub fn in_order_interval(
    u: &PeriodicGridFunction,
    v: &PeriodicGridFunction,
    w: &PeriodicGridFunction,
    order: &ConeOrder,
) -> Result<bool> {
    u.check_same_grid(v)?;
    u.check_same_grid(w)?;
    for j in 0..u.nodes() {
        let uj = u.value(j as i64);
        if !order.leq(v.value(j as i64), uj)? || !order.leq(uj, w.value(j as i64))? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use proptest::prelude::*;

    #[test]
    fn contains_basic_cases() {
        let order = ConeOrder::exact(2).unwrap();
        assert!(order.contains(&dvector![0.0, 0.0]).unwrap());
        assert!(!order.contains(&dvector![1.0, -1.0]).unwrap());
        let slack = ConeOrder::new(2, 1e-12).unwrap();
        assert!(slack.contains(&dvector![1e-14, 2.0]).unwrap());
        // without slack the same roundoff-sized entry is rejected
        assert!(order.contains(&dvector![1e-14, 2.0]).unwrap());
        assert!(!order.contains(&dvector![-1e-14, 2.0]).unwrap());
    }

    #[test]
    fn contains_rejects_dimension_mismatch() {
        let order = ConeOrder::exact(2).unwrap();
        assert!(matches!(
            order.contains(&dvector![1.0]),
            Err(SolverError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn leq_basic_cases() {
        let order = ConeOrder::exact(2).unwrap();
        assert!(order.leq(&dvector![1.0, 2.0], &dvector![1.0, 2.0]).unwrap());
        assert!(!order.leq(&dvector![0.0, 3.0], &dvector![1.0, 2.0]).unwrap());
        assert!(order.leq(&dvector![0.0, 0.0], &dvector![1.0, 1.0]).unwrap());
    }

    #[test]
    fn order_interval_on_grid_functions() {
        let order = ConeOrder::exact(1).unwrap();
        let period = 1.0;
        let v = PeriodicGridFunction::constant(period, 4, &dvector![0.0]).unwrap();
        let w = PeriodicGridFunction::constant(period, 4, &dvector![1.0]).unwrap();
        let u = PeriodicGridFunction::constant(period, 4, &dvector![0.5]).unwrap();
        assert!(in_order_interval(&u, &v, &w, &order).unwrap());
        assert!(in_order_interval(&v, &v, &v, &order).unwrap());

        let mut vals = vec![dvector![0.5]; 4];
        vals[0] = dvector![1.1];
        let bad = PeriodicGridFunction::new(period, vals).unwrap();
        assert!(!in_order_interval(&bad, &v, &w, &order).unwrap());
    }

    fn vec3() -> impl Strategy<Value = DVector<f64>> {
        prop::collection::vec(-1e3..1e3f64, 3).prop_map(DVector::from_vec)
    }

    proptest! {
        // transitivity of the exact order over sampled comparable triples
        #[test]
        fn leq_transitive(x in vec3(), d1 in vec3(), d2 in vec3()) {
            let order = ConeOrder::exact(3).unwrap();
            let y = &x + d1.map(f64::abs);
            let z = &y + d2.map(f64::abs);
            prop_assert!(order.leq(&x, &y).unwrap());
            prop_assert!(order.leq(&y, &z).unwrap());
            prop_assert!(order.leq(&x, &z).unwrap());
        }

        // normality with constant 1: 0 <= x <= y implies max-norm(x) <= max-norm(y)
        #[test]
        fn normal_constant_is_one(x in vec3(), d in vec3()) {
            let order = ConeOrder::exact(3).unwrap();
            let x = x.map(f64::abs);
            let y = &x + d.map(f64::abs);
            prop_assert!(order.contains(&x).unwrap());
            prop_assert!(order.leq(&x, &y).unwrap());
            prop_assert!(x.amax() <= y.amax());
        }

        // antisymmetry at zero slack: x >= 0 and -x >= 0 forces x = 0
        #[test]
        fn antisymmetry_at_zero(x in vec3()) {
            let order = ConeOrder::exact(3).unwrap();
            if order.contains(&x).unwrap() && order.contains(&(-&x)).unwrap() {
                prop_assert!(x.iter().all(|&v| v == 0.0));
            }
        }
    }
}
