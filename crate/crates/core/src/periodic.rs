//! The periodic forced-response operator of the stable shifted linear system
//! `u' + (A + C I) u = h`: given an `omega`-periodic forcing `h`, produce the
//! unique `omega`-periodic mild solution. Also the plain initial-value
//! propagation used as an independent cross-check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};
use crate::grid::PeriodicGridFunction;
use crate::semigroup::{inf_norm, spectral_radius, Generator};

/// `(I - S(omega))^{-1}` by direct linear solve, with `S(omega)` evaluated
/// by matrix exponential. Requires the shifted semigroup to be exponentially
/// stable, which makes the spectral radius of `S(omega)` strictly less
/// than 1 and the inverse a convergent series of nonnegative terms whenever
/// the generator is a positivity generator.
pub fn periodic_resolvent(g: &Generator, omega: f64) -> Result<DMatrix<f64>> {
    if !g.is_stable() {
        return Err(SolverError::NotStable {
            nu1: g.shifted_growth_exponent(),
        });
    }
    let s_omega = g.propagator(omega)?;
    resolvent_of_period_map(&s_omega)
}

fn resolvent_of_period_map(s_omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let rho = spectral_radius(s_omega)?;
    if rho >= 1.0 {
        return Err(SolverError::SingularPeriodMap { rho });
    }
    let n = s_omega.nrows();
    let eye = DMatrix::identity(n, n);
    (eye - s_omega)
        .try_inverse()
        .ok_or(SolverError::SingularPeriodMap { rho })
}

/// Precomputed data for the periodic solve on a fixed uniform grid:
/// the one-step propagator `S(delta)`, the period map `S(omega) =
/// S(delta)^m`, and the periodic resolvent `(I - S(omega))^{-1}`.
///
/// Immutable after construction; all applications are pure.
#[derive(Debug, Clone)]
pub struct PeriodicOperator {
    generator: Generator,
    period: f64,
    nodes: usize,
    step_propagator: DMatrix<f64>,
    period_propagator: DMatrix<f64>,
    resolvent: DMatrix<f64>,
}

impl PeriodicOperator {
    pub fn new(generator: Generator, period: f64, nodes: usize) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(SolverError::InvalidArgument(format!(
                "period must be positive and finite, got {period}"
            )));
        }
        if nodes < 2 {
            return Err(SolverError::InvalidArgument(format!(
                "need at least 2 grid nodes, got {nodes}"
            )));
        }
        if nodes == 2 {
            log::warn!("2-node grid is degenerate; trapezoid quadrature is still defined");
        }
        if !generator.is_stable() {
            return Err(SolverError::NotStable {
                nu1: generator.shifted_growth_exponent(),
            });
        }
        let step_propagator = generator.propagator(period / nodes as f64)?;
        let period_propagator = step_propagator.pow(nodes as u32);
        let resolvent = resolvent_of_period_map(&period_propagator)?;
        Ok(Self {
            generator,
            period,
            nodes,
            step_propagator,
            period_propagator,
            resolvent,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn step(&self) -> f64 {
        self.period / self.nodes as f64
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// `S(delta)` with `delta` the grid step.
    pub fn step_propagator(&self) -> &DMatrix<f64> {
        &self.step_propagator
    }

    /// `S(omega) = S(delta)^m`.
    pub fn period_propagator(&self) -> &DMatrix<f64> {
        &self.period_propagator
    }

    /// `(I - S(omega))^{-1}`.
    pub fn resolvent(&self) -> &DMatrix<f64> {
        &self.resolvent
    }

    /// `||(I - S(omega))^{-1}||` in the max-row-sum norm; the constant that
    /// enters the uniqueness certificate.
    pub fn resolvent_norm(&self) -> f64 {
        inf_norm(&self.resolvent)
    }

    fn check_grid(&self, h: &PeriodicGridFunction) -> Result<()> {
        if h.nodes() != self.nodes {
            return Err(SolverError::GridMismatch(format!(
                "forcing has {} nodes, operator has {}",
                h.nodes(),
                self.nodes
            )));
        }
        if h.dim() != self.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim(),
                got: h.dim(),
            });
        }
        let scale = self.period.max(1.0);
        if (h.period() - self.period).abs() > 1e-12 * scale {
            return Err(SolverError::GridMismatch(format!(
                "forcing period {} differs from operator period {}",
                h.period(),
                self.period
            )));
        }
        Ok(())
    }

    /// Trapezoid quadrature of the propagated step integral
    /// `int_{t_j}^{t_{j+1}} S(t_{j+1} - s) h(s) ds`, with node values
    /// `S(delta) h_j` and `h_{j+1}`. Second order, and entrywise nonnegative
    /// whenever `h >= 0` and `S(delta) >= 0`, which is what keeps the
    /// periodic solve order-preserving.
    fn step_quadrature(&self, h_j: &DVector<f64>, h_j1: &DVector<f64>) -> DVector<f64> {
        let half = 0.5 * self.step();
        (&self.step_propagator * h_j) * half + h_j1 * half
    }

    /// The unique discrete `omega`-periodic mild solution of
    /// `u' + (A + C I) u = h`.
    ///
    /// One-pass recurrence `u_{j+1} = S(delta) u_j + q_j` with the periodic
    /// closure `u_0 = (I - S(omega))^{-1} sum_j S(delta)^{m-1-j} q_j`, so the
    /// output is periodic by construction. Linear in `h`; maps nonnegative
    /// forcings to nonnegative solutions for positivity generators.
    pub fn apply(&self, h: &PeriodicGridFunction) -> Result<PeriodicGridFunction> {
        self.check_grid(h)?;
        let m = self.nodes;
        let quads: Vec<DVector<f64>> = (0..m)
            .map(|j| self.step_quadrature(h.value(j as i64), h.value(j as i64 + 1)))
            .collect();
        // accumulated one-period quadrature, propagated to t = omega
        let mut acc = DVector::zeros(self.dim());
        for q in &quads {
            acc = &self.step_propagator * acc + q;
        }
        let mut u = Vec::with_capacity(m);
        u.push(&self.resolvent * acc);
        for j in 0..m - 1 {
            let next = &self.step_propagator * &u[j] + &quads[j];
            u.push(next);
        }
        PeriodicGridFunction::new(self.period, u)
    }

    /// `max_j || u_{j+1} - S(delta) u_j - q_j(h) ||` over one period: zero
    /// (to roundoff) exactly when `u` is the discrete periodic mild solution
    /// for the forcing `h`.
    pub fn mild_residual(
        &self,
        u: &PeriodicGridFunction,
        h: &PeriodicGridFunction,
    ) -> Result<f64> {
        self.check_grid(h)?;
        self.check_grid(u)?;
        let m = self.nodes;
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let q = self.step_quadrature(h.value(j as i64), h.value(j as i64 + 1));
            let r = u.value(j as i64 + 1) - &self.step_propagator * u.value(j as i64) - q;
            worst = worst.max(r.amax());
        }
        Ok(worst)
    }
}

/// Forward propagation of the initial value problem
/// `u' + (A + C I) u = h, u(0) = x0` on the grid of `h`, by the same
/// one-step recurrence as the periodic solve but without the periodic
/// closure. Returns the trajectory at `t = 0, delta, ..., horizon`.
///
/// The horizon must be a grid multiple. Works for unstable generators too;
/// for stable ones the trajectory forgets `x0` exponentially and settles on
/// the periodic solution, which is what makes this an independent
/// cross-check of the periodic solve.
pub fn ivp_solve(
    g: &Generator,
    x0: &DVector<f64>,
    h: &PeriodicGridFunction,
    horizon: f64,
) -> Result<Vec<DVector<f64>>> {
    if x0.len() != g.dim() || h.dim() != g.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: g.dim(),
            got: if x0.len() != g.dim() { x0.len() } else { h.dim() },
        });
    }
    let delta = h.step();
    let steps_f = horizon / delta;
    let steps = steps_f.round();
    if (steps_f - steps).abs() > 1e-9 * steps.max(1.0) || steps < 0.0 {
        return Err(SolverError::InvalidArgument(format!(
            "horizon {horizon} is not a nonnegative multiple of the grid step {delta}"
        )));
    }
    let steps = steps as usize;
    let s = g.propagator(delta)?;
    let half = 0.5 * delta;
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(x0.clone());
    for k in 0..steps {
        let q = (&s * h.value(k as i64)) * half + h.value(k as i64 + 1) * half;
        let next = &s * &traj[k] + q;
        traj.push(next);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn scalar_generator(a: f64) -> Generator {
        Generator::new(DMatrix::from_row_slice(1, 1, &[a])).unwrap()
    }

    #[test]
    fn resolvent_geometric_series_scalar() {
        let g = scalar_generator(1.0);
        let r = periodic_resolvent(&g, 2.0f64.ln()).unwrap();
        assert_relative_eq!(r[(0, 0)], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn resolvent_rejects_neutral_generator() {
        let g = scalar_generator(0.0);
        assert!(matches!(
            periodic_resolvent(&g, 1.0),
            Err(SolverError::NotStable { .. })
        ));
    }

    #[test]
    fn resolvent_agrees_with_neumann_series() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -0.5, 1.5]);
        let g = Generator::new(a).unwrap().finalize_shift(0.0, 0.1).unwrap();
        let omega = 0.8;
        let r = periodic_resolvent(&g, omega).unwrap();
        let nu1 = g.shifted_growth_exponent();
        let terms = ((1e-12f64.ln()) / (nu1 * omega)).ceil() as usize;
        let s_omega = g.propagator(omega).unwrap();
        let mut series = DMatrix::identity(2, 2);
        for _ in 0..terms {
            series = &s_omega * series + DMatrix::identity(2, 2);
        }
        assert!(inf_norm(&(&r - &series)) <= 1e-8);
    }

    #[test]
    fn period_map_is_step_power() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let g = Generator::new(a).unwrap();
        let op = PeriodicOperator::new(g.clone(), 1.0, 24).unwrap();
        let direct = g.propagator(1.0).unwrap();
        assert!(inf_norm(&(op.period_propagator() - direct)) <= 1e-10);
    }

    #[test]
    fn constant_forcing_settles_at_equilibrium() {
        // u' + u = 1 has periodic solution u = 1 for any period
        let g = scalar_generator(1.0);
        let op = PeriodicOperator::new(g, 1.0, 64).unwrap();
        let h = PeriodicGridFunction::constant(1.0, 64, &dvector![1.0]).unwrap();
        let u = op.apply(&h).unwrap();
        let delta = op.step();
        let quad_err = delta * delta / 12.0;
        for j in 0..64 {
            assert!((u.value(j)[0] - 1.0).abs() <= 2.0 * quad_err);
        }
    }

    #[test]
    fn sinusoid_matches_closed_form_and_refines_second_order() {
        // u' + u = sin t on period 2 pi: u = (sin t - cos t) / 2
        let omega = 2.0 * std::f64::consts::PI;
        let exact = |t: f64| (t.sin() - t.cos()) / 2.0;
        let mut errors = Vec::new();
        for m in [64usize, 128, 256] {
            let g = scalar_generator(1.0);
            let op = PeriodicOperator::new(g, omega, m).unwrap();
            let h = PeriodicGridFunction::from_fn(omega, m, |t| dvector![t.sin()]).unwrap();
            let u = op.apply(&h).unwrap();
            let err = (0..m)
                .map(|j| (u.value(j as i64)[0] - exact(u.node_time(j))).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[2] <= 1e-4);
        for k in 0..2 {
            let ratio = errors[k] / errors[k + 1];
            assert!(
                (3.0..5.5).contains(&ratio),
                "refinement ratio {ratio} outside second-order window"
            );
        }
    }

    #[test]
    fn zero_forcing_gives_zero_exactly() {
        let g = scalar_generator(1.0);
        let op = PeriodicOperator::new(g, 1.0, 8).unwrap();
        let h = PeriodicGridFunction::constant(1.0, 8, &dvector![0.0]).unwrap();
        let u = op.apply(&h).unwrap();
        assert!(u.values().iter().all(|v| v[0] == 0.0));
    }

    #[test]
    fn apply_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let g = Generator::new(a).unwrap();
        let op = PeriodicOperator::new(g, 1.0, 32).unwrap();
        let rand_h = |rng: &mut ChaCha8Rng| {
            let vals = (0..32)
                .map(|_| DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            PeriodicGridFunction::new(1.0, vals).unwrap()
        };
        let h1 = rand_h(&mut rng);
        let h2 = rand_h(&mut rng);
        let (alpha, beta) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let combo = h1
            .zip_map(&h2, |x, y| alpha * x + beta * y)
            .unwrap();
        let lhs = op.apply(&combo).unwrap();
        let u1 = op.apply(&h1).unwrap();
        let u2 = op.apply(&h2).unwrap();
        let rhs = u1.zip_map(&u2, |x, y| alpha * x + beta * y).unwrap();
        assert!(lhs.sup_dist(&rhs).unwrap() <= 1e-10);
    }

    #[test]
    fn mild_residual_accepts_solution_and_detects_perturbation() {
        let g = scalar_generator(1.0);
        let op = PeriodicOperator::new(g, 1.0, 32).unwrap();
        let h =
            PeriodicGridFunction::from_fn(1.0, 32, |t| dvector![(2.0 * t).cos() + 1.5]).unwrap();
        let u = op.apply(&h).unwrap();
        assert!(op.mild_residual(&u, &h).unwrap() <= 1e-10);

        let eps = 1e-3;
        let mut bumped = u.clone();
        bumped.values_mut()[7][0] += eps;
        assert!(op.mild_residual(&bumped, &h).unwrap() >= eps / 2.0);
    }

    #[test]
    fn equilibrium_residual_is_quadrature_sized() {
        let g = scalar_generator(1.0);
        let op = PeriodicOperator::new(g, 1.0, 32).unwrap();
        let ones = PeriodicGridFunction::constant(1.0, 32, &dvector![1.0]).unwrap();
        let delta = op.step();
        // per-step defect of the trapezoid rule on e^{-s}: O(delta^3)
        assert!(op.mild_residual(&ones, &ones).unwrap() <= delta.powi(3));
    }

    #[test]
    fn ivp_reproduces_periodic_boundary_value() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let g = Generator::new(a).unwrap();
        let op = PeriodicOperator::new(g.clone(), 1.0, 32).unwrap();
        let h = PeriodicGridFunction::from_fn(1.0, 32, |t| {
            dvector![(2.0 * std::f64::consts::PI * t).sin(), 1.0]
        })
        .unwrap();
        let u = op.apply(&h).unwrap();
        let x0 = u.value(0).clone();
        let traj = ivp_solve(&g, &x0, &h, 1.0).unwrap();
        assert!((traj.last().unwrap() - &x0).amax() <= 1e-9);
        // two-period run repeats itself one period later
        let traj2 = ivp_solve(&g, &x0, &h, 2.0).unwrap();
        for j in 0..=32 {
            assert!((&traj2[j + 32] - &traj2[j]).amax() <= 1e-9);
        }
    }

    #[test]
    fn ivp_homogeneous_decay() {
        let g = scalar_generator(1.0);
        let h = PeriodicGridFunction::constant(1.0, 100, &dvector![0.0]).unwrap();
        let traj = ivp_solve(&g, &dvector![1.0], &h, 3.0).unwrap();
        let delta = h.step();
        for (k, u) in traj.iter().enumerate() {
            assert_relative_eq!(u[0], (-(k as f64) * delta).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn ivp_converges_to_attractor() {
        // u' + u = 1 from rest: fine grid so the discrete equilibrium is
        // within 1e-10 of 1, horizon long enough to forget the start
        let g = scalar_generator(1.0);
        let omega = 0.0125;
        let m = 375;
        let h = PeriodicGridFunction::constant(omega, m, &dvector![1.0]).unwrap();
        let traj = ivp_solve(&g, &dvector![0.0], &h, 25.0).unwrap();
        assert!((traj.last().unwrap()[0] - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn ivp_rejects_off_grid_horizon() {
        let g = scalar_generator(1.0);
        let h = PeriodicGridFunction::constant(1.0, 10, &dvector![0.0]).unwrap();
        assert!(ivp_solve(&g, &dvector![0.0], &h, 0.55).is_err());
    }

    #[test]
    fn ivp_forgets_initial_state_at_stability_rate() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let g = Generator::new(a).unwrap();
        let omega = 1.0;
        let m = 32;
        let op = PeriodicOperator::new(g.clone(), omega, m).unwrap();
        let h = PeriodicGridFunction::from_fn(omega, m, |t| {
            dvector![1.0 + (2.0 * std::f64::consts::PI * t).sin(), 0.5]
        })
        .unwrap();
        let periodic = op.apply(&h).unwrap();
        let nu1 = g.shifted_growth_exponent();
        let periods = (20.0 / (nu1.abs() * omega)).ceil() as usize;
        let horizon = periods as f64 * omega;
        let x0 = dvector![3.0, -2.0];
        let traj = ivp_solve(&g, &x0, &h, horizon).unwrap();
        let start_gap = (&x0 - periodic.value(0)).amax();
        let bound = 2.0 * start_gap * (nu1 * (horizon - omega)).exp();
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let k = (periods - 1) * m + j;
            worst = worst.max((&traj[k] - periodic.value(j as i64)).amax());
        }
        assert!(worst <= bound.max(1e-9), "worst {worst} vs bound {bound}");
    }
}
