//! Built-in problem families with verified lower/upper solutions, plus the
//! independent oracles used to cross-check the solver: a Fourier closed form
//! for the linear scalar benchmark and a method-of-steps time integrator for
//! the full nonlinear delayed equation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, SolverError};
use crate::grid::PeriodicGridFunction;
use crate::semigroup::Generator;
use crate::solver::{
    verify_lower_solution, verify_upper_solution, DelayedProblem, HypothesisConstants,
};

/// Scalar reaction term `f(x, t, u, v)` applied componentwise; `x` is the
/// spatial coordinate of the component, `v` the delayed value.
pub type ScalarRhs = Box<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

/// Second-order central-difference discretization of `-d^2/dx^2` on `(0, 1)`
/// with zero Dirichlet data: `diffusion * (n+1)^2 * tridiag(-1, 2, -1)`.
/// Symmetric, positive definite, nonpositive off-diagonal.
pub fn dirichlet_laplacian(n: usize, diffusion: f64) -> DMatrix<f64> {
    let scale = diffusion * ((n + 1) * (n + 1)) as f64;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = 2.0 * scale;
        if i + 1 < n {
            a[(i, i + 1)] = -scale;
            a[(i + 1, i)] = -scale;
        }
    }
    a
}

/// Periodic upwind difference of `speed * d/dx` on `[0, 2 pi)` with `m`
/// nodes: a circulant matrix with zero row sums and nonpositive
/// off-diagonal, so `exp(-t A)` is row-stochastic. Upwind (not centered)
/// differencing keeps the off-diagonal sign pattern that positivity of the
/// semigroup requires.
pub fn upwind_transport(m: usize, speed: f64) -> DMatrix<f64> {
    let h = std::f64::consts::TAU / m as f64;
    let c = speed / h;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = c;
        a[(i, (i + m - 1) % m)] = -c;
    }
    a
}

/// Spatial coordinates of the interior nodes of the Dirichlet grid.
pub fn dirichlet_coordinates(n: usize) -> Vec<f64> {
    let h = 1.0 / (n + 1) as f64;
    (1..=n).map(|i| i as f64 * h).collect()
}

/// Spatial coordinates of the periodic transport grid on `[0, 2 pi)`.
pub fn transport_coordinates(m: usize) -> Vec<f64> {
    let h = std::f64::consts::TAU / m as f64;
    (0..m).map(|i| i as f64 * h).collect()
}

fn componentwise_rhs(
    coords: Vec<f64>,
    f: ScalarRhs,
) -> impl Fn(f64, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync {
    move |t, u, v| DVector::from_fn(coords.len(), |i, _| f(coords[i], t, u[i], v[i]))
}

fn verify_built(p: DelayedProblem) -> Result<DelayedProblem> {
    let tol = 1e-8 * (1.0 + p.upper().sup_norm());
    let low = verify_lower_solution(&p, p.lower(), tol)?;
    if !low.ok {
        return Err(SolverError::InvalidLowerSolution {
            worst: low.worst_violation,
            tol,
        });
    }
    let up = verify_upper_solution(&p, p.upper(), tol)?;
    if !up.ok {
        return Err(SolverError::InvalidUpperSolution {
            worst: up.worst_violation,
            tol,
        });
    }
    Ok(p)
}

/// A semilinear heat problem on `(0, 1)` with zero Dirichlet data.
#[derive(Debug, Clone)]
pub struct ParabolicRecipe {
    /// Interior spatial nodes `n`.
    pub spatial_nodes: usize,
    /// Time grid nodes per period.
    pub time_nodes: usize,
    pub period: f64,
    pub delay: f64,
    pub diffusion: f64,
    /// The upper solution is this multiple of the equilibrium profile
    /// `A^{-1} 1` (the steady state under unit forcing). A constant fails
    /// the upper-solution check at interior nodes for Dirichlet data; this
    /// profile does not.
    pub upper_amplitude: f64,
    pub constants: HypothesisConstants,
}

/// Build the discretized parabolic problem with lower solution `0` and upper
/// solution `amplitude * A^{-1} 1`, both verified at build time.
pub fn build_parabolic(recipe: &ParabolicRecipe, f: ScalarRhs) -> Result<DelayedProblem> {
    let n = recipe.spatial_nodes;
    if n < 2 {
        return Err(SolverError::InvalidArgument(format!(
            "parabolic problem needs at least 2 spatial nodes, got {n}"
        )));
    }
    if !(recipe.diffusion > 0.0) {
        return Err(SolverError::InvalidArgument(format!(
            "diffusion must be > 0, got {}",
            recipe.diffusion
        )));
    }
    let a = dirichlet_laplacian(n, recipe.diffusion);
    let profile = a
        .clone()
        .lu()
        .solve(&DVector::from_element(n, 1.0))
        .ok_or(SolverError::InvalidArgument(
            "Dirichlet generator is singular".into(),
        ))?;
    let upper_vec = &profile * recipe.upper_amplitude;
    let lower =
        PeriodicGridFunction::constant(recipe.period, recipe.time_nodes, &DVector::zeros(n))?;
    let upper = PeriodicGridFunction::constant(recipe.period, recipe.time_nodes, &upper_vec)?;
    let generator = Generator::new(a)?;
    let rhs = componentwise_rhs(dirichlet_coordinates(n), f);
    let p = DelayedProblem::new(
        generator,
        Box::new(rhs),
        recipe.delay,
        lower,
        upper,
        recipe.constants,
    )?;
    verify_built(p)
}

/// A delayed advection problem on the circle, doubly periodic: spatial
/// period `2 pi` and time period `2 pi`.
#[derive(Debug, Clone)]
pub struct TransportRecipe {
    /// Spatial nodes on `[0, 2 pi)`.
    pub spatial_nodes: usize,
    /// Time grid nodes per period.
    pub time_nodes: usize,
    pub delay: f64,
    pub speed: f64,
    /// Constant upper solution level `K`; valid when `f(x, t, K, K) <= 0`
    /// (the transport generator annihilates constants).
    pub upper_level: f64,
    pub constants: HypothesisConstants,
}

/// Build the discretized transport problem with lower solution `0` and the
/// constant upper solution `K`, both verified at build time.
pub fn build_transport(recipe: &TransportRecipe, f: ScalarRhs) -> Result<DelayedProblem> {
    let m = recipe.spatial_nodes;
    if m < 3 {
        return Err(SolverError::InvalidArgument(format!(
            "transport problem needs at least 3 spatial nodes, got {m}"
        )));
    }
    if !(recipe.speed > 0.0) {
        return Err(SolverError::InvalidArgument(format!(
            "advection speed must be > 0, got {}",
            recipe.speed
        )));
    }
    let period = std::f64::consts::TAU;
    let a = upwind_transport(m, recipe.speed);
    let lower = PeriodicGridFunction::constant(period, recipe.time_nodes, &DVector::zeros(m))?;
    let upper = PeriodicGridFunction::constant(
        period,
        recipe.time_nodes,
        &DVector::from_element(m, recipe.upper_level),
    )?;
    let generator = Generator::new(a)?;
    let rhs = componentwise_rhs(transport_coordinates(m), f);
    let p = DelayedProblem::new(
        generator,
        Box::new(rhs),
        recipe.delay,
        lower,
        upper,
        recipe.constants,
    )?;
    verify_built(p)
}

/// Scalar benchmark `u' + a u = k u(t - tau) + c sin(2 pi t / omega)` with
/// constant lower/upper solutions `-K, K`, `K = (|c| + 1) / (a - k)`.
///
/// Requires `a > 0`, `k >= 0` (the right-hand side is then nondecreasing in
/// the delayed argument, so the monotonicity hypothesis holds with
/// constant 0) and `a > k` (so a constant bracket exists). `c1` only enters
/// the contraction certificate.
pub fn build_scalar_delay(
    a: f64,
    k: f64,
    c: f64,
    tau: f64,
    omega: f64,
    nodes: usize,
    c1: f64,
) -> Result<DelayedProblem> {
    if !(a > 0.0) || !(k >= 0.0) {
        return Err(SolverError::InvalidArgument(format!(
            "need a > 0 and k >= 0, got a = {a}, k = {k}"
        )));
    }
    if a <= k {
        return Err(SolverError::InvalidArgument(
            "no constant upper solution exists at this recipe (a <= k)".into(),
        ));
    }
    let level = (c.abs() + 1.0) / (a - k);
    let lower = PeriodicGridFunction::constant(omega, nodes, &DVector::from_element(1, -level))?;
    let upper = PeriodicGridFunction::constant(omega, nodes, &DVector::from_element(1, level))?;
    let generator = Generator::new(DMatrix::from_element(1, 1, a))?;
    let freq = std::f64::consts::TAU / omega;
    let rhs = move |t: f64, _x: &DVector<f64>, y: &DVector<f64>| {
        DVector::from_element(1, k * y[0] + c * (freq * t).sin())
    };
    let constants = HypothesisConstants {
        c: 0.0,
        c1,
        c2: 0.0,
        c3: 0.0,
        l1: 0.0,
        l2: k,
        normal: 1.0,
    };
    let p = DelayedProblem::new(generator, Box::new(rhs), tau, lower, upper, constants)?;
    verify_built(p)
}

/// Closed-form periodic solution of the linear scalar benchmark: substitute
/// `u = Im(z e^{i W t})`, `W = 2 pi / omega`, into
/// `u' + a u = k u(t - tau) + c sin(W t)` to get
/// `z = c / (i W + a - k e^{-i W tau})`.
pub fn fourier_reference(
    a: f64,
    k: f64,
    c: f64,
    tau: f64,
    omega: f64,
    nodes: usize,
) -> Result<PeriodicGridFunction> {
    let freq = std::f64::consts::TAU / omega;
    let denom = Complex64::new(a, freq) - Complex64::from_polar(k, -freq * tau);
    let amplitude = Complex64::new(c, 0.0) / denom;
    PeriodicGridFunction::from_fn(omega, nodes, |t| {
        DVector::from_element(1, (amplitude * Complex64::new(0.0, freq * t).exp()).im)
    })
}

/// `E = exp(X)`, `phi1(X)` and `phi2(X)` for `X = -delta A`, all from one
/// augmented matrix exponential: with the block matrix
/// `[[X, I, 0], [0, 0, I], [0, 0, 0]]` the top row of its exponential reads
/// `[e^X, phi1(X), phi2(X)]`. The phi functions are entire, so singular
/// generators (zero row sums) are handled.
fn exponential_step_matrices(
    a: &DMatrix<f64>,
    delta: f64,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(3 * n, 3 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * (-delta)));
    for i in 0..n {
        aug[(i, n + i)] = 1.0;
        aug[(n + i, 2 * n + i)] = 1.0;
    }
    let big = aug.exp();
    (
        big.view((0, 0), (n, n)).into_owned(),
        big.view((0, n), (n, n)).into_owned(),
        big.view((0, 2 * n), (n, n)).into_owned(),
    )
}

fn delayed_lookup(
    traj: &[DVector<f64>],
    pending: Option<&DVector<f64>>,
    history: &PeriodicGridFunction,
    delta: f64,
    t_delayed: f64,
) -> DVector<f64> {
    if t_delayed < 0.0 {
        return history.eval(t_delayed);
    }
    let s = t_delayed / delta;
    let lo = s.floor();
    let frac = s - lo;
    let lo = lo as usize;
    let get = |i: usize| -> &DVector<f64> {
        if i < traj.len() {
            &traj[i]
        } else {
            pending.expect("delayed lookup ran past the stored trajectory")
        }
    };
    if frac <= 1e-9 {
        get(lo).clone()
    } else if frac >= 1.0 - 1e-9 {
        get(lo + 1).clone()
    } else {
        get(lo) * (1.0 - frac) + get(lo + 1) * frac
    }
}

/// Brute-force cross-check: integrate the full nonlinear delayed equation
/// forward by the method of steps for `periods` periods on a grid `substeps`
/// times finer than the problem grid, then return the last period resampled
/// on the problem grid.
///
/// Each substep is an exponential one-step method on the unshifted system:
/// the exponential-Euler predictor through `phi1` plus the `phi2`-weighted
/// corrector (second order, and exact for forcings that are constant over a
/// substep, which keeps stiff modes clean). Delayed values come from linear
/// interpolation of the stored trajectory, with the initial history taken
/// as the lower solution. Independent of the periodic solve: no shift, no
/// resolvent, no periodicity enforced, and a different quadrature family.
pub fn timestep_oracle(
    p: &DelayedProblem,
    periods: usize,
    substeps: usize,
) -> Result<PeriodicGridFunction> {
    if periods == 0 || substeps == 0 {
        return Err(SolverError::InvalidArgument(
            "periods and substeps must be >= 1".into(),
        ));
    }
    let m = p.nodes();
    let delta = p.period() / (m * substeps) as f64;
    let steps_per_period = m * substeps;
    let total = periods * steps_per_period;
    let a = p.generator().matrix();
    let (prop, phi1, phi2) = exponential_step_matrices(a, delta);
    let phi1 = phi1 * delta;
    let phi2 = phi2 * delta;
    let tau = p.delay();
    let history = p.lower();
    let cap = 1e6 * (1.0 + p.upper().sup_norm());

    let mut traj: Vec<DVector<f64>> = Vec::with_capacity(total + 1);
    traj.push(history.value(0).clone());
    for step in 0..total {
        let t = step as f64 * delta;
        let t_next = (step + 1) as f64 * delta;
        let current = &traj[step];
        let y_now = delayed_lookup(&traj, None, history, delta, t - tau);
        let f_now = p.rhs(t, current, &y_now)?;
        let predictor = &prop * current + &phi1 * &f_now;
        let y_next = delayed_lookup(&traj, Some(&predictor), history, delta, t_next - tau);
        let f_next = p.rhs(t_next, &predictor, &y_next)?;
        let next = &predictor + &phi2 * (f_next - f_now);
        let norm = next.amax();
        if !norm.is_finite() || norm > cap {
            return Err(SolverError::OracleDiverged { norm, cap });
        }
        traj.push(next);
    }
    let base = (periods - 1) * steps_per_period;
    let values = (0..m).map(|j| traj[base + j * substeps].clone()).collect();
    PeriodicGridFunction::new(p.period(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::PeriodicOperator;
    use crate::semigroup::{growth_exponent, inf_norm};
    use crate::solver;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn parabolic_generator_structure() {
        let a = dirichlet_laplacian(20, 1.0);
        assert_eq!(a, a.transpose());
        let eigs = a.clone().symmetric_eigen().eigenvalues;
        assert!(eigs.iter().all(|&l| l > 0.0));
        assert!(crate::semigroup::is_positivity_generator(&a).unwrap());
    }

    #[test]
    fn parabolic_first_eigenvalue_increases_toward_continuum() {
        let pi2 = PI * PI;
        let mut last = 0.0;
        for n in [10, 20, 40, 80] {
            let lambda1 = -growth_exponent(&dirichlet_laplacian(n, 1.0)).unwrap();
            assert!(lambda1 > last && lambda1 < pi2, "lambda1 = {lambda1}");
            last = lambda1;
        }
    }

    #[test]
    fn parabolic_builder_verifies_bracket() {
        let recipe = ParabolicRecipe {
            spatial_nodes: 16,
            time_nodes: 16,
            period: 1.0,
            delay: 0.25,
            diffusion: 1.0,
            upper_amplitude: 2.0,
            constants: HypothesisConstants {
                l2: 0.5,
                c1: 0.5,
                ..Default::default()
            },
        };
        let p = build_parabolic(&recipe, Box::new(|_x, _t, _u, v| 1.0 + 0.5 * v)).unwrap();
        assert!(p.generator().is_positivity());
        assert_eq!(p.generator().shift(), 0.0);

        // an upper solution that is too small must be rejected
        let mut bad = recipe.clone();
        bad.upper_amplitude = 0.5;
        assert!(matches!(
            build_parabolic(&bad, Box::new(|_x, _t, _u, v| 1.0 + 0.5 * v)),
            Err(SolverError::InvalidUpperSolution { .. })
        ));
    }

    #[test]
    fn transport_generator_structure() {
        let m = 16;
        let a = upwind_transport(m, 1.0);
        for i in 0..m {
            assert_relative_eq!(a.row(i).sum(), 0.0, epsilon = 1e-12);
        }
        // circulant: commutes with the cyclic shift exactly
        let mut shift = DMatrix::zeros(m, m);
        for i in 0..m {
            shift[(i, (i + 1) % m)] = 1.0;
        }
        assert_eq!(&a * &shift, &shift * &a);
    }

    #[test]
    fn transport_resolvent_bounds() {
        let m = 64;
        let a = upwind_transport(m, 1.0);
        let eye = DMatrix::identity(m, m);
        for lambda in [0.5, 1.0, 2.0] {
            let inv = (&a + &eye * lambda).try_inverse().unwrap();
            let min_entry = inv.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
            assert!(min_entry >= -1e-12, "lambda {lambda}: min entry {min_entry}");
            assert!(inf_norm(&inv) <= 1.0 / lambda + 1e-12);
        }
    }

    #[test]
    fn transport_shifted_semigroup_is_row_stochastic_decay() {
        let m = 64;
        let g = Generator::new(upwind_transport(m, 1.0))
            .unwrap()
            .finalize_shift(1.0, 0.1)
            .unwrap();
        assert_eq!(g.shift(), 1.0);
        let s = g.propagator(TAU).unwrap();
        assert!((inf_norm(&s) - (-TAU).exp()).abs() <= 1e-10);
        let resolvent = crate::periodic::periodic_resolvent(&g, TAU).unwrap();
        let bound = TAU.exp() / (TAU.exp() - 1.0);
        assert!(inf_norm(&resolvent) <= bound + 1e-9);
        assert_relative_eq!(g.sup_norm_bound(TAU, 64).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn transport_builder_accepts_saturating_reaction() {
        // f = 1 - u: constant 1 is an upper solution since A 1 = 0
        let recipe = TransportRecipe {
            spatial_nodes: 16,
            time_nodes: 16,
            delay: 1.0,
            speed: 1.0,
            upper_level: 1.0,
            constants: HypothesisConstants {
                c: 1.0,
                l1: 1.0,
                ..Default::default()
            },
        };
        let p = build_transport(&recipe, Box::new(|_x, _t, u, _v| 1.0 - u)).unwrap();
        assert_eq!(p.generator().shift(), 1.0);
    }

    #[test]
    fn scalar_builder_rejects_unbracketable_recipes() {
        assert!(build_scalar_delay(1.0, 1.5, 0.0, 1.0, TAU, 32, 0.1).is_err());
        assert!(build_scalar_delay(0.0, 0.0, 1.0, 1.0, TAU, 32, 0.1).is_err());
    }

    #[test]
    fn scalar_homogeneous_case_collapses_to_zero() {
        let p = build_scalar_delay(2.0, 0.5, 0.0, 1.0, TAU, 32, 0.1).unwrap();
        let op = p.operator().unwrap();
        let report = solver::iterate(&p, &op, 1e-8, 200).unwrap();
        assert_eq!(report.status, solver::SolveStatus::UniqueSolution);
        assert!(report.minimal_solution().unwrap().sup_norm() <= 1e-8);
    }

    #[test]
    fn fourier_reference_matches_quoted_amplitude() {
        // a = 2, k = 0.5, tau = pi/2: denominator 2 + 1.5 i
        let denom = Complex64::new(2.0, 1.0) - Complex64::from_polar(0.5, -PI / 2.0);
        assert_relative_eq!(denom.re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(denom.im, 1.5, epsilon = 1e-12);
        let u = fourier_reference(2.0, 0.5, 1.0, PI / 2.0, TAU, 8).unwrap();
        let z = Complex64::new(1.0, 0.0) / denom;
        assert_relative_eq!(u.value(0)[0], z.im, epsilon = 1e-12);
    }

    #[test]
    fn fourier_reference_satisfies_the_equation() {
        let (a, k, c, tau) = (2.0, 0.5, 1.0, PI / 2.0);
        let m = 512;
        let u = fourier_reference(a, k, c, tau, TAU, m).unwrap();
        let delta = u.step();
        let mut worst: f64 = 0.0;
        for j in 0..m as i64 {
            let t = u.node_time(j as usize);
            let du = (u.value(j + 1)[0] - u.value(j - 1)[0]) / (2.0 * delta);
            let residual = du + a * u.value(j)[0] - k * u.eval(t - tau)[0] - c * t.sin();
            worst = worst.max(residual.abs());
        }
        // central differences are second order; anything beyond that would
        // mean the amplitude formula is wrong
        assert!(worst <= delta * delta, "residual {worst}");
    }

    #[test]
    fn oracle_reaches_constant_equilibrium() {
        // u' + u = 1 via a custom right-hand side
        let p = DelayedProblem::new(
            Generator::new(DMatrix::from_element(1, 1, 1.0)).unwrap(),
            Box::new(|_t, _x: &DVector<f64>, _y: &DVector<f64>| DVector::from_element(1, 1.0)),
            0.5,
            PeriodicGridFunction::constant(1.0, 64, &DVector::from_element(1, 0.0)).unwrap(),
            PeriodicGridFunction::constant(1.0, 64, &DVector::from_element(1, 2.0)).unwrap(),
            HypothesisConstants::default(),
        )
        .unwrap();
        let u = timestep_oracle(&p, 50, 10).unwrap();
        for v in u.values() {
            assert!((v[0] - 1.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn oracle_matches_fourier_reference() {
        let (a, k, c, tau) = (2.0, 0.5, 1.0, PI / 2.0);
        let m = 64;
        let p = build_scalar_delay(a, k, c, tau, TAU, m, 0.1).unwrap();
        let brute = timestep_oracle(&p, 50, 10).unwrap();
        let exact = fourier_reference(a, k, c, tau, TAU, m).unwrap();
        assert!(brute.sup_dist(&exact).unwrap() <= 1e-3);
    }

    #[test]
    fn oracle_matches_constant_fixed_point() {
        // u' + u = 1 + u(t - tau)/2 has the constant solution u = 2
        let p = DelayedProblem::new(
            Generator::new(DMatrix::from_element(1, 1, 1.0)).unwrap(),
            Box::new(|_t, _x: &DVector<f64>, y: &DVector<f64>| {
                DVector::from_element(1, 1.0 + 0.5 * y[0])
            }),
            1.0,
            PeriodicGridFunction::constant(TAU, 512, &DVector::from_element(1, 0.0)).unwrap(),
            PeriodicGridFunction::constant(TAU, 512, &DVector::from_element(1, 3.0)).unwrap(),
            HypothesisConstants {
                l2: 0.5,
                c1: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        let u = timestep_oracle(&p, 50, 10).unwrap();
        for v in u.values() {
            assert!((v[0] - 2.0).abs() <= 1e-6);
        }
    }

    #[test]
    fn oracle_detects_divergence() {
        // u' + u = 3 u(t - tau): growth beyond the cap must be reported
        let p = DelayedProblem::new(
            Generator::new(DMatrix::from_element(1, 1, 1.0)).unwrap(),
            Box::new(|_t, _x: &DVector<f64>, y: &DVector<f64>| DVector::from_element(1, 3.0 * y[0])),
            1.0,
            PeriodicGridFunction::constant(TAU, 16, &DVector::from_element(1, 1.0)).unwrap(),
            PeriodicGridFunction::constant(TAU, 16, &DVector::from_element(1, 1.0)).unwrap(),
            HypothesisConstants::default(),
        )
        .unwrap();
        assert!(matches!(
            timestep_oracle(&p, 100, 10),
            Err(SolverError::OracleDiverged { .. })
        ));
    }

    #[test]
    fn phi_matrices_handle_singular_generators() {
        // zero generator: E = I, phi1 = I, phi2 = I/2
        let a = DMatrix::zeros(3, 3);
        let (e, p1, p2) = exponential_step_matrices(&a, 0.25);
        assert!(inf_norm(&(&e - DMatrix::identity(3, 3))) <= 1e-14);
        assert!(inf_norm(&(&p1 - DMatrix::identity(3, 3))) <= 1e-14);
        assert!(inf_norm(&(&p2 - DMatrix::identity(3, 3) * 0.5)) <= 1e-14);
    }

    #[test]
    fn phi_matrices_match_scalar_closed_forms() {
        let a = DMatrix::from_element(1, 1, 2.0);
        let delta = 0.3;
        let x = -delta * 2.0;
        let (e, p1, p2) = exponential_step_matrices(&a, delta);
        assert_relative_eq!(e[(0, 0)], x.exp(), epsilon = 1e-14);
        assert_relative_eq!(p1[(0, 0)], (x.exp() - 1.0) / x, epsilon = 1e-14);
        assert_relative_eq!(p2[(0, 0)], (x.exp() - 1.0 - x) / (x * x), epsilon = 1e-13);
    }

    #[test]
    fn builders_feed_the_periodic_operator() {
        // upper level 2 leaves slack 1 in the upper inequality; a marginal
        // bracket (level 1) would let the O(delta^2) quadrature defect push
        // the first iterate past it
        let recipe = TransportRecipe {
            spatial_nodes: 12,
            time_nodes: 64,
            delay: 1.0,
            speed: 1.0,
            upper_level: 2.0,
            constants: HypothesisConstants {
                c: 1.0,
                l1: 1.0,
                ..Default::default()
            },
        };
        let p = build_transport(&recipe, Box::new(|_x, _t, u, _v| 1.0 - u)).unwrap();
        let op = PeriodicOperator::new(p.generator().clone(), p.period(), p.nodes()).unwrap();
        let report = solver::iterate(&p, &op, 1e-8, 300).unwrap();
        assert_eq!(report.status, solver::SolveStatus::UniqueSolution);
        // the generator annihilates constants, so the continuum steady state
        // is u = 1; the discrete value carries the trapezoid offset delta^2/12
        let u = report.minimal_solution().unwrap();
        let delta = u.step();
        let budget = 1.2 * delta * delta / 12.0;
        for v in u.values() {
            for i in 0..v.len() {
                assert!((v[i] - 1.0).abs() <= budget, "entry {}", v[i]);
            }
        }
    }
}
