//! The monotone iteration: twin sequences started from a lower and an upper
//! solution, advanced by the fixed-point map `u -> P(F(., u, u_delayed) + C u)`
//! of the shifted problem, squeezing onto the minimal and maximal periodic
//! solutions in the bracket. Also the sampled hypothesis refuters and the
//! contraction-based uniqueness certificate.

use nalgebra::DVector;

use crate::error::{Result, SolverError};
use crate::grid::PeriodicGridFunction;
use crate::order::{in_order_interval, ConeOrder};
use crate::periodic::PeriodicOperator;
use crate::semigroup::Generator;

/// Right-hand side `F(t, x, y)`: `x` the current state, `y` the delayed one.
/// Must be `omega`-periodic in `t`.
pub type RhsFn = Box<dyn Fn(f64, &DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;

/// Constants entering the hypothesis checks and the contraction certificate.
///
/// `c` is the one-sided monotonicity constant of the right-hand side in its
/// state argument (also the spectral-shift candidate). `c1..c3` refine it:
/// when `c1 > 0`, the operative constant may be derived as `c2 + c3 / c1`.
/// `l1`, `l2` are one-sided Lipschitz upper constants, and `normal` is the
/// normality constant of the cone (1 for the componentwise cone under the
/// max norm).
#[derive(Debug, Clone, Copy)]
pub struct HypothesisConstants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub l1: f64,
    pub l2: f64,
    pub normal: f64,
}

impl Default for HypothesisConstants {
    fn default() -> Self {
        Self {
            c: 0.0,
            c1: 0.0,
            c2: 0.0,
            c3: 0.0,
            l1: 0.0,
            l2: 0.0,
            normal: 1.0,
        }
    }
}

impl HypothesisConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c", self.c),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("l1", self.l1),
            ("l2", self.l2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(SolverError::InvalidArgument(format!(
                    "hypothesis constant {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.normal >= 1.0) {
            return Err(SolverError::InvalidArgument(format!(
                "normal constant must be >= 1, got {}",
                self.normal
            )));
        }
        Ok(())
    }

    /// `c2 + c3 / c1`, the monotonicity constant derived from the refined
    /// hypotheses. Undefined when `c1 = 0` with `c3 > 0`.
    pub fn derived_c(&self) -> Result<f64> {
        if self.c1 > 0.0 {
            Ok(self.c2 + self.c3 / self.c1)
        } else if self.c3 == 0.0 {
            Ok(self.c2)
        } else {
            Err(SolverError::DerivedCUndefined)
        }
    }
}

/// The periodic problem `u' + A u = F(t, u(t), u(t - tau))` together with a
/// lower/upper solution pair and the hypothesis constants.
///
/// The delay is reduced modulo the period on construction: candidate
/// solutions are periodic, so only `tau mod omega` is observable. The stored
/// generator is already shift-finalized, so its semigroup is exponentially
/// stable and its shift constant is the one used by the iteration map.
pub struct DelayedProblem {
    generator: Generator,
    rhs: RhsFn,
    period: f64,
    delay: f64,
    lower: PeriodicGridFunction,
    upper: PeriodicGridFunction,
    constants: HypothesisConstants,
}

impl DelayedProblem {
    pub fn new(
        generator: Generator,
        rhs: RhsFn,
        delay: f64,
        lower: PeriodicGridFunction,
        upper: PeriodicGridFunction,
        constants: HypothesisConstants,
    ) -> Result<Self> {
        constants.validate()?;
        lower.check_same_grid(&upper)?;
        if lower.dim() != generator.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: generator.dim(),
                got: lower.dim(),
            });
        }
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(SolverError::InvalidArgument(format!(
                "delay must be finite and >= 0, got {delay}"
            )));
        }
        let period = lower.period();
        let worst = lower.min_diff_entry(&upper)?;
        if worst < -order_slack(&upper) {
            return Err(SolverError::InvalidArgument(format!(
                "order interval is empty: min entry of (upper - lower) is {worst}"
            )));
        }
        let margin = generator.default_margin();
        let generator = generator.finalize_shift(constants.c, margin)?;
        Ok(Self {
            generator,
            rhs,
            period,
            delay: delay.rem_euclid(period),
            lower,
            upper,
            constants,
        })
    }

    /// The shift-finalized generator (stable shifted semigroup).
    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// The delay after reduction modulo the period.
    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn nodes(&self) -> usize {
        self.lower.nodes()
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn lower(&self) -> &PeriodicGridFunction {
        &self.lower
    }

    pub fn upper(&self) -> &PeriodicGridFunction {
        &self.upper
    }

    pub fn constants(&self) -> &HypothesisConstants {
        &self.constants
    }

    /// Evaluate the right-hand side with dimension and finiteness checks.
    pub fn rhs(&self, t: f64, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let out = (self.rhs)(t, x, y);
        if out.len() != self.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim(),
                got: out.len(),
            });
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteRhs { t });
        }
        Ok(out)
    }

    /// The periodic solve operator on this problem's grid, built from the
    /// shift-finalized generator.
    pub fn operator(&self) -> Result<PeriodicOperator> {
        PeriodicOperator::new(self.generator.clone(), self.period, self.nodes())
    }

    /// Node values of `F(t_j, u(t_j), u(t_j - tau)) + C u(t_j)`, the forcing
    /// seen by the shifted linear solve. Off-grid delayed values come from
    /// periodic linear interpolation, which preserves the order of ordered
    /// iterates.
    pub fn shifted_forcing(&self, u: &PeriodicGridFunction) -> Result<PeriodicGridFunction> {
        self.lower.check_same_grid(u)?;
        let delayed = u.sample_delayed(self.delay);
        let shift = self.generator.shift();
        let m = u.nodes();
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            let t = u.node_time(j);
            let f = self.rhs(t, u.value(j as i64), delayed.value(j as i64))?;
            values.push(f + u.value(j as i64) * shift);
        }
        PeriodicGridFunction::new(self.period, values)
    }
}

/// Order slack used by the iteration's internal checks, scaled by the
/// bracket size.
fn order_slack(upper: &PeriodicGridFunction) -> f64 {
    1e-9 * (1.0 + upper.sup_norm())
}

/// One step of the monotone fixed-point map: the periodic solve applied to
/// the shifted forcing of `u`. Order-preserving on the bracket whenever the
/// one-sided monotonicity hypothesis holds. Logs a warning when `u` leaves
/// the bracket (order preservation is only guaranteed inside).
pub fn picard_step(
    p: &DelayedProblem,
    op: &PeriodicOperator,
    u: &PeriodicGridFunction,
) -> Result<PeriodicGridFunction> {
    let order = ConeOrder::new(p.dim(), order_slack(p.upper()))?;
    if !in_order_interval(u, p.lower(), p.upper(), &order)? {
        log::warn!("iterate left the lower/upper bracket; order preservation not guaranteed");
    }
    op.apply(&p.shifted_forcing(u)?)
}

/// Outcome of a lower- or upper-solution verification.
#[derive(Debug, Clone, Copy)]
pub struct SolutionCheck {
    pub ok: bool,
    /// Smallest slack of the defining inequality over all nodes and
    /// components; negative means violated by that amount.
    pub worst_violation: f64,
}

fn differential_slack(p: &DelayedProblem, v: &PeriodicGridFunction, upper: bool) -> Result<f64> {
    p.lower().check_same_grid(v)?;
    let m = v.nodes();
    let two_delta = 2.0 * v.step();
    let delayed = v.sample_delayed(p.delay());
    let a = p.generator().matrix();
    let mut worst = f64::INFINITY;
    for j in 0..m {
        let t = v.node_time(j);
        let derivative = (v.value(j as i64 + 1) - v.value(j as i64 - 1)) / two_delta;
        let f = p.rhs(t, v.value(j as i64), delayed.value(j as i64))?;
        let residual = f - derivative - a * v.value(j as i64);
        for i in 0..residual.len() {
            let slack = if upper { -residual[i] } else { residual[i] };
            worst = worst.min(slack);
        }
    }
    Ok(worst)
}

/// Check `v' + A v <= F(t, v, v_delayed)` at every node, the derivative by
/// central finite differences with periodic wrap.
pub fn verify_lower_solution(
    p: &DelayedProblem,
    v: &PeriodicGridFunction,
    tol: f64,
) -> Result<SolutionCheck> {
    let worst = differential_slack(p, v, false)?;
    Ok(SolutionCheck {
        ok: worst >= -tol,
        worst_violation: worst,
    })
}

/// Check the reversed inequality `v' + A v >= F(t, v, v_delayed)`.
pub fn verify_upper_solution(
    p: &DelayedProblem,
    v: &PeriodicGridFunction,
    tol: f64,
) -> Result<SolutionCheck> {
    let worst = differential_slack(p, v, true)?;
    Ok(SolutionCheck {
        ok: worst >= -tol,
        worst_violation: worst,
    })
}

/// A concrete counterexample found by a sampled hypothesis refuter.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RefutationWitness {
    pub hypothesis: String,
    pub t: f64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// Most negative entry of the checked inequality.
    pub margin: f64,
}

/// Result of a sampled refutation check. Sampling is a sound refuter, not a
/// prover: `ok = true` means no counterexample was found among the drawn
/// samples, `ok = false` comes with a concrete witness.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisCheck {
    pub ok: bool,
    pub samples: usize,
    pub witness: Option<RefutationWitness>,
}

struct IntervalSampler<'a> {
    lower: &'a PeriodicGridFunction,
    upper: &'a PeriodicGridFunction,
    lower_delayed: PeriodicGridFunction,
    upper_delayed: PeriodicGridFunction,
}

impl<'a> IntervalSampler<'a> {
    fn new(p: &'a DelayedProblem) -> Self {
        Self {
            lower: p.lower(),
            upper: p.upper(),
            lower_delayed: p.lower().sample_delayed(p.delay()),
            upper_delayed: p.upper().sample_delayed(p.delay()),
        }
    }

    fn ordered_pair(
        rng: &mut impl rand::Rng,
        lo: &DVector<f64>,
        hi: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let n = lo.len();
        let mut a = DVector::zeros(n);
        let mut b = DVector::zeros(n);
        for i in 0..n {
            let w = hi[i] - lo[i];
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            let p = lo[i] + r1 * w;
            let q = lo[i] + r2 * w;
            a[i] = p.min(q);
            b[i] = p.max(q);
        }
        (a, b)
    }

    /// Ordered states at node `j` and ordered delayed states at `t_j - tau`.
    fn draw(
        &self,
        rng: &mut impl rand::Rng,
        j: i64,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>) {
        let (x1, x2) = Self::ordered_pair(rng, self.lower.value(j), self.upper.value(j));
        let (y1, y2) = Self::ordered_pair(
            rng,
            self.lower_delayed.value(j),
            self.upper_delayed.value(j),
        );
        (x1, x2, y1, y2)
    }

    /// A random grid function in the bracket.
    fn random_function(&self, rng: &mut impl rand::Rng, period: f64) -> PeriodicGridFunction {
        let m = self.lower.nodes();
        let values = (0..m)
            .map(|j| {
                let lo = self.lower.value(j as i64);
                let hi = self.upper.value(j as i64);
                DVector::from_fn(lo.len(), |i, _| {
                    let r: f64 = rng.random();
                    lo[i] + r * (hi[i] - lo[i])
                })
            })
            .collect();
        PeriodicGridFunction::new(period, values).expect("bracket grid is valid")
    }
}

fn refuter_tol(p: &DelayedProblem) -> f64 {
    1e-9 * (1.0 + p.upper().sup_norm())
}

/// Sampled refuter for the one-sided monotonicity hypothesis
/// `F(t, x2, y2) - F(t, x1, y1) >= -c (x2 - x1)` over ordered quadruples
/// drawn from the bracket.
pub fn check_h1(p: &DelayedProblem, samples: usize, rng_seed: u64) -> Result<HypothesisCheck> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let sampler = IntervalSampler::new(p);
    let c = p.constants().c;
    let tol = refuter_tol(p);
    let m = p.nodes() as i64;
    for k in 0..samples {
        let j = (k as i64) % m; // deterministic node sweep, random states
        let (x1, x2, y1, y2) = sampler.draw(&mut rng, j);
        let t = p.lower().node_time(j as usize);
        let d = p.rhs(t, &x2, &y2)? - p.rhs(t, &x1, &y1)? + (&x2 - &x1) * c;
        let margin = d.min();
        if margin < -tol {
            return Ok(HypothesisCheck {
                ok: false,
                samples: k + 1,
                witness: Some(RefutationWitness {
                    hypothesis: "H1".into(),
                    t,
                    x1: x1.iter().copied().collect(),
                    x2: x2.iter().copied().collect(),
                    y1: y1.iter().copied().collect(),
                    y2: y2.iter().copied().collect(),
                    margin,
                }),
            });
        }
    }
    Ok(HypothesisCheck {
        ok: true,
        samples,
        witness: None,
    })
}

/// Combined result of the refined hypothesis refuters.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RefinedChecks {
    pub h3: HypothesisCheck,
    pub h4: HypothesisCheck,
    pub h5: HypothesisCheck,
    /// `c2 + c3 / c1`, usable in place of the direct monotonicity constant
    /// when the refined hypotheses hold.
    pub derived_c: f64,
}

/// Sampled refuters for the refined hypotheses: the interval comparison
/// `u2(t) - u1(t) >= c1 (u2(t - tau) - u1(t - tau))` over ordered function
/// pairs from the bracket, the two-constant lower bound
/// `F(t,x2,y2) - F(t,x1,y1) >= -c2 (x2-x1) - c3 (y2-y1)`, and the upper
/// bound `F(t,x2,y2) - F(t,x1,y1) <= l1 (x2-x1) + l2 (y2-y1)`.
pub fn check_h3_h4_h5(p: &DelayedProblem, samples: usize, rng_seed: u64) -> Result<RefinedChecks> {
    use rand::SeedableRng;
    let derived_c = p.constants().derived_c()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let sampler = IntervalSampler::new(p);
    let tol = refuter_tol(p);
    let k = *p.constants();
    let m = p.nodes() as i64;

    let mut h3 = HypothesisCheck {
        ok: true,
        samples,
        witness: None,
    };
    for s in 0..samples {
        let f1 = sampler.random_function(&mut rng, p.period());
        let f2 = sampler.random_function(&mut rng, p.period());
        let u1 = f1.zip_map(&f2, f64::min)?;
        let u2 = f1.zip_map(&f2, f64::max)?;
        let diff = u2.zip_map(&u1, |a, b| a - b)?;
        let delayed = diff.sample_delayed(p.delay());
        let mut margin = f64::INFINITY;
        let mut where_j = 0i64;
        for j in 0..m {
            let v = diff.value(j) - delayed.value(j) * k.c1;
            let local = v.min();
            if local < margin {
                margin = local;
                where_j = j;
            }
        }
        if margin < -tol {
            let u1d = u1.sample_delayed(p.delay());
            let u2d = u2.sample_delayed(p.delay());
            h3 = HypothesisCheck {
                ok: false,
                samples: s + 1,
                witness: Some(RefutationWitness {
                    hypothesis: "H3".into(),
                    t: p.lower().node_time(where_j as usize),
                    x1: u1.value(where_j).iter().copied().collect(),
                    x2: u2.value(where_j).iter().copied().collect(),
                    y1: u1d.value(where_j).iter().copied().collect(),
                    y2: u2d.value(where_j).iter().copied().collect(),
                    margin,
                }),
            };
            break;
        }
    }

    let mut pointwise =
        |name: &str,
         check: &dyn Fn(f64, &DVector<f64>, &DVector<f64>, &DVector<f64>, &DVector<f64>) -> Result<DVector<f64>>|
         -> Result<HypothesisCheck> {
            for s in 0..samples {
                let j = (s as i64) % m;
                let (x1, x2, y1, y2) = sampler.draw(&mut rng, j);
                let t = p.lower().node_time(j as usize);
                let d = check(t, &x1, &x2, &y1, &y2)?;
                let margin = d.min();
                if margin < -tol {
                    return Ok(HypothesisCheck {
                        ok: false,
                        samples: s + 1,
                        witness: Some(RefutationWitness {
                            hypothesis: name.into(),
                            t,
                            x1: x1.iter().copied().collect(),
                            x2: x2.iter().copied().collect(),
                            y1: y1.iter().copied().collect(),
                            y2: y2.iter().copied().collect(),
                            margin,
                        }),
                    });
                }
            }
            Ok(HypothesisCheck {
                ok: true,
                samples,
                witness: None,
            })
        };

    let h4 = pointwise("H4", &|t, x1, x2, y1, y2| {
        Ok(p.rhs(t, x2, y2)? - p.rhs(t, x1, y1)? + (x2 - x1) * k.c2 + (y2 - y1) * k.c3)
    })?;
    let h5 = pointwise("H5", &|t, x1, x2, y1, y2| {
        Ok((x2 - x1) * k.l1 + (y2 - y1) * k.l2 - (p.rhs(t, x2, y2)? - p.rhs(t, x1, y1)?))
    })?;

    Ok(RefinedChecks {
        h3,
        h4,
        h5,
        derived_c,
    })
}

/// The contraction certificate: `kappa = N (l1 + C + l2 c1) C_S M_S omega`,
/// with `C` the shift constant the iteration actually applies, `C_S` the
/// max-row-sum norm of the periodic resolvent and `M_S` the measured bound
/// on `sup_t ||S(t)||`. `kappa < 1` certifies a unique periodic solution in
/// the bracket and a geometric decay of the iterate gaps.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct UniquenessCertificate {
    pub kappa: f64,
    pub certified: bool,
    pub resolvent_norm: f64,
    pub semigroup_bound: f64,
    pub shift: f64,
}

pub fn uniqueness_certificate(
    p: &DelayedProblem,
    op: &PeriodicOperator,
) -> Result<UniquenessCertificate> {
    let k = p.constants();
    let c_s = op.resolvent_norm();
    let m_s = op
        .generator()
        .sup_norm_bound(op.period(), op.nodes().max(16))?;
    let shift = p.generator().shift();
    let kappa = k.normal * (k.l1 + shift + k.l2 * k.c1) * c_s * m_s * op.period();
    Ok(UniquenessCertificate {
        kappa,
        certified: kappa < 1.0,
        resolvent_norm: c_s,
        semigroup_bound: m_s,
        shift,
    })
}

/// Terminal state of a monotone iteration run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Both sequences converged; the gap between them stayed above
    /// tolerance: the limits are the minimal and maximal periodic solutions.
    ExtremalPair,
    /// Both sequences converged onto one function.
    UniqueSolution,
    /// A squeeze inequality failed beyond slack; the hypotheses (or the
    /// supplied constants) are wrong for this problem.
    MonotonicityViolated,
    MaxIterReached,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::ExtremalPair => "extremal_pair",
            SolveStatus::UniqueSolution => "unique_solution",
            SolveStatus::MonotonicityViolated => "monotonicity_violated",
            SolveStatus::MaxIterReached => "max_iter_reached",
        }
    }
}

/// Location and size of a squeeze violation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MonotonicityDiagnostics {
    pub step: usize,
    pub inequality: String,
    pub node: usize,
    pub component: usize,
    pub amount: f64,
}

/// Full record of a monotone iteration run.
#[derive(Debug, Clone)]
pub struct IterationReport {
    /// `v_0, v_1, ..., v_k` (nondecreasing under the hypotheses).
    pub lower_iterates: Vec<PeriodicGridFunction>,
    /// `w_0, w_1, ..., w_k` (nonincreasing under the hypotheses).
    pub upper_iterates: Vec<PeriodicGridFunction>,
    /// Per step, the tightest margin among the three squeeze inequalities
    /// (negative = violated by that amount, possibly still within slack).
    pub monotone_slack: Vec<f64>,
    /// `||w_i - v_i||_C` for `i = 0..k`.
    pub gaps: Vec<f64>,
    /// `(||v_i - v_{i-1}||_C, ||w_i - w_{i-1}||_C)` per step.
    pub step_sizes: Vec<(f64, f64)>,
    /// `gaps[i] / gaps[i-1]`; 0 when the previous gap already vanished.
    pub contraction_ratios: Vec<f64>,
    /// `||Q u - u||_C` for the final lower and upper iterates.
    pub fixed_point_residuals: Option<(f64, f64)>,
    /// One-step defects of the final iterates as discrete mild solutions of
    /// their own shifted forcing.
    pub mild_residuals: Option<(f64, f64)>,
    pub status: SolveStatus,
    pub violation: Option<MonotonicityDiagnostics>,
}

impl IterationReport {
    pub fn iterations(&self) -> usize {
        self.lower_iterates.len() - 1
    }

    /// The minimal periodic solution, when the run converged.
    pub fn minimal_solution(&self) -> Option<&PeriodicGridFunction> {
        match self.status {
            SolveStatus::ExtremalPair | SolveStatus::UniqueSolution => self.lower_iterates.last(),
            _ => None,
        }
    }

    /// The maximal periodic solution, when the run converged.
    pub fn maximal_solution(&self) -> Option<&PeriodicGridFunction> {
        match self.status {
            SolveStatus::ExtremalPair | SolveStatus::UniqueSolution => self.upper_iterates.last(),
            _ => None,
        }
    }
}

fn violation_details(
    from: &PeriodicGridFunction,
    to: &PeriodicGridFunction,
) -> (usize, usize, f64) {
    let mut node = 0;
    let mut comp = 0;
    let mut worst = f64::INFINITY;
    for j in 0..from.nodes() {
        let a = from.value(j as i64);
        let b = to.value(j as i64);
        for i in 0..a.len() {
            let d = b[i] - a[i];
            if d < worst {
                worst = d;
                node = j;
                comp = i;
            }
        }
    }
    (node, comp, worst)
}

/// Run the twin monotone iteration from the problem's lower and upper
/// solutions.
///
/// Each step advances both sequences by one application of the fixed-point
/// map and asserts the squeeze `v_{i-1} <= v_i <= w_i <= w_{i-1}` nodewise
/// within slack; a violation beyond slack aborts with diagnostics, because
/// the squeeze is what makes the limits meaningful. (A violation can also
/// signal a grid too coarse for the problem's stiffness: the discrete
/// quadrature then overshoots the bracket even when the hypotheses hold.)
///
/// Once both step sizes drop below `tol` the run ends with status
/// `UniqueSolution` as soon as the gap `||w_i - v_i||_C` is below `tol` too;
/// while the gap still contracts geometrically the iteration continues
/// (the sequences are closing on one function), and only when the gap
/// stalls above tolerance does the run end as `ExtremalPair`.
pub fn iterate(
    p: &DelayedProblem,
    op: &PeriodicOperator,
    tol: f64,
    max_iter: usize,
) -> Result<IterationReport> {
    if !(tol > 0.0) {
        return Err(SolverError::InvalidArgument(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(SolverError::InvalidArgument("max_iter must be >= 1".into()));
    }
    let verify_tol = 1e-8 * (1.0 + p.upper().sup_norm());
    let lower_check = verify_lower_solution(p, p.lower(), verify_tol)?;
    if !lower_check.ok {
        return Err(SolverError::InvalidLowerSolution {
            worst: lower_check.worst_violation,
            tol: verify_tol,
        });
    }
    let upper_check = verify_upper_solution(p, p.upper(), verify_tol)?;
    if !upper_check.ok {
        return Err(SolverError::InvalidUpperSolution {
            worst: upper_check.worst_violation,
            tol: verify_tol,
        });
    }

    let slack = order_slack(p.upper());
    let mut report = IterationReport {
        lower_iterates: vec![p.lower().clone()],
        upper_iterates: vec![p.upper().clone()],
        monotone_slack: Vec::new(),
        gaps: vec![p.lower().sup_dist(p.upper())?],
        step_sizes: Vec::new(),
        contraction_ratios: Vec::new(),
        fixed_point_residuals: None,
        mild_residuals: None,
        status: SolveStatus::MaxIterReached,
        violation: None,
    };

    for step in 1..=max_iter {
        let v_prev = report.lower_iterates.last().unwrap().clone();
        let w_prev = report.upper_iterates.last().unwrap().clone();
        let v_next = picard_step(p, op, &v_prev)?;
        let w_next = picard_step(p, op, &w_prev)?;

        let squeeze = [
            ("v[i-1] <= v[i]", &v_prev, &v_next),
            ("v[i] <= w[i]", &v_next, &w_next),
            ("w[i] <= w[i-1]", &w_next, &w_prev),
        ];
        let mut step_margin = f64::INFINITY;
        let mut violated: Option<MonotonicityDiagnostics> = None;
        for (name, from, to) in squeeze {
            let margin = from.min_diff_entry(to)?;
            step_margin = step_margin.min(margin);
            if margin < -slack && violated.is_none() {
                let (node, component, amount) = violation_details(from, to);
                violated = Some(MonotonicityDiagnostics {
                    step,
                    inequality: name.into(),
                    node,
                    component,
                    amount,
                });
            }
        }
        report.monotone_slack.push(step_margin);

        if let Some(diag) = violated {
            report.lower_iterates.push(v_next);
            report.upper_iterates.push(w_next);
            report.gaps.push(f64::NAN);
            report.status = SolveStatus::MonotonicityViolated;
            report.violation = Some(diag);
            return Ok(report);
        }

        let lower_step = v_next.sup_dist(&v_prev)?;
        let upper_step = w_next.sup_dist(&w_prev)?;
        let gap = v_next.sup_dist(&w_next)?;
        let prev_gap = *report.gaps.last().unwrap();
        report.step_sizes.push((lower_step, upper_step));
        report
            .contraction_ratios
            .push(if prev_gap > 0.0 { gap / prev_gap } else { 0.0 });
        report.gaps.push(gap);
        report.lower_iterates.push(v_next);
        report.upper_iterates.push(w_next);

        if lower_step.max(upper_step) <= tol {
            let unique = gap <= tol;
            // a gap above tolerance that still contracts geometrically is
            // heading to zero; only a stalled gap separates the limits
            let stalled = prev_gap > 0.0 && gap / prev_gap >= 0.999;
            if unique || stalled {
                let minimal = report.lower_iterates.last().unwrap();
                let maximal = report.upper_iterates.last().unwrap();
                let q_min = picard_step(p, op, minimal)?;
                let q_max = picard_step(p, op, maximal)?;
                report.fixed_point_residuals =
                    Some((q_min.sup_dist(minimal)?, q_max.sup_dist(maximal)?));
                report.mild_residuals = Some((
                    op.mild_residual(minimal, &p.shifted_forcing(minimal)?)?,
                    op.mild_residual(maximal, &p.shifted_forcing(maximal)?)?,
                ));
                report.status = if unique {
                    SolveStatus::UniqueSolution
                } else {
                    SolveStatus::ExtremalPair
                };
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Probe the extremality of a converged pair: iterate the fixed-point map
/// from random starting functions inside the bracket until they settle, and
/// check that every settled probe lands between the minimal and maximal
/// solutions.
pub fn extremality_check(
    p: &DelayedProblem,
    op: &PeriodicOperator,
    report: &IterationReport,
    probes: usize,
    rng_seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<bool> {
    use rand::SeedableRng;
    let (minimal, maximal) = match (report.minimal_solution(), report.maximal_solution()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(SolverError::InvalidArgument(
                "extremality check needs a converged report".into(),
            ))
        }
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
    let sampler = IntervalSampler::new(p);
    // allow for the probe's own convergence tolerance on top of order slack
    let slack = order_slack(p.upper()) + 10.0 * tol;
    for _ in 0..probes {
        let mut probe = sampler.random_function(&mut rng, p.period());
        let mut settled = false;
        for _ in 0..max_iter {
            let next = picard_step(p, op, &probe)?;
            let moved = next.sup_dist(&probe)?;
            probe = next;
            if moved <= tol {
                settled = true;
                break;
            }
        }
        if !settled {
            return Ok(false);
        }
        if minimal.min_diff_entry(&probe)? < -slack || probe.min_diff_entry(maximal)? < -slack {
            return Ok(false);
        }
    }
    Ok(true)
}
