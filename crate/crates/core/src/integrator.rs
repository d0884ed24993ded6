//! Time integration of `X' = F(X)`.
//!
//! Steps are classical RK4 with a step-doubling error estimate. On top of the
//! error control every step must pass a monotonicity guard: the objective may
//! not increase by more than the rounding floor of its own evaluation, and a
//! step that would increase it is rejected and retried at half the size. The
//! numerical rank of the state is monitored at every recorded sample.

use serde::{Deserialize, Serialize};

use crate::error::{same_shape, Error, Result};
use crate::flow::{
    factor_field_g_unchecked, factor_field_h_unchecked, objective_unchecked,
    vector_field_unchecked, FactorPair, FlowProblem,
};
use crate::matrix::DenseMatrix;
use crate::random::{seeded_rng, standard_normal};
use crate::svd::{singular_values, svd_truncate};

pub use crate::svd::numerical_rank;

/// Fraction of RK4's real stability boundary (about 2.785) used by the cap.
const STABILITY_LIMIT: f64 = 2.5;
/// H is considered too ill-conditioned to certify anything beyond this.
const CERTIFICATE_MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// First trial step. `None` selects `1e-2 / (1 + |A|)^2`, clamped into
    /// `[min_step, max_step]`.
    pub initial_step: Option<f64>,
    pub min_step: f64,
    pub max_step: f64,
    /// Step-doubling acceptance threshold on the local error estimate,
    /// relative to `1 + |X|`.
    pub local_error_tol: f64,
    /// Stop once `|F(X)| <= grad_tol * (1 + |A|)`.
    pub grad_tol: f64,
    /// Budget of attempted (accepted or rejected) steps.
    pub max_steps: usize,
    /// Relative singular-value threshold for the numerical rank monitor.
    pub rank_tol: f64,
    /// Replace X by its rank-k truncation every this many accepted steps;
    /// 0 disables.
    pub retraction_period: usize,
    /// Record a sample every this many accepted steps.
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            initial_step: None,
            min_step: 1e-12,
            max_step: 1.0,
            local_error_tol: 1e-11,
            grad_tol: 1e-10,
            max_steps: 200_000,
            rank_tol: 1e-8,
            retraction_period: 0,
            record_every: 10,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("min_step", self.min_step)?;
        positive("max_step", self.max_step)?;
        positive("local_error_tol", self.local_error_tol)?;
        positive("grad_tol", self.grad_tol)?;
        positive("rank_tol", self.rank_tol)?;
        if let Some(h) = self.initial_step {
            positive("initial_step", h)?;
            if h < self.min_step || h > self.max_step {
                return Err(Error::Domain(format!(
                    "initial_step {h} outside [{}, {}]",
                    self.min_step, self.max_step
                )));
            }
        }
        if self.min_step > self.max_step {
            return Err(Error::Domain("min_step exceeds max_step".into()));
        }
        if self.max_steps == 0 || self.record_every == 0 {
            return Err(Error::Domain(
                "max_steps and record_every must be positive".into(),
            ));
        }
        Ok(())
    }

    /// The first trial step for target `a`.
    pub fn initial_step_for(&self, a: &DenseMatrix) -> f64 {
        self.initial_step.unwrap_or_else(|| {
            let scale = 1.0 + a.norm();
            (1e-2 / (scale * scale)).clamp(self.min_step, self.max_step)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxStepsReached,
    StepUnderflow,
    RankDriftDetected,
    /// A fixed-horizon run reached its end time.
    HorizonReached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: DenseMatrix,
    /// Objective `f_A(X)`.
    pub f: f64,
    /// `|F(X)|`, the quantity the stopping rule tests.
    pub grad_norm: f64,
    pub numerical_rank: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected_error: usize,
    pub rejected_monotone: usize,
    pub retractions: usize,
    /// Accepted steps whose objective went up at all (within rounding).
    pub objective_increases: usize,
    /// Largest `(f_new - f_old) / f_old` over accepted steps, 0 if none rose.
    pub max_relative_increase: f64,
}

impl StepStats {
    pub fn attempts(&self) -> usize {
        self.accepted + self.rejected_error + self.rejected_monotone
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: Status,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory always holds its initial sample")
    }

    pub fn final_state(&self) -> &DenseMatrix {
        &self.last().x
    }

    pub fn final_time(&self) -> f64 {
        self.last().t
    }

    /// True when every recorded sample had numerical rank `k`.
    pub fn rank_preserved(&self, k: usize) -> bool {
        self.samples.iter().all(|s| s.numerical_rank == k)
    }
}

/// State vectors the adaptive stepper can advance. `primary` is the flow
/// state X that the objective, guard and rank monitor look at.
trait OdeState: Clone {
    fn axpy(&mut self, alpha: f64, other: &Self);
    fn dist(&self, other: &Self) -> f64;
    fn primary(&self) -> &DenseMatrix;
    fn is_finite(&self) -> bool;

    /// Replaces the state by its rank-k truncation; returns false when the
    /// state type does not support it.
    fn retract(&mut self, _k: usize) -> bool {
        false
    }
}

impl OdeState for DenseMatrix {
    fn axpy(&mut self, alpha: f64, other: &Self) {
        DenseMatrix::axpy(self, alpha, other);
    }

    fn dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    fn primary(&self) -> &DenseMatrix {
        self
    }

    fn is_finite(&self) -> bool {
        DenseMatrix::is_finite(self)
    }

    fn retract(&mut self, k: usize) -> bool {
        match svd_truncate(self, k) {
            Ok(t) => {
                *self = t.matrix;
                true
            }
            Err(_) => false,
        }
    }
}

#[derive(Clone, Debug)]
struct JointState {
    x: DenseMatrix,
    g: DenseMatrix,
    h: DenseMatrix,
}

impl OdeState for JointState {
    fn axpy(&mut self, alpha: f64, other: &Self) {
        self.x.axpy(alpha, &other.x);
        self.g.axpy(alpha, &other.g);
        self.h.axpy(alpha, &other.h);
    }

    fn dist(&self, other: &Self) -> f64 {
        let dx = (&self.x - &other.x).norm();
        let dg = (&self.g - &other.g).norm();
        let dh = (&self.h - &other.h).norm();
        (dx * dx + dg * dg + dh * dh).sqrt()
    }

    fn primary(&self) -> &DenseMatrix {
        &self.x
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.g.is_finite() && self.h.is_finite()
    }
}

fn rk4<S: OdeState>(field: &impl Fn(&S) -> S, y: &S, h: f64, k1: &S) -> S {
    let stage = |k: &S, c: f64| {
        let mut s = y.clone();
        s.axpy(c * h, k);
        s
    };
    let k2 = field(&stage(k1, 0.5));
    let k3 = field(&stage(&k2, 0.5));
    let k4 = field(&stage(&k3, 1.0));
    let mut out = y.clone();
    out.axpy(h / 6.0, k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

/// One classical RK4 step of `X' = F(X)` with step `h`.
pub fn rk4_step(a: &DenseMatrix, x: &DenseMatrix, h: f64) -> Result<DenseMatrix> {
    same_shape("RK4 step", a.shape(), x.shape())?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Domain(format!(
            "step size must be positive, got {h}"
        )));
    }
    let field = |y: &DenseMatrix| vector_field_unchecked(a, y);
    let k1 = field(x);
    Ok(rk4(&field, x, h, &k1))
}

enum Attempt {
    Accepted,
    Rejected,
    Underflow,
}

struct Adaptive<'a, S, F> {
    field: F,
    target: &'a DenseMatrix,
    target_norm: f64,
    config: &'a FlowConfig,
    state: S,
    t: f64,
    h: f64,
    f: f64,
    stats: StepStats,
}

impl<'a, S: OdeState, F: Fn(&S) -> S> Adaptive<'a, S, F> {
    fn new(field: F, target: &'a DenseMatrix, config: &'a FlowConfig, state: S) -> Self {
        let f = objective_unchecked(target, state.primary());
        Self {
            field,
            target,
            target_norm: target.norm(),
            config,
            h: config.initial_step_for(target),
            state,
            t: 0.0,
            f,
            stats: StepStats::default(),
        }
    }

    /// Rounding floor of an objective evaluation near the current state.
    fn guard_slack(&self) -> f64 {
        let x_norm = self.state.primary().norm();
        8.0 * f64::EPSILON * (x_norm + self.target_norm) * (2.0 * self.f).sqrt()
    }

    /// Largest step keeping RK4 inside its real-axis stability interval for
    /// the linearized field. `|DF(X)| <= 2|X|^2 + 4|A - X||X|` bounds the
    /// Jacobian (Frobenius norms dominate the spectral ones).
    fn stability_cap(&self) -> f64 {
        let x = self.state.primary();
        let s = x.norm();
        let r = (self.target - x).norm();
        let bound = 2.0 * s * s + 4.0 * r * s;
        if bound > 0.0 {
            STABILITY_LIMIT / bound
        } else {
            f64::INFINITY
        }
    }

    fn attempt(&mut self, k1: &S, limit: Option<f64>) -> Attempt {
        self.h = self.h.min(self.stability_cap().max(self.config.min_step));
        let h = limit.map_or(self.h, |l| self.h.min(l));
        let full = rk4(&self.field, &self.state, h, k1);
        let half = rk4(&self.field, &self.state, 0.5 * h, k1);
        let k1_half = (self.field)(&half);
        let doubled = rk4(&self.field, &half, 0.5 * h, &k1_half);

        let err = full.dist(&doubled);
        let tol = self.config.local_error_tol * (1.0 + self.state.primary().norm());
        if !doubled.is_finite() || !err.is_finite() || err > tol {
            self.stats.rejected_error += 1;
            let factor = if err.is_finite() {
                (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            return self.shrink(h * factor);
        }

        let f_new = objective_unchecked(self.target, doubled.primary());
        if f_new > self.f + self.guard_slack() {
            self.stats.rejected_monotone += 1;
            return self.shrink(0.5 * h);
        }
        if f_new > self.f {
            self.stats.objective_increases += 1;
            let rel = (f_new - self.f) / self.f;
            self.stats.max_relative_increase = self.stats.max_relative_increase.max(rel);
        }

        self.state = doubled;
        self.t += h;
        self.f = f_new;
        self.stats.accepted += 1;
        let grow = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(1.0, 5.0)
        };
        // A step clipped by `limit` should not shrink the controller's step.
        self.h = (self.h.max(h) * grow).min(self.config.max_step);
        Attempt::Accepted
    }

    fn shrink(&mut self, h: f64) -> Attempt {
        self.h = h;
        if h < self.config.min_step {
            Attempt::Underflow
        } else {
            Attempt::Rejected
        }
    }

    fn sample(&self, grad_norm: f64) -> Sample {
        let x = self.state.primary().clone();
        Sample {
            t: self.t,
            f: self.f,
            grad_norm,
            numerical_rank: numerical_rank(&x, self.config.rank_tol),
            x,
        }
    }
}

fn check_start(problem: &FlowProblem, x0: &DenseMatrix, config: &FlowConfig) -> Result<()> {
    config.validate()?;
    same_shape("initial state", problem.shape(), x0.shape())?;
    if !x0.is_finite() {
        return Err(Error::Precondition(
            "initial state has non-finite entries".into(),
        ));
    }
    let rank = numerical_rank(x0, config.rank_tol);
    if rank != problem.rank() {
        return Err(Error::Precondition(format!(
            "initial state has numerical rank {rank}, expected {}",
            problem.rank()
        )));
    }
    Ok(())
}

/// Runs the stepper until convergence (no `horizon`) or until `horizon`.
fn drive<S: OdeState, F: Fn(&S) -> S>(
    problem: &FlowProblem,
    config: &FlowConfig,
    stepper: &mut Adaptive<'_, S, F>,
    horizon: Option<f64>,
) -> Trajectory {
    let k = problem.rank();
    let stop_tol = config.grad_tol * (1.0 + stepper.target_norm);
    let mut k1 = (stepper.field)(&stepper.state);
    let mut samples = vec![stepper.sample(k1.primary().norm())];
    let mut status = if samples[0].numerical_rank != k {
        Some(Status::RankDriftDetected)
    } else {
        None
    };

    while status.is_none() {
        let grad_norm = k1.primary().norm();
        let remaining = horizon.map(|end| end - stepper.t);
        match remaining {
            Some(r) if r <= 1e-14 * horizon.unwrap_or(0.0) => {
                status = Some(Status::HorizonReached);
                break;
            }
            None if grad_norm <= stop_tol => {
                status = Some(Status::Converged);
                break;
            }
            _ => {}
        }
        if stepper.stats.attempts() >= config.max_steps {
            status = Some(Status::MaxStepsReached);
            break;
        }
        match stepper.attempt(&k1, remaining) {
            Attempt::Underflow => status = Some(Status::StepUnderflow),
            Attempt::Rejected => {}
            Attempt::Accepted => {
                let accepted = stepper.stats.accepted;
                if config.retraction_period > 0 && accepted.is_multiple_of(config.retraction_period)
                {
                    retract(stepper, k);
                }
                k1 = (stepper.field)(&stepper.state);
                if accepted.is_multiple_of(config.record_every) {
                    let sample = stepper.sample(k1.primary().norm());
                    if sample.numerical_rank != k {
                        log::warn!(
                            "numerical rank {} != {k} at t = {}",
                            sample.numerical_rank,
                            sample.t
                        );
                        status = Some(Status::RankDriftDetected);
                    }
                    samples.push(sample);
                }
            }
        }
    }

    let status = status.expect("loop exits with a status");
    if samples.last().is_some_and(|s| s.t < stepper.t) {
        let sample = stepper.sample(k1.primary().norm());
        let drifted = sample.numerical_rank != k;
        samples.push(sample);
        if drifted {
            return Trajectory {
                samples,
                status: Status::RankDriftDetected,
                stats: stepper.stats.clone(),
            };
        }
    }
    Trajectory {
        samples,
        status,
        stats: stepper.stats.clone(),
    }
}

fn retract<S: OdeState, F: Fn(&S) -> S>(stepper: &mut Adaptive<'_, S, F>, k: usize) {
    // The joint (X, G, H) state is never retracted: that would break the
    // factor identity being certified.
    if stepper.state.retract(k) {
        stepper.f = objective_unchecked(stepper.target, stepper.state.primary());
        stepper.stats.retractions += 1;
    }
}

/// Integrates `X' = F(X)` from `x0` until `|F(X)| <= grad_tol (1 + |A|)` or
/// one of the other stopping conditions fires.
pub fn integrate(
    problem: &FlowProblem,
    x0: &DenseMatrix,
    config: &FlowConfig,
) -> Result<Trajectory> {
    check_start(problem, x0, config)?;
    let a = problem.target();
    let field = |y: &DenseMatrix| vector_field_unchecked(a, y);
    let mut stepper = Adaptive::new(field, a, config, x0.clone());
    Ok(drive(problem, config, &mut stepper, None))
}

/// Integrates `X' = F(X)` from `x0` over `[0, horizon]`, ignoring the
/// convergence test.
pub fn integrate_to(
    problem: &FlowProblem,
    x0: &DenseMatrix,
    config: &FlowConfig,
    horizon: f64,
) -> Result<Trajectory> {
    check_start(problem, x0, config)?;
    check_horizon(horizon)?;
    let a = problem.target();
    let field = |y: &DenseMatrix| vector_field_unchecked(a, y);
    let mut stepper = Adaptive::new(field, a, config, x0.clone());
    Ok(drive(problem, config, &mut stepper, Some(horizon)))
}

/// Default initial condition: the rank-`k` truncation of an i.i.d. standard
/// normal matrix, rescaled to the Frobenius norm of `A` (unit norm if `A = 0`).
pub fn default_start(a: &DenseMatrix, k: usize, seed: u64) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    let raw = standard_normal(m, n, &mut seeded_rng(seed));
    let start = svd_truncate(&raw, k)?.matrix;
    let target_norm = if a.norm() > 0.0 { a.norm() } else { 1.0 };
    Ok(start.scaled(target_norm / start.norm()))
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "horizon must be positive, got {horizon}"
        )))
    }
}

/// Outcome of checking `X(T) = G(T) K H(T)^{-1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorCertificate {
    /// `|X(T) - G(T) K H(T)^{-1}|`, or `None` when H was too ill-conditioned.
    pub residual: Option<f64>,
    /// Singular-value condition number of `H(T)`.
    pub h_condition: f64,
}

impl FactorCertificate {
    pub fn is_conclusive(&self) -> bool {
        self.residual.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct FactorRun {
    pub trajectory: Trajectory,
    pub factors: FactorPair,
    pub certificate: FactorCertificate,
}

/// Integrates X together with the factor flows `G' = (A - X) X^T G` and
/// `H' = -X^T (A - X) H` from `(K, I, I)` to `horizon`, then measures how
/// far `X(T)` is from `G(T) K H(T)^{-1}`.
pub fn integrate_with_factors(
    problem: &FlowProblem,
    k0: &DenseMatrix,
    config: &FlowConfig,
    horizon: f64,
) -> Result<FactorRun> {
    check_start(problem, k0, config)?;
    check_horizon(horizon)?;
    let a = problem.target();
    let (m, n) = a.shape();
    let field = |s: &JointState| JointState {
        x: vector_field_unchecked(a, &s.x),
        g: factor_field_g_unchecked(a, &s.x, &s.g),
        h: factor_field_h_unchecked(a, &s.x, &s.h),
    };
    let start = JointState {
        x: k0.clone(),
        g: DenseMatrix::identity(m),
        h: DenseMatrix::identity(n),
    };
    let mut stepper = Adaptive::new(field, a, config, start);
    let trajectory = drive(problem, config, &mut stepper, Some(horizon));
    let JointState { x, g, h } = stepper.state;

    let sv = singular_values(&h);
    let smallest = sv.last().copied().unwrap_or(0.0);
    let h_condition = if smallest > 0.0 {
        sv[0] / smallest
    } else {
        f64::INFINITY
    };
    let residual = if h_condition <= CERTIFICATE_MAX_CONDITION {
        let h_inv = h.inverse()?;
        let reconstructed = &(&g * k0) * &h_inv;
        Some((&x - &reconstructed).norm())
    } else {
        log::warn!("factor certificate inconclusive: cond(H) = {h_condition:e}");
        None
    };
    Ok(FactorRun {
        trajectory,
        factors: FactorPair { g, h },
        certificate: FactorCertificate {
            residual,
            h_condition,
        },
    })
}
