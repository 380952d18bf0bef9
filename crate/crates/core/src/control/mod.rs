//! Newton-Raphson-flow controllers and the closed-loop simulator.
//!
//! Every dynamic variant solves `J·u̇ = b` with `J = ∂g/∂u(x, u)`:
//!
//! | variant        | `b`                                          |
//! |----------------|----------------------------------------------|
//! | `basic`        | `α(r(t+T) − ŷ)`                              |
//! | `enhanced`     | `(r(t+T) − ŷ) + ṙ(t+T) − ∂g/∂x·f(x, u)`      |
//! | `full`         | `α(r(t+T) − ŷ) + ṙ(t+T) − ∂g/∂x·f(x, u)`     |
//! | `intermediate` | `α(r(t+T) − ŷ) − ∂g/∂x·f(x, u)`              |
//!
//! An injected error `ℰ₂(t)` is added to `b` unscaled. The memoryless variant
//! drives a [`StaticPlant`] with `g(u)·u̇ = α(r(t) − g(u))`.

mod trace;

use std::fmt;
use std::sync::Arc;

pub use trace::{asymptotic_errors, ClosedLoopTrace, TraceRecord, TraceSummary, TAIL_FRACTION};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{AugmentedState, PlantModel, ReferenceSignal, StaticPlant, TimeGrid};
use crate::predict::{PredictorModel, DEFAULT_SINGULARITY_TOL};
use crate::scalar::{all_finite, norm2, to_f64_vec, Real};

/// Injected feedforward error `t ↦ ℰ₂(t)`.
pub type InjectorFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Memoryless,
    Basic,
    Enhanced,
    Full,
    Intermediate,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Memoryless,
        Variant::Basic,
        Variant::Enhanced,
        Variant::Full,
        Variant::Intermediate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Memoryless => "memoryless",
            Variant::Basic => "basic",
            Variant::Enhanced => "enhanced",
            Variant::Full => "full",
            Variant::Intermediate => "intermediate",
        }
    }

    /// Whether the control law consumes `ṙ(t+T)`.
    pub fn needs_rate(self) -> bool {
        matches!(self, Variant::Enhanced | Variant::Full)
    }

    /// Whether the control law consumes `∂g/∂x·f`.
    pub fn needs_dgdx(self) -> bool {
        matches!(self, Variant::Enhanced | Variant::Full | Variant::Intermediate)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown controller variant `{s}`")))
    }
}

#[derive(Clone)]
pub struct ControllerConfig<T> {
    pub variant: Variant,
    /// Speedup gain `α`; ignored by `enhanced`, whose gain is fixed at one.
    pub alpha: T,
    /// Lookahead `T`; zero for the memoryless variant.
    pub horizon: T,
    /// Reciprocal-condition floor for `∂g/∂u`.
    pub singularity_tol: T,
    pub e2: Option<InjectorFn<T>>,
}

impl<T: Real> ControllerConfig<T> {
    pub fn new(variant: Variant, alpha: T, horizon: T) -> Result<Self> {
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        let ok_horizon = if variant == Variant::Memoryless {
            horizon >= T::zero()
        } else {
            horizon > T::zero()
        };
        if !ok_horizon || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self {
            variant,
            alpha,
            horizon,
            singularity_tol: T::lit(DEFAULT_SINGULARITY_TOL),
            e2: None,
        })
    }

    pub fn memoryless(alpha: T) -> Result<Self> {
        Self::new(Variant::Memoryless, alpha, T::zero())
    }

    pub fn with_e2(mut self, e2: InjectorFn<T>) -> Self {
        self.e2 = Some(e2);
        self
    }

    /// Constant injected error.
    pub fn with_constant_e2(self, e2: Vec<T>) -> Self {
        self.with_e2(Arc::new(move |_| e2.clone()))
    }

    pub fn with_singularity_tol(mut self, tol: T) -> Result<Self> {
        if !(tol > T::zero()) {
            return Err(Error::InvalidInput("singularity tolerance must be positive".into()));
        }
        self.singularity_tol = tol;
        Ok(self)
    }

    /// Rejects references lacking `ṙ` for variants that need it.
    pub fn check_reference(&self, r: &ReferenceSignal<T>) -> Result<()> {
        if self.variant.needs_rate() && !r.has_rate() {
            return Err(Error::MissingReferenceRate(self.variant.name()));
        }
        Ok(())
    }
}

impl<T: fmt::Debug> fmt::Debug for ControllerConfig<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControllerConfig")
            .field("variant", &self.variant)
            .field("alpha", &self.alpha)
            .field("horizon", &self.horizon)
            .field("singularity_tol", &self.singularity_tol)
            .field("e2", &self.e2.is_some())
            .finish()
    }
}

/// Control rate together with the quantities the trace records.
#[derive(Clone, Debug)]
pub struct RateEval<T> {
    pub udot: Vec<T>,
    /// `ŷ(t+T)`.
    pub yhat: Vec<T>,
    /// `½‖r(t+T) − ŷ(t+T)‖²`.
    pub v: T,
}

fn solve_guarded<T: Real>(j: &Matrix<T>, b: &[T], tol: T, t: T, x: &[T], u: &[T]) -> Result<Vec<T>> {
    let rcond = j.rcond()?;
    if !(rcond >= tol) {
        return Err(Error::SingularJacobian {
            t: t.to_f64_lossy(),
            x: to_f64_vec(x),
            u: to_f64_vec(u),
            rcond: rcond.to_f64_lossy(),
        });
    }
    j.solve(b)
}

fn retag<T: Real>(e: Error, t: T) -> Error {
    match e {
        Error::Overflow { t: ot, context } if ot.is_nan() => Error::Overflow {
            t: t.to_f64_lossy(),
            context,
        },
        e => e,
    }
}

/// Control rate for a target `r(t+T)` supplied directly (platoon followers build
/// theirs from neighbouring agents). `rdot_ahead` is required by `enhanced`/`full`.
#[allow(clippy::too_many_arguments)]
pub fn control_rate_with_target<T, P>(
    cfg: &ControllerConfig<T>,
    pred: &P,
    plant: &PlantModel<T>,
    t: T,
    x: &[T],
    u: &[T],
    r_ahead: &[T],
    rdot_ahead: Option<&[T]>,
) -> Result<RateEval<T>>
where
    T: Real,
    P: PredictorModel<T> + ?Sized,
{
    if cfg.variant == Variant::Memoryless {
        return Err(Error::InvalidInput(
            "the memoryless variant drives a static plant; use memoryless_rate".into(),
        ));
    }
    let m = plant.io_dim();
    if r_ahead.len() != m {
        return Err(Error::DimensionMismatch {
            context: "reference",
            expected: m,
            got: r_ahead.len(),
        });
    }
    let lin = pred
        .linearize(x, u, cfg.variant.needs_dgdx())
        .map_err(|e| retag(e, t))?;
    let err: Vec<T> = r_ahead.iter().zip(&lin.g).map(|(&r, &y)| r - y).collect();
    let v = T::lit(0.5) * err.iter().map(|&e| e * e).sum::<T>();
    let gain = if cfg.variant == Variant::Enhanced {
        T::one()
    } else {
        cfg.alpha
    };
    let mut b: Vec<T> = err.iter().map(|&e| gain * e).collect();
    if cfg.variant.needs_rate() {
        let rd = rdot_ahead.ok_or(Error::MissingReferenceRate(cfg.variant.name()))?;
        for (bi, &ri) in b.iter_mut().zip(rd) {
            *bi += ri;
        }
    }
    if let Some(dgdx) = &lin.dgdx {
        let gf = dgdx.mul_vec(&plant.dynamics(x, u));
        for (bi, gi) in b.iter_mut().zip(gf) {
            *bi -= gi;
        }
    }
    if let Some(e2) = &cfg.e2 {
        let e = e2(t);
        if e.len() != m {
            return Err(Error::DimensionMismatch {
                context: "injected error",
                expected: m,
                got: e.len(),
            });
        }
        for (bi, ei) in b.iter_mut().zip(e) {
            *bi += ei;
        }
    }
    let udot = solve_guarded(&lin.dgdu, &b, cfg.singularity_tol, t, x, u)?;
    if !all_finite(&udot) {
        return Err(Error::Overflow {
            t: t.to_f64_lossy(),
            context: "control rate".into(),
        });
    }
    Ok(RateEval { udot, yhat: lin.g, v })
}

/// `u̇` of the selected dynamic variant at `state`.
pub fn control_rate<T, P>(
    cfg: &ControllerConfig<T>,
    pred: &P,
    plant: &PlantModel<T>,
    reference: &ReferenceSignal<T>,
    state: &AugmentedState<T>,
) -> Result<Vec<T>>
where
    T: Real,
    P: PredictorModel<T> + ?Sized,
{
    Ok(evaluate(cfg, pred, plant, reference, state)?.udot)
}

fn evaluate<T, P>(
    cfg: &ControllerConfig<T>,
    pred: &P,
    plant: &PlantModel<T>,
    reference: &ReferenceSignal<T>,
    state: &AugmentedState<T>,
) -> Result<RateEval<T>>
where
    T: Real,
    P: PredictorModel<T> + ?Sized,
{
    let r_ahead = reference.eval(state.t, cfg.horizon)?;
    let rdot = if cfg.variant.needs_rate() {
        Some(
            reference
                .eval_rate(state.t, cfg.horizon)?
                .ok_or(Error::MissingReferenceRate(cfg.variant.name()))?,
        )
    } else {
        None
    };
    control_rate_with_target(cfg, pred, plant, state.t, &state.x, &state.u, &r_ahead, rdot.as_deref())
}

pub(crate) fn euler_advance<T: Real>(plant: &PlantModel<T>, state: &AugmentedState<T>, udot: &[T], dt: T) -> Result<AugmentedState<T>> {
    let f = plant.dynamics(&state.x, &state.u);
    let x: Vec<T> = state.x.iter().zip(&f).map(|(&x, &d)| x + dt * d).collect();
    let u: Vec<T> = state.u.iter().zip(udot).map(|(&u, &d)| u + dt * d).collect();
    let t = state.t + dt;
    if !all_finite(&x) || !all_finite(&u) {
        return Err(Error::Overflow {
            t: t.to_f64_lossy(),
            context: "closed-loop state".into(),
        });
    }
    Ok(AugmentedState { x, u, t })
}

/// One forward-Euler step of `(ẋ, u̇) = (f(x, u), control rate)`.
pub fn step_closed_loop<T, P>(
    plant: &PlantModel<T>,
    pred: &P,
    cfg: &ControllerConfig<T>,
    reference: &ReferenceSignal<T>,
    state: &AugmentedState<T>,
    dt: T,
) -> Result<AugmentedState<T>>
where
    T: Real,
    P: PredictorModel<T> + ?Sized,
{
    if !(dt > T::zero()) {
        return Err(Error::InvalidInput("dt must be positive".into()));
    }
    let rate = control_rate(cfg, pred, plant, reference, state)?;
    euler_advance(plant, state, &rate, dt)
}

/// Simulates the closed loop over `grid`. A run stopped by a singular Jacobian or
/// overflow returns the records gathered so far with `failure` set.
pub fn run_closed_loop<T, P>(
    plant: &PlantModel<T>,
    pred: &P,
    cfg: &ControllerConfig<T>,
    reference: &ReferenceSignal<T>,
    x0: &[T],
    u0: &[T],
    grid: &TimeGrid<T>,
) -> Result<ClosedLoopTrace<T>>
where
    T: Real,
    P: PredictorModel<T> + ?Sized,
{
    if cfg.variant == Variant::Memoryless {
        return Err(Error::InvalidInput("use run_memoryless for static plants".into()));
    }
    cfg.check_reference(reference)?;
    if pred.state_dim() != plant.state_dim() || pred.io_dim() != plant.io_dim() {
        return Err(Error::InvalidInput("predictor and plant dimensions differ".into()));
    }
    if reference.dim() != plant.io_dim() {
        return Err(Error::DimensionMismatch {
            context: "reference",
            expected: plant.io_dim(),
            got: reference.dim(),
        });
    }
    let mut state = AugmentedState::new(plant, x0.to_vec(), u0.to_vec(), grid.t0())?;
    plant.probe(x0, u0)?;
    // the reference must cover the last lookahead
    reference.eval(grid.tf(), cfg.horizon)?;

    let mut trace = ClosedLoopTrace::new(grid.dt(), cfg.horizon, grid.tf());
    trace.records.reserve(grid.steps() + 1);
    for k in 0..=grid.steps() {
        state.t = grid.time(k);
        let step = evaluate(cfg, pred, plant, reference, &state).and_then(|ev| {
            let r = reference.eval(state.t, T::zero())?;
            let r_ahead = reference.eval(state.t, cfg.horizon)?;
            Ok((ev, r, r_ahead))
        });
        let (ev, r, r_ahead) = match step {
            Ok(v) => v,
            Err(e) => {
                trace.failure = Some(e);
                return Ok(trace);
            }
        };
        trace.records.push(TraceRecord {
            t: state.t,
            x: state.x.clone(),
            u: state.u.clone(),
            y: plant.output(&state.x),
            yhat: ev.yhat,
            r,
            r_ahead,
            v: ev.v,
        });
        if k == grid.steps() {
            break;
        }
        match euler_advance(plant, &state, &ev.udot, grid.dt()) {
            Ok(s) => state = s,
            Err(e) => {
                trace.failure = Some(e);
                return Ok(trace);
            }
        }
    }
    Ok(trace)
}

/// `u̇ = α·(∂g/∂u)⁻¹(r(t) − g(u))`, plus `(∂g/∂u)⁻¹ℰ₂(t)` when injected.
pub fn memoryless_rate<T: Real>(
    cfg: &ControllerConfig<T>,
    plant: &StaticPlant<T>,
    reference: &ReferenceSignal<T>,
    t: T,
    u: &[T],
) -> Result<Vec<T>> {
    Ok(memoryless_eval(cfg, plant, reference, t, u)?.0)
}

fn memoryless_eval<T: Real>(
    cfg: &ControllerConfig<T>,
    plant: &StaticPlant<T>,
    reference: &ReferenceSignal<T>,
    t: T,
    u: &[T],
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    if u.len() != plant.dim() {
        return Err(Error::DimensionMismatch {
            context: "static plant input",
            expected: plant.dim(),
            got: u.len(),
        });
    }
    let r = reference.eval(t, T::zero())?;
    let y = plant.eval(u);
    let mut b: Vec<T> = r.iter().zip(&y).map(|(&r, &y)| cfg.alpha * (r - y)).collect();
    if let Some(e2) = &cfg.e2 {
        for (bi, ei) in b.iter_mut().zip(e2(t)) {
            *bi += ei;
        }
    }
    let j = plant.jacobian(u)?;
    let udot = solve_guarded(&j, &b, cfg.singularity_tol, t, &[], u)?;
    Ok((udot, y, r))
}

/// Memoryless closed loop `u̇ = α J⁻¹(r − g(u))` over `grid`. Records carry an
/// empty state and `ŷ = y`, `r(t+T) = r(t)`.
pub fn run_memoryless<T: Real>(
    plant: &StaticPlant<T>,
    cfg: &ControllerConfig<T>,
    reference: &ReferenceSignal<T>,
    u0: &[T],
    grid: &TimeGrid<T>,
) -> Result<ClosedLoopTrace<T>> {
    if reference.dim() != plant.dim() {
        return Err(Error::DimensionMismatch {
            context: "reference",
            expected: plant.dim(),
            got: reference.dim(),
        });
    }
    reference.eval(grid.tf(), T::zero())?;
    let mut u = u0.to_vec();
    let mut trace = ClosedLoopTrace::new(grid.dt(), T::zero(), grid.tf());
    for k in 0..=grid.steps() {
        let t = grid.time(k);
        let (udot, y, r) = match memoryless_eval(cfg, plant, reference, t, &u) {
            Ok(v) => v,
            Err(e) => {
                trace.failure = Some(e);
                return Ok(trace);
            }
        };
        let err: Vec<T> = r.iter().zip(&y).map(|(&a, &b)| a - b).collect();
        let v = T::lit(0.5) * norm2(&err) * norm2(&err);
        trace.records.push(TraceRecord {
            t,
            x: Vec::new(),
            u: u.clone(),
            y: y.clone(),
            yhat: y,
            r: r.clone(),
            r_ahead: r,
            v,
        });
        for (ui, di) in u.iter_mut().zip(&udot) {
            *ui += grid.dt() * *di;
        }
        if !all_finite(&u) {
            trace.failure = Some(Error::Overflow {
                t: (t + grid.dt()).to_f64_lossy(),
                context: "memoryless control".into(),
            });
            return Ok(trace);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predict::LtiPredictor;

    /// `ẋ = u`, `y = x`, predictor `g(x,u) = x + T·u`.
    fn integrator(h: f64) -> (PlantModel<f64>, LtiPredictor<f64>) {
        let a = Matrix::zeros(1, 1);
        let b = Matrix::identity(1);
        let c = Matrix::identity(1);
        (
            PlantModel::linear(&a, &b, &c).unwrap(),
            LtiPredictor::new(a, b, c, h).unwrap(),
        )
    }

    /// Static plant `ẋ = 0`, `y = x + u`-free stand-in whose predictor is `g = u`.
    struct IdentityPredictor;

    impl PredictorModel<f64> for IdentityPredictor {
        fn horizon(&self) -> f64 {
            0.1
        }
        fn state_dim(&self) -> usize {
            1
        }
        fn io_dim(&self) -> usize {
            1
        }
        fn predict(&self, _x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
            Ok(u.to_vec())
        }
        fn dgdx(&self, _x: &[f64], _u: &[f64]) -> Result<Matrix<f64>> {
            Ok(Matrix::zeros(1, 1))
        }
        fn dgdu(&self, _x: &[f64], _u: &[f64]) -> Result<Matrix<f64>> {
            Ok(Matrix::identity(1))
        }
    }

    fn frozen_plant() -> PlantModel<f64> {
        PlantModel::new(
            1,
            1,
            Arc::new(|_x: &[f64], _u: &[f64], o: &mut [f64]| o[0] = 0.0),
            Arc::new(|x: &[f64], o: &mut [f64]| o[0] = x[0]),
        )
        .unwrap()
    }

    #[test]
    fn basic_identity_predictor() {
        let cfg = ControllerConfig::new(Variant::Basic, 2.0, 0.1).unwrap();
        let r = ReferenceSignal::constant(vec![1.0]);
        let s = AugmentedState { x: vec![0.0], u: vec![0.0], t: 0.0 };
        let ud = control_rate(&cfg, &IdentityPredictor, &frozen_plant(), &r, &s).unwrap();
        assert_eq!(ud, vec![2.0]);
    }

    #[test]
    fn full_with_injected_error() {
        let cfg = ControllerConfig::new(Variant::Full, 10.0, 0.1)
            .unwrap()
            .with_constant_e2(vec![0.1]);
        let r = ReferenceSignal::constant(vec![0.5]);
        let s = AugmentedState { x: vec![0.0], u: vec![0.0], t: 0.0 };
        let ud = control_rate(&cfg, &IdentityPredictor, &frozen_plant(), &r, &s).unwrap();
        assert!((ud[0] - 5.1).abs() < 1e-12);
    }

    #[test]
    fn enhanced_vanishes_on_consistent_point() {
        // integrator: ŷ = x + T u, ∂g/∂x·f = u. Choose r(t+T) = ŷ and ṙ = u.
        let (plant, pred) = integrator(0.5);
        let (x, u) = (0.3, 0.8);
        let yhat = x + 0.5 * u;
        let r = ReferenceSignal::new(1, Arc::new(move |t: f64| vec![yhat + u * (t - 0.5)]))
            .with_rate(Arc::new(move |_| vec![u]));
        let cfg = ControllerConfig::new(Variant::Enhanced, 7.0, 0.5).unwrap();
        let s = AugmentedState { x: vec![x], u: vec![u], t: 0.0 };
        let ud = control_rate(&cfg, &pred, &plant, &r, &s).unwrap();
        assert!(ud[0].abs() < 1e-14);
    }

    #[test]
    fn enhanced_requires_rate() {
        let (plant, pred) = integrator(0.5);
        let r = ReferenceSignal::new(1, Arc::new(|t: f64| vec![t]));
        let cfg = ControllerConfig::new(Variant::Full, 1.0, 0.5).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        let e = run_closed_loop(&plant, &pred, &cfg, &r, &[0.0], &[0.0], &grid).unwrap_err();
        assert!(matches!(e, Error::MissingReferenceRate(_)));
    }

    #[test]
    fn integrator_step_by_hand() {
        // x=1, u=0, r ≡ 2, T=0.5, α=4: u̇ = α/T·(2 − 1) = 8; x' = 1, u' = 0.8 after dt=0.1
        let (plant, pred) = integrator(0.5);
        let cfg = ControllerConfig::new(Variant::Basic, 4.0, 0.5).unwrap();
        let r = ReferenceSignal::constant(vec![2.0]);
        let s = AugmentedState { x: vec![1.0], u: vec![0.0], t: 0.0 };
        let n = step_closed_loop(&plant, &pred, &cfg, &r, &s, 0.1).unwrap();
        assert!((n.x[0] - 1.0).abs() < 1e-14);
        assert!((n.u[0] - 0.8).abs() < 1e-12);
        assert!((n.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_dynamics_leave_state() {
        let cfg = ControllerConfig::new(Variant::Basic, 1.0, 0.1).unwrap();
        let r = ReferenceSignal::constant(vec![0.25]);
        let s = AugmentedState { x: vec![3.0], u: vec![0.25], t: 1.0 };
        let n = step_closed_loop(&frozen_plant(), &IdentityPredictor, &cfg, &r, &s, 0.01).unwrap();
        assert_eq!((n.x.clone(), n.u.clone()), (vec![3.0], vec![0.25]));
        assert!((n.t - 1.01).abs() < 1e-15);
    }

    #[test]
    fn singular_jacobian_stops_run_with_partial_trace() {
        // g = u² has ∂g/∂u = 0 at u = 0, reached after the first record
        struct Square;
        impl PredictorModel<f64> for Square {
            fn horizon(&self) -> f64 {
                0.1
            }
            fn state_dim(&self) -> usize {
                1
            }
            fn io_dim(&self) -> usize {
                1
            }
            fn predict(&self, _x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![u[0] * u[0]])
            }
            fn dgdx(&self, _x: &[f64], _u: &[f64]) -> Result<Matrix<f64>> {
                Ok(Matrix::zeros(1, 1))
            }
            fn dgdu(&self, _x: &[f64], u: &[f64]) -> Result<Matrix<f64>> {
                Ok(Matrix::from_rows(&[[2.0 * u[0]]]).unwrap())
            }
        }
        let cfg = ControllerConfig::new(Variant::Basic, 1.0, 0.1).unwrap();
        let r = ReferenceSignal::constant(vec![1.0]);
        let grid = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        let tr = run_closed_loop(&frozen_plant(), &Square, &cfg, &r, &[0.0], &[0.0], &grid).unwrap();
        assert!(tr.is_empty());
        assert!(matches!(tr.failure, Some(Error::SingularJacobian { .. })));
    }

    #[test]
    fn memoryless_examples() {
        let plant = StaticPlant::linear(Matrix::identity(1)).unwrap();
        let cfg = ControllerConfig::memoryless(3.0).unwrap();
        let r = ReferenceSignal::constant(vec![1.0]);
        assert_eq!(memoryless_rate(&cfg, &plant, &r, 0.0, &[0.5]).unwrap(), vec![1.5]);
        let grid = TimeGrid::new(0.0, 5.0, 1e-3).unwrap();
        let tr = run_memoryless(&plant, &cfg, &r, &[0.0], &grid).unwrap();
        assert!(tr.is_success());
        let (eta1, track) = asymptotic_errors(&tr).unwrap();
        assert_eq!(eta1, 0.0);
        assert!(track < 1e-5);
    }

    #[test]
    fn variant_parse_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("fast".parse::<Variant>().is_err());
    }
}
