//! Plants, reference signals, time grids and the augmented closed-loop state.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{all_finite, norm2, Real};

/// In-place dynamics `out ← f(x, u)`.
pub type DynamicsFn<T> = Arc<dyn Fn(&[T], &[T], &mut [T]) + Send + Sync>;
/// In-place output map `out ← h(x)`.
pub type OutputFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;
/// Time signal `t ↦ value`.
pub type SignalFn<T> = Arc<dyn Fn(T) -> Vec<T> + Send + Sync>;
pub type StaticMapFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
pub type StaticJacobianFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;

/// Uniform simulation grid `t0, t0 + dt, …, t0 + N·dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    t0: T,
    tf: T,
    dt: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t0: T, tf: T, dt: T) -> Result<Self> {
        if !(t0.is_finite() && tf.is_finite() && dt.is_finite()) {
            return Err(Error::InvalidInput("time grid values must be finite".into()));
        }
        if dt <= T::zero() {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        if tf <= t0 {
            return Err(Error::InvalidInput(format!("tf ({tf}) must exceed t0 ({t0})")));
        }
        let steps = ((tf - t0) / dt).round().to_usize().unwrap_or(0);
        if steps < 1 {
            return Err(Error::InvalidInput("time grid has no steps".into()));
        }
        Ok(Self { t0, tf, dt, steps })
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn tf(&self) -> T {
        self.tf
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Number of Euler steps; the grid holds `steps + 1` instants.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + T::lit(k as f64) * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..=self.steps).map(move |k| self.time(k))
    }
}

/// Continuous-time plant `ẋ = f(x, u)`, `y = h(x)` with `x ∈ Rⁿ`, `u, y ∈ Rᵐ`.
#[derive(Clone)]
pub struct PlantModel<T> {
    n: usize,
    m: usize,
    f: DynamicsFn<T>,
    h: OutputFn<T>,
}

impl<T: Real> PlantModel<T> {
    pub fn new(n: usize, m: usize, f: DynamicsFn<T>, h: OutputFn<T>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("plant dimensions must be positive".into()));
        }
        Ok(Self { n, m, f, h })
    }

    /// Linear time-invariant plant `ẋ = Ax + Bu`, `y = Cx`.
    pub fn linear(a: &Matrix<T>, b: &Matrix<T>, c: &Matrix<T>) -> Result<Self> {
        let n = a.rows();
        let m = b.cols();
        if !a.is_square() || b.rows() != n || c.rows() != m || c.cols() != n {
            return Err(Error::InvalidInput(format!(
                "inconsistent LTI dimensions: A {}x{}, B {}x{}, C {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols()
            )));
        }
        let (a, b, c) = (a.clone(), b.clone(), c.clone());
        let f: DynamicsFn<T> = Arc::new(move |x, u, out| {
            for (i, o) in out.iter_mut().enumerate() {
                let ax: T = a.row(i).iter().zip(x).map(|(&p, &q)| p * q).sum();
                let bu: T = b.row(i).iter().zip(u).map(|(&p, &q)| p * q).sum();
                *o = ax + bu;
            }
        });
        let h: OutputFn<T> = Arc::new(move |x, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = c.row(i).iter().zip(x).map(|(&p, &q)| p * q).sum();
            }
        });
        Self::new(n, m, f, h)
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn io_dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn dynamics_into(&self, x: &[T], u: &[T], out: &mut [T]) {
        (self.f)(x, u, out)
    }

    pub fn dynamics(&self, x: &[T], u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        (self.f)(x, u, &mut out);
        out
    }

    pub fn output(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.m];
        (self.h)(x, &mut out);
        out
    }

    /// Rate of change of the output along the dynamics, by a symmetric
    /// difference of `h` along `f`.
    pub fn output_rate(&self, x: &[T], u: &[T]) -> Vec<T> {
        let f = self.dynamics(x, u);
        let scale = T::one().max(norm2(x));
        let eps = T::lit(1e-6) * scale / T::one().max(norm2(&f));
        let xp: Vec<T> = x.iter().zip(&f).map(|(&a, &b)| a + eps * b).collect();
        let xm: Vec<T> = x.iter().zip(&f).map(|(&a, &b)| a - eps * b).collect();
        let yp = self.output(&xp);
        let ym = self.output(&xm);
        yp.iter()
            .zip(&ym)
            .map(|(&p, &m)| (p - m) / (eps + eps))
            .collect()
    }

    /// Evaluates `f` and `h` at one point and checks output sizes and finiteness.
    pub fn probe(&self, x: &[T], u: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "plant state",
                expected: self.n,
                got: x.len(),
            });
        }
        if u.len() != self.m {
            return Err(Error::DimensionMismatch {
                context: "plant input",
                expected: self.m,
                got: u.len(),
            });
        }
        let dx = self.dynamics(x, u);
        let y = self.output(x);
        if !all_finite(&dx) || !all_finite(&y) {
            return Err(Error::Overflow {
                t: f64::NAN,
                context: "plant probe".into(),
            });
        }
        Ok(())
    }
}

impl<T> fmt::Debug for PlantModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantModel")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

/// Memoryless plant `y = g(u)` with `u, y ∈ Rᵐ`.
#[derive(Clone)]
pub struct StaticPlant<T> {
    m: usize,
    g: StaticMapFn<T>,
    jacobian: Option<StaticJacobianFn<T>>,
}

impl<T: Real> StaticPlant<T> {
    pub fn new(m: usize, g: StaticMapFn<T>, jacobian: Option<StaticJacobianFn<T>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("static plant dimension must be positive".into()));
        }
        Ok(Self { m, g, jacobian })
    }

    /// `y = K·u` for a square gain matrix.
    pub fn linear(k: Matrix<T>) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::InvalidInput("static gain must be square".into()));
        }
        let m = k.rows();
        let kk = k.clone();
        Self::new(
            m,
            Arc::new(move |u| kk.mul_vec(u)),
            Some(Arc::new(move |_| k.clone())),
        )
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn eval(&self, u: &[T]) -> Vec<T> {
        (self.g)(u)
    }

    /// Analytic Jacobian when supplied, otherwise central differences.
    pub fn jacobian(&self, u: &[T]) -> Result<Matrix<T>> {
        if let Some(j) = &self.jacobian {
            return Ok(j(u));
        }
        let empty: [T; 0] = [];
        crate::predict::fd_jacobian(
            |_x: &[T], u: &[T]| Ok((self.g)(u)),
            &empty,
            u,
            crate::predict::Axis::Input,
            T::lit(crate::predict::DEFAULT_FD_STEP),
        )
    }
}

impl<T> fmt::Debug for StaticPlant<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StaticPlant").field("m", &self.m).finish_non_exhaustive()
    }
}

/// Reference `r(t)` with optional analytic derivative and rate bound `η`.
#[derive(Clone)]
pub struct ReferenceSignal<T> {
    m: usize,
    r: SignalFn<T>,
    rdot: Option<SignalFn<T>>,
    eta: Option<T>,
    domain: (T, T),
}

impl<T: Real> ReferenceSignal<T> {
    /// Reference defined on all of R.
    pub fn new(m: usize, r: SignalFn<T>) -> Self {
        Self {
            m,
            r,
            rdot: None,
            eta: None,
            domain: (T::neg_infinity(), T::infinity()),
        }
    }

    pub fn with_rate(mut self, rdot: SignalFn<T>) -> Self {
        self.rdot = Some(rdot);
        self
    }

    pub fn with_eta(mut self, eta: T) -> Result<Self> {
        if !(eta >= T::zero()) {
            return Err(Error::InvalidInput("eta must be nonnegative".into()));
        }
        self.eta = Some(eta);
        Ok(self)
    }

    pub fn with_domain(mut self, lo: T, hi: T) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidInput("reference domain must be nonempty".into()));
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    /// Constant reference.
    pub fn constant(value: Vec<T>) -> Self {
        let m = value.len();
        let zero = vec![T::zero(); m];
        let v = value.clone();
        Self::new(m, Arc::new(move |_| v.clone()))
            .with_rate(Arc::new(move |_| zero.clone()))
            .with_eta(T::zero())
            .expect("zero eta")
    }

    /// Componentwise `offset + amplitude·sin(ω·t + phase)`, with analytic
    /// derivative and `η = ‖(amplitude·ω)‖`.
    pub fn sinusoid(offset: Vec<T>, amplitude: Vec<T>, omega: Vec<T>, phase: Vec<T>) -> Result<Self> {
        let m = offset.len();
        if amplitude.len() != m || omega.len() != m || phase.len() != m || m == 0 {
            return Err(Error::InvalidInput("sinusoid parameter lengths differ".into()));
        }
        let (o1, a1, w1, p1) = (offset, amplitude.clone(), omega.clone(), phase.clone());
        let r: SignalFn<T> = Arc::new(move |t| {
            (0..m).map(|i| o1[i] + a1[i] * (w1[i] * t + p1[i]).sin()).collect()
        });
        let (a2, w2, p2) = (amplitude.clone(), omega.clone(), phase);
        let rdot: SignalFn<T> = Arc::new(move |t| {
            (0..m).map(|i| a2[i] * w2[i] * (w2[i] * t + p2[i]).cos()).collect()
        });
        // sup‖ṙ‖ is attained when all components peak together only if the phases agree;
        // the Euclidean norm of the per-component peaks is always an upper bound.
        let eta = amplitude
            .iter()
            .zip(&omega)
            .map(|(&a, &w)| (a * w) * (a * w))
            .sum::<T>()
            .sqrt();
        Self::new(m, r).with_rate(rdot).with_eta(eta)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> (T, T) {
        self.domain
    }

    pub fn eta(&self) -> Option<T> {
        self.eta
    }

    pub fn has_rate(&self) -> bool {
        self.rdot.is_some()
    }

    fn check_domain(&self, t: T) -> Result<()> {
        let (lo, hi) = self.domain;
        // grid arithmetic may overshoot the end point by a few ulps
        let slack = T::lit(1e-9) * T::one().max(hi.abs());
        if t.is_nan() || t < lo - slack || t > hi + slack {
            return Err(Error::OutOfRange {
                t: t.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `r(t + lookahead)`.
    pub fn eval(&self, t: T, lookahead: T) -> Result<Vec<T>> {
        let s = t + lookahead;
        self.check_domain(s)?;
        Ok((self.r)(s))
    }

    /// `ṙ(t + lookahead)`; `Ok(None)` when no derivative was supplied.
    pub fn eval_rate(&self, t: T, lookahead: T) -> Result<Option<Vec<T>>> {
        let s = t + lookahead;
        self.check_domain(s)?;
        Ok(self.rdot.as_ref().map(|d| d(s)))
    }

    /// Checks the supplied derivative against central differences of `r` at
    /// the given sample times; relative tolerance on the derivative norm.
    pub fn check_rate_consistency(&self, times: &[T], rel_tol: T) -> Result<bool> {
        let Some(rdot) = &self.rdot else {
            return Ok(true);
        };
        for &t in times {
            self.check_domain(t)?;
            let h = T::lit(1e-5) * T::one().max(t.abs());
            let fd: Vec<T> = (self.r)(t + h)
                .iter()
                .zip((self.r)(t - h))
                .map(|(&p, m)| (p - m) / (h + h))
                .collect();
            let an = rdot(t);
            let err = norm2(&crate::scalar::sub(&fd, &an));
            if err > rel_tol * T::one().max(norm2(&an)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `max ‖ṙ‖` sampled over the grid; the stored `η` when no derivative is known
    /// falls back to finite differences of `r` between grid points.
    pub fn estimate_eta(&self, grid: &TimeGrid<T>) -> T {
        let mut best = T::zero();
        let mut prev: Option<(T, Vec<T>)> = None;
        for t in grid.times() {
            match &self.rdot {
                Some(d) => best = best.max(norm2(&d(t))),
                None => {
                    let r = (self.r)(t);
                    if let Some((tp, rp)) = &prev {
                        let v: Vec<T> = r.iter().zip(rp).map(|(&a, &b)| (a - b) / (t - *tp)).collect();
                        best = best.max(norm2(&v));
                    }
                    prev = Some((t, r));
                }
            }
        }
        best
    }
}

impl<T> fmt::Debug for ReferenceSignal<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReferenceSignal")
            .field("m", &self.m)
            .field("has_rate", &self.rdot.is_some())
            .field("eta", &self.eta)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Closed-loop state `z = (x, u)` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedState<T> {
    pub x: Vec<T>,
    pub u: Vec<T>,
    pub t: T,
}

impl<T: Real> AugmentedState<T> {
    pub fn new(plant: &PlantModel<T>, x: Vec<T>, u: Vec<T>, t: T) -> Result<Self> {
        if x.len() != plant.state_dim() {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: plant.state_dim(),
                got: x.len(),
            });
        }
        if u.len() != plant.io_dim() {
            return Err(Error::DimensionMismatch {
                context: "initial input",
                expected: plant.io_dim(),
                got: u.len(),
            });
        }
        Ok(Self { x, u, t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_step_count() {
        let g = TimeGrid::<f64>::new(0.0, 25.0, 0.01).unwrap();
        assert_eq!(g.steps(), 2500);
        assert!((g.time(2500) - 25.0).abs() < 1e-12);
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn eval_reference_examples() {
        let sin = ReferenceSignal::sinusoid(vec![0.0], vec![1.0], vec![1.0], vec![0.0]).unwrap();
        assert_eq!(sin.eval(0.0, 0.0).unwrap(), vec![0.0]);

        let pend = ReferenceSignal::sinusoid(vec![-PI / 6.0], vec![PI / 3.0], vec![1.0], vec![0.0]).unwrap();
        assert!((pend.eval(0.0, 0.0).unwrap()[0] + 0.5236).abs() < 1e-4);

        let ellipse = ReferenceSignal::sinusoid(
            vec![0.0, 0.0],
            vec![1.1, 0.7],
            vec![0.06, 0.06],
            vec![0.0, PI / 2.0],
        )
        .unwrap();
        let r = ellipse.eval(0.0, 0.0).unwrap();
        assert!(r[0].abs() < 1e-15 && (r[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn reference_domain_is_enforced() {
        let r = ReferenceSignal::constant(vec![1.0]).with_domain(0.0, 10.0).unwrap();
        assert!(r.eval(9.5, 0.5).is_ok());
        assert!(matches!(r.eval(9.5, 1.0), Err(Error::OutOfRange { .. })));
        assert!(r.eval(-1.0, 0.0).is_err());
    }

    #[test]
    fn rate_consistency_and_eta() {
        let r = ReferenceSignal::sinusoid(vec![0.0], vec![2.0], vec![3.0], vec![0.1]).unwrap();
        let times: Vec<f64> = (0..10).map(|k| 0.37 * k as f64).collect();
        assert!(r.check_rate_consistency(&times, 1e-4).unwrap());
        let grid = TimeGrid::new(0.0, 10.0, 1e-3).unwrap();
        let est = r.estimate_eta(&grid);
        assert!(est <= r.eta().unwrap() + 1e-12 && est > 5.99);

        let wrong = ReferenceSignal::new(1, Arc::new(|t: f64| vec![t * t]))
            .with_rate(Arc::new(|t: f64| vec![t]));
        assert!(!wrong.check_rate_consistency(&times, 1e-4).unwrap());
    }

    #[test]
    fn linear_plant_and_output_rate() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [-2.0, -3.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.0], [1.0]]).unwrap();
        let c = Matrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let p: PlantModel<f64> = PlantModel::linear(&a, &b, &c).unwrap();
        assert_eq!(p.dynamics(&[1.0, 2.0], &[0.5]), vec![2.0, -7.5]);
        assert_eq!(p.output(&[1.0, 2.0]), vec![1.0]);
        let yd = p.output_rate(&[1.0, 2.0], &[0.5]);
        assert!((yd[0] - 2.0).abs() < 1e-8);
        assert!(p.probe(&[1.0], &[0.0]).is_err());
        assert!(PlantModel::linear(&a, &b, &Matrix::from_rows(&[[1.0]]).unwrap()).is_err());
    }

    #[test]
    fn static_plant_fd_jacobian_fallback() {
        let sq = StaticPlant::new(1, Arc::new(|u: &[f64]| vec![u[0] * u[0]]), None).unwrap();
        let j = sq.jacobian(&[3.0]).unwrap();
        assert!((j[(0, 0)] - 6.0).abs() < 1e-6);
    }
}
