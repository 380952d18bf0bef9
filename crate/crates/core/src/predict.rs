//! Output predictors `ŷ(t+T) = g(x(t), u(t))` and their Jacobians.

use crate::error::{Error, Result};
use crate::integrate::{expm, expm_integral, integrate_const_input_with, Scheme};
use crate::linalg::Matrix;
use crate::model::PlantModel;
use crate::scalar::{all_finite, to_f64_vec, Real};

/// Relative finite-difference step: coordinate `j` moves by `step·max(1, |v_j|)`.
pub const DEFAULT_FD_STEP: f64 = 1e-6;
/// Default `|ω|` below which the unicycle predictor uses its straight-line limit.
pub const DEFAULT_OMEGA_EPS: f64 = 1e-9;
/// Reciprocal condition number under which `∂g/∂u` counts as singular.
pub const DEFAULT_SINGULARITY_TOL: f64 = 1e-10;

/// Which argument of `g(x, u)` a Jacobian differentiates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    State,
    Input,
}

/// Value and partial derivatives of `g` at one point.
#[derive(Clone, Debug)]
pub struct Linearization<T> {
    pub g: Vec<T>,
    pub dgdx: Option<Matrix<T>>,
    pub dgdu: Matrix<T>,
}

/// `ŷ(t+T) = g(x, u)` for a fixed horizon `T`.
pub trait PredictorModel<T: Real>: Send + Sync {
    fn horizon(&self) -> T;
    fn state_dim(&self) -> usize;
    fn io_dim(&self) -> usize;
    fn predict(&self, x: &[T], u: &[T]) -> Result<Vec<T>>;
    fn dgdx(&self, x: &[T], u: &[T]) -> Result<Matrix<T>>;
    fn dgdu(&self, x: &[T], u: &[T]) -> Result<Matrix<T>>;

    /// `g` and `∂g/∂u`, plus `∂g/∂x` when `with_dgdx` is set.
    fn linearize(&self, x: &[T], u: &[T], with_dgdx: bool) -> Result<Linearization<T>> {
        Ok(Linearization {
            g: self.predict(x, u)?,
            dgdx: if with_dgdx { Some(self.dgdx(x, u)?) } else { None },
            dgdu: self.dgdu(x, u)?,
        })
    }
}

fn check_dims<T: Real, P: PredictorModel<T> + ?Sized>(p: &P, x: &[T], u: &[T]) -> Result<()> {
    if x.len() != p.state_dim() {
        return Err(Error::DimensionMismatch {
            context: "predictor state",
            expected: p.state_dim(),
            got: x.len(),
        });
    }
    if u.len() != p.io_dim() {
        return Err(Error::DimensionMismatch {
            context: "predictor input",
            expected: p.io_dim(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Central-difference Jacobian of `g(x, u)` along `axis`. Column `j` uses the
/// perturbation `h_j = step·max(1, |v_j|)` of the chosen argument `v`.
pub fn fd_jacobian<T, G>(g: G, x: &[T], u: &[T], axis: Axis, step: T) -> Result<Matrix<T>>
where
    T: Real,
    G: Fn(&[T], &[T]) -> Result<Vec<T>>,
{
    if !(step > T::zero()) {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let base = match axis {
        Axis::State => x,
        Axis::Input => u,
    };
    let cols = base.len();
    if cols == 0 {
        return Err(Error::InvalidInput("cannot differentiate along an empty argument".into()));
    }
    let mut v = base.to_vec();
    let mut data: Vec<Vec<T>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let h = step * T::one().max(base[j].abs());
        v[j] = base[j] + h;
        let plus = match axis {
            Axis::State => g(&v, u),
            Axis::Input => g(x, &v),
        };
        v[j] = base[j] - h;
        let minus = match axis {
            Axis::State => g(&v, u),
            Axis::Input => g(x, &v),
        };
        v[j] = base[j];
        let (plus, minus) = (tag_fd(plus, j)?, tag_fd(minus, j)?);
        if !all_finite(&plus) || !all_finite(&minus) {
            return Err(Error::Overflow {
                t: f64::NAN,
                context: format!("finite difference, perturbed coordinate {j}"),
            });
        }
        data.push(plus.iter().zip(&minus).map(|(&p, &m)| (p - m) / (h + h)).collect());
    }
    let rows = data[0].len();
    let mut jac = Matrix::zeros(rows, cols);
    for (j, col) in data.iter().enumerate() {
        for (i, &c) in col.iter().enumerate() {
            jac[(i, j)] = c;
        }
    }
    Ok(jac)
}

fn tag_fd<T>(r: Result<Vec<T>>, j: usize) -> Result<Vec<T>> {
    r.map_err(|e| match e {
        Error::Overflow { t, context } => Error::Overflow {
            t,
            context: format!("{context} (finite difference, perturbed coordinate {j})"),
        },
        e => e,
    })
}

/// Freezes the input over `[t, t+T]`, integrates the plant with `inner_steps`
/// fixed steps and reads the output; Jacobians by central differences.
#[derive(Clone, Debug)]
pub struct NumericPredictor<T> {
    plant: PlantModel<T>,
    horizon: T,
    inner_steps: usize,
    scheme: Scheme,
    fd_step: T,
}

impl<T: Real> NumericPredictor<T> {
    pub fn new(plant: PlantModel<T>, horizon: T, inner_steps: usize) -> Result<Self> {
        if !(horizon > T::zero()) {
            return Err(Error::InvalidInput("prediction horizon must be positive".into()));
        }
        if inner_steps == 0 {
            return Err(Error::InvalidInput("predictor needs at least one inner step".into()));
        }
        Ok(Self {
            plant,
            horizon,
            inner_steps,
            scheme: Scheme::Euler,
            fd_step: T::lit(DEFAULT_FD_STEP),
        })
    }

    /// Inner step `T/100`.
    pub fn with_default_steps(plant: PlantModel<T>, horizon: T) -> Result<Self> {
        Self::new(plant, horizon, 100)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_fd_step(mut self, step: T) -> Result<Self> {
        if !(step > T::zero()) {
            return Err(Error::InvalidInput("finite-difference step must be positive".into()));
        }
        self.fd_step = step;
        Ok(self)
    }

    pub fn plant(&self) -> &PlantModel<T> {
        &self.plant
    }

    pub fn inner_steps(&self) -> usize {
        self.inner_steps
    }

    fn raw(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        let f = |x: &[T], u: &[T], out: &mut [T]| self.plant.dynamics_into(x, u, out);
        let xi = integrate_const_input_with(self.scheme, &f, x, u, self.horizon, self.inner_steps)
            .map_err(|e| match e {
                Error::Overflow { t, .. } => Error::Overflow {
                    t,
                    context: format!(
                        "prediction from x = {:?}, u = {:?}",
                        to_f64_vec(x),
                        to_f64_vec(u)
                    ),
                },
                e => e,
            })?;
        let y = self.plant.output(&xi);
        if !all_finite(&y) {
            return Err(Error::Overflow {
                t: f64::NAN,
                context: "predicted output".into(),
            });
        }
        Ok(y)
    }
}

impl<T: Real> PredictorModel<T> for NumericPredictor<T> {
    fn horizon(&self) -> T {
        self.horizon
    }

    fn state_dim(&self) -> usize {
        self.plant.state_dim()
    }

    fn io_dim(&self) -> usize {
        self.plant.io_dim()
    }

    fn predict(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        check_dims(self, x, u)?;
        self.raw(x, u)
    }

    fn dgdx(&self, x: &[T], u: &[T]) -> Result<Matrix<T>> {
        check_dims(self, x, u)?;
        fd_jacobian(|x, u| self.raw(x, u), x, u, Axis::State, self.fd_step)
    }

    fn dgdu(&self, x: &[T], u: &[T]) -> Result<Matrix<T>> {
        check_dims(self, x, u)?;
        fd_jacobian(|x, u| self.raw(x, u), x, u, Axis::Input, self.fd_step)
    }
}

/// Closed-form predictor of `ẋ = Ax + Bu`, `y = Cx`:
/// `g(x, u) = C·e^{AT}·x + C·(∫₀ᵀ e^{As} ds)·B·u`.
#[derive(Clone, Debug)]
pub struct LtiPredictor<T> {
    a: Matrix<T>,
    b: Matrix<T>,
    c: Matrix<T>,
    horizon: T,
    gx: Matrix<T>,
    gu: Matrix<T>,
}

impl<T: Real> LtiPredictor<T> {
    /// Fails when `C·∫e^{As}ds·B` is singular (reciprocal condition below 1e−10).
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, horizon: T) -> Result<Self> {
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
        if !(horizon > T::zero()) {
            return Err(Error::InvalidInput("prediction horizon must be positive".into()));
        }
        let gx = &c * &expm(&a.scale(horizon))?;
        let gu = &(&c * &expm_integral(&a, horizon)?) * &b;
        let rcond = gu.rcond()?;
        if rcond < T::lit(DEFAULT_SINGULARITY_TOL) {
            return Err(Error::SingularPredictor {
                rcond: rcond.to_f64_lossy(),
            });
        }
        Ok(Self { a, b, c, horizon, gx, gu })
    }

    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn c(&self) -> &Matrix<T> {
        &self.c
    }

    /// `C·e^{AT}`.
    pub fn gain_x(&self) -> &Matrix<T> {
        &self.gx
    }

    /// `C·∫₀ᵀe^{As}ds·B`.
    pub fn gain_u(&self) -> &Matrix<T> {
        &self.gu
    }
}

impl<T: Real> PredictorModel<T> for LtiPredictor<T> {
    fn horizon(&self) -> T {
        self.horizon
    }

    fn state_dim(&self) -> usize {
        self.a.rows()
    }

    fn io_dim(&self) -> usize {
        self.b.cols()
    }

    fn predict(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        check_dims(self, x, u)?;
        let gx = self.gx.mul_vec(x);
        let gu = self.gu.mul_vec(u);
        Ok(gx.iter().zip(&gu).map(|(&p, &q)| p + q).collect())
    }

    fn dgdx(&self, x: &[T], u: &[T]) -> Result<Matrix<T>> {
        check_dims(self, x, u)?;
        Ok(self.gx.clone())
    }

    fn dgdu(&self, x: &[T], u: &[T]) -> Result<Matrix<T>> {
        check_dims(self, x, u)?;
        Ok(self.gu.clone())
    }
}

/// Closed-form predictor of the unicycle `ż = v(cos ψ, sin ψ)`, `ψ̇ = ω`, `y = z`.
///
/// With the input frozen the robot moves on a circular arc; the chord is written as
/// `v·S(ω)·(cos φ, sin φ)` with `S(ω) = 2 sin(ωT/2)/ω`, `φ = ψ + ωT/2`, which has no
/// cancellation as `ω → 0`. Below `omega_eps` the straight-line limit is used.
#[derive(Clone, Copy, Debug)]
pub struct UnicyclePredictor<T> {
    horizon: T,
    omega_eps: T,
}

impl<T: Real> UnicyclePredictor<T> {
    pub fn new(horizon: T, omega_eps: T) -> Result<Self> {
        if !(horizon > T::zero()) {
            return Err(Error::InvalidInput("prediction horizon must be positive".into()));
        }
        if !(omega_eps > T::zero()) {
            return Err(Error::InvalidInput("omega_eps must be positive".into()));
        }
        Ok(Self { horizon, omega_eps })
    }

    pub fn with_default_eps(horizon: T) -> Result<Self> {
        Self::new(horizon, T::lit(DEFAULT_OMEGA_EPS))
    }

    pub fn omega_eps(&self) -> T {
        self.omega_eps
    }

    /// `(S(ω), S'(ω))`.
    fn chord(&self, w: T) -> (T, T) {
        let t = self.horizon;
        let wt = w * t;
        if wt.abs() < T::lit(1e-2) {
            let t3 = t * t * t;
            let t5 = t3 * t * t;
            let s = t - w * w * t3 / T::lit(24.0) + w * w * w * w * t5 / T::lit(1920.0);
            let ds = -w * t3 / T::lit(12.0) + w * w * w * t5 / T::lit(480.0);
            (s, ds)
        } else {
            let half = wt * T::lit(0.5);
            let s = T::lit(2.0) * half.sin() / w;
            let ds = (wt * half.cos() - T::lit(2.0) * half.sin()) / (w * w);
            (s, ds)
        }
    }

    fn straight(&self, w: T) -> bool {
        w.abs() < self.omega_eps
    }
}

impl<T: Real> PredictorModel<T> for UnicyclePredictor<T> {
    fn horizon(&self) -> T {
        self.horizon
    }

    fn state_dim(&self) -> usize {
        3
    }

    fn io_dim(&self) -> usize {
        2
    }

    fn predict(&self, x: &[T], u: &[T]) -> Result<Vec<T>> {
        check_dims(self, x, u)?;
        let (psi, v, w) = (x[2], u[0], u[1]);
        if self.straight(w) {
            let vt = v * self.horizon;
            return Ok(vec![x[0] + vt * psi.cos(), x[1] + vt * psi.sin()]);
        }
        let (s, _) = self.chord(w);
        let phi = psi + w * self.horizon * T::lit(0.5);
        Ok(vec![x[0] + v * s * phi.cos(), x[1] + v * s * phi.sin()])
    }

    fn dgdx(&self, x: &[T], u: &[T]) -> Result<Matrix<T>> {
        check_dims(self, x, u)?;
        let (psi, v, w) = (x[2], u[0], u[1]);
        let (s, phi) = if self.straight(w) {
            (self.horizon, psi)
        } else {
            (self.chord(w).0, psi + w * self.horizon * T::lit(0.5))
        };
        let mut j = Matrix::zeros(2, 3);
        j[(0, 0)] = T::one();
        j[(1, 1)] = T::one();
        j[(0, 2)] = -v * s * phi.sin();
        j[(1, 2)] = v * s * phi.cos();
        Ok(j)
    }

    fn dgdu(&self, x: &[T], u: &[T]) -> Result<Matrix<T>> {
        check_dims(self, x, u)?;
        let (psi, v, w) = (x[2], u[0], u[1]);
        let t = self.horizon;
        let mut j = Matrix::zeros(2, 2);
        if self.straight(w) {
            let half = v * t * t * T::lit(0.5);
            j[(0, 0)] = t * psi.cos();
            j[(1, 0)] = t * psi.sin();
            j[(0, 1)] = -half * psi.sin();
            j[(1, 1)] = half * psi.cos();
            return Ok(j);
        }
        let (s, ds) = self.chord(w);
        let phi = psi + w * t * T::lit(0.5);
        let (sp, cp) = phi.sin_cos();
        let ht = t * T::lit(0.5);
        j[(0, 0)] = s * cp;
        j[(1, 0)] = s * sp;
        j[(0, 1)] = v * (ds * cp - s * ht * sp);
        j[(1, 1)] = v * (ds * sp + s * ht * cp);
        Ok(j)
    }
}
