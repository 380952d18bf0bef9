//! Fixed-step one-step integrators and the matrix exponential.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{all_finite, Real};

/// One-step method used for plant and predictor integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    /// Forward Euler, the canonical choice.
    #[default]
    Euler,
    /// Classical fourth-order Runge-Kutta.
    Rk4,
}

impl Scheme {
    /// Advances `x` in place by one step of size `dt` with the input held at `u`.
    /// `t` only labels the error on overflow.
    pub fn step<T, F>(self, f: &F, t: T, x: &mut [T], u: &[T], dt: T, work: &mut Work<T>) -> Result<()>
    where
        T: Real,
        F: Fn(&[T], &[T], &mut [T]) + ?Sized,
    {
        let n = x.len();
        work.ensure(n);
        match self {
            Scheme::Euler => {
                f(x, u, &mut work.k1);
                for i in 0..n {
                    x[i] += dt * work.k1[i];
                }
            }
            Scheme::Rk4 => {
                let half = dt * T::lit(0.5);
                f(x, u, &mut work.k1);
                for i in 0..n {
                    work.tmp[i] = x[i] + half * work.k1[i];
                }
                f(&work.tmp, u, &mut work.k2);
                for i in 0..n {
                    work.tmp[i] = x[i] + half * work.k2[i];
                }
                f(&work.tmp, u, &mut work.k3);
                for i in 0..n {
                    work.tmp[i] = x[i] + dt * work.k3[i];
                }
                f(&work.tmp, u, &mut work.k4);
                let sixth = dt / T::lit(6.0);
                for i in 0..n {
                    x[i] += sixth * (work.k1[i] + T::lit(2.0) * (work.k2[i] + work.k3[i]) + work.k4[i]);
                }
            }
        }
        if !all_finite(x) {
            return Err(Error::Overflow {
                t: (t + dt).to_f64_lossy(),
                context: "integration step".into(),
            });
        }
        Ok(())
    }
}

/// Scratch buffers reused across steps.
#[derive(Clone, Debug, Default)]
pub struct Work<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> Work<T> {
    fn ensure(&mut self, n: usize) {
        if self.k1.len() != n {
            for v in [&mut self.k1, &mut self.k2, &mut self.k3, &mut self.k4, &mut self.tmp] {
                v.clear();
                v.resize(n, T::zero());
            }
        }
    }
}

fn check_dt<T: Real>(dt: T) -> Result<()> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {dt}")));
    }
    Ok(())
}

/// `x + dt·f(x, u)`.
pub fn euler_step<T, F>(f: &F, t: T, x: &[T], u: &[T], dt: T) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T], &[T], &mut [T]) + ?Sized,
{
    check_dt(dt)?;
    let mut out = x.to_vec();
    Scheme::Euler.step(f, t, &mut out, u, dt, &mut Work::default())?;
    Ok(out)
}

/// One classical Runge-Kutta step with the input frozen.
pub fn rk4_step<T, F>(f: &F, t: T, x: &[T], u: &[T], dt: T) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T], &[T], &mut [T]) + ?Sized,
{
    check_dt(dt)?;
    let mut out = x.to_vec();
    Scheme::Rk4.step(f, t, &mut out, u, dt, &mut Work::default())?;
    Ok(out)
}

/// State after `span` seconds under the constant input `u`, using `steps` Euler steps.
pub fn integrate_const_input<T, F>(f: &F, x0: &[T], u: &[T], span: T, steps: usize) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T], &[T], &mut [T]) + ?Sized,
{
    integrate_const_input_with(Scheme::Euler, f, x0, u, span, steps)
}

pub fn integrate_const_input_with<T, F>(
    scheme: Scheme,
    f: &F,
    x0: &[T],
    u: &[T],
    span: T,
    steps: usize,
) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T], &[T], &mut [T]) + ?Sized,
{
    if steps == 0 {
        return Err(Error::InvalidInput("integration needs at least one step".into()));
    }
    check_dt(span)?;
    let dt = span / T::lit(steps as f64);
    let mut x = x0.to_vec();
    let mut work = Work::default();
    for k in 0..steps {
        scheme.step(f, T::lit(k as f64) * dt, &mut x, u, dt, &mut work)?;
    }
    Ok(x)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 diagonal Padé approximant.
pub fn expm<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::InvalidInput("expm needs a square matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("expm input has non-finite entries".into()));
    }
    let n = m.rows();
    let norm = m.norm_one().to_f64_lossy();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = m.scale(T::lit(0.5f64.powi(s)));
    let b: Vec<T> = PADE13.iter().map(|&c| T::lit(c)).collect();
    let id = Matrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &(&a6.scale(b[13]) + &a4.scale(b[11])) + &a2.scale(b[9]);
    let u_poly = &(&(&(&(&a6 * &inner_u) + &a6.scale(b[7])) + &a4.scale(b[5])) + &a2.scale(b[3]))
        + &id.scale(b[1]);
    let u = &a * &u_poly;
    let inner_v = &(&a6.scale(b[12]) + &a4.scale(b[10])) + &a2.scale(b[8]);
    let v = &(&(&(&(&a6 * &inner_v) + &a6.scale(b[6])) + &a4.scale(b[4])) + &a2.scale(b[2]))
        + &id.scale(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.lu()?;
    let mut r = Matrix::zeros(n, n);
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = p[(i, j)];
        }
        let x = lu.solve(&col)?;
        for i in 0..n {
            r[(i, j)] = x[i];
        }
    }
    for _ in 0..s {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::Overflow {
            t: f64::NAN,
            context: "matrix exponential".into(),
        });
    }
    Ok(r)
}

/// `∫₀ᵀ e^{As} ds`, read off the top-right block of `exp([[A, I], [0, 0]]·T)`.
/// Well defined for singular `A`.
pub fn expm_integral<T: Real>(a: &Matrix<T>, t: T) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("expm_integral needs a square matrix".into()));
    }
    check_dt(t)?;
    let n = a.rows();
    let mut big = Matrix::zeros(2 * n, 2 * n);
    big.set_block(0, 0, &a.scale(t));
    big.set_block(0, n, &Matrix::identity(n).scale(t));
    Ok(expm(&big)?.block(0, n, n, n))
}
