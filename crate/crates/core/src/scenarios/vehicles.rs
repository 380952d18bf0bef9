//! Bicycle (slip-aware, six states) and unicycle (kinematic, three states) vehicles.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::PlantModel;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BicycleParams<T> {
    /// kg.
    pub mass: T,
    /// Front axle to centre of mass, m.
    pub lf: T,
    /// Rear axle to centre of mass, m.
    pub lr: T,
    /// Yaw moment of inertia, kg·m².
    pub iz: T,
    /// Front cornering stiffness, N/rad.
    pub caf: T,
    /// Rear cornering stiffness, N/rad.
    pub car: T,
    /// Lower clamp on the longitudinal speed inside the slip-angle arctangents, m/s.
    pub v_floor: T,
}

impl<T: Real> Default for BicycleParams<T> {
    fn default() -> Self {
        Self {
            mass: T::lit(1700.0),
            lf: T::lit(1.5),
            lr: T::lit(1.5),
            iz: T::lit(2500.0),
            caf: T::lit(29963.5),
            car: T::lit(29963.5),
            v_floor: T::lit(0.1),
        }
    }
}

impl<T: Real> BicycleParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("lf", self.lf),
            ("lr", self.lr),
            ("iz", self.iz),
            ("caf", self.caf),
            ("car", self.car),
            ("v_floor", self.v_floor),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("bicycle {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Front and rear lateral tyre forces `(F_cf, F_cr)` at state
    /// `(z₁, z₂, v_ℓ, v_n, ψ, ψ̇)` and steering angle `δ_f`.
    pub fn lateral_forces(&self, x: &[T], delta: T) -> (T, T) {
        let vl = x[2].max(self.v_floor);
        let (vn, r) = (x[3], x[5]);
        let front = self.caf * (delta - ((vn + self.lf * r) / vl).atan());
        let rear = -self.car * ((vn - self.lr * r) / vl).atan();
        (front, rear)
    }
}

/// Bicycle plant with a counter of speed-floor activations.
#[derive(Clone, Debug)]
pub struct Bicycle<T> {
    pub params: BicycleParams<T>,
    clamps: Arc<AtomicU64>,
}

impl<T: Real> Bicycle<T> {
    pub fn new(params: BicycleParams<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            clamps: Arc::new(AtomicU64::new(0)),
        })
    }

    /// Number of dynamics evaluations (plant and predictor) in which `v_ℓ` was
    /// below the floor.
    pub fn clamp_events(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    /// State `(z₁, z₂, v_ℓ, v_n, ψ, ψ̇)`, input `(a_ℓ, δ_f)`, output `(z₁, z₂)`.
    pub fn plant(&self) -> Result<PlantModel<T>> {
        let p = self.params;
        let clamps = Arc::clone(&self.clamps);
        let two = T::lit(2.0);
        PlantModel::new(
            6,
            2,
            Arc::new(move |x: &[T], u: &[T], out: &mut [T]| {
                if x[2] < p.v_floor {
                    clamps.fetch_add(1, Ordering::Relaxed);
                }
                let (vl, vn, psi, r) = (x[2], x[3], x[4], x[5]);
                let (a, delta) = (u[0], u[1]);
                let (fcf, fcr) = p.lateral_forces(x, delta);
                let (sp, cp) = psi.sin_cos();
                let cd = delta.cos();
                out[0] = vl * cp - vn * sp;
                out[1] = vl * sp + vn * cp;
                out[2] = r * vn + a;
                out[3] = -r * vl + two * (fcf * cd + fcr) / p.mass;
                out[4] = r;
                out[5] = two * (p.lf * fcf * cd - p.lr * fcr) / p.iz;
            }),
            Arc::new(|x: &[T], out: &mut [T]| {
                out[0] = x[0];
                out[1] = x[1];
            }),
        )
    }
}

/// Bicycle plant with the given parameters.
pub fn bicycle_dynamics<T: Real>(p: BicycleParams<T>) -> Result<PlantModel<T>> {
    Bicycle::new(p)?.plant()
}

/// State `(z₁, z₂, ψ)`, input `(v, ω)`, output `(z₁, z₂)`.
pub fn unicycle_dynamics<T: Real>() -> PlantModel<T> {
    PlantModel::new(
        3,
        2,
        Arc::new(|x: &[T], u: &[T], out: &mut [T]| {
            let (s, c) = x[2].sin_cos();
            out[0] = u[0] * c;
            out[1] = u[0] * s;
            out[2] = u[1];
        }),
        Arc::new(|x: &[T], out: &mut [T]| {
            out[0] = x[0];
            out[1] = x[1];
        }),
    )
    .expect("fixed positive dimensions")
}
