//! Inverted pendulum on a cart, reduced to the angle dynamics.
//!
//! `(Mℓ + mℓ sin²θ)·θ̈ + mℓ·θ̇²·sinθ·cosθ + (M+m)·g·sinθ = F·cosθ`, with `θ = 0`
//! upright and `θ = −π/2` pointing along the positive cart axis.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{PlantModel, ReferenceSignal};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumParams<T> {
    /// `M`, kg.
    pub cart_mass: T,
    /// `m`, kg.
    pub bob_mass: T,
    /// `ℓ`, m.
    pub length: T,
    /// `g`, m/s².
    pub gravity: T,
}

impl<T: Real> Default for PendulumParams<T> {
    fn default() -> Self {
        Self {
            cart_mass: T::lit(1.0),
            bob_mass: T::lit(0.2),
            length: T::lit(2.0),
            gravity: T::lit(9.81),
        }
    }
}

impl<T: Real> PendulumParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cart_mass", self.cart_mass),
            ("bob_mass", self.bob_mass),
            ("length", self.length),
            ("gravity", self.gravity),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("pendulum {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `θ̈` at state `(θ, θ̇)` under cart force `F`.
    pub fn angular_acceleration(&self, theta: T, omega: T, force: T) -> T {
        let (s, c) = theta.sin_cos();
        let (big, small, l, g) = (self.cart_mass, self.bob_mass, self.length, self.gravity);
        (force * c - small * l * omega * omega * s * c - (big + small) * g * s) / (big * l + small * l * s * s)
    }

    /// `½(Mℓ + mℓ sin²θ)θ̇² − (M+m)g cosθ`, conserved when `F = 0`.
    pub fn energy(&self, theta: T, omega: T) -> T {
        let s = theta.sin();
        let inertia = self.cart_mass * self.length + self.bob_mass * self.length * s * s;
        T::lit(0.5) * inertia * omega * omega - (self.cart_mass + self.bob_mass) * self.gravity * theta.cos()
    }
}

/// State `(θ, θ̇)`, input `F`, output `θ`.
pub fn pendulum_dynamics<T: Real>(p: PendulumParams<T>) -> Result<PlantModel<T>> {
    p.validate()?;
    PlantModel::new(
        2,
        1,
        Arc::new(move |x: &[T], u: &[T], out: &mut [T]| {
            out[0] = x[1];
            out[1] = p.angular_acceleration(x[0], x[1], u[0]);
        }),
        Arc::new(|x: &[T], out: &mut [T]| out[0] = x[0]),
    )
}

/// `r(t) = −π/6 + swing·(π/3)·sin t`; `swing = 1` sweeps 30° to −90°.
pub fn pendulum_reference<T: Real>(swing: T) -> Result<ReferenceSignal<T>> {
    ReferenceSignal::sinusoid(
        vec![-T::FRAC_PI_6()],
        vec![swing * T::FRAC_PI_3()],
        vec![T::one()],
        vec![T::zero()],
    )
}

/// Initial state `(π/6, 0)`.
pub fn pendulum_initial_state<T: Real>() -> Vec<T> {
    vec![T::FRAC_PI_6(), T::zero()]
}
