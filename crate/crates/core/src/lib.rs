//! Newton-Raphson-flow tracking control with finite-horizon output prediction.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix the scalar to `f64`, which is what the scenarios and the
//! command-line tool use.

pub mod control;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod linstab;
pub mod model;
pub mod poly;
pub mod predict;
pub mod scalar;
pub mod scenarios;

pub use control::{
    asymptotic_errors, control_rate, control_rate_with_target, memoryless_rate, run_closed_loop,
    run_memoryless, step_closed_loop, ClosedLoopTrace, ControllerConfig, InjectorFn, RateEval, TraceRecord,
    TraceSummary, Variant,
};
pub use error::{Error, Result};
pub use integrate::{euler_step, expm, expm_integral, integrate_const_input, rk4_step, Scheme};
pub use linalg::Matrix;
pub use linstab::{
    build_phi_psi, certify, char_poly_bivariate, extract_p0_q, qtilde_identity_check, qtilde_matches, root_locus,
    BivariatePoly, LinearSystem, RootLocus, StabilityCertificate, Verdict,
};
pub use model::{AugmentedState, PlantModel, ReferenceSignal, StaticPlant, TimeGrid};
pub use poly::Poly;
pub use predict::{fd_jacobian, Axis, LtiPredictor, NumericPredictor, PredictorModel, UnicyclePredictor};
pub use scalar::Real;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Poly64 = Poly<f64>;
pub type Plant64 = PlantModel<f64>;
pub type StaticPlant64 = StaticPlant<f64>;
pub type Reference64 = ReferenceSignal<f64>;
pub type Grid64 = TimeGrid<f64>;
pub type State64 = AugmentedState<f64>;
pub type Controller64 = ControllerConfig<f64>;
pub type Trace64 = ClosedLoopTrace<f64>;
pub type LinearSystem64 = LinearSystem<f64>;
pub type NumericPredictor64 = NumericPredictor<f64>;
pub type LtiPredictor64 = LtiPredictor<f64>;
pub type UnicyclePredictor64 = UnicyclePredictor<f64>;
