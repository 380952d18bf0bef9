//! Benchmark plants, roads and platoon logic.

pub mod path;
pub mod pendulum;
pub mod platoon;
pub mod vehicles;

pub use path::{
    approx_interagent_distance, follower_target_line, nearest_point_arclength, PathPiece, PathPolyline, Projection,
    RoadBuilder, SCurve, SpeedProfile, TargetPoint,
};
pub use pendulum::{pendulum_dynamics, pendulum_initial_state, pendulum_reference, PendulumParams};
pub use platoon::{run_platoon, FollowerMode, PlatoonAgent, PlatoonConfig, PlatoonMetrics, PlatoonRun};
pub use vehicles::{bicycle_dynamics, unicycle_dynamics, Bicycle, BicycleParams};
