//! Leader/follower platoons of identical tracking controllers.
//!
//! Agent 0 tracks an exogenous reference; agent `i` tracks a target built from
//! agent `i − 1`. Agents are evaluated in order within a tick and all states
//! advance together at the end of the tick.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::control::{control_rate_with_target, euler_advance, ClosedLoopTrace, ControllerConfig, TraceRecord, Variant};
use crate::error::{Error, Result};
use crate::model::{AugmentedState, PlantModel, ReferenceSignal, TimeGrid};
use crate::predict::PredictorModel;
use crate::scalar::Real;

use super::path::{follower_target_line, PathPolyline, Projection};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FollowerMode {
    /// Target on the path, `d` behind the predecessor's projected position
    /// extrapolated by its along-path speed over one horizon.
    ArclengthOffset,
    /// Target on the segment from the predecessor's prediction `ŷ(t+T)` to the
    /// follower, at distance `d` from the prediction.
    TargetLine,
}

impl FollowerMode {
    pub fn name(self) -> &'static str {
        match self {
            FollowerMode::ArclengthOffset => "arclength_offset",
            FollowerMode::TargetLine => "target_line",
        }
    }
}

impl fmt::Display for FollowerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FollowerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arclength_offset" => Ok(FollowerMode::ArclengthOffset),
            "target_line" => Ok(FollowerMode::TargetLine),
            other => Err(Error::InvalidInput(format!("unknown follower mode '{other}'"))),
        }
    }
}

/// One vehicle: plant, predictor and initial augmented state.
#[derive(Clone)]
pub struct PlatoonAgent<T: Real> {
    pub plant: PlantModel<T>,
    pub predictor: Arc<dyn PredictorModel<T>>,
    pub x0: Vec<T>,
    pub u0: Vec<T>,
}

#[derive(Clone)]
pub struct PlatoonConfig<T: Real> {
    pub agents: Vec<PlatoonAgent<T>>,
    /// Prescribed spacing `d`.
    pub spacing: T,
    pub controller: ControllerConfig<T>,
    pub follower_mode: FollowerMode,
    /// Road used for `ArclengthOffset` targets and for lateral-error and
    /// along-path distance metrics.
    pub path: Option<Arc<PathPolyline<T>>>,
    /// Add `T·v_∥` to the predecessor's arclength (`ArclengthOffset` only).
    pub velocity_lookahead: bool,
}

impl<T: Real> PlatoonConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::InvalidInput("platoon needs at least one agent".into()));
        }
        if !(self.spacing >= T::zero()) || !self.spacing.is_finite() {
            return Err(Error::InvalidInput("platoon spacing must be nonnegative".into()));
        }
        if self.controller.variant == Variant::Memoryless {
            return Err(Error::InvalidInput("platoon agents need a dynamic controller".into()));
        }
        if self.agents.len() > 1 && self.controller.variant.needs_rate() {
            return Err(Error::MissingReferenceRate(self.controller.variant.name()));
        }
        if self.follower_mode == FollowerMode::ArclengthOffset && self.path.is_none() {
            return Err(Error::InvalidInput("arclength_offset followers need a path".into()));
        }
        for a in &self.agents {
            if a.plant.io_dim() != 2 {
                return Err(Error::DimensionMismatch {
                    context: "platoon agent output",
                    expected: 2,
                    got: a.plant.io_dim(),
                });
            }
            if a.predictor.state_dim() != a.plant.state_dim() || a.predictor.io_dim() != 2 {
                return Err(Error::InvalidInput("predictor and plant dimensions differ".into()));
            }
            AugmentedState::new(&a.plant, a.x0.clone(), a.u0.clone(), T::zero())?;
            a.plant.probe(&a.x0, &a.u0)?;
        }
        Ok(())
    }
}

/// Per-tick platoon statistics.
#[derive(Clone, Debug, Default)]
pub struct PlatoonMetrics<T> {
    pub times: Vec<T>,
    /// `[agent][tick]` distance to the path (empty without a path).
    pub lateral_errors: Vec<Vec<T>>,
    /// `[agent][tick]` projected arclength (empty without a path).
    pub arclengths: Vec<Vec<T>>,
    /// `[i − 1][tick]` distance between agents `i − 1` and `i`: the along-path
    /// measure with a path (negative when the follower projects ahead), the
    /// Euclidean distance otherwise.
    pub distances: Vec<Vec<T>>,
    /// Ticks at which a target-line fallback heading was used.
    pub fallback_events: usize,
}

impl<T: Real> PlatoonMetrics<T> {
    /// Largest lateral error of each agent over ticks with `t ≥ from`.
    pub fn max_lateral_errors(&self, from: T) -> Vec<T> {
        self.lateral_errors
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.times)
                    .filter(|(_, &t)| t >= from)
                    .fold(T::zero(), |m, (&e, _)| m.max(e))
            })
            .collect()
    }

    /// `(min, max)` over all pairs of the distances at ticks selected by `keep`.
    pub fn distance_range(&self, mut keep: impl FnMut(usize) -> bool) -> Option<(T, T)> {
        let mut out: Option<(T, T)> = None;
        for k in 0..self.times.len() {
            if !keep(k) {
                continue;
            }
            for row in &self.distances {
                let d = row[k];
                out = Some(match out {
                    None => (d, d),
                    Some((lo, hi)) => (lo.min(d), hi.max(d)),
                });
            }
        }
        out
    }

    /// Ticks with `t ≥ from` at which some projected arclength exceeds its
    /// predecessor's.
    pub fn ordering_violations(&self, from: T) -> usize {
        (0..self.times.len())
            .filter(|&k| self.times[k] >= from)
            .filter(|&k| self.arclengths.windows(2).any(|w| w[1][k] > w[0][k]))
            .count()
    }
}

/// Traces of every agent plus platoon metrics. When an agent fails, all traces
/// stop at that tick and `failure` names the agent.
#[derive(Clone, Debug)]
pub struct PlatoonRun<T> {
    pub traces: Vec<ClosedLoopTrace<T>>,
    pub metrics: PlatoonMetrics<T>,
    pub failure: Option<(usize, Error)>,
}

impl<T> PlatoonRun<T> {
    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }
}

fn heading_of<T: Real>(v: &[T]) -> T {
    v[1].atan2(v[0])
}

/// Simulates the platoon on `grid`. The leader follows `leader_ref` (with its
/// rate when the controller needs it). A follower's `r(t)` in its trace is the
/// target it computed one horizon earlier (its first target before that).
pub fn run_platoon<T: Real>(cfg: &PlatoonConfig<T>, leader_ref: &ReferenceSignal<T>, grid: &TimeGrid<T>) -> Result<PlatoonRun<T>> {
    cfg.validate()?;
    cfg.controller.check_reference(leader_ref)?;
    if leader_ref.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "leader reference",
            expected: 2,
            got: leader_ref.dim(),
        });
    }
    leader_ref.eval(grid.tf(), cfg.controller.horizon)?;

    let n = cfg.agents.len();
    let horizon = cfg.controller.horizon;
    let lag = (horizon / grid.dt()).round().to_usize().unwrap_or(0);
    let mut states: Vec<AugmentedState<T>> = cfg
        .agents
        .iter()
        .map(|a| AugmentedState::new(&a.plant, a.x0.clone(), a.u0.clone(), grid.t0()))
        .collect::<Result<_>>()?;
    let mut traces: Vec<ClosedLoopTrace<T>> = (0..n).map(|_| ClosedLoopTrace::new(grid.dt(), horizon, grid.tf())).collect();
    let mut targets: Vec<Vec<Vec<T>>> = vec![Vec::with_capacity(grid.steps() + 1); n];
    let with_path = cfg.path.is_some();
    let mut metrics = PlatoonMetrics {
        times: Vec::with_capacity(grid.steps() + 1),
        lateral_errors: if with_path { vec![Vec::new(); n] } else { Vec::new() },
        arclengths: if with_path { vec![Vec::new(); n] } else { Vec::new() },
        distances: vec![Vec::new(); n.saturating_sub(1)],
        fallback_events: 0,
    };

    for k in 0..=grid.steps() {
        let t = grid.time(k);
        let outputs: Vec<Vec<T>> = (0..n).map(|i| cfg.agents[i].plant.output(&states[i].x)).collect();
        let projections: Option<Vec<Projection<T>>> =
            cfg.path.as_ref().map(|p| outputs.iter().map(|y| p.project([y[0], y[1]])).collect());

        metrics.times.push(t);
        if let Some(proj) = &projections {
            for i in 0..n {
                metrics.lateral_errors[i].push(proj[i].dist);
                metrics.arclengths[i].push(proj[i].s);
            }
        }
        for i in 1..n {
            let d = match &projections {
                Some(p) => p[i - 1].dist + p[i].dist + (p[i - 1].s - p[i].s),
                None => (outputs[i - 1][0] - outputs[i][0]).hypot(outputs[i - 1][1] - outputs[i][1]),
            };
            metrics.distances[i - 1].push(d);
        }

        let mut rates: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut yhat_prev: Vec<T> = Vec::new();
        for i in 0..n {
            let agent = &cfg.agents[i];
            let st = &states[i];
            let step = (|| -> Result<(Vec<T>, Vec<T>, crate::control::RateEval<T>)> {
                let (r_ahead, rdot) = if i == 0 {
                    let rdot = if cfg.controller.variant.needs_rate() {
                        leader_ref.eval_rate(t, horizon)?
                    } else {
                        None
                    };
                    (leader_ref.eval(t, horizon)?, rdot)
                } else {
                    let prev = &cfg.agents[i - 1];
                    let target = match cfg.follower_mode {
                        FollowerMode::ArclengthOffset => {
                            let path = cfg.path.as_ref().expect("validated");
                            let proj = projections.as_ref().expect("validated")[i - 1];
                            let mut s = proj.s - cfg.spacing;
                            if cfg.velocity_lookahead {
                                let vel = prev.plant.output_rate(&states[i - 1].x, &states[i - 1].u);
                                let tan = path.tangent_at(proj.s);
                                s += horizon * (vel[0] * tan[0] + vel[1] * tan[1]);
                            }
                            path.point_at(s).to_vec()
                        }
                        FollowerMode::TargetLine => {
                            let me = [outputs[i][0], outputs[i][1]];
                            let lead = [yhat_prev[0], yhat_prev[1]];
                            let heading = heading_of(&prev.plant.output_rate(&states[i - 1].x, &states[i - 1].u));
                            let tp = follower_target_line(lead, me, cfg.spacing, heading);
                            if tp.fallback {
                                metrics.fallback_events += 1;
                            }
                            tp.point.to_vec()
                        }
                    };
                    (target, None)
                };
                let ev = control_rate_with_target(
                    &cfg.controller,
                    agent.predictor.as_ref(),
                    &agent.plant,
                    t,
                    &st.x,
                    &st.u,
                    &r_ahead,
                    rdot.as_deref(),
                )?;
                let r_now = if i == 0 {
                    leader_ref.eval(t, T::zero())?
                } else {
                    match k.checked_sub(lag) {
                        Some(j) => targets[i][j].clone(),
                        None => targets[i].first().cloned().unwrap_or_else(|| r_ahead.clone()),
                    }
                };
                Ok((r_ahead, r_now, ev))
            })();
            let (r_ahead, r_now, ev) = match step {
                Ok(v) => v,
                Err(e) => {
                    return Ok(PlatoonRun {
                        traces,
                        metrics,
                        failure: Some((i, e)),
                    })
                }
            };
            targets[i].push(r_ahead.clone());
            traces[i].records.push(TraceRecord {
                t,
                x: st.x.clone(),
                u: st.u.clone(),
                y: outputs[i].clone(),
                yhat: ev.yhat.clone(),
                r: r_now,
                r_ahead,
                v: ev.v,
            });
            yhat_prev = ev.yhat;
            rates.push(ev.udot);
        }
        if k == grid.steps() {
            break;
        }
        for i in 0..n {
            match euler_advance(&cfg.agents[i].plant, &states[i], &rates[i], grid.dt()) {
                Ok(s) => states[i] = s,
                Err(e) => {
                    return Ok(PlatoonRun {
                        traces,
                        metrics,
                        failure: Some((i, e)),
                    })
                }
            }
        }
    }
    Ok(PlatoonRun {
        traces,
        metrics,
        failure: None,
    })
}
