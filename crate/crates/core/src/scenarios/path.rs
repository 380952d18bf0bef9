//! Planar polyline paths, nearest-point projection and the S-curve stand-in road.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::ReferenceSignal;
use crate::scalar::Real;

/// Ordered planar points with cumulative arclength.
#[derive(Clone, Debug)]
pub struct PathPolyline<T> {
    points: Vec<[T; 2]>,
    arclength: Vec<T>,
}

/// Closest point on a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection<T> {
    pub s: T,
    pub dist: T,
    pub point: [T; 2],
    /// Index of the segment containing the closest point.
    pub segment: usize,
}

fn dist2<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

impl<T: Real> PathPolyline<T> {
    pub fn new(points: Vec<[T; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("path needs at least two points".into()));
        }
        let mut arclength = Vec::with_capacity(points.len());
        arclength.push(T::zero());
        for w in points.windows(2) {
            let len = dist2(w[0], w[1]).sqrt();
            if !(len > T::zero()) || !len.is_finite() {
                return Err(Error::InvalidInput("consecutive path points must be distinct and finite".into()));
            }
            let last = *arclength.last().unwrap();
            arclength.push(last + len);
        }
        Ok(Self { points, arclength })
    }

    pub fn points(&self) -> &[[T; 2]] {
        &self.points
    }

    pub fn arclengths(&self) -> &[T] {
        &self.arclength
    }

    pub fn length(&self) -> T {
        *self.arclength.last().unwrap()
    }

    fn segment_at(&self, s: T) -> usize {
        let k = self.arclength.partition_point(|&a| a <= s);
        k.clamp(1, self.points.len() - 1) - 1
    }

    /// Point at arclength `s`, linearly interpolated; clamped to the end points.
    pub fn point_at(&self, s: T) -> [T; 2] {
        let s = s.max(T::zero()).min(self.length());
        let k = self.segment_at(s);
        let (a, b) = (self.points[k], self.points[k + 1]);
        let w = (s - self.arclength[k]) / (self.arclength[k + 1] - self.arclength[k]);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    }

    /// Unit tangent of the segment containing arclength `s`.
    pub fn tangent_at(&self, s: T) -> [T; 2] {
        let k = self.segment_at(s.max(T::zero()).min(self.length()));
        self.segment_tangent(k)
    }

    fn segment_tangent(&self, k: usize) -> [T; 2] {
        let (a, b) = (self.points[k], self.points[k + 1]);
        let len = self.arclength[k + 1] - self.arclength[k];
        [(b[0] - a[0]) / len, (b[1] - a[1]) / len]
    }

    /// Closest point of the polyline to `q`; ties go to the smallest arclength.
    pub fn project(&self, q: [T; 2]) -> Projection<T> {
        let mut best = Projection {
            s: T::zero(),
            dist: T::infinity(),
            point: self.points[0],
            segment: 0,
        };
        let mut best_d2 = T::infinity();
        for k in 0..self.points.len() - 1 {
            let (a, b) = (self.points[k], self.points[k + 1]);
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let len2 = ex * ex + ey * ey;
            let w = (((q[0] - a[0]) * ex + (q[1] - a[1]) * ey) / len2).max(T::zero()).min(T::one());
            let p = [a[0] + w * ex, a[1] + w * ey];
            let d2 = dist2(p, q);
            if d2 < best_d2 {
                best_d2 = d2;
                best = Projection {
                    s: self.arclength[k] + w * (self.arclength[k + 1] - self.arclength[k]),
                    dist: T::zero(),
                    point: p,
                    segment: k,
                };
            }
        }
        best.dist = best_d2.sqrt();
        best
    }
}

/// `(s, dist)` of the closest path point to `q`.
pub fn nearest_point_arclength<T: Real>(path: &PathPolyline<T>, q: [T; 2]) -> (T, T) {
    let p = path.project(q);
    (p.s, p.dist)
}

/// Distance to the path of both agents plus the arclength between their
/// projections. Fails when the follower projects ahead of the leader.
pub fn approx_interagent_distance<T: Real>(path: &PathPolyline<T>, leader: [T; 2], follower: [T; 2]) -> Result<T> {
    let (sl, dl) = nearest_point_arclength(path, leader);
    let (sf, df) = nearest_point_arclength(path, follower);
    if sl < sf {
        return Err(Error::NegativeArclength { gap: (sl - sf).to_f64_lossy() });
    }
    Ok(dl + df + (sl - sf))
}

/// Target point at distance `d` from `leader_pred` towards `follower_pos`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetPoint<T> {
    pub point: [T; 2],
    /// Set when the two points coincided and the fallback heading was used.
    pub fallback: bool,
}

/// `leader_pred + d·(follower_pos − leader_pred)/‖follower_pos − leader_pred‖`.
/// Within 1e−9 m the target is placed `d` behind `leader_pred` along
/// `fallback_heading` instead.
pub fn follower_target_line<T: Real>(leader_pred: [T; 2], follower_pos: [T; 2], d: T, fallback_heading: T) -> TargetPoint<T> {
    let (dx, dy) = (follower_pos[0] - leader_pred[0], follower_pos[1] - leader_pred[1]);
    let norm = dx.hypot(dy);
    if norm > T::lit(1e-9) {
        TargetPoint {
            point: [leader_pred[0] + d * dx / norm, leader_pred[1] + d * dy / norm],
            fallback: false,
        }
    } else {
        let (s, c) = fallback_heading.sin_cos();
        TargetPoint {
            point: [leader_pred[0] - d * c, leader_pred[1] - d * s],
            fallback: true,
        }
    }
}

/// Piece of a path built from headings and curvature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathPiece<T> {
    Straight { length: T },
    /// Positive `turn` turns left.
    Arc { radius: T, turn: T },
}

/// Piecewise straight/arc road sampled at a fixed spacing.
#[derive(Clone, Debug)]
pub struct RoadBuilder<T> {
    pub start: [T; 2],
    pub heading: T,
    pub pieces: Vec<PathPiece<T>>,
    pub resolution: T,
}

impl<T: Real> RoadBuilder<T> {
    pub fn build(&self) -> Result<PathPolyline<T>> {
        if !(self.resolution > T::zero()) {
            return Err(Error::InvalidInput("path resolution must be positive".into()));
        }
        let mut pts = vec![self.start];
        let (mut pos, mut heading) = (self.start, self.heading);
        for piece in &self.pieces {
            let length = match *piece {
                PathPiece::Straight { length } => length,
                PathPiece::Arc { radius, turn } => {
                    if !(radius > T::zero()) {
                        return Err(Error::InvalidInput("arc radius must be positive".into()));
                    }
                    radius * turn.abs()
                }
            };
            if !(length > T::zero()) {
                return Err(Error::InvalidInput("path pieces must have positive length".into()));
            }
            let count = (length / self.resolution).ceil().to_usize().unwrap_or(1).max(1);
            let h = length / T::from_usize(count).unwrap();
            let (p0, h0) = (pos, heading);
            for j in 1..=count {
                let ds = h * T::from_usize(j).unwrap();
                match *piece {
                    PathPiece::Straight { .. } => {
                        let (s, c) = h0.sin_cos();
                        pos = [p0[0] + ds * c, p0[1] + ds * s];
                    }
                    PathPiece::Arc { radius, turn } => {
                        let k = turn.signum() / radius;
                        let hn = h0 + k * ds;
                        pos = [p0[0] + (hn.sin() - h0.sin()) / k, p0[1] - (hn.cos() - h0.cos()) / k];
                        heading = hn;
                    }
                }
                pts.push(pos);
            }
            if let PathPiece::Arc { turn, .. } = *piece {
                heading = h0 + turn;
            }
        }
        PathPolyline::new(pts)
    }
}

/// Piecewise-linear speed profile `v(t)` through `knots`, held constant
/// outside them, with its exact integral.
#[derive(Clone, Debug)]
pub struct SpeedProfile<T> {
    knots: Vec<(T, T)>,
}

impl<T: Real> SpeedProfile<T> {
    pub fn new(knots: Vec<(T, T)>) -> Result<Self> {
        if knots.is_empty() || knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidInput("speed knots need strictly increasing times".into()));
        }
        Ok(Self { knots })
    }

    pub fn speed(&self, t: T) -> T {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            if t <= w[1].0 {
                let a = (t - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + a * (w[1].1 - w[0].1);
            }
        }
        k[k.len() - 1].1
    }

    pub fn acceleration(&self, t: T) -> T {
        for w in self.knots.windows(2) {
            if t >= w[0].0 && t < w[1].0 {
                return (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            }
        }
        T::zero()
    }

    /// `∫_{t₀}^{t} v`, with `t₀` the first knot time.
    pub fn distance(&self, t: T) -> T {
        let k = &self.knots;
        let half = T::lit(0.5);
        if t <= k[0].0 {
            return k[0].1 * (t - k[0].0);
        }
        let mut acc = T::zero();
        for w in k.windows(2) {
            let hi = t.min(w[1].0);
            let v_hi = self.speed(hi);
            acc += half * (w[0].1 + v_hi) * (hi - w[0].0);
            if t <= w[1].0 {
                return acc;
            }
        }
        let last = k[k.len() - 1];
        acc + last.1 * (t - last.0)
    }
}

/// Road and timing for the bicycle platoon.
#[derive(Clone, Debug)]
pub struct SCurve<T> {
    pub path: Arc<PathPolyline<T>>,
    pub speed: SpeedProfile<T>,
    /// Arclength of the leader's start point; the stretch before it is a
    /// straight lead-in for the followers.
    pub origin: T,
    /// Arclength where the final straight begins.
    pub final_straight: T,
}

impl<T: Real> SCurve<T> {
    /// Straight along +x through the origin for 100 m, left arc (R = 100 m,
    /// 45°), straight, right arc (R = 30 m, 90°) whose midpoint is reached at
    /// t = 20 s, then straight at heading −45°. Speed ramps 0→20 m/s over
    /// [0, 10], slows to 8.66 m/s at the apex (t = 20) and back to 20, and
    /// finally slows to 10 m/s over [30, 38].
    pub fn standard(lead_in: T) -> Result<Self> {
        let l = T::lit;
        let speed = SpeedProfile::new(vec![
            (l(0.0), l(0.0)),
            (l(10.0), l(20.0)),
            (l(15.0), l(20.0)),
            (l(20.0), l(8.66)),
            (l(25.0), l(20.0)),
            (l(30.0), l(20.0)),
            (l(38.0), l(10.0)),
        ])?;
        let quarter = T::FRAC_PI_4();
        let (r1, r2) = (l(100.0), l(30.0));
        let apex = speed.distance(l(20.0));
        let first_arc_end = l(100.0) + r1 * quarter;
        let second_arc_len = r2 * T::FRAC_PI_2();
        let middle = apex - second_arc_len * l(0.5) - first_arc_end;
        if !(middle > T::zero()) {
            return Err(Error::InvalidInput("S-curve geometry does not fit the speed profile".into()));
        }
        let final_straight = lead_in + apex + second_arc_len * l(0.5);
        let tail = speed.distance(l(60.0)) - (apex + second_arc_len * l(0.5));
        let builder = RoadBuilder {
            start: [-lead_in, T::zero()],
            heading: T::zero(),
            pieces: vec![
                PathPiece::Straight { length: lead_in + l(100.0) },
                PathPiece::Arc { radius: r1, turn: quarter },
                PathPiece::Straight { length: middle },
                PathPiece::Arc { radius: r2, turn: -T::FRAC_PI_2() },
                PathPiece::Straight { length: tail },
            ],
            resolution: l(0.1),
        };
        Ok(Self {
            path: Arc::new(builder.build()?),
            speed,
            origin: lead_in,
            final_straight,
        })
    }

    /// Leader reference: the path point reached by following the speed profile.
    pub fn reference(&self) -> Result<ReferenceSignal<T>> {
        let path = Arc::clone(&self.path);
        let speed = self.speed.clone();
        let origin = self.origin;
        let path_rate = Arc::clone(&self.path);
        let speed_rate = self.speed.clone();
        let horizon = speed.knots.last().unwrap().0 * T::lit(2.0);
        let tmax = ((path.length() - origin) / speed.knots.last().unwrap().1.max(T::one())).min(horizon);
        ReferenceSignal::new(2, Arc::new(move |t: T| path.point_at(origin + speed.distance(t)).to_vec()))
            .with_rate(Arc::new(move |t: T| {
                let tan = path_rate.tangent_at(origin + speed_rate.distance(t));
                let v = speed_rate.speed(t);
                vec![v * tan[0], v * tan[1]]
            }))
        .with_domain(T::zero(), tmax)
    }
}
