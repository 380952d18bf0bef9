//! Closed-loop time series and the statistics drawn from them.

use crate::error::{Error, Result};
use crate::scalar::{norm2, sub, Real};

/// Fraction of the horizon, counted from the end, used for asymptotic statistics.
pub const TAIL_FRACTION: f64 = 0.2;

/// One grid instant of a closed-loop run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord<T> {
    pub t: T,
    pub x: Vec<T>,
    pub u: Vec<T>,
    pub y: Vec<T>,
    /// `ŷ(t+T)`, predicted at `t`.
    pub yhat: Vec<T>,
    /// `r(t)`.
    pub r: Vec<T>,
    /// `r(t+T)`.
    pub r_ahead: Vec<T>,
    /// `½‖r(t+T) − ŷ(t+T)‖²`.
    pub v: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceSummary<T> {
    pub tail_start: T,
    /// Tail max of `‖r(t) − y(t)‖`.
    pub tail_max_tracking_error: T,
    /// Tail max of `‖r(t+T) − ŷ(t+T)‖`.
    pub tail_max_ref_pred_error: T,
    /// Max of `‖u‖` over the whole run.
    pub peak_input: T,
    /// Least-squares slope of `ln V` against `t`; `None` when fewer than two
    /// records have positive `V`.
    pub lyapunov_slope: Option<T>,
}

/// Records of one run, plus the error that stopped it early, if any.
#[derive(Clone, Debug)]
pub struct ClosedLoopTrace<T> {
    pub records: Vec<TraceRecord<T>>,
    pub dt: T,
    pub horizon: T,
    /// Nominal end of the grid, even when the run stopped early.
    pub tf: T,
    pub failure: Option<Error>,
}

impl<T: Real> ClosedLoopTrace<T> {
    pub fn new(dt: T, horizon: T, tf: T) -> Self {
        Self {
            records: Vec::new(),
            dt,
            horizon,
            tf,
            failure: None,
        }
    }

    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn t0(&self) -> Option<T> {
        self.records.first().map(|r| r.t)
    }

    /// Start of the final 20% of the nominal horizon.
    pub fn tail_start(&self) -> T {
        let t0 = self.t0().unwrap_or(self.tf);
        self.tf - T::lit(TAIL_FRACTION) * (self.tf - t0)
    }

    fn tail(&self) -> impl Iterator<Item = &TraceRecord<T>> {
        let from = self.tail_start() - self.dt * T::lit(1e-6);
        self.records.iter().filter(move |r| r.t >= from)
    }

    /// Max `‖r(t) − y(t)‖` over records with `t ≥ from`.
    pub fn max_tracking_error_from(&self, from: T) -> T {
        self.records
            .iter()
            .filter(|r| r.t >= from)
            .map(|r| norm2(&sub(&r.r, &r.y)))
            .fold(T::zero(), T::max)
    }

    pub fn summary(&self) -> TraceSummary<T> {
        let tail_start = self.tail_start();
        let mut track = T::zero();
        let mut pred = T::zero();
        for r in self.tail() {
            track = track.max(norm2(&sub(&r.r, &r.y)));
            pred = pred.max(norm2(&sub(&r.r_ahead, &r.yhat)));
        }
        let peak = self.records.iter().map(|r| norm2(&r.u)).fold(T::zero(), T::max);
        TraceSummary {
            tail_start,
            tail_max_tracking_error: track,
            tail_max_ref_pred_error: pred,
            peak_input: peak,
            lyapunov_slope: self.log_v_slope(T::neg_infinity(), T::infinity()),
        }
    }

    /// Least-squares slope of `ln V(t)` over `lo ≤ t ≤ hi`, skipping `V = 0`.
    pub fn log_v_slope(&self, lo: T, hi: T) -> Option<T> {
        let pts: Vec<(f64, f64)> = self
            .records
            .iter()
            .filter(|r| r.t >= lo && r.t <= hi && r.v > T::zero())
            .map(|r| (r.t.to_f64_lossy(), r.v.to_f64_lossy().ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
        if sxx == 0.0 {
            return None;
        }
        Some(T::lit(sxy / sxx))
    }

    /// `max |V(t) − V(t₀)·e^{rate·(t−t₀)}| / V(t₀)` over records with `t ≤ hi`.
    pub fn max_relative_exp_deviation(&self, rate: T, hi: T) -> Option<T> {
        let first = self.records.first()?;
        if !(first.v > T::zero()) {
            return None;
        }
        let v0 = first.v;
        Some(
            self.records
                .iter()
                .filter(|r| r.t <= hi)
                .map(|r| (r.v - v0 * (rate * (r.t - first.t)).exp()).abs() / v0)
                .fold(T::zero(), T::max),
        )
    }
}

/// `(η̂₁, tracking tail)`: tail max of `‖ŷ(s) − y(s)‖`, pairing the prediction
/// made at `s − T` with the output at `s`, and tail max of `‖r − y‖`.
pub fn asymptotic_errors<T: Real>(trace: &ClosedLoopTrace<T>) -> Result<(T, T)> {
    if let Some(e) = &trace.failure {
        return Err(Error::InsufficientData(format!("run did not complete: {e}")));
    }
    let (Some(first), Some(last)) = (trace.records.first(), trace.records.last()) else {
        return Err(Error::InsufficientData("empty trace".into()));
    };
    if last.t - first.t < trace.horizon + trace.horizon {
        return Err(Error::InsufficientData(format!(
            "horizon {} is shorter than twice the lookahead {}",
            last.t - first.t,
            trace.horizon
        )));
    }
    let lag = (trace.horizon / trace.dt).round().to_usize().unwrap_or(0);
    let from = trace.tail_start() - trace.dt * T::lit(1e-6);
    let mut eta1 = T::zero();
    let mut track = T::zero();
    let mut any = false;
    for (k, r) in trace.records.iter().enumerate() {
        if r.t < from || k < lag {
            continue;
        }
        any = true;
        eta1 = eta1.max(norm2(&sub(&trace.records[k - lag].yhat, &r.y)));
        track = track.max(norm2(&sub(&r.r, &r.y)));
    }
    if !any {
        return Err(Error::InsufficientData("tail window is empty".into()));
    }
    Ok((eta1, track))
}
