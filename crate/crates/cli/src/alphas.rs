//! Gain lists: `start:stop:count` (log-spaced), `a,b,c`, or a single value.

use crate::error::{CliError, Result};

pub fn parse_alphas(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| CliError::Usage(format!("--alphas '{spec}': {msg}"));
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| bad(format!("'{}' is not a number ({e})", s.trim())))
    };
    let mut alphas = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(bad("expected start:stop:count".into()));
        };
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| bad(format!("count '{}' is not a positive integer", count.trim())))?;
        if count == 0 {
            return Err(bad("count must be at least 1".into()));
        }
        if !(start > 0.0 && stop > 0.0) {
            return Err(bad("log spacing needs positive endpoints".into()));
        }
        if count == 1 {
            vec![start]
        } else {
            let (l0, l1) = (start.log10(), stop.log10());
            (0..count)
                .map(|k| {
                    if k == count - 1 {
                        stop
                    } else {
                        10f64.powf(l0 + (l1 - l0) * k as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(bad(format!("gain {a} must be positive and finite")));
    }
    alphas.sort_by(f64::total_cmp);
    Ok(alphas)
}
