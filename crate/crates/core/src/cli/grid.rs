use crate::{OvalError, Result};

const INTEGRAL_TOLERANCE: f64 = 1e-9;

/// Parses `start:end:step`, a comma-separated list, or a single number.
///
/// A range includes `start`, and includes `end` when `(end − start)/step` is
/// an integer to within 1e-9.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| OvalError::Parse(format!("grid value `{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(OvalError::Parse(format!("grid value `{s}` is not finite")))
        }
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, end, step] = parts[..] else {
            return Err(OvalError::Parse(format!(
                "grid `{text}` must have the form start:end:step"
            )));
        };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if !(step > 0.0) || end < start {
            return Err(OvalError::Parse(format!(
                "grid `{text}` needs step > 0 and end ≥ start"
            )));
        }
        let span = (end - start) / step;
        if span > 1e7 {
            return Err(OvalError::Parse(format!(
                "grid `{text}` has too many points"
            )));
        }
        let nearest = span.round();
        let (intervals, hits_end) = if (span - nearest).abs() <= INTEGRAL_TOLERANCE {
            (nearest as usize, true)
        } else {
            (span.floor() as usize, false)
        };
        Ok((0..=intervals)
            .map(|i| {
                if hits_end && i == intervals {
                    end
                } else {
                    snap(start + i as f64 * step)
                }
            })
            .collect())
    } else {
        text.split(',').map(num).collect()
    }
}

/// Removes the last-bit noise of `start + i·step` when a 12-digit decimal is
/// within rounding.
fn snap(v: f64) -> f64 {
    let r = (v * 1e12).round() / 1e12;
    if (r - v).abs() <= 4.0 * f64::EPSILON * v.abs().max(1.0) {
        r
    } else {
        v
    }
}
