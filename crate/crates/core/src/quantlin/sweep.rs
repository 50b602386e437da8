use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use super::scalar::{fit_scalar, Interval, QuantizerError, ScalarQuantizer};

/// Inclusive arithmetic progression `start:step:stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl GridRange {
    pub fn new(start: f64, step: f64, stop: f64) -> Result<Self, String> {
        if ![start, step, stop].iter().all(|v| v.is_finite()) {
            return Err("range bounds must be finite".into());
        }
        if step <= 0.0 {
            return Err(format!("range step must be positive (got {step})"));
        }
        if stop < start {
            return Err(format!("empty range {start}:{step}:{stop}"));
        }
        Ok(Self { start, step, stop })
    }

    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            step: 1.0,
            stop: value,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        // tolerate accumulated rounding in (stop - start) / step
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for GridRange {
    type Err = String;

    /// Accepts `start:step:stop` or a single value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [v] => Ok(Self::single(v)),
            [a, b, c] => Self::new(a, b, c),
            _ => Err(format!("expected start:step:stop, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x0: f64,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub lmse: f64,
}

/// Fits `q` at every `(x0, δ)` grid point, `x0` outermost.
pub fn sweep_grid(
    q: &ScalarQuantizer,
    x0_range: GridRange,
    delta_range: GridRange,
) -> Result<Vec<SweepRow>, QuantizerError> {
    let deltas = delta_range.values();
    let points: Vec<(f64, f64)> = x0_range
        .values()
        .into_iter()
        .flat_map(|x0| deltas.iter().map(move |&d| (x0, d)))
        .collect();
    points
        .into_par_iter()
        .map(|(x0, delta)| {
            let fit = fit_scalar(q, Interval::new(x0, delta)?);
            Ok(SweepRow {
                x0,
                delta,
                a: fit.a,
                b: fit.b,
                lmse: fit.lmse,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "x0,delta,a,b,lmse";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_g(r.x0),
            format_g(r.delta),
            format_g(r.a),
            format_g(r.b),
            format_g(r.lmse)
        );
    }
    out
}

/// C-style `%.12g`.
pub fn format_g(v: f64) -> String {
    const PRECISION: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
