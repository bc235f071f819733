//! Term-count and timing sweeps for the growth claims in `|t|` and in the
//! number of digits.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::numerics::{CComplex, PrecisionContext};
use crate::series::{Evaluator, SeriesConfig};

pub const T_SWEEP: [f64; 4] = [10.0, 20.0, 40.0, 80.0];
pub const DIGITS_SWEEP: [u32; 3] = [20, 40, 80];
pub const SWEEP_SIGMA: f64 = 0.5;
pub const SWEEP_DIGITS: u32 = 30;
/// Imaginary part used for the digits sweep.
pub const DIGITS_SWEEP_T: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub t: f64,
    pub digits: u32,
    pub terms: usize,
    pub ell: u32,
    pub elapsed: Duration,
}

impl ScalingRow {
    pub fn elapsed_ms(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1e3
    }
}

/// Best-of-`repeats` wall time for one `eta` evaluation at `0.5 + t i`,
/// each repeat starting from a cold cache.
pub fn measure(t: f64, digits: u32, ell: Option<u32>, repeats: usize) -> Result<ScalingRow> {
    let ctx = PrecisionContext::new(digits)?;
    let mut cfg = SeriesConfig::new(2, ctx)?;
    if let Some(l) = ell {
        cfg = cfg.with_ell(l)?;
    }
    let s = CComplex::new(ctx.real(SWEEP_SIGMA), ctx.real(t));
    let tol = ctx.tolerance();
    let mut best: Option<ScalingRow> = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let r = Evaluator::new().eta(&s, &cfg, &tol)?;
        let elapsed = start.elapsed();
        if best.as_ref().map_or(true, |b| elapsed < b.elapsed) {
            best = Some(ScalingRow { t, digits, terms: r.terms_used, ell: r.ell, elapsed });
        }
    }
    Ok(best.unwrap())
}

#[derive(Debug, Clone)]
pub struct SoftCheck {
    pub name: String,
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

impl SoftCheck {
    pub fn passed(&self) -> bool {
        self.value >= self.low && self.value <= self.high
    }
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub t_rows: Vec<ScalingRow>,
    pub digit_rows: Vec<ScalingRow>,
    pub checks: Vec<SoftCheck>,
}

impl ScalingReport {
    pub fn rows(&self) -> impl Iterator<Item = &ScalingRow> {
        self.t_rows.iter().chain(&self.digit_rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,digits,M,elapsed_ms\n");
        for r in self.rows() {
            out.push_str(&format!("{},{},{},{:.3}\n", r.t, r.digits, r.terms, r.elapsed_ms()));
        }
        out
    }
}

/// Runs both sweeps. `ell = None` lets the planner choose.
pub fn scaling_report(ell: Option<u32>, repeats: usize) -> Result<ScalingReport> {
    let t_rows = T_SWEEP.iter().map(|&t| measure(t, SWEEP_DIGITS, ell, repeats)).collect::<Result<Vec<_>>>()?;
    let digit_rows =
        DIGITS_SWEEP.iter().map(|&d| measure(DIGITS_SWEEP_T, d, ell, repeats)).collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    for w in t_rows.windows(2) {
        checks.push(SoftCheck {
            name: format!("M(t={})/M(t={})", w[1].t, w[0].t),
            value: w[1].terms as f64 / w[0].terms as f64,
            low: 1.5,
            high: 2.6,
        });
    }
    let by_digits = |d: u32| digit_rows.iter().find(|r| r.digits == d);
    if let (Some(a), Some(b)) = (by_digits(40), by_digits(80)) {
        checks.push(SoftCheck {
            name: "time(digits=80)/time(digits=40)".into(),
            value: b.elapsed.as_secs_f64() / a.elapsed.as_secs_f64(),
            low: 2.5,
            high: f64::INFINITY,
        });
    }
    if let (Some(a), Some(b)) = (by_digits(20), by_digits(40)) {
        checks.push(SoftCheck {
            name: "M(digits=40)-M(digits=20)".into(),
            value: b.terms as f64 - a.terms as f64,
            low: 1.0,
            high: f64::INFINITY,
        });
    }
    Ok(ScalingReport { t_rows, digit_rows, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn more_digits_more_terms() {
        let a = measure(10.0, 20, None, 1).unwrap();
        let b = measure(10.0, 40, None, 1).unwrap();
        assert!(b.terms > a.terms);
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let r = ScalingReport {
            t_rows: vec![ScalingRow { t: 10.0, digits: 30, terms: 29, ell: 5, elapsed: Duration::from_millis(3) }],
            digit_rows: vec![],
            checks: vec![],
        };
        assert_eq!(r.to_csv(), "t,digits,M,elapsed_ms\n10,30,29,3.000\n");
    }
}
