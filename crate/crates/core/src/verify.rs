//! The verification suite: every cross-check between the production path
//! and the independent routes, runnable as one report.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::bounds::{block_len, cstar_sigma_bound_b2, product_bound_profile, BoundProfile};
use crate::coefficients::{CoefficientTable, PochhammerRatio};
use crate::error::Result;
use crate::numerics::{CComplex, CReal, PrecisionContext};
use crate::oracle::{beta_integral, cstar_via_bernoulli_sequence, eta_b_reference, pi, w_closed, w_recurrence_sides};
use crate::series::{partial_sum, Evaluator, Mutation, SeriesConfig};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<22} {}", self.name, self.detail)
    }
}

/// One randomized evaluation point.
#[derive(Debug, Clone)]
pub struct Sample {
    pub s: CComplex,
    pub base: u32,
    pub ell: u32,
}

/// Largest block accepted when drawing random `ell`.
const SAMPLE_MAX_BLOCK: u64 = 4096;

/// `count` points with `Re s` uniform in `sigma_range`, `|Im s| <= t_max`,
/// base drawn from `bases`, `ell` uniform in `ells` among values whose block
/// has at most 4096 integers.
pub fn random_samples(
    count: usize,
    seed: u64,
    sigma_range: (f64, f64),
    t_max: f64,
    bases: &[u32],
    ells: std::ops::RangeInclusive<u32>,
    prec: u32,
) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let sigma = rng.gen_range(sigma_range.0..=sigma_range.1);
            let t = rng.gen_range(-t_max..=t_max);
            let base = bases[rng.gen_range(0..bases.len())];
            let allowed: Vec<u32> = ells.clone().filter(|&l| block_len(base, l) <= SAMPLE_MAX_BLOCK).collect();
            let ell = allowed[rng.gen_range(0..allowed.len())];
            let s = CComplex::new(Float::with_val(prec, sigma), Float::with_val(prec, t));
            Sample { s, base, ell }
        })
        .collect()
}

fn fmt_e(x: &CReal) -> String {
    format!("{:.3e}", x.to_f64())
}

fn dist(a: &CComplex, b: &CComplex) -> CReal {
    let p = a.prec().max(b.prec());
    (&a.with_prec(p) - &b.with_prec(p)).abs()
}

/// Values for several `ell` agree pairwise within the sum of their
/// remainder bounds plus `slack`.
pub fn check_ell_invariance(
    s: &CComplex,
    base: u32,
    ells: &[u32],
    tol: &CReal,
    slack: &CReal,
    ctx: &PrecisionContext,
) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut ev = Evaluator::new();
        let cfg = SeriesConfig::new(base, *ctx)?;
        let mut results = Vec::new();
        for &ell in ells {
            results.push(ev.eta_b(s, &cfg.with_ell(ell)?, tol)?);
        }
        let mut worst = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                let d = dist(&results[i].value, &results[j].value);
                let allow = Float::with_val(d.prec(), &results[i].remainder_bound + &results[j].remainder_bound) + slack;
                ok &= d <= allow;
                worst = worst.max(Float::with_val(d.prec(), &d / &allow).to_f64());
            }
        }
        let terms: Vec<String> = results.iter().map(|r| format!("l{}:M{}", r.ell, r.terms_used)).collect();
        Ok((ok, format!("worst diff/allowance {worst:.2e} [{}]", terms.join(" "))))
    };
    CheckOutcome::from_result("ell-invariance", run())
}

/// `zeta` through base 2 and base 3 agree within the combined bounds. Only
/// the points of `samples` are used.
pub fn check_base_invariance(samples: &[Sample], tol: &CReal, ctx: &PrecisionContext) -> CheckOutcome {
    let results: Vec<Result<f64>> = samples
        .par_iter()
        .map(|smp| {
            let cfg2 = SeriesConfig::new(2, *ctx)?;
            let cfg3 = SeriesConfig::new(3, *ctx)?;
            let mut ev = Evaluator::new();
            let a = ev.zeta(&smp.s, &cfg2, tol)?;
            let b = ev.zeta(&smp.s, &cfg3, tol)?;
            let d = dist(&a.value, &b.value);
            let allow = Float::with_val(d.prec(), &a.remainder_bound + &b.remainder_bound);
            Ok(Float::with_val(d.prec(), &d / &allow).to_f64())
        })
        .collect();
    summarize_ratios("base-invariance", results, 1.0)
}

fn summarize_ratios(name: &'static str, results: Vec<Result<f64>>, limit: f64) -> CheckOutcome {
    let mut worst = 0f64;
    let mut failures = 0;
    let total = results.len();
    for r in results {
        match r {
            Ok(x) => {
                worst = worst.max(x);
                if x.is_nan() || x > limit {
                    failures += 1;
                }
            }
            Err(e) => return CheckOutcome::new(name, false, format!("error: {e}")),
        }
    }
    CheckOutcome::new(name, failures == 0, format!("{}/{} within; worst ratio {worst:.2e}", total - failures, total))
}

/// For each sample, the planned evaluation differs from the partial sum with
/// 50 more terms at twice the working precision by at most the reported
/// remainder bound.
pub fn check_truncation_certificate(samples: &[Sample], tol: &CReal, ctx: &PrecisionContext) -> CheckOutcome {
    let results: Vec<Result<f64>> = samples
        .par_iter()
        .map(|smp| {
            let cfg = SeriesConfig::new(smp.base, *ctx)?.with_ell(smp.ell)?;
            let r = Evaluator::new().eta_b(&smp.s, &cfg, tol)?;
            let wide = ctx.with_extra_bits(r.working_bits - ctx.mantissa_bits()).doubled();
            let longer = partial_sum(&smp.s, smp.base, smp.ell, r.terms_used + 50, &wide)?;
            let d = dist(&r.value, &longer);
            Ok(Float::with_val(d.prec(), &d / &r.remainder_bound).to_f64())
        })
        .collect();
    summarize_ratios("truncation-certificate", results, 1.0)
}

/// `|value - reference| <= remainder_bound + 2^(-bits+16)` against the
/// accelerated alternating-series reference.
pub fn check_certified_error(samples: &[Sample], tol: &CReal, ctx: &PrecisionContext, mutation: Mutation) -> CheckOutcome {
    let slack = Float::with_val(ctx.mantissa_bits(), 1) >> (ctx.mantissa_bits() - 16);
    let digits = ctx.target_digits() + 10;
    let results: Vec<Result<f64>> = samples
        .par_iter()
        .map(|smp| {
            let cfg = SeriesConfig::new(smp.base, *ctx)?.with_ell(smp.ell)?.with_mutation(mutation);
            let r = Evaluator::new().eta_b(&smp.s, &cfg, tol)?;
            let reference = eta_b_reference(&smp.s, smp.base, digits)?;
            let d = dist(&r.value, &reference);
            let allow = Float::with_val(d.prec(), &r.remainder_bound + &slack);
            Ok(Float::with_val(d.prec(), &d / &allow).to_f64())
        })
        .collect();
    summarize_ratios("certified-error", results, 1.0)
}

/// Recurrence coefficients against the Bernoulli closed form, within
/// `2^(-bits+m+24)` for every `m <= last`.
pub fn check_oracle_agreement(s: &CComplex, base: u32, last: usize, ctx: &PrecisionContext) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut t = CoefficientTable::new(base, s, ctx)?;
        t.cstar_extend(last);
        let closed = cstar_via_bernoulli_sequence(s, last, base, ctx)?;
        let mut ok = true;
        let mut worst = f64::NEG_INFINITY;
        for (m, z) in closed.iter().enumerate() {
            let d = dist(t.cstar(m), z);
            let allow = Float::with_val(64, 1) >> (ctx.mantissa_bits() - (m as u32 + 24));
            ok &= d <= allow;
            worst = worst.max(Float::with_val(64, &d / &allow).to_f64());
        }
        Ok((ok, format!("m<={last}: worst diff/allowance {worst:.2e}")))
    };
    CheckOutcome::from_result("oracle-agreement", run())
}

/// `b^-sigma < c*_m(sigma) <= product bound <= P_b(sigma)` for `m <= last`.
pub fn check_bound_sandwich(sigmas: &[f64], bases: &[u32], last: usize, ctx: &PrecisionContext) -> CheckOutcome {
    let grid: Vec<(f64, u32)> = sigmas.iter().flat_map(|&s| bases.iter().map(move |&b| (s, b))).collect();
    let results: Vec<Result<Option<String>>> = grid
        .par_iter()
        .map(|&(sigma, base)| {
            let sig = ctx.real(sigma);
            let prof = BoundProfile::new(base, &sig, last, ctx)?;
            let mut t = CoefficientTable::new(base, &CComplex::from_real(sig), ctx)?;
            t.cstar_extend(last);
            for m in 0..=last {
                let c = &t.cstar(m).re;
                let up = prof.upper(m);
                if !(prof.lower() < c && *c <= up && up <= *prof.p_bound()) {
                    return Ok(Some(format!("violated at b={base} sigma={sigma} m={m}")));
                }
            }
            Ok(None)
        })
        .collect();
    let mut bad = Vec::new();
    for r in results {
        match r {
            Ok(Some(msg)) => bad.push(msg),
            Ok(None) => {}
            Err(e) => return CheckOutcome::new("bound-sandwich", false, format!("error: {e}")),
        }
    }
    let detail = if bad.is_empty() { format!("{} (b, sigma) pairs, m<={last}", grid.len()) } else { bad.join("; ") };
    CheckOutcome::new("bound-sandwich", bad.is_empty(), detail)
}

/// General product bound against the `b = 2` closed form.
pub fn check_b2_closed_form(sigmas: &[f64], last: usize, tol: &CReal, ctx: &PrecisionContext) -> CheckOutcome {
    let mut worst = Float::new(64);
    for &sigma in sigmas {
        let sig = ctx.real(sigma);
        for (m, p) in product_bound_profile(2, &sig, last, ctx).iter().enumerate() {
            let d = Float::with_val(p.prec(), p - cstar_sigma_bound_b2(&sig, m as u32)).abs();
            if d > worst {
                worst = Float::with_val(64, &d);
            }
        }
    }
    CheckOutcome::new("b2-closed-form", worst <= *tol, format!("max |diff| {} (tol {})", fmt_e(&worst), fmt_e(tol)))
}

/// `c_m(s + 2 pi i / ln b) = c_m(s)` within `tol`.
pub fn check_periodicity(s: &CComplex, bases: &[u32], last: usize, tol: &CReal, ctx: &PrecisionContext) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let prec = ctx.mantissa_bits();
        let mut worst = Float::new(64);
        for &b in bases {
            let period = Float::with_val(prec, pi(prec + 32) * 2u32) / Float::with_val(prec + 32, Float::ln_u(b));
            let mut shifted = s.with_prec(prec);
            shifted.im += &period;
            let mut t0 = CoefficientTable::new(b, s, ctx)?;
            let mut t1 = CoefficientTable::new(b, &shifted, ctx)?;
            t0.c_extend(last);
            t1.c_extend(last);
            for (x, y) in t0.c_values().unwrap().iter().zip(t1.c_values().unwrap()) {
                let d = dist(x, y);
                if d > worst {
                    worst = Float::with_val(64, &d);
                }
            }
        }
        Ok((worst <= *tol, format!("max |diff| {} (tol {})", fmt_e(&worst), fmt_e(tol))))
    };
    CheckOutcome::from_result("periodicity", run())
}

/// `|c*_m(s)| = |(s+1)_m|/(sigma+1)_m c*_m(sigma)` at `s = sigma + 2 pi i k / ln 2`.
pub fn check_equality_case(sigma: f64, ks: &[u32], last: usize, tol: &CReal, ctx: &PrecisionContext) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let prec = ctx.mantissa_bits();
        let sig = ctx.real(sigma);
        let mut real = CoefficientTable::new(2, &CComplex::from_real(sig.clone()), ctx)?;
        real.cstar_extend(last);
        let mut worst = Float::new(64);
        for &k in ks {
            let t = Float::with_val(prec, pi(prec + 32) * (2 * k)) / Float::with_val(prec + 32, Float::ln_u(2));
            let s = CComplex::new(sig.clone(), t);
            let mut table = CoefficientTable::new(2, &s, ctx)?;
            table.cstar_extend(last);
            let mut poch = PochhammerRatio::new(&s, ctx)?;
            poch.extend(last);
            for m in 0..=last {
                let rhs = Float::with_val(prec, poch.value_at(m) * &real.cstar(m).re);
                let d = Float::with_val(prec, table.cstar(m).abs() - &rhs).abs();
                if d > worst {
                    worst = Float::with_val(64, &d);
                }
            }
        }
        Ok((worst <= *tol, format!("max |diff| {} (tol {})", fmt_e(&worst), fmt_e(tol))))
    };
    CheckOutcome::from_result("equality-case", run())
}

/// `c*_m(1) = 1` and `c_m(1) = 1/(m+1)` within `tol`.
pub fn check_unit_identities(bases: &[u32], last: usize, tol: &CReal, ctx: &PrecisionContext) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let prec = ctx.mantissa_bits();
        let one = CComplex::one(prec);
        let mut worst = Float::new(64);
        for &b in bases {
            let mut t = CoefficientTable::new(b, &one, ctx)?;
            t.cstar_extend(last).c_extend(last);
            for m in 0..=last {
                let inv = CComplex::from_real(Float::with_val(prec, m + 1).recip());
                for d in [dist(t.cstar(m), &one), dist(&t.c_values().unwrap()[m], &inv)] {
                    if d > worst {
                        worst = Float::with_val(64, &d);
                    }
                }
            }
        }
        Ok((worst <= *tol, format!("max |diff| {} (tol {})", fmt_e(&worst), fmt_e(tol))))
    };
    CheckOutcome::from_result("unit-identities", run())
}

/// The minorant `w_m`: its recurrence within 16 units in the last place,
/// `b^sigma w_m > m!/(sigma+1)_m`, and the chain `c_m(sigma) >= w_m`,
/// `c*_m(sigma) > b^-sigma`.
pub fn check_w_identities(sigmas: &[f64], bases: &[u32], last: usize, ctx: &PrecisionContext) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let ulp16 = Float::with_val(64, 16) >> ctx.mantissa_bits();
        let mut worst = 0f64;
        let mut bad = Vec::new();
        for &sigma in sigmas {
            let sig = ctx.real(sigma);
            for &b in bases {
                let mut t = CoefficientTable::new(b, &CComplex::from_real(sig.clone()), ctx)?;
                t.cstar_extend(last).c_extend(last);
                let lower = Float::with_val(ctx.mantissa_bits(), b).pow(Float::with_val(ctx.mantissa_bits(), -&sig));
                let bs = Float::with_val(ctx.mantissa_bits() * 2, b).pow(&sig);
                for m in 0..=last {
                    let w = w_closed(&sig, b, m, ctx)?;
                    if m >= 1 {
                        let (l, r) = w_recurrence_sides(&sig, b, m, ctx)?;
                        let rel = Float::with_val(l.prec(), &l - &r).abs() / &r;
                        worst = worst.max(Float::with_val(64, &rel / &ulp16).to_f64());
                        if rel > ulp16 {
                            bad.push(format!("recurrence b={b} sigma={sigma} m={m}"));
                        }
                    }
                    if Float::with_val(w.prec(), &bs * &w) <= beta_integral(&sig, m, ctx) {
                        bad.push(format!("integral b={b} sigma={sigma} m={m}"));
                    }
                    let cm = &t.c_values().unwrap()[m].re;
                    // c_m is rounded at the production width; w_m at twice that.
                    let w_rounded = Float::with_val(ctx.mantissa_bits(), &w);
                    if *cm < w_rounded {
                        bad.push(format!("c_m >= w_m b={b} sigma={sigma} m={m}"));
                    }
                    if t.cstar(m).re <= lower {
                        bad.push(format!("lower bound b={b} sigma={sigma} m={m}"));
                    }
                }
            }
        }
        let detail = if bad.is_empty() {
            format!("m<={last}: worst recurrence residual {worst:.2e} x 16ulp")
        } else {
            bad.join("; ")
        };
        Ok((bad.is_empty(), detail))
    };
    CheckOutcome::from_result("w-identities", run())
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub digits: u32,
    pub quick: bool,
    pub seed: u64,
    pub mutation: Mutation,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { digits: 30, quick: false, seed: 0x5eed, mutation: Mutation::None }
    }
}

/// Every check on the default grid (a reduced grid with `quick`).
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let ctx = PrecisionContext::new(opts.digits)?;
    let prec = ctx.mantissa_bits();
    let tol = ctx.tolerance();
    let (n_samples, last_big, last_mid) = if opts.quick { (8, 60, 20) } else { (50, 200, 50) };
    let samples = random_samples(n_samples, opts.seed, (0.2, 3.0), 50.0, &[2, 3, 5], 2..=8, prec);
    let loose = Float::with_val(prec, 10).pow(-(opts.digits as i32 - 4));
    let near = Float::with_val(prec, 10).pow(-(opts.digits as i32 - 2));
    let ell_slack = Float::with_val(prec, 8) >> prec;
    let s_ell = CComplex::new(ctx.real(0.5), ctx.real(14.134725));
    let mutation = opts.mutation;

    type Job<'a> = Box<dyn Fn() -> CheckOutcome + Send + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(|| check_ell_invariance(&s_ell, 2, &[2, 3, 5, 8], &tol, &ell_slack, &ctx)),
        Box::new(|| check_base_invariance(&samples, &tol, &ctx)),
        Box::new(|| check_truncation_certificate(&samples, &tol, &ctx)),
        Box::new(|| check_certified_error(&samples, &tol, &ctx, mutation)),
        Box::new(|| check_oracle_agreement(&ctx.complex(2, 0), 2, 40, &ctx)),
        Box::new(|| check_bound_sandwich(&[0.3, 1.0, 2.5], &[2, 3, 5], last_big, &ctx)),
        Box::new(|| check_b2_closed_form(&[0.3, 1.0, 2.5], 100, &near, &ctx)),
        Box::new(|| check_periodicity(&ctx.complex(0.7, 3.0), &[2, 3], last_mid, &loose, &ctx)),
        Box::new(|| check_equality_case(0.7, &[1, 2], last_mid, &loose, &ctx)),
        Box::new(|| check_unit_identities(&[2, 3, 5], last_big, &near, &ctx)),
        Box::new(|| check_w_identities(&[0.3, 1.0, 2.5], &[2, 3, 5], 30, &ctx)),
    ];
    Ok(jobs.par_iter().map(|job| job()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_in_range() {
        let a = random_samples(20, 7, (0.2, 3.0), 50.0, &[2, 3, 5], 2..=8, 128);
        let b = random_samples(20, 7, (0.2, 3.0), 50.0, &[2, 3, 5], 2..=8, 128);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.s, y.s);
            assert!(x.s.re >= 0.2 && x.s.re <= 3.0);
            assert!(x.s.im.to_f64().abs() <= 50.0);
            assert!(block_len(x.base, x.ell) <= SAMPLE_MAX_BLOCK);
        }
    }

    #[test]
    fn dropped_sign_is_caught() {
        let ctx = PrecisionContext::new(20).unwrap();
        let samples = random_samples(3, 11, (0.5, 2.0), 10.0, &[2], 3..=3, ctx.mantissa_bits());
        let tol = ctx.tolerance();
        assert!(check_certified_error(&samples, &tol, &ctx, Mutation::None).passed);
        assert!(!check_certified_error(&samples, &tol, &ctx, Mutation::DropAlternatingSign).passed);
    }
}
